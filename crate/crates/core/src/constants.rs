//! CODATA 2018 exact and recommended values, SI units.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 299_792_458.0;

/// Atomic mass constant, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
