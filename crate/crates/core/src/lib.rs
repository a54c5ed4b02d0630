//! Perpendicular Doppler laser cooling of a rotating single-plane ion crystal
//! held by a rotating-wall potential in a Penning trap.
//!
//! The crate computes the laser torque on the crystal, the energy exchanged
//! with the perpendicular cooling beam and the rotating wall, recoil heating
//! from a parallel beam, and the equilibrium in-plane temperature at which
//! these rates balance. Parameter sweeps over detuning and beam offset (or
//! the dimensionless detuning/dispersion pair of the small-beam limit) map
//! out temperature troughs and zero-torque operating curves.
//!
//! All quantities are SI internally: rad/s for angular frequencies, metres,
//! kilograms, kelvin, joules.
//!
//! ```
//! use perpcool::physics::{AtomicSpecies, CrystalState, PerpBeam};
//! use perpcool::balance::{reduced_params_from_physical, total_balance_reduced};
//!
//! let be = AtomicSpecies::beryllium9();
//! let crystal = CrystalState::new(225e-6, 2.77e9, 2.0 * std::f64::consts::PI * 45e3).unwrap();
//! let beam = PerpBeam::new(0.5, 30e-6, 14e-6, -2.0 * std::f64::consts::PI * 25e6).unwrap();
//! let params = reduced_params_from_physical(&be, &beam, &crystal, false);
//! assert!(params.delta_w > 2.9 && params.delta_w < 3.1);
//! let rate = total_balance_reduced(&params, 10.0).unwrap();
//! assert!(rate.is_finite());
//! ```

pub mod balance;
pub mod constants;
pub mod equilibrium;
mod error;
pub mod physics;
pub mod quadrature;
pub mod sweep;

pub use error::{Error, Result};
