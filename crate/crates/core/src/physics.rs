//! Domain types and the pointwise rates every balance integral is built from.
//!
//! Geometry: the cooling beam propagates along `+x` with a Gaussian profile
//! in `y` centred at the offset `d`. The crystal rotates so that the mean
//! velocity at height `y` is `v_x = ω_r y`; for `d > 0` the beam sits on the
//! side receding from the laser.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{AMU, HBAR, K_B};
use crate::quadrature::VelocityQuadrature;
use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, value, "must be positive and finite"))
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, value, "must be non-negative and finite"))
    }
}

/// Ion species and cooling transition, with the recoil and Doppler
/// constants derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpeciesFields", into = "SpeciesFields")]
pub struct AtomicSpecies {
    mass: f64,
    wavelength: f64,
    gamma0: f64,
    k: f64,
    recoil_energy: f64,
    v_rec: f64,
    doppler_limit: f64,
}

#[derive(Serialize, Deserialize)]
struct SpeciesFields {
    mass: f64,
    wavelength: f64,
    gamma0: f64,
}

impl TryFrom<SpeciesFields> for AtomicSpecies {
    type Error = Error;
    fn try_from(f: SpeciesFields) -> Result<Self> {
        AtomicSpecies::new(f.mass, f.wavelength, f.gamma0)
    }
}

impl From<AtomicSpecies> for SpeciesFields {
    fn from(s: AtomicSpecies) -> Self {
        SpeciesFields {
            mass: s.mass,
            wavelength: s.wavelength,
            gamma0: s.gamma0,
        }
    }
}

impl AtomicSpecies {
    /// `mass` in kg, `wavelength` in m, `gamma0` the natural linewidth in rad/s.
    pub fn new(mass: f64, wavelength: f64, gamma0: f64) -> Result<Self> {
        let mass = positive("mass", mass)?;
        let wavelength = positive("wavelength", wavelength)?;
        let gamma0 = positive("gamma0", gamma0)?;
        // Wave number of the resonant transition, used for the detuned laser too.
        let k = 2.0 * PI / wavelength;
        let hk = HBAR * k;
        Ok(AtomicSpecies {
            mass,
            wavelength,
            gamma0,
            k,
            recoil_energy: hk * hk / (2.0 * mass),
            v_rec: 5.0 * hk / (6.0 * mass),
            doppler_limit: HBAR * gamma0 / (2.0 * K_B),
        })
    }

    /// ⁹Be⁺ on the 313 nm 2s ²S₁/₂ → 2p ²P₃/₂ line, γ₀/2π = 18 MHz.
    pub fn beryllium9() -> Self {
        AtomicSpecies::new(9.012 * AMU, 313e-9, 2.0 * PI * 18e6).expect("preset is valid")
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
    /// Wave number 2π/λ, rad/m.
    pub fn k(&self) -> f64 {
        self.k
    }
    /// Single-photon recoil energy (ħk)²/2m, J.
    pub fn recoil_energy(&self) -> f64 {
        self.recoil_energy
    }
    /// Effective in-plane recoil velocity 5ħk/6m, m/s.
    pub fn v_rec(&self) -> f64 {
        self.v_rec
    }
    /// Free-ion Doppler limit ħγ₀/2k_B, K.
    pub fn doppler_limit(&self) -> f64 {
        self.doppler_limit
    }
}

/// Perpendicular cooling beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerpBeam {
    s0: f64,
    waist: f64,
    offset: f64,
    detuning: f64,
}

impl PerpBeam {
    /// `s0` peak saturation parameter, `waist` w_y (m), `offset` d (m,
    /// signed), `detuning` Δω = ω_L − ω₀ − R/ħ (rad/s, red is negative).
    pub fn new(s0: f64, waist: f64, offset: f64, detuning: f64) -> Result<Self> {
        let s0 = non_negative("s0", s0)?;
        let waist = positive("waist", waist)?;
        if !offset.is_finite() {
            return Err(Error::invalid("offset", offset, "must be finite"));
        }
        if !detuning.is_finite() {
            return Err(Error::invalid("detuning", detuning, "must be finite"));
        }
        Ok(PerpBeam {
            s0,
            waist,
            offset,
            detuning,
        })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }
    pub fn waist(&self) -> f64 {
        self.waist
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn with_offset(self, offset: f64) -> Result<Self> {
        PerpBeam::new(self.s0, self.waist, offset, self.detuning)
    }

    pub fn with_detuning(self, detuning: f64) -> Result<Self> {
        PerpBeam::new(self.s0, self.waist, self.offset, detuning)
    }

    pub fn with_s0(self, s0: f64) -> Result<Self> {
        PerpBeam::new(s0, self.waist, self.offset, self.detuning)
    }

    pub fn with_waist(self, waist: f64) -> Result<Self> {
        PerpBeam::new(self.s0, waist, self.offset, self.detuning)
    }

    /// Local saturation parameter S(y).
    #[inline]
    pub fn saturation_at(&self, y: f64) -> f64 {
        let t = (y - self.offset) / self.waist;
        self.s0 * (-2.0 * t * t).exp()
    }
}

/// Parallel (axial) cooling beam, tuned half a linewidth red of resonance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ParBeam {
    s_par: f64,
}

impl ParBeam {
    pub fn new(s_par: f64) -> Result<Self> {
        Ok(ParBeam {
            s_par: non_negative("s_par", s_par)?,
        })
    }

    pub fn off() -> Self {
        ParBeam { s_par: 0.0 }
    }

    pub fn s_par(&self) -> f64 {
        self.s_par
    }

    /// Fixed detuning −γ₀/2 of the parallel beam.
    pub fn detuning(&self, species: &AtomicSpecies) -> f64 {
        -0.5 * species.gamma0()
    }
}

/// Cold-fluid single-plane crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalState {
    radius: f64,
    sigma0: f64,
    omega_r: f64,
}

impl CrystalState {
    /// `radius` R_c (m), `sigma0` central areal density (1/m²), `omega_r`
    /// rotation frequency (rad/s, ≥ 0).
    pub fn new(radius: f64, sigma0: f64, omega_r: f64) -> Result<Self> {
        Ok(CrystalState {
            radius: positive("radius", radius)?,
            sigma0: positive("sigma0", sigma0)?,
            omega_r: non_negative("omega_r", omega_r)?,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }

    pub fn with_omega_r(self, omega_r: f64) -> Result<Self> {
        CrystalState::new(self.radius, self.sigma0, omega_r)
    }

    pub fn with_radius(self, radius: f64) -> Result<Self> {
        CrystalState::new(radius, self.sigma0, self.omega_r)
    }

    pub fn with_sigma0(self, sigma0: f64) -> Result<Self> {
        CrystalState::new(self.radius, sigma0, self.omega_r)
    }

    /// Ion number (2/3)πR_c²Σ₀ of the projected spheroid.
    pub fn ion_number(&self) -> f64 {
        2.0 / 3.0 * PI * self.radius * self.radius * self.sigma0
    }

    /// `∫ σ(x, y) dx` along the chord at height `y`: πΣ₀(R_c² − y²)/(2R_c).
    #[inline]
    pub fn chord_density(&self, y: f64) -> f64 {
        let r2 = self.radius * self.radius;
        let q = r2 - y * y;
        if q <= 0.0 {
            0.0
        } else {
            PI * self.sigma0 * q / (2.0 * self.radius)
        }
    }
}

/// In-plane thermal state, parameterised by the velocity scale
/// u = √(2k_B T_⊥ / m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    u: f64,
}

impl ThermalState {
    pub fn new(u: f64) -> Result<Self> {
        Ok(ThermalState {
            u: positive("u", u)?,
        })
    }

    pub fn from_temperature(species: &AtomicSpecies, temperature: f64) -> Result<Self> {
        let t = positive("temperature", temperature)?;
        ThermalState::new((2.0 * K_B * t / species.mass()).sqrt())
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn temperature(&self, species: &AtomicSpecies) -> f64 {
        self.u * self.u * species.mass() / (2.0 * K_B)
    }
}

/// Photon scatter rate (1/s) of an ion at height `y` with velocity `v_x`.
pub fn scatter_rate(species: &AtomicSpecies, beam: &PerpBeam, y: f64, v_x: f64) -> f64 {
    let s = beam.saturation_at(y);
    let det = 2.0 / species.gamma0() * (beam.detuning() - species.k() * v_x);
    species.gamma0() * s / (1.0 + 2.0 * s + det * det)
}

/// Areal ion density (1/m²), zero outside the crystal.
pub fn areal_density(crystal: &CrystalState, x: f64, y: f64) -> f64 {
    let r = crystal.radius();
    let q = 1.0 - (x * x + y * y) / (r * r);
    if q <= 0.0 {
        0.0
    } else {
        crystal.sigma0() * q.sqrt()
    }
}

/// Thermal distribution of `v_x` about the rigid-rotation mean `ω_r y` (s/m).
pub fn velocity_pdf(state: &ThermalState, crystal: &CrystalState, y: f64, v_x: f64) -> f64 {
    let t = (v_x - crystal.omega_r() * y) / state.u();
    (-t * t).exp() / (state.u() * SQRT_PI)
}

/// Velocity-averaged scatter rate per unit area at `(x, y)`, 1/(s m²).
pub fn scatter_rate_density(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    state: &ThermalState,
    x: f64,
    y: f64,
) -> Result<f64> {
    scatter_rate_density_with(&VelocityQuadrature::default(), species, beam, crystal, state, x, y)
}

/// [`scatter_rate_density`] with an explicit velocity rule.
pub fn scatter_rate_density_with(
    vq: &VelocityQuadrature,
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    state: &ThermalState,
    x: f64,
    y: f64,
) -> Result<f64> {
    let sigma = areal_density(crystal, x, y);
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let line = LineProfile::at(species, beam, crystal, state.u(), y);
    if line.saturation == 0.0 {
        return Ok(0.0);
    }
    let [m0, _] = vq.lorentzian_moments(line.width_sq, line.center, line.slope)?;
    Ok(sigma * species.gamma0() * line.saturation * m0 / SQRT_PI)
}

/// Parameters of the Lorentzian in the reduced velocity `v = (v_x − ω_r y)/u`
/// at height `y`: γ_L = γ₀ S / (width_sq + (center − slope·v)²).
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineProfile {
    pub saturation: f64,
    pub width_sq: f64,
    pub center: f64,
    pub slope: f64,
}

impl LineProfile {
    #[inline]
    pub fn at(species: &AtomicSpecies, beam: &PerpBeam, crystal: &CrystalState, u: f64, y: f64) -> Self {
        let s = beam.saturation_at(y);
        let half = 0.5 * species.gamma0();
        let k = species.k();
        LineProfile {
            saturation: s,
            width_sq: 1.0 + 2.0 * s,
            center: (beam.detuning() - k * crystal.omega_r() * y) / half,
            slope: k * u / half,
        }
    }
}
