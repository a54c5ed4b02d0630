//! Laser torque, energy exchange with the perpendicular beam and the
//! rotating wall, parallel-beam recoil heating, and the reduced
//! dimensionless balance valid for beams small compared to the crystal.
//!
//! After the substitution `v = (v_x − ω_r y)/u` the velocity integral at
//! each height `y` reduces to the two moments computed by
//! [`VelocityQuadrature::lorentzian_moments`]. The integrand depends on `x`
//! only through the areal density, so the default spatial route integrates
//! `x` in closed form along each chord and adapts in `y`; the nested
//! two-dimensional route is kept as a reference.

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::physics::{
    areal_density, AtomicSpecies, CrystalState, LineProfile, ParBeam, PerpBeam, ThermalState,
};
use crate::quadrature::{integrate_disk_vec, integrate_points, VelocityQuadrature};
use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// How the two spatial integrals are carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialMethod {
    /// Closed-form chord integral in `x`, adaptive in `y`.
    #[default]
    Chord,
    /// Nested adaptive integration over `x` and `y ∈ ±√(R_c² − x²)`.
    NestedDisk,
}

/// Numerical settings shared by all balance integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceSettings {
    pub velocity: VelocityQuadrature,
    pub rel_tol: f64,
    /// Absolute tolerance as a fraction of the crystal's peak scatter power
    /// (every ion scattering at its saturated maximum) times the momentum
    /// or energy scale of each integral.
    pub abs_scale: f64,
    pub max_subdivisions: usize,
    pub spatial: SpatialMethod,
}

impl Default for BalanceSettings {
    fn default() -> Self {
        BalanceSettings {
            velocity: VelocityQuadrature::default(),
            rel_tol: 1e-8,
            abs_scale: 1e-12,
            max_subdivisions: 2000,
            spatial: SpatialMethod::Chord,
        }
    }
}

impl BalanceSettings {
    pub fn with_velocity(mut self, velocity: VelocityQuadrature) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_spatial(mut self, spatial: SpatialMethod) -> Self {
        self.spatial = spatial;
        self
    }
}

/// Energy-exchange rates (J/s) and laser torque (N·m) at one thermal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceResult {
    pub laser_rate: f64,
    pub wall_rate: f64,
    pub parallel_rate: f64,
    pub total_rate: f64,
    pub torque: f64,
}

impl BalanceResult {
    pub fn zero() -> Self {
        BalanceResult {
            laser_rate: 0.0,
            wall_rate: 0.0,
            parallel_rate: 0.0,
            total_rate: 0.0,
            torque: 0.0,
        }
    }
}

/// Which per-height integrands to accumulate.
#[derive(Clone, Copy)]
enum Integrand {
    Torque,
    LaserEnergy,
    /// Laser plus wall in the combined form `ħk u (v + v_rec/u)`.
    LaserWall,
}

struct Problem<'a> {
    species: &'a AtomicSpecies,
    beam: &'a PerpBeam,
    crystal: &'a CrystalState,
    u: f64,
    settings: &'a BalanceSettings,
}

impl Problem<'_> {
    /// `γ₀ S(y)/√π · [m0, m1]` at height `y`; zero where the beam is dark.
    #[inline]
    fn line(&self, y: f64) -> Result<(f64, [f64; 2])> {
        let lp = LineProfile::at(self.species, self.beam, self.crystal, self.u, y);
        if lp.saturation == 0.0 {
            return Ok((0.0, [0.0, 0.0]));
        }
        let m = self
            .settings
            .velocity
            .lorentzian_moments(lp.width_sq, lp.center, lp.slope)?;
        Ok((self.species.gamma0() * lp.saturation / SQRT_PI, m))
    }

    #[inline]
    fn value(&self, what: Integrand, y: f64, prefactor: f64, m: [f64; 2]) -> f64 {
        let hk = HBAR * self.species.k();
        match what {
            Integrand::Torque => hk * y * prefactor * m[0],
            Integrand::LaserEnergy => {
                let recoil = 5.0 / 3.0 * self.species.recoil_energy();
                prefactor
                    * ((hk * self.crystal.omega_r() * y + recoil) * m[0] + hk * self.u * m[1])
            }
            Integrand::LaserWall => {
                prefactor * hk * self.u * (m[1] + self.species.v_rec() / self.u * m[0])
            }
        }
    }

    fn abs_tol(&self, what: Integrand) -> f64 {
        let s0 = self.beam.s0();
        let peak_power = self.species.gamma0() * s0 / (1.0 + 2.0 * s0) * self.crystal.ion_number();
        let hk = HBAR * self.species.k();
        let scale = match what {
            Integrand::Torque => hk * self.crystal.radius(),
            Integrand::LaserEnergy | Integrand::LaserWall => {
                hk * (self.u
                    + self.crystal.omega_r() * self.crystal.radius()
                    + self.species.v_rec())
            }
        };
        self.settings.abs_scale * peak_power * scale
    }

    fn y_breaks(&self) -> Vec<f64> {
        let r = self.crystal.radius();
        let d = self.beam.offset();
        let w = self.beam.waist();
        let mut pts = vec![-r, r];
        for y in [d - 6.0 * w, d, d + 6.0 * w] {
            if y > -r && y < r {
                pts.push(y);
            }
        }
        let kw = self.species.k() * self.crystal.omega_r();
        if kw > 0.0 {
            let resonance = self.beam.detuning() / kw;
            if resonance > -r && resonance < r {
                pts.push(resonance);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn integrate<const N: usize>(&self, what: [Integrand; N]) -> Result<[f64; N]> {
        if self.beam.s0() == 0.0 {
            return Ok([0.0; N]);
        }
        let mut abs_tol = [0.0; N];
        for (t, w) in abs_tol.iter_mut().zip(what) {
            *t = self.abs_tol(w);
        }
        let breaks = self.y_breaks();
        let (value, _) = match self.settings.spatial {
            SpatialMethod::Chord => integrate_points(
                |y| {
                    let chord = self.crystal.chord_density(y);
                    let mut out = [0.0; N];
                    if chord == 0.0 {
                        return Ok(out);
                    }
                    let (pre, m) = self.line(y)?;
                    for (o, w) in out.iter_mut().zip(what) {
                        *o = self.value(w, y, chord * pre, m);
                    }
                    Ok(out)
                },
                &breaks,
                self.settings.rel_tol,
                abs_tol,
                self.settings.max_subdivisions,
            )?,
            SpatialMethod::NestedDisk => integrate_disk_vec(
                |x, y| {
                    let sigma = areal_density(self.crystal, x, y);
                    let mut out = [0.0; N];
                    if sigma == 0.0 {
                        return Ok(out);
                    }
                    let (pre, m) = self.line(y)?;
                    for (o, w) in out.iter_mut().zip(what) {
                        *o = self.value(w, y, sigma * pre, m);
                    }
                    Ok(out)
                },
                self.crystal.radius(),
                &breaks[1..breaks.len() - 1],
                self.settings.rel_tol,
                abs_tol,
                self.settings.max_subdivisions,
            )?,
        };
        Ok(value)
    }
}

fn problem<'a>(
    species: &'a AtomicSpecies,
    beam: &'a PerpBeam,
    crystal: &'a CrystalState,
    state: &ThermalState,
    settings: &'a BalanceSettings,
) -> Problem<'a> {
    Problem {
        species,
        beam,
        crystal,
        u: state.u(),
        settings,
    }
}

/// Net laser torque on the crystal, N·m. Positive torque tends to spin the
/// crystal up.
pub fn laser_torque(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    state: &ThermalState,
    settings: &BalanceSettings,
) -> Result<f64> {
    let [t] = problem(species, beam, crystal, state, settings).integrate([Integrand::Torque])?;
    Ok(t)
}

/// Rate of in-plane kinetic energy change from the perpendicular beam, J/s.
/// Each scattering event contributes `ħk v_x + 5R/3`.
pub fn laser_energy_rate(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    state: &ThermalState,
    settings: &BalanceSettings,
) -> Result<f64> {
    let [e] =
        problem(species, beam, crystal, state, settings).integrate([Integrand::LaserEnergy])?;
    Ok(e)
}

/// Laser plus rotating-wall energy rate computed directly from the combined
/// integrand `ħk (v_x − ω_r y) + 5R/3`, J/s.
pub fn laser_wall_rate(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    state: &ThermalState,
    settings: &BalanceSettings,
) -> Result<f64> {
    let [e] = problem(species, beam, crystal, state, settings).integrate([Integrand::LaserWall])?;
    Ok(e)
}

/// Full energy balance: laser, rotating wall (−ω_r τ) and parallel-beam
/// recoil heating.
pub fn total_balance_full(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    state: &ThermalState,
    par: &ParBeam,
    settings: &BalanceSettings,
) -> Result<BalanceResult> {
    let [torque, laser_rate] = problem(species, beam, crystal, state, settings)
        .integrate([Integrand::Torque, Integrand::LaserEnergy])?;
    let wall_rate = -crystal.omega_r() * torque;
    let parallel_rate = parallel_recoil_rate(species, par, crystal);
    Ok(BalanceResult {
        laser_rate,
        wall_rate,
        parallel_rate,
        total_rate: laser_rate + wall_rate + parallel_rate,
        torque,
    })
}

/// In-plane recoil heating from a uniform parallel beam at −γ₀/2, J/s.
pub fn parallel_recoil_rate(species: &AtomicSpecies, par: &ParBeam, crystal: &CrystalState) -> f64 {
    let s = par.s_par();
    species.gamma0() * s / (1.0 + s) * species.recoil_energy() / 3.0 * crystal.ion_number()
}

/// Beam with offset and waist rescaled for the lowest-order density
/// correction: both d and w_y² are divided by `1 + w_y²/(4R_c²)`.
pub fn rescale_beam(beam: &PerpBeam, crystal: &CrystalState) -> PerpBeam {
    let w = beam.waist();
    let r = crystal.radius();
    let factor = 1.0 / (1.0 + w * w / (4.0 * r * r));
    PerpBeam::new(beam.s0(), w * factor.sqrt(), beam.offset() * factor, beam.detuning())
        .expect("rescaling preserves beam validity")
}

/// Predicted slope of constant-temperature lines in the (detuning, offset)
/// plane, metres of offset per rad/s of detuning:
/// `(1 + w_y²/4R_c²) / (k ω_r)`.
pub fn predicted_contour_slope(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
) -> f64 {
    let w = beam.waist();
    let r = crystal.radius();
    (1.0 + w * w / (4.0 * r * r)) / (species.k() * crystal.omega_r())
}

/// Parameters of the small-beam reduced balance, in half-linewidth units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub s0: f64,
    /// k v_rec / (γ₀/2)
    pub kv_over_hw: f64,
    /// Detuning from the Doppler-shifted resonance at the beam centre.
    pub delta_d: f64,
    /// Spread of rotational Doppler shifts across the waist.
    pub delta_w: f64,
}

impl ReducedParams {
    pub fn new(species: &AtomicSpecies, s0: f64, delta_d: f64, delta_w: f64) -> Result<Self> {
        if !(s0 >= 0.0 && s0.is_finite()) {
            return Err(Error::invalid("s0", s0, "must be non-negative"));
        }
        if !delta_d.is_finite() {
            return Err(Error::invalid("delta_d", delta_d, "must be finite"));
        }
        if !(delta_w >= 0.0 && delta_w.is_finite()) {
            return Err(Error::invalid("delta_w", delta_w, "must be non-negative"));
        }
        Ok(ReducedParams {
            s0,
            kv_over_hw: species.k() * species.v_rec() / (0.5 * species.gamma0()),
            delta_d,
            delta_w,
        })
    }
}

/// Δ_d and Δ_w for a physical configuration; with `density_corrected` the
/// beam is first passed through [`rescale_beam`].
pub fn reduced_params_from_physical(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    density_corrected: bool,
) -> ReducedParams {
    let b = if density_corrected {
        rescale_beam(beam, crystal)
    } else {
        *beam
    };
    let half = 0.5 * species.gamma0();
    let kw = species.k() * crystal.omega_r();
    ReducedParams {
        s0: b.s0(),
        kv_over_hw: species.k() * species.v_rec() / half,
        delta_d: (b.detuning() - kw * b.offset()) / half,
        delta_w: kw * b.waist() / half,
    }
}

const DELTA_CUTOFF: f64 = 6.0;

/// Dimensionless small-beam balance at `u / v_rec`; its sign and roots
/// follow the full balance when `|d|, w_y ≪ R_c`.
pub fn total_balance_reduced(params: &ReducedParams, u_over_vrec: f64) -> Result<f64> {
    total_balance_reduced_with(&VelocityQuadrature::default(), params, u_over_vrec, 1e-10)
}

pub fn total_balance_reduced_with(
    vq: &VelocityQuadrature,
    params: &ReducedParams,
    u_over_vrec: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(u_over_vrec > 0.0 && u_over_vrec.is_finite()) {
        return Err(Error::invalid("u_over_vrec", u_over_vrec, "must be positive"));
    }
    if params.s0 == 0.0 {
        return Ok(0.0);
    }
    let slope = params.kv_over_hw * u_over_vrec;
    let inv_u = 1.0 / u_over_vrec;
    let mut pts = vec![-DELTA_CUTOFF, 0.0, DELTA_CUTOFF];
    if params.delta_w > 0.0 {
        let res = params.delta_d / params.delta_w;
        if res.abs() < DELTA_CUTOFF {
            pts.push(res);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let abs_tol = 1e-14 * (1.0 + inv_u);
    let (value, _) = integrate_points(
        |delta| {
            let g = (-2.0 * delta * delta).exp();
            let width_sq = 1.0 + 2.0 * params.s0 * g;
            let center = params.delta_d - params.delta_w * delta;
            let [m0, m1] = vq.lorentzian_moments(width_sq, center, slope)?;
            Ok([g * (m1 + inv_u * m0)])
        },
        &pts,
        rel_tol,
        [abs_tol],
        2000,
    )?;
    Ok(value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::VelocityQuadrature;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn be() -> AtomicSpecies {
        AtomicSpecies::beryllium9()
    }

    fn fig4() -> (PerpBeam, CrystalState) {
        (
            PerpBeam::new(0.5, 30e-6, 14e-6, -2.0 * PI * 25e6).unwrap(),
            CrystalState::new(225e-6, 2.77e9, 2.0 * PI * 45e3).unwrap(),
        )
    }

    fn rel(a: f64, b: f64, scale: f64) -> f64 {
        (a - b).abs() / scale
    }

    #[test]
    fn torque_vanishes_without_rotation_or_offset() {
        let s = BalanceSettings::default();
        let c = CrystalState::new(225e-6, 2.77e9, 0.0).unwrap();
        for (s0, w, dw) in [(0.5, 30e-6, -1e8), (2.0, 60e-6, 3e7), (0.1, 10e-6, 0.0)] {
            let beam = PerpBeam::new(s0, w, 0.0, dw).unwrap();
            let st = ThermalState::new(0.9).unwrap();
            let species = be();
            let tol = problem(&species, &beam, &c, &st, &s).abs_tol(Integrand::Torque);
            let t = laser_torque(&species, &beam, &c, &st, &s).unwrap();
            assert!(t.abs() <= tol, "torque {t} vs tol {tol}");
        }
    }

    #[test]
    fn receding_side_beam_spins_the_crystal_up() {
        let s = BalanceSettings::default();
        let (beam, c) = fig4();
        let beam = beam.with_offset(80e-6).unwrap();
        let st = ThermalState::new(1.0).unwrap();
        assert!(laser_torque(&be(), &beam, &c, &st, &s).unwrap() > 0.0);
    }

    #[test]
    fn dark_beam_gives_zero_rates() {
        let s = BalanceSettings::default();
        let (beam, c) = fig4();
        let beam = beam.with_s0(0.0).unwrap();
        let st = ThermalState::new(1.0).unwrap();
        let r = total_balance_full(&be(), &beam, &c, &st, &ParBeam::off(), &s).unwrap();
        assert_eq!(r, BalanceResult::zero());
    }

    #[test]
    fn wall_does_no_work_without_rotation() {
        let s = BalanceSettings::default();
        let (beam, c) = fig4();
        let c = c.with_omega_r(0.0).unwrap();
        let st = ThermalState::new(0.7).unwrap();
        let par = ParBeam::new(0.2).unwrap();
        let r = total_balance_full(&be(), &beam, &c, &st, &par, &s).unwrap();
        assert_eq!(r.wall_rate, 0.0);
        assert_eq!(r.total_rate, r.laser_rate + r.parallel_rate);
    }

    #[test]
    fn wall_rate_matches_independent_torque() {
        let s = BalanceSettings::default();
        let (beam, c) = fig4();
        for u in [0.3, 1.0, 4.0] {
            for d in [-20e-6, 14e-6, 40e-6] {
                let beam = beam.with_offset(d).unwrap();
                let st = ThermalState::new(u).unwrap();
                let r = total_balance_full(&be(), &beam, &c, &st, &ParBeam::off(), &s).unwrap();
                let t = laser_torque(&be(), &beam, &c, &st, &s).unwrap();
                let wall = -c.omega_r() * t;
                assert!(
                    rel(r.wall_rate, wall, wall.abs()) < 1e-10,
                    "u={u} d={d}: {} vs {}",
                    r.wall_rate,
                    wall
                );
            }
        }
    }

    #[test]
    fn laser_minus_wall_work_equals_combined_integrand() {
        let s = BalanceSettings::default();
        let (beam, c) = fig4();
        for u in [0.4, 1.1, 3.0] {
            let st = ThermalState::new(u).unwrap();
            let laser = laser_energy_rate(&be(), &beam, &c, &st, &s).unwrap();
            let torque = laser_torque(&be(), &beam, &c, &st, &s).unwrap();
            let combined = laser_wall_rate(&be(), &beam, &c, &st, &s).unwrap();
            let r = total_balance_full(&be(), &beam, &c, &st, &ParBeam::off(), &s).unwrap();
            let scale = laser.abs().max((c.omega_r() * torque).abs());
            assert!(rel(laser - c.omega_r() * torque, combined, scale) < 1e-8);
            assert!(rel(r.total_rate, combined, scale) < 1e-8);
        }
    }

    #[test]
    fn chord_and_nested_disk_routes_agree() {
        let chord = BalanceSettings::default();
        let nested = BalanceSettings::default().with_spatial(SpatialMethod::NestedDisk);
        let (beam, c) = fig4();
        let st = ThermalState::new(1.0).unwrap();
        let a = total_balance_full(&be(), &beam, &c, &st, &ParBeam::off(), &chord).unwrap();
        let b = total_balance_full(&be(), &beam, &c, &st, &ParBeam::off(), &nested).unwrap();
        assert_relative_eq!(a.torque, b.torque, max_relative = 1e-7);
        assert_relative_eq!(a.laser_rate, b.laser_rate, max_relative = 1e-7);
    }

    #[test]
    fn hermite_order_doubling_is_stable() {
        let (beam, c) = fig4();
        let base = BalanceSettings::default();
        let doubled =
            BalanceSettings::default().with_velocity(VelocityQuadrature::new(80, 1.2).unwrap());
        for u in [0.2, 0.8, 1.5, 2.3] {
            let st = ThermalState::new(u).unwrap();
            let a = total_balance_full(&be(), &beam, &c, &st, &ParBeam::off(), &base).unwrap();
            let b = total_balance_full(&be(), &beam, &c, &st, &ParBeam::off(), &doubled).unwrap();
            assert_relative_eq!(a.torque, b.torque, max_relative = 1e-6);
            assert_relative_eq!(a.laser_rate, b.laser_rate, max_relative = 1e-6);
        }
    }

    #[test]
    fn parallel_recoil_closed_form() {
        let be = be();
        let c = CrystalState::new(225e-6, 2.77e9, 1.0).unwrap();
        assert_eq!(parallel_recoil_rate(&be, &ParBeam::off(), &c), 0.0);

        // hand evaluation: γ₀ S/(1+S) · R/3 · N
        let hbar = 1.054_571_817e-34;
        let k = 2.0 * PI / 313e-9;
        let m = 9.012 * 1.660_539_066_60e-27;
        let recoil = (hbar * k).powi(2) / (2.0 * m);
        let n = 2.77e9 * 2.0 / 3.0 * PI * 225e-6_f64.powi(2);
        let expect = 2.0 * PI * 18e6 * 0.2 / 1.2 * recoil / 3.0 * n;
        let got = parallel_recoil_rate(&be, &ParBeam::new(0.2).unwrap(), &c);
        assert_relative_eq!(got, expect, max_relative = 1e-12);
        assert!((n - 294.0).abs() < 1.0);

        let mut last = 0.0;
        for s in [0.01, 0.1, 1.0, 10.0, 1e3, 1e6] {
            let r = parallel_recoil_rate(&be, &ParBeam::new(s).unwrap(), &c);
            assert!(r > last);
            last = r;
        }
        let limit = be.gamma0() * be.recoil_energy() / 3.0 * c.ion_number();
        assert!(last < limit && last > limit * (1.0 - 1e-5));
    }

    #[test]
    fn rescaling_the_beam() {
        let (beam, c) = fig4();
        let beam = beam.with_offset(14e-6).unwrap();
        let r = rescale_beam(&beam, &c);
        let f = 1.0 / (1.0 + 1.0 / 225.0);
        // w_y/(2R_c) = 1/15 → factor 1/(1 + 1/225)
        assert_relative_eq!(r.waist().powi(2), beam.waist().powi(2) * f, max_relative = 1e-14);
        assert_relative_eq!(r.offset(), beam.offset() * f, max_relative = 1e-14);
        assert_eq!(r.detuning(), beam.detuning());
        assert_eq!(r.s0(), beam.s0());
        assert!((r.waist() - 29.9336e-6).abs() < 1e-10);

        let huge = c.with_radius(1.0).unwrap();
        let same = rescale_beam(&beam, &huge);
        assert_relative_eq!(same.waist(), beam.waist(), max_relative = 1e-9);
        assert_relative_eq!(same.offset(), beam.offset(), max_relative = 1e-9);
    }

    #[test]
    fn predicted_slope_for_the_45khz_30um_case() {
        let (beam, c) = fig4();
        let slope = predicted_contour_slope(&be(), &beam, &c);
        let um_per_mhz = slope * 2.0 * PI * 1e6 * 1e6;
        assert!((um_per_mhz - 1.11).abs() < 0.005, "{um_per_mhz}");
    }

    #[test]
    fn reduced_parameter_definitions() {
        let be = be();
        let (beam, c) = fig4();
        let still = c.with_omega_r(0.0).unwrap();
        let p = reduced_params_from_physical(&be, &beam, &still, false);
        assert_relative_eq!(p.delta_d, beam.detuning() / (0.5 * be.gamma0()));
        assert_eq!(p.delta_w, 0.0);

        let centred = beam.with_offset(0.0).unwrap().with_detuning(-be.gamma0()).unwrap();
        let p = reduced_params_from_physical(&be, &centred, &c, false);
        assert_relative_eq!(p.delta_d, -2.0, max_relative = 1e-14);

        // Δ_w = (2π/313 nm)(2π·200 kHz)(30 µm)/(π·18 MHz), hand arithmetic
        let fast = c.with_omega_r(2.0 * PI * 2e5).unwrap();
        let p = reduced_params_from_physical(&be, &beam, &fast, false);
        let expect = (2.0 * PI / 313e-9) * (2.0 * PI * 2e5) * 30e-6 / (PI * 18e6);
        assert_relative_eq!(p.delta_w, expect, max_relative = 1e-12);
        assert!((p.delta_w - 13.38).abs() < 0.01);

        // round trip through the defining relation
        let p = reduced_params_from_physical(&be, &beam, &c, false);
        let back = p.delta_d * 0.5 * be.gamma0() + be.k() * c.omega_r() * beam.offset();
        assert_relative_eq!(back, beam.detuning(), max_relative = 1e-12);
    }

    #[test]
    fn reduced_balance_rejects_bad_velocity() {
        let p = ReducedParams::new(&be(), 0.5, -2.0, 1.0).unwrap();
        assert!(total_balance_reduced(&p, 0.0).is_err());
        assert!(total_balance_reduced(&p, f64::NAN).is_err());
        assert!(ReducedParams::new(&be(), 0.5, -2.0, -1.0).is_err());
    }

    #[test]
    fn reduced_balance_heats_when_cold_and_cools_when_warm() {
        let p = ReducedParams::new(&be(), 0.5, -3.0, 2.0).unwrap();
        assert!(total_balance_reduced(&p, 0.5).unwrap() > 0.0);
        assert!(total_balance_reduced(&p, 30.0).unwrap() < 0.0);
    }
}
