//! The computations behind each subcommand.

use std::f64::consts::PI;

use perpcool::balance::{
    predicted_contour_slope, reduced_params_from_physical, total_balance_full,
};
use perpcool::equilibrium::Status;
use perpcool::physics::ThermalState;
use perpcool::sweep::{
    contour_slope_values, slope_to_um_per_mhz, solve_physical_cell, sweep_physical,
    sweep_reduced, zero_torque_curve, ContourFit, SweepGrid, ZeroTorqueCurve,
};
use serde::{Deserialize, Serialize};

use crate::config::Experiment;

/// Single-point equilibrium report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub status: Status,
    pub temperature_k: Option<f64>,
    pub u_star_m_per_s: Option<f64>,
    /// Velocity at which the rates below were evaluated: u* when converged,
    /// otherwise the end of the search bracket that decided the status.
    pub rates_at_u_m_per_s: f64,
    pub torque_nm: f64,
    pub laser_rate_w: f64,
    pub wall_rate_w: f64,
    pub parallel_rate_w: f64,
    pub total_rate_w: f64,
    pub delta_d: f64,
    pub delta_w: f64,
    pub crossings: usize,
    pub bistable: bool,
    pub evaluations: usize,
}

pub fn limit(exp: &Experiment) -> perpcool::Result<LimitReport> {
    let (res, _) = solve_physical_cell(&exp.species, &exp.beam, &exp.crystal, &exp.par, &exp.options)?;
    let u = match (res.status, res.u_star) {
        (_, Some(u)) => u,
        (Status::RunawayHeating, None) => exp.options.root.u_max,
        _ => exp.options.root.u_min,
    };
    let rates = total_balance_full(
        &exp.species,
        &exp.beam,
        &exp.crystal,
        &ThermalState::new(u)?,
        &exp.par,
        &exp.options.balance,
    )?;
    let reduced = reduced_params_from_physical(&exp.species, &exp.beam, &exp.crystal, false);
    Ok(LimitReport {
        status: res.status,
        temperature_k: res.temperature,
        u_star_m_per_s: res.u_star,
        rates_at_u_m_per_s: u,
        torque_nm: rates.torque,
        laser_rate_w: rates.laser_rate,
        wall_rate_w: rates.wall_rate,
        parallel_rate_w: rates.parallel_rate,
        total_rate_w: rates.total_rate,
        delta_d: reduced.delta_d,
        delta_w: reduced.delta_w,
        crossings: res.crossings.len(),
        bistable: res.is_bistable(),
        evaluations: res.evaluations,
    })
}

pub fn map(exp: &Experiment) -> anyhow::Result<SweepGrid> {
    let (detuning, offset) = exp.require_map()?;
    Ok(sweep_physical(
        &exp.species,
        &exp.beam,
        &exp.crystal,
        &exp.par,
        detuning,
        offset,
        &exp.options,
    )?)
}

pub fn reduced_map(exp: &Experiment) -> anyhow::Result<SweepGrid> {
    let r = exp.require_reduced_map()?;
    Ok(sweep_reduced(&exp.species, r.s0, &r.delta_d, &r.delta_w, &exp.options)?)
}

pub fn zero_torque(exp: &Experiment) -> anyhow::Result<ZeroTorqueCurve> {
    let z = exp.require_zero_torque()?;
    Ok(zero_torque_curve(
        &exp.species,
        &exp.beam,
        &exp.crystal,
        &exp.par,
        &z.detuning,
        z.offset_bracket,
        &z.options,
        &exp.options,
    )?)
}

/// Predicted contour slope for the experiment's beam and crystal, µm/MHz.
pub fn predicted_slope_um_per_mhz(exp: &Experiment) -> f64 {
    slope_to_um_per_mhz(predicted_contour_slope(&exp.species, &exp.beam, &exp.crystal))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub level_k: f64,
    /// In the map's display units: µm/MHz for physical maps.
    pub slope: f64,
    pub residual: f64,
    pub points: usize,
    pub components: usize,
    pub predicted_um_per_mhz: Option<f64>,
}

/// Contour slope of a grid in display units (axis1 in MHz, axis2 in µm for
/// physical maps), so the fitted value is directly in µm/MHz.
pub fn slope_from_display(
    axis1: &[f64],
    axis2: &[f64],
    temperatures: &[Option<f64>],
    level_k: f64,
    predicted_um_per_mhz: Option<f64>,
) -> perpcool::Result<SlopeReport> {
    let ContourFit {
        slope,
        residual,
        points,
        components,
    } = contour_slope_values(axis1, axis2, temperatures, level_k)?;
    Ok(SlopeReport {
        level_k,
        slope,
        residual,
        points,
        components,
        predicted_um_per_mhz,
    })
}

/// rad/s → MHz of Δω/2π.
pub fn to_mhz(detuning: f64) -> f64 {
    detuning / (2.0 * PI * 1e6)
}
