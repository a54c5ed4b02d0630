//! Parameter sweeps: equilibrium temperature and laser torque over
//! two-dimensional grids, zero-torque curves, and contour-line slopes.
//!
//! Cells are independent and are evaluated on a rayon pool of configurable
//! width. Results are collected in row-major order (`axis1` outer), so the
//! output never depends on the worker count.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{total_balance_full, total_balance_reduced_with, BalanceSettings, ReducedParams};
use crate::equilibrium::{find_equilibrium, EquilibriumResult, RootConfig, Status};
use crate::physics::{AtomicSpecies, CrystalState, ParBeam, PerpBeam, ThermalState};
use crate::{Error, Result};

/// A named, strictly monotone list of grid values (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::InvalidAxis {
                axis: name,
                reason: "axis has no values".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAxis {
                axis: name,
                reason: "axis values must be finite".into(),
            });
        }
        let up = values.windows(2).all(|p| p[1] > p[0]);
        let down = values.windows(2).all(|p| p[1] < p[0]);
        if !(up || down) {
            return Err(Error::InvalidAxis {
                axis: name,
                reason: "axis values must be strictly monotone".into(),
            });
        }
        Ok(Axis {
            name,
            unit: unit.into(),
            values,
        })
    }

    /// `n` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(
        name: impl Into<String>,
        unit: impl Into<String>,
        start: f64,
        stop: f64,
        n: usize,
    ) -> Result<Self> {
        let values = match n {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect(),
        };
        Axis::new(name, unit, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Converged,
    NoRoot,
    RunawayHeating,
    /// The balance or root search returned an error; see `Cell::error`.
    Failed,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Converged => "converged",
            CellStatus::NoRoot => "no_root",
            CellStatus::RunawayHeating => "runaway_heating",
            CellStatus::Failed => "failed",
        }
    }
}

impl From<Status> for CellStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Converged => CellStatus::Converged,
            Status::NoRoot => CellStatus::NoRoot,
            Status::RunawayHeating => CellStatus::RunawayHeating,
        }
    }
}

/// One grid cell. Numbers are present only for converged cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub status: CellStatus,
    pub u_star: Option<f64>,
    pub temperature: Option<f64>,
    /// Laser torque at the equilibrium velocity (physical sweeps only).
    pub torque: Option<f64>,
    pub bistable: bool,
    pub error: Option<String>,
}

impl Cell {
    fn failed(e: Error) -> Self {
        Cell {
            status: CellStatus::Failed,
            u_star: None,
            temperature: None,
            torque: None,
            bistable: false,
            error: Some(e.to_string()),
        }
    }

    fn from_result(res: &EquilibriumResult, torque: Option<f64>) -> Self {
        Cell {
            status: res.status.into(),
            u_star: res.u_star,
            temperature: res.temperature,
            torque,
            bistable: res.is_bistable(),
            error: None,
        }
    }
}

/// Inputs that produced a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SweepInputs {
    Physical {
        species: AtomicSpecies,
        beam_template: PerpBeam,
        crystal: CrystalState,
        par: ParBeam,
    },
    Reduced {
        species: AtomicSpecies,
        s0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub inputs: SweepInputs,
    pub root: RootConfig,
    pub hermite_order: usize,
    pub balance_rel_tol: f64,
    pub spot_check_seed: u64,
}

/// Outcome of the post-hoc stability audit on a random sample of cells.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub checked: Vec<usize>,
    /// Indices whose rate did not go from heating below to cooling above.
    pub failed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    /// Row-major: cell `(i, j)` is `cells[i * axis2.len() + j]`.
    pub cells: Vec<Cell>,
    pub metadata: SweepMetadata,
    pub spot_check: SpotCheck,
}

impl SweepGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.axis2.len() + j]
    }

    pub fn temperature(&self, i: usize, j: usize) -> Option<f64> {
        self.cell(i, j).temperature
    }

    /// Lowest converged temperature and its indices.
    pub fn minimum(&self) -> Option<(usize, usize, f64)> {
        let n2 = self.axis2.len();
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, c)| c.temperature.map(|t| (k / n2, k % n2, t)))
            .min_by(|a, b| a.2.total_cmp(&b.2))
    }
}

/// Numerical settings for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub root: RootConfig,
    pub balance: BalanceSettings,
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    pub spot_check_fraction: f64,
    pub seed: u64,
    /// Relative offset of the stability spot check, `u*(1 ± ε)`.
    pub spot_check_epsilon: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            root: RootConfig::default(),
            balance: BalanceSettings::default(),
            workers: 0,
            spot_check_fraction: 0.01,
            seed: 0x5eed,
            spot_check_epsilon: 1e-3,
        }
    }
}

impl SweepOptions {
    fn metadata(&self, inputs: SweepInputs) -> SweepMetadata {
        SweepMetadata {
            inputs,
            root: self.root,
            hermite_order: self.balance.velocity.rule().order(),
            balance_rel_tol: self.balance.rel_tol,
            spot_check_seed: self.seed,
        }
    }
}

fn run_pool<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}

fn spot_check<F>(cells: &[Cell], options: &SweepOptions, rate_at: F) -> Result<SpotCheck>
where
    F: Fn(usize, f64) -> Result<f64> + Sync + Send,
{
    let converged: Vec<usize> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.status == CellStatus::Converged)
        .map(|(k, _)| k)
        .collect();
    if converged.is_empty() || options.spot_check_fraction <= 0.0 {
        return Ok(SpotCheck::default());
    }
    let amount = ((converged.len() as f64 * options.spot_check_fraction).ceil() as usize)
        .clamp(1, converged.len());
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut checked: Vec<usize> = sample(&mut rng, converged.len(), amount)
        .into_iter()
        .map(|i| converged[i])
        .collect();
    checked.sort_unstable();
    let eps = options.spot_check_epsilon;
    let verdicts = run_pool(options.workers, checked.len(), |n| {
        let k = checked[n];
        let u = cells[k].u_star.expect("converged cells carry u_star");
        let below = rate_at(k, u * (1.0 - eps))?;
        let above = rate_at(k, u * (1.0 + eps))?;
        Ok::<bool, Error>(below > 0.0 && above < 0.0)
    })?;
    let mut failed = Vec::new();
    for (n, v) in verdicts.into_iter().enumerate() {
        if !v.unwrap_or(false) {
            failed.push(checked[n]);
        }
    }
    Ok(SpotCheck { checked, failed })
}

/// Equilibrium of the full model at one beam setting, with the laser torque
/// evaluated at the equilibrium velocity.
pub fn solve_physical_cell(
    species: &AtomicSpecies,
    beam: &PerpBeam,
    crystal: &CrystalState,
    par: &ParBeam,
    options: &SweepOptions,
) -> Result<(EquilibriumResult, Option<f64>)> {
    let res = find_equilibrium(
        species,
        |u| {
            let st = ThermalState::new(u)?;
            Ok(total_balance_full(species, beam, crystal, &st, par, &options.balance)?.total_rate)
        },
        &options.root,
    )?;
    let torque = match res.u_star {
        Some(u) => {
            let st = ThermalState::new(u)?;
            Some(total_balance_full(species, beam, crystal, &st, par, &options.balance)?.torque)
        }
        None => None,
    };
    Ok((res, torque))
}

/// Equilibrium temperature and torque over a (detuning, offset) grid.
/// `axis1` holds detunings (rad/s) and `axis2` offsets (m); every other beam
/// parameter comes from `beam_template`.
pub fn sweep_physical(
    species: &AtomicSpecies,
    beam_template: &PerpBeam,
    crystal: &CrystalState,
    par: &ParBeam,
    detuning_axis: &Axis,
    offset_axis: &Axis,
    options: &SweepOptions,
) -> Result<SweepGrid> {
    options.root.validate()?;
    let n2 = offset_axis.len();
    let beam_at = |k: usize| -> Result<PerpBeam> {
        beam_template
            .with_detuning(detuning_axis.values[k / n2])?
            .with_offset(offset_axis.values[k % n2])
    };
    let cells = run_pool(options.workers, detuning_axis.len() * n2, |k| {
        match beam_at(k).and_then(|b| solve_physical_cell(species, &b, crystal, par, options)) {
            Ok((res, torque)) => Cell::from_result(&res, torque),
            Err(e) => Cell::failed(e),
        }
    })?;
    let spot = spot_check(&cells, options, |k, u| {
        let st = ThermalState::new(u)?;
        Ok(total_balance_full(species, &beam_at(k)?, crystal, &st, par, &options.balance)?.total_rate)
    })?;
    Ok(SweepGrid {
        axis1: detuning_axis.clone(),
        axis2: offset_axis.clone(),
        cells,
        metadata: options.metadata(SweepInputs::Physical {
            species: *species,
            beam_template: *beam_template,
            crystal: *crystal,
            par: *par,
        }),
        spot_check: spot,
    })
}

/// Reduced-model balance at velocity `u` (m/s).
fn reduced_rate(species: &AtomicSpecies, params: &ReducedParams, u: f64, options: &SweepOptions) -> Result<f64> {
    total_balance_reduced_with(
        &options.balance.velocity,
        params,
        u / species.v_rec(),
        options.balance.rel_tol,
    )
}

/// Equilibrium of the reduced model at one (Δ_d, Δ_w).
pub fn solve_reduced_cell(
    species: &AtomicSpecies,
    params: &ReducedParams,
    options: &SweepOptions,
) -> Result<EquilibriumResult> {
    find_equilibrium(species, |u| reduced_rate(species, params, u, options), &options.root)
}

/// Equilibrium temperatures of the reduced model over a (Δ_d, Δ_w) grid.
/// No torque is recorded: the reduced form carries no absolute scale.
pub fn sweep_reduced(
    species: &AtomicSpecies,
    s0: f64,
    delta_d_axis: &Axis,
    delta_w_axis: &Axis,
    options: &SweepOptions,
) -> Result<SweepGrid> {
    options.root.validate()?;
    let n2 = delta_w_axis.len();
    let params_at = |k: usize| {
        ReducedParams::new(species, s0, delta_d_axis.values[k / n2], delta_w_axis.values[k % n2])
    };
    let cells = run_pool(options.workers, delta_d_axis.len() * n2, |k| {
        match params_at(k).and_then(|p| solve_reduced_cell(species, &p, options)) {
            Ok(res) => Cell::from_result(&res, None),
            Err(e) => Cell::failed(e),
        }
    })?;
    let spot = spot_check(&cells, options, |k, u| reduced_rate(species, &params_at(k)?, u, options))?;
    Ok(SweepGrid {
        axis1: delta_d_axis.clone(),
        axis2: delta_w_axis.clone(),
        cells,
        metadata: options.metadata(SweepInputs::Reduced {
            species: *species,
            s0,
        }),
        spot_check: spot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTorquePoint {
    /// rad/s
    pub detuning: f64,
    /// Midpoint of the final offset bracket, m.
    pub offset: f64,
    /// Equilibrium temperature at `offset`, K.
    pub temperature: f64,
    pub torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTorqueCurve {
    pub points: Vec<ZeroTorquePoint>,
    /// Upper bound on the width of every final offset bracket, m.
    pub bracket_width: f64,
}

impl ZeroTorqueCurve {
    /// The curve point with the lowest equilibrium temperature.
    pub fn coldest(&self) -> Option<&ZeroTorquePoint> {
        self.points
            .iter()
            .min_by(|a, b| a.temperature.total_cmp(&b.temperature))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTorqueOptions {
    /// Offsets scanned per detuning before bisection.
    pub scan_points: usize,
    pub bracket_width: f64,
}

impl Default for ZeroTorqueOptions {
    fn default() -> Self {
        ZeroTorqueOptions {
            scan_points: 21,
            bracket_width: 0.1e-6,
        }
    }
}

/// Offsets where the equilibrium laser torque changes sign, one entry per
/// sign change per detuning. Cells without a converged equilibrium are
/// skipped; detunings without a sign change are omitted.
pub fn zero_torque_curve(
    species: &AtomicSpecies,
    beam_template: &PerpBeam,
    crystal: &CrystalState,
    par: &ParBeam,
    detuning_axis: &Axis,
    offset_bracket: (f64, f64),
    zt: &ZeroTorqueOptions,
    options: &SweepOptions,
) -> Result<ZeroTorqueCurve> {
    let (lo, hi) = offset_bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("offset_bracket", hi - lo, "need lo < hi"));
    }
    if zt.scan_points < 2 {
        return Err(Error::invalid("scan_points", zt.scan_points as f64, "need at least two"));
    }
    if !(zt.bracket_width > 0.0) {
        return Err(Error::invalid("bracket_width", zt.bracket_width, "must be positive"));
    }
    options.root.validate()?;
    let offsets: Vec<f64> = (0..zt.scan_points)
        .map(|i| lo + (hi - lo) * i as f64 / (zt.scan_points - 1) as f64)
        .collect();

    let per_detuning = run_pool(options.workers, detuning_axis.len(), |i| {
        let beam = beam_template.with_detuning(detuning_axis.values[i])?;
        let at = |d: f64| -> Result<Option<(f64, f64)>> {
            let b = beam.with_offset(d)?;
            let (res, torque) = solve_physical_cell(species, &b, crystal, par, options)?;
            Ok(res.temperature.zip(torque))
        };
        let mut scan = Vec::with_capacity(offsets.len());
        for &d in &offsets {
            scan.push((d, at(d)?));
        }
        let mut found = Vec::new();
        for pair in scan.windows(2) {
            let (Some((_, t_a)), Some((_, t_b))) = (pair[0].1, pair[1].1) else {
                continue;
            };
            if t_a == 0.0 || t_a.signum() == t_b.signum() {
                continue;
            }
            let (mut a, mut b) = (pair[0].0, pair[1].0);
            let sign_a = t_a.signum();
            while b - a > zt.bracket_width {
                let mid = 0.5 * (a + b);
                match at(mid)? {
                    Some((_, t)) if t.signum() == sign_a => a = mid,
                    Some(_) => b = mid,
                    // equilibrium lost inside the bracket; stop refining
                    None => break,
                }
            }
            if b - a > zt.bracket_width {
                continue;
            }
            let mid = 0.5 * (a + b);
            if let Some((temperature, torque)) = at(mid)? {
                found.push(ZeroTorquePoint {
                    detuning: detuning_axis.values[i],
                    offset: mid,
                    temperature,
                    torque,
                });
            }
        }
        Ok::<_, Error>(found)
    })?;
    let mut points = Vec::new();
    for r in per_detuning {
        points.extend(r?);
    }
    Ok(ZeroTorqueCurve {
        points,
        bracket_width: zt.bracket_width,
    })
}

/// Straight-line fit through a contour level set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourFit {
    /// d(axis2)/d(axis1) in the axes' own units.
    pub slope: f64,
    /// RMS deviation of the level-set points from their component's line,
    /// along axis2.
    pub residual: f64,
    pub points: usize,
    pub components: usize,
}

// Crossing on a grid edge: (vertical?, i, j) with the edge running from
// node (i, j) along axis1 (false) or axis2 (true).
type EdgeId = (bool, usize, usize);

/// Fits the slope of the `level` contour of the temperature grid. The level
/// set is traced by marching squares with linear interpolation along cell
/// edges; connected pieces are fitted with a common slope and separate
/// intercepts, so parallel contour lines on either side of a trough pool
/// into one estimate.
pub fn contour_slope(grid: &SweepGrid, level: f64) -> Result<ContourFit> {
    let values: Vec<Option<f64>> = grid.cells.iter().map(|c| c.temperature).collect();
    contour_slope_values(&grid.axis1.values, &grid.axis2.values, &values, level)
}

/// [`contour_slope`] on bare arrays: `values` is row-major with `x` outer,
/// `None` marking cells without a temperature.
pub fn contour_slope_values(
    x: &[f64],
    y: &[f64],
    values: &[Option<f64>],
    level: f64,
) -> Result<ContourFit> {
    let (n1, n2) = (x.len(), y.len());
    if values.len() != n1 * n2 {
        return Err(Error::InvalidAxis {
            axis: "values".into(),
            reason: format!("expected {} values, found {}", n1 * n2, values.len()),
        });
    }
    let value = |i: usize, j: usize| values[i * n2 + j];

    let mut points: HashMap<EdgeId, (f64, f64)> = HashMap::new();
    let mut crossing = |e: EdgeId| -> Option<EdgeId> {
        let (along2, i, j) = e;
        let (i2, j2) = if along2 { (i, j + 1) } else { (i + 1, j) };
        let a = value(i, j)? - level;
        let b = value(i2, j2)? - level;
        if (a < 0.0) == (b < 0.0) {
            return None;
        }
        let t = a / (a - b);
        let p = (x[i] + t * (x[i2] - x[i]), y[j] + t * (y[j2] - y[j]));
        points.insert(e, p);
        Some(e)
    };

    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for i in 0..n1.saturating_sub(1) {
        for j in 0..n2.saturating_sub(1) {
            let corners = [value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1)];
            if corners.iter().any(Option::is_none) {
                continue;
            }
            // edges in cyclic order: bottom, right, top, left
            let edges = [
                (false, i, j),
                (true, i + 1, j),
                (false, i, j + 1),
                (true, i, j),
            ];
            let hits: Vec<EdgeId> = edges.iter().filter_map(|&e| crossing(e)).collect();
            match hits.len() {
                2 => segments.push((hits[0], hits[1])),
                4 => {
                    let centre: f64 = corners.iter().map(|c| c.unwrap()).sum::<f64>() / 4.0;
                    let low_first = corners[0].unwrap() < level;
                    if (centre < level) == low_first {
                        segments.push((hits[0], hits[1]));
                        segments.push((hits[2], hits[3]));
                    } else {
                        segments.push((hits[0], hits[3]));
                        segments.push((hits[1], hits[2]));
                    }
                }
                _ => {}
            }
        }
    }
    if points.is_empty() {
        return Err(Error::ContourNotFound { level });
    }

    // Connected components over shared edge crossings.
    let mut ids: Vec<EdgeId> = points.keys().copied().collect();
    ids.sort_unstable();
    let index: HashMap<EdgeId, usize> = ids.iter().enumerate().map(|(n, e)| (*e, n)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for (a, b) in &segments {
        let ra = find(&mut parent, index[a]);
        let rb = find(&mut parent, index[b]);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: HashMap<usize, Vec<(f64, f64)>> = HashMap::new();
    for (n, e) in ids.iter().enumerate() {
        let r = find(&mut parent, n);
        groups.entry(r).or_default().push(points[e]);
    }
    let mut groups: Vec<Vec<(f64, f64)>> = groups.into_values().filter(|g| g.len() >= 3).collect();
    let usable: usize = groups.iter().map(Vec::len).sum();
    if groups.is_empty() || 2 * usable < points.len() {
        return Err(Error::ContourTooFragmented { level });
    }
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].0.total_cmp(&b[0].0)));

    let (mut sxy, mut sxx) = (0.0, 0.0);
    let mut centred = Vec::with_capacity(groups.len());
    for g in &groups {
        let n = g.len() as f64;
        let mx = g.iter().map(|p| p.0).sum::<f64>() / n;
        let my = g.iter().map(|p| p.1).sum::<f64>() / n;
        for &(px, py) in g {
            sxy += (px - mx) * (py - my);
            sxx += (px - mx) * (px - mx);
        }
        centred.push((mx, my));
    }
    if !(sxx > 0.0) {
        return Err(Error::ContourTooFragmented { level });
    }
    let slope = sxy / sxx;
    let mut ss = 0.0;
    for (g, (mx, my)) in groups.iter().zip(&centred) {
        for &(px, py) in g {
            let r = (py - my) - slope * (px - mx);
            ss += r * r;
        }
    }
    Ok(ContourFit {
        slope,
        residual: (ss / usable as f64).sqrt(),
        points: usable,
        components: groups.len(),
    })
}

/// m/(rad/s) → µm/MHz.
pub fn slope_to_um_per_mhz(slope: f64) -> f64 {
    slope * 2.0 * std::f64::consts::PI * 1e12
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(slope: f64, f: impl Fn(f64) -> f64) -> SweepGrid {
        let a1 = Axis::linspace("x", "", -10.0, 10.0, 41).unwrap();
        let a2 = Axis::linspace("y", "", -5.0, 5.0, 31).unwrap();
        let mut cells = Vec::new();
        for &x in &a1.values {
            for &y in &a2.values {
                let t = f(y - slope * x);
                cells.push(Cell {
                    status: CellStatus::Converged,
                    u_star: Some(1.0),
                    temperature: Some(t),
                    torque: None,
                    bistable: false,
                    error: None,
                });
            }
        }
        SweepGrid {
            axis1: a1,
            axis2: a2,
            cells,
            metadata: SweepOptions::default().metadata(SweepInputs::Reduced {
                species: AtomicSpecies::beryllium9(),
                s0: 0.5,
            }),
            spot_check: SpotCheck::default(),
        }
    }

    #[test]
    fn axes_must_be_monotone_and_nonempty() {
        assert!(Axis::new("a", "", vec![]).is_err());
        assert!(Axis::new("a", "", vec![1.0, 1.0]).is_err());
        assert!(Axis::new("a", "", vec![1.0, 2.0, 1.5]).is_err());
        assert!(Axis::new("a", "", vec![f64::NAN]).is_err());
        assert!(Axis::new("a", "", vec![3.0, 2.0]).is_ok());
        let a = Axis::linspace("a", "", 0.0, 1.0, 5).unwrap();
        assert_eq!(a.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Axis::linspace("a", "", 2.0, 9.0, 1).unwrap().values, vec![2.0]);
    }

    #[test]
    fn linear_contours_give_the_constructed_slope() {
        // a V-shaped trough along y = 0.3 x: two parallel level lines
        let g = synthetic(0.3, f64::abs);
        let fit = contour_slope(&g, 2.0).unwrap();
        assert_relative_eq!(fit.slope, 0.3, max_relative = 1e-6);
        assert!(fit.residual < 1e-9);
        assert_eq!(fit.components, 2);
    }

    #[test]
    fn single_line_contour() {
        let g = synthetic(-0.15, |s| s);
        let fit = contour_slope(&g, 1.0).unwrap();
        assert_relative_eq!(fit.slope, -0.15, max_relative = 1e-6);
        assert_eq!(fit.components, 1);
    }

    #[test]
    fn missing_and_fragmented_levels_are_errors() {
        let g = synthetic(0.3, |s| s * s);
        assert!(matches!(contour_slope(&g, -1.0), Err(Error::ContourNotFound { .. })));
        // bumps on the four corner nodes: every piece has two points
        let mut g = synthetic(0.0, |_| 0.0);
        let n = g.cells.len();
        for k in [0, 30, n - 31, n - 1] {
            g.cells[k].temperature = Some(2.0);
        }
        assert!(matches!(
            contour_slope(&g, 1.0),
            Err(Error::ContourTooFragmented { .. })
        ));
    }

    #[test]
    fn unconverged_cells_are_skipped() {
        let mut g = synthetic(0.3, f64::abs);
        for c in g.cells.iter_mut().take(31) {
            c.status = CellStatus::RunawayHeating;
            c.temperature = None;
        }
        let fit = contour_slope(&g, 2.0).unwrap();
        assert_relative_eq!(fit.slope, 0.3, max_relative = 1e-6);
    }

    #[test]
    fn unit_conversion() {
        // 1 µm per MHz of detuning/2π
        let s = 1e-6 / (2.0 * std::f64::consts::PI * 1e6);
        assert_relative_eq!(slope_to_um_per_mhz(s), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn reduced_sweep_is_independent_of_worker_count() {
        let be = AtomicSpecies::beryllium9();
        let dd = Axis::linspace("delta_d", "", -4.0, -1.0, 3).unwrap();
        let dw = Axis::linspace("delta_w", "", 0.0, 3.0, 2).unwrap();
        let one = sweep_reduced(&be, 0.5, &dd, &dw, &SweepOptions { workers: 1, ..Default::default() }).unwrap();
        let two = sweep_reduced(&be, 0.5, &dd, &dw, &SweepOptions { workers: 2, ..Default::default() }).unwrap();
        assert_eq!(one, two);
        assert_eq!(one.shape(), (3, 2));
        assert!(one.cells.iter().all(|c| c.torque.is_none()));
        assert_eq!(one.spot_check.checked.len(), 1);
        assert!(one.spot_check.failed.is_empty());
    }
}
