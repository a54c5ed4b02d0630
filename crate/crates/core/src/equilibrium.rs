//! Equilibrium in-plane temperature: the smallest stable root of the net
//! energy-exchange rate as a function of the thermal velocity `u`.
//!
//! A stable root has heating below it and cooling above it. The search scans
//! a logarithmic grid of `u` for sign changes and bisects (geometrically)
//! inside the first `+ → −` bracket.

use serde::{Deserialize, Serialize};

use crate::constants::K_B;
use crate::physics::AtomicSpecies;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    pub u_min: f64,
    pub u_max: f64,
    pub scan_points: usize,
    /// Absolute rate tolerance. When unset, `rate_rel_tol` times the largest
    /// |rate| seen on the scan grid is used.
    pub rate_abs_tol: Option<f64>,
    pub rate_rel_tol: f64,
    pub u_rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            u_min: 1e-3,
            u_max: 50.0,
            scan_points: 64,
            rate_abs_tol: None,
            rate_rel_tol: 1e-6,
            u_rel_tol: 1e-6,
            max_iterations: 100,
        }
    }
}

impl RootConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_min > 0.0 && self.u_min.is_finite()) {
            return Err(Error::invalid("u_min", self.u_min, "must be positive"));
        }
        if !(self.u_max > self.u_min && self.u_max.is_finite()) {
            return Err(Error::invalid("u_max", self.u_max, "must exceed u_min"));
        }
        if self.scan_points < 2 {
            return Err(Error::invalid(
                "scan_points",
                self.scan_points as f64,
                "need at least two scan points",
            ));
        }
        if let Some(t) = self.rate_abs_tol {
            if !(t > 0.0) {
                return Err(Error::invalid("rate_abs_tol", t, "must be positive"));
            }
        }
        if !(self.rate_rel_tol > 0.0) {
            return Err(Error::invalid("rate_rel_tol", self.rate_rel_tol, "must be positive"));
        }
        if !(self.u_rel_tol > 0.0) {
            return Err(Error::invalid("u_rel_tol", self.u_rel_tol, "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", 0.0, "must be at least 1"));
        }
        Ok(())
    }

    /// Logarithmically spaced scan grid from `u_min` to `u_max` inclusive.
    pub fn scan_grid(&self) -> Vec<f64> {
        let n = self.scan_points;
        let ratio = (self.u_max / self.u_min).ln();
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.u_min
                } else if i == n - 1 {
                    self.u_max
                } else {
                    self.u_min * (ratio * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    NoRoot,
    RunawayHeating,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::NoRoot => "no_root",
            Status::RunawayHeating => "runaway_heating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
}

/// A sign change of the rate between two scan points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub u_lo: f64,
    pub u_hi: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub status: Status,
    pub u_star: Option<f64>,
    pub temperature: Option<f64>,
    pub stability: Option<Stability>,
    /// Rate at `u_star`, or at the relevant scan end when not converged.
    pub residual_rate: f64,
    /// Every sign change found on the scan grid, in increasing `u`.
    pub crossings: Vec<Crossing>,
    /// For `NoRoot`: the equilibrium lies below this velocity.
    pub u_upper_bound: Option<f64>,
    pub evaluations: usize,
}

impl EquilibriumResult {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// More than one stable crossing on the scan grid.
    pub fn is_bistable(&self) -> bool {
        self.crossings
            .iter()
            .filter(|c| c.stability == Stability::Stable)
            .count()
            > 1
    }
}

/// T_⊥ = u² m / (2 k_B).
pub fn temperature_of_u(species: &AtomicSpecies, u: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::invalid("u", u, "must be positive"));
    }
    Ok(u * u * species.mass() / (2.0 * K_B))
}

/// u = √(2 k_B T_⊥ / m).
pub fn u_of_temperature(species: &AtomicSpecies, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid("temperature", temperature, "must be positive"));
    }
    Ok((2.0 * K_B * temperature / species.mass()).sqrt())
}

fn checked<F>(f: &mut F, u: f64, evaluations: &mut usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    *evaluations += 1;
    let v = f(u)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteBalance { u, value: v })
    }
}

/// Finds the smallest stable root of `balance_fn(u)` on the configured
/// bracket.
pub fn find_equilibrium<F>(
    species: &AtomicSpecies,
    mut balance_fn: F,
    config: &RootConfig,
) -> Result<EquilibriumResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let mut evaluations = 0;
    let grid = config.scan_grid();
    let mut rates = Vec::with_capacity(grid.len());
    for &u in &grid {
        rates.push(checked(&mut balance_fn, u, &mut evaluations)?);
    }
    let tol = config.rate_abs_tol.unwrap_or_else(|| {
        let peak = rates.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        config.rate_rel_tol * peak
    });

    let mut crossings = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (rates[i], rates[i + 1]);
        if a > 0.0 && b <= 0.0 {
            crossings.push(Crossing {
                u_lo: grid[i],
                u_hi: grid[i + 1],
                stability: Stability::Stable,
            });
        } else if a < 0.0 && b >= 0.0 {
            crossings.push(Crossing {
                u_lo: grid[i],
                u_hi: grid[i + 1],
                stability: Stability::Unstable,
            });
        }
    }

    let first_stable = crossings
        .iter()
        .position(|c| c.stability == Stability::Stable);

    let Some(idx) = first_stable else {
        let last = *rates.last().expect("scan grid is non-empty");
        let (status, residual, bound) = if last > 0.0 {
            (Status::RunawayHeating, last, None)
        } else {
            (Status::NoRoot, rates[0], Some(config.u_min))
        };
        return Ok(EquilibriumResult {
            status,
            u_star: None,
            temperature: None,
            stability: None,
            residual_rate: residual,
            crossings,
            u_upper_bound: bound,
            evaluations,
        });
    };

    let bracket = crossings[idx];
    let hi_index = grid
        .iter()
        .position(|&u| u == bracket.u_hi)
        .expect("bracket comes from the grid");
    let (u_star, residual) = if rates[hi_index] == 0.0 {
        (bracket.u_hi, 0.0)
    } else {
        bisect(
            &mut balance_fn,
            bracket.u_lo,
            bracket.u_hi,
            tol,
            config,
            &mut evaluations,
        )?
    };
    Ok(EquilibriumResult {
        status: Status::Converged,
        u_star: Some(u_star),
        temperature: Some(temperature_of_u(species, u_star)?),
        stability: Some(Stability::Stable),
        residual_rate: residual,
        crossings,
        u_upper_bound: None,
        evaluations,
    })
}

// Geometric bisection with f(lo) > 0 > f(hi).
fn bisect<F>(
    f: &mut F,
    mut lo: f64,
    mut hi: f64,
    rate_tol: f64,
    config: &RootConfig,
    evaluations: &mut usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut mid = (lo * hi).sqrt();
    let mut fm = f64::NAN;
    for _ in 0..config.max_iterations {
        mid = (lo * hi).sqrt();
        fm = checked(f, mid, evaluations)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 <= config.u_rel_tol && fm.abs() <= rate_tol {
            return Ok((mid, fm));
        }
    }
    Err(Error::RootNotConverged {
        u: mid,
        residual: fm,
        iterations: config.max_iterations,
    })
}
