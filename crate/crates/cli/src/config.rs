//! Experiment configuration files.
//!
//! Files are TOML with the units spelled out in every key (`waist_um`,
//! `rotation_khz`, `detuning_mhz`, ...). Detunings are Δω/2π in MHz and
//! negative values are red of the atomic resonance. Everything is converted
//! to SI once, in [`ExperimentConfig::to_experiment`]; the reverse mapping
//! [`Experiment::to_config`] re-emits an equivalent file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use perpcool::balance::BalanceSettings;
use perpcool::equilibrium::RootConfig;
use perpcool::physics::{AtomicSpecies, CrystalState, ParBeam, PerpBeam};
use perpcool::quadrature::VelocityQuadrature;
use perpcool::sweep::{Axis, SweepOptions, ZeroTorqueOptions};
use serde::{Deserialize, Serialize};

use crate::units::{AMU, HZ_PER_KHZ, HZ_PER_MHZ, M_PER_NM, M_PER_UM};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("config has no [{0}] section")]
    MissingSection(&'static str),
}

fn invalid(key: &str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: e.to_string(),
    }
}

pub const BERYLLIUM9: &str = "be9";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_amu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    /// γ₀/2π
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub radius_um: f64,
    pub sigma0_per_m2: f64,
    pub rotation_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerpBeamConfig {
    pub s0: f64,
    pub waist_um: f64,
    pub offset_um: f64,
    pub detuning_mhz: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParBeamConfig {
    #[serde(default)]
    pub s_par: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub u_min_m_per_s: f64,
    pub u_max_m_per_s: f64,
    pub scan_points: usize,
    pub rate_rel_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_abs_tol_w: Option<f64>,
    pub u_rel_tol: f64,
    pub max_iterations: usize,
    pub hermite_order: usize,
    pub fallback_half_width: f64,
    pub balance_rel_tol: f64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let root = RootConfig::default();
        let balance = BalanceSettings::default();
        let sweep = SweepOptions::default();
        SolverConfig {
            u_min_m_per_s: root.u_min,
            u_max_m_per_s: root.u_max,
            scan_points: root.scan_points,
            rate_rel_tol: root.rate_rel_tol,
            rate_abs_tol_w: root.rate_abs_tol,
            u_rel_tol: root.u_rel_tol,
            max_iterations: root.max_iterations,
            hermite_order: balance.velocity.rule().order(),
            fallback_half_width: balance.velocity.fallback_below(),
            balance_rel_tol: balance.rel_tol,
            workers: sweep.workers,
            seed: sweep.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub detuning_mhz: AxisConfig,
    pub offset_um: AxisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedMapConfig {
    /// Defaults to the perpendicular beam's `s0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    pub delta_d: AxisConfig,
    pub delta_w: AxisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroTorqueConfig {
    pub detuning_mhz: AxisConfig,
    pub offset_min_um: f64,
    pub offset_max_um: f64,
    #[serde(default = "default_zt_scan")]
    pub scan_points: usize,
    #[serde(default = "default_zt_width")]
    pub bracket_width_um: f64,
}

fn default_zt_scan() -> usize {
    ZeroTorqueOptions::default().scan_points
}

fn default_zt_width() -> f64 {
    ZeroTorqueOptions::default().bracket_width / M_PER_UM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeConfig {
    /// Contour level used for slope extraction, mK.
    pub level_mk: f64,
}

/// An experiment file as written, in the units named by its keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub species: SpeciesConfig,
    pub crystal: CrystalConfig,
    pub perp_beam: PerpBeamConfig,
    #[serde(default)]
    pub par_beam: ParBeamConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_map: Option<ReducedMapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_torque: Option<ZeroTorqueConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<SlopeConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMapSetup {
    pub s0: f64,
    pub delta_d: Axis,
    pub delta_w: Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTorqueSetup {
    pub detuning: Axis,
    /// m
    pub offset_bracket: (f64, f64),
    pub options: ZeroTorqueOptions,
}

/// An experiment in SI units, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub species_preset: Option<String>,
    pub species: AtomicSpecies,
    pub crystal: CrystalState,
    pub beam: PerpBeam,
    pub par: ParBeam,
    pub options: SweepOptions,
    /// (detuning rad/s, offset m)
    pub map: Option<(Axis, Axis)>,
    pub reduced_map: Option<ReducedMapSetup>,
    pub zero_torque: Option<ZeroTorqueSetup>,
    /// K
    pub slope_level: Option<f64>,
}

impl AxisConfig {
    fn to_axis(&self, key: &str, name: &str, unit: &str, scale: f64) -> Result<Axis, ConfigError> {
        if self.points == 0 {
            return Err(invalid(key, "points must be at least 1"));
        }
        if self.points > 1 && self.start == self.stop {
            return Err(invalid(key, "start and stop must differ when points > 1"));
        }
        Axis::linspace(name, unit, self.start * scale, self.stop * scale, self.points)
            .map_err(|e| invalid(key, e))
    }

    fn from_axis(axis: &Axis, scale: f64) -> Self {
        AxisConfig {
            start: axis.values[0] / scale,
            stop: axis.values[axis.len() - 1] / scale,
            points: axis.len(),
        }
    }
}

const DETUNING: (&str, &str) = ("detuning", "rad/s");
const OFFSET: (&str, &str) = ("offset", "m");
const MHZ: f64 = 2.0 * PI * HZ_PER_MHZ;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn to_experiment(&self) -> Result<Experiment, ConfigError> {
        let sp = &self.species;
        let species = match (&sp.preset, sp.mass_amu, sp.wavelength_nm, sp.linewidth_mhz) {
            (Some(p), None, None, None) if p == BERYLLIUM9 => AtomicSpecies::beryllium9(),
            (Some(p), None, None, None) => {
                return Err(invalid("species.preset", format!("unknown preset `{p}`")))
            }
            (None, Some(m), Some(l), Some(g)) => {
                AtomicSpecies::new(m * AMU, l * M_PER_NM, g * MHZ).map_err(|e| invalid("species", e))?
            }
            _ => {
                return Err(invalid(
                    "species",
                    "give either `preset` or all of `mass_amu`, `wavelength_nm`, `linewidth_mhz`",
                ))
            }
        };

        let c = &self.crystal;
        let crystal = CrystalState::new(
            c.radius_um * M_PER_UM,
            c.sigma0_per_m2,
            2.0 * PI * c.rotation_khz * HZ_PER_KHZ,
        )
        .map_err(|e| invalid("crystal", e))?;

        let b = &self.perp_beam;
        let beam = PerpBeam::new(
            b.s0,
            b.waist_um * M_PER_UM,
            b.offset_um * M_PER_UM,
            b.detuning_mhz * MHZ,
        )
        .map_err(|e| invalid("perp_beam", e))?;
        let par = ParBeam::new(self.par_beam.s_par).map_err(|e| invalid("par_beam.s_par", e))?;

        let s = &self.solver;
        let root = RootConfig {
            u_min: s.u_min_m_per_s,
            u_max: s.u_max_m_per_s,
            scan_points: s.scan_points,
            rate_abs_tol: s.rate_abs_tol_w,
            rate_rel_tol: s.rate_rel_tol,
            u_rel_tol: s.u_rel_tol,
            max_iterations: s.max_iterations,
        };
        root.validate().map_err(|e| invalid("solver", e))?;
        let velocity = VelocityQuadrature::new(s.hermite_order, s.fallback_half_width)
            .map_err(|e| invalid("solver.hermite_order", e))?;
        if !(s.balance_rel_tol > 0.0 && s.balance_rel_tol < 1.0) {
            return Err(invalid("solver.balance_rel_tol", "must lie in (0, 1)"));
        }
        let balance = BalanceSettings {
            rel_tol: s.balance_rel_tol,
            ..BalanceSettings::default()
        }
        .with_velocity(velocity);
        let options = SweepOptions {
            root,
            balance,
            workers: s.workers,
            seed: s.seed,
            ..SweepOptions::default()
        };

        let map = match &self.map {
            Some(m) => Some((
                m.detuning_mhz
                    .to_axis("map.detuning_mhz", DETUNING.0, DETUNING.1, MHZ)?,
                m.offset_um.to_axis("map.offset_um", OFFSET.0, OFFSET.1, M_PER_UM)?,
            )),
            None => None,
        };
        let reduced_map = match &self.reduced_map {
            Some(r) => {
                let s0 = r.s0.unwrap_or(b.s0);
                if !(s0 >= 0.0 && s0.is_finite()) {
                    return Err(invalid("reduced_map.s0", "must be non-negative"));
                }
                let delta_w = r.delta_w.to_axis("reduced_map.delta_w", "delta_w", "", 1.0)?;
                if delta_w.values.iter().any(|&v| v < 0.0) {
                    return Err(invalid("reduced_map.delta_w", "must be non-negative"));
                }
                Some(ReducedMapSetup {
                    s0,
                    delta_d: r.delta_d.to_axis("reduced_map.delta_d", "delta_d", "", 1.0)?,
                    delta_w,
                })
            }
            None => None,
        };
        let zero_torque = match &self.zero_torque {
            Some(z) => {
                if !(z.offset_min_um < z.offset_max_um) {
                    return Err(invalid("zero_torque.offset_min_um", "must be below offset_max_um"));
                }
                if z.scan_points < 2 {
                    return Err(invalid("zero_torque.scan_points", "need at least two"));
                }
                if !(z.bracket_width_um > 0.0) {
                    return Err(invalid("zero_torque.bracket_width_um", "must be positive"));
                }
                Some(ZeroTorqueSetup {
                    detuning: z.detuning_mhz.to_axis(
                        "zero_torque.detuning_mhz",
                        DETUNING.0,
                        DETUNING.1,
                        MHZ,
                    )?,
                    offset_bracket: (z.offset_min_um * M_PER_UM, z.offset_max_um * M_PER_UM),
                    options: ZeroTorqueOptions {
                        scan_points: z.scan_points,
                        bracket_width: z.bracket_width_um * M_PER_UM,
                    },
                })
            }
            None => None,
        };
        let slope_level = match &self.slope {
            Some(s) if s.level_mk > 0.0 => Some(s.level_mk * 1e-3),
            Some(_) => return Err(invalid("slope.level_mk", "must be positive")),
            None => None,
        };

        Ok(Experiment {
            species_preset: sp.preset.clone(),
            species,
            crystal,
            beam,
            par,
            options,
            map,
            reduced_map,
            zero_torque,
            slope_level,
        })
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        ExperimentConfig::load(path)?.to_experiment()
    }

    /// The configuration file, in file units, describing this experiment.
    pub fn to_config(&self) -> ExperimentConfig {
        let species = match &self.species_preset {
            Some(p) => SpeciesConfig {
                preset: Some(p.clone()),
                mass_amu: None,
                wavelength_nm: None,
                linewidth_mhz: None,
            },
            None => SpeciesConfig {
                preset: None,
                mass_amu: Some(self.species.mass() / AMU),
                wavelength_nm: Some(self.species.wavelength() / M_PER_NM),
                linewidth_mhz: Some(self.species.gamma0() / MHZ),
            },
        };
        let o = &self.options;
        ExperimentConfig {
            species,
            crystal: CrystalConfig {
                radius_um: self.crystal.radius() / M_PER_UM,
                sigma0_per_m2: self.crystal.sigma0(),
                rotation_khz: self.crystal.omega_r() / (2.0 * PI * HZ_PER_KHZ),
            },
            perp_beam: PerpBeamConfig {
                s0: self.beam.s0(),
                waist_um: self.beam.waist() / M_PER_UM,
                offset_um: self.beam.offset() / M_PER_UM,
                detuning_mhz: self.beam.detuning() / MHZ,
            },
            par_beam: ParBeamConfig {
                s_par: self.par.s_par(),
            },
            solver: SolverConfig {
                u_min_m_per_s: o.root.u_min,
                u_max_m_per_s: o.root.u_max,
                scan_points: o.root.scan_points,
                rate_rel_tol: o.root.rate_rel_tol,
                rate_abs_tol_w: o.root.rate_abs_tol,
                u_rel_tol: o.root.u_rel_tol,
                max_iterations: o.root.max_iterations,
                hermite_order: o.balance.velocity.rule().order(),
                fallback_half_width: o.balance.velocity.fallback_below(),
                balance_rel_tol: o.balance.rel_tol,
                workers: o.workers,
                seed: o.seed,
            },
            map: self.map.as_ref().map(|(d, off)| MapConfig {
                detuning_mhz: AxisConfig::from_axis(d, MHZ),
                offset_um: AxisConfig::from_axis(off, M_PER_UM),
            }),
            reduced_map: self.reduced_map.as_ref().map(|r| ReducedMapConfig {
                s0: Some(r.s0),
                delta_d: AxisConfig::from_axis(&r.delta_d, 1.0),
                delta_w: AxisConfig::from_axis(&r.delta_w, 1.0),
            }),
            zero_torque: self.zero_torque.as_ref().map(|z| ZeroTorqueConfig {
                detuning_mhz: AxisConfig::from_axis(&z.detuning, MHZ),
                offset_min_um: z.offset_bracket.0 / M_PER_UM,
                offset_max_um: z.offset_bracket.1 / M_PER_UM,
                scan_points: z.options.scan_points,
                bracket_width_um: z.options.bracket_width / M_PER_UM,
            }),
            slope: self.slope_level.map(|l| SlopeConfig { level_mk: l * 1e3 }),
        }
    }

    pub fn require_map(&self) -> Result<&(Axis, Axis), ConfigError> {
        self.map.as_ref().ok_or(ConfigError::MissingSection("map"))
    }

    pub fn require_reduced_map(&self) -> Result<&ReducedMapSetup, ConfigError> {
        self.reduced_map
            .as_ref()
            .ok_or(ConfigError::MissingSection("reduced_map"))
    }

    pub fn require_zero_torque(&self) -> Result<&ZeroTorqueSetup, ConfigError> {
        self.zero_torque
            .as_ref()
            .ok_or(ConfigError::MissingSection("zero_torque"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG4: &str = r#"
[species]
preset = "be9"

[crystal]
radius_um = 225.0
sigma0_per_m2 = 2.77e9
rotation_khz = 45.0

[perp_beam]
s0 = 0.5
waist_um = 30.0
offset_um = 14.0
detuning_mhz = -25.0
"#;

    fn parse(text: &str) -> Result<Experiment, ConfigError> {
        ExperimentConfig::from_toml_str(text, Path::new("test.cfg"))?.to_experiment()
    }

    #[test]
    fn units_are_converted_once() {
        let e = parse(FIG4).unwrap();
        assert!((e.crystal.radius() - 225e-6).abs() < 1e-18);
        assert!((e.crystal.omega_r() - 2.0 * PI * 45e3).abs() < 1e-9);
        assert!((e.beam.detuning() + 2.0 * PI * 25e6).abs() < 1e-6);
        assert!((e.beam.offset() - 14e-6).abs() < 1e-18);
        assert_eq!(e.par.s_par(), 0.0);
        assert_eq!(e.options.root, RootConfig::default());
        assert_eq!(e.species, AtomicSpecies::beryllium9());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = FIG4.replace("waist_um", "wiast_um");
        let err = parse(&typo).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
        assert!(err.to_string().contains("wiast_um"), "{err}");
        let extra = format!("{FIG4}\n[solver]\nhermite_ordre = 20\n");
        assert!(parse(&extra).is_err());
    }

    #[test]
    fn species_must_be_preset_or_complete() {
        let raw = FIG4.replace(
            "preset = \"be9\"",
            "mass_amu = 9.012\nwavelength_nm = 313.0\nlinewidth_mhz = 18.0",
        );
        let e = parse(&raw).unwrap();
        let be = AtomicSpecies::beryllium9();
        assert!((e.species.mass() / be.mass() - 1.0).abs() < 1e-12);
        assert!(parse(&FIG4.replace("preset = \"be9\"", "mass_amu = 9.012")).is_err());
        assert!(parse(&FIG4.replace("be9", "ca40")).is_err());
    }

    #[test]
    fn bad_values_name_their_key() {
        let err = parse(&FIG4.replace("s0 = 0.5", "s0 = -1.0")).unwrap_err();
        assert!(err.to_string().contains("perp_beam"), "{err}");
        let err = parse(&format!("{FIG4}\n[map]\ndetuning_mhz = {{ start = 0.0, stop = 0.0, points = 3 }}\noffset_um = {{ start = 0.0, stop = 1.0, points = 2 }}\n")).unwrap_err();
        assert!(err.to_string().contains("map.detuning_mhz"), "{err}");
    }

    #[test]
    fn missing_sections_are_reported() {
        let e = parse(FIG4).unwrap();
        assert!(matches!(e.require_map(), Err(ConfigError::MissingSection("map"))));
        assert!(e.require_zero_torque().is_err());
    }
}
