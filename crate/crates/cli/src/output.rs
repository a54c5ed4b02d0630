//! CSV, gnuplot and JSON writers, and the JSON sidecar that accompanies
//! every output file.
//!
//! Grid CSV columns are fixed: `axis1,axis2,T_perp_K,torque_Nm,status`.
//! Physical maps write axis1 as Δω/2π in MHz and axis2 as the offset in µm;
//! reduced maps write Δ_d and Δ_w. Cells without a converged equilibrium
//! leave the number columns empty. Torque is in N·m (equal to joules).

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use perpcool::sweep::{CellStatus, SpotCheck, SweepGrid, SweepInputs, ZeroTorqueCurve};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::units::{HZ_PER_MHZ, M_PER_UM};

pub const GRID_HEADER: [&str; 5] = ["axis1", "axis2", "T_perp_K", "torque_Nm", "status"];
pub const ZERO_TORQUE_HEADER: [&str; 4] = ["detuning_MHz", "offset_um", "T_perp_K", "torque_Nm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisInfo {
    pub name: String,
    pub unit: String,
    pub points: usize,
}

/// Display scaling for each axis of a grid: (name, unit, SI per unit).
fn display_axes(grid: &SweepGrid) -> [(String, String, f64); 2] {
    match grid.metadata.inputs {
        SweepInputs::Physical { .. } => [
            ("detuning".into(), "MHz".into(), 2.0 * std::f64::consts::PI * HZ_PER_MHZ),
            ("offset".into(), "um".into(), M_PER_UM),
        ],
        SweepInputs::Reduced { .. } => [
            (grid.axis1.name.clone(), String::new(), 1.0),
            (grid.axis2.name.clone(), String::new(), 1.0),
        ],
    }
}

/// Axis values in display units.
pub fn display_values(grid: &SweepGrid) -> (Vec<f64>, Vec<f64>) {
    let [a, b] = display_axes(grid);
    (
        grid.axis1.values.iter().map(|v| v / a.2).collect(),
        grid.axis2.values.iter().map(|v| v / b.2).collect(),
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_grid_csv<W: Write>(grid: &SweepGrid, out: W) -> anyhow::Result<()> {
    let (xs, ys) = display_values(grid);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            let c = grid.cell(i, j);
            w.write_record([
                x.to_string(),
                y.to_string(),
                fmt_opt(c.temperature),
                fmt_opt(c.torque),
                c.status.as_str().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Grid read back from a CSV file, in the file's display units.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub temperatures: Vec<Option<f64>>,
    pub torques: Vec<Option<f64>>,
    pub statuses: Vec<String>,
}

fn parse_opt(field: &str, line: usize) -> anyhow::Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|e| anyhow::anyhow!("row {line}: bad number `{field}`: {e}"))
}

pub fn read_grid_csv<R: Read>(input: R) -> anyhow::Result<CsvGrid> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != GRID_HEADER {
        anyhow::bail!("unexpected header {header:?}; expected {GRID_HEADER:?}");
    }
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let x: f64 = rec[0].parse().map_err(|e| anyhow::anyhow!("row {line}: {e}"))?;
        let y: f64 = rec[1].parse().map_err(|e| anyhow::anyhow!("row {line}: {e}"))?;
        rows.push((x, y, parse_opt(&rec[2], line)?, parse_opt(&rec[3], line)?, rec[4].to_string()));
    }
    if rows.is_empty() {
        anyhow::bail!("map has no rows");
    }
    let axis2: Vec<f64> = rows
        .iter()
        .take_while(|r| r.0 == rows[0].0)
        .map(|r| r.1)
        .collect();
    let n2 = axis2.len();
    if rows.len() % n2 != 0 {
        anyhow::bail!("{} rows do not form a grid with {} columns", rows.len(), n2);
    }
    let axis1: Vec<f64> = rows.iter().step_by(n2).map(|r| r.0).collect();
    for (k, row) in rows.iter().enumerate() {
        if row.0 != axis1[k / n2] || row.1 != axis2[k % n2] {
            anyhow::bail!("row {} breaks the row-major grid layout", k + 2);
        }
    }
    Ok(CsvGrid {
        axis1,
        axis2,
        temperatures: rows.iter().map(|r| r.2).collect(),
        torques: rows.iter().map(|r| r.3).collect(),
        statuses: rows.into_iter().map(|r| r.4).collect(),
    })
}

/// gnuplot nonuniform matrix: the first row is the column count followed by
/// axis2 values; each further row is an axis1 value followed by T_⊥ in K
/// (`NaN` where there is no equilibrium).
pub fn write_gnuplot_matrix<W: Write>(grid: &SweepGrid, mut out: W) -> anyhow::Result<()> {
    let (xs, ys) = display_values(grid);
    write!(out, "{}", ys.len())?;
    for y in &ys {
        write!(out, " {y}")?;
    }
    writeln!(out)?;
    for (i, x) in xs.iter().enumerate() {
        write!(out, "{x}")?;
        for j in 0..ys.len() {
            match grid.temperature(i, j) {
                Some(t) => write!(out, " {t}")?,
                None => write!(out, " NaN")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_zero_torque_csv<W: Write>(curve: &ZeroTorqueCurve, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ZERO_TORQUE_HEADER)?;
    for p in &curve.points {
        w.write_record([
            crate::commands::to_mhz(p.detuning).to_string(),
            (p.offset / M_PER_UM).to_string(),
            p.temperature.to_string(),
            p.torque.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub output: String,
    pub config: ExperimentConfig,
    pub runtime_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<[AxisInfo; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub status_counts: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spot_check: Option<SpotCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_slope_um_per_mhz: Option<f64>,
}

impl Sidecar {
    pub fn new(command: &str, output: &Path, config: ExperimentConfig, runtime_seconds: f64) -> Self {
        Sidecar {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            output: output
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            config,
            runtime_seconds,
            axes: None,
            status_counts: BTreeMap::new(),
            spot_check: None,
            predicted_slope_um_per_mhz: None,
        }
    }

    pub fn with_grid(mut self, grid: &SweepGrid) -> Self {
        let [a, b] = display_axes(grid);
        self.axes = Some([
            AxisInfo {
                name: a.0,
                unit: a.1,
                points: grid.axis1.len(),
            },
            AxisInfo {
                name: b.0,
                unit: b.1,
                points: grid.axis2.len(),
            },
        ]);
        let mut counts = BTreeMap::new();
        for s in [
            CellStatus::Converged,
            CellStatus::NoRoot,
            CellStatus::RunawayHeating,
            CellStatus::Failed,
        ] {
            counts.insert(s.as_str().to_string(), grid.cells.iter().filter(|c| c.status == s).count());
        }
        self.status_counts = counts;
        self.spot_check = Some(grid.spot_check.clone());
        self
    }

    pub fn path_for(output: &Path) -> PathBuf {
        output.with_extension("meta.json")
    }

    pub fn write(&self, output: &Path) -> anyhow::Result<PathBuf> {
        let path = Self::path_for(output);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n")
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }

    pub fn read(output: &Path) -> anyhow::Result<Self> {
        let path = Self::path_for(output);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| anyhow::anyhow!("cannot read sidecar {}: {e}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}
