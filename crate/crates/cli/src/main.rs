use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use perpcool::equilibrium::Status;
use perpcool_cli::commands::{self, LimitReport};
use perpcool_cli::config::{Experiment, ExperimentConfig};
use perpcool_cli::output::{
    read_grid_csv, write_gnuplot_matrix, write_grid_csv, write_zero_torque_csv, Sidecar,
};

/// Equilibrium temperatures and laser torques for perpendicular Doppler
/// cooling of a rotating single-plane ion crystal.
///
/// Detunings in config files are Δω/2π in MHz; negative means red of the
/// atomic resonance.
#[derive(Parser)]
#[command(name = "perpcool", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium temperature, torque and rates at one beam setting.
    Limit(RunArgs),
    /// Temperature and torque over the [map] detuning × offset grid.
    Map(RunArgs),
    /// Temperature over the [reduced_map] Δ_d × Δ_w grid.
    ReducedMap(RunArgs),
    /// Offsets of zero laser torque for each [zero_torque] detuning.
    ZeroTorque(RunArgs),
    /// Contour-line slope of a map written by `map`.
    Slope(SlopeArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides solver.workers).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SlopeArgs {
    /// CSV map; its sidecar must sit next to it.
    #[arg(long)]
    map: PathBuf,
    /// Contour level in mK (defaults to slope.level_mk in the sidecar config).
    #[arg(long)]
    level_mk: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Gnuplot,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let solver = e
                .downcast_ref::<perpcool::Error>()
                .is_some_and(|e| {
                    matches!(
                        e,
                        perpcool::Error::RootNotConverged { .. }
                            | perpcool::Error::QuadratureNotConverged { .. }
                    )
                });
            ExitCode::from(if solver { EXIT_NOT_CONVERGED } else { EXIT_CONFIG })
        }
    }
}

fn load(args: &RunArgs) -> anyhow::Result<(ExperimentConfig, Experiment)> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let mut exp = cfg.to_experiment()?;
    if let Some(w) = args.workers {
        exp.options.workers = w;
    }
    Ok((cfg, exp))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn require_out(args: &RunArgs) -> anyhow::Result<&Path> {
    match &args.out {
        Some(p) => Ok(p),
        None => bail!("--out is required for this command"),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Limit(args) => limit(&args),
        Command::Map(args) => grid(&args, "map"),
        Command::ReducedMap(args) => grid(&args, "reduced-map"),
        Command::ZeroTorque(args) => zero_torque(&args),
        Command::Slope(args) => slope(&args),
    }
}

fn print_limit(r: &LimitReport) {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
    println!("status          {}", r.status.as_str());
    println!("T_perp [K]      {}", opt(r.temperature_k));
    println!("u* [m/s]        {}", opt(r.u_star_m_per_s));
    println!("rates at u      {:.6e} m/s", r.rates_at_u_m_per_s);
    println!("torque [N m]    {:.6e}", r.torque_nm);
    println!("laser [W]       {:.6e}", r.laser_rate_w);
    println!("wall [W]        {:.6e}", r.wall_rate_w);
    println!("parallel [W]    {:.6e}", r.parallel_rate_w);
    println!("total [W]       {:.6e}", r.total_rate_w);
    println!("delta_d         {:.6}", r.delta_d);
    println!("delta_w         {:.6}", r.delta_w);
    if r.bistable {
        println!("warning: more than one stable crossing on the scan grid");
    }
}

fn limit(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    let (cfg, exp) = load(args)?;
    let report = commands::limit(&exp)?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        _ => print_limit(&report),
    }
    if let Some(out) = &args.out {
        let mut w = create(out)?;
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        w.flush()?;
        Sidecar::new("limit", out, cfg, start.elapsed().as_secs_f64()).write(out)?;
    }
    Ok(if report.status == Status::Converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    })
}

fn grid(args: &RunArgs, command: &str) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    let (cfg, exp) = load(args)?;
    let out = require_out(args)?;
    let g = if command == "map" {
        commands::map(&exp)?
    } else {
        commands::reduced_map(&exp)?
    };
    let mut w = create(out)?;
    match args.format {
        Format::Csv => write_grid_csv(&g, &mut w)?,
        Format::Gnuplot => write_gnuplot_matrix(&g, &mut w)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &g)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    let mut side = Sidecar::new(command, out, cfg, start.elapsed().as_secs_f64()).with_grid(&g);
    if command == "map" {
        side.predicted_slope_um_per_mhz = Some(commands::predicted_slope_um_per_mhz(&exp));
    }
    let side_path = side.write(out)?;
    if let Some((i, j, t)) = g.minimum() {
        let (xs, ys) = perpcool_cli::output::display_values(&g);
        println!("minimum T_perp {t:.6e} K at axis1 = {}, axis2 = {}", xs[i], ys[j]);
    }
    if !g.spot_check.failed.is_empty() {
        eprintln!("warning: stability spot check failed at cells {:?}", g.spot_check.failed);
    }
    println!("wrote {} and {}", out.display(), side_path.display());
    Ok(ExitCode::SUCCESS)
}

fn zero_torque(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    let (cfg, exp) = load(args)?;
    let out = require_out(args)?;
    let curve = commands::zero_torque(&exp)?;
    let mut w = create(out)?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &curve)?;
            writeln!(w)?;
        }
        Format::Csv => write_zero_torque_csv(&curve, &mut w)?,
        Format::Gnuplot => bail!("gnuplot output applies to maps only"),
    }
    w.flush()?;
    let side_path = Sidecar::new("zero-torque", out, cfg, start.elapsed().as_secs_f64()).write(out)?;
    match curve.coldest() {
        Some(p) => println!(
            "{} zero-torque points; coldest T_perp {:.6e} K at {:.4} MHz, {:.4} um",
            curve.points.len(),
            p.temperature,
            commands::to_mhz(p.detuning),
            p.offset * 1e6
        ),
        None => println!("no torque sign change in the offset bracket"),
    }
    println!("wrote {} and {}", out.display(), side_path.display());
    Ok(ExitCode::SUCCESS)
}

fn slope(args: &SlopeArgs) -> anyhow::Result<ExitCode> {
    let file = File::open(&args.map).with_context(|| format!("cannot read {}", args.map.display()))?;
    let grid = read_grid_csv(file)?;
    let side = Sidecar::read(&args.map)?;
    let level_mk = match (args.level_mk, &side.config.slope) {
        (Some(l), _) => l,
        (None, Some(s)) => s.level_mk,
        (None, None) => bail!("no contour level: pass --level-mk or set slope.level_mk"),
    };
    let predicted = if side.command == "map" {
        Some(commands::predicted_slope_um_per_mhz(&side.config.to_experiment()?))
    } else {
        None
    };
    let report = commands::slope_from_display(
        &grid.axis1,
        &grid.axis2,
        &grid.temperatures,
        level_mk * 1e-3,
        predicted,
    )?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        _ => {
            let unit = if predicted.is_some() { " um/MHz" } else { "" };
            println!("level           {level_mk} mK");
            println!("slope           {:.4}{unit}", report.slope);
            println!("fit residual    {:.3e}", report.residual);
            println!("points          {} in {} pieces", report.points, report.components);
            if let Some(p) = predicted {
                println!("predicted       {p:.4}{unit}");
            }
        }
    }
    if let Some(out) = &args.out {
        let mut w = create(out)?;
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}
