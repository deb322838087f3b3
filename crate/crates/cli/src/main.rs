use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use log::{error, info};

use uav_relay::baselines::Strategy;
use uav_relay::pipeline::{
    emit_csv, emit_plot, parse_config, parse_inits, run_experiment, summary_table, ExperimentConfig, SweepAxis,
};
use uav_relay::Protocol;

/// Joint power, power-splitting and trajectory optimization for a SWIPT-powered
/// UAV relay. Runs every (sweep value, protocol, strategy) cell and writes CSV
/// tables and SVG charts.
#[derive(Debug, Parser)]
#[command(name = "uav-relay", version)]
struct Args {
    /// TOML experiment file; keys left out keep the reference values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// af, df or both.
    #[arg(long, value_name = "af|df|both")]
    protocol: Option<String>,
    /// Comma-separated list of optimal, greedy, static.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Initial trajectory of the optimal and greedy strategies.
    #[arg(long, value_name = "straight|semicircle|both")]
    init: Option<String>,
    /// Swept parameter.
    #[arg(long, value_name = "ps|altitude")]
    sweep: Option<String>,
    /// Comma-separated sweep values (default: those of the config file for the same axis).
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed recorded with the run. The solvers are deterministic.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Relative tolerance of the outer loop.
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Cap on outer rounds.
    #[arg(long, value_name = "INT")]
    max_outer: Option<usize>,
    /// Skip the SVG charts.
    #[arg(long)]
    no_plots: bool,
}

fn build_config(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &args.protocol {
        cfg.protocols = match p.to_ascii_lowercase().as_str() {
            "both" => Protocol::ALL.to_vec(),
            other => vec![other.parse()?],
        };
    }
    if let Some(list) = &args.strategy {
        cfg.strategies = list.iter().map(|s| s.trim().parse::<Strategy>()).collect::<Result<_, _>>()?;
    }
    if let Some(init) = &args.init {
        cfg.inits = parse_inits(init)?;
    }
    if let Some(axis) = &args.sweep {
        let axis: SweepAxis = axis.parse()?;
        if axis != cfg.sweep.axis {
            cfg.sweep.values.clear();
        }
        cfg.sweep.axis = axis;
    }
    if let Some(values) = &args.values {
        cfg.sweep.values = values.clone();
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.outer_tol = tol;
    }
    if let Some(m) = args.max_outer {
        cfg.max_outer = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<bool> {
    let cfg = build_config(args)?;
    info!(
        "{} protocol(s), {} strateg(ies), sweep {} over {:?}, output in {}",
        cfg.protocols.len(),
        cfg.strategies.len(),
        cfg.sweep.axis.as_str(),
        cfg.sweep_points(),
        cfg.output_dir.display()
    );
    let outcome = run_experiment(&cfg)?;
    print!("{}", summary_table(&outcome));
    let files = emit_csv(&outcome, &cfg.output_dir).context("writing CSV tables")?;
    info!("wrote {} CSV tables", files.len());
    if !args.no_plots {
        let charts = emit_plot(&outcome, &cfg.output_dir).context("writing charts")?;
        info!("wrote {} charts", charts.len());
    }
    for f in &outcome.failures {
        error!("{} {} at {} failed: {}", f.cell.strategy, f.cell.protocol, f.cell.sweep_value, f.error);
    }
    Ok(outcome.complete())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
