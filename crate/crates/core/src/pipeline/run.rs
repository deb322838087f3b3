//! Experiment sweeps: every (sweep value, protocol, strategy, initialization) cell.

use std::fmt::Write as _;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::baselines::{
    greedy_strategy, semicircle_init, static_strategy, straight_line_init, GreedyOptions, Strategy, StrategyResult,
};
use crate::error::{Error, Result};
use crate::model::{
    causality_residuals, is_causal, validate_steps, validate_trajectory, Protocol, Scenario, Trajectory,
};
use crate::trajectory::TrajectoryOptions;

use super::alternate::{alternate_optimize, AlternateOptions, RunRecord};
use super::config::{ExperimentConfig, InitKind, SweepAxis};

/// One experiment cell. `init` is `None` for the hovering strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub sweep_value: f64,
    pub protocol: Protocol,
    pub strategy: Strategy,
    pub init: Option<InitKind>,
}

#[derive(Debug, Clone)]
pub struct CellRecord {
    pub cell: Cell,
    pub scenario: Scenario<f64>,
    pub run: RunRecord<f64>,
}

#[derive(Debug, Clone)]
pub struct CellFailure {
    pub cell: Cell,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub axis: SweepAxis,
    pub records: Vec<CellRecord>,
    pub failures: Vec<CellFailure>,
}

impl ExperimentOutcome {
    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Cells in output order: sweep value, protocol, strategy, initialization.
pub fn experiment_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for sweep_value in cfg.sweep_points() {
        for &protocol in &cfg.protocols {
            for &strategy in &cfg.strategies {
                if strategy == Strategy::Static {
                    cells.push(Cell { sweep_value, protocol, strategy, init: None });
                } else {
                    for &init in &cfg.inits {
                        cells.push(Cell { sweep_value, protocol, strategy, init: Some(init) });
                    }
                }
            }
        }
    }
    cells
}

pub fn alternate_options(cfg: &ExperimentConfig) -> AlternateOptions<f64> {
    AlternateOptions {
        max_outer: cfg.max_outer,
        rel_tol: cfg.outer_tol,
        trajectory: TrajectoryOptions {
            rel_tol: cfg.trajectory_tol,
            max_iter: cfg.max_trajectory_iter,
            ..TrajectoryOptions::default()
        },
        ..AlternateOptions::default()
    }
}

fn initial_trajectory(cfg: &ExperimentConfig, scn: &Scenario<f64>, init: InitKind) -> Result<Trajectory<f64>> {
    match init {
        InitKind::Straight => straight_line_init(scn),
        InitKind::Semicircle => semicircle_init(scn, cfg.arc_side),
    }
}

fn from_strategy(res: StrategyResult<f64>, init: &str, started: Instant) -> RunRecord<f64> {
    RunRecord {
        strategy: res.strategy,
        protocol: res.protocol,
        init: init.to_string(),
        trace: res.trace,
        profile: res.profile,
        trajectory: res.trajectory,
        throughput: res.throughput,
        elapsed: started.elapsed(),
        termination: res.termination,
        hover: res.hover,
    }
}

/// Runs one cell and checks the result before handing it out.
pub fn run_cell(cfg: &ExperimentConfig, cell: Cell) -> Result<CellRecord> {
    let scn = cfg.scenario_at(cell.sweep_value)?;
    let opts = alternate_options(cfg);
    let started = Instant::now();
    let run = match (cell.strategy, cell.init) {
        (Strategy::Static, _) => {
            let res = static_strategy(&scn, cell.protocol, cfg.hover, &opts.profile)?;
            from_strategy(res, "hover", started)
        }
        (Strategy::Optimal, Some(init)) => {
            let traj = initial_trajectory(cfg, &scn, init)?;
            alternate_optimize(&scn, cell.protocol, &traj, init.as_str(), &opts)?
        }
        (Strategy::Greedy, Some(init)) => {
            let traj = initial_trajectory(cfg, &scn, init)?;
            let gopts = GreedyOptions { max_rounds: cfg.max_outer, rel_tol: cfg.outer_tol, trajectory: opts.trajectory };
            from_strategy(greedy_strategy(&scn, cell.protocol, &traj, &gopts)?, init.as_str(), started)
        }
        (_, None) => return Err(Error::Config(format!("{} needs an initial trajectory", cell.strategy))),
    };
    check_record(&scn, &run)?;
    Ok(CellRecord { cell, scenario: scn, run })
}

/// Mobility and energy-causality checks every emitted result must pass.
pub fn check_record(scn: &Scenario<f64>, run: &RunRecord<f64>) -> Result<()> {
    let check = if run.hover.is_some() { validate_steps(scn, &run.trajectory) } else { validate_trajectory(scn, &run.trajectory) };
    if !check.feasible {
        return Err(Error::InfeasibleTrajectory { violation: check.worst_violation });
    }
    let res = causality_residuals(scn, &run.trajectory, &run.profile)?;
    if !is_causal(&res) {
        let worst = res.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::InfeasibleProfile { residual: worst });
    }
    Ok(())
}

/// Runs every cell in parallel. Failed cells are reported, not fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let cells = experiment_cells(cfg);
    info!("running {} cells", cells.len());
    let results: Vec<_> = cells.par_iter().map(|&cell| (cell, run_cell(cfg, cell))).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (cell, res) in results {
        match res {
            Ok(r) => {
                info!(
                    "{} {} {} {}={}: {:.6} in {:.2?}",
                    cell.strategy,
                    cell.protocol,
                    r.run.init,
                    cfg.sweep.axis.as_str(),
                    cell.sweep_value,
                    r.run.throughput,
                    r.run.elapsed
                );
                records.push(r);
            }
            Err(e) => {
                warn!("cell {cell:?} failed: {e}");
                failures.push(CellFailure { cell, error: e.to_string() });
            }
        }
    }
    Ok(ExperimentOutcome { axis: cfg.sweep.axis, records, failures })
}

/// Plain-text table of the final throughputs.
pub fn summary_table(outcome: &ExperimentOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9} {:<8} {:<11} {:>12} {:>14} {:>7} {:<16}",
        "strategy",
        "protocol",
        "init",
        outcome.axis.as_str(),
        "throughput",
        "rounds",
        "termination"
    );
    for r in &outcome.records {
        let _ = writeln!(
            out,
            "{:<9} {:<8} {:<11} {:>12} {:>14.6} {:>7} {:<16}",
            r.run.strategy.as_str(),
            r.run.protocol.as_str(),
            r.run.init,
            r.cell.sweep_value,
            r.run.throughput,
            r.run.trace.len().saturating_sub(1),
            r.run.termination.as_str()
        );
    }
    for f in &outcome.failures {
        let _ = writeln!(
            out,
            "{:<9} {:<8} {:<11} {:>12} FAILED: {}",
            f.cell.strategy.as_str(),
            f.cell.protocol.as_str(),
            f.cell.init.map_or("hover", InitKind::as_str),
            f.cell.sweep_value,
            f.error
        );
    }
    out
}
