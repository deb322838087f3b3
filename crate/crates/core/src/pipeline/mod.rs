//! Alternating optimization driver, experiment configuration, sweeps and output.

mod alternate;
mod config;
mod output;
mod plot;
mod run;

pub use alternate::{alternate_optimize, AlternateOptions, OuterTermination, RunRecord};
pub use config::{
    parse_arc_side, parse_config, parse_config_str, parse_inits, ExperimentConfig, InitKind, Sweep, SweepAxis,
};
pub use output::{emit_csv, format_sig, read_trajectory_csv, TrajectoryTable};
pub use plot::{emit_plot, Chart, Landmark, Series};
pub use run::{
    alternate_options, check_record, experiment_cells, run_cell, run_experiment, summary_table, Cell, CellFailure,
    CellRecord, ExperimentOutcome,
};
