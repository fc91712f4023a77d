//! Experiment harness for the ddg solver toolkit: problem generation and
//! import, preconditioner configuration, PCG runs, parameter sweeps, the
//! coarse-grid accuracy study, and CSV reporting. The `ddg` binary is a thin
//! wrapper over this library.

pub mod config;
pub mod csv;
pub mod pipeline;

pub use config::{ExperimentConfig, PartitionerKind, ProblemKind};
pub use csv::{append_rows, ExperimentRow, CSV_HEADER};
pub use pipeline::{
    build_problem, coarse_accuracy_study, export_artifacts, fit_loglog_slope, import_problem,
    run_experiment, run_sweep, ExperimentOutcome, ImportSpec, StudyRow, SweepAxis,
};
