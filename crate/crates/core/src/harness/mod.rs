//! Experiment presets, diagnostics and data export.

mod config;
mod convergence;
mod diagnostics;
mod output;
mod problem;
mod run;

pub use config::{ExperimentConfig, InitialCondition, Method, Preset, Scheme, WAVE_CENTER, WAVE_PEAK};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable};
pub use diagnostics::{fourier_modes, solution_error, DiagnosticsRecord, FourierModes};
pub use output::{
    convergence_csv, diagnostics_csv, final_fields_csv, fmt_f64, gnuplot_script, metadata,
    read_column, write_convergence, write_run, OutputFiles,
};
pub use problem::{parse_expression, Problem, Reference};
pub use run::{run_experiment, RunFailure, RunOutput, SchemeRun};
