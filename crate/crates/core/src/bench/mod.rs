//! Experiment harness: JSON configs, flat binary matrices, trace CSVs and
//! SVG convergence plots. The `proxflow` binary is a thin shell over this.

pub mod binary;
pub mod config;
pub mod experiment;
pub mod svg;
pub mod trace_csv;

pub use config::{ExperimentConfig, GenConfig, PenaltySpec, ProblemSpec, SolverSpec};
pub use experiment::{build_problem, generate, run_solvers, trace_paths, write_generated, GeneratedData};
pub use svg::plot_traces;
pub use trace_csv::{read_trace, read_trace_file, write_trace, write_trace_file};
