//! Command-line front end for circle optimal transport: reads histogram
//! files, runs the solver and prints one JSON document per invocation.

pub mod bench;
pub mod commands;
pub mod input;
pub mod report;

pub use bench::{run_bench, BenchConfig};
pub use commands::{cmd_check, cmd_curve, cmd_distance, cmd_plan, CliError, SolveFlags};
pub use input::{load_histogram, HistogramFile, InputError};
pub use report::{Real, RunReport};
