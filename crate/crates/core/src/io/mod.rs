//! Configuration documents, result tables and file-level invariant checks.

mod check;
mod config;
mod results;

pub use check::{check_result_rows, check_state_lines, CheckReport};
pub use config::{parse_config, OutputFormat, RunConfig};
pub use results::{
    format_real, read_results_csv, trajectory_rows, write_results, ResultWriter, CSV_HEADER,
};
