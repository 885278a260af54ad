//! Configuration, orchestration and report persistence behind the `afmass`
//! binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{Command, RunConfig, DEFAULT_Q};
pub use report::{read_report, write_csv, write_report, Report, ReportError};
pub use run::{execute, write_error_report, CliError, ErrorReport, Outcome};
