//! Replication experiments: configuration, registered true values, parallel
//! replication with coverage scoring, and report serialization.

pub mod config;
pub mod replicate;
pub mod report;
pub mod truth;

pub use config::{EpsilonSpec, ExperimentConfig, SamplerConfig};
pub use replicate::{replicate, run_replications, run_single, summarize};
pub use report::{emit_report, emit_run, round6, parse_csv, write_report, CoverageReport, CsvRow, OutputFormat};
pub use truth::true_value;
