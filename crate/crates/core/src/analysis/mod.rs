//! Config-driven runs: parsing, the task pipeline, report emission and the
//! builtin verification fleet.

pub mod config;
pub mod emit;
pub mod fleet;
pub mod report;

pub use config::{
    load_config, parse_config, AnalysisConfig, ConfigError, Format, SourceConfig, Task,
};
pub use emit::{
    emit, report_json, report_json_without_clock, series_csv, REPORT_FILE, SERIES_FILE,
};
pub use fleet::{fleet_members, verify_fleet, FleetMember, FleetReport, MemberOutcome};
pub use report::{run, run_detailed, Diagnostic, ReportDocument, RunArtifacts, TOOL_VERSION};
