//! Experiment orchestration behind the command-line front end.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config_text, preset, MetricChoice, Modulus, Preset, ProblemKind, RunConfig, PRESET_NAMES};
pub use report::{contraction_factor, fit_rates, rate_report, RateFits, RateReport};
pub use run::{exit_code, prepare, read_trace_csv, run_experiment, write_trace_csv, Prepared, RunOutcome, Summary};
