//! Experiment orchestration: configs, recipes, verdicts, reproducibility
//! stamps and reports.

pub mod config;
pub mod experiment;
pub mod report;
pub mod stamp;
pub mod verdict;

pub use config::{known_keys, Experiment, ExperimentConfig, Thresholds};
pub use experiment::{
    fit_window, run_experiment, simulate, simulate_profile, SERIES_FILE, STAMP_FILE, VERDICT_FILE,
};
pub use report::{report, write_loglog_svg};
pub use stamp::{
    configure_threads, reproducibility_stamp, sha256_hex, Stamp, BUILD_ID, THREADS_ENV,
};
pub use verdict::{Check, PhaseError, Status, Verdict};
