//! Experiment runner for the adaptive optimizer: single runs and
//! learning-rate sweeps configured from flat key-value files, with CSV
//! trace output.

pub mod config;
pub mod runner;
pub mod trace;

/// Process exit codes: 0 on success, 1 on configuration errors, 2 when a run
/// diverged (non-finite loss; the trace up to that point is still written).
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "POLYADAPT_OUT_DIR";
