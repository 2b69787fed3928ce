//! Batch experiments on top of `ebcl-core`: config loading, seeded and
//! parallel Monte Carlo runs, and CSV output.
//!
//! Three entry points mirror the CLI subcommands: [`run_learn`], [`run_sweep`]
//! and [`run_validate`]. Each returns the file contents it would write, so
//! callers decide when to touch the disk.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod output;
mod runs;

pub use config::ExperimentConfig;
pub use output::{write_files, OutputFile};
pub use runs::{
    run_learn, run_sweep, run_validate, sweep_cells, AggregateRow, LearnSummary, ResultRow,
    SweepCell, SweepOutput, ValidateOutput, NEGATIVE_ARM_MIN_LOSS,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("runtime error: {0}")]
    Runtime(#[from] ebcl_core::Error),
}

impl HarnessError {
    /// Process exit code: 2 for config errors, 3 for everything at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) | HarnessError::Runtime(_) => 3,
        }
    }
}

/// Header lines shared by every output file.
pub fn file_header(command: &str, cfg: &ExperimentConfig) -> String {
    format!(
        "# {} {}\n# command = {command}\n# rng = {}\n# noise_power = tx_power / 10^(snr_db / 10)\n{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        ebcl_core::Rng::ALGORITHM,
        cfg.header_block()
    )
}
