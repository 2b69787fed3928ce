use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ebcl_harness::{
    run_learn, run_sweep, run_validate, write_files, ExperimentConfig, HarnessError,
};

#[derive(Parser)]
#[command(
    name = "ebcl",
    version,
    about = "Blind null-space learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One learning session: reconstructed vs true Gram and the null basis.
    Learn(Overrides),
    /// Rate comparison of the sharing schemes over trials and SNRs.
    Sweep(Overrides),
    /// Rank-preservation and effective-channel statistics; exit 1 on failure.
    Validate(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// ideal, sampled, projected or projected_sampled.
    #[arg(long)]
    beacon: Option<String>,
    /// Symbols per transmission cycle.
    #[arg(long = "N", value_name = "N")]
    cycle_length: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.output_path = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = &self.beacon {
            cfg.beacon = v.clone();
        }
        if let Some(v) = self.cycle_length {
            cfg.cycle_length = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Learn(o) => {
            let cfg = o.resolve()?;
            let (s, files) = run_learn(&cfg)?;
            write_files(&files)?;
            println!(
                "relative_error={:e} null_dim={} expected_null_dim={} measurements={} leak={:e}",
                s.relative_error,
                s.null_dim,
                s.expected_null_dim,
                s.measurement_count,
                s.interference_leak
            );
            Ok(true)
        }
        Command::Sweep(o) => {
            let cfg = o.resolve()?;
            let out = run_sweep(&cfg)?;
            write_files(&out.files)?;
            for a in &out.aggregate {
                println!(
                    "t={} {:<22} snr={:>6} dB  ratio={:.4}",
                    a.t1, a.scheme, a.snr_db, a.mean_rate_ratio
                );
            }
            Ok(true)
        }
        Command::Validate(o) => {
            let cfg = o.resolve()?;
            let out = run_validate(&cfg)?;
            write_files(&out.files)?;
            print!("{}", out.table);
            Ok(out.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ebcl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
