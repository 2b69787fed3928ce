//! Flat TOML experiment configuration.
//!
//! Every key has a default, so an empty file is a valid config. Unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use ebcl_core::sharing::Scheme;
use ebcl_core::{AntennaConfig, BeaconMode};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const CONFIG_BEGIN: &str = "# --- config ---";
pub const CONFIG_END: &str = "# --- end config ---";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub t1: usize,
    pub r1: usize,
    pub t2: usize,
    pub r2: usize,
    pub snr_db_grid: Vec<f64>,
    pub interference_gain_db: f64,
    /// `ideal`, `sampled`, `projected` or `projected_sampled`.
    pub beacon: String,
    /// Symbols per transmission cycle for sampled beacons.
    pub cycle_length: usize,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<String>,
    pub partial_extra: usize,
    pub output_path: String,
    pub tx_power: f64,
    pub fdd_power_boost: bool,
    /// When non-empty, `sweep` sets `t1 = t2 = t` for each entry.
    pub t_grid: Vec<usize>,
    /// Worker threads; 0 uses every available core. Left out of output
    /// headers because it never changes results.
    #[serde(skip_serializing)]
    pub workers: usize,
    pub zmsw_trials: usize,
    pub null_tol: f64,
    pub null_tol_k: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            t1: 4,
            r1: 2,
            t2: 4,
            r2: 2,
            snr_db_grid: vec![20.0],
            interference_gain_db: -10.5,
            beacon: "ideal".into(),
            cycle_length: 100,
            alpha: 1.0,
            trials: 100,
            seed: 1,
            schemes: ["SCS", "FDD", "NoMitigation", "PartialSCS"]
                .into_iter()
                .map(String::from)
                .collect(),
            partial_extra: 1,
            output_path: "ebcl_out.csv".into(),
            tx_power: 1.0,
            fdd_power_boost: false,
            t_grid: Vec::new(),
            workers: 0,
            zmsw_trials: 10_000,
            null_tol: ebcl_core::ebcl::DEFAULT_NULL_TOL,
            null_tol_k: ebcl_core::ebcl::DEFAULT_NOISE_K,
        }
    }
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

pub fn parse_beacon_mode(name: &str) -> Result<BeaconMode, HarnessError> {
    match name {
        "ideal" => Ok(BeaconMode::Ideal),
        "sampled" => Ok(BeaconMode::SampleAverage),
        "projected" => Ok(BeaconMode::ProjectedIdeal),
        "projected_sampled" => Ok(BeaconMode::ProjectedSampleAverage),
        other => Err(invalid(format!(
            "unknown beacon `{other}` (expected ideal, sampled, projected or projected_sampled)"
        ))),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Recovers the config embedded in an output file's header.
    pub fn from_output_header(text: &str) -> Result<Self, HarnessError> {
        let mut inside = false;
        let mut body = String::new();
        for line in text.lines() {
            if line == CONFIG_BEGIN {
                inside = true;
            } else if line == CONFIG_END {
                return Self::from_toml(&body);
            } else if inside {
                let stripped = line
                    .strip_prefix("# ")
                    .or_else(|| line.strip_prefix('#'))
                    .ok_or_else(|| invalid("malformed config header line"))?;
                body.push_str(stripped);
                body.push('\n');
            }
        }
        Err(invalid("no config block in header"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Config block for an output header, one `# ` line per TOML line.
    pub fn header_block(&self) -> String {
        let mut out = String::new();
        out.push_str(CONFIG_BEGIN);
        out.push('\n');
        for line in self.to_toml().lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(CONFIG_END);
        out.push('\n');
        out
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if [self.t1, self.r1, self.t2, self.r2].contains(&0) {
            return Err(invalid("antenna counts must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.snr_db_grid.is_empty() {
            return Err(invalid("snr_db_grid must not be empty"));
        }
        if self.snr_db_grid.iter().any(|s| !s.is_finite()) || !self.interference_gain_db.is_finite()
        {
            return Err(invalid("dB values must be finite"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha must be positive"));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(invalid("tx_power must be positive"));
        }
        if self.cycle_length == 0 {
            return Err(invalid("cycle_length must be at least 1"));
        }
        if self.t_grid.contains(&0) {
            return Err(invalid("t_grid entries must be at least 1"));
        }
        if !(self.null_tol >= 0.0) || !(self.null_tol_k >= 0.0) {
            return Err(invalid("null_tol and null_tol_k must be >= 0"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(invalid("seed must fit in a signed 64-bit TOML integer"));
        }
        if self.output_path.is_empty() {
            return Err(invalid("output_path must not be empty"));
        }
        parse_beacon_mode(&self.beacon)?;
        self.parsed_schemes()?;
        Ok(())
    }

    pub fn antennas(&self) -> AntennaConfig {
        AntennaConfig {
            t1: self.t1,
            r1: self.r1,
            t2: self.t2,
            r2: self.r2,
        }
    }

    pub fn beacon_mode(&self) -> BeaconMode {
        parse_beacon_mode(&self.beacon).expect("validated")
    }

    /// Requested schemes, deduplicated and in canonical order.
    pub fn parsed_schemes(&self) -> Result<Vec<Scheme>, HarnessError> {
        let mut out = Vec::new();
        for name in &self.schemes {
            let s: Scheme = name
                .parse()
                .map_err(|_| invalid(format!("unknown scheme `{name}`")))?;
            if s == Scheme::SingleUserFullChannel {
                continue;
            }
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn output(&self) -> PathBuf {
        PathBuf::from(&self.output_path)
    }

    /// `<stem>.aggregate.csv` next to the raw output.
    pub fn aggregate_path(&self) -> PathBuf {
        let raw = self.output();
        let stem = raw
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "ebcl_out".into());
        raw.with_file_name(format!("{stem}.aggregate.csv"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(
            ExperimentConfig::from_toml("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = ExperimentConfig::from_toml("snr_grid = [1.0]\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }

    #[test]
    fn invalid_values_are_rejected() {
        for text in [
            "trials = 0",
            "snr_db_grid = []",
            "alpha = 0.0",
            "beacon = \"loud\"",
            "schemes = [\"TDMA\"]",
            "t1 = 0",
            "cycle_length = 0",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn header_round_trip() {
        let cfg = ExperimentConfig {
            snr_db_grid: vec![-10.0, 0.1, 12.5],
            interference_gain_db: -10.5,
            seed: u64::MAX / 3,
            t_grid: vec![2, 3],
            alpha: 0.1,
            ..Default::default()
        };
        let text = format!("# tool header\n{}t1,r1\n4,2\n", cfg.header_block());
        assert_eq!(ExperimentConfig::from_output_header(&text).unwrap(), cfg);
    }

    #[test]
    fn schemes_are_canonical() {
        let cfg = ExperimentConfig {
            schemes: vec!["FDD".into(), "SCS".into(), "fdd".into()],
            ..Default::default()
        };
        assert_eq!(
            cfg.parsed_schemes().unwrap(),
            vec![Scheme::Scs, Scheme::Fdd]
        );
    }

    #[test]
    fn aggregate_path_sits_next_to_output() {
        let cfg = ExperimentConfig {
            output_path: "out/run1.csv".into(),
            ..Default::default()
        };
        assert_eq!(
            cfg.aggregate_path(),
            PathBuf::from("out/run1.aggregate.csv")
        );
    }
}
