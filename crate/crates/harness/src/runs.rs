use std::collections::BTreeMap;
use std::fmt::Write as _;

use ebcl_core::channel::{db_to_linear, noise_power_for_snr, sample_channel_set};
use ebcl_core::cmatrix::{self, ComplexMatrix};
use ebcl_core::ebcl::{null_space, run_learning_session, LearnerSettings};
use ebcl_core::sharing::{
    self, dof_claim_holds, dof_negative_config, evaluate_schemes, scs_learn, DofArm, DofReport,
    EvaluationParams, HandshakeParams, Scheme, ZmswReport, ZmswThresholds,
};
use ebcl_core::{AntennaConfig, BeaconEmitter, Rng};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::output::{csv_text, OutputFile};
use crate::{file_header, HarnessError};

/// Smallest fraction of contrast-arm trials that must lose rank.
pub const NEGATIVE_ARM_MIN_LOSS: f64 = 0.99;

fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Io(std::io::Error::other(e)))
}

fn learner(cfg: &ExperimentConfig) -> LearnerSettings {
    LearnerSettings {
        null_tol: cfg.null_tol,
        noise_k: cfg.null_tol_k,
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnSummary {
    /// `||g_hat / g_hat_11 - G / G_11||_F / ||G / G_11||_F`.
    pub relative_error: f64,
    pub null_dim: usize,
    /// `t2 - rank` of the channel the beacon actually reports on.
    pub expected_null_dim: usize,
    pub measurement_count: usize,
    /// `max ||H v|| / ||H||_F` over the learned null basis.
    pub interference_leak: f64,
}

/// One learning session on a fresh channel. The beacon reports on `H12`, or
/// on `P_{H11} H12` in projected modes.
pub fn run_learn(cfg: &ExperimentConfig) -> Result<(LearnSummary, Vec<OutputFile>), HarnessError> {
    cfg.validate()?;
    let mode = cfg.beacon_mode();
    let np = noise_power_for_snr(cfg.snr_db_grid[0], cfg.tx_power);
    let gain = db_to_linear(cfg.interference_gain_db);
    let cs = sample_channel_set(
        cfg.antennas(),
        np,
        np,
        gain,
        &mut Rng::with_stream(cfg.seed, 0),
    )?;
    let mut em = BeaconEmitter::new(&cs, mode, cfg.alpha, Rng::with_stream(cfg.seed, 1))?
        .with_cycle_length(cfg.cycle_length)?
        .with_pu_power(cfg.tx_power)?;
    let lg = run_learning_session(&mut em, &learner(cfg))?;

    let seen = match em.projector() {
        Some(p) => p.matmul(cs.h12())?,
        None => cs.h12().clone(),
    };
    let g_true = seen.conj_transpose().matmul(&seen)?;
    let g_true_n = normalize(&g_true);
    let g_hat_n = lg.normalized();
    let denom = g_true_n.frobenius_norm();
    let relative_error = if denom > 0.0 {
        g_hat_n.sub(&g_true_n)?.frobenius_norm() / denom
    } else {
        g_hat_n.frobenius_norm()
    };
    let basis = null_space(&lg);
    let scale = seen.frobenius_norm();
    let mut leak: f64 = 0.0;
    for k in 0..basis.dim() {
        let hv = seen.mul_vec(&basis.t.column(k))?;
        if scale > 0.0 {
            leak = leak.max(cmatrix::vector_norm_sq(&hv).sqrt() / scale);
        }
    }
    let summary = LearnSummary {
        relative_error,
        null_dim: basis.dim(),
        expected_null_dim: cfg.t2 - cmatrix::numeric_rank(&seen, sharing::RANK_REL_TOL),
        measurement_count: lg.measurement_count,
        interference_leak: leak,
    };

    let mut rows = vec![
        scalar_row("relative_error", num(summary.relative_error)),
        scalar_row("null_dim", summary.null_dim.to_string()),
        scalar_row("expected_null_dim", summary.expected_null_dim.to_string()),
        scalar_row("measurement_count", summary.measurement_count.to_string()),
        scalar_row("interference_leak", num(summary.interference_leak)),
    ];
    rows.extend(matrix_rows("g_hat_normalized", &g_hat_n));
    rows.extend(matrix_rows("g_true_normalized", &g_true_n));
    rows.extend(matrix_rows("null_basis", &basis.t));
    let text = csv_text(
        &file_header("learn", cfg),
        &["quantity", "row", "col", "re", "im"],
        rows,
    )?;
    Ok((
        summary,
        vec![OutputFile {
            path: cfg.output(),
            contents: text,
        }],
    ))
}

fn normalize(g: &ComplexMatrix) -> ComplexMatrix {
    let g11 = g[(0, 0)].re;
    if g11 > 0.0 {
        g.scale(1.0 / g11)
    } else {
        g.clone()
    }
}

fn scalar_row(name: &str, value: String) -> Vec<String> {
    vec![
        name.into(),
        String::new(),
        String::new(),
        value,
        String::new(),
    ]
}

fn matrix_rows<'a>(name: &'a str, m: &'a ComplexMatrix) -> impl Iterator<Item = Vec<String>> + 'a {
    (0..m.rows()).flat_map(move |i| {
        (0..m.cols()).map(move |j| {
            let z = m[(i, j)];
            vec![
                name.into(),
                i.to_string(),
                j.to_string(),
                num(z.re),
                num(z.im),
            ]
        })
    })
}

/// One (antenna config, trial, SNR) cell of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub t_index: usize,
    pub antennas: AntennaConfig,
    pub snr_index: usize,
    pub snr_db: f64,
    pub trial: usize,
    /// Random stream of this cell under the config seed.
    pub stream: u64,
}

/// Every cell of a sweep in canonical order.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Vec<SweepCell> {
    let antennas: Vec<AntennaConfig> = if cfg.t_grid.is_empty() {
        vec![cfg.antennas()]
    } else {
        cfg.t_grid
            .iter()
            .map(|&t| AntennaConfig {
                t1: t,
                t2: t,
                ..cfg.antennas()
            })
            .collect()
    };
    let mut cells = Vec::new();
    for (t_index, &ant) in antennas.iter().enumerate() {
        for trial in 0..cfg.trials {
            for (snr_index, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
                cells.push(SweepCell {
                    t_index,
                    antennas: ant,
                    snr_index,
                    snr_db,
                    trial,
                    stream: ((t_index as u64) << 48) | ((snr_index as u64) << 32) | trial as u64,
                });
            }
        }
    }
    cells
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub t1: usize,
    pub r1: usize,
    pub t2: usize,
    pub r2: usize,
    pub beacon: String,
    pub cycle_length: usize,
    pub interference_gain_db: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trial: usize,
    pub trial_seed: u64,
    pub rate_user1: f64,
    pub rate_user2: f64,
    pub residual_interference: f64,
    pub learning_cycles: usize,
}

const RESULT_HEADER: [&str; 16] = [
    "t1",
    "r1",
    "t2",
    "r2",
    "beacon",
    "cycle_length",
    "interference_gain_db",
    "seed",
    "scheme",
    "snr_db",
    "trial",
    "trial_seed",
    "rate_user1",
    "rate_user2",
    "residual_interference",
    "learning_cycles",
];

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.t1.to_string(),
            self.r1.to_string(),
            self.t2.to_string(),
            self.r2.to_string(),
            self.beacon.clone(),
            self.cycle_length.to_string(),
            num(self.interference_gain_db),
            self.seed.to_string(),
            self.scheme.to_string(),
            num(self.snr_db),
            self.trial.to_string(),
            self.trial_seed.to_string(),
            num(self.rate_user1),
            num(self.rate_user2),
            num(self.residual_interference),
            self.learning_cycles.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub t1: usize,
    pub r1: usize,
    pub t2: usize,
    pub r2: usize,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: usize,
    pub mean_rate_user1: f64,
    pub mean_rate_user2: f64,
    /// Mean over trials of the per-user average of `rate / single-user rate`.
    pub mean_rate_ratio: f64,
}

const AGGREGATE_HEADER: [&str; 10] = [
    "t1",
    "r1",
    "t2",
    "r2",
    "scheme",
    "snr_db",
    "trials",
    "mean_rate_user1",
    "mean_rate_user2",
    "mean_rate_ratio",
];

impl AggregateRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.t1.to_string(),
            self.r1.to_string(),
            self.t2.to_string(),
            self.r2.to_string(),
            self.scheme.to_string(),
            num(self.snr_db),
            self.trials.to_string(),
            num(self.mean_rate_user1),
            num(self.mean_rate_user2),
            num(self.mean_rate_ratio),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub aggregate: Vec<AggregateRow>,
    pub files: Vec<OutputFile>,
}

impl SweepOutput {
    /// Aggregate row for a scheme at an antenna count and SNR, if present.
    pub fn ratio(&self, scheme: Scheme, t1: usize, snr_db: f64) -> Option<f64> {
        self.aggregate
            .iter()
            .find(|a| a.scheme == scheme && a.t1 == t1 && a.snr_db == snr_db)
            .map(|a| a.mean_rate_ratio)
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: &SweepCell,
    schemes: &[Scheme],
) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rng = Rng::with_stream(cfg.seed, cell.stream);
    let np = noise_power_for_snr(cell.snr_db, cfg.tx_power);
    let gain = db_to_linear(cfg.interference_gain_db);
    let cs = sample_channel_set(cell.antennas, np, np, gain, &mut rng)?;
    let params = HandshakeParams {
        mode: cfg.beacon_mode(),
        cycle_length: cfg.cycle_length,
        alpha: cfg.alpha,
        learner: learner(cfg),
    };
    let outcome = scs_learn(&cs, &params, &mut rng)?;
    let reports = evaluate_schemes(
        &cs,
        &outcome,
        &EvaluationParams {
            tx_power: cfg.tx_power,
            snr_db: cell.snr_db,
            partial_extra: cfg.partial_extra,
            fdd_power_boost: cfg.fdd_power_boost,
            schemes: schemes.to_vec(),
            trial_seed: cell.stream,
        },
    )?;
    let ant = cell.antennas;
    Ok(reports
        .into_iter()
        .map(|r| ResultRow {
            t1: ant.t1,
            r1: ant.r1,
            t2: ant.t2,
            r2: ant.r2,
            beacon: cfg.beacon.clone(),
            cycle_length: cfg.cycle_length,
            interference_gain_db: cfg.interference_gain_db,
            seed: cfg.seed,
            scheme: r.scheme,
            snr_db: r.snr_db,
            trial: cell.trial,
            trial_seed: r.trial_seed,
            rate_user1: r.rate_user1,
            rate_user2: r.rate_user2,
            residual_interference: r.residual_interference,
            learning_cycles: outcome.learning_cycles,
        })
        .collect())
}

/// Scheme-comparison sweep over trials, SNRs and optionally antenna counts.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput, HarnessError> {
    cfg.validate()?;
    let mut schemes = cfg.parsed_schemes()?;
    schemes.push(Scheme::SingleUserFullChannel);
    let cells = sweep_cells(cfg);
    let per_cell: Vec<Vec<ResultRow>> = pool(cfg.workers)?.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(cfg, cell, &schemes))
            .collect::<Result<_, _>>()
    })?;

    let mut keyed: Vec<(RowKey, ResultRow)> = Vec::new();
    for (cell, rows) in cells.iter().zip(per_cell) {
        for row in rows {
            keyed.push(((cell.t_index, cell.trial, row.scheme, cell.snr_index), row));
        }
    }
    keyed.sort_by_key(|(k, _)| *k);

    let aggregate = aggregate(&keyed);
    let rows: Vec<ResultRow> = keyed.into_iter().map(|(_, r)| r).collect();

    let header = file_header("sweep", cfg);
    let raw = csv_text(&header, &RESULT_HEADER, rows.iter().map(ResultRow::record))?;
    let agg = csv_text(
        &header,
        &AGGREGATE_HEADER,
        aggregate.iter().map(AggregateRow::record),
    )?;
    Ok(SweepOutput {
        files: vec![
            OutputFile {
                path: cfg.output(),
                contents: raw,
            },
            OutputFile {
                path: cfg.aggregate_path(),
                contents: agg,
            },
        ],
        rows,
        aggregate,
    })
}

type RowKey = (usize, usize, Scheme, usize);

fn aggregate(rows: &[(RowKey, ResultRow)]) -> Vec<AggregateRow> {
    let reference: BTreeMap<(usize, usize, usize), &ResultRow> = rows
        .iter()
        .filter(|(k, _)| k.2 == Scheme::SingleUserFullChannel)
        .map(|(k, r)| ((k.0, k.1, k.3), r))
        .collect();

    struct Acc<'a> {
        first: &'a ResultRow,
        n: usize,
        r1: f64,
        r2: f64,
        ratio_sum: f64,
        ratio_n: usize,
    }
    let mut groups: BTreeMap<(usize, Scheme, usize), Acc> = BTreeMap::new();
    for ((t, trial, scheme, snr), row) in rows {
        let acc = groups.entry((*t, *scheme, *snr)).or_insert(Acc {
            first: row,
            n: 0,
            r1: 0.0,
            r2: 0.0,
            ratio_sum: 0.0,
            ratio_n: 0,
        });
        acc.n += 1;
        acc.r1 += row.rate_user1;
        acc.r2 += row.rate_user2;
        if let Some(su) = reference.get(&(*t, *trial, *snr)) {
            let ratios: Vec<f64> = [
                (row.rate_user1, su.rate_user1),
                (row.rate_user2, su.rate_user2),
            ]
            .into_iter()
            .filter(|&(_, d)| d > 0.0)
            .map(|(r, d)| r / d)
            .collect();
            if !ratios.is_empty() {
                acc.ratio_sum += ratios.iter().sum::<f64>() / ratios.len() as f64;
                acc.ratio_n += 1;
            }
        }
    }
    groups
        .into_values()
        .map(|a| AggregateRow {
            t1: a.first.t1,
            r1: a.first.r1,
            t2: a.first.t2,
            r2: a.first.r2,
            scheme: a.first.scheme,
            snr_db: a.first.snr_db,
            trials: a.n,
            mean_rate_user1: a.r1 / a.n as f64,
            mean_rate_user2: a.r2 / a.n as f64,
            mean_rate_ratio: if a.ratio_n > 0 {
                a.ratio_sum / a.ratio_n as f64
            } else {
                f64::NAN
            },
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ValidateOutput {
    pub dof: DofReport,
    /// `None` when `t1 <= r2` leaves no effective channel to test.
    pub zmsw: Option<ZmswReport>,
    pub passed: bool,
    /// Human-readable pass/fail table.
    pub table: String,
    pub files: Vec<OutputFile>,
}

const ARM_DOF: u64 = 0;
const ARM_DOF_NEGATIVE: u64 = 1;
const ARM_ZMSW: u64 = 2;

fn arm_stream(arm: u64, trial: usize) -> u64 {
    (arm << 40) | trial as u64
}

fn dof_arm(cfg: &ExperimentConfig, ant: AntennaConfig, arm: u64) -> Result<DofArm, HarnessError> {
    let events: Vec<bool> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| sharing::dof_trial(ant, &mut Rng::with_stream(cfg.seed, arm_stream(arm, i))))
        .collect::<Result<_, _>>()?;
    Ok(DofArm {
        config: ant,
        claim_holds: dof_claim_holds(&ant),
        trials: cfg.trials,
        rank_loss_events: events.into_iter().filter(|&e| e).count(),
    })
}

/// Rank-preservation arms plus effective-channel statistics.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<ValidateOutput, HarnessError> {
    cfg.validate()?;
    let ant = cfg.antennas();
    let (dof, zmsw) = pool(cfg.workers)?.install(|| -> Result<_, HarnessError> {
        let dof = DofReport {
            positive: dof_arm(cfg, ant, ARM_DOF)?,
            negative: dof_arm(cfg, dof_negative_config(ant), ARM_DOF_NEGATIVE)?,
        };
        let zmsw = if ant.t1 > ant.r2 && cfg.zmsw_trials > 0 {
            let samples: Vec<ComplexMatrix> = (0..cfg.zmsw_trials)
                .into_par_iter()
                .map(|i| {
                    sharing::zmsw_trial(
                        ant,
                        &mut Rng::with_stream(cfg.seed, arm_stream(ARM_ZMSW, i)),
                    )
                })
                .collect::<Result<_, _>>()?;
            Some(sharing::summarize_effective_channels(&samples)?)
        } else {
            None
        };
        Ok((dof, zmsw))
    })?;

    let th = ZmswThresholds::default();
    let pos_ok = dof.positive.claim_holds && dof.positive.rank_loss_events == 0;
    let neg_ok = dof.negative.loss_fraction() >= NEGATIVE_ARM_MIN_LOSS;
    let zmsw_ok = zmsw.as_ref().is_some_and(|z| z.passes(&th));

    let mut arms: Vec<[String; 4]> = Vec::new();
    arms.push([
        "dof_preservation".into(),
        format!(
            "t1={} t2={} r1={} r2={}: 0 rank losses",
            ant.t1, ant.t2, ant.r1, ant.r2
        ),
        if dof.positive.claim_holds {
            format!(
                "{}/{} rank losses",
                dof.positive.rank_loss_events, dof.positive.trials
            )
        } else {
            "antenna counts do not satisfy t_i >= r_i + r_j".into()
        },
        pass(pos_ok),
    ]);
    arms.push([
        "dof_negative_control".into(),
        format!(
            "t1={}: rank loss in >= {:.0}% of trials",
            dof.negative.config.t1,
            NEGATIVE_ARM_MIN_LOSS * 100.0
        ),
        format!(
            "{}/{} rank losses (expected failure of the claim)",
            dof.negative.rank_loss_events, dof.negative.trials
        ),
        pass(neg_ok),
    ]);
    arms.push(match &zmsw {
        Some(z) => [
            "zmsw_effective_channel".into(),
            format!(
                "|mean| <= {}, var in [{}, {}], |corr| <= {}, KS p > {}",
                th.max_abs_mean,
                th.variance_range.0,
                th.variance_range.1,
                th.max_abs_correlation,
                th.ks_significance
            ),
            format!(
                "max |mean| {:.4}, var [{:.4}, {:.4}], max |corr| {:.4}, KS p {:.4}",
                z.abs_means.iter().copied().fold(0.0, f64::max),
                z.variances.iter().copied().fold(f64::INFINITY, f64::min),
                z.variances.iter().copied().fold(0.0, f64::max),
                z.max_abs_correlation,
                z.ks.p_value
            ),
            pass(zmsw_ok),
        ],
        None => [
            "zmsw_effective_channel".into(),
            "t1 > r2 and zmsw_trials > 0".into(),
            "not run".into(),
            pass(false),
        ],
    });
    let passed = pos_ok && neg_ok && zmsw_ok;

    let mut table = String::new();
    for [arm, expected, observed, status] in &arms {
        let _ = writeln!(
            table,
            "{status:<4}  {arm:<24}  {observed}  (expected: {expected})"
        );
    }
    let _ = writeln!(
        table,
        "{}",
        if passed {
            "PASS overall"
        } else {
            "FAIL overall"
        }
    );

    let text = csv_text(
        &file_header("validate", cfg),
        &["arm", "expected", "observed", "status"],
        arms.iter().map(|a| a.to_vec()),
    )?;
    Ok(ValidateOutput {
        dof,
        zmsw,
        passed,
        table,
        files: vec![OutputFile {
            path: cfg.output(),
            contents: text,
        }],
    })
}

fn pass(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            trials: 3,
            snr_db_grid: vec![0.0, 20.0],
            workers: 2,
            ..Default::default()
        }
    }

    #[test]
    fn cells_cover_grid_with_distinct_streams() {
        let cfg = ExperimentConfig {
            t_grid: vec![2, 4],
            ..small()
        };
        let cells = sweep_cells(&cfg);
        assert_eq!(cells.len(), 2 * 3 * 2);
        let mut streams: Vec<u64> = cells.iter().map(|c| c.stream).collect();
        streams.sort_unstable();
        streams.dedup();
        assert_eq!(streams.len(), cells.len());
        assert_eq!(cells[0].antennas.t1, 2);
        assert_eq!(cells.last().unwrap().antennas.t2, 4);
    }

    #[test]
    fn sweep_rows_are_complete_and_sorted() {
        let out = run_sweep(&small()).unwrap();
        // 4 requested schemes plus the single-user reference
        assert_eq!(out.rows.len(), 3 * 2 * 5);
        assert_eq!(out.rows[0].scheme, Scheme::Scs);
        assert_eq!(out.rows[0].trial, 0);
        assert_eq!(out.rows[1].snr_db, 20.0);
        assert_eq!(out.aggregate.len(), 5 * 2);
        let su = out.ratio(Scheme::SingleUserFullChannel, 4, 0.0).unwrap();
        assert!((su - 1.0).abs() < 1e-15);
        let fdd = out.ratio(Scheme::Fdd, 4, 20.0).unwrap();
        assert!((fdd - 0.5).abs() < 1e-12);
        assert!(out.files[0].contents.starts_with("# ebcl-harness"));
        assert!(out.rows.iter().all(|r| r.learning_cycles == 34));
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let a = run_sweep(&ExperimentConfig {
            workers: 1,
            ..small()
        })
        .unwrap();
        let b = run_sweep(&ExperimentConfig {
            workers: 3,
            ..small()
        })
        .unwrap();
        assert_eq!(a.files[0].contents, b.files[0].contents);
        assert_eq!(a.files[1].contents, b.files[1].contents);
    }

    #[test]
    fn learn_default_is_exact() {
        let (s, files) = run_learn(&ExperimentConfig::default()).unwrap();
        assert!(s.relative_error <= 1e-10);
        assert_eq!(s.null_dim, 2);
        assert_eq!(s.expected_null_dim, 2);
        assert_eq!(s.measurement_count, 17);
        assert!(s.interference_leak <= 1e-6);
        let text = &files[0].contents;
        assert_eq!(
            text.lines()
                .filter(|l| l.starts_with("null_basis,"))
                .count(),
            4 * 2
        );
    }

    #[test]
    fn learn_projected_on_wide_primary_receiver() {
        let cfg = ExperimentConfig {
            t1: 1,
            r1: 2,
            t2: 3,
            beacon: "projected".into(),
            ..Default::default()
        };
        let (s, _) = run_learn(&cfg).unwrap();
        assert!(s.relative_error <= 1e-10);
        assert_eq!(s.null_dim, 2);
    }

    #[test]
    fn validate_small_passes_except_statistics() {
        let cfg = ExperimentConfig {
            trials: 40,
            zmsw_trials: 0,
            ..Default::default()
        };
        let out = run_validate(&cfg).unwrap();
        assert_eq!(out.dof.positive.rank_loss_events, 0);
        assert_eq!(out.dof.negative.rank_loss_events, 40);
        assert!(out.zmsw.is_none());
        assert!(!out.passed);
        assert!(out.table.contains("FAIL  zmsw_effective_channel"));
    }
}
