//! Two-user equal-priority spatial channel sharing.
//!
//! Each user learns the Gram matrix of the channel from its transmitter to
//! the other user's receiver, using that receiver's beacon, and then transmits
//! in the learned null space. User 2 learns first; user 1 follows with the
//! roles swapped. Rates treat the other user's signal as Gaussian noise and
//! use uniform power allocation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::beacon::{BeaconEmitter, BeaconMode};
use crate::channel::{sample_channel_set, AntennaConfig, ChannelSet, Rng};
use crate::cmatrix::{self, ComplexMatrix};
use crate::ebcl::{self, LearnedGram, LearnerSettings, Precoder};
use crate::stats::{self, KsResult};
use crate::{Error, Result};

/// Relative rank tolerance for the degrees-of-freedom checks.
pub const RANK_REL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandshakeParams {
    pub mode: BeaconMode,
    pub cycle_length: usize,
    pub alpha: f64,
    pub learner: LearnerSettings,
}

impl Default for HandshakeParams {
    fn default() -> Self {
        Self {
            mode: BeaconMode::Ideal,
            cycle_length: 1,
            alpha: 1.0,
            learner: LearnerSettings::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SharingOutcome {
    /// User 1's estimate of `alpha * H21* H21`.
    pub learned_1: LearnedGram,
    /// User 2's estimate of `alpha * H12* H12`.
    pub learned_2: LearnedGram,
    pub precoder_1: Precoder,
    pub precoder_2: Precoder,
    /// `H11 T1`.
    pub effective_channel_1: ComplexMatrix,
    /// `H22 T2`.
    pub effective_channel_2: ComplexMatrix,
    /// Interference reaching receiver 1, `||H12 T2||_F`.
    pub residual_interference_1: f64,
    /// Interference reaching receiver 2, `||H21 T1||_F`.
    pub residual_interference_2: f64,
    /// Beacon cycles spent by both sessions.
    pub learning_cycles: usize,
}

/// Runs both learning sessions and keeps whatever null spaces come out,
/// including empty ones.
pub fn scs_learn(
    cs: &ChannelSet,
    params: &HandshakeParams,
    rng: &mut Rng,
) -> Result<SharingOutcome> {
    let (learned_2, cycles_2) = learn_cross_gram(cs, params, rng.split())?;
    let swapped = cs.swapped();
    let (learned_1, cycles_1) = learn_cross_gram(&swapped, params, rng.split())?;
    let precoder_1 = ebcl::null_space(&learned_1);
    let precoder_2 = ebcl::null_space(&learned_2);
    Ok(SharingOutcome {
        effective_channel_1: cs.h11().matmul(&precoder_1.t)?,
        effective_channel_2: cs.h22().matmul(&precoder_2.t)?,
        residual_interference_1: cs.h12().matmul(&precoder_2.t)?.frobenius_norm(),
        residual_interference_2: cs.h21().matmul(&precoder_1.t)?.frobenius_norm(),
        learned_1,
        learned_2,
        precoder_1,
        precoder_2,
        learning_cycles: cycles_1 + cycles_2,
    })
}

/// Like [`scs_learn`], but an empty null space for either user is an error.
pub fn scs_handshake(
    cs: &ChannelSet,
    params: &HandshakeParams,
    rng: &mut Rng,
) -> Result<SharingOutcome> {
    let out = scs_learn(cs, params, rng)?;
    if out.precoder_1.is_empty() {
        return Err(Error::EmptyNullSpace { user: 1 });
    }
    if out.precoder_2.is_empty() {
        return Err(Error::EmptyNullSpace { user: 2 });
    }
    Ok(out)
}

/// User 2 learning `H12* H12` from receiver 1's beacon.
fn learn_cross_gram(
    cs: &ChannelSet,
    params: &HandshakeParams,
    rng: Rng,
) -> Result<(LearnedGram, usize)> {
    let mut em = BeaconEmitter::new(cs, params.mode, params.alpha, rng)?
        .with_cycle_length(params.cycle_length)?;
    let lg = ebcl::run_learning_session(&mut em, &params.learner)?;
    Ok((lg, em.interactions()))
}

/// `log2 det(I + (P / n_tx) N^{-1} H H*)` with `n_tx = h.cols()`.
pub fn mimo_rate_uniform(
    h: &ComplexMatrix,
    tx_power: f64,
    noise_cov: &ComplexMatrix,
) -> Result<f64> {
    if noise_cov.shape() != (h.rows(), h.rows()) {
        return Err(Error::DimensionMismatch {
            op: "mimo_rate_uniform",
            lhs: h.shape(),
            rhs: noise_cov.shape(),
        });
    }
    let l = cmatrix::cholesky(noise_cov)?;
    let n_tx = h.cols();
    if n_tx == 0 || h.rows() == 0 || tx_power == 0.0 {
        return Ok(0.0);
    }
    // whitened channel L^{-1} H
    let b = cmatrix::solve_lower(&l, h)?;
    let m = ComplexMatrix::identity(h.rows())
        .add(&b.matmul(&b.conj_transpose())?.scale(tx_power / n_tx as f64))?;
    let ln_det = cmatrix::log_det_hpd(&m)?;
    Ok((ln_det / core::f64::consts::LN_2).max(0.0))
}

/// `(P / d) A T T* A*`: covariance of a uniformly precoded interferer.
fn interference_cov(
    cross: &ComplexMatrix,
    t: &ComplexMatrix,
    tx_power: f64,
) -> Result<ComplexMatrix> {
    let r = cross.rows();
    if t.cols() == 0 {
        return Ok(ComplexMatrix::zeros(r, r));
    }
    let a = cross.matmul(t)?;
    Ok(a.matmul(&a.conj_transpose())?
        .scale(tx_power / t.cols() as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Scs,
    Fdd,
    NoMitigation,
    PartialScs,
    SingleUserFullChannel,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Scs,
        Scheme::Fdd,
        Scheme::NoMitigation,
        Scheme::PartialScs,
        Scheme::SingleUserFullChannel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Scs => "SCS",
            Scheme::Fdd => "FDD",
            Scheme::NoMitigation => "NoMitigation",
            Scheme::PartialScs => "PartialSCS",
            Scheme::SingleUserFullChannel => "SingleUserFullChannel",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter("unknown scheme"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub scheme: Scheme,
    /// Bits per channel use.
    pub rate_user1: f64,
    pub rate_user2: f64,
    pub snr_db: f64,
    pub trial_seed: u64,
    /// Larger of the two cross-link Frobenius norms `||H_ij T_j||_F`.
    pub residual_interference: f64,
}

impl RateReport {
    pub fn rate(&self, user: usize) -> f64 {
        if user == 1 {
            self.rate_user1
        } else {
            self.rate_user2
        }
    }

    pub fn sum_rate(&self) -> f64 {
        self.rate_user1 + self.rate_user2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationParams {
    /// Total transmit power of each user.
    pub tx_power: f64,
    /// Recorded in the reports; the noise powers come from the channel set.
    pub snr_db: f64,
    /// Extra eigen-directions per user for partial sharing, clamped to what is available.
    pub partial_extra: usize,
    /// FDD users put twice the power into their half band.
    pub fdd_power_boost: bool,
    pub schemes: Vec<Scheme>,
    pub trial_seed: u64,
}

impl Default for EvaluationParams {
    fn default() -> Self {
        Self {
            tx_power: 1.0,
            snr_db: 0.0,
            partial_extra: 1,
            fdd_power_boost: false,
            schemes: Scheme::ALL.to_vec(),
            trial_seed: 0,
        }
    }
}

/// Achievable per-user rates of every requested scheme on one channel draw.
/// Deterministic in its inputs.
pub fn evaluate_schemes(
    cs: &ChannelSet,
    outcome: &SharingOutcome,
    params: &EvaluationParams,
) -> Result<Vec<RateReport>> {
    let p = params.tx_power;
    let noise = |user: usize| {
        let r = cs.direct(user).rows();
        ComplexMatrix::identity(r).scale(cs.noise_power(user))
    };
    // precoders per user for a scheme; None means "stays silent"
    let rates_with = |t1: &ComplexMatrix, t2: &ComplexMatrix| -> Result<(f64, f64, f64)> {
        let mut rates = [0.0; 2];
        let mut leak: f64 = 0.0;
        for (k, user) in [1usize, 2].into_iter().enumerate() {
            let (own, other) = if user == 1 { (t1, t2) } else { (t2, t1) };
            let h_eff = cs.direct(user).matmul(own)?;
            let cross = cs.cross_into(user);
            let cov = noise(user).add(&interference_cov(cross, other, p)?)?;
            rates[k] = mimo_rate_uniform(&h_eff, p, &cov)?;
            if other.cols() > 0 {
                leak = leak.max(cross.matmul(other)?.frobenius_norm());
            }
        }
        Ok((rates[0], rates[1], leak))
    };

    let mut reports = Vec::with_capacity(params.schemes.len());
    for &scheme in &params.schemes {
        let (r1, r2, leak) = match scheme {
            Scheme::SingleUserFullChannel => (
                mimo_rate_uniform(cs.h11(), p, &noise(1))?,
                mimo_rate_uniform(cs.h22(), p, &noise(2))?,
                0.0,
            ),
            Scheme::Fdd => {
                let band_power = if params.fdd_power_boost { 2.0 * p } else { p };
                (
                    0.5 * mimo_rate_uniform(cs.h11(), band_power, &noise(1))?,
                    0.5 * mimo_rate_uniform(cs.h22(), band_power, &noise(2))?,
                    0.0,
                )
            }
            Scheme::NoMitigation => {
                let cfg = cs.antennas();
                rates_with(
                    &ComplexMatrix::identity(cfg.t1),
                    &ComplexMatrix::identity(cfg.t2),
                )?
            }
            Scheme::Scs => rates_with(&outcome.precoder_1.t, &outcome.precoder_2.t)?,
            Scheme::PartialScs => {
                let pre = |lg: &LearnedGram| {
                    let available = lg.dim() - lg.null_dim();
                    ebcl::partial_precoder(lg, params.partial_extra.min(available))
                };
                let t1 = pre(&outcome.learned_1)?;
                let t2 = pre(&outcome.learned_2)?;
                rates_with(&t1.t, &t2.t)?
            }
        };
        reports.push(RateReport {
            scheme,
            rate_user1: r1,
            rate_user2: r2,
            snr_db: params.snr_db,
            trial_seed: params.trial_seed,
            residual_interference: leak,
        });
    }
    Ok(reports)
}

/// One arm of the degrees-of-freedom check.
#[derive(Clone, Debug, PartialEq)]
pub struct DofArm {
    pub config: AntennaConfig,
    /// `t_i >= r_i + r_j` for both users.
    pub claim_holds: bool,
    pub trials: usize,
    /// Trials where `rank(H_ii T_i) < rank(H_ii)` for some user.
    pub rank_loss_events: usize,
}

impl DofArm {
    pub fn loss_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.rank_loss_events as f64 / self.trials as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofReport {
    pub positive: DofArm,
    /// Same receivers, `t1 = r1 + r2 - 1`.
    pub negative: DofArm,
}

impl DofReport {
    /// No loss in the positive arm, loss in at least `min_negative_loss` of the negative arm.
    pub fn passes(&self, min_negative_loss: f64) -> bool {
        self.positive.rank_loss_events == 0 && self.negative.loss_fraction() >= min_negative_loss
    }
}

/// Contrast configuration for the rank check: user 1 gets one antenna too few.
pub fn dof_negative_config(cfg: AntennaConfig) -> AntennaConfig {
    AntennaConfig {
        t1: cfg.r1 + cfg.r2 - 1,
        ..cfg
    }
}

/// `t_i >= r_i + r_j` for both users.
pub fn dof_claim_holds(cfg: &AntennaConfig) -> bool {
    cfg.t1 >= cfg.r1 + cfg.r2 && cfg.t2 >= cfg.r1 + cfg.r2
}

/// One ZMSW draw through the ideal-beacon handshake; true when some user
/// loses rank after precoding.
pub fn dof_trial(cfg: AntennaConfig, rng: &mut Rng) -> Result<bool> {
    let cs = sample_channel_set(cfg, 1.0, 1.0, 1.0, rng)?;
    let out = scs_learn(&cs, &HandshakeParams::default(), rng)?;
    let lost = |h: &ComplexMatrix, eff: &ComplexMatrix| {
        cmatrix::numeric_rank(eff, RANK_REL_TOL) < cmatrix::numeric_rank(h, RANK_REL_TOL)
    };
    Ok(lost(cs.h11(), &out.effective_channel_1) || lost(cs.h22(), &out.effective_channel_2))
}

fn dof_arm(cfg: AntennaConfig, trials: usize, rng: &mut Rng) -> Result<DofArm> {
    let mut events = 0;
    for _ in 0..trials {
        if dof_trial(cfg, &mut rng.split())? {
            events += 1;
        }
    }
    Ok(DofArm {
        config: cfg,
        claim_holds: dof_claim_holds(&cfg),
        trials,
        rank_loss_events: events,
    })
}

/// Rank preservation of `H_ii T_i` over `trials` draws, plus the contrast arm.
pub fn validate_dof_preservation(
    cfg: AntennaConfig,
    trials: usize,
    rng: &mut Rng,
) -> Result<DofReport> {
    Ok(DofReport {
        positive: dof_arm(cfg, trials, rng)?,
        negative: dof_arm(dof_negative_config(cfg), trials, rng)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZmswThresholds {
    pub max_abs_mean: f64,
    pub variance_range: (f64, f64),
    pub max_abs_correlation: f64,
    pub ks_significance: f64,
}

impl Default for ZmswThresholds {
    fn default() -> Self {
        Self {
            max_abs_mean: 0.03,
            variance_range: (0.96, 1.04),
            max_abs_correlation: 0.03,
            ks_significance: 0.001,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZmswReport {
    pub trials: usize,
    /// Shape of `H11 T1`.
    pub shape: (usize, usize),
    /// `|sample mean|` per entry, row-major.
    pub abs_means: Vec<f64>,
    /// Sample variance `E|x - mean|^2` per entry.
    pub variances: Vec<f64>,
    /// Largest `|corr|` over all entry pairs.
    pub max_abs_correlation: f64,
    /// KS test of `Re` of the first entry against `N(0, 1/2)`.
    pub ks: KsResult,
}

impl ZmswReport {
    pub fn passes(&self, th: &ZmswThresholds) -> bool {
        !self.abs_means.is_empty()
            && self.abs_means.iter().all(|&m| m <= th.max_abs_mean)
            && self
                .variances
                .iter()
                .all(|&v| v >= th.variance_range.0 && v <= th.variance_range.1)
            && self.max_abs_correlation <= th.max_abs_correlation
            && self.ks.passes(th.ks_significance)
    }
}

/// User 1's effective channel `H11 T1` for one ZMSW draw, with `T1` learned
/// through ideal beacons.
pub fn zmsw_trial(cfg: AntennaConfig, rng: &mut Rng) -> Result<ComplexMatrix> {
    let cs = sample_channel_set(cfg, 1.0, 1.0, 1.0, rng)?;
    let (lg, _) = learn_cross_gram(&cs.swapped(), &HandshakeParams::default(), rng.split())?;
    cs.h11().matmul(&ebcl::null_space(&lg).t)
}

/// Sample statistics of the effective channel entries over `trials` draws.
pub fn validate_zmsw_effective_channel(
    cfg: AntennaConfig,
    trials: usize,
    rng: &mut Rng,
) -> Result<ZmswReport> {
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        samples.push(zmsw_trial(cfg, &mut rng.split())?);
    }
    summarize_effective_channels(&samples)
}

/// Statistics over a batch of equally shaped effective channels.
pub fn summarize_effective_channels(samples: &[ComplexMatrix]) -> Result<ZmswReport> {
    let shape = samples.first().map(|m| m.shape()).unwrap_or((0, 0));
    if let Some(bad) = samples.iter().find(|m| m.shape() != shape) {
        return Err(Error::DimensionMismatch {
            op: "effective channel batch",
            lhs: shape,
            rhs: bad.shape(),
        });
    }
    let k = shape.0 * shape.1;
    let n = samples.len() as f64;
    let mut means = vec![num_complex::Complex64::new(0.0, 0.0); k];
    for m in samples {
        for (acc, x) in means.iter_mut().zip(m.as_slice()) {
            *acc += x;
        }
    }
    for acc in means.iter_mut() {
        *acc /= n;
    }
    let mut cov = vec![num_complex::Complex64::new(0.0, 0.0); k * k];
    for m in samples {
        let d: Vec<_> = m
            .as_slice()
            .iter()
            .zip(&means)
            .map(|(x, mu)| x - mu)
            .collect();
        for a in 0..k {
            for b in a..k {
                cov[a * k + b] += d[a] * d[b].conj();
            }
        }
    }
    let denom = (n - 1.0).max(1.0);
    let variances: Vec<f64> = (0..k).map(|a| cov[a * k + a].re / denom).collect();
    let mut max_corr: f64 = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            let c = cov[a * k + b].norm() / denom / libm::sqrt(variances[a] * variances[b]);
            max_corr = max_corr.max(c);
        }
    }
    let re: Vec<f64> = samples
        .iter()
        .filter_map(|m| m.as_slice().first().map(|z| z.re))
        .collect();
    Ok(ZmswReport {
        trials: samples.len(),
        shape,
        abs_means: means.iter().map(|m| m.norm()).collect(),
        variances,
        max_abs_correlation: max_corr,
        ks: stats::ks_test(&re, |x| stats::normal_cdf(x, 0.5)),
    })
}
