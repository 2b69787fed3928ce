//! Primary-side beacon.
//!
//! Each transmission cycle the primary receiver broadcasts one scalar `q(n)`:
//! its residual energy after removing its own decoded signal, seen through an
//! unknown positive control-channel gain `alpha`. The emitter is stateless
//! between calls apart from its random stream and trace; the learner probes
//! with `x = 0` first and subtracts that baseline.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::{ChannelSet, Rng};
use crate::cmatrix::{self, ComplexMatrix};
use crate::{Error, Result};

/// Rank tolerance used when the emitter derives `P_{H11}` itself.
pub const PROJECTOR_RANK_TOL: f64 = 1e-10;

/// Largest cycle length simulated symbol by symbol under [`SamplingPath::Auto`].
pub const PER_SYMBOL_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BeaconMode {
    /// Expectation form: `alpha (||H12 x||^2 + tr C)`.
    Ideal,
    /// Average of `||y1 - H11 x1||^2` over the `N` symbols of a cycle.
    SampleAverage,
    /// Ideal beacon on the residual projected onto the column space of `H11`.
    ProjectedIdeal,
    /// Sample-averaged beacon on the projected residual.
    ProjectedSampleAverage,
}

impl BeaconMode {
    pub fn name(self) -> &'static str {
        match self {
            BeaconMode::Ideal => "ideal",
            BeaconMode::SampleAverage => "sampled",
            BeaconMode::ProjectedIdeal => "projected",
            BeaconMode::ProjectedSampleAverage => "projected_sampled",
        }
    }

    pub fn is_projected(self) -> bool {
        matches!(
            self,
            BeaconMode::ProjectedIdeal | BeaconMode::ProjectedSampleAverage
        )
    }

    pub fn is_sampled(self) -> bool {
        matches!(
            self,
            BeaconMode::SampleAverage | BeaconMode::ProjectedSampleAverage
        )
    }
}

/// How a sample-averaged beacon is simulated.
///
/// Both paths produce the same distribution for `q(n)`.
/// `SufficientStatistic` splits `sum_k ||z_k||^2` per noise eigen-direction
/// into `N |s_i + m_i|^2` (with `m_i` the cycle's sample-mean noise) plus an
/// independent Gamma-distributed scatter term, so its cost does not grow with `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SamplingPath {
    PerSymbol,
    SufficientStatistic,
    #[default]
    Auto,
}

/// Noise structure of the beacon values, as the learner sees it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeaconNoise {
    Exact,
    SampleAverage { cycle_length: usize },
}

/// Anything that answers a constant probe signal with one beacon value.
pub trait Beacon {
    /// Dimension of the probe vectors (the learner's transmit antennas).
    fn tx_dim(&self) -> usize;

    /// One transmission cycle with constant signal `x2`.
    fn emit(&mut self, x2: &[Complex64]) -> Result<f64>;

    fn noise(&self) -> BeaconNoise;
}

/// Beacon values emitted so far.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BeaconTrace {
    values: Vec<f64>,
}

impl BeaconTrace {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the latest cycle, `None` before the first emission.
    pub fn cycle_index(&self) -> Option<usize> {
        self.values.len().checked_sub(1)
    }

    fn push(&mut self, v: f64) {
        self.values.push(v);
    }
}

pub struct BeaconEmitter<'a> {
    mode: BeaconMode,
    alpha: f64,
    cycle_length: usize,
    channels: &'a ChannelSet,
    projector: Option<ComplexMatrix>,
    noise_cov: ComplexMatrix,
    pu_power: f64,
    sampling: SamplingPath,
    rng: Rng,
    trace: BeaconTrace,
}

impl<'a> BeaconEmitter<'a> {
    /// Emitter at user 1's receiver of `channels`. Projected modes derive
    /// `P_{H11}` from `h11`; noise is white with `noise_power_1` per antenna.
    pub fn new(channels: &'a ChannelSet, mode: BeaconMode, alpha: f64, rng: Rng) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(
                "beacon gain alpha must be positive and finite",
            ));
        }
        let r1 = channels.h11().rows();
        let projector = mode
            .is_projected()
            .then(|| cmatrix::column_space_projector(channels.h11(), PROJECTOR_RANK_TOL));
        Ok(Self {
            mode,
            alpha,
            cycle_length: 1,
            channels,
            projector,
            noise_cov: ComplexMatrix::identity(r1).scale(channels.noise_power_1()),
            pu_power: 1.0,
            sampling: SamplingPath::Auto,
            rng,
            trace: BeaconTrace::default(),
        })
    }

    pub fn with_cycle_length(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("cycle length must be at least 1"));
        }
        self.cycle_length = n;
        Ok(self)
    }

    /// Replaces the white noise covariance with a stationary colored one.
    pub fn with_noise_covariance(mut self, cov: ComplexMatrix) -> Result<Self> {
        let r1 = self.channels.h11().rows();
        if cov.shape() != (r1, r1) {
            return Err(Error::DimensionMismatch {
                op: "noise covariance",
                lhs: (r1, r1),
                rhs: cov.shape(),
            });
        }
        let eig = cmatrix::hermitian_eig(&cov)?;
        let floor = 1e-12 * cov.frobenius_norm();
        if eig.values.iter().any(|&v| v < -floor) {
            return Err(Error::NotPositiveDefinite);
        }
        self.noise_cov = cov;
        Ok(self)
    }

    /// Overrides the projector; must satisfy `P = P*` and `P^2 = P`.
    pub fn with_projector(mut self, p: ComplexMatrix) -> Result<Self> {
        let r1 = self.channels.h11().rows();
        if p.shape() != (r1, r1) {
            return Err(Error::DimensionMismatch {
                op: "projector",
                lhs: (r1, r1),
                rhs: p.shape(),
            });
        }
        let herm = p.hermitian_deviation();
        let idem = p.matmul(&p)?.sub(&p)?.frobenius_norm();
        let deviation = herm.max(idem);
        if deviation > 1e-9 {
            return Err(Error::NotProjector { deviation });
        }
        self.projector = Some(p);
        Ok(self)
    }

    /// Total transmit power of the primary's own symbols.
    pub fn with_pu_power(mut self, power: f64) -> Result<Self> {
        if !(power >= 0.0) {
            return Err(Error::InvalidParameter("primary power must be >= 0"));
        }
        self.pu_power = power;
        Ok(self)
    }

    pub fn with_sampling_path(mut self, path: SamplingPath) -> Self {
        self.sampling = path;
        self
    }

    pub fn mode(&self) -> BeaconMode {
        self.mode
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cycle_length(&self) -> usize {
        self.cycle_length
    }

    pub fn projector(&self) -> Option<&ComplexMatrix> {
        self.projector.as_ref()
    }

    pub fn trace(&self) -> &BeaconTrace {
        &self.trace
    }

    /// Number of beacon values emitted so far.
    pub fn interactions(&self) -> usize {
        self.trace.values.len()
    }

    /// Expectation-form beacon, `alpha (||H12 x||^2 + tr C)`.
    pub fn emit_ideal(&mut self, x2: &[Complex64]) -> Result<f64> {
        self.require_mode(BeaconMode::Ideal, "ideal")?;
        let v = self.ideal_value(x2, None)?;
        Ok(self.record(v))
    }

    /// Sample-averaged beacon over one cycle of `N` symbols with perfect
    /// decoding at the primary.
    pub fn emit_sampled(&mut self, x2: &[Complex64]) -> Result<f64> {
        self.require_mode(BeaconMode::SampleAverage, "sampled")?;
        let v = self.sampled_value(x2, None)?;
        Ok(self.record(v))
    }

    /// Beacon computed on the residual projected onto the column space of `H11`.
    pub fn emit_projected(&mut self, x2: &[Complex64]) -> Result<f64> {
        if !self.mode.is_projected() {
            return Err(Error::ModeMismatch {
                mode: self.mode.name(),
                requested: "projected",
            });
        }
        let p = self.projector.clone().ok_or(Error::MissingProjector)?;
        let v = if self.mode.is_sampled() {
            self.sampled_value(x2, Some(&p))?
        } else {
            self.ideal_value(x2, Some(&p))?
        };
        Ok(self.record(v))
    }

    fn require_mode(&self, mode: BeaconMode, requested: &'static str) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                mode: self.mode.name(),
                requested,
            })
        }
    }

    fn record(&mut self, v: f64) -> f64 {
        self.trace.push(v);
        v
    }

    fn interference(&self, x2: &[Complex64], p: Option<&ComplexMatrix>) -> Result<Vec<Complex64>> {
        let s = self.channels.h12().mul_vec(x2)?;
        match p {
            Some(p) => p.mul_vec(&s),
            None => Ok(s),
        }
    }

    /// Covariance of the (possibly projected) noise, `P C P*`.
    fn residual_noise_cov(&self, p: Option<&ComplexMatrix>) -> Result<ComplexMatrix> {
        match p {
            Some(p) => p.matmul(&self.noise_cov)?.matmul(&p.conj_transpose()),
            None => Ok(self.noise_cov.clone()),
        }
    }

    fn ideal_value(&self, x2: &[Complex64], p: Option<&ComplexMatrix>) -> Result<f64> {
        let s = self.interference(x2, p)?;
        let floor = self.residual_noise_cov(p)?.trace().re;
        Ok(self.alpha * (cmatrix::vector_norm_sq(&s) + floor))
    }

    fn sampled_value(&mut self, x2: &[Complex64], p: Option<&ComplexMatrix>) -> Result<f64> {
        let per_symbol = match self.sampling {
            SamplingPath::PerSymbol => true,
            SamplingPath::SufficientStatistic => false,
            SamplingPath::Auto => self.cycle_length <= PER_SYMBOL_LIMIT,
        };
        let energy = if per_symbol {
            self.per_symbol_energy(x2, p)?
        } else {
            self.sufficient_statistic_energy(x2, p)?
        };
        Ok(self.alpha * energy)
    }

    /// Literal cycle: draws the primary's own symbols and the noise for each of
    /// the `N` instants and averages `||P (y1 - H11 x1)||^2`.
    fn per_symbol_energy(&mut self, x2: &[Complex64], p: Option<&ComplexMatrix>) -> Result<f64> {
        let h11 = self.channels.h11();
        let h12 = self.channels.h12();
        let (r1, t1) = h11.shape();
        let signal = h12.mul_vec(x2)?;
        let noise_sqrt = psd_sqrt(&self.noise_cov)?;
        let symbol_var = self.pu_power / t1 as f64;
        let mut acc = 0.0;
        let mut x1 = vec![Complex64::new(0.0, 0.0); t1];
        let mut white = vec![Complex64::new(0.0, 0.0); r1];
        for _ in 0..self.cycle_length {
            for v in x1.iter_mut() {
                *v = self.rng.complex_gaussian(symbol_var);
            }
            for w in white.iter_mut() {
                *w = self.rng.complex_gaussian(1.0);
            }
            let own = h11.mul_vec(&x1)?;
            let noise = noise_sqrt.mul_vec(&white)?;
            // y1 - H11 x1_hat with x1_hat = x1
            let z: Vec<Complex64> = (0..r1)
                .map(|i| (own[i] + signal[i] + noise[i]) - own[i])
                .collect();
            acc += match p {
                Some(p) => cmatrix::vector_norm_sq(&p.mul_vec(&z)?),
                None => cmatrix::vector_norm_sq(&z),
            };
        }
        Ok(acc / self.cycle_length as f64)
    }

    fn sufficient_statistic_energy(
        &mut self,
        x2: &[Complex64],
        p: Option<&ComplexMatrix>,
    ) -> Result<f64> {
        let s = self.interference(x2, p)?;
        let cov = self.residual_noise_cov(p)?;
        let eig = cmatrix::hermitian_eig(&cov)?;
        let n = self.cycle_length as f64;
        let mut acc = 0.0;
        for k in 0..eig.dim() {
            let lambda = eig.values[k].max(0.0);
            let u = eig.vectors.column(k);
            let s_k = cmatrix::inner(&u, &s);
            if lambda == 0.0 {
                acc += n * s_k.norm_sqr();
                continue;
            }
            let mean_noise = self.rng.complex_gaussian(lambda / n);
            acc += n * (s_k + mean_noise).norm_sqr();
            if self.cycle_length > 1 {
                acc += lambda * self.rng.gamma(n - 1.0);
            }
        }
        Ok(acc / n)
    }
}

/// Hermitian square root of a PSD matrix.
fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = cmatrix::hermitian_eig(a)?;
    let n = eig.dim();
    let roots: Vec<f64> = eig.values.iter().map(|&v| libm::sqrt(v.max(0.0))).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| eig.vectors[(i, k)] * roots[k] * eig.vectors[(j, k)].conj())
            .sum()
    }))
}

impl Beacon for BeaconEmitter<'_> {
    fn tx_dim(&self) -> usize {
        self.channels.h12().cols()
    }

    fn emit(&mut self, x2: &[Complex64]) -> Result<f64> {
        match self.mode {
            BeaconMode::Ideal => self.emit_ideal(x2),
            BeaconMode::SampleAverage => self.emit_sampled(x2),
            BeaconMode::ProjectedIdeal | BeaconMode::ProjectedSampleAverage => {
                self.emit_projected(x2)
            }
        }
    }

    fn noise(&self) -> BeaconNoise {
        if self.mode.is_sampled() {
            BeaconNoise::SampleAverage {
                cycle_length: self.cycle_length,
            }
        } else {
            BeaconNoise::Exact
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel_set, sample_zmsw, AntennaConfig};

    fn channels(noise: f64, seed: u64) -> ChannelSet {
        let cfg = AntennaConfig::new(3, 2, 4, 2).unwrap();
        sample_channel_set(cfg, noise, noise, 1.0, &mut Rng::new(seed)).unwrap()
    }

    fn unit(t: usize, l: usize) -> Vec<Complex64> {
        let mut e = vec![Complex64::new(0.0, 0.0); t];
        e[l] = Complex64::new(1.0, 0.0);
        e
    }

    #[test]
    fn ideal_baseline_and_columns() {
        let cs = channels(0.25, 1);
        let mut em = BeaconEmitter::new(&cs, BeaconMode::Ideal, 3.0, Rng::new(0)).unwrap();
        let b = em.emit_ideal(&[Complex64::new(0.0, 0.0); 4]).unwrap();
        assert!((b - 3.0 * 2.0 * 0.25).abs() < 1e-15);

        let quiet = channels(0.0, 1);
        let mut em = BeaconEmitter::new(&quiet, BeaconMode::Ideal, 1.0, Rng::new(0)).unwrap();
        for l in 0..4 {
            let col = quiet.h12().column(l);
            let q = em.emit_ideal(&unit(4, l)).unwrap();
            assert!((q - cmatrix::vector_norm_sq(&col)).abs() < 1e-14);
        }
        assert_eq!(em.trace().cycle_index(), Some(3));
        assert_eq!(em.interactions(), 4);
    }

    #[test]
    fn ideal_scales_with_alpha_and_extracts_gram_form() {
        let cs = channels(0.1, 2);
        let g = cs.h12().conj_transpose().matmul(cs.h12()).unwrap();
        let mut rng = Rng::new(3);
        let mut a1 = BeaconEmitter::new(&cs, BeaconMode::Ideal, 1.0, Rng::new(0)).unwrap();
        let mut a2 = BeaconEmitter::new(&cs, BeaconMode::Ideal, 2.0, Rng::new(0)).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 4];
        let base = a1.emit_ideal(&zero).unwrap();
        for _ in 0..10 {
            let x = sample_zmsw(4, 1, &mut rng).column(0);
            let q1 = a1.emit_ideal(&x).unwrap();
            let q2 = a2.emit_ideal(&x).unwrap();
            assert_eq!(q2, 2.0 * q1);
            let quad = cmatrix::quadratic_form(&g, &x).unwrap().re;
            assert!(((q1 - base) - quad).abs() <= 1e-12 * quad.max(1.0));
        }
    }

    #[test]
    fn ideal_order_matches_interference_order() {
        let cs = channels(0.3, 4);
        let mut em = BeaconEmitter::new(&cs, BeaconMode::Ideal, 0.7, Rng::new(0)).unwrap();
        let mut rng = Rng::new(5);
        let probes: Vec<Vec<Complex64>> = (0..20)
            .map(|_| sample_zmsw(4, 1, &mut rng).column(0))
            .collect();
        let q: Vec<f64> = probes.iter().map(|x| em.emit_ideal(x).unwrap()).collect();
        let e: Vec<f64> = probes
            .iter()
            .map(|x| cmatrix::vector_norm_sq(&cs.h12().mul_vec(x).unwrap()))
            .collect();
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(q[i] >= q[j], e[i] >= e[j]);
            }
        }
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let cs = channels(0.1, 6);
        let x = unit(4, 0);
        let mut em = BeaconEmitter::new(&cs, BeaconMode::SampleAverage, 1.0, Rng::new(0)).unwrap();
        assert!(matches!(em.emit_ideal(&x), Err(Error::ModeMismatch { .. })));
        assert!(matches!(
            em.emit_projected(&x),
            Err(Error::ModeMismatch { .. })
        ));
        let mut em = BeaconEmitter::new(&cs, BeaconMode::Ideal, 1.0, Rng::new(0)).unwrap();
        assert!(matches!(
            em.emit_sampled(&x),
            Err(Error::ModeMismatch { .. })
        ));
        assert!(BeaconEmitter::new(&cs, BeaconMode::Ideal, 0.0, Rng::new(0)).is_err());
        assert!(BeaconEmitter::new(&cs, BeaconMode::Ideal, 1.0, Rng::new(0))
            .unwrap()
            .with_cycle_length(0)
            .is_err());
    }

    #[test]
    fn sampled_without_noise_equals_ideal() {
        let cs = channels(0.0, 7);
        let mut ideal = BeaconEmitter::new(&cs, BeaconMode::Ideal, 1.5, Rng::new(0)).unwrap();
        for path in [SamplingPath::PerSymbol, SamplingPath::SufficientStatistic] {
            for n in [1, 7, 100] {
                let mut em = BeaconEmitter::new(&cs, BeaconMode::SampleAverage, 1.5, Rng::new(1))
                    .unwrap()
                    .with_cycle_length(n)
                    .unwrap()
                    .with_sampling_path(path);
                for l in 0..4 {
                    let a = em.emit_sampled(&unit(4, l)).unwrap();
                    let b = ideal.emit_ideal(&unit(4, l)).unwrap();
                    assert!((a - b).abs() <= 1e-12 * b, "{path:?} {n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn sampled_single_symbol_is_nonnegative() {
        let cs = channels(1.0, 8);
        let mut em = BeaconEmitter::new(&cs, BeaconMode::SampleAverage, 1.0, Rng::new(2)).unwrap();
        for _ in 0..200 {
            assert!(em.emit_sampled(&unit(4, 1)).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sampled_concentrates_around_ideal() {
        let cs = channels(0.5, 9);
        let x = unit(4, 2);
        let mut ideal = BeaconEmitter::new(&cs, BeaconMode::Ideal, 1.0, Rng::new(0)).unwrap();
        let target = ideal.emit_ideal(&x).unwrap();
        let mut em = BeaconEmitter::new(&cs, BeaconMode::SampleAverage, 1.0, Rng::new(10))
            .unwrap()
            .with_cycle_length(10_000)
            .unwrap();
        let trials = 100;
        let close = (0..trials)
            .filter(|_| (em.emit_sampled(&x).unwrap() - target).abs() / target <= 0.05)
            .count();
        assert!(close >= 99, "{close}");
    }

    #[test]
    fn sampling_paths_share_first_two_moments() {
        let cs = channels(0.4, 11);
        let x = unit(4, 0);
        let n = 20;
        let moments = |path: SamplingPath, seed: u64| {
            let mut em = BeaconEmitter::new(&cs, BeaconMode::SampleAverage, 1.0, Rng::new(seed))
                .unwrap()
                .with_cycle_length(n)
                .unwrap()
                .with_sampling_path(path);
            let v: Vec<f64> = (0..20_000).map(|_| em.emit_sampled(&x).unwrap()).collect();
            crate::stats::mean_var(&v)
        };
        let (m1, v1) = moments(SamplingPath::PerSymbol, 12);
        let (m2, v2) = moments(SamplingPath::SufficientStatistic, 13);
        // exact moments for white noise: mean = ||s||^2 + r sigma^2,
        // var = (r sigma^4 + 2 sigma^2 ||s||^2) / N
        let s2 = cmatrix::vector_norm_sq(&cs.h12().column(0));
        let mean = s2 + 2.0 * 0.4;
        let var = (2.0 * 0.16 + 2.0 * 0.4 * s2) / n as f64;
        for (m, v) in [(m1, v1), (m2, v2)] {
            assert!(
                (m - mean).abs() <= 4.0 * libm::sqrt(var / 20_000.0),
                "{m} vs {mean}"
            );
            assert!((v / var - 1.0).abs() <= 0.05, "{v} vs {var}");
        }
    }

    #[test]
    fn projected_identity_matches_plain() {
        let cs = channels(0.2, 14);
        let mut plain = BeaconEmitter::new(&cs, BeaconMode::Ideal, 2.0, Rng::new(0)).unwrap();
        let mut proj = BeaconEmitter::new(&cs, BeaconMode::ProjectedIdeal, 2.0, Rng::new(0))
            .unwrap()
            .with_projector(ComplexMatrix::identity(2))
            .unwrap();
        let mut rng = Rng::new(15);
        for _ in 0..5 {
            let x = sample_zmsw(4, 1, &mut rng).column(0);
            let a = plain.emit_ideal(&x).unwrap();
            let b = proj.emit_projected(&x).unwrap();
            assert!((a - b).abs() <= 1e-13 * a);
        }
    }

    #[test]
    fn projected_signal_vanishes_on_orthogonal_complement() {
        // r1 = 2 > t1 = 1, so C(H11) has a nontrivial complement
        let cfg = AntennaConfig::new(1, 2, 3, 2).unwrap();
        let cs = sample_channel_set(cfg, 0.3, 0.3, 1.0, &mut Rng::new(16)).unwrap();
        let mut em = BeaconEmitter::new(&cs, BeaconMode::ProjectedIdeal, 1.3, Rng::new(0)).unwrap();
        let p = em.projector().unwrap().clone();
        let rank = cmatrix::numeric_rank(&p, 1e-8);
        assert_eq!(rank, 1);
        // white noise, rank-1 projector: baseline alpha * rho * sigma^2
        let zero = vec![Complex64::new(0.0, 0.0); 3];
        let base = em.emit_projected(&zero).unwrap();
        let direct = 1.3
            * p.matmul(&ComplexMatrix::identity(2).scale(0.3))
                .unwrap()
                .matmul(&p)
                .unwrap()
                .trace()
                .re;
        assert!((base - direct).abs() < 1e-14);
        assert!((base - 1.3 * rank as f64 * 0.3).abs() < 1e-12);

        // x with H12 x orthogonal to C(H11): only the baseline remains
        let ph12 = p.matmul(cs.h12()).unwrap();
        let e = cmatrix::hermitian_eig(&ph12.conj_transpose().matmul(&ph12).unwrap()).unwrap();
        let x = e.vectors.column(2);
        assert!(cmatrix::vector_norm_sq(&cs.h12().mul_vec(&x).unwrap()) > 1e-3);
        let q = em.emit_projected(&x).unwrap();
        assert!((q - base).abs() <= 1e-12);
    }

    #[test]
    fn projector_override_is_validated() {
        let cs = channels(0.1, 17);
        let em = BeaconEmitter::new(&cs, BeaconMode::ProjectedIdeal, 1.0, Rng::new(0)).unwrap();
        let not_proj = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            em.with_projector(not_proj),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn colored_noise_baseline_is_its_trace() {
        let cs = channels(0.1, 18);
        let cov = ComplexMatrix::from_real(2, 2, &[0.5, 0.2, 0.2, 0.3]).unwrap();
        let mut em = BeaconEmitter::new(&cs, BeaconMode::Ideal, 1.0, Rng::new(0))
            .unwrap()
            .with_noise_covariance(cov)
            .unwrap();
        let b = em.emit_ideal(&[Complex64::new(0.0, 0.0); 4]).unwrap();
        assert!((b - 0.8).abs() < 1e-15);
    }
}
