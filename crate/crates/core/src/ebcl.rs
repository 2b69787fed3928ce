//! Energy-based channel learning on the secondary side.
//!
//! The learner sends `t2^2 + 1` constant probes (one baseline at `x = 0`),
//! subtracts the baseline from every beacon, and solves for `alpha * G` entry
//! by entry. Only the upper triangle is measured; the lower one is its
//! conjugate.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::f64::consts::FRAC_PI_4;
use core::fmt;

use num_complex::Complex64;

use crate::beacon::{Beacon, BeaconNoise};
use crate::cmatrix::{self, ComplexMatrix, HermitianEig, NORM_FLOOR};
use crate::{Error, Result};

/// Default relative eigenvalue threshold for noiseless beacons.
pub const DEFAULT_NULL_TOL: f64 = 1e-8;

/// Default multiplier on the beacon noise level in sample-averaged mode.
pub const DEFAULT_NOISE_K: f64 = 3.0;

/// Which schedule entry a beacon value belongs to. Indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProbeLabel {
    Baseline,
    Diagonal(usize),
    /// `r_{l,m}(pi/4, 0)`, measures `Re g_lm`.
    Real(usize, usize),
    /// `r_{l,m}(pi/4, pi/2)`, measures `Im g_lm`.
    Imag(usize, usize),
}

impl fmt::Display for ProbeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProbeLabel::Baseline => write!(f, "baseline"),
            ProbeLabel::Diagonal(l) => write!(f, "diag({l})"),
            ProbeLabel::Real(l, m) => write!(f, "re({l},{m})"),
            ProbeLabel::Imag(l, m) => write!(f, "im({l},{m})"),
        }
    }
}

/// Unit probe `r_{l,m}(theta, phi)`: `cos theta` at `l`, `e^{-i phi} sin theta`
/// at `m`, zero elsewhere. With `l == m` it is the basis vector `e_l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeVector {
    pub dim: usize,
    pub l: usize,
    pub m: usize,
    pub theta: f64,
    pub phi: f64,
}

impl ProbeVector {
    pub fn new(dim: usize, l: usize, m: usize, theta: f64, phi: f64) -> Result<Self> {
        if l > m || m >= dim {
            return Err(Error::InvalidParameter("probe indices need l <= m < dim"));
        }
        Ok(Self {
            dim,
            l,
            m,
            theta,
            phi,
        })
    }

    pub fn as_vector(&self) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.dim];
        if self.l == self.m {
            x[self.l] = Complex64::new(1.0, 0.0);
        } else {
            x[self.l] = Complex64::new(libm::cos(self.theta), 0.0);
            x[self.m] = Complex64::from_polar(libm::sin(self.theta), -self.phi);
        }
        x
    }

    /// The schedule probe behind `label`; `None` for the baseline.
    pub fn for_label(dim: usize, label: ProbeLabel) -> Result<Option<Self>> {
        match label {
            ProbeLabel::Baseline => Ok(None),
            ProbeLabel::Diagonal(l) => Self::new(dim, l, l, 0.0, 0.0).map(Some),
            ProbeLabel::Real(l, m) if l < m => Self::new(dim, l, m, FRAC_PI_4, 0.0).map(Some),
            ProbeLabel::Imag(l, m) if l < m => Self::new(dim, l, m, FRAC_PI_4, FRAC_PI_2).map(Some),
            _ => Err(Error::InvalidParameter("off-diagonal probe needs l < m")),
        }
    }
}

/// Labels of the full schedule in transmission order.
pub fn schedule_labels(t2: usize) -> Vec<ProbeLabel> {
    let mut labels = Vec::with_capacity(t2 * t2 + 1);
    labels.push(ProbeLabel::Baseline);
    labels.extend((0..t2).map(ProbeLabel::Diagonal));
    for l in 0..t2 {
        for m in l + 1..t2 {
            labels.push(ProbeLabel::Real(l, m));
            labels.push(ProbeLabel::Imag(l, m));
        }
    }
    labels
}

/// The probe schedule: baseline, basis vectors, then the two phase probes
/// for each pair `l < m`.
pub fn probe_schedule(t2: usize) -> Vec<(ProbeLabel, Vec<Complex64>)> {
    schedule_labels(t2)
        .into_iter()
        .map(|label| {
            let x = match ProbeVector::for_label(t2, label).expect("schedule labels are valid") {
                Some(p) => p.as_vector(),
                None => vec![Complex64::new(0.0, 0.0); t2],
            };
            (label, x)
        })
        .collect()
}

pub type Measurements = BTreeMap<ProbeLabel, f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerSettings {
    /// Eigenvalues at or below `null_tol * lambda_max` count as null.
    pub null_tol: f64,
    /// Noise multiplier for sample-averaged beacons.
    pub noise_k: f64,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        Self {
            null_tol: DEFAULT_NULL_TOL,
            noise_k: DEFAULT_NOISE_K,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LearnedGram {
    /// `alpha * G` for an unknown `alpha > 0`.
    pub g_hat: ComplexMatrix,
    /// Always true: energy beacons fix `G` only up to the beacon gain.
    pub scale_ambiguous: bool,
    pub eig: HermitianEig,
    /// Relative eigenvalue threshold.
    pub null_tol: f64,
    /// Beacon interactions consumed, baseline included.
    pub measurement_count: usize,
    /// First-order standard deviation of each eigenvalue caused by beacon
    /// noise, in the order of `eig.values`. All zero for exact beacons.
    pub eigen_noise: Vec<f64>,
    /// Multiplier applied to `eigen_noise` when classifying the null space.
    pub noise_k: f64,
}

impl LearnedGram {
    pub fn dim(&self) -> usize {
        self.g_hat.rows()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig.values.first().copied().unwrap_or(0.0)
    }

    /// Absolute threshold for eigenvalue `k`: the larger of the relative
    /// floor and `noise_k` standard deviations of its noise.
    pub fn threshold(&self, k: usize) -> f64 {
        let rel = self.null_tol * self.lambda_max();
        rel.max(self.noise_k * self.eigen_noise.get(k).copied().unwrap_or(0.0))
    }

    /// Eigen-indices classified as null.
    pub fn null_indices(&self) -> Vec<usize> {
        if self.lambda_max() <= NORM_FLOOR {
            return (0..self.dim()).collect();
        }
        (0..self.dim())
            .filter(|&k| self.eig.values[k] <= self.threshold(k))
            .collect()
    }

    pub fn null_dim(&self) -> usize {
        self.null_indices().len()
    }

    pub fn is_noisy(&self) -> bool {
        self.eigen_noise.iter().any(|&s| s > 0.0)
    }

    /// `g_hat / g_hat[0][0]`, which removes the unknown scale.
    pub fn normalized(&self) -> ComplexMatrix {
        let g11 = self.g_hat[(0, 0)].re;
        if g11 > 0.0 {
            self.g_hat.scale(1.0 / g11)
        } else {
            self.g_hat.clone()
        }
    }
}

/// Closed-form Gram reconstruction from one beacon value per schedule probe.
pub fn reconstruct_gram(
    t2: usize,
    measurements: &Measurements,
    noise: BeaconNoise,
    settings: &LearnerSettings,
) -> Result<LearnedGram> {
    if t2 == 0 {
        return Err(Error::InvalidParameter("t2 must be at least 1"));
    }
    let q = |label: ProbeLabel| -> Result<f64> {
        measurements
            .get(&label)
            .copied()
            .ok_or(Error::MissingProbe(label))
    };
    let b = q(ProbeLabel::Baseline)?;
    let diag: Vec<f64> = (0..t2)
        .map(|l| Ok(q(ProbeLabel::Diagonal(l))? - b))
        .collect::<Result<_>>()?;

    let variance = |label: ProbeLabel| -> Result<f64> {
        Ok(match noise {
            BeaconNoise::Exact => 0.0,
            BeaconNoise::SampleAverage { cycle_length } => {
                beacon_variance(b, q(label)?, cycle_length)
            }
        })
    };

    let max_diag = diag.iter().copied().fold(0.0, f64::max);
    let floor = (1e-9 * max_diag).max(1e-12 * b.abs());
    let var_b = variance(ProbeLabel::Baseline)?;
    for (index, &value) in diag.iter().enumerate() {
        let spread = libm::sqrt(variance(ProbeLabel::Diagonal(index))? + var_b);
        let tolerance = floor.max(settings.noise_k * spread);
        if value < -tolerance {
            return Err(Error::NegativeDiagonal {
                index,
                value,
                tolerance,
            });
        }
    }

    let mut g = ComplexMatrix::zeros(t2, t2);
    for l in 0..t2 {
        g[(l, l)] = Complex64::new(diag[l], 0.0);
    }
    // probes at theta = pi/4, so cos^2 = sin^2 = 1/2
    for l in 0..t2 {
        for m in l + 1..t2 {
            let mid = 0.5 * (diag[l] + diag[m]);
            let c_re = mid - (q(ProbeLabel::Real(l, m))? - b);
            let c_im = mid - (q(ProbeLabel::Imag(l, m))? - b);
            let g_lm = Complex64::new(-c_re, -c_im);
            g[(l, m)] = g_lm;
            g[(m, l)] = g_lm.conj();
        }
    }

    let eig = cmatrix::hermitian_eig(&g)?;
    let mut eigen_noise = vec![0.0; t2];
    if matches!(noise, BeaconNoise::SampleAverage { .. }) {
        for (k, sd) in eigen_noise.iter_mut().enumerate() {
            let v = eig.vectors.column(k);
            let mut acc = var_b;
            for (label, w) in eigenvalue_sensitivity(&v) {
                acc += w * w * variance(label)?;
            }
            *sd = libm::sqrt(acc);
        }
    }

    Ok(LearnedGram {
        g_hat: g,
        scale_ambiguous: true,
        eig,
        null_tol: settings.null_tol,
        measurement_count: measurements.len(),
        eigen_noise,
        noise_k: settings.noise_k,
    })
}

/// Conservative variance of one sample-averaged beacon value.
///
/// With baseline `b` and signal excess `e` the variance is at most
/// `(b^2 + 2 b e) / N`, whatever the receive dimension and noise color.
fn beacon_variance(b: f64, q: f64, n: usize) -> f64 {
    let b = b.max(0.0);
    let e = (q - b).max(0.0);
    (b * b + 2.0 * b * e) / n as f64
}

/// `d(v* G v) / d q` for every non-baseline probe. The baseline weight is
/// `-||v||^2`; the off-diagonal formulas cancel it.
fn eigenvalue_sensitivity(v: &[Complex64]) -> Vec<(ProbeLabel, f64)> {
    let t2 = v.len();
    let mut diag: Vec<f64> = v.iter().map(|x| x.norm_sqr()).collect();
    let mut out = Vec::with_capacity(t2 * t2);
    for l in 0..t2 {
        for m in l + 1..t2 {
            // v* G v contains 2 Re(w g_lm) with w = conj(v_l) v_m, and
            // Re g_lm = q_re - (q_l + q_m) / 2, Im g_lm = q_im - (q_l + q_m) / 2
            let w = v[l].conj() * v[m];
            out.push((ProbeLabel::Real(l, m), 2.0 * w.re));
            out.push((ProbeLabel::Imag(l, m), -2.0 * w.im));
            diag[l] += w.im - w.re;
            diag[m] += w.im - w.re;
        }
    }
    out.extend(
        diag.into_iter()
            .enumerate()
            .map(|(l, d)| (ProbeLabel::Diagonal(l), d)),
    );
    out
}

/// Columns of a learned precoder together with their eigenvalues.
#[derive(Clone, Debug)]
pub struct Precoder {
    pub t: ComplexMatrix,
    /// Eigen-indices of the selected columns, ascending.
    pub selected_indices: Vec<usize>,
    /// Eigenvalue of each column: its interference power per unit transmit
    /// power, up to the beacon gain.
    pub residual_levels: Vec<f64>,
}

impl Precoder {
    pub fn dim(&self) -> usize {
        self.t.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    /// Unrestricted transmission over all `n` antennas.
    pub fn full(n: usize) -> Self {
        Self {
            t: ComplexMatrix::identity(n),
            selected_indices: (0..n).collect(),
            residual_levels: vec![f64::NAN; n],
        }
    }

    fn from_indices(lg: &LearnedGram, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        Self {
            t: lg.eig.vectors.select_columns(&indices),
            residual_levels: indices.iter().map(|&k| lg.eig.values[k]).collect(),
            selected_indices: indices,
        }
    }
}

/// Eigenvectors spanning the learned null space. Empty when `g_hat` has full rank.
pub fn null_space(lg: &LearnedGram) -> Precoder {
    Precoder::from_indices(lg, lg.null_indices())
}

/// Null space plus the `extra_dims` eigenvectors with the smallest positive
/// eigenvalues. Ties go to the lower eigen-index.
pub fn partial_precoder(lg: &LearnedGram, extra_dims: usize) -> Result<Precoder> {
    let null = lg.null_indices();
    let mut rest: Vec<usize> = (0..lg.dim()).filter(|k| !null.contains(k)).collect();
    if extra_dims > rest.len() {
        return Err(Error::ExtraDimsTooLarge {
            requested: extra_dims,
            available: rest.len(),
        });
    }
    rest.sort_by(|&a, &b| {
        lg.eig.values[a]
            .total_cmp(&lg.eig.values[b])
            .then(a.cmp(&b))
    });
    let mut indices = null;
    indices.extend_from_slice(&rest[..extra_dims]);
    Ok(Precoder::from_indices(lg, indices))
}

/// Runs the whole schedule against `beacon`, one cycle per probe, and
/// reconstructs the Gram matrix.
pub fn run_learning_session<B: Beacon + ?Sized>(
    beacon: &mut B,
    settings: &LearnerSettings,
) -> Result<LearnedGram> {
    let t2 = beacon.tx_dim();
    let mut measurements = Measurements::new();
    for (label, x) in probe_schedule(t2) {
        let q = beacon.emit(&x)?;
        measurements.insert(label, q);
    }
    reconstruct_gram(t2, &measurements, beacon.noise(), settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beacon::{BeaconEmitter, BeaconMode};
    use crate::channel::{sample_channel_set, sample_zmsw, AntennaConfig, ChannelSet, Rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Exact beacon straight from a Gram matrix, for tests that start from `G`.
    struct GramBeacon {
        g: ComplexMatrix,
        alpha: f64,
        floor: f64,
        calls: usize,
    }

    impl Beacon for GramBeacon {
        fn tx_dim(&self) -> usize {
            self.g.rows()
        }
        fn emit(&mut self, x: &[Complex64]) -> Result<f64> {
            self.calls += 1;
            Ok(self.alpha * (cmatrix::quadratic_form(&self.g, x)?.re + self.floor))
        }
        fn noise(&self) -> BeaconNoise {
            BeaconNoise::Exact
        }
    }

    fn learn_gram(g: ComplexMatrix, alpha: f64) -> LearnedGram {
        let mut b = GramBeacon {
            g,
            alpha,
            floor: 0.5,
            calls: 0,
        };
        run_learning_session(&mut b, &LearnerSettings::default()).unwrap()
    }

    fn gram(h: &ComplexMatrix) -> ComplexMatrix {
        h.conj_transpose().matmul(h).unwrap()
    }

    fn rel_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
    }

    #[test]
    fn schedule_shapes() {
        let s1 = probe_schedule(1);
        assert_eq!(s1.len(), 2);
        assert_eq!(s1[0].1, vec![c(0.0, 0.0)]);
        assert_eq!(s1[1].1, vec![c(1.0, 0.0)]);

        let s2 = probe_schedule(2);
        assert_eq!(s2.len(), 5);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let expect = [
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(h, 0.0), c(h, 0.0)],
            vec![c(h, 0.0), c(0.0, -h)],
        ];
        for ((_, x), e) in s2.iter().zip(expect.iter()) {
            for (a, b) in x.iter().zip(e) {
                assert!((a - b).norm() < 1e-15);
            }
        }
        assert_eq!(probe_schedule(4).len(), 17);
        assert_eq!(schedule_labels(3)[4], ProbeLabel::Real(0, 1));
    }

    #[test]
    fn probes_have_unit_norm_and_at_most_two_entries() {
        for (label, x) in probe_schedule(6) {
            let nz = x.iter().filter(|v| v.norm() > 0.0).count();
            assert!(nz <= 2);
            if label != ProbeLabel::Baseline {
                assert!((cmatrix::vector_norm_sq(&x) - 1.0).abs() < 1e-15);
            }
        }
        let p = ProbeVector::new(3, 0, 2, 0.3, 1.1).unwrap();
        assert!((cmatrix::vector_norm_sq(&p.as_vector()) - 1.0).abs() < 1e-15);
        assert!(ProbeVector::new(3, 2, 1, 0.3, 0.0).is_err());
    }

    #[test]
    fn reconstructs_row_channel() {
        let h = ComplexMatrix::new(1, 2, vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let g = gram(&h);
        // G = [[1, i], [-i, 1]]
        assert!((g[(0, 1)] - c(0.0, 1.0)).norm() < 1e-15);
        let lg = learn_gram(g.clone(), 1.0);
        assert!(lg.g_hat.sub(&g).unwrap().frobenius_norm() <= 1e-12);
        assert_eq!(lg.measurement_count, 5);
    }

    #[test]
    fn zero_channel_gives_zero_gram_and_full_null_space() {
        let lg = learn_gram(ComplexMatrix::zeros(3, 3), 2.0);
        assert_eq!(lg.g_hat.frobenius_norm(), 0.0);
        assert_eq!(null_space(&lg).dim(), 3);
    }

    #[test]
    fn scale_ambiguity_resolved_by_first_diagonal() {
        let h = sample_zmsw(3, 4, &mut Rng::new(21));
        let g = gram(&h);
        let lg = learn_gram(g.clone(), 7.3);
        assert!(lg.scale_ambiguous);
        let ratio = lg.g_hat[(0, 0)].re / g[(0, 0)].re;
        assert!(rel_err(&lg.g_hat.scale(1.0 / ratio), &g) <= 1e-10);
        assert!(rel_err(&lg.normalized(), &g.scale(1.0 / g[(0, 0)].re)) <= 1e-10);
    }

    #[test]
    fn null_space_of_wide_channel() {
        let h = sample_zmsw(2, 4, &mut Rng::new(22));
        let lg = learn_gram(gram(&h), 1.0);
        let p = null_space(&lg);
        assert_eq!(p.dim(), 2);
        let scale = h.frobenius_norm();
        for k in 0..p.dim() {
            let v = p.t.column(k);
            assert!(libm::sqrt(cmatrix::vector_norm_sq(&h.mul_vec(&v).unwrap())) <= 1e-6 * scale);
        }
        let tt = p.t.conj_transpose().matmul(&p.t).unwrap();
        assert!(
            tt.sub(&ComplexMatrix::identity(2))
                .unwrap()
                .frobenius_norm()
                < 1e-9
        );
        assert!(null_space(&learn_gram(ComplexMatrix::identity(3), 1.0)).is_empty());
    }

    #[test]
    fn partial_on_diagonal_gram() {
        let lg = learn_gram(ComplexMatrix::from_diagonal(&[4.0, 1.0, 0.0]), 1.0);
        let p0 = partial_precoder(&lg, 0).unwrap();
        let n = null_space(&lg);
        assert_eq!(p0.selected_indices, n.selected_indices);
        let p1 = partial_precoder(&lg, 1).unwrap();
        assert_eq!(p1.dim(), 2);
        let mut levels = p1.residual_levels.clone();
        levels.sort_by(f64::total_cmp);
        assert!(levels[0].abs() < 1e-12);
        assert!((levels[1] - 1.0).abs() < 1e-12);
        assert!(matches!(
            partial_precoder(&lg, 3),
            Err(Error::ExtraDimsTooLarge {
                requested: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn partial_ties_take_lower_index() {
        let lg = learn_gram(ComplexMatrix::from_diagonal(&[2.0, 1.0, 1.0, 0.0]), 1.0);
        let lo = lg
            .eig
            .values
            .iter()
            .position(|&v| (v - 1.0).abs() < 1e-12)
            .unwrap();
        let p = partial_precoder(&lg, 1).unwrap();
        assert!(p.selected_indices.contains(&lo));
        assert!(!p.selected_indices.contains(&(lo + 1)));
    }

    #[test]
    fn missing_probe_is_reported() {
        let mut m = Measurements::new();
        m.insert(ProbeLabel::Baseline, 1.0);
        m.insert(ProbeLabel::Diagonal(0), 2.0);
        let err = reconstruct_gram(2, &m, BeaconNoise::Exact, &LearnerSettings::default());
        assert_eq!(
            err.unwrap_err(),
            Error::MissingProbe(ProbeLabel::Diagonal(1))
        );
    }

    /// Beacon whose gain collapses after the baseline cycle.
    struct DriftingBeacon<'a> {
        inner: BeaconEmitter<'a>,
        calls: usize,
    }

    impl Beacon for DriftingBeacon<'_> {
        fn tx_dim(&self) -> usize {
            self.inner.tx_dim()
        }
        fn emit(&mut self, x: &[Complex64]) -> Result<f64> {
            let q = self.inner.emit(x)?;
            self.calls += 1;
            Ok(if self.calls == 1 { q } else { 0.01 * q })
        }
        fn noise(&self) -> BeaconNoise {
            BeaconNoise::Exact
        }
    }

    #[test]
    fn alpha_drift_is_detected() {
        let cfg = AntennaConfig::new(2, 2, 3, 2).unwrap();
        let cs = sample_channel_set(cfg, 1.0, 1.0, 1.0, &mut Rng::new(23)).unwrap();
        let inner = BeaconEmitter::new(&cs, BeaconMode::Ideal, 1.0, Rng::new(0)).unwrap();
        let mut b = DriftingBeacon { inner, calls: 0 };
        let err = run_learning_session(&mut b, &LearnerSettings::default()).unwrap_err();
        assert!(matches!(err, Error::NegativeDiagonal { .. }), "{err:?}");
    }

    fn session(cs: &ChannelSet, mode: BeaconMode, alpha: f64) -> (LearnedGram, usize) {
        let mut em = BeaconEmitter::new(cs, mode, alpha, Rng::new(1)).unwrap();
        let lg = run_learning_session(&mut em, &LearnerSettings::default()).unwrap();
        (lg, em.interactions())
    }

    #[test]
    fn ideal_session_is_exact() {
        let cfg = AntennaConfig::new(3, 3, 4, 2).unwrap();
        let cs = sample_channel_set(cfg, 0.2, 0.2, 1.0, &mut Rng::new(24)).unwrap();
        let (lg, calls) = session(&cs, BeaconMode::Ideal, 0.1);
        assert_eq!(calls, 17);
        assert_eq!(lg.measurement_count, 17);
        assert!(rel_err(&lg.g_hat.scale(10.0), &gram(cs.h12())) <= 1e-10);
    }

    #[test]
    fn projected_session_learns_projected_gram() {
        let cfg = AntennaConfig::new(1, 2, 3, 2).unwrap();
        let cs = sample_channel_set(cfg, 0.2, 0.2, 1.0, &mut Rng::new(25)).unwrap();
        let (lg, _) = session(&cs, BeaconMode::ProjectedIdeal, 2.5);
        let p = cmatrix::column_space_projector(cs.h11(), 1e-10);
        let ph = p.matmul(cs.h12()).unwrap();
        assert!(rel_err(&lg.g_hat.scale(1.0 / 2.5), &gram(&ph)) <= 1e-10);
        assert_eq!(null_space(&lg).dim(), 2);
    }

    #[test]
    fn sampled_session_recovers_null_dimension() {
        let cfg = AntennaConfig::new(2, 2, 4, 2).unwrap();
        let cs = sample_channel_set(cfg, 0.01, 0.01, 1.0, &mut Rng::new(26)).unwrap();
        let mut em = BeaconEmitter::new(&cs, BeaconMode::SampleAverage, 1.0, Rng::new(2))
            .unwrap()
            .with_cycle_length(1_000_000)
            .unwrap();
        let lg = run_learning_session(&mut em, &LearnerSettings::default()).unwrap();
        assert!(lg.is_noisy());
        assert_eq!(lg.null_dim(), 2);
        assert!(rel_err(&lg.g_hat, &gram(cs.h12())) < 1e-2);
    }
}
