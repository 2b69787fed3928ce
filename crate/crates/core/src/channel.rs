//! Channel realizations and the flat-fading signal model
//! `y_i = H_ii x_i + H_ij x_j + v_i`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::cmatrix::ComplexMatrix;
use crate::{Error, Result};

/// Seeded random stream.
///
/// Backed by ChaCha8, a counter-based generator: `(seed, stream)` selects an
/// independent keystream, so per-trial streams can be derived without
/// coordination between threads.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl Rng {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Child generator seeded from this stream's next output.
    pub fn split(&mut self) -> Self {
        Self::new(self.inner.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Circularly-symmetric complex Gaussian with `E|z|^2 = variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let s = libm::sqrt(variance / 2.0);
        Complex64::new(self.standard_normal() * s, self.standard_normal() * s)
    }

    /// Gamma(shape, 1) draw; `shape` must be positive.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        // Gamma::new only fails for non-positive or non-finite parameters
        Gamma::new(shape, 1.0)
            .map(|g| g.sample(&mut self.inner))
            .unwrap_or(0.0)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AntennaConfig {
    pub t1: usize,
    pub r1: usize,
    pub t2: usize,
    pub r2: usize,
}

impl AntennaConfig {
    pub fn new(t1: usize, r1: usize, t2: usize, r2: usize) -> Result<Self> {
        if t1 == 0 || r1 == 0 || t2 == 0 || r2 == 0 {
            return Err(Error::InvalidParameter("antenna counts must be at least 1"));
        }
        Ok(Self { t1, r1, t2, r2 })
    }

    /// Same antenna counts for both users.
    pub fn symmetric(t: usize, r: usize) -> Result<Self> {
        Self::new(t, r, t, r)
    }

    /// Roles of the two users exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            t1: self.t2,
            r1: self.r2,
            t2: self.t1,
            r2: self.r1,
        }
    }
}

/// The four channel matrices of a two-user interference channel.
///
/// `h_iq` maps transmitter `q` to receiver `i` and is `r_i x t_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    h11: ComplexMatrix,
    h12: ComplexMatrix,
    h21: ComplexMatrix,
    h22: ComplexMatrix,
    noise_power_1: f64,
    noise_power_2: f64,
    interference_gain: f64,
}

impl ChannelSet {
    pub fn new(
        h11: ComplexMatrix,
        h12: ComplexMatrix,
        h21: ComplexMatrix,
        h22: ComplexMatrix,
        noise_power_1: f64,
        noise_power_2: f64,
        interference_gain: f64,
    ) -> Result<Self> {
        let (r1, t1) = h11.shape();
        let (r2, t2) = h22.shape();
        if h12.shape() != (r1, t2) {
            return Err(Error::DimensionMismatch {
                op: "channel set h12",
                lhs: (r1, t2),
                rhs: h12.shape(),
            });
        }
        if h21.shape() != (r2, t1) {
            return Err(Error::DimensionMismatch {
                op: "channel set h21",
                lhs: (r2, t1),
                rhs: h21.shape(),
            });
        }
        if !(noise_power_1 >= 0.0 && noise_power_2 >= 0.0) {
            return Err(Error::InvalidParameter("noise powers must be >= 0"));
        }
        if !(interference_gain >= 0.0) {
            return Err(Error::InvalidParameter("interference gain must be >= 0"));
        }
        Ok(Self {
            h11,
            h12,
            h21,
            h22,
            noise_power_1,
            noise_power_2,
            interference_gain,
        })
    }

    pub fn h11(&self) -> &ComplexMatrix {
        &self.h11
    }

    pub fn h12(&self) -> &ComplexMatrix {
        &self.h12
    }

    pub fn h21(&self) -> &ComplexMatrix {
        &self.h21
    }

    pub fn h22(&self) -> &ComplexMatrix {
        &self.h22
    }

    pub fn noise_power_1(&self) -> f64 {
        self.noise_power_1
    }

    pub fn noise_power_2(&self) -> f64 {
        self.noise_power_2
    }

    pub fn interference_gain(&self) -> f64 {
        self.interference_gain
    }

    pub fn antennas(&self) -> AntennaConfig {
        AntennaConfig {
            t1: self.h11.cols(),
            r1: self.h11.rows(),
            t2: self.h22.cols(),
            r2: self.h22.rows(),
        }
    }

    /// Direct channel of user `i` (1 or 2).
    pub fn direct(&self, user: usize) -> &ComplexMatrix {
        if user == 1 {
            &self.h11
        } else {
            &self.h22
        }
    }

    /// Channel from the other user's transmitter into receiver `user`.
    pub fn cross_into(&self, user: usize) -> &ComplexMatrix {
        if user == 1 {
            &self.h12
        } else {
            &self.h21
        }
    }

    pub fn noise_power(&self, user: usize) -> f64 {
        if user == 1 {
            self.noise_power_1
        } else {
            self.noise_power_2
        }
    }

    /// The same physical channel with users 1 and 2 relabelled.
    pub fn swapped(&self) -> Self {
        Self {
            h11: self.h22.clone(),
            h12: self.h21.clone(),
            h21: self.h12.clone(),
            h22: self.h11.clone(),
            noise_power_1: self.noise_power_2,
            noise_power_2: self.noise_power_1,
            interference_gain: self.interference_gain,
        }
    }

    /// Same channels with new noise powers.
    pub fn with_noise_powers(mut self, noise_power_1: f64, noise_power_2: f64) -> Result<Self> {
        if !(noise_power_1 >= 0.0 && noise_power_2 >= 0.0) {
            return Err(Error::InvalidParameter("noise powers must be >= 0"));
        }
        self.noise_power_1 = noise_power_1;
        self.noise_power_2 = noise_power_2;
        Ok(self)
    }
}

/// `rows x cols` matrix of i.i.d. `CN(0, 1)` entries (real and imaginary
/// parts independent `N(0, 1/2)`).
pub fn sample_zmsw(rows: usize, cols: usize, rng: &mut Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian(1.0))
}

/// Draws a channel set: ZMSW direct links, ZMSW cross links scaled by
/// `sqrt(interference_gain)`. Draw order is h11, h12, h21, h22.
pub fn sample_channel_set(
    cfg: AntennaConfig,
    noise_power_1: f64,
    noise_power_2: f64,
    interference_gain: f64,
    rng: &mut Rng,
) -> Result<ChannelSet> {
    if !(interference_gain >= 0.0) {
        return Err(Error::InvalidParameter("interference gain must be >= 0"));
    }
    let amp = libm::sqrt(interference_gain);
    let h11 = sample_zmsw(cfg.r1, cfg.t1, rng);
    let h12 = sample_zmsw(cfg.r1, cfg.t2, rng).scale(amp);
    let h21 = sample_zmsw(cfg.r2, cfg.t1, rng).scale(amp);
    let h22 = sample_zmsw(cfg.r2, cfg.t2, rng);
    ChannelSet::new(
        h11,
        h12,
        h21,
        h22,
        noise_power_1,
        noise_power_2,
        interference_gain,
    )
}

/// Linear gain from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Per-antenna noise power giving `snr_db` for a ZMSW channel under uniform
/// allocation of total power `tx_power` (expected received power per antenna
/// equals `tx_power`).
pub fn noise_power_for_snr(snr_db: f64, tx_power: f64) -> f64 {
    tx_power / db_to_linear(snr_db)
}

/// One symbol instant of the signal model. Noise is drawn fresh from `rng`
/// (`v_1` then `v_2`).
pub fn received_signal(
    cs: &ChannelSet,
    x1: &[Complex64],
    x2: &[Complex64],
    rng: &mut Rng,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut y1 = cs.h11.mul_vec(x1)?;
    let i1 = cs.h12.mul_vec(x2)?;
    let mut y2 = cs.h22.mul_vec(x2)?;
    let i2 = cs.h21.mul_vec(x1)?;
    for (y, i) in y1.iter_mut().zip(&i1) {
        *y += i + rng.complex_gaussian(cs.noise_power_1);
    }
    for (y, i) in y2.iter_mut().zip(&i2) {
        *y += i + rng.complex_gaussian(cs.noise_power_2);
    }
    Ok((y1, y2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    fn scalar_draws(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|_| sample_zmsw(1, 1, &mut rng)[(0, 0)])
            .collect()
    }

    #[test]
    fn zmsw_moments() {
        let z = scalar_draws(100_000, 17);
        let n = z.len() as f64;
        let mean: Complex64 = z.iter().sum::<Complex64>() / n;
        let var = z.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        let cross = z.iter().map(|x| x.re * x.im).sum::<f64>() / n;
        assert!(mean.norm() <= 0.02, "{mean}");
        assert!((0.97..=1.03).contains(&var), "{var}");
        assert!(cross.abs() <= 0.02, "{cross}");
    }

    #[test]
    fn zmsw_is_deterministic() {
        let a = sample_zmsw(3, 4, &mut Rng::new(99));
        let b = sample_zmsw(3, 4, &mut Rng::new(99));
        assert_eq!(a, b);
        let c = sample_zmsw(3, 4, &mut Rng::with_stream(99, 1));
        assert_ne!(a, c);
    }

    #[test]
    fn zmsw_real_part_passes_ks() {
        let mut rng = Rng::new(2024);
        let re: Vec<f64> = (0..10_000)
            .map(|_| sample_zmsw(2, 2, &mut rng)[(0, 0)].re)
            .collect();
        let ks = stats::ks_test(&re, |x| stats::normal_cdf(x, 0.5));
        assert!(ks.p_value > 0.001, "{ks:?}");
    }

    #[test]
    fn zero_interference_gain_gives_zero_cross_links() {
        let cfg = AntennaConfig::symmetric(4, 2).unwrap();
        let cs = sample_channel_set(cfg, 1.0, 1.0, 0.0, &mut Rng::new(1)).unwrap();
        assert_eq!(cs.h12().frobenius_norm(), 0.0);
        assert_eq!(cs.h21().frobenius_norm(), 0.0);
        assert!(cs.h11().frobenius_norm() > 0.0);
    }

    #[test]
    fn interference_gain_from_db() {
        let g = db_to_linear(-10.5);
        assert!((g - 0.0891).abs() < 1e-4, "{g}");
    }

    #[test]
    fn cross_channel_power_matches_gain() {
        let cfg = AntennaConfig::new(3, 2, 4, 2).unwrap();
        let gain = db_to_linear(-10.5);
        let mut rng = Rng::new(5);
        let trials = 10_000;
        let mean: f64 = (0..trials)
            .map(|_| {
                let cs = sample_channel_set(cfg, 0.1, 0.1, gain, &mut rng).unwrap();
                cs.h12().frobenius_norm().powi(2) / (cfg.r1 * cfg.t2) as f64
            })
            .sum::<f64>()
            / trials as f64;
        assert!((mean / gain - 1.0).abs() <= 0.05, "{mean} vs {gain}");
    }

    #[test]
    fn received_signal_noiseless_and_linear() {
        let cfg = AntennaConfig::new(3, 2, 4, 3).unwrap();
        let cs = sample_channel_set(cfg, 0.0, 0.0, 0.5, &mut Rng::new(8)).unwrap();
        let mut rng = Rng::new(9);
        let x1 = sample_zmsw(3, 1, &mut rng).column(0);
        let zero2 = alloc::vec![Complex64::new(0.0, 0.0); 4];
        let (y1, _) = received_signal(&cs, &x1, &zero2, &mut rng).unwrap();
        assert_eq!(y1, cs.h11().mul_vec(&x1).unwrap());

        let noisy = cs.clone().with_noise_powers(0.3, 0.7).unwrap();
        let x2 = sample_zmsw(4, 1, &mut rng).column(0);
        let zero1 = alloc::vec![Complex64::new(0.0, 0.0); 3];
        let run = |a: &[Complex64], b: &[Complex64]| {
            // frozen noise stream
            received_signal(&noisy, a, b, &mut Rng::new(77)).unwrap()
        };
        let full = run(&x1, &x2);
        let only1 = run(&x1, &zero2);
        let only2 = run(&zero1, &x2);
        let none = run(&zero1, &zero2);
        for k in 0..2 {
            let d = full.0[k] - only1.0[k] - only2.0[k] + none.0[k];
            assert!(d.norm() < 1e-12);
        }
        for k in 0..3 {
            let d = full.1[k] - only1.1[k] - only2.1[k] + none.1[k];
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn received_signal_noise_variance() {
        let cfg = AntennaConfig::new(2, 2, 2, 3).unwrap();
        let cs = sample_channel_set(cfg, 0.4, 2.5, 1.0, &mut Rng::new(3)).unwrap();
        let mut rng = Rng::new(4);
        let zero = alloc::vec![Complex64::new(0.0, 0.0); 2];
        let n = 10_000;
        let mut p1 = [0.0; 2];
        let mut p2 = [0.0; 3];
        for _ in 0..n {
            let (y1, y2) = received_signal(&cs, &zero, &zero, &mut rng).unwrap();
            for (acc, y) in p1.iter_mut().zip(&y1) {
                *acc += y.norm_sqr() / n as f64;
            }
            for (acc, y) in p2.iter_mut().zip(&y2) {
                *acc += y.norm_sqr() / n as f64;
            }
        }
        assert!(p1.iter().all(|p| (p / 0.4 - 1.0).abs() <= 0.05), "{p1:?}");
        assert!(p2.iter().all(|p| (p / 2.5 - 1.0).abs() <= 0.05), "{p2:?}");
    }

    #[test]
    fn received_signal_checks_dimensions() {
        let cfg = AntennaConfig::symmetric(2, 2).unwrap();
        let cs = sample_channel_set(cfg, 0.0, 0.0, 1.0, &mut Rng::new(1)).unwrap();
        let x = alloc::vec![Complex64::new(0.0, 0.0); 3];
        assert!(received_signal(&cs, &x, &x, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn swapped_relabels_users() {
        let cfg = AntennaConfig::new(3, 1, 4, 2).unwrap();
        let cs = sample_channel_set(cfg, 0.1, 0.2, 1.0, &mut Rng::new(6)).unwrap();
        let s = cs.swapped();
        assert_eq!(s.h11(), cs.h22());
        assert_eq!(s.h12(), cs.h21());
        assert_eq!(s.noise_power_1(), 0.2);
        assert_eq!(s.antennas(), cfg.swapped());
        assert_eq!(s.swapped(), cs);
    }
}
