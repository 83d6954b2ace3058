//! Optical channel: LED hard limiter, FIR dispersion and AWGN.
//!
//! Signals are optical power in watts throughout (unit LED slope and unit
//! detector responsivity), so `y = h * x + n` acts on the same samples the
//! limiter clamps.

use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// `10 log10(P / 1 mW)` inverted. Noise variances quoted in dBm use the
/// same scale, so -20 dBm is `1e-5`.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    libm::pow(10.0, (dbm - 30.0) / 10.0)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * libm::log10(watts) + 30.0
}

/// Ideal peak-limited source: output clamped to `[0, p0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardLimiter {
    p0: f64,
}

impl HardLimiter {
    pub fn new(p0: f64) -> Result<Self> {
        if p0 > 0.0 && p0.is_finite() {
            Ok(HardLimiter { p0 })
        } else {
            Err(Error::NonPositive("peak power"))
        }
    }

    pub fn peak(&self) -> f64 {
        self.p0
    }

    /// Clamps in place; returns how many samples hit the peak.
    pub fn apply(&self, x: &mut [f64]) -> usize {
        let mut clipped = 0;
        for v in x.iter_mut() {
            if *v > self.p0 {
                *v = self.p0;
                clipped += 1;
            } else if *v < 0.0 {
                *v = 0.0;
            }
        }
        clipped
    }
}

pub fn hard_limit(x: &[f64], limiter: &HardLimiter) -> Vec<f64> {
    let mut out = x.to_vec();
    limiter.apply(&mut out);
    out
}

/// Streaming FIR filter. The delay line persists across calls so
/// consecutive symbols (and their cyclic prefixes) see real ISI.
#[derive(Debug, Clone)]
pub struct FirChannel {
    taps: Vec<f64>,
    history: Vec<f64>,
    scratch: Vec<f64>,
}

impl FirChannel {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() || taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidLength {
                expected: 1,
                actual: taps.len(),
            });
        }
        let memory = taps.len() - 1;
        Ok(FirChannel {
            taps,
            history: alloc::vec![0.0; memory],
            scratch: Vec::new(),
        })
    }

    pub fn ideal() -> Self {
        FirChannel {
            taps: alloc::vec![1.0],
            history: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn is_ideal(&self) -> bool {
        self.taps.len() == 1 && self.taps[0] == 1.0
    }

    pub fn reset(&mut self) {
        self.history.fill(0.0);
    }

    /// Filters `block` in place as the continuation of the stream.
    pub fn process(&mut self, block: &mut [f64]) {
        if self.is_ideal() {
            return;
        }
        let memory = self.history.len();
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.history);
        self.scratch.extend_from_slice(block);
        for (n, out) in block.iter_mut().enumerate() {
            // scratch[memory + n] is the current input sample
            let mut acc = 0.0;
            for (l, &h) in self.taps.iter().enumerate() {
                acc += h * self.scratch[memory + n - l];
            }
            *out = acc;
        }
        let len = self.scratch.len();
        self.history.copy_from_slice(&self.scratch[len - memory..]);
    }
}

pub fn fir_convolve(stream: &[f64], taps: &[f64]) -> Result<Vec<f64>> {
    let mut fir = FirChannel::new(taps.to_vec())?;
    let mut out = stream.to_vec();
    fir.process(&mut out);
    Ok(out)
}

/// Reproducible white Gaussian noise. Backed by ChaCha8, so `(seed,
/// stream)` pairs address independent, non-overlapping sequences.
#[derive(Debug, Clone)]
pub struct AwgnSource {
    variance: f64,
    std_dev: f64,
    rng: ChaCha8Rng,
}

impl AwgnSource {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        Self::with_stream(variance, seed, 0)
    }

    pub fn with_stream(variance: f64, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self::from_rng(variance, rng)
    }

    pub fn from_rng(variance: f64, rng: ChaCha8Rng) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::NonPositive("noise variance"));
        }
        Ok(AwgnSource {
            variance,
            std_dev: libm::sqrt(variance),
            rng,
        })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        z * self.std_dev
    }

    /// Overwrites `buf` with fresh noise samples.
    pub fn fill(&mut self, buf: &mut [f64]) {
        if self.variance == 0.0 {
            buf.fill(0.0);
            return;
        }
        for v in buf.iter_mut() {
            *v = self.sample();
        }
    }

    /// Adds noise to `stream` in place.
    pub fn add(&mut self, stream: &mut [f64]) {
        if self.variance == 0.0 {
            return;
        }
        for v in stream.iter_mut() {
            *v += self.sample();
        }
    }
}

/// Scales `x` so its mean is `target` watts; returns the scaled copy and
/// the gain.
pub fn power_normalize(x: &[f64], target: f64) -> Result<(Vec<f64>, f64)> {
    if x.is_empty() {
        return Err(Error::ZeroSignal);
    }
    if !(target > 0.0) {
        return Err(Error::NonPositive("target power"));
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::ZeroSignal);
    }
    let gain = target / mean;
    Ok((x.iter().map(|v| v * gain).collect(), gain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dbm_round_values() {
        assert!((dbm_to_watts(-20.0) - 1e-5).abs() < 1e-20);
        assert!((dbm_to_watts(-30.0) - 1e-6).abs() < 1e-21);
        assert!((dbm_to_watts(24.0) - 0.251_188_643_150_958).abs() < 1e-12);
        assert!((watts_to_dbm(0.001)).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(17.3)) - 17.3).abs() < 1e-12);
    }

    #[test]
    fn limiter_examples() {
        let lim = HardLimiter::new(0.5).unwrap();
        assert_eq!(hard_limit(&[-0.1, 0.2, 0.9], &lim), vec![0.0, 0.2, 0.5]);
        let inside = [0.0, 0.1, 0.5, 0.25];
        assert_eq!(hard_limit(&inside, &lim), inside.to_vec());
        let mut x = vec![0.6, 0.7, 0.1];
        assert_eq!(lim.apply(&mut x), 2);
        assert!(HardLimiter::new(0.0).is_err());
        assert!(HardLimiter::new(-1.0).is_err());
    }

    #[test]
    fn fir_with_cyclic_prefix_is_circular() {
        // [x3, x0, x1, x2, x3] with prefix 1, through h = [0.9, 0.1]
        let stream = [0.0, 1.0, 0.0, 0.0, 0.0];
        let y = fir_convolve(&stream, &[0.9, 0.1]).unwrap();
        let body = &y[1..];
        let expect = [0.9, 0.1, 0.0, 0.0];
        for (a, b) in body.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fir_identity_and_dc() {
        let x = [0.3, 0.1, 0.7, 0.2];
        assert_eq!(fir_convolve(&x, &[1.0]).unwrap(), x.to_vec());
        // Unit-sum taps keep DC once the delay line is primed with it.
        let mut fir = FirChannel::new(vec![0.6, 0.3, 0.1]).unwrap();
        let mut warm = [0.4; 8];
        fir.process(&mut warm);
        let mut block = [0.4; 8];
        fir.process(&mut block);
        assert!(block.iter().all(|v| (v - 0.4).abs() < 1e-15));
    }

    #[test]
    fn fir_state_carries_across_blocks() {
        let taps = vec![0.5, 0.3, 0.2];
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let whole = fir_convolve(&x, &taps).unwrap();
        let mut fir = FirChannel::new(taps).unwrap();
        let mut a = x[..7].to_vec();
        let mut b = x[7..].to_vec();
        fir.process(&mut a);
        fir.process(&mut b);
        a.extend(b);
        for (p, q) in whole.iter().zip(&a) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_variance_is_identity() {
        let mut src = AwgnSource::new(0.0, 5).unwrap();
        let mut x = vec![0.1, 0.2];
        src.add(&mut x);
        assert_eq!(x, vec![0.1, 0.2]);
        assert!(AwgnSource::new(-1.0, 5).is_err());
    }

    #[test]
    fn same_seed_same_noise() {
        let mut a = AwgnSource::new(1e-5, 42).unwrap();
        let mut b = AwgnSource::new(1e-5, 42).unwrap();
        let mut c = AwgnSource::with_stream(1e-5, 42, 1).unwrap();
        let xa: Vec<f64> = (0..16).map(|_| a.sample()).collect();
        let xb: Vec<f64> = (0..16).map(|_| b.sample()).collect();
        let xc: Vec<f64> = (0..16).map(|_| c.sample()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn normalize_examples() {
        let (y, g) = power_normalize(&[0.1, 0.1], 0.2).unwrap();
        assert!((g - 2.0).abs() < 1e-15);
        assert!((y[0] - 0.2).abs() < 1e-15);
        assert_eq!(power_normalize(&[0.0, 0.0], 0.2), Err(Error::ZeroSignal));
        assert!(power_normalize(&[], 0.2).is_err());
    }
}
