//! Closed-form link statistics.
//!
//! The ACO-OFDM time signal is modeled as zero-mean Gaussian with standard
//! deviation `sigma` before clipping at `0` and `p0`. `sigma` and all
//! powers are in watts; variances in watts squared.

use core::f64::consts::{PI, SQRT_2};

use crate::{Error, Result};

/// Gaussian tail probability `Q(x) = P(Z > x)`.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn positive(v: f64, name: &'static str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive(name))
    }
}

/// Mean of the clipped Gaussian:
/// `sigma/sqrt(2 pi) (1 - exp(-p0^2 / 2 sigma^2)) + p0 Q(p0/sigma)`.
pub fn aco_average_power(sigma: f64, p0: f64) -> Result<f64> {
    positive(sigma, "sigma")?;
    positive(p0, "peak power")?;
    let a = p0 / sigma;
    Ok(sigma / libm::sqrt(2.0 * PI) * (1.0 - libm::exp(-0.5 * a * a)) + p0 * q_function(a))
}

/// Variance of the upper-clipping distortion:
/// `(p0^2 + sigma^2) Q(p0/sigma) - p0 sigma / sqrt(2 pi) exp(-p0^2 / 2 sigma^2)`.
///
/// Lower clipping contributes nothing on the data carriers.
pub fn aco_clip_variance(sigma: f64, p0: f64) -> Result<f64> {
    positive(sigma, "sigma")?;
    if !(p0 >= 0.0 && p0.is_finite()) {
        return Err(Error::NonPositive("peak power"));
    }
    let a = p0 / sigma;
    let v = (p0 * p0 + sigma * sigma) * q_function(a)
        - p0 * sigma / libm::sqrt(2.0 * PI) * libm::exp(-0.5 * a * a);
    // Cancellation leaves tiny negative residues deep in the tail.
    Ok(v.max(0.0))
}

/// `sigma^2 / (noise_var + var_uc)`.
pub fn aco_snr(sigma: f64, p0: f64, noise_var: f64) -> Result<f64> {
    let den = noise_var + aco_clip_variance(sigma, p0)?;
    if !(den > 0.0) {
        return Err(Error::NonPositive("noise plus clipping variance"));
    }
    Ok(sigma * sigma / den)
}

/// Inverts [`aco_average_power`] by bisection on `sigma` (to 1e-9
/// relative). Average power is bounded by `p0 / 2`.
pub fn aco_sigma_for_power(p_avg: f64, p0: f64) -> Result<f64> {
    positive(p_avg, "average power")?;
    positive(p0, "peak power")?;
    let limit = p0 / 2.0;
    if p_avg >= limit {
        return Err(Error::PowerUnreachable {
            target: p_avg,
            limit,
        });
    }
    let mut lo = 0.0;
    let mut hi = p_avg * libm::sqrt(2.0 * PI);
    while aco_average_power(hi, p0)? < p_avg {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::PowerUnreachable {
                target: p_avg,
                limit,
            });
        }
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if aco_average_power(mid, p0)? < p_avg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn square_qam(m: usize) -> Result<f64> {
    let side = libm::round(libm::sqrt(m as f64)) as usize;
    if m < 4 || side * side != m {
        return Err(Error::InvalidConstellation(m));
    }
    Ok(side as f64)
}

/// `2 (sqrt(M) - 1) / (sqrt(M) log2 sqrt(M)) Q(sqrt(3 SNR / (M - 1)))`.
pub fn ber_ofdm_analytic(m: usize, snr: f64) -> Result<f64> {
    let side = square_qam(m)?;
    let pre = 2.0 * (side - 1.0) / (side * libm::log2(side));
    Ok(pre * q_function(libm::sqrt(3.0 * snr / (m as f64 - 1.0))))
}

/// `(M - 1) / (M log2 M) Q(sqrt(3 / (M^2 - 1)) sigma / noise_std)`, with
/// `sigma` taken as the average optical power.
pub fn ber_hcm_analytic(m: usize, sigma: f64, noise_std: f64) -> Result<f64> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidConstellation(m));
    }
    positive(noise_std, "noise std")?;
    let mf = m as f64;
    let pre = (mf - 1.0) / (mf * libm::log2(mf));
    Ok(pre * q_function(libm::sqrt(3.0 / (mf * mf - 1.0)) * sigma / noise_std))
}

/// BER of M-PAM HCM at the decoder output, for an unclipped signal of
/// average optical power `avg_power` in an ideal AWGN channel.
///
/// With unipolar levels in `[0, 1]` every chip has mean
/// `A (N - 1) / (2 sqrt(N))`, so the amplitude is
/// `A = 2 sqrt(N) avg_power / (N - 1)`. The decoder sees `A (u - 1/2)` plus
/// white noise of unchanged variance, and adjacent levels sit `A / (M - 1)`
/// apart. Exact for OOK; nearest-neighbour Gray approximation otherwise.
pub fn ber_hcm_decoder(m: usize, n: usize, avg_power: f64, noise_std: f64) -> Result<f64> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidConstellation(m));
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidOrder(n));
    }
    positive(noise_std, "noise std")?;
    let (mf, nf) = (m as f64, n as f64);
    let amplitude = 2.0 * libm::sqrt(nf) * avg_power / (nf - 1.0);
    let half_gap = amplitude / (2.0 * (mf - 1.0));
    let pre = 2.0 * (mf - 1.0) / (mf * libm::log2(mf));
    Ok(pre * q_function(half_gap / noise_std))
}

/// Peak chip over ensemble-mean chip.
pub fn papr(chips: &[f64]) -> Result<f64> {
    if chips.is_empty() {
        return Err(Error::ZeroSignal);
    }
    let mean = chips.iter().sum::<f64>() / chips.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::ZeroSignal);
    }
    let peak = chips.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(peak / mean)
}

/// Bits per chip of M-PAM HCM: `(N - 1)/N log2 M`.
pub fn hcm_rate(n: usize, m: usize) -> f64 {
    (n as f64 - 1.0) / n as f64 * libm::log2(m as f64)
}

/// Bits per chip of M-QAM ACO-OFDM: `N/4` data carriers per `N` chips.
pub fn aco_rate(n: usize, m: usize) -> f64 {
    (n / 4) as f64 * libm::log2(m as f64) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(-1.3) - (1.0 - q_function(1.3))).abs() < 1e-15);
        // mpmath: 0.5*erfc(1/sqrt(2)), 0.5*erfc(5/sqrt(2)), 0.5*erfc(8/sqrt(2))
        let cases = [
            (1.0, 0.158_655_253_931_457_05),
            (5.0, 2.866_515_718_791_939e-7),
            (8.0, 6.220_960_574_271_784e-16),
        ];
        for (x, want) in cases {
            assert!(((q_function(x) - want) / want).abs() < 1e-12, "Q({x})");
        }
    }

    #[test]
    fn aco_power_limits() {
        let p = aco_average_power(1.0, 100.0).unwrap();
        assert!((p - 0.398_942_280_401_432_7).abs() < 1e-9);
        assert!(aco_average_power(1e-9, 0.5).unwrap() < 1e-9);
        assert!(aco_average_power(0.0, 0.5).is_err());
        assert!(aco_average_power(1.0, -0.5).is_err());
    }

    #[test]
    fn clip_variance_limits() {
        assert!(aco_clip_variance(0.05, 0.5).unwrap() < 1e-20);
        assert!((aco_clip_variance(0.3, 0.0).unwrap() - 0.045).abs() < 1e-15);
        assert!(aco_clip_variance(0.0, 0.5).is_err());
    }

    #[test]
    fn monotone_in_sigma() {
        let mut last_p = 0.0;
        let mut last_v = -1.0;
        for i in 1..200 {
            let s = i as f64 * 0.005;
            let p = aco_average_power(s, 0.5).unwrap();
            let v = aco_clip_variance(s, 0.5).unwrap();
            assert!(p > last_p);
            assert!(v >= last_v);
            assert!(p < 0.25);
            last_p = p;
            last_v = v;
        }
    }

    #[test]
    fn clip_variance_nonincreasing_in_peak() {
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let v = aco_clip_variance(0.2, i as f64 * 0.02).unwrap();
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn sigma_inversion_round_trip() {
        for target in [1e-3, 0.01, 0.1, 0.2, 0.24] {
            let s = aco_sigma_for_power(target, 0.5).unwrap();
            let p = aco_average_power(s, 0.5).unwrap();
            assert!(((p - target) / target).abs() < 1e-8);
        }
        assert!(matches!(
            aco_sigma_for_power(0.25, 0.5),
            Err(Error::PowerUnreachable { .. })
        ));
    }

    #[test]
    fn snr_composition() {
        let s = 0.1;
        let vn = 1e-5;
        let snr = aco_snr(s, 0.5, vn).unwrap();
        let vuc = aco_clip_variance(s, 0.5).unwrap();
        assert!((snr - s * s / (vn + vuc)).abs() < 1e-9);
        // deep backoff: clipping negligible, doubling noise halves SNR
        let a = aco_snr(0.02, 0.5, 1e-6).unwrap();
        let b = aco_snr(0.02, 0.5, 2e-6).unwrap();
        assert!((a - 400.0).abs() < 1e-6);
        assert!((a / b - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ber_limits() {
        assert!((ber_ofdm_analytic(16, 0.0).unwrap() - 0.375).abs() < 1e-15);
        assert!(ber_ofdm_analytic(16, 1e6).unwrap() < 1e-300);
        assert!(ber_ofdm_analytic(8, 1.0).is_err());
        let b = ber_hcm_analytic(2, 0.01, 0.01).unwrap();
        assert!((b - 0.5 * q_function(1.0)).abs() < 1e-15);
        assert!((ber_hcm_analytic(4, 0.0, 1.0).unwrap() - 3.0 / 16.0).abs() < 1e-15);
        assert!(ber_hcm_analytic(2, 0.1, 0.00316).unwrap() < 1e-200);
    }

    #[test]
    fn decoder_ber_ook() {
        let n = 128;
        let p = 0.1;
        let sn = 3e-3;
        let a = 2.0 * libm::sqrt(128.0) * p / 127.0;
        let want = q_function(a / 2.0 / sn);
        assert!((ber_hcm_decoder(2, n, p, sn).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn papr_and_rates() {
        assert_eq!(papr(&[0.25; 10]).unwrap(), 1.0);
        assert!(papr(&[]).is_err());
        assert!(papr(&[0.0, 0.0]).is_err());
        assert_eq!(hcm_rate(128, 2), 127.0 / 128.0);
        assert_eq!(hcm_rate(4, 4), 1.5);
        assert_eq!(aco_rate(128, 16), 1.0);
    }
}
