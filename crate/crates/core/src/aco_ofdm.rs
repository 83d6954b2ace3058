//! Asymmetrically clipped optical OFDM.
//!
//! Only odd subcarriers carry data, with Hermitian symmetry so the time
//! signal is real. Clipping the negative half then puts all the distortion
//! on even subcarriers and halves the odd-bin amplitudes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::hcm::{gray_decode, gray_encode, read_bits, write_bits};
use crate::transforms::DftPlan;
use crate::{Error, Result};

/// Square M-QAM, Gray coded per axis, unit average energy.
///
/// The first half of each symbol's bits selects the in-phase level, the
/// second half the quadrature level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamConstellation {
    order: usize,
    side: usize,
    bits_per_axis: usize,
    norm: f64,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        let side = libm::round(libm::sqrt(order as f64)) as usize;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            return Err(Error::InvalidConstellation(order));
        }
        Ok(QamConstellation {
            order,
            side,
            bits_per_axis: side.trailing_zeros() as usize,
            norm: libm::sqrt(2.0 * (order as f64 - 1.0) / 3.0),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    #[inline]
    fn axis_level(&self, index: usize) -> f64 {
        (2.0 * index as f64 - (self.side - 1) as f64) / self.norm
    }

    #[inline]
    fn axis_slice(&self, value: f64) -> usize {
        let top = (self.side - 1) as f64;
        libm::round((value * self.norm + top) / 2.0).clamp(0.0, top) as usize
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(self.order);
        for i in 0..self.side {
            for q in 0..self.side {
                pts.push(Complex64::new(self.axis_level(i), self.axis_level(q)));
            }
        }
        pts
    }

    #[inline]
    pub fn map_symbol(&self, bits: &[bool]) -> Complex64 {
        let (bi, bq) = bits.split_at(self.bits_per_axis);
        Complex64::new(
            self.axis_level(gray_decode(read_bits(bi))),
            self.axis_level(gray_decode(read_bits(bq))),
        )
    }

    /// Minimum-distance decision, which for a square grid is per axis.
    #[inline]
    pub fn slice_symbol(&self, soft: Complex64, out: &mut [bool]) {
        let (bi, bq) = out.split_at_mut(self.bits_per_axis);
        write_bits(gray_encode(self.axis_slice(soft.re)), bi);
        write_bits(gray_encode(self.axis_slice(soft.im)), bq);
    }

    pub fn map(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        let w = self.bits_per_symbol();
        if bits.len() % w != 0 {
            return Err(Error::BitCount {
                expected: (bits.len() / w + 1) * w,
                actual: bits.len(),
            });
        }
        Ok(bits.chunks_exact(w).map(|c| self.map_symbol(c)).collect())
    }

    pub fn demap(&self, softs: &[Complex64]) -> Vec<bool> {
        let w = self.bits_per_symbol();
        let mut bits = vec![false; softs.len() * w];
        for (s, chunk) in softs.iter().zip(bits.chunks_exact_mut(w)) {
            self.slice_symbol(*s, chunk);
        }
        bits
    }
}

/// ACO-OFDM modem of size `N` (a power of two, at least 4).
#[derive(Debug, Clone)]
pub struct AcoOfdm {
    n: usize,
    qam: QamConstellation,
    plan: DftPlan,
}

impl AcoOfdm {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidOrder(n));
        }
        Ok(AcoOfdm {
            n,
            qam: QamConstellation::new(m)?,
            plan: DftPlan::new(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn qam(&self) -> &QamConstellation {
        &self.qam
    }

    pub fn symbols_per_frame(&self) -> usize {
        self.n / 4
    }

    pub fn bits_per_frame(&self) -> usize {
        self.symbols_per_frame() * self.qam.bits_per_symbol()
    }

    /// Time-domain amplitude factor giving a pre-clipping standard
    /// deviation of `sigma` (the unscaled IDFT of unit-energy data on N/2
    /// bins has variance `1/(2N)`).
    pub fn time_scale(&self, sigma: f64) -> f64 {
        sigma * libm::sqrt(2.0 * self.n as f64)
    }

    /// `[0, u0, 0, u1, ..., u_{N/4-1}, 0, u*_{N/4-1}, ..., 0, u0*]`
    pub fn map_into(&self, data: &[Complex64], spectrum: &mut [Complex64]) -> Result<()> {
        let k = self.symbols_per_frame();
        if data.len() != k {
            return Err(Error::InvalidLength {
                expected: k,
                actual: data.len(),
            });
        }
        if spectrum.len() != self.n {
            return Err(Error::InvalidLength {
                expected: self.n,
                actual: spectrum.len(),
            });
        }
        spectrum.fill(Complex64::new(0.0, 0.0));
        for (i, s) in data.iter().enumerate() {
            spectrum[2 * i + 1] = *s;
            spectrum[self.n - 2 * i - 1] = s.conj();
        }
        Ok(())
    }

    pub fn aco_map(&self, data: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.n];
        self.map_into(data, &mut spectrum)?;
        Ok(spectrum)
    }

    /// Unclipped real time signal `scale * idft(spectrum)`. Consumes the
    /// spectrum buffer as scratch.
    pub fn synthesize_into(
        &self,
        spectrum: &mut [Complex64],
        scale: f64,
        out: &mut [f64],
    ) -> Result<()> {
        self.plan.inverse(spectrum)?;
        if out.len() != self.n {
            return Err(Error::InvalidLength {
                expected: self.n,
                actual: out.len(),
            });
        }
        for (o, c) in out.iter_mut().zip(spectrum.iter()) {
            *o = c.re * scale;
        }
        Ok(())
    }

    /// Scales the frame to pre-clip standard deviation `sigma` and clips the
    /// negative half, giving the nonnegative drive waveform.
    pub fn modulate(&self, spectrum: &[Complex64], sigma: f64) -> Result<Vec<f64>> {
        let mut scratch = spectrum.to_vec();
        let mut out = vec![0.0; self.n];
        self.synthesize_into(&mut scratch, self.time_scale(sigma), &mut out)?;
        clip_negative(&mut out);
        Ok(out)
    }

    /// Odd-bin symbol estimates from one received frame (prefix removed).
    /// `scale` is the transmit [`time_scale`](Self::time_scale); the factor
    /// 2 undoes the negative clipping.
    pub fn demodulate_into(
        &self,
        y: &[f64],
        scale: f64,
        scratch: &mut [Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        if y.len() != self.n || scratch.len() != self.n {
            return Err(Error::InvalidLength {
                expected: self.n,
                actual: y.len().min(scratch.len()),
            });
        }
        if out.len() != self.symbols_per_frame() {
            return Err(Error::InvalidLength {
                expected: self.symbols_per_frame(),
                actual: out.len(),
            });
        }
        for (s, &v) in scratch.iter_mut().zip(y) {
            *s = Complex64::new(v, 0.0);
        }
        self.plan.forward(scratch)?;
        let gain = 2.0 / scale;
        for (i, o) in out.iter_mut().enumerate() {
            *o = scratch[2 * i + 1] * gain;
        }
        Ok(())
    }

    pub fn demodulate(&self, y: &[f64], scale: f64) -> Result<Vec<Complex64>> {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.n];
        let mut out = vec![Complex64::new(0.0, 0.0); self.symbols_per_frame()];
        self.demodulate_into(y, scale, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// One-tap equalization of demodulated symbols for a known FIR channel.
    /// Not used by the reference experiments, which run without equalizer.
    pub fn equalize(&self, softs: &mut [Complex64], taps: &[f64]) {
        for (i, s) in softs.iter_mut().enumerate() {
            let k = 2 * i + 1;
            let mut h = Complex64::new(0.0, 0.0);
            for (l, &t) in taps.iter().enumerate() {
                let th = -2.0 * PI * (k * l) as f64 / self.n as f64;
                h += Complex64::new(libm::cos(th), libm::sin(th)) * t;
            }
            if h.norm_sqr() > 0.0 {
                *s /= h;
            }
        }
    }
}

pub fn clip_negative(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}
