//! Hadamard matrices and the fast transforms shared by both modems.
//!
//! [`fwht`] is unnormalized: `fwht(v) = v * S` with `S` the bipolar
//! Sylvester matrix, so `fwht(fwht(v)) = N * v`. Scaling by `1/sqrt(N)`
//! belongs to the modem equations that need it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Order of a Sylvester Hadamard matrix: `n = 2^k`, `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HadamardOrder(usize);

impl HadamardOrder {
    pub fn new(n: usize) -> Result<Self> {
        if n >= 2 && n.is_power_of_two() {
            Ok(HadamardOrder(n))
        } else {
            Err(Error::InvalidOrder(n))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn log2(self) -> u32 {
        self.0.trailing_zeros()
    }
}

/// Binary (0/1) Sylvester Hadamard matrix, obtained from the bipolar one
/// by replacing -1 with 0. Stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryHadamard {
    order: HadamardOrder,
    entries: Vec<u8>,
}

/// Sign of the Sylvester entry `(i, j)`: `+1` when `popcount(i & j)` is even.
#[inline]
pub fn sylvester_sign(i: usize, j: usize) -> i8 {
    if (i & j).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn build_binary_hadamard(order: HadamardOrder) -> BinaryHadamard {
    let n = order.get();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(u8::from(sylvester_sign(i, j) > 0));
        }
    }
    BinaryHadamard { order, entries }
}

impl BinaryHadamard {
    pub fn new(n: usize) -> Result<Self> {
        Ok(build_binary_hadamard(HadamardOrder::new(n)?))
    }

    pub fn order(&self) -> HadamardOrder {
        self.order
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.order.0 + col]
    }

    /// Entry of the complement matrix `H̄ = 1 - H`.
    #[inline]
    pub fn complement(&self, row: usize, col: usize) -> u8 {
        1 - self.get(row, col)
    }

    /// Entry of the bipolar matrix `S = H - H̄`.
    #[inline]
    pub fn bipolar(&self, row: usize, col: usize) -> i8 {
        2 * self.get(row, col) as i8 - 1
    }

    pub fn row(&self, row: usize) -> &[u8] {
        let n = self.order.0;
        &self.entries[row * n..(row + 1) * n]
    }

    pub fn row_weight(&self, row: usize) -> usize {
        self.row(row).iter().map(|&b| b as usize).sum()
    }
}

fn check_pow2(len: usize) -> Result<()> {
    if len >= 1 && len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidLength {
            expected: len.next_power_of_two(),
            actual: len,
        })
    }
}

/// In-place unnormalized Walsh-Hadamard transform (natural order).
pub fn fwht_in_place(v: &mut [f64]) -> Result<()> {
    check_pow2(v.len())?;
    let n = v.len();
    let mut half = 1;
    while half < n {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn fwht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

/// Inverse of [`fwht`]: the same butterfly scaled by `1/N`.
pub fn ifwht_in_place(v: &mut [f64]) -> Result<()> {
    fwht_in_place(v)?;
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

pub fn ifwht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    ifwht_in_place(&mut out)?;
    Ok(out)
}

/// Precomputed radix-2 DFT of a fixed power-of-two length.
///
/// Forward: `X[k] = sum_n x[n] e^{-2 pi j k n / N}` (unnormalized).
/// Inverse: `x[n] = (1/N) sum_k X[k] e^{+2 pi j k n / N}`.
#[derive(Debug, Clone)]
pub struct DftPlan {
    n: usize,
    // e^{-2 pi j m / N}, m < N/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl DftPlan {
    pub fn new(n: usize) -> Result<Self> {
        check_pow2(n)?;
        let twiddles = (0..n / 2)
            .map(|m| {
                let theta = -2.0 * PI * m as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(DftPlan { n, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, buf: &[Complex64]) -> Result<()> {
        if buf.len() == self.n {
            Ok(())
        } else {
            Err(Error::InvalidLength {
                expected: self.n,
                actual: buf.len(),
            })
        }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for block in buf.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(len / 2);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            len *= 2;
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf)?;
        self.transform(buf, false);
        Ok(())
    }

    pub fn inverse(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf)?;
        self.transform(buf, true);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|x| *x *= scale);
        Ok(())
    }
}

pub fn dft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = DftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.forward(&mut out)?;
    Ok(out)
}

/// `x = (1/N) u W`, `W[n][k] = e^{2 pi j k n / N}`.
pub fn idft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = DftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.inverse(&mut out)?;
    Ok(out)
}

/// Bipolar Sylvester matrix as dense `f64` rows. Mostly useful for tests
/// and brute-force checks.
pub fn bipolar_matrix(order: HadamardOrder) -> Vec<Vec<f64>> {
    let n = order.get();
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = sylvester_sign(i, j) as f64;
        }
    }
    rows
}
