//! Hadamard coded modulation.
//!
//! A data vector `u` of length `N` (PAM amplitudes in `[0, 1]`, `u[0] = 0`)
//! weights the rows of the binary Hadamard matrix `H` and its complement:
//!
//! ```text
//! x = (1/sqrt(N)) (u H + (1 - u) H̄)
//!   = (1/sqrt(N)) fwht(u) + (sqrt(N)/2) [0, 1, ..., 1]
//! ```
//!
//! The receiver applies one more transform, `v = (1/sqrt(N)) fwht(y)`, and
//! in an ideal channel gets `v[k] = u[k] - 1/2` for `k >= 1`. A DC shift of
//! the received chips only moves `v[0]`, which carries no data; DC-removed
//! HCM uses that to subtract each symbol's minimum chip before transmission.

use alloc::vec;
use alloc::vec::Vec;

use crate::transforms::{fwht_in_place, HadamardOrder};
use crate::{Error, Result};

#[inline]
pub(crate) fn gray_encode(i: usize) -> usize {
    i ^ (i >> 1)
}

#[inline]
pub(crate) fn gray_decode(g: usize) -> usize {
    let mut i = g;
    let mut s = g >> 1;
    while s != 0 {
        i ^= s;
        s >>= 1;
    }
    i
}

/// Writes `value` as `width` bits, most significant first.
#[inline]
pub(crate) fn write_bits(value: usize, out: &mut [bool]) {
    let width = out.len();
    for (b, slot) in out.iter_mut().enumerate() {
        *slot = (value >> (width - 1 - b)) & 1 == 1;
    }
}

#[inline]
pub(crate) fn read_bits(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Unipolar M-PAM: `M` equally spaced levels `i / (M - 1)` in `[0, 1]`,
/// Gray labeled (`M = 4`: `00, 01, 11, 10` for levels `0, 1/3, 2/3, 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PamConstellation {
    order: usize,
    bits: usize,
}

impl PamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if order >= 2 && order.is_power_of_two() {
            Ok(PamConstellation {
                order,
                bits: order.trailing_zeros() as usize,
            })
        } else {
            Err(Error::InvalidConstellation(order))
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_level(&self) -> usize {
        self.bits
    }

    #[inline]
    pub fn level(&self, index: usize) -> f64 {
        index as f64 / (self.order - 1) as f64
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.level(i)).collect()
    }

    #[inline]
    pub fn map(&self, bits: &[bool]) -> f64 {
        self.level(gray_decode(read_bits(bits)))
    }

    /// Slices an amplitude estimate in `[0, 1]` to the nearest level and
    /// writes its Gray label.
    #[inline]
    pub fn slice(&self, amplitude: f64, out: &mut [bool]) {
        let top = (self.order - 1) as f64;
        let idx = libm::round(amplitude * top).clamp(0.0, top) as usize;
        write_bits(gray_encode(idx), out);
    }
}

/// Which HCM waveform the encoder emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcmVariant {
    Plain,
    /// Each symbol shifted so its minimum chip is zero.
    DcRemoved,
}

/// HCM encoder/decoder for a fixed order and PAM constellation.
#[derive(Debug, Clone)]
pub struct HcmCodec {
    order: HadamardOrder,
    pam: PamConstellation,
    inv_sqrt_n: f64,
    offset: f64,
}

impl HcmCodec {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let order = HadamardOrder::new(n)?;
        let pam = PamConstellation::new(m)?;
        let sqrt_n = libm::sqrt(n as f64);
        Ok(HcmCodec {
            order,
            pam,
            inv_sqrt_n: 1.0 / sqrt_n,
            offset: sqrt_n / 2.0,
        })
    }

    pub fn n(&self) -> usize {
        self.order.get()
    }

    pub fn pam(&self) -> PamConstellation {
        self.pam
    }

    /// `(N - 1) log2 M`: component 0 never carries data.
    pub fn bits_per_symbol(&self) -> usize {
        (self.n() - 1) * self.pam.bits_per_level()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n() {
            Ok(())
        } else {
            Err(Error::InvalidLength {
                expected: self.n(),
                actual: len,
            })
        }
    }

    pub fn map_into(&self, bits: &[bool], u: &mut [f64]) -> Result<()> {
        if bits.len() != self.bits_per_symbol() {
            return Err(Error::BitCount {
                expected: self.bits_per_symbol(),
                actual: bits.len(),
            });
        }
        self.check_len(u.len())?;
        let w = self.pam.bits_per_level();
        u[0] = 0.0;
        for (slot, chunk) in u[1..].iter_mut().zip(bits.chunks_exact(w)) {
            *slot = self.pam.map(chunk);
        }
        Ok(())
    }

    pub fn pam_map(&self, bits: &[bool]) -> Result<Vec<f64>> {
        let mut u = vec![0.0; self.n()];
        self.map_into(bits, &mut u)?;
        Ok(u)
    }

    /// Slices decoder output `v` (already divided by any transmit gain).
    /// `v[0]` is ignored.
    pub fn demap_into(&self, v: &[f64], bits: &mut [bool]) -> Result<()> {
        self.check_len(v.len())?;
        if bits.len() != self.bits_per_symbol() {
            return Err(Error::BitCount {
                expected: self.bits_per_symbol(),
                actual: bits.len(),
            });
        }
        let w = self.pam.bits_per_level();
        for (soft, chunk) in v[1..].iter().zip(bits.chunks_exact_mut(w)) {
            self.pam.slice(soft + 0.5, chunk);
        }
        Ok(())
    }

    pub fn pam_demap(&self, v: &[f64]) -> Result<Vec<bool>> {
        let mut bits = vec![false; self.bits_per_symbol()];
        self.demap_into(v, &mut bits)?;
        Ok(bits)
    }

    fn validate_data(&self, u: &[f64]) -> Result<()> {
        self.check_len(u.len())?;
        if u[0] != 0.0 {
            return Err(Error::ReservedSlot(u[0]));
        }
        for (index, &value) in u.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { index, value });
            }
        }
        Ok(())
    }

    pub fn encode_into(&self, u: &[f64], variant: HcmVariant, x: &mut [f64]) -> Result<()> {
        self.validate_data(u)?;
        self.check_len(x.len())?;
        x.copy_from_slice(u);
        fwht_in_place(x)?;
        for c in x.iter_mut() {
            *c *= self.inv_sqrt_n;
        }
        for c in x[1..].iter_mut() {
            *c += self.offset;
        }
        if variant == HcmVariant::DcRemoved {
            remove_dc(x);
        }
        Ok(())
    }

    pub fn encode(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n()];
        self.encode_into(u, HcmVariant::Plain, &mut x)?;
        Ok(x)
    }

    pub fn dcr_encode(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n()];
        self.encode_into(u, HcmVariant::DcRemoved, &mut x)?;
        Ok(x)
    }

    /// `v = (1/sqrt(N)) y S^T`, in place.
    pub fn decode_in_place(&self, y: &mut [f64]) -> Result<()> {
        self.check_len(y.len())?;
        fwht_in_place(y)?;
        for c in y.iter_mut() {
            *c *= self.inv_sqrt_n;
        }
        Ok(())
    }

    pub fn decode(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut v = y.to_vec();
        self.decode_in_place(&mut v)?;
        Ok(v)
    }
}

/// Subtracts the minimum chip, returning the amount removed.
pub fn remove_dc(x: &mut [f64]) -> f64 {
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    if min.is_finite() && min != 0.0 {
        x.iter_mut().for_each(|c| *c -= min);
    }
    min
}

/// Intra-symbol chip permutation. Transmission slot `t` carries chip
/// `perm[t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut inverse = vec![usize::MAX; n];
        for (t, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::InvalidPermutation);
            }
            inverse[p] = t;
        }
        Ok(Interleaver { perm, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let perm: Vec<usize> = (0..n).collect();
        Interleaver {
            inverse: perm.clone(),
            perm,
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn into_perm(self) -> Vec<usize> {
        self.perm
    }

    fn check(&self, a: usize, b: usize) -> Result<()> {
        if a == self.len() && b == self.len() {
            Ok(())
        } else {
            Err(Error::InvalidLength {
                expected: self.len(),
                actual: if a == self.len() { b } else { a },
            })
        }
    }

    pub fn interleave_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(x.len(), out.len())?;
        for (o, &p) in out.iter_mut().zip(&self.perm) {
            *o = x[p];
        }
        Ok(())
    }

    pub fn deinterleave_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(y.len(), out.len())?;
        for (&v, &p) in y.iter().zip(&self.perm) {
            out[p] = v;
        }
        Ok(())
    }

    pub fn interleave(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.interleave_into(x, &mut out)?;
        Ok(out)
    }

    pub fn deinterleave(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; y.len()];
        self.deinterleave_into(y, &mut out)?;
        Ok(out)
    }
}

/// Prepends the last `prefix` chips of `x`.
pub fn add_cyclic_prefix(x: &[f64], prefix: usize) -> Result<Vec<f64>> {
    if prefix >= x.len() {
        return Err(Error::CyclicPrefix {
            prefix,
            symbol: x.len(),
        });
    }
    let mut out = Vec::with_capacity(x.len() + prefix);
    out.extend_from_slice(&x[x.len() - prefix..]);
    out.extend_from_slice(x);
    Ok(out)
}

pub fn strip_cyclic_prefix(y: &[f64], prefix: usize) -> Result<&[f64]> {
    if y.len() < 2 * prefix + 1 {
        return Err(Error::CyclicPrefix {
            prefix,
            symbol: y.len().saturating_sub(prefix),
        });
    }
    Ok(&y[prefix..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::BinaryHadamard;
    use alloc::vec;

    // (1/sqrt(N)) (u H + (1 - u) H̄), straight from the matrix definition.
    fn direct_encode(u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let h = BinaryHadamard::new(n).unwrap();
        let s = 1.0 / libm::sqrt(n as f64);
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| u[i] * h.get(i, j) as f64 + (1.0 - u[i]) * h.complement(i, j) as f64)
                    .sum::<f64>()
                    * s
            })
            .collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn encoder_examples() {
        let r = 1.0 / libm::sqrt(2.0);
        let c2 = HcmCodec::new(2, 2).unwrap();
        assert!(close(&c2.encode(&[0.0, 1.0]).unwrap(), &[r, 0.0], 1e-15));
        assert!(close(&c2.encode(&[0.0, 0.0]).unwrap(), &[0.0, r], 1e-15));
        let c4 = HcmCodec::new(4, 2).unwrap();
        assert!(close(
            &c4.encode(&[0.0, 1.0, 0.0, 0.0]).unwrap(),
            &[0.5, 0.5, 1.5, 0.5],
            1e-15
        ));
    }

    #[test]
    fn fast_path_matches_matrix_form() {
        let codec = HcmCodec::new(16, 4).unwrap();
        let levels = codec.pam().levels();
        let mut u = vec![0.0; 16];
        for trial in 0..50usize {
            for (k, slot) in u.iter_mut().enumerate().skip(1) {
                *slot = levels[(k * 7 + trial * 3 + k * k * trial) % 4];
            }
            assert!(close(&codec.encode(&u).unwrap(), &direct_encode(&u), 1e-12));
        }
    }

    #[test]
    fn decoder_examples() {
        let c2 = HcmCodec::new(2, 2).unwrap();
        let v = c2.decode(&c2.encode(&[0.0, 1.0]).unwrap()).unwrap();
        assert!((v[1] - 0.5).abs() < 1e-15);
        let v = c2.decode(&c2.encode(&[0.0, 0.0]).unwrap()).unwrap();
        assert!((v[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn dc_shift_only_moves_first_component() {
        let codec = HcmCodec::new(8, 2).unwrap();
        let u = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0];
        let x = codec.encode(&u).unwrap();
        let v = codec.decode(&x).unwrap();
        let shifted: Vec<f64> = x.iter().map(|c| c + 0.7).collect();
        let w = codec.decode(&shifted).unwrap();
        for k in 1..8 {
            assert!((v[k] - w[k]).abs() < 1e-12);
            assert!((v[k] - (u[k] - 0.5)).abs() < 1e-12);
        }
        assert!((w[0] - v[0] - libm::sqrt(8.0) * 0.7).abs() < 1e-12);
    }

    #[test]
    fn encoder_rejects_bad_data() {
        let codec = HcmCodec::new(4, 2).unwrap();
        assert_eq!(codec.encode(&[1.0, 0.0, 0.0, 0.0]), Err(Error::ReservedSlot(1.0)));
        assert_eq!(
            codec.encode(&[0.0, 1.5, 0.0, 0.0]),
            Err(Error::OutOfRange { index: 1, value: 1.5 })
        );
        assert!(codec.encode(&[0.0, 1.0]).is_err());
        assert!(codec.decode(&[0.0; 3]).is_err());
    }

    #[test]
    fn dcr_examples() {
        let codec = HcmCodec::new(4, 2).unwrap();
        let x = codec.dcr_encode(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(close(&x, &[0.0, 0.0, 1.0, 0.0], 1e-15));
        let mut already = vec![0.0, 2.0, 1.0];
        assert_eq!(remove_dc(&mut already), 0.0);
        assert_eq!(already, vec![0.0, 2.0, 1.0]);
    }

    #[test]
    fn complement_pair_removes_dc() {
        // u and its complement: min x1 + min x2 >= (N/2 - 1)/sqrt(N)
        let n = 8;
        let codec = HcmCodec::new(n, 2).unwrap();
        let bound = (n as f64 / 2.0 - 1.0) / libm::sqrt(n as f64);
        assert!((bound - 3.0 / (2.0 * libm::sqrt(2.0))).abs() < 1e-15);
        for mask in 0..(1u32 << (n - 1)) {
            let u: Vec<f64> = (0..n)
                .map(|k| if k > 0 && mask >> (k - 1) & 1 == 1 { 1.0 } else { 0.0 })
                .collect();
            let ubar: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { 1.0 - u[k] }).collect();
            let m1 = codec.encode(&u).unwrap().into_iter().fold(f64::INFINITY, f64::min);
            let m2 = codec.encode(&ubar).unwrap().into_iter().fold(f64::INFINITY, f64::min);
            assert!(m1 + m2 >= bound - 1e-12);
        }
    }

    #[test]
    fn pam_gray_labels() {
        let pam = PamConstellation::new(4).unwrap();
        assert_eq!(pam.map(&[false, false]), 0.0);
        assert!((pam.map(&[false, true]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((pam.map(&[true, true]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pam.map(&[true, false]), 1.0);
        assert!(PamConstellation::new(3).is_err());
        assert!(PamConstellation::new(1).is_err());
    }

    #[test]
    fn ook_mapping_is_identity() {
        let codec = HcmCodec::new(4, 2).unwrap();
        assert_eq!(codec.pam_map(&[true, false, true]).unwrap(), vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(
            codec.pam_map(&[true, false]),
            Err(Error::BitCount { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn interleaver_examples() {
        let x = [0.0, 0.0, 1.0, 0.0];
        let id = Interleaver::identity(4);
        assert_eq!(id.interleave(&x).unwrap(), x.to_vec());
        let rev = Interleaver::new(vec![3, 2, 1, 0]).unwrap();
        assert_eq!(rev.interleave(&x).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(rev.deinterleave(&rev.interleave(&x).unwrap()).unwrap(), x.to_vec());
        assert_eq!(Interleaver::new(vec![0, 0, 1]), Err(Error::InvalidPermutation));
        assert_eq!(Interleaver::new(vec![0, 3, 1]), Err(Error::InvalidPermutation));
        assert!(rev.interleave(&[0.0; 3]).is_err());
        for (t, &p) in rev.perm().iter().enumerate() {
            assert_eq!(rev.inverse()[p], t);
        }
    }

    #[test]
    fn cyclic_prefix_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(add_cyclic_prefix(&x, 0).unwrap(), x.to_vec());
        assert_eq!(add_cyclic_prefix(&x, 2).unwrap(), vec![3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(strip_cyclic_prefix(&add_cyclic_prefix(&x, 2).unwrap(), 2).unwrap(), &x);
        assert_eq!(
            add_cyclic_prefix(&x, 4),
            Err(Error::CyclicPrefix { prefix: 4, symbol: 4 })
        );
    }
}
