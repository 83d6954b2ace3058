//! End-to-end symbol chains for Monte Carlo BER estimation.
//!
//! One [`Link`] owns the modem, channel state and scratch buffers for a
//! single worker. Each call to [`Link::run_batch`] starts from a fresh
//! channel delay line and pushes a run of consecutive symbols through
//!
//! ```text
//! bits -> map -> encode -> scale -> interleave -> CP -> limiter -> FIR
//!      -> AWGN -> strip CP -> deinterleave -> decode -> slice -> compare
//! ```
//!
//! Noise is drawn per symbol in logical chip order (prefix samples last),
//! then placed at the transmission slot that carries each chip. The noise
//! is still white, and schemes that differ only in interleaving see the
//! same noise realization for the same seed.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aco_ofdm::{clip_negative, AcoOfdm};
use crate::analysis::aco_sigma_for_power;
use crate::channel::{AwgnSource, FirChannel, HardLimiter};
use crate::hcm::{HcmCodec, HcmVariant, Interleaver};
use crate::{Error, Result};

/// Seed for the fixed ensemble that calibrates DC-removed HCM power.
pub const DCR_CALIBRATION_SEED: u64 = 0x5eed_dc2e;
pub const DCR_CALIBRATION_SYMBOLS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Hcm,
    DcrHcm,
    InterleavedHcm,
    AcoOfdm,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Hcm, Scheme::DcrHcm, Scheme::InterleavedHcm, Scheme::AcoOfdm];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Hcm => "hcm",
            Scheme::DcrHcm => "dcr-hcm",
            Scheme::InterleavedHcm => "interleaved-hcm",
            Scheme::AcoOfdm => "aco-ofdm",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModemConfig {
    pub scheme: Scheme,
    pub n: usize,
    /// PAM order for HCM schemes, square QAM order for ACO-OFDM.
    pub m: usize,
    pub cp_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub p0: f64,
    pub taps: Vec<f64>,
    pub noise_var: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchTally {
    pub symbols: u64,
    pub bits: u64,
    pub errors: u64,
    /// Data chips emitted (cyclic prefix excluded).
    pub chips: u64,
    /// Samples the limiter clamped at the peak.
    pub clipped: u64,
}

impl BatchTally {
    pub fn merge(&mut self, other: &BatchTally) {
        self.symbols += other.symbols;
        self.bits += other.bits;
        self.errors += other.errors;
        self.chips += other.chips;
        self.clipped += other.clipped;
    }
}

#[derive(Debug, Clone)]
enum Modem {
    Hcm {
        codec: HcmCodec,
        variant: HcmVariant,
        interleaver: Option<Interleaver>,
        amplitude: f64,
        u: Vec<f64>,
        x: Vec<f64>,
    },
    Aco {
        modem: AcoOfdm,
        scale: f64,
        data: Vec<Complex64>,
        spectrum: Vec<Complex64>,
        softs: Vec<Complex64>,
    },
}

/// Mean chip of unit-amplitude DC-removed HCM over a fixed random ensemble.
pub fn dcr_unit_mean(codec: &HcmCodec, symbols: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = codec.n();
    let mut bits = vec![false; codec.bits_per_symbol()];
    let mut u = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    for _ in 0..symbols {
        fill_bits(&mut rng, &mut bits);
        codec.map_into(&bits, &mut u).expect("sized buffers");
        codec.encode_into(&u, HcmVariant::DcRemoved, &mut x).expect("sized buffers");
        total += x.iter().sum::<f64>();
    }
    total / (symbols * n) as f64
}

/// Mean chip of unit-amplitude HCM with uniform data: `(N - 1) / (2 sqrt(N))`.
pub fn hcm_unit_mean(n: usize) -> f64 {
    (n as f64 - 1.0) / (2.0 * libm::sqrt(n as f64))
}

pub fn fill_bits<R: RngCore>(rng: &mut R, bits: &mut [bool]) {
    for chunk in bits.chunks_mut(64) {
        let word = rng.next_u64();
        for (i, b) in chunk.iter_mut().enumerate() {
            *b = (word >> i) & 1 == 1;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Link {
    modem: Modem,
    n: usize,
    cp: usize,
    limiter: HardLimiter,
    taps: Vec<f64>,
    noise_var: f64,
    tx_bits: Vec<bool>,
    rx_bits: Vec<bool>,
    stream: Vec<f64>,
    noise: Vec<f64>,
    body: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Link {
    /// Builds a chain targeting `avg_power` watts of average optical power
    /// (before the limiter). `interleaver` is required for, and only used
    /// by, [`Scheme::InterleavedHcm`].
    pub fn new(
        modem: &ModemConfig,
        channel: &ChannelConfig,
        avg_power: f64,
        interleaver: Option<&Interleaver>,
    ) -> Result<Self> {
        if !(avg_power > 0.0 && avg_power.is_finite()) {
            return Err(Error::NonPositive("average power"));
        }
        if modem.cp_len >= modem.n {
            return Err(Error::CyclicPrefix {
                prefix: modem.cp_len,
                symbol: modem.n,
            });
        }
        let limiter = HardLimiter::new(channel.p0)?;
        // validates taps
        FirChannel::new(channel.taps.clone())?;
        if !(channel.noise_var >= 0.0 && channel.noise_var.is_finite()) {
            return Err(Error::NonPositive("noise variance"));
        }
        let n = modem.n;
        let (state, bits) = match modem.scheme {
            Scheme::AcoOfdm => {
                let aco = AcoOfdm::new(n, modem.m)?;
                let sigma = aco_sigma_for_power(avg_power, channel.p0)?;
                let bits = aco.bits_per_frame();
                let k = aco.symbols_per_frame();
                (
                    Modem::Aco {
                        scale: aco.time_scale(sigma),
                        modem: aco,
                        data: vec![Complex64::new(0.0, 0.0); k],
                        spectrum: vec![Complex64::new(0.0, 0.0); n],
                        softs: vec![Complex64::new(0.0, 0.0); k],
                    },
                    bits,
                )
            }
            scheme => {
                let codec = HcmCodec::new(n, modem.m)?;
                let (variant, unit_mean) = if scheme == Scheme::DcrHcm {
                    (
                        HcmVariant::DcRemoved,
                        dcr_unit_mean(&codec, DCR_CALIBRATION_SYMBOLS, DCR_CALIBRATION_SEED),
                    )
                } else {
                    (HcmVariant::Plain, hcm_unit_mean(n))
                };
                let interleaver = if scheme == Scheme::InterleavedHcm {
                    let il = interleaver.ok_or(Error::MissingInterleaver)?;
                    if il.len() != n {
                        return Err(Error::InvalidLength {
                            expected: n,
                            actual: il.len(),
                        });
                    }
                    Some(il.clone())
                } else {
                    None
                };
                let bits = codec.bits_per_symbol();
                (
                    Modem::Hcm {
                        codec,
                        variant,
                        interleaver,
                        amplitude: avg_power / unit_mean,
                        u: vec![0.0; n],
                        x: vec![0.0; n],
                    },
                    bits,
                )
            }
        };
        Ok(Link {
            modem: state,
            n,
            cp: modem.cp_len,
            limiter,
            taps: channel.taps.clone(),
            noise_var: channel.noise_var,
            tx_bits: vec![false; bits],
            rx_bits: vec![false; bits],
            stream: vec![0.0; n + modem.cp_len],
            noise: vec![0.0; n + modem.cp_len],
            body: vec![0.0; n],
            scratch: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.tx_bits.len()
    }

    /// Transmit amplitude factor: HCM chip scale, or the ACO-OFDM IDFT scale.
    pub fn gain(&self) -> f64 {
        match &self.modem {
            Modem::Hcm { amplitude, .. } => *amplitude,
            Modem::Aco { scale, .. } => *scale,
        }
    }

    /// Runs `symbols` consecutive symbols. Data bits come from `data`, noise
    /// from `noise`; the channel delay line starts empty.
    pub fn run_batch<R: RngCore>(
        &mut self,
        symbols: usize,
        data: &mut R,
        noise: &mut AwgnSource,
    ) -> BatchTally {
        let mut fir = FirChannel::new(self.taps.clone()).expect("validated taps");
        let mut tally = BatchTally::default();
        let (n, cp) = (self.n, self.cp);
        for _ in 0..symbols {
            fill_bits(data, &mut self.tx_bits);

            // transmitter: body chips into stream[cp..]
            let perm: Option<&[usize]> = match &mut self.modem {
                Modem::Hcm {
                    codec,
                    variant,
                    interleaver,
                    amplitude,
                    u,
                    x,
                } => {
                    codec.map_into(&self.tx_bits, u).expect("sized buffers");
                    codec.encode_into(u, *variant, x).expect("validated data");
                    let a = *amplitude;
                    x.iter_mut().for_each(|c| *c *= a);
                    let body = &mut self.stream[cp..];
                    match interleaver {
                        Some(il) => {
                            il.interleave_into(x, body).expect("sized buffers");
                            Some(il.perm())
                        }
                        None => {
                            body.copy_from_slice(x);
                            None
                        }
                    }
                }
                Modem::Aco {
                    modem,
                    scale,
                    data: syms,
                    spectrum,
                    ..
                } => {
                    let w = modem.qam().bits_per_symbol();
                    for (s, chunk) in syms.iter_mut().zip(self.tx_bits.chunks_exact(w)) {
                        *s = modem.qam().map_symbol(chunk);
                    }
                    modem.map_into(syms, spectrum).expect("sized buffers");
                    let body = &mut self.stream[cp..];
                    modem.synthesize_into(spectrum, *scale, body).expect("sized buffers");
                    clip_negative(body);
                    None
                }
            };
            if cp > 0 {
                self.stream.copy_within(n..n + cp, 0);
            }

            // channel
            tally.clipped += self.limiter.apply(&mut self.stream) as u64;
            fir.process(&mut self.stream);
            if self.noise_var > 0.0 {
                noise.fill(&mut self.noise);
                let (chip_noise, prefix_noise) = self.noise.split_at(n);
                for (s, z) in self.stream[..cp].iter_mut().zip(prefix_noise) {
                    *s += z;
                }
                let body = &mut self.stream[cp..];
                match perm {
                    Some(p) => {
                        for (s, &chip) in body.iter_mut().zip(p) {
                            *s += chip_noise[chip];
                        }
                    }
                    None => {
                        for (s, z) in body.iter_mut().zip(chip_noise) {
                            *s += z;
                        }
                    }
                }
            }

            // receiver
            let received = &self.stream[cp..];
            match &mut self.modem {
                Modem::Hcm {
                    codec,
                    interleaver,
                    amplitude,
                    ..
                } => {
                    match interleaver {
                        Some(il) => il.deinterleave_into(received, &mut self.body).expect("sized"),
                        None => self.body.copy_from_slice(received),
                    }
                    codec.decode_in_place(&mut self.body).expect("sized buffers");
                    let inv = 1.0 / *amplitude;
                    self.body.iter_mut().for_each(|v| *v *= inv);
                    codec.demap_into(&self.body, &mut self.rx_bits).expect("sized buffers");
                }
                Modem::Aco {
                    modem,
                    scale,
                    softs,
                    ..
                } => {
                    modem
                        .demodulate_into(received, *scale, &mut self.scratch, softs)
                        .expect("sized buffers");
                    let w = modem.qam().bits_per_symbol();
                    for (s, chunk) in softs.iter().zip(self.rx_bits.chunks_exact_mut(w)) {
                        modem.qam().slice_symbol(*s, chunk);
                    }
                }
            }

            let errors = self
                .tx_bits
                .iter()
                .zip(&self.rx_bits)
                .filter(|(a, b)| a != b)
                .count();
            tally.symbols += 1;
            tally.bits += self.tx_bits.len() as u64;
            tally.errors += errors as u64;
            tally.chips += n as u64;
        }
        tally
    }
}
