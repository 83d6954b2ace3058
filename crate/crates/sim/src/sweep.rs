//! Monte Carlo BER sweeps.
//!
//! A point is simulated in fixed-size batches of symbols. Batch `b` of a
//! point with seed `s` draws data bits from ChaCha8 stream `2b` and noise
//! from stream `2b + 1` under key `s`, so every batch is addressable on its
//! own. Batches are dispatched in waves whose sizes do not depend on the
//! worker count, and tallies are folded in batch order; the stop rule is
//! checked after every batch, so later batches of the final wave are
//! discarded and the result is the same for any number of workers.

use hcm_core::channel::{dbm_to_watts, AwgnSource};
use hcm_core::hcm::Interleaver;
use hcm_core::link::{BatchTally, ChannelConfig, Link, ModemConfig, Scheme};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const BATCH_SYMBOLS: usize = 32;
const MAX_WAVE: usize = 64;

pub const DEFAULT_MIN_ERRORS: u64 = 200;
pub const DEFAULT_MAX_BITS: u64 = 20_000_000;
pub const DEFAULT_SEED: u64 = 20_170_301;
pub const DEFAULT_P0: f64 = 0.5;
/// Recorded in manifests only; simulation runs in discrete time.
pub const DATA_RATE_BPS: f64 = 100e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_errors: DEFAULT_MIN_ERRORS,
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

impl StopRule {
    pub fn done(&self, t: &BatchTally) -> bool {
        t.errors >= self.min_errors || t.bits >= self.max_bits
    }

    /// A rule that can never be met by its error criterion.
    pub fn unreachable(&self) -> bool {
        self.max_bits == 0 || self.min_errors > self.max_bits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(with = "scheme_name")]
    pub scheme: Scheme,
    pub n: usize,
    pub m: usize,
    pub cp_len: usize,
    pub taps: Vec<f64>,
    /// Receiver noise variance in dBm; `None` is a noiseless channel.
    pub noise_dbm: Option<f64>,
    pub p0: f64,
    pub powers_dbm: Vec<f64>,
    pub stop: StopRule,
    pub base_seed: u64,
    /// Chip permutation, used by interleaved HCM only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interleaver: Option<Vec<usize>>,
}

mod scheme_name {
    use hcm_core::link::Scheme;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &Scheme, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(s.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Scheme, D::Error> {
        let name = String::deserialize(de)?;
        Scheme::parse(&name).ok_or_else(|| D::Error::custom(format!("unknown scheme `{name}`")))
    }
}

#[derive(Debug)]
pub enum SpecError {
    EmptyGrid,
    UnsortedGrid,
    Point { power_dbm: f64, source: hcm_core::Error },
    Core(hcm_core::Error),
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecError::EmptyGrid => write!(f, "power grid is empty"),
            SpecError::UnsortedGrid => write!(f, "power grid must be strictly ascending"),
            SpecError::Point { power_dbm, source } => write!(f, "at {power_dbm} dBm: {source}"),
            SpecError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SpecError {}

impl From<hcm_core::Error> for SpecError {
    fn from(e: hcm_core::Error) -> Self {
        SpecError::Core(e)
    }
}

impl SweepSpec {
    pub fn modem(&self) -> ModemConfig {
        ModemConfig {
            scheme: self.scheme,
            n: self.n,
            m: self.m,
            cp_len: self.cp_len,
        }
    }

    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig {
            p0: self.p0,
            taps: self.taps.clone(),
            noise_var: self.noise_dbm.map_or(0.0, dbm_to_watts),
        }
    }

    pub fn point_seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    fn interleaver_for_link(&self) -> Result<Option<Interleaver>, SpecError> {
        match (&self.interleaver, self.scheme) {
            (Some(p), Scheme::InterleavedHcm) => Ok(Some(Interleaver::new(p.clone())?)),
            _ => Ok(None),
        }
    }

    pub fn link(&self, power_dbm: f64) -> Result<Link, SpecError> {
        let il = self.interleaver_for_link()?;
        Link::new(&self.modem(), &self.channel(), dbm_to_watts(power_dbm), il.as_ref()).map_err(|source| {
            SpecError::Point { power_dbm, source }
        })
    }

    /// Checks the grid and builds every point's chain once.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.powers_dbm.is_empty() {
            return Err(SpecError::EmptyGrid);
        }
        if self.powers_dbm.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SpecError::UnsortedGrid);
        }
        for &p in &self.powers_dbm {
            self.link(p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub power_dbm: f64,
    pub ber: f64,
    /// Half-width of the Wald 95% interval.
    pub ci95: f64,
    pub bits: u64,
    pub errors: u64,
    pub symbols: u64,
    pub chips: u64,
    pub clipped: u64,
    /// Bit budget ran out before the error target.
    pub flagged: bool,
}

impl BerPoint {
    fn from_tally(power_dbm: f64, t: &BatchTally, stop: &StopRule) -> Self {
        let n = t.bits as f64;
        let ber = if t.bits == 0 { 0.0 } else { t.errors as f64 / n };
        let ci95 = if t.bits == 0 {
            0.0
        } else {
            1.96 * (ber * (1.0 - ber) / n).sqrt()
        };
        BerPoint {
            power_dbm,
            ber,
            ci95,
            bits: t.bits,
            errors: t.errors,
            symbols: t.symbols,
            chips: t.chips,
            clipped: t.clipped,
            flagged: t.errors < stop.min_errors,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    #[serde(with = "scheme_name")]
    pub scheme: Scheme,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn flagged(&self) -> impl Iterator<Item = &BerPoint> {
        self.points.iter().filter(|p| p.flagged)
    }

    pub fn powers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.power_dbm).collect()
    }

    pub fn bers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ber).collect()
    }
}

fn run_batch(proto: &Link, seed: u64, batch: u64, noise_var: f64) -> BatchTally {
    let mut link = proto.clone();
    let mut data = ChaCha8Rng::seed_from_u64(seed);
    data.set_stream(2 * batch);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(2 * batch + 1);
    let mut noise = AwgnSource::from_rng(noise_var, noise_rng).expect("validated variance");
    link.run_batch(BATCH_SYMBOLS, &mut data, &mut noise)
}

/// Simulates one power point with the given seed. `pool` selects the
/// worker pool; the result does not depend on its size.
pub fn run_point(
    spec: &SweepSpec,
    power_dbm: f64,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<BerPoint, SpecError> {
    let proto = spec.link(power_dbm)?;
    let noise_var = spec.channel().noise_var;
    let stop = spec.stop;
    let mut total = BatchTally::default();
    let mut next = 0u64;
    let mut wave = 1usize;
    'outer: loop {
        let first = next;
        let tallies: Vec<BatchTally> = pool.install(|| {
            (first..first + wave as u64)
                .into_par_iter()
                .map(|b| run_batch(&proto, seed, b, noise_var))
                .collect()
        });
        for t in &tallies {
            total.merge(t);
            if stop.done(&total) {
                break 'outer;
            }
        }
        next += wave as u64;
        wave = (wave * 2).min(MAX_WAVE);
    }
    Ok(BerPoint::from_tally(power_dbm, &total, &stop))
}

pub fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

/// Runs every grid point; point `i` uses seed `base_seed + i`.
pub fn run_sweep(spec: &SweepSpec, pool: &rayon::ThreadPool) -> Result<BerCurve, SpecError> {
    spec.validate()?;
    let points = spec
        .powers_dbm
        .iter()
        .enumerate()
        .map(|(i, &p)| run_point(spec, p, spec.point_seed(i), pool))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BerCurve {
        scheme: spec.scheme,
        points,
    })
}
