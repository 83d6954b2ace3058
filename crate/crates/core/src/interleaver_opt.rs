//! Interleaver search against intra-symbol ISI.
//!
//! For a permutation and channel, the leakage of data row `k` into decoder
//! output `j` is what the receiver sees on `v[j]` when only the bipolar
//! codeword of row `k` is sent through permute, circular convolution,
//! inverse permute and decode. The diagonal is the row's own gain; the
//! objective is the largest off-diagonal magnitude (minimax), which spreads
//! the interference evenly over the rows.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, Uniform};

use crate::hcm::Interleaver;
use crate::transforms::{fwht_in_place, BinaryHadamard, HadamardOrder};
use crate::{Error, Result};

/// Largest order searched exhaustively by [`optimize_interleaver`].
pub const EXHAUSTIVE_MAX_N: usize = 8;

const COOLING: f64 = 0.995;
const TEMPERATURE_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct IsiCostReport {
    pub interleaver: Interleaver,
    pub cost: f64,
    n: usize,
    // (N-1) x (N-1), row k-1 = source row k, column j-1 = output j
    leakage: Vec<f64>,
}

impl IsiCostReport {
    /// Response of decoder output `j` to unit data on row `k` (`k, j >= 1`).
    pub fn leakage(&self, k: usize, j: usize) -> f64 {
        self.leakage[(k - 1) * (self.n - 1) + (j - 1)]
    }

    pub fn leakage_matrix(&self) -> &[f64] {
        &self.leakage
    }
}

/// Reusable evaluator; holds the scaled codewords and scratch buffers.
#[derive(Debug, Clone)]
pub struct IsiEvaluator {
    n: usize,
    taps: Vec<f64>,
    codewords: Vec<Vec<f64>>,
    tx: Vec<f64>,
    rx: Vec<f64>,
}

impl IsiEvaluator {
    pub fn new(hadamard: &BinaryHadamard, taps: &[f64]) -> Result<Self> {
        if taps.is_empty() || taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidLength {
                expected: 1,
                actual: taps.len(),
            });
        }
        let n = hadamard.order().get();
        let scale = 1.0 / libm::sqrt(n as f64);
        let codewords = (0..n)
            .map(|k| (0..n).map(|t| hadamard.bipolar(k, t) as f64 * scale).collect())
            .collect();
        Ok(IsiEvaluator {
            n,
            taps: taps.to_vec(),
            codewords,
            tx: vec![0.0; n],
            rx: vec![0.0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Decoder response (all `N` outputs) to row `k` sent alone, left in
    /// the internal buffer.
    fn respond(&mut self, perm: &[usize], k: usize) -> &[f64] {
        let n = self.n;
        let cw = &self.codewords[k];
        for (slot, &p) in self.tx.iter_mut().zip(perm) {
            *slot = cw[p];
        }
        for t in 0..n {
            let mut acc = 0.0;
            for (l, &h) in self.taps.iter().enumerate() {
                acc += h * self.tx[(t + n * self.taps.len() - l) % n];
            }
            // deinterleave straight into chip order
            self.rx[perm[t]] = acc;
        }
        fwht_in_place(&mut self.rx).expect("power-of-two buffer");
        let scale = 1.0 / libm::sqrt(n as f64);
        for v in self.rx.iter_mut() {
            *v *= scale;
        }
        &self.rx
    }

    /// Minimax off-diagonal leakage. `perm` must be a valid permutation.
    pub fn cost(&mut self, perm: &[usize]) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.n {
            let v = self.respond(perm, k);
            for (j, x) in v.iter().enumerate().skip(1) {
                if j != k {
                    worst = worst.max(x.abs());
                }
            }
        }
        worst
    }

    pub fn report(&mut self, interleaver: &Interleaver) -> Result<IsiCostReport> {
        if interleaver.len() != self.n {
            return Err(Error::InvalidLength {
                expected: self.n,
                actual: interleaver.len(),
            });
        }
        let n = self.n;
        let mut leakage = Vec::with_capacity((n - 1) * (n - 1));
        let mut cost: f64 = 0.0;
        for k in 1..n {
            let v = self.respond(interleaver.perm(), k);
            for (j, &x) in v.iter().enumerate().skip(1) {
                leakage.push(x);
                if j != k {
                    cost = cost.max(x.abs());
                }
            }
        }
        Ok(IsiCostReport {
            interleaver: interleaver.clone(),
            cost,
            n,
            leakage,
        })
    }
}

pub fn isi_cost(
    interleaver: &Interleaver,
    taps: &[f64],
    hadamard: &BinaryHadamard,
) -> Result<IsiCostReport> {
    IsiEvaluator::new(hadamard, taps)?.report(interleaver)
}

fn evaluator(taps: &[f64], n: usize) -> Result<IsiEvaluator> {
    let h = BinaryHadamard::new(HadamardOrder::new(n)?.get())?;
    IsiEvaluator::new(&h, taps)
}

/// Best permutation over all `n!` candidates (Heap's algorithm). Ties keep
/// the earliest, so the identity wins when nothing beats it.
pub fn exhaustive_interleaver(taps: &[f64], n: usize) -> Result<IsiCostReport> {
    if n > 10 {
        return Err(Error::InvalidOrder(n));
    }
    let mut eval = evaluator(taps, n)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = eval.cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cost = eval.cost(&perm);
            if cost < best_cost {
                best_cost = cost;
                best.copy_from_slice(&perm);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    eval.report(&Interleaver::new(best)?)
}

fn shuffle(perm: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..perm.len()).rev() {
        let j = Uniform::new_inclusive(0, i).expect("valid range").sample(rng);
        perm.swap(i, j);
    }
}

/// Simulated annealing over random transpositions, starting from the
/// identity. `budget` is the number of proposed moves. The start
/// temperature is the cost spread over random permutations, and it cools
/// geometrically once every `n` moves.
pub fn anneal_interleaver(taps: &[f64], n: usize, budget: usize, seed: u64) -> Result<IsiCostReport> {
    let mut eval = evaluator(taps, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut current: Vec<usize> = (0..n).collect();
    let mut current_cost = eval.cost(&current);
    let mut best = current.clone();
    let mut best_cost = current_cost;
    if best_cost == 0.0 || budget == 0 {
        return eval.report(&Interleaver::identity(n));
    }

    let mut sample = current.clone();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..TEMPERATURE_SAMPLES {
        shuffle(&mut sample, &mut rng);
        let c = eval.cost(&sample);
        sum += c;
        sum_sq += c * c;
    }
    let mean = sum / TEMPERATURE_SAMPLES as f64;
    let spread = libm::sqrt((sum_sq / TEMPERATURE_SAMPLES as f64 - mean * mean).max(0.0));
    let mut temperature = if spread > 0.0 { spread } else { 0.1 * best_cost };

    let pick = Uniform::new(0, n).expect("n >= 2");
    for step in 0..budget {
        let a = pick.sample(&mut rng);
        let mut b = pick.sample(&mut rng);
        while b == a {
            b = pick.sample(&mut rng);
        }
        current.swap(a, b);
        let cost = eval.cost(&current);
        let delta = cost - current_cost;
        let accept = delta <= 0.0 || {
            let u: f64 = Open01.sample(&mut rng);
            u < libm::exp(-delta / temperature)
        };
        if accept {
            current_cost = cost;
            if cost < best_cost {
                best_cost = cost;
                best.copy_from_slice(&current);
            }
        } else {
            current.swap(a, b);
        }
        if (step + 1) % n == 0 {
            temperature *= COOLING;
        }
    }
    eval.report(&Interleaver::new(best)?)
}

/// Exhaustive search up to [`EXHAUSTIVE_MAX_N`], annealing above.
pub fn optimize_interleaver(taps: &[f64], n: usize, budget: usize, seed: u64) -> Result<IsiCostReport> {
    if n <= EXHAUSTIVE_MAX_N {
        exhaustive_interleaver(taps, n)
    } else {
        anneal_interleaver(taps, n, budget.max(1), seed)
    }
}
