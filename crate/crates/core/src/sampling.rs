//! Reproducible discrete sampling.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded through
//! `SeedableRng::seed_from_u64`. ChaCha is a counter-based stream cipher, so
//! the output stream for a given 64-bit seed is identical on every platform.
//! Uniform variates are derived from raw `u64` words by the fixed rules in
//! [`SeededRng`] rather than through any distribution type, which keeps
//! compiled circuits bit-for-bit stable across dependency upgrades that
//! preserve the ChaCha stream.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`: the top 53 bits of one word, scaled by `2^-53`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..n` by the widening-multiply map `(w · n) >> 64`.
    ///
    /// The bias is below `n / 2^64`, far outside anything measurable here.
    pub fn next_index(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal variate (Box–Muller, one value per call).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Walker/Vose alias table: O(L) construction, O(1) per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    threshold: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyHamiltonian);
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::domain("weights", format!("must be finite and > 0, got {w}")));
        }
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias: Vec<usize> = (0..n).collect();
        let mut threshold = vec![1.0; n];

        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            threshold[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers differ from 1 only by rounding.
        for i in small.into_iter().chain(large) {
            threshold[i] = 1.0;
            alias[i] = i;
        }
        Ok(Self { threshold, alias })
    }

    pub fn len(&self) -> usize {
        self.threshold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threshold.is_empty()
    }

    /// Draws one index: a uniform column, then a biased coin against its
    /// threshold. Consumes exactly two words from `rng`.
    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        let column = rng.next_index(self.threshold.len());
        let coin = rng.next_f64();
        if coin < self.threshold[column] {
            column
        } else {
            self.alias[column]
        }
    }

    /// The exact distribution the table encodes, recovered column by column.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut p = vec![0.0; self.len()];
        for (i, (&th, &al)) in self.threshold.iter().zip(&self.alias).enumerate() {
            p[i] += th / n;
            p[al] += (1.0 - th) / n;
        }
        p
    }
}
