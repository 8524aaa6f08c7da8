//! Synthetic geometric mode: every cycle is one slot and a node gains access
//! with a fixed probability per cycle.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Empirical first-access law.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSample {
    /// Cycle index (1-based) of first access -> occurrences.
    pub counts: BTreeMap<u64, u64>,
    pub trials: u64,
    /// Mean of `(index - 1) * slot_time_us`.
    pub mean_delay_us: f64,
}

impl GeometricSample {
    /// Empirical CDF at `k`.
    pub fn cdf(&self, k: u64) -> f64 {
        let below: u64 = self.counts.range(..=k).map(|(_, c)| c).sum();
        below as f64 / self.trials as f64
    }

    pub fn max_index(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}

/// Draws `trials` first-access indices with per-cycle access probability
/// `p_access`.
pub fn synthetic_first_access(p_access: f64, trials: u64, slot_time_us: f64, seed: u64) -> GeometricSample {
    assert!(p_access > 0.0 && p_access <= 1.0, "access probability must be in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut waited = 0u64;
    for _ in 0..trials {
        let mut k = 1u64;
        while !rng.random_bool(p_access) {
            k += 1;
        }
        waited += k - 1;
        *counts.entry(k).or_insert(0) += 1;
    }
    GeometricSample {
        counts,
        trials,
        mean_delay_us: waited as f64 / trials as f64 * slot_time_us,
    }
}
