use serde::{Deserialize, Serialize};

use super::TrialClass;

/// Outcome counts over a batch of trials. Merging is associative and
/// commutative, so batches can be combined in any order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub aborts: u64,
    pub accept_correct: u64,
    pub accept_corrupt: u64,
}

impl TrialStats {
    pub fn single(class: TrialClass) -> Self {
        let mut s = TrialStats { trials: 1, ..Default::default() };
        match class {
            TrialClass::Abort => s.aborts = 1,
            TrialClass::AcceptCorrect => s.accept_correct = 1,
            TrialClass::AcceptCorrupt => s.accept_corrupt = 1,
        }
        s
    }

    pub fn merge(&self, other: &TrialStats) -> TrialStats {
        TrialStats {
            trials: self.trials + other.trials,
            aborts: self.aborts + other.aborts,
            accept_correct: self.accept_correct + other.accept_correct,
            accept_corrupt: self.accept_corrupt + other.accept_corrupt,
        }
    }

    fn rate(&self, k: u64) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            k as f64 / self.trials as f64
        }
    }

    pub fn abort_rate(&self) -> f64 {
        self.rate(self.aborts)
    }

    pub fn accept_corrupt_rate(&self) -> f64 {
        self.rate(self.accept_corrupt)
    }

    /// Empirical probability of an accepted, correct output.
    pub fn p_ok(&self) -> f64 {
        self.rate(self.accept_correct)
    }

    /// Binomial standard error of a rate.
    pub fn sigma(&self, rate: f64) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (rate * (1.0 - rate) / self.trials as f64).sqrt()
    }

    /// Wilson score interval for `k` successes at `z` standard deviations.
    pub fn wilson(&self, k: u64, z: f64) -> (f64, f64) {
        let n = self.trials as f64;
        if n == 0.0 {
            return (0.0, 1.0);
        }
        let p = k as f64 / n;
        let z2 = z * z;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let radius = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        ((centre - radius).max(0.0), (centre + radius).min(1.0))
    }

    /// Wilson interval of the accept∧corrupt rate.
    pub fn corrupt_interval(&self, z: f64) -> (f64, f64) {
        self.wilson(self.accept_corrupt, z)
    }
}

/// `d = ⌈δ / (2(2c + 1))⌉`, at least 1, and `ε = (8/9)^d`.
pub fn epsilon_bound(degree: u32, tolerance: f64) -> (u32, f64) {
    let c = degree.max(1) as f64;
    let d = (tolerance.max(0.0) / (2.0 * (2.0 * c + 1.0))).ceil().max(1.0) as u32;
    (d, (8.0f64 / 9.0).powi(d as i32))
}
