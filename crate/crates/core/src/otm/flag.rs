use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OtmError;

/// An `m`-bit flag, `m ≤ 64`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlagString {
    len: u32,
    bits: u64,
}

impl FlagString {
    pub fn new(len: u32, bits: u64) -> Self {
        assert!((1..=64).contains(&len), "flag length must be in 1..=64");
        FlagString { len, bits: bits & Self::mask(len) }
    }

    fn mask(len: u32) -> u64 {
        if len == 64 {
            u64::MAX
        } else {
            (1u64 << len) - 1
        }
    }

    pub fn random<R: Rng + ?Sized>(len: u32, rng: &mut R) -> Self {
        Self::new(len, rng.gen())
    }

    /// Uniform over the `2^m − 1` strings different from `other`.
    pub fn random_other<R: Rng + ?Sized>(len: u32, other: &FlagString, rng: &mut R) -> Self {
        let k = rng.gen_range(0..Self::mask(len));
        // skip over `other`
        let bits = if k >= other.bits { k + 1 } else { k };
        Self::new(len, bits)
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4) as usize;
        format!("{:0digits$x}", self.bits)
    }
}

/// Smallest `m ≥ 1` with `m ≥ log₂(1/ε + 1)`.
pub fn flag_length_for(epsilon: f64) -> Result<u32, OtmError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(OtmError::EpsilonRange(epsilon));
    }
    let m = ((1.0 / epsilon + 1.0).log2() - 1e-9).ceil();
    Ok((m as u32).max(1))
}

/// A server holding one reject flag guesses the accept flag uniformly among
/// the remaining strings; returns the empirical success rate.
pub fn flag_guess_experiment<R: Rng + ?Sized>(len: u32, trials: usize, rng: &mut R) -> f64 {
    let mut hits = 0usize;
    for _ in 0..trials {
        let accept = FlagString::random(len, rng);
        let reject = FlagString::random_other(len, &accept, rng);
        let guess = FlagString::random_other(len, &reject, rng);
        hits += usize::from(guess == accept);
    }
    hits as f64 / trials.max(1) as f64
}
