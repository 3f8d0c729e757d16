use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A multiple of π/4, stored exactly as a number of eighth-turns in `0..8`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Angle(u8);

impl Angle {
    pub const ZERO: Angle = Angle(0);
    pub const QUARTER_PI: Angle = Angle(1);
    pub const HALF_PI: Angle = Angle(2);
    pub const PI: Angle = Angle(4);

    /// All eight angles `0, π/4, ..., 7π/4`.
    pub const ALL: [Angle; 8] = [Angle(0), Angle(1), Angle(2), Angle(3), Angle(4), Angle(5), Angle(6), Angle(7)];

    /// Reduces any integer number of eighth-turns mod 8.
    pub fn from_eighths(k: i64) -> Angle {
        Angle(k.rem_euclid(8) as u8)
    }

    pub fn eighths(self) -> u8 {
        self.0
    }

    pub fn add_pi(self) -> Angle {
        self + Angle::PI
    }

    /// `self + π·bit`.
    pub fn add_pi_times(self, bit: u8) -> Angle {
        if bit & 1 == 1 {
            self.add_pi()
        } else {
            self
        }
    }

    /// `(-1)^bit · self`.
    pub fn signed(self, bit: u8) -> Angle {
        if bit & 1 == 1 {
            -self
        } else {
            self
        }
    }

    pub fn radians<T: Scalar>(self) -> T {
        T::of(self.0 as f64) * T::FRAC_PI_4()
    }
}

impl TryFrom<u8> for Angle {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        if v < 8 {
            Ok(Angle(v))
        } else {
            Err(format!("angle must be 0..8 eighth-turns, got {v}"))
        }
    }
}

impl From<Angle> for u8 {
    fn from(a: Angle) -> u8 {
        a.0
    }
}

impl Add for Angle {
    type Output = Angle;

    fn add(self, rhs: Angle) -> Angle {
        Angle((self.0 + rhs.0) % 8)
    }
}

impl Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        Angle((8 - self.0) % 8)
    }
}

impl Sub for Angle {
    type Output = Angle;

    fn sub(self, rhs: Angle) -> Angle {
        self + -rhs
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π/4", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_examples() {
        assert_eq!(Angle(3) + Angle(7), Angle(2));
        assert_eq!(-Angle::ZERO, Angle::ZERO);
        assert_eq!(Angle(1).add_pi(), Angle(5));
        assert_eq!(Angle::PI.eighths(), 4);
    }

    #[test]
    fn cyclic_group_of_order_eight() {
        for a in Angle::ALL {
            assert_eq!(a + Angle::ZERO, a);
            assert_eq!(a + -a, Angle::ZERO);
            for b in Angle::ALL {
                assert_eq!(a + b, b + a);
                assert_eq!((a + b).eighths(), (a.eighths() + b.eighths()) % 8);
                for c in Angle::ALL {
                    assert_eq!((a + b) + c, a + (b + c));
                }
            }
        }
        // generated by π/4
        let mut g = Angle::ZERO;
        for k in 1..=8 {
            g = g + Angle::QUARTER_PI;
            assert_eq!(g == Angle::ZERO, k == 8);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Angle::try_from(8).is_err());
        assert_eq!(Angle::from_eighths(-1), Angle(7));
    }
}
