use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// Largest exponent we keep exact; `2^62` still fits the numerator arithmetic in `u64`.
pub const MAX_EXPONENT: u32 = 62;

/// An exact non-negative dyadic rational `numerator / 2^exponent`.
///
/// Always normalized: the numerator is odd, or the value is zero with exponent zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dyadic {
    numerator: u64,
    exponent: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { numerator: 0, exponent: 0 };
    pub const ONE: Dyadic = Dyadic { numerator: 1, exponent: 0 };
    pub const HALF: Dyadic = Dyadic { numerator: 1, exponent: 1 };

    pub fn new(numerator: u64, exponent: u32) -> Self {
        assert!(exponent <= MAX_EXPONENT, "dyadic exponent {exponent} exceeds {MAX_EXPONENT}");
        Self { numerator, exponent }.normalized()
    }

    /// `1 / 2^exponent`.
    pub fn inverse_power_of_two(exponent: u32) -> Self {
        Self::new(1, exponent)
    }

    /// `1 / count`, where `count` must be a power of two.
    pub fn uniform(count: usize) -> Self {
        assert!(count.is_power_of_two(), "uniform weight over {count} branches is not dyadic");
        Self::inverse_power_of_two(count.trailing_zeros())
    }

    fn normalized(mut self) -> Self {
        if self.numerator == 0 {
            return Self::ZERO;
        }
        let tz = self.numerator.trailing_zeros().min(self.exponent);
        self.numerator >>= tz;
        self.exponent -= tz;
        self
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn exponent(self) -> u32 {
        self.exponent
    }

    pub fn denominator(self) -> u64 {
        1u64 << self.exponent
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn half(self) -> Self {
        Self::new(self.numerator, self.exponent + 1)
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / (self.denominator() as f64)
    }

    /// `|self - other|`.
    pub fn abs_diff(self, other: Dyadic) -> Dyadic {
        let e = self.exponent.max(other.exponent);
        let a = self.numerator << (e - self.exponent);
        let b = other.numerator << (e - other.exponent);
        Self::new(a.abs_diff(b), e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        let a = self.numerator << (e - self.exponent);
        let b = rhs.numerator << (e - rhs.exponent);
        Dyadic::new(a.checked_add(b).expect("dyadic overflow"), e)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::ZERO;
        }
        let num = self.numerator.checked_mul(rhs.numerator).expect("dyadic overflow");
        Dyadic::new(num, self.exponent + rhs.exponent)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = (self.numerator as u128) << (e - self.exponent);
        let b = (other.numerator as u128) << (e - other.exponent);
        a.cmp(&b)
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_even_numerators() {
        let d = Dyadic::new(6, 3);
        assert_eq!((d.numerator(), d.exponent()), (3, 2));
        assert_eq!(Dyadic::new(0, 5), Dyadic::ZERO);
        assert_eq!(Dyadic::new(4, 2), Dyadic::ONE);
    }

    #[test]
    fn arithmetic_is_exact() {
        let q = Dyadic::inverse_power_of_two(2);
        assert_eq!(q + q, Dyadic::HALF);
        assert_eq!(Dyadic::HALF + Dyadic::HALF, Dyadic::ONE);
        assert_eq!(Dyadic::HALF * Dyadic::HALF, q);
        assert_eq!(Dyadic::ONE.abs_diff(q), Dyadic::new(3, 2));
        assert_eq!(Dyadic::uniform(8), Dyadic::new(1, 3));
        assert!(Dyadic::HALF > q);
        assert_eq!(Dyadic::new(3, 2).to_string(), "3/4");
    }

    #[test]
    #[should_panic(expected = "not dyadic")]
    fn uniform_over_three_panics() {
        let _ = Dyadic::uniform(3);
    }
}
