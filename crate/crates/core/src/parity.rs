use std::fmt;
use std::ops::{BitXor, BitXorAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Fermion parity of a pair (or group) of boxes.
///
/// `Even` is the vacuum fusion channel and the identity of the XOR algebra;
/// `Odd` is the fermion channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub const fn from_bit(bit: bool) -> Self {
        if bit {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub const fn is_odd(self) -> bool {
        matches!(self, Parity::Odd)
    }

    pub const fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Eigenvalue of the corresponding Hermitian parity operator: `+1` for even.
    pub const fn eigenvalue(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl BitXor for Parity {
    type Output = Parity;

    fn bitxor(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.is_odd() ^ rhs.is_odd())
    }
}

impl BitXorAssign for Parity {
    fn bitxor_assign(&mut self, rhs: Parity) {
        *self = *self ^ rhs;
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Parity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "even" | "e" | "0" => Ok(Parity::Even),
            "odd" | "o" | "1" => Ok(Parity::Odd),
            other => Err(format!("expected `even` or `odd`, found `{other}`")),
        }
    }
}

/// XOR of an iterator of parities (`Even` for an empty iterator).
pub fn xor_all<I: IntoIterator<Item = Parity>>(items: I) -> Parity {
    items.into_iter().fold(Parity::Even, |acc, p| acc ^ p)
}
