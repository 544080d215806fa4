use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{Arithmetic, Probability};
use crate::parity::Parity;
use crate::protocol::{Direction, PairSpec, ValidationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("init pairs fix total parity {found}, but {declared} was declared")]
    SectorConflict { declared: Parity, found: Parity },
    #[error("{0} boxes exceed this engine's limit of {1}")]
    TooLarge(usize, usize),
}

/// One measurement outcome with its conditional probability and post-measurement state.
#[derive(Debug, Clone)]
pub struct Branch<S> {
    pub outcome: Parity,
    pub probability: Probability,
    pub state: S,
}

/// The operations every simulator exposes. States are immutable values.
pub trait Engine: Sync {
    type State: Clone + Send + Sync;

    fn id(&self) -> EngineId;

    fn arithmetic(&self) -> Arithmetic;

    fn init(&self, box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<Self::State, EngineError>;

    fn braid(&self, state: &Self::State, pair: PairSpec, direction: Direction) -> Self::State;

    fn measure_pair(&self, state: &Self::State, pair: PairSpec) -> Vec<Branch<Self::State>>;

    fn joint_measure(&self, state: &Self::State, first: PairSpec, second: PairSpec) -> Vec<Branch<Self::State>>;

    /// Conserved total parity of the state.
    fn sector(&self, state: &Self::State) -> Parity;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineId {
    Quantum,
    Hv1,
    Hv2,
    Stab,
}

impl EngineId {
    pub const ALL: [EngineId; 4] = [EngineId::Quantum, EngineId::Hv1, EngineId::Hv2, EngineId::Stab];

    pub fn as_str(self) -> &'static str {
        match self {
            EngineId::Quantum => "quantum",
            EngineId::Hv1 => "hv1",
            EngineId::Hv2 => "hv2",
            EngineId::Stab => "stab",
        }
    }

    pub fn arithmetic(self) -> Arithmetic {
        match self {
            EngineId::Quantum => Arithmetic::Float,
            _ => Arithmetic::ExactDyadic,
        }
    }

    /// Engines that model quantum mechanics, usable as calibration oracles.
    pub fn is_oracle(self) -> bool {
        matches!(self, EngineId::Quantum | EngineId::Stab)
    }
}

impl fmt::Display for EngineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quantum" | "q" => Ok(EngineId::Quantum),
            "hv1" => Ok(EngineId::Hv1),
            "hv2" => Ok(EngineId::Hv2),
            "stab" | "stabilizer" => Ok(EngineId::Stab),
            other => Err(format!("unknown engine `{other}` (expected quantum, hv1, hv2 or stab)")),
        }
    }
}

/// Parses a comma-separated engine list such as `quantum,hv2`.
pub fn parse_engine_list(s: &str) -> Result<Vec<EngineId>, String> {
    let ids = s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>, _>>()?;
    if ids.is_empty() {
        return Err("empty engine list".into());
    }
    Ok(ids)
}
