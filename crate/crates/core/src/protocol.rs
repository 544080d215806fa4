//! Protocol data model: boxes, pairs, steps and validated scenarios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parity::Parity;

/// One-based box (Majorana mode) position, `1..=box_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxIndex(pub usize);

impl BoxIndex {
    pub fn get(self) -> usize {
        self.0
    }

    /// Zero-based offset, used as the mode index inside the engines.
    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for BoxIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Two distinct boxes in canonical order `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairSpec {
    a: BoxIndex,
    b: BoxIndex,
}

impl PairSpec {
    /// Builds a canonical pair, swapping the arguments if needed.
    pub fn new(x: usize, y: usize) -> Result<Self, ValidationError> {
        if x == y {
            return Err(ValidationError::DegeneratePair(x));
        }
        if x == 0 || y == 0 {
            return Err(ValidationError::OutOfRange { index: 0, box_count: 0 });
        }
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Ok(Self { a: BoxIndex(a), b: BoxIndex(b) })
    }

    pub fn a(self) -> usize {
        self.a.0
    }

    pub fn b(self) -> usize {
        self.b.0
    }

    pub fn contains(self, x: usize) -> bool {
        self.a.0 == x || self.b.0 == x
    }

    pub fn is_disjoint(self, other: PairSpec) -> bool {
        !other.contains(self.a.0) && !other.contains(self.b.0)
    }

    pub fn is_adjacent(self) -> bool {
        self.b.0 == self.a.0 + 1
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Shorthand used throughout tests and the scenario library. Panics on `x == y`.
pub fn pair(x: usize, y: usize) -> PairSpec {
    PairSpec::new(x, y).expect("pair of distinct positive boxes")
}

/// Exchange direction. `Ccw` applies `(1 + γ_a γ_b)/√2` for `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ccw,
    Cw,
}

impl Direction {
    pub fn inverse(self) -> Self {
        match self {
            Direction::Ccw => Direction::Cw,
            Direction::Cw => Direction::Ccw,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Ccw => "ccw",
            Direction::Cw => "cw",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ccw" => Ok(Direction::Ccw),
            "cw" => Ok(Direction::Cw),
            other => Err(format!("expected `ccw` or `cw`, found `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolStep {
    Init { pairs: Vec<(PairSpec, Parity)> },
    Braid { pair: PairSpec, direction: Direction },
    MeasurePair { pair: PairSpec },
    JointMeasure { first: PairSpec, second: PairSpec },
}

impl ProtocolStep {
    pub fn is_measurement(&self) -> bool {
        matches!(self, ProtocolStep::MeasurePair { .. } | ProtocolStep::JointMeasure { .. })
    }

    pub fn braid(x: usize, y: usize, direction: Direction) -> Self {
        ProtocolStep::Braid { pair: pair(x, y), direction }
    }

    pub fn measure(x: usize, y: usize) -> Self {
        ProtocolStep::MeasurePair { pair: pair(x, y) }
    }

    pub fn joint(first: (usize, usize), second: (usize, usize)) -> Self {
        ProtocolStep::JointMeasure { first: pair(first.0, first.1), second: pair(second.0, second.1) }
    }

    pub fn init(pairs: &[((usize, usize), Parity)]) -> Self {
        ProtocolStep::Init { pairs: pairs.iter().map(|&((x, y), p)| (pair(x, y), p)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("box count must be a positive even number, got {0}")]
    BadBoxCount(usize),
    #[error("box {index} is outside 1..={box_count}")]
    OutOfRange { index: usize, box_count: usize },
    #[error("pair uses box {0} twice")]
    DegeneratePair(usize),
    #[error("init pairs do not form a perfect matching of 1..={box_count}: {reason}")]
    NotAMatching { box_count: usize, reason: String },
    #[error("braid of ({0},{1}) is not between adjacent positions")]
    NonAdjacentBraid(usize, usize),
    #[error("joint measurement pairs {0} and {1} share a box")]
    OverlappingJoint(PairSpec, PairSpec),
    #[error("the first step must be init")]
    InitNotFirst,
    #[error("init appears more than once (step {0})")]
    RepeatedInit(usize),
    #[error("scenario has no steps")]
    Empty,
}

/// Checks that `pairs` covers every box in `1..=box_count` exactly once.
pub fn check_matching(box_count: usize, pairs: &[PairSpec]) -> Result<(), ValidationError> {
    let mut seen = vec![false; box_count + 1];
    for p in pairs {
        for x in [p.a(), p.b()] {
            if x == 0 || x > box_count {
                return Err(ValidationError::OutOfRange { index: x, box_count });
            }
            if seen[x] {
                return Err(ValidationError::NotAMatching {
                    box_count,
                    reason: format!("box {x} appears in more than one pair"),
                });
            }
            seen[x] = true;
        }
    }
    if let Some(missing) = (1..=box_count).find(|&x| !seen[x]) {
        return Err(ValidationError::NotAMatching { box_count, reason: format!("box {missing} is not paired") });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub box_count: usize,
    pub steps: Vec<ProtocolStep>,
}

impl Scenario {
    /// Builds and validates a scenario.
    pub fn new(name: impl Into<String>, box_count: usize, steps: Vec<ProtocolStep>) -> Result<Self, ValidationError> {
        let scenario = Self { name: name.into(), box_count, steps };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.box_count;
        if n == 0 || !n.is_multiple_of(2) {
            return Err(ValidationError::BadBoxCount(n));
        }
        let in_range = |p: PairSpec| -> Result<(), ValidationError> {
            if p.b() > n {
                Err(ValidationError::OutOfRange { index: p.b(), box_count: n })
            } else {
                Ok(())
            }
        };
        match self.steps.first() {
            None => return Err(ValidationError::Empty),
            Some(ProtocolStep::Init { .. }) => {}
            Some(_) => return Err(ValidationError::InitNotFirst),
        }
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                ProtocolStep::Init { pairs } => {
                    if i > 0 {
                        return Err(ValidationError::RepeatedInit(i + 1));
                    }
                    let specs: Vec<PairSpec> = pairs.iter().map(|(p, _)| *p).collect();
                    check_matching(n, &specs)?;
                }
                ProtocolStep::Braid { pair, .. } => {
                    in_range(*pair)?;
                    if !pair.is_adjacent() {
                        return Err(ValidationError::NonAdjacentBraid(pair.a(), pair.b()));
                    }
                }
                ProtocolStep::MeasurePair { pair } => in_range(*pair)?,
                ProtocolStep::JointMeasure { first, second } => {
                    in_range(*first)?;
                    in_range(*second)?;
                    if !first.is_disjoint(*second) {
                        return Err(ValidationError::OverlappingJoint(*first, *second));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn init_pairs(&self) -> &[(PairSpec, Parity)] {
        match self.steps.first() {
            Some(ProtocolStep::Init { pairs }) => pairs,
            _ => &[],
        }
    }

    pub fn measurement_count(&self) -> usize {
        self.steps.iter().filter(|s| s.is_measurement()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Parity::*;

    #[test]
    fn pair_is_canonicalized() {
        let p = PairSpec::new(4, 2).unwrap();
        assert_eq!((p.a(), p.b()), (2, 4));
        assert!(PairSpec::new(3, 3).is_err());
    }

    #[test]
    fn rejects_partial_matching() {
        let err = Scenario::new("partial", 4, vec![ProtocolStep::init(&[((1, 2), Even)]), ProtocolStep::measure(1, 2)])
            .unwrap_err();
        assert!(matches!(err, ValidationError::NotAMatching { .. }), "{err}");
    }

    #[test]
    fn rejects_overlapping_init() {
        let err = Scenario::new("overlap", 4, vec![ProtocolStep::init(&[((1, 2), Even), ((2, 3), Even)])]).unwrap_err();
        assert!(matches!(err, ValidationError::NotAMatching { .. }));
    }

    #[test]
    fn rejects_non_adjacent_braid_and_bad_joint() {
        let init = ProtocolStep::init(&[((1, 2), Even), ((3, 4), Even)]);
        let err = Scenario::new("b", 4, vec![init.clone(), ProtocolStep::braid(1, 3, Direction::Ccw)]).unwrap_err();
        assert_eq!(err, ValidationError::NonAdjacentBraid(1, 3));
        let err = Scenario::new("j", 4, vec![init.clone(), ProtocolStep::joint((1, 2), (2, 3))]).unwrap_err();
        assert!(matches!(err, ValidationError::OverlappingJoint(..)));
        let err = Scenario::new("r", 4, vec![init, ProtocolStep::measure(1, 5)]).unwrap_err();
        assert!(matches!(err, ValidationError::OutOfRange { index: 5, .. }));
    }

    #[test]
    fn init_must_lead_and_be_unique() {
        let init = ProtocolStep::init(&[((1, 2), Even)]);
        assert_eq!(
            Scenario::new("x", 2, vec![ProtocolStep::measure(1, 2), init.clone()]).unwrap_err(),
            ValidationError::InitNotFirst
        );
        assert_eq!(Scenario::new("x", 2, vec![init.clone(), init]).unwrap_err(), ValidationError::RepeatedInit(2));
    }
}
