//! Hidden-variable model II: model I plus front/back crossing data between arcs.
//!
//! Every exchange of boxes from two different arcs records one crossing between
//! them. States are standardized eagerly: interleaving arcs keep exactly one
//! crossing with the right arc in front, all other arc pairs keep none.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{Arithmetic, Probability};
use crate::engine::{Branch, Engine, EngineError, EngineId};
use crate::matching::{self, Exchange, Matching};
use crate::parity::Parity;
use crate::protocol::{Direction, PairSpec};

/// Which strand of a crossing is in front. The right arc is the one whose larger
/// endpoint is further right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sense {
    RightFront,
    LeftFront,
}

impl Sense {
    pub fn opposite(self) -> Sense {
        match self {
            Sense::RightFront => Sense::LeftFront,
            Sense::LeftFront => Sense::RightFront,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::RightFront => "RightFront",
            Sense::LeftFront => "LeftFront",
        })
    }
}

/// The over/under choice for a counter-clockwise exchange. Clockwise uses the opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CalibrationConvention {
    pub ccw_sense: Sense,
}

impl CalibrationConvention {
    pub const fn new(ccw_sense: Sense) -> Self {
        Self { ccw_sense }
    }

    pub fn cw_sense(self) -> Sense {
        self.ccw_sense.opposite()
    }

    pub fn sense_for(self, direction: Direction) -> Sense {
        match direction {
            Direction::Ccw => self.ccw_sense,
            Direction::Cw => self.cw_sense(),
        }
    }

    pub fn flipped(self) -> Self {
        Self::new(self.ccw_sense.opposite())
    }
}

impl Default for CalibrationConvention {
    fn default() -> Self {
        CALIBRATED_CONVENTION
    }
}

impl fmt::Display for CalibrationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ccw={} cw={}", self.ccw_sense, self.cw_sense())
    }
}

/// Result of `mzhv calibrate`, frozen here. The calibration log is in `data/calibration.md`.
pub const CALIBRATED_CONVENTION: CalibrationConvention = CalibrationConvention::new(Sense::LeftFront);

/// A crossing between the arcs at indices `arcs.0 < arcs.1` of the state's matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub arcs: (usize, usize),
    pub sense: Sense,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StandardizeError {
    #[error("standardization exceeded {0} moves")]
    NonTermination(usize),
    #[error("arcs {0} and {1} interleave but have no crossing left to keep")]
    MissingCrossing(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hv2State {
    matching: Matching,
    ledger: Vec<Crossing>,
}

/// An elementary rewrite on one arc pair. `at` indexes that pair's crossings in ledger order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Remove crossings `at` and `at + 1`, which have opposite senses.
    Cancel { arcs: (usize, usize), at: usize },
    /// Flip the sense of crossing `at`.
    Crossover { arcs: (usize, usize), at: usize },
}

impl Hv2State {
    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn ledger(&self) -> &[Crossing] {
        &self.ledger
    }

    fn standard_ledger(matching: &Matching) -> Vec<Crossing> {
        let n = matching.arcs().len();
        let mut ledger = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if matching.is_interleaved(i, j) {
                    ledger.push(Crossing { arcs: (i, j), sense: Sense::RightFront });
                }
            }
        }
        ledger
    }

    fn from_matching(matching: Matching) -> Self {
        let ledger = Self::standard_ledger(&matching);
        Self { matching, ledger }
    }

    fn senses(&self, arcs: (usize, usize)) -> Vec<Sense> {
        self.ledger.iter().filter(|c| c.arcs == arcs).map(|c| c.sense).collect()
    }

    fn pair_is_standard(&self, arcs: (usize, usize)) -> bool {
        let senses = self.senses(arcs);
        if self.matching.is_interleaved(arcs.0, arcs.1) {
            senses == [Sense::RightFront]
        } else {
            senses.is_empty()
        }
    }

    pub fn is_standard(&self) -> bool {
        let n = self.matching.arcs().len();
        (0..n).all(|i| (i + 1..n).all(|j| self.pair_is_standard((i, j))))
    }

    fn violating_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.matching.arcs().len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !self.pair_is_standard((i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Moves available on one non-standard arc pair: any cancellation, or when none
    /// exist, a crossover on any crossing.
    fn pair_moves(&self, arcs: (usize, usize)) -> Vec<Move> {
        let senses = self.senses(arcs);
        let cancels: Vec<Move> = senses
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(at, _)| Move::Cancel { arcs, at })
            .collect();
        if !cancels.is_empty() {
            return cancels;
        }
        (0..senses.len()).map(|at| Move::Crossover { arcs, at }).collect()
    }

    /// Every move that makes progress towards standard form.
    pub fn moves(&self) -> Vec<Move> {
        self.violating_pairs().into_iter().flat_map(|p| self.pair_moves(p)).collect()
    }

    fn ledger_slot(&self, arcs: (usize, usize), at: usize) -> usize {
        self.ledger
            .iter()
            .enumerate()
            .filter(|(_, c)| c.arcs == arcs)
            .nth(at)
            .map(|(k, _)| k)
            .expect("move refers to an existing crossing")
    }

    /// Applies a move. Both kinds flip the parities of the two arcs involved.
    pub fn apply(&mut self, mv: Move) {
        let arcs = match mv {
            Move::Cancel { arcs, at } => {
                let first = self.ledger_slot(arcs, at);
                let second = self.ledger_slot(arcs, at + 1);
                self.ledger.remove(second);
                self.ledger.remove(first);
                arcs
            }
            Move::Crossover { arcs, at } => {
                let k = self.ledger_slot(arcs, at);
                self.ledger[k].sense = self.ledger[k].sense.opposite();
                arcs
            }
        };
        self.matching.flip(arcs.0);
        self.matching.flip(arcs.1);
    }

    fn move_budget(&self) -> usize {
        let n = self.matching.arcs().len();
        4 * self.ledger.len() + 4 * n * n
    }

    fn finish(mut self) -> Result<Self, StandardizeError> {
        if let Some(&(i, j)) = self.violating_pairs().first() {
            let arcs = self.matching.arcs();
            return Err(StandardizeError::MissingCrossing(arcs[i].pair().to_string(), arcs[j].pair().to_string()));
        }
        self.ledger.sort_by_key(|c| c.arcs);
        Ok(self)
    }

    /// Canonical standardization: always rewrite the lexicographically first
    /// non-standard arc pair, cancelling before crossing over.
    pub fn standardize(&self) -> Result<Hv2State, StandardizeError> {
        // moves are listed pair by pair, cancellations first
        self.standardize_with(|_| 0)
    }

    /// Standardizes using `choose` to pick the next move among [`Hv2State::moves`].
    pub fn standardize_with<F>(&self, mut choose: F) -> Result<Hv2State, StandardizeError>
    where
        F: FnMut(&[Move]) -> usize,
    {
        let budget = self.move_budget();
        let mut state = self.clone();
        for _ in 0..=budget {
            let moves = state.moves();
            if moves.is_empty() {
                return state.finish();
            }
            let pick = choose(&moves).min(moves.len() - 1);
            state.apply(moves[pick]);
        }
        Err(StandardizeError::NonTermination(budget))
    }

    /// Exchanges two adjacent boxes without standardizing.
    ///
    /// The box moving to the lower position flips its arc's parity, and a crossing
    /// of the given direction's sense is appended between the two arcs.
    pub fn braid_lazy(&self, pair: PairSpec, direction: Direction, convention: CalibrationConvention) -> Hv2State {
        let mut next = self.clone();
        let (effect, perm) = next.matching.exchange(pair.a());
        for c in &mut next.ledger {
            let (x, y) = (perm[c.arcs.0], perm[c.arcs.1]);
            c.arcs = (x.min(y), x.max(y));
        }
        if let Exchange::TwoArcs { up, down } = effect {
            next.matching.flip(down);
            next.ledger.push(Crossing { arcs: (up.min(down), up.max(down)), sense: convention.sense_for(direction) });
        }
        next
    }

    pub fn sector(&self) -> Parity {
        self.matching.sector()
    }

    /// Debug dump: one `(a,b)=parity` line per arc, then one `x((a,b)|(c,d))=Sense` per crossing.
    pub fn dump(&self) -> Vec<String> {
        let arcs = self.matching.arcs();
        let mut lines = self.matching.dump();
        for c in &self.ledger {
            lines.push(format!("x({}|{})={}", arcs[c.arcs.0].pair(), arcs[c.arcs.1].pair(), c.sense));
        }
        lines
    }
}

impl fmt::Display for Hv2State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump().join("\n"))
    }
}

pub fn hv2_init(box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<Hv2State, EngineError> {
    Ok(Hv2State::from_matching(Matching::new(box_count, pairs)?))
}

pub fn hv2_standardize(state: &Hv2State) -> Result<Hv2State, StandardizeError> {
    state.standardize()
}

fn standardized(state: &Hv2State) -> Hv2State {
    state.standardize().unwrap_or_else(|e| panic!("inconsistent crossing ledger: {e}\n{state}"))
}

pub fn hv2_braid(
    state: &Hv2State,
    pair: PairSpec,
    direction: Direction,
    convention: CalibrationConvention,
) -> Hv2State {
    standardized(&state.braid_lazy(pair, direction, convention))
}

fn branches(state: &Hv2State, targets: &[PairSpec]) -> Vec<Branch<Hv2State>> {
    let standard = standardized(state);
    matching::measure(&standard.matching, targets)
        .into_iter()
        .map(|r| Branch {
            outcome: r.outcome,
            probability: Probability::Exact(r.weight),
            state: Hv2State::from_matching(r.matching),
        })
        .collect()
}

pub fn hv2_measure_pair(state: &Hv2State, pair: PairSpec) -> Vec<Branch<Hv2State>> {
    branches(state, &[pair])
}

pub fn hv2_joint_measure(state: &Hv2State, first: PairSpec, second: PairSpec) -> Vec<Branch<Hv2State>> {
    branches(state, &[first, second])
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Hv2Engine {
    pub convention: CalibrationConvention,
}

impl Hv2Engine {
    pub fn new(convention: CalibrationConvention) -> Self {
        Self { convention }
    }
}

impl Engine for Hv2Engine {
    type State = Hv2State;

    fn id(&self) -> EngineId {
        EngineId::Hv2
    }

    fn arithmetic(&self) -> Arithmetic {
        Arithmetic::ExactDyadic
    }

    fn init(&self, box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<Hv2State, EngineError> {
        hv2_init(box_count, pairs)
    }

    fn braid(&self, state: &Hv2State, pair: PairSpec, direction: Direction) -> Hv2State {
        hv2_braid(state, pair, direction, self.convention)
    }

    fn measure_pair(&self, state: &Hv2State, pair: PairSpec) -> Vec<Branch<Hv2State>> {
        hv2_measure_pair(state, pair)
    }

    fn joint_measure(&self, state: &Hv2State, first: PairSpec, second: PairSpec) -> Vec<Branch<Hv2State>> {
        hv2_joint_measure(state, first, second)
    }

    fn sector(&self, state: &Hv2State) -> Parity {
        state.sector()
    }
}
