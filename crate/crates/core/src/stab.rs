//! Majorana stabilizer oracle. States are groups generated by n commuting,
//! independent Hermitian monomials `± i^k γ_S` (|S| = 2k, S ascending).

use std::fmt;

use thiserror::Error;

use crate::distribution::{Arithmetic, Probability};
use crate::dyadic::Dyadic;
use crate::engine::{Branch, Engine, EngineError, EngineId};
use crate::parity::Parity;
use crate::protocol::{check_matching, Direction, PairSpec, ValidationError};

/// Mode masks are `u32`; 32 modes is far beyond what the protocols use.
pub const MAX_MODES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonomialError {
    #[error("monomial has odd weight {0}")]
    OddWeight(usize),
    #[error("mode {0} is outside 1..=32")]
    BadMode(usize),
    #[error("mode {0} repeated")]
    Repeated(usize),
}

/// `± i^{|S|/2} γ_{s1} γ_{s2} …` with `s1 < s2 < …`; bit `j` of `mask` is mode `j + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    mask: u32,
    negative: bool,
}

fn inversions(order: &[usize]) -> usize {
    let mut count = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j] {
                count += 1;
            }
        }
    }
    count
}

impl Monomial {
    /// Canonical Hermitian monomial over the given one-based modes with the given sign.
    pub fn new(modes: &[usize], negative: bool) -> Result<Self, MonomialError> {
        if !modes.len().is_multiple_of(2) {
            return Err(MonomialError::OddWeight(modes.len()));
        }
        let mut mask = 0u32;
        for &m in modes {
            if m == 0 || m > MAX_MODES {
                return Err(MonomialError::BadMode(m));
            }
            let bit = 1u32 << (m - 1);
            if mask & bit != 0 {
                return Err(MonomialError::Repeated(m));
            }
            mask |= bit;
        }
        Ok(Self { mask, negative })
    }

    /// `i γ_a γ_b`, the even-parity operator of a pair.
    pub fn pair(pair: PairSpec) -> Self {
        Self::new(&[pair.a(), pair.b()], false).expect("a pair is a valid monomial")
    }

    /// The parity of `pair` as a stabilizer: `+iγ_aγ_b` for even, `−iγ_aγ_b` for odd.
    pub fn with_parity(pair: PairSpec, parity: Parity) -> Self {
        let m = Self::pair(pair);
        if parity.is_odd() {
            m.negated()
        } else {
            m
        }
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn is_negative(self) -> bool {
        self.negative
    }

    pub fn modes(self) -> Vec<usize> {
        (0..32).filter(|j| self.mask >> j & 1 == 1).map(|j| j + 1).collect()
    }

    pub fn weight(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn negated(self) -> Self {
        Self { mask: self.mask, negative: !self.negative }
    }

    pub fn commutes_with(self, other: Monomial) -> bool {
        (self.mask & other.mask).count_ones().is_multiple_of(2)
    }

    /// Product of two commuting monomials, again canonical.
    ///
    /// `i^{k_S} γ_S · i^{k_T} γ_T = i^{|S∩T|} (−1)^{inv(S,T)} · i^{k_R} γ_R`, where
    /// `inv` counts pairs `s ∈ S, t ∈ T` with `s > t`.
    pub fn times(self, other: Monomial) -> Monomial {
        let overlap = (self.mask & other.mask).count_ones();
        assert!(overlap.is_multiple_of(2), "product of anticommuting monomials is not Hermitian");
        let inv: u32 = (0..32)
            .filter(|t| other.mask >> t & 1 == 1)
            .map(|t| if t == 31 { 0 } else { (self.mask >> (t + 1)).count_ones() })
            .sum();
        let flip = (overlap / 2 + inv) % 2 == 1;
        Monomial { mask: self.mask ^ other.mask, negative: self.negative ^ other.negative ^ flip }
    }

    /// Conjugation by the exchange of `a < b`: counter-clockwise sends
    /// `γ_a → −γ_b, γ_b → γ_a`; clockwise sends `γ_a → γ_b, γ_b → −γ_a`.
    pub fn conjugated(self, pair: PairSpec, direction: Direction) -> Monomial {
        let (a, b) = (pair.a(), pair.b());
        let modes = self.modes();
        let (has_a, has_b) = (modes.contains(&a), modes.contains(&b));
        if has_a == has_b {
            // neither, or γ_aγ_b ↦ γ_aγ_b
            return self;
        }
        let mut negative = self.negative;
        let image: Vec<usize> = modes
            .iter()
            .map(|&m| {
                if m == a {
                    negative ^= direction == Direction::Ccw;
                    b
                } else if m == b {
                    negative ^= direction == Direction::Cw;
                    a
                } else {
                    m
                }
            })
            .collect();
        negative ^= inversions(&image) % 2 == 1;
        let mut sorted = image;
        sorted.sort_unstable();
        Monomial::new(&sorted, negative).expect("permuted modes stay valid")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.weight() / 2;
        let prefix = match k % 4 {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        // fold the Hermitizing power into the printed sign
        let (sign, prefix) = match (self.negative, prefix) {
            (false, "-") => ("-", ""),
            (true, "-") => ("+", ""),
            (false, "-i") => ("-", "i"),
            (true, "-i") => ("+", "i"),
            (false, p) => ("+", p),
            (true, p) => ("-", p),
        };
        write!(f, "{sign}{prefix}")?;
        for m in self.modes() {
            write!(f, "γ{m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StabGroup {
    box_count: usize,
    generators: Vec<Monomial>,
}

/// Expresses `mask` as an XOR of generator masks; returns the subset as a bitmask.
fn solve(generators: &[Monomial], mask: u32) -> Option<u64> {
    let mut rows: Vec<(u32, u64)> = generators.iter().enumerate().map(|(i, g)| (g.mask, 1u64 << i)).collect();
    let mut target = (mask, 0u64);
    let mut pivot_row = 0;
    for bit in 0..32 {
        let Some(found) = (pivot_row..rows.len()).find(|&r| rows[r].0 >> bit & 1 == 1) else { continue };
        rows.swap(pivot_row, found);
        let pivot = rows[pivot_row];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && row.0 >> bit & 1 == 1 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        if target.0 >> bit & 1 == 1 {
            target.0 ^= pivot.0;
            target.1 ^= pivot.1;
        }
        pivot_row += 1;
    }
    (target.0 == 0).then_some(target.1)
}

impl StabGroup {
    pub fn box_count(&self) -> usize {
        self.box_count
    }

    pub fn generators(&self) -> &[Monomial] {
        &self.generators
    }

    pub fn is_commuting(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| g[i].commutes_with(g[j])))
    }

    pub fn is_independent(&self) -> bool {
        let mut basis: Vec<u32> = Vec::new();
        for g in &self.generators {
            let mut m = g.mask;
            for &b in &basis {
                m = m.min(m ^ b);
            }
            if m == 0 {
                return false;
            }
            basis.push(m);
            basis.sort_unstable_by(|x, y| y.cmp(x));
        }
        true
    }

    /// The signed element of the group with the same modes as `op`, if any.
    pub fn element(&self, op: Monomial) -> Option<Monomial> {
        let subset = solve(&self.generators, op.mask)?;
        let identity = Monomial { mask: 0, negative: false };
        Some(
            self.generators
                .iter()
                .enumerate()
                .filter(|(i, _)| subset >> i & 1 == 1)
                .fold(identity, |acc, (_, g)| acc.times(*g)),
        )
    }

    /// `Π_k iγ_{2k-1}γ_{2k}`, the total parity operator.
    pub fn total_parity_operator(box_count: usize) -> Monomial {
        (1..=box_count / 2)
            .map(|k| Monomial::new(&[2 * k - 1, 2 * k], false).expect("valid pair"))
            .fold(Monomial { mask: 0, negative: false }, |acc, m| acc.times(m))
    }

    pub fn sector(&self) -> Parity {
        let total = Self::total_parity_operator(self.box_count);
        let found = self.element(total).expect("total parity commutes with every even monomial");
        Parity::from_bit(found.negative != total.negative)
    }

    pub fn braid(&self, pair: PairSpec, direction: Direction) -> StabGroup {
        StabGroup {
            box_count: self.box_count,
            generators: self.generators.iter().map(|g| g.conjugated(pair, direction)).collect(),
        }
    }

    /// Projective measurement of `op`; `Even` is eigenvalue +1.
    pub fn measure(&self, op: Monomial) -> Result<Vec<Branch<StabGroup>>, MonomialError> {
        if !op.weight().is_multiple_of(2) {
            return Err(MonomialError::OddWeight(op.weight()));
        }
        let anti: Vec<usize> = (0..self.generators.len()).filter(|&i| !self.generators[i].commutes_with(op)).collect();
        let Some((&first, rest)) = anti.split_first() else {
            let found = self.element(op).expect("a commuting monomial lies in a maximal group");
            return Ok(vec![Branch {
                outcome: Parity::from_bit(found.negative != op.negative),
                probability: Probability::Exact(Dyadic::ONE),
                state: self.clone(),
            }]);
        };
        let mut base = self.generators.clone();
        for &i in rest {
            base[i] = base[i].times(self.generators[first]);
        }
        Ok([Parity::Even, Parity::Odd]
            .into_iter()
            .map(|outcome| {
                let mut generators = base.clone();
                generators[first] = if outcome.is_odd() { op.negated() } else { op };
                Branch {
                    outcome,
                    probability: Probability::Exact(Dyadic::HALF),
                    state: StabGroup { box_count: self.box_count, generators },
                }
            })
            .collect())
    }
}

impl fmt::Display for StabGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.generators.iter().map(Monomial::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn stab_init(box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<StabGroup, EngineError> {
    if box_count == 0 || !box_count.is_multiple_of(2) {
        return Err(ValidationError::BadBoxCount(box_count).into());
    }
    if box_count > MAX_MODES {
        return Err(EngineError::TooLarge(box_count, MAX_MODES));
    }
    let specs: Vec<PairSpec> = pairs.iter().map(|(p, _)| *p).collect();
    check_matching(box_count, &specs)?;
    Ok(StabGroup { box_count, generators: pairs.iter().map(|&(p, par)| Monomial::with_parity(p, par)).collect() })
}

pub fn stab_braid(group: &StabGroup, pair: PairSpec, direction: Direction) -> StabGroup {
    group.braid(pair, direction)
}

pub fn stab_measure(group: &StabGroup, op: Monomial) -> Result<Vec<Branch<StabGroup>>, MonomialError> {
    group.measure(op)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StabEngine;

impl Engine for StabEngine {
    type State = StabGroup;

    fn id(&self) -> EngineId {
        EngineId::Stab
    }

    fn arithmetic(&self) -> Arithmetic {
        Arithmetic::ExactDyadic
    }

    fn init(&self, box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<StabGroup, EngineError> {
        stab_init(box_count, pairs)
    }

    fn braid(&self, state: &StabGroup, pair: PairSpec, direction: Direction) -> StabGroup {
        stab_braid(state, pair, direction)
    }

    fn measure_pair(&self, state: &StabGroup, pair: PairSpec) -> Vec<Branch<StabGroup>> {
        state.measure(Monomial::pair(pair)).expect("pair monomials are well formed")
    }

    fn joint_measure(&self, state: &StabGroup, first: PairSpec, second: PairSpec) -> Vec<Branch<StabGroup>> {
        let op = Monomial::pair(first).times(Monomial::pair(second));
        state.measure(op).expect("products of disjoint pairs are well formed")
    }

    fn sector(&self, state: &StabGroup) -> Parity {
        state.sector()
    }
}
