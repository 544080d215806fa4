//! Dense state-vector reference: 2n Majorana modes on n fermionic modes via a
//! Jordan-Wigner string, with `γ_{2k+1} = Z…Z X_k` and `γ_{2k+2} = Z…Z Y_k`.

use num_complex::Complex64;

use crate::distribution::{Arithmetic, Probability};
use crate::engine::{Branch, Engine, EngineError, EngineId};
use crate::parity::Parity;
use crate::protocol::{check_matching, Direction, PairSpec, ValidationError};

/// Largest supported box count (`2^8` amplitudes).
pub const MAX_BOXES: usize = 16;

/// Branches below this probability are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Applies Majorana operators to amplitude vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajoranaRep {
    box_count: usize,
}

impl MajoranaRep {
    pub fn new(box_count: usize) -> Self {
        assert!(box_count.is_multiple_of(2) && box_count > 0, "even, positive number of modes");
        Self { box_count }
    }

    pub fn dim(&self) -> usize {
        1 << (self.box_count / 2)
    }

    /// `γ_mode |v⟩` for a one-based mode index.
    pub fn gamma(&self, mode: usize, v: &[Complex64]) -> Vec<Complex64> {
        assert!((1..=self.box_count).contains(&mode), "mode {mode} out of range");
        let j = mode - 1;
        let k = j / 2;
        let below = (1usize << k) - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (x, &amp) in v.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let sign = if (x & below).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let phase = if j.is_multiple_of(2) {
                Complex64::new(sign, 0.0)
            } else if x >> k & 1 == 1 {
                -I * sign
            } else {
                I * sign
            };
            out[x ^ (1 << k)] += phase * amp;
        }
        out
    }

    /// `i γ_a γ_b |v⟩`, whose +1 eigenspace is the even parity of the pair.
    pub fn pair_parity(&self, pair: PairSpec, v: &[Complex64]) -> Vec<Complex64> {
        let w = self.gamma(pair.a(), &self.gamma(pair.b(), v));
        w.into_iter().map(|z| I * z).collect()
    }

    /// Total parity eigenvalue of basis state `x`: the product of `iγ_{2k+1}γ_{2k+2}`.
    pub fn basis_sector(&self, x: usize) -> Parity {
        let n = self.box_count / 2;
        Parity::from_bit((n - x.count_ones() as usize) % 2 == 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    box_count: usize,
    amplitudes: Vec<Complex64>,
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn scaled(v: Vec<Complex64>, s: f64) -> Vec<Complex64> {
    v.into_iter().map(|z| z * s).collect()
}

impl QuantumState {
    pub fn box_count(&self) -> usize {
        self.box_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn rep(&self) -> MajoranaRep {
        MajoranaRep::new(self.box_count)
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// `⟨ψ| iγ_aγ_b |ψ⟩`.
    pub fn pair_expectation(&self, pair: PairSpec) -> f64 {
        let w = self.rep().pair_parity(pair, &self.amplitudes);
        self.amplitudes.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
    }

    /// Probability weight in the odd total-parity sector.
    pub fn odd_sector_weight(&self) -> f64 {
        let rep = self.rep();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(x, _)| rep.basis_sector(*x).is_odd())
            .fold(0.0, |acc, (_, z)| acc + z.norm_sqr())
    }

    pub fn sector(&self) -> Parity {
        Parity::from_bit(self.odd_sector_weight() > 0.5)
    }

    fn project(&self, op: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Vec<Branch<QuantumState>> {
        let ov = op(&self.amplitudes);
        let mut out = Vec::with_capacity(2);
        for outcome in [Parity::Even, Parity::Odd] {
            let s = f64::from(outcome.eigenvalue());
            let projected: Vec<Complex64> = self.amplitudes.iter().zip(&ov).map(|(v, o)| (v + o * s) * 0.5).collect();
            let p = norm_sqr(&projected);
            if p > PRUNE_THRESHOLD {
                out.push(Branch {
                    outcome,
                    probability: Probability::Float(p),
                    state: QuantumState { box_count: self.box_count, amplitudes: scaled(projected, 1.0 / p.sqrt()) },
                });
            }
        }
        out
    }
}

/// Prepares the joint eigenstate of `iγ_aγ_b` for every init pair, with `Even` as
/// eigenvalue +1. If `declared` is given it must agree with the total parity the
/// pairs imply.
pub fn q_init(
    box_count: usize,
    pairs: &[(PairSpec, Parity)],
    declared: Option<Parity>,
) -> Result<QuantumState, EngineError> {
    if box_count == 0 || !box_count.is_multiple_of(2) {
        return Err(ValidationError::BadBoxCount(box_count).into());
    }
    if box_count > MAX_BOXES {
        return Err(EngineError::TooLarge(box_count, MAX_BOXES));
    }
    let specs: Vec<PairSpec> = pairs.iter().map(|(p, _)| *p).collect();
    check_matching(box_count, &specs)?;
    let rep = MajoranaRep::new(box_count);
    let dim = rep.dim();
    // The projector onto the joint eigenspace has rank one, so some basis vector
    // keeps at least 1/dim of its weight.
    for x in 0..dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[x] = Complex64::new(1.0, 0.0);
        for &(pair, parity) in pairs {
            let s = f64::from(parity.eigenvalue());
            let w = rep.pair_parity(pair, &v);
            v = v.iter().zip(&w).map(|(a, b)| (a + b * s) * 0.5).collect();
        }
        let p = norm_sqr(&v);
        if p >= 0.5 / dim as f64 {
            let state = QuantumState { box_count, amplitudes: scaled(v, 1.0 / p.sqrt()) };
            if let Some(declared) = declared {
                let found = state.sector();
                if found != declared {
                    return Err(EngineError::SectorConflict { declared, found });
                }
            }
            return Ok(state);
        }
    }
    unreachable!("a rank-one projector has a large diagonal entry")
}

/// Applies `(1 ± γ_aγ_b)/√2`: plus for counter-clockwise, minus for clockwise.
pub fn q_braid(state: &QuantumState, pair: PairSpec, direction: Direction) -> QuantumState {
    let rep = state.rep();
    let gg = rep.gamma(pair.a(), &rep.gamma(pair.b(), &state.amplitudes));
    let s = match direction {
        Direction::Ccw => 1.0,
        Direction::Cw => -1.0,
    };
    let amplitudes =
        state.amplitudes.iter().zip(&gg).map(|(v, w)| (v + w * s) * std::f64::consts::FRAC_1_SQRT_2).collect();
    QuantumState { box_count: state.box_count, amplitudes }
}

pub fn q_measure_pair(state: &QuantumState, pair: PairSpec) -> Vec<Branch<QuantumState>> {
    let rep = state.rep();
    state.project(|v| rep.pair_parity(pair, v))
}

/// Measures `(iγ_{a1}γ_{a2})(iγ_{b1}γ_{b2})`; `Even` is eigenvalue +1.
pub fn q_joint_measure(state: &QuantumState, first: PairSpec, second: PairSpec) -> Vec<Branch<QuantumState>> {
    let rep = state.rep();
    state.project(|v| rep.pair_parity(first, &rep.pair_parity(second, v)))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct QuantumEngine;

impl Engine for QuantumEngine {
    type State = QuantumState;

    fn id(&self) -> EngineId {
        EngineId::Quantum
    }

    fn arithmetic(&self) -> Arithmetic {
        Arithmetic::Float
    }

    fn init(&self, box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<QuantumState, EngineError> {
        q_init(box_count, pairs, None)
    }

    fn braid(&self, state: &QuantumState, pair: PairSpec, direction: Direction) -> QuantumState {
        q_braid(state, pair, direction)
    }

    fn measure_pair(&self, state: &QuantumState, pair: PairSpec) -> Vec<Branch<QuantumState>> {
        q_measure_pair(state, pair)
    }

    fn joint_measure(&self, state: &QuantumState, first: PairSpec, second: PairSpec) -> Vec<Branch<QuantumState>> {
        q_joint_measure(state, first, second)
    }

    fn sector(&self, state: &QuantumState) -> Parity {
        state.sector()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::pair;
    use Parity::*;

    fn even_even() -> QuantumState {
        q_init(4, &[(pair(1, 2), Even), (pair(3, 4), Even)], None).unwrap()
    }

    fn basis(dim: usize, x: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[x] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn majorana_algebra_on_basis_vectors() {
        for box_count in [2, 4, 6, 8, 10, 12] {
            let rep = MajoranaRep::new(box_count);
            for x in 0..rep.dim() {
                let e = basis(rep.dim(), x);
                for i in 1..=box_count {
                    assert_eq!(rep.gamma(i, &rep.gamma(i, &e)), e, "γ{i}² on |{x}⟩");
                    for j in i + 1..=box_count {
                        let ij = rep.gamma(i, &rep.gamma(j, &e));
                        let ji = rep.gamma(j, &rep.gamma(i, &e));
                        let sum: f64 = ij.iter().zip(&ji).map(|(a, b)| (a + b).norm()).sum();
                        assert!(sum < 1e-14, "{{γ{i},γ{j}}} on |{x}⟩");
                    }
                }
            }
        }
    }

    #[test]
    fn init_fixes_pair_expectations() {
        let s = even_even();
        assert!((s.pair_expectation(pair(1, 2)) - 1.0).abs() < 1e-12);
        assert!((s.pair_expectation(pair(3, 4)) - 1.0).abs() < 1e-12);
        let o = q_init(4, &[(pair(1, 2), Odd), (pair(3, 4), Odd)], None).unwrap();
        assert!((o.pair_expectation(pair(1, 2)) + 1.0).abs() < 1e-12);
        assert!((o.pair_expectation(pair(3, 4)) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn declared_sector_conflict() {
        let err = q_init(4, &[(pair(1, 2), Even), (pair(3, 4), Odd)], Some(Even)).unwrap_err();
        assert_eq!(err, EngineError::SectorConflict { declared: Even, found: Odd });
    }

    #[test]
    fn crossing_init_lands_in_odd_sector() {
        let s = q_init(4, &[(pair(1, 3), Even), (pair(2, 4), Even)], None).unwrap();
        assert_eq!(s.sector(), Odd);
    }

    #[test]
    fn braid_then_inverse_is_identity() {
        let s = even_even();
        let t = q_braid(&q_braid(&s, pair(2, 3), Direction::Ccw), pair(2, 3), Direction::Cw);
        assert!(t.fidelity(&s) > 1.0 - 1e-12);
    }

    #[test]
    fn eight_braids_are_identity() {
        let s = even_even();
        let mut t = s.clone();
        for _ in 0..8 {
            t = q_braid(&t, pair(2, 3), Direction::Ccw);
        }
        assert!(t.fidelity(&s) > 1.0 - 1e-12);
    }

    #[test]
    fn one_braid_makes_1_3_odd() {
        let s = q_braid(&even_even(), pair(2, 3), Direction::Ccw);
        let b = q_measure_pair(&s, pair(1, 3));
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].outcome, Odd);
    }

    #[test]
    fn cross_pair_fusion_is_half_half() {
        let b = q_measure_pair(&even_even(), pair(2, 3));
        assert_eq!(b.len(), 2);
        for br in &b {
            assert!((br.probability.to_f64() - 0.5).abs() < 1e-12);
            let again = q_measure_pair(&br.state, pair(2, 3));
            assert_eq!(again.len(), 1);
            assert_eq!(again[0].outcome, br.outcome);
        }
    }

    #[test]
    fn joint_of_definite_pairs_is_their_xor() {
        let s = q_init(4, &[(pair(1, 2), Even), (pair(3, 4), Odd)], None).unwrap();
        let b = q_joint_measure(&s, pair(1, 2), pair(3, 4));
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].outcome, Odd);
        assert!(b[0].state.fidelity(&s) > 1.0 - 1e-12);
    }
}
