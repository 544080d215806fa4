//! Hidden-variable model I: a matching of boxes with a parity per arc and no
//! geometric data. Braids only move boxes around.

use crate::distribution::{Arithmetic, Probability};
use crate::engine::{Branch, Engine, EngineError, EngineId};
use crate::matching::{self, Exchange, Matching};
use crate::parity::Parity;
use crate::protocol::{Direction, PairSpec};

pub type Hv1State = Matching;

#[derive(Debug, Clone, Copy, Default)]
pub struct Hv1Engine;

pub fn hv1_init(box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<Hv1State, EngineError> {
    Ok(Matching::new(box_count, pairs)?)
}

/// Swaps the boxes at `pair`; arcs follow their boxes and the direction is ignored.
///
/// When two arcs trade a box their crossing status toggles, so the arc whose
/// stationary endpoint is larger absorbs one parity flip to keep the sector.
pub fn hv1_braid(state: &Hv1State, pair: PairSpec, _direction: Direction) -> Hv1State {
    let mut next = state.clone();
    let (effect, _) = next.exchange(pair.a());
    if let Exchange::TwoArcs { up, down } = effect {
        let stationary = |i: usize| {
            let arc = next.arcs()[i];
            if arc.lo == pair.a() || arc.lo == pair.b() {
                arc.hi
            } else {
                arc.lo
            }
        };
        let flip = if stationary(up) > stationary(down) { up } else { down };
        next.flip(flip);
    }
    next
}

fn branches(state: &Hv1State, targets: &[PairSpec]) -> Vec<Branch<Hv1State>> {
    matching::measure(state, targets)
        .into_iter()
        .map(|r| Branch { outcome: r.outcome, probability: Probability::Exact(r.weight), state: r.matching })
        .collect()
}

pub fn hv1_measure_pair(state: &Hv1State, pair: PairSpec) -> Vec<Branch<Hv1State>> {
    branches(state, &[pair])
}

pub fn hv1_joint_measure(state: &Hv1State, first: PairSpec, second: PairSpec) -> Vec<Branch<Hv1State>> {
    branches(state, &[first, second])
}

impl Engine for Hv1Engine {
    type State = Hv1State;

    fn id(&self) -> EngineId {
        EngineId::Hv1
    }

    fn arithmetic(&self) -> Arithmetic {
        Arithmetic::ExactDyadic
    }

    fn init(&self, box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<Hv1State, EngineError> {
        hv1_init(box_count, pairs)
    }

    fn braid(&self, state: &Hv1State, pair: PairSpec, direction: Direction) -> Hv1State {
        hv1_braid(state, pair, direction)
    }

    fn measure_pair(&self, state: &Hv1State, pair: PairSpec) -> Vec<Branch<Hv1State>> {
        hv1_measure_pair(state, pair)
    }

    fn joint_measure(&self, state: &Hv1State, first: PairSpec, second: PairSpec) -> Vec<Branch<Hv1State>> {
        hv1_joint_measure(state, first, second)
    }

    fn sector(&self, state: &Hv1State) -> Parity {
        state.sector()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;
    use crate::protocol::pair;
    use Parity::*;

    fn even_even() -> Hv1State {
        hv1_init(4, &[(pair(1, 2), Even), (pair(3, 4), Even)]).unwrap()
    }

    #[test]
    fn init_rejects_overlap() {
        assert!(hv1_init(4, &[(pair(1, 2), Even), (pair(2, 3), Even)]).is_err());
    }

    #[test]
    fn odd_odd_init_has_even_sector() {
        let s = hv1_init(4, &[(pair(1, 2), Odd), (pair(3, 4), Odd)]).unwrap();
        assert_eq!(s.sector(), Even);
    }

    #[test]
    fn braid_relabels_and_then_reads_even_on_1_3() {
        let s = hv1_braid(&even_even(), pair(2, 3), Direction::Ccw);
        assert_eq!(s.to_string(), "(1,3)=even (2,4)=odd");
        let b = hv1_measure_pair(&s, pair(1, 3));
        assert_eq!(b.len(), 1);
        assert_eq!((b[0].outcome, b[0].probability), (Even, Probability::Exact(Dyadic::ONE)));
    }

    #[test]
    fn braid_is_an_involution_and_ignores_direction() {
        let s = even_even();
        let once = hv1_braid(&s, pair(2, 3), Direction::Ccw);
        assert_eq!(once, hv1_braid(&s, pair(2, 3), Direction::Cw));
        assert_eq!(hv1_braid(&once, pair(2, 3), Direction::Ccw), s);
    }

    #[test]
    fn fusion_rule_on_odd_odd_matches_even_even() {
        let odd = hv1_init(4, &[(pair(1, 2), Odd), (pair(3, 4), Odd)]).unwrap();
        let a: Vec<_> = hv1_measure_pair(&even_even(), pair(2, 3)).into_iter().map(|b| b.state).collect();
        let b: Vec<_> = hv1_measure_pair(&odd, pair(2, 3)).into_iter().map(|b| b.state).collect();
        assert_eq!(a, b);
    }
}
