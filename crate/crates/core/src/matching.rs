//! Perfect matchings of box positions with one parity per arc, shared by both
//! hidden-variable engines.

use std::fmt;

use crate::dyadic::Dyadic;
use crate::parity::{xor_all, Parity};
use crate::protocol::{check_matching, PairSpec, ValidationError};

/// A connection between two boxes, `lo < hi` (one-based positions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub lo: usize,
    pub hi: usize,
    pub parity: Parity,
}

impl Arc {
    pub fn new(x: usize, y: usize, parity: Parity) -> Self {
        Self { lo: x.min(y), hi: x.max(y), parity }
    }

    pub fn pair(&self) -> PairSpec {
        PairSpec::new(self.lo, self.hi).expect("arc endpoints differ")
    }

    pub fn contains(&self, x: usize) -> bool {
        self.lo == x || self.hi == x
    }

    pub fn other(&self, x: usize) -> usize {
        if self.lo == x {
            self.hi
        } else {
            self.lo
        }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})={}", self.lo, self.hi, self.parity)
    }
}

/// True iff the two position pairs interleave, `p1 < q1 < p2 < q2` up to relabeling.
pub fn interleaved(p: (usize, usize), q: (usize, usize)) -> bool {
    let (p1, p2) = (p.0.min(p.1), p.0.max(p.1));
    let (q1, q2) = (q.0.min(q.1), q.0.max(q.1));
    (p1 < q1 && q1 < p2 && p2 < q2) || (q1 < p1 && p1 < q2 && q2 < p2)
}

/// Number of interleaving pairs among `arcs`.
pub fn crossing_count<'a, I>(arcs: I) -> usize
where
    I: IntoIterator<Item = &'a Arc>,
{
    let arcs: Vec<&Arc> = arcs.into_iter().collect();
    let mut count = 0;
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            if interleaved((arcs[i].lo, arcs[i].hi), (arcs[j].lo, arcs[j].hi)) {
                count += 1;
            }
        }
    }
    count
}

/// What happened to the arcs when two adjacent positions were exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exchange {
    /// Both positions belonged to one arc; only its orientation changed.
    SameArc { arc: usize },
    /// `up` held the box that moved to the higher position, `down` the one that moved lower.
    /// Indices refer to the arcs after re-sorting.
    TwoArcs { up: usize, down: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    box_count: usize,
    arcs: Vec<Arc>,
}

impl Matching {
    pub fn new(box_count: usize, pairs: &[(PairSpec, Parity)]) -> Result<Self, ValidationError> {
        if box_count == 0 || !box_count.is_multiple_of(2) {
            return Err(ValidationError::BadBoxCount(box_count));
        }
        let specs: Vec<PairSpec> = pairs.iter().map(|(p, _)| *p).collect();
        check_matching(box_count, &specs)?;
        let mut arcs: Vec<Arc> = pairs.iter().map(|(p, par)| Arc::new(p.a(), p.b(), *par)).collect();
        arcs.sort();
        Ok(Self { box_count, arcs })
    }

    fn from_arcs(box_count: usize, mut arcs: Vec<Arc>) -> Self {
        arcs.sort();
        Self { box_count, arcs }
    }

    pub fn box_count(&self) -> usize {
        self.box_count
    }

    /// Arcs sorted by their lower endpoint.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_index(&self, x: usize) -> usize {
        self.arcs.iter().position(|a| a.contains(x)).expect("every box is matched")
    }

    pub fn partner(&self, x: usize) -> usize {
        self.arcs[self.arc_index(x)].other(x)
    }

    /// Parity of `pair` if it is currently an arc.
    pub fn parity_of(&self, pair: PairSpec) -> Option<Parity> {
        self.arcs.iter().find(|a| a.lo == pair.a() && a.hi == pair.b()).map(|a| a.parity)
    }

    pub fn flip(&mut self, index: usize) {
        self.arcs[index].parity = self.arcs[index].parity.flipped();
    }

    pub fn is_interleaved(&self, i: usize, j: usize) -> bool {
        interleaved((self.arcs[i].lo, self.arcs[i].hi), (self.arcs[j].lo, self.arcs[j].hi))
    }

    pub fn crossing_count(&self) -> usize {
        crossing_count(&self.arcs)
    }

    /// Conserved total parity: XOR of arc parities, corrected by one for every crossing.
    pub fn sector(&self) -> Parity {
        xor_all(self.arcs.iter().map(|a| a.parity)) ^ Parity::from_bit(self.crossing_count() % 2 == 1)
    }

    /// Exchanges the boxes at positions `a` and `a + 1`. Returns the effect and the
    /// permutation `old arc index -> new arc index` caused by re-sorting.
    pub fn exchange(&mut self, a: usize) -> (Exchange, Vec<usize>) {
        let b = a + 1;
        let (ia, ib) = (self.arc_index(a), self.arc_index(b));
        let relabel = |x: usize| {
            if x == a {
                b
            } else if x == b {
                a
            } else {
                x
            }
        };
        for arc in &mut self.arcs {
            *arc = Arc::new(relabel(arc.lo), relabel(arc.hi), arc.parity);
        }
        let mut order: Vec<usize> = (0..self.arcs.len()).collect();
        order.sort_by_key(|&i| self.arcs[i]);
        let mut perm = vec![0; self.arcs.len()];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        self.arcs = order.iter().map(|&i| self.arcs[i]).collect();
        let effect = if ia == ib {
            Exchange::SameArc { arc: perm[ia] }
        } else {
            Exchange::TwoArcs { up: perm[ia], down: perm[ib] }
        };
        (effect, perm)
    }

    pub fn dump(&self) -> Vec<String> {
        self.arcs.iter().map(Arc::to_string).collect()
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump().join(" "))
    }
}

/// One branch of a hidden-variable measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repairing {
    pub outcome: Parity,
    pub weight: Dyadic,
    pub matching: Matching,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[x] = r;
        r
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            self.0[rx.max(ry)] = rx.min(ry);
        }
    }
}

/// Measures the parity of one pair, or the product parity of two disjoint pairs.
///
/// Targets that are already arcs read back deterministically. Otherwise the targets
/// become arcs, the displaced partners re-pair (partners of one target together,
/// lone leftovers with each other), and the new parities are drawn uniformly among
/// assignments that conserve every connected component's sector.
pub fn measure(m: &Matching, targets: &[PairSpec]) -> Vec<Repairing> {
    assert!(matches!(targets.len(), 1 | 2), "one pair or a joint pair of pairs");
    if let Some(known) = targets.iter().map(|t| m.parity_of(*t)).collect::<Option<Vec<_>>>() {
        return vec![Repairing { outcome: xor_all(known), weight: Dyadic::ONE, matching: m.clone() }];
    }

    let measured: Vec<usize> = targets.iter().flat_map(|t| [t.a(), t.b()]).collect();
    let mut new_arcs: Vec<(usize, usize)> = targets.iter().map(|t| (t.a(), t.b())).collect();
    let mut leftovers = Vec::new();
    for t in targets {
        let displaced: Vec<usize> =
            [t.a(), t.b()].iter().map(|&x| m.partner(x)).filter(|p| !measured.contains(p)).collect();
        match displaced.as_slice() {
            [p, q] => new_arcs.push((*p, *q)),
            [p] => leftovers.push(*p),
            _ => {}
        }
    }
    if let [p, q] = leftovers.as_slice() {
        new_arcs.push((*p, *q));
    }

    let old: Vec<Arc> = m.arcs.iter().copied().filter(|a| measured.iter().any(|&x| a.contains(x))).collect();
    let kept: Vec<Arc> = m.arcs.iter().copied().filter(|a| !measured.iter().any(|&x| a.contains(x))).collect();

    let mut uf = UnionFind((0..=m.box_count).collect());
    for a in &old {
        uf.union(a.lo, a.hi);
    }
    for &(x, y) in &new_arcs {
        uf.union(x, y);
    }
    let new_comp: Vec<usize> = new_arcs.iter().map(|&(x, _)| uf.find(x)).collect();
    let mut roots = new_comp.clone();
    roots.sort_unstable();
    roots.dedup();

    let as_arcs = |parities: &[Parity]| -> Vec<Arc> {
        new_arcs.iter().zip(parities).map(|(&(x, y), &p)| Arc::new(x, y, p)).collect()
    };
    let placeholder = as_arcs(&vec![Parity::Even; new_arcs.len()]);
    let required: Vec<Parity> = roots
        .iter()
        .map(|&root| {
            let olds: Vec<&Arc> = old.iter().filter(|a| uf.find(a.lo) == root).collect();
            let news: Vec<&Arc> =
                placeholder.iter().zip(&new_comp).filter(|(_, &c)| c == root).map(|(a, _)| a).collect();
            xor_all(olds.iter().map(|a| a.parity))
                ^ Parity::from_bit(crossing_count(olds.iter().copied()) % 2 == 1)
                ^ Parity::from_bit(crossing_count(news.iter().copied()) % 2 == 1)
        })
        .collect();

    let mut solutions = Vec::new();
    for bits in 0u32..(1 << new_arcs.len()) {
        let parities: Vec<Parity> = (0..new_arcs.len()).map(|i| Parity::from_bit(bits >> i & 1 == 1)).collect();
        let ok = roots.iter().zip(&required).all(|(&root, &want)| {
            xor_all(parities.iter().zip(&new_comp).filter(|(_, &c)| c == root).map(|(p, _)| *p)) == want
        });
        if ok {
            solutions.push(parities);
        }
    }
    let weight = Dyadic::uniform(solutions.len());
    let mut branches: Vec<Repairing> = solutions
        .into_iter()
        .map(|parities| {
            let outcome = xor_all(parities[..targets.len()].iter().copied());
            let mut arcs = kept.clone();
            arcs.extend(as_arcs(&parities));
            Repairing { outcome, weight, matching: Matching::from_arcs(m.box_count, arcs) }
        })
        .collect();
    branches.sort_by(|x, y| x.outcome.cmp(&y.outcome).then_with(|| x.matching.arcs.cmp(&y.matching.arcs)));
    branches
}
