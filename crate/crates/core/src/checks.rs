//! Randomized cross-engine and structural checks, shared by the test suites.
//!
//! Each check returns `Err` with a readable reason on the first violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distribution::{distributions_equal, Distribution};
use crate::engine::{Engine, EngineId};
use crate::eval::{enumerate_exact, enumerate_leaves, enumerate_leaves_with, EngineHandle};
use crate::hv1::Hv1Engine;
use crate::hv2::{hv2_braid, hv2_init, hv2_measure_pair, Hv2Engine, CALIBRATED_CONVENTION};
use crate::protocol::{pair, Direction, PairSpec, ProtocolStep, Scenario};
use crate::quantum::QuantumEngine;
use crate::scenario_file::render_scenario;
use crate::scenarios::{builtins, random_measure_only, random_scenario};
use crate::stab::StabEngine;

/// Box counts the randomized checks cycle through.
pub const SIZES: [usize; 3] = [4, 6, 8];
/// Step cap for random scenarios.
pub const MAX_STEPS: usize = 10;

fn size_for(seed: u64) -> usize {
    SIZES[(seed % SIZES.len() as u64) as usize]
}

fn exact(h: EngineHandle, s: &Scenario) -> Result<Distribution, String> {
    enumerate_exact(h, s).map(|e| e.distribution).map_err(|e| format!("{} on {}: {e}", h.id(), s.name))
}

/// Which randomized engine equivalence to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    /// hv2 and stab agree exactly on scenarios without joint measurements.
    Hv2Stab,
    /// stab and quantum agree within 1e-9, joint measurements included.
    StabQuantum,
    /// hv1 and quantum agree within 1e-9 on measurement-only scenarios.
    Hv1Quantum,
}

impl Equivalence {
    pub fn scenario(self, seed: u64) -> Scenario {
        let n = size_for(seed);
        match self {
            Equivalence::Hv2Stab => random_scenario(n, MAX_STEPS, false, seed),
            Equivalence::StabQuantum => random_scenario(n, MAX_STEPS, true, seed),
            Equivalence::Hv1Quantum => random_measure_only(n, MAX_STEPS, seed),
        }
    }

    fn engines(self) -> (EngineId, EngineId, f64) {
        match self {
            Equivalence::Hv2Stab => (EngineId::Hv2, EngineId::Stab, 0.0),
            Equivalence::StabQuantum => (EngineId::Stab, EngineId::Quantum, 1e-9),
            Equivalence::Hv1Quantum => (EngineId::Hv1, EngineId::Quantum, 1e-9),
        }
    }

    /// Checks `cases` seeded scenarios starting at `first_seed`.
    pub fn check(self, first_seed: u64, cases: u64) -> Result<(), String> {
        let (a, b, tol) = self.engines();
        (first_seed..first_seed + cases).into_par_iter().try_for_each(|seed| {
            let s = self.scenario(seed);
            let p = exact(EngineHandle::new(a), &s)?;
            let q = exact(EngineHandle::new(b), &s)?;
            if distributions_equal(&p, &q, tol).map_err(|e| e.to_string())? {
                Ok(())
            } else {
                Err(format!("{a} and {b} differ on\n{}{p:?}\n{q:?}", render_scenario(&s)))
            }
        })
    }
}

/// Engines whose states can be compared for physical equality.
pub trait StateEquivalence: Engine {
    fn same_state(&self, a: &Self::State, b: &Self::State) -> bool;
}

impl StateEquivalence for QuantumEngine {
    fn same_state(&self, a: &Self::State, b: &Self::State) -> bool {
        (a.fidelity(b) - 1.0).abs() < 1e-9
    }
}

impl StateEquivalence for StabEngine {
    fn same_state(&self, a: &Self::State, b: &Self::State) -> bool {
        a.generators().len() == b.generators().len() && a.generators().iter().all(|&g| b.element(g) == Some(g))
    }
}

impl StateEquivalence for Hv1Engine {
    fn same_state(&self, a: &Self::State, b: &Self::State) -> bool {
        a == b
    }
}

impl StateEquivalence for Hv2Engine {
    fn same_state(&self, a: &Self::State, b: &Self::State) -> bool {
        a == b
    }
}

/// Every state reached while evaluating `s` has the init state's sector.
/// Returns the number of steps applied across all branches.
pub fn sector_conserved<E: Engine>(engine: &E, s: &Scenario) -> Result<usize, String> {
    let mut sector = None;
    let mut steps = 0;
    let mut failure = None;
    enumerate_leaves_with(engine, s, |step, st| {
        let p = engine.sector(st);
        match sector {
            None => sector = Some(p),
            Some(q) if q != p && failure.is_none() => {
                failure = Some(format!("{} on {}: sector {p} after step {step}, started {q}", engine.id(), s.name));
            }
            Some(_) => {}
        }
        steps += usize::from(step > 0);
    })
    .map_err(|e| e.to_string())?;
    failure.map_or(Ok(steps), Err)
}

pub fn random_pair(rng: &mut impl Rng, box_count: usize) -> PairSpec {
    let x = rng.gen_range(1..=box_count);
    let mut y = rng.gen_range(1..box_count);
    if y >= x {
        y += 1;
    }
    pair(x, y)
}

pub fn random_disjoint_pairs(rng: &mut impl Rng, box_count: usize) -> (PairSpec, PairSpec) {
    let first = random_pair(rng, box_count);
    loop {
        let second = random_pair(rng, box_count);
        if first.is_disjoint(second) {
            return (first, second);
        }
    }
}

/// Leaf states of `cases` random scenarios (joint measurements included).
pub fn reachable_states<E: Engine>(engine: &E, first_seed: u64, cases: u64) -> Result<Vec<(usize, E::State)>, String> {
    let mut out = Vec::new();
    for seed in first_seed..first_seed + cases {
        let s = random_scenario(size_for(seed), MAX_STEPS, true, seed);
        let leaves = enumerate_leaves(engine, &s).map_err(|e| e.to_string())?;
        out.extend(leaves.into_iter().map(|l| (s.box_count, l.state)));
    }
    Ok(out)
}

/// Repeating a pair or joint measurement returns the first outcome with certainty.
pub fn measurement_idempotent<E: Engine>(
    engine: &E,
    state: &E::State,
    box_count: usize,
    rng: &mut impl Rng,
) -> Result<(), String> {
    let p = random_pair(rng, box_count);
    for b in engine.measure_pair(state, p) {
        let again = engine.measure_pair(&b.state, p);
        if again.len() != 1 || again[0].outcome != b.outcome || (again[0].probability.to_f64() - 1.0).abs() > 1e-9 {
            return Err(format!("{}: repeated {p} is not deterministic", engine.id()));
        }
    }
    let (x, y) = random_disjoint_pairs(rng, box_count);
    for b in engine.joint_measure(state, x, y) {
        let again = engine.joint_measure(&b.state, x, y);
        if again.len() != 1 || again[0].outcome != b.outcome {
            return Err(format!("{}: repeated joint {x} {y} is not deterministic", engine.id()));
        }
    }
    Ok(())
}

/// An exchange followed by its inverse restores the state.
pub fn braid_inverse<E: StateEquivalence>(
    engine: &E,
    state: &E::State,
    box_count: usize,
    rng: &mut impl Rng,
) -> Result<(), String> {
    let a = rng.gen_range(1..box_count);
    let dir = if rng.gen_bool(0.5) { Direction::Ccw } else { Direction::Cw };
    let there = engine.braid(state, pair(a, a + 1), dir);
    let back = engine.braid(&there, pair(a, a + 1), dir.inverse());
    if engine.same_state(state, &back) {
        Ok(())
    } else {
        Err(format!("{}: exchange of {a},{} ({dir}) is not undone by its inverse", engine.id(), a + 1))
    }
}

fn per_state<E: StateEquivalence>(engine: &E, seed: u64, cases: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = reachable_states(engine, seed, cases)?;
    for (n, st) in &states {
        measurement_idempotent(engine, st, *n, &mut rng)?;
        braid_inverse(engine, st, *n, &mut rng)?;
    }
    Ok(states.len())
}

/// One hv2 confluence case: random init, optionally a measurement, then 1..=12
/// lazy exchanges. The canonical, three randomized and the eager
/// (standardize-after-every-exchange) strategies must all agree.
pub fn confluence_case(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = size_for(seed);
    let s = random_scenario(n, 0, false, seed);
    let ProtocolStep::Init { pairs } = &s.steps[0] else { unreachable!("scenarios start with init") };
    let mut start = hv2_init(n, pairs).map_err(|e| e.to_string())?;
    if seed.is_multiple_of(4) {
        let branches = hv2_measure_pair(&start, pair(1, rng.gen_range(2..=n)));
        start = branches[rng.gen_range(0..branches.len())].state.clone();
    }
    let braids: Vec<(usize, Direction)> = (0..rng.gen_range(1..=12))
        .map(|_| (rng.gen_range(1..n), if rng.gen_bool(0.5) { Direction::Ccw } else { Direction::Cw }))
        .collect();
    let lazy = braids.iter().fold(start.clone(), |st, &(a, d)| st.braid_lazy(pair(a, a + 1), d, CALIBRATED_CONVENTION));
    if lazy.sector() != start.sector() {
        return Err(format!("seed {seed}: lazy exchanges changed the sector"));
    }
    let canonical = lazy.standardize().map_err(|e| e.to_string())?;
    if !canonical.is_standard() {
        return Err(format!("seed {seed}: canonical result is not standard"));
    }
    for _ in 0..3 {
        let other = lazy.standardize_with(|moves| rng.gen_range(0..moves.len())).map_err(|e| e.to_string())?;
        if other != canonical {
            return Err(format!("seed {seed}: move order changed the result\n{lazy}\n--\n{canonical}\n--\n{other}"));
        }
    }
    let eager = braids.iter().fold(start, |st, &(a, d)| hv2_braid(&st, pair(a, a + 1), d, CALIBRATED_CONVENTION));
    if eager != canonical {
        return Err(format!("seed {seed}: eager standardization differs"));
    }
    Ok(())
}

/// What [`invariant_suite`] covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InvariantCoverage {
    pub builtin_steps: usize,
    pub random_steps: usize,
    pub states_checked: usize,
    pub confluence_cases: u64,
    pub distributions: usize,
}

fn all_engines_conserve(s: &Scenario) -> Result<usize, String> {
    sector_conserved(&QuantumEngine, s)?;
    sector_conserved(&StabEngine, s)?;
    sector_conserved(&Hv1Engine, s)?;
    sector_conserved(&Hv2Engine::default(), s)
}

/// Sector conservation on every built-in and on random scenarios totalling at
/// least `random_steps` steps, idempotence and braid inversion on reachable
/// states of every engine, `confluence_cases` hv2 confluence cases, and
/// normalization of every distribution produced along the way.
pub fn invariant_suite(random_steps: usize, confluence_cases: u64) -> Result<InvariantCoverage, String> {
    let mut cov = InvariantCoverage::default();
    let mut corpus: Vec<Scenario> = builtins().into_iter().map(|b| b.scenario).collect();
    for s in &corpus {
        cov.builtin_steps += all_engines_conserve(s)?;
    }
    let mut seed = 1_000_000;
    let mut steps = 0;
    while steps < random_steps {
        let s = random_scenario(size_for(seed), MAX_STEPS, true, seed);
        steps += s.steps.len() - 1;
        all_engines_conserve(&s)?;
        corpus.push(s);
        seed += 1;
    }
    cov.random_steps = steps;

    cov.states_checked += per_state(&QuantumEngine, 21, 60)?;
    cov.states_checked += per_state(&StabEngine, 22, 60)?;
    cov.states_checked += per_state(&Hv1Engine, 23, 60)?;
    cov.states_checked += per_state(&Hv2Engine::default(), 24, 60)?;

    (0..confluence_cases).into_par_iter().try_for_each(confluence_case)?;
    cov.confluence_cases = confluence_cases;

    for s in &corpus {
        for id in EngineId::ALL {
            exact(EngineHandle::new(id), s)?.check_normalized().map_err(|e| format!("{id} on {}: {e}", s.name))?;
            cov.distributions += 1;
        }
    }
    Ok(cov)
}
