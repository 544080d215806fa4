//! Running scenarios: exact branch enumeration, seeded sampling, and engine comparison.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{
    round_sig12, tv_distance, Arithmetic, Distribution, DistributionError, OutcomeTrace, Probability,
};
use crate::dyadic::Dyadic;
use crate::engine::{Branch, Engine, EngineError, EngineId};
use crate::hv1::Hv1Engine;
use crate::hv2::{CalibrationConvention, Hv2Engine};
use crate::parity::Parity;
use crate::protocol::{ProtocolStep, Scenario};
use crate::quantum::QuantumEngine;
use crate::stab::StabEngine;

/// Enumeration aborts beyond this many leaves.
pub const MAX_LEAVES: usize = 1 << 20;

/// Tolerance when either side of a comparison uses floating arithmetic.
pub const DEFAULT_FLOAT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("branch enumeration exceeded {0} leaves; use sampling instead")]
    TooManyBranches(usize),
    #[error("shots must be positive")]
    ZeroShots,
    #[error("comparison needs at least two engines")]
    TooFewEngines,
    #[error("engine {engine}: {source}")]
    Distribution { engine: EngineId, source: DistributionError },
}

/// A finished branch: full trace, its probability, and the final state.
#[derive(Debug, Clone)]
pub struct Leaf<S> {
    pub trace: OutcomeTrace,
    pub probability: Probability,
    pub state: S,
}

fn step_branches<E: Engine>(engine: &E, state: &E::State, step: &ProtocolStep) -> Option<Vec<Branch<E::State>>> {
    match step {
        ProtocolStep::Init { .. } => unreachable!("init only leads a scenario"),
        ProtocolStep::Braid { .. } => None,
        ProtocolStep::MeasurePair { pair } => Some(engine.measure_pair(state, *pair)),
        ProtocolStep::JointMeasure { first, second } => Some(engine.joint_measure(state, *first, *second)),
    }
}

/// Depth-first expansion of every measurement branch.
pub fn enumerate_leaves<E: Engine>(engine: &E, scenario: &Scenario) -> Result<Vec<Leaf<E::State>>, EvalError> {
    enumerate_leaves_with(engine, scenario, |_, _| {})
}

/// Like [`enumerate_leaves`], calling `visit(step_index, state)` on the state after every step
/// of every branch (the init state has index 0).
pub fn enumerate_leaves_with<E, F>(
    engine: &E,
    scenario: &Scenario,
    mut visit: F,
) -> Result<Vec<Leaf<E::State>>, EvalError>
where
    E: Engine,
    F: FnMut(usize, &E::State),
{
    let start = engine.init(scenario.box_count, scenario.init_pairs())?;
    visit(0, &start);
    let one = match engine.arithmetic() {
        Arithmetic::ExactDyadic => Probability::Exact(Dyadic::ONE),
        Arithmetic::Float => Probability::Float(1.0),
    };
    let mut stack = vec![(1usize, start, one, OutcomeTrace::default())];
    let mut leaves = Vec::new();
    while let Some((index, state, probability, trace)) = stack.pop() {
        let Some(step) = scenario.steps.get(index) else {
            if leaves.len() == MAX_LEAVES {
                return Err(EvalError::TooManyBranches(MAX_LEAVES));
            }
            leaves.push(Leaf { trace, probability, state });
            continue;
        };
        match step_branches(engine, &state, step) {
            None => {
                let ProtocolStep::Braid { pair, direction } = step else { unreachable!() };
                let next = engine.braid(&state, *pair, *direction);
                visit(index, &next);
                stack.push((index + 1, next, probability, trace));
            }
            Some(branches) => {
                // reversed so the even branch is explored first
                for b in branches.into_iter().rev() {
                    visit(index, &b.state);
                    stack.push((index + 1, b.state, probability.times(b.probability), trace.pushed(b.outcome)));
                }
            }
        }
    }
    Ok(leaves)
}

/// Exact outcome distribution and the number of leaves it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub distribution: Distribution,
    pub leaves: usize,
}

pub fn enumerate_with<E: Engine>(engine: &E, scenario: &Scenario) -> Result<Enumeration, EvalError> {
    let leaves = enumerate_leaves(engine, scenario)?;
    let mut distribution = Distribution::new(engine.arithmetic(), scenario.measurement_count());
    for leaf in &leaves {
        distribution
            .add(leaf.trace.clone(), leaf.probability)
            .map_err(|source| EvalError::Distribution { engine: engine.id(), source })?;
    }
    Ok(Enumeration { distribution, leaves: leaves.len() })
}

fn trajectory<E: Engine>(engine: &E, scenario: &Scenario, rng: &mut ChaCha8Rng) -> Result<OutcomeTrace, EvalError> {
    let mut state = engine.init(scenario.box_count, scenario.init_pairs())?;
    let mut trace = OutcomeTrace::default();
    for step in &scenario.steps[1..] {
        match step_branches(engine, &state, step) {
            None => {
                let ProtocolStep::Braid { pair, direction } = step else { unreachable!() };
                state = engine.braid(&state, *pair, *direction);
            }
            Some(mut branches) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let last = branches.len() - 1;
                let pick = branches
                    .iter()
                    .position(|b| {
                        acc += b.probability.to_f64();
                        u < acc
                    })
                    .unwrap_or(last);
                let chosen = branches.swap_remove(pick);
                trace = trace.pushed(chosen.outcome);
                state = chosen.state;
            }
        }
    }
    Ok(trace)
}

/// Empirical distribution of `shots` trajectories. Shot `k` draws from the ChaCha8
/// stream `k` of `seed`, so results do not depend on thread scheduling.
pub fn sample_with<E: Engine>(
    engine: &E,
    scenario: &Scenario,
    shots: u64,
    seed: u64,
) -> Result<Distribution, EvalError> {
    if shots == 0 {
        return Err(EvalError::ZeroShots);
    }
    let counts = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shot);
            trajectory(engine, scenario, &mut rng)
        })
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<OutcomeTrace, u64>, trace| {
            *acc.entry(trace?).or_default() += 1;
            Ok::<_, EvalError>(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (t, c) in b {
                *a.entry(t).or_default() += c;
            }
            Ok(a)
        })?;
    let mut d = Distribution::new(Arithmetic::Float, scenario.measurement_count());
    for (trace, count) in counts {
        d.add(trace, Probability::Float(count as f64 / shots as f64))
            .map_err(|source| EvalError::Distribution { engine: engine.id(), source })?;
    }
    Ok(d)
}

/// Engine selection with the configuration each engine needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineHandle {
    Quantum,
    Hv1,
    Hv2(CalibrationConvention),
    Stab,
}

impl EngineHandle {
    /// Handle for `id`, with the calibrated convention for hv2.
    pub fn new(id: EngineId) -> Self {
        match id {
            EngineId::Quantum => EngineHandle::Quantum,
            EngineId::Hv1 => EngineHandle::Hv1,
            EngineId::Hv2 => EngineHandle::Hv2(CalibrationConvention::default()),
            EngineId::Stab => EngineHandle::Stab,
        }
    }

    pub fn id(self) -> EngineId {
        match self {
            EngineHandle::Quantum => EngineId::Quantum,
            EngineHandle::Hv1 => EngineId::Hv1,
            EngineHandle::Hv2(_) => EngineId::Hv2,
            EngineHandle::Stab => EngineId::Stab,
        }
    }
}

impl From<EngineId> for EngineHandle {
    fn from(id: EngineId) -> Self {
        EngineHandle::new(id)
    }
}

pub fn enumerate_exact(engine: EngineHandle, scenario: &Scenario) -> Result<Enumeration, EvalError> {
    match engine {
        EngineHandle::Quantum => enumerate_with(&QuantumEngine, scenario),
        EngineHandle::Hv1 => enumerate_with(&Hv1Engine, scenario),
        EngineHandle::Hv2(c) => enumerate_with(&Hv2Engine::new(c), scenario),
        EngineHandle::Stab => enumerate_with(&StabEngine, scenario),
    }
}

pub fn sample(engine: EngineHandle, scenario: &Scenario, shots: u64, seed: u64) -> Result<Distribution, EvalError> {
    match engine {
        EngineHandle::Quantum => sample_with(&QuantumEngine, scenario, shots, seed),
        EngineHandle::Hv1 => sample_with(&Hv1Engine, scenario, shots, seed),
        EngineHandle::Hv2(c) => sample_with(&Hv2Engine::new(c), scenario, shots, seed),
        EngineHandle::Stab => sample_with(&StabEngine, scenario, shots, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Mode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Match,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub engines: [EngineId; 2],
    pub tv: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub engines: Vec<EngineId>,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Tolerance requested by the caller; `null` means per-pair defaults.
    pub tol: Option<f64>,
    /// Outcome prefix the distributions were conditioned on, if any.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub condition: Vec<Parity>,
    pub tv_matrix: Vec<Vec<f64>>,
    pub verdicts: Vec<PairVerdict>,
    pub branch_counts: BTreeMap<EngineId, usize>,
    pub arithmetic: BTreeMap<EngineId, Arithmetic>,
}

impl ComparisonReport {
    pub fn all_match(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict == Verdict::Match)
    }

    pub fn tv(&self, a: EngineId, b: EngineId) -> Option<f64> {
        let i = self.engines.iter().position(|&e| e == a)?;
        let j = self.engines.iter().position(|&e| e == b)?;
        Some(self.tv_matrix[i][j])
    }

    pub fn verdict(&self, a: EngineId, b: EngineId) -> Option<Verdict> {
        self.verdicts.iter().find(|v| v.engines == [a, b] || v.engines == [b, a]).map(|v| v.verdict)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub mode: Mode,
    pub tol: Option<f64>,
    /// Compare distributions conditioned on the trace starting with this prefix.
    pub condition: Vec<Parity>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { mode: Mode::Exact, tol: None, condition: Vec::new() }
    }
}

/// Tolerance used for a pair when none is requested: zero between exact
/// distributions, [`DEFAULT_FLOAT_TOL`] otherwise, and for sampled runs the
/// `5·sqrt(k/shots)` concentration bound with `k` the joint support size.
pub fn default_tol(mode: Mode, p: &Distribution, q: &Distribution) -> f64 {
    match mode {
        Mode::Sampled { shots, .. } => {
            let mut support: Vec<&OutcomeTrace> = p.iter().chain(q.iter()).map(|(t, _)| t).collect();
            support.sort();
            support.dedup();
            5.0 * (support.len() as f64 / shots as f64).sqrt()
        }
        Mode::Exact if p.arithmetic() == Arithmetic::ExactDyadic && q.arithmetic() == Arithmetic::ExactDyadic => 0.0,
        Mode::Exact => DEFAULT_FLOAT_TOL,
    }
}

pub fn compare(
    scenario: &Scenario,
    engines: &[EngineHandle],
    options: &CompareOptions,
) -> Result<ComparisonReport, EvalError> {
    if engines.len() < 2 {
        return Err(EvalError::TooFewEngines);
    }
    let runs: Vec<(EngineId, Distribution, usize)> = engines
        .par_iter()
        .map(|&h| -> Result<_, EvalError> {
            let (dist, count) = match options.mode {
                Mode::Exact => {
                    let e = enumerate_exact(h, scenario)?;
                    (e.distribution, e.leaves)
                }
                Mode::Sampled { shots, seed } => {
                    let d = sample(h, scenario, shots, seed)?;
                    let support = d.support_len();
                    (d, support)
                }
            };
            let given: Vec<(usize, Parity)> = options.condition.iter().copied().enumerate().collect();
            let dist = if given.is_empty() {
                dist
            } else {
                dist.conditioned(&given).map_err(|source| EvalError::Distribution { engine: h.id(), source })?
            };
            Ok((h.id(), dist, count))
        })
        .collect::<Result<_, _>>()?;

    let n = runs.len();
    let mut tv_matrix = vec![vec![0.0; n]; n];
    let mut verdicts = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, p, _) = &runs[i];
            let (b, q, _) = &runs[j];
            let tv = tv_distance(p, q).map_err(|source| EvalError::Distribution { engine: *b, source })?;
            let tol = options.tol.unwrap_or_else(|| default_tol(options.mode, p, q));
            tv_matrix[i][j] = round_sig12(tv);
            tv_matrix[j][i] = round_sig12(tv);
            verdicts.push(PairVerdict {
                engines: [*a, *b],
                tv: round_sig12(tv),
                tol,
                verdict: if tv <= tol { Verdict::Match } else { Verdict::Mismatch },
            });
        }
    }
    let (shots, seed) = match options.mode {
        Mode::Sampled { shots, seed } => (Some(shots), Some(seed)),
        Mode::Exact => (None, None),
    };
    Ok(ComparisonReport {
        scenario: scenario.name.clone(),
        engines: runs.iter().map(|r| r.0).collect(),
        mode: options.mode.name().to_string(),
        shots,
        seed,
        tol: options.tol,
        condition: options.condition.clone(),
        tv_matrix,
        verdicts,
        branch_counts: runs.iter().map(|r| (r.0, r.2)).collect(),
        arithmetic: runs.iter().map(|r| (r.0, r.1.arithmetic())).collect(),
    })
}
