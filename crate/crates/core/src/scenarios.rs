//! Named scenarios with expected outcomes, random scenario generators, and the
//! calibration of the hv2 braid convention against an oracle engine.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::distribution::{round_sig12, tv_distance, Distribution};
use crate::dyadic::Dyadic;
use crate::engine::EngineId;
use crate::eval::{enumerate_exact, EngineHandle, EvalError};
use crate::hv2::{CalibrationConvention, Sense};
use crate::parity::Parity;
use crate::protocol::{Direction, ProtocolStep, Scenario};

/// Slack allowed when a floating distribution is checked against an exact value.
pub const FLOAT_CHECK_TOL: f64 = 1e-9;

/// Where an expected value comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "note")]
pub enum Basis {
    /// Stated outcome of a published experiment or model calculation, with a short pointer.
    Literature(String),
    /// Follows from definitions alone.
    Definition,
    /// Computed with an independent engine or by hand.
    Computed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "check")]
pub enum Check {
    /// `P(outcome[index] = odd | outcomes fixed by given) = value`.
    OddProbability { index: usize, given: Vec<(usize, Parity)>, value: Dyadic },
    /// The whole trace distribution.
    Exact { entries: Vec<(Vec<Parity>, Dyadic)> },
    /// Same distribution as `reference`.
    SameAs { reference: EngineId },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub engines: Vec<EngineId>,
    pub check: Check,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuiltinScenario {
    pub name: String,
    pub description: String,
    pub scenario: Scenario,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown built-in scenario `{0}`")]
    Unknown(String),
    #[error("`{0}` is reserved; its construction is not available")]
    Reserved(String),
}

pub const SUCCESSIVE_MAX: usize = 8;

/// Names reserved for protocols whose construction is not available.
pub const RESERVED: [&str; 1] = ["cnot-braid"];

const QUANTUM_LIKE: [EngineId; 3] = [EngineId::Quantum, EngineId::Stab, EngineId::Hv2];
const ALL: [EngineId; 4] = EngineId::ALL;

fn lit(note: &str) -> Basis {
    Basis::Literature(note.to_string())
}

fn even_even_init() -> ProtocolStep {
    ProtocolStep::init(&[((1, 2), Parity::Even), ((3, 4), Parity::Even)])
}

fn odd_p(index: usize, given: &[(usize, Parity)], value: Dyadic) -> Check {
    Check::OddProbability { index, given: given.to_vec(), value }
}

fn build(
    name: &str,
    description: &str,
    box_count: usize,
    steps: Vec<ProtocolStep>,
    expectations: Vec<Expectation>,
) -> BuiltinScenario {
    BuiltinScenario {
        name: name.to_string(),
        description: description.to_string(),
        scenario: Scenario::new(name, box_count, steps).expect("built-in scenarios are valid"),
        expectations,
    }
}

fn successive(n: usize) -> BuiltinScenario {
    let mut steps = vec![even_even_init()];
    steps.extend((0..n).map(|_| ProtocolStep::braid(2, 3, Direction::Ccw)));
    steps.push(ProtocolStep::measure(3, 4));
    let value = match n % 4 {
        1 | 3 => Dyadic::HALF,
        2 => Dyadic::ONE,
        _ => Dyadic::ZERO,
    };
    build(
        &format!("successive-braiding-n{n}"),
        &format!(
            "{n} counter-clockwise exchange{} of boxes 2 and 3, then the (3,4) parity",
            if n == 1 { "" } else { "s" }
        ),
        4,
        steps,
        vec![Expectation {
            engines: QUANTUM_LIKE.to_vec(),
            check: odd_p(0, &[], value),
            basis: lit("successive-braiding table: P(odd) is 1/2, 1, 1/2, 0 with period 4"),
        }],
    )
}

fn hadamard(measured: (usize, usize)) -> BuiltinScenario {
    let name = match measured {
        (1, 2) => "hadamard-braid".to_string(),
        (a, b) => format!("hadamard-braid-{a}{b}"),
    };
    build(
        &name,
        &format!("H = B12 B23 B12 on the even-even state, then the ({},{}) parity", measured.0, measured.1),
        4,
        vec![
            even_even_init(),
            ProtocolStep::braid(1, 2, Direction::Ccw),
            ProtocolStep::braid(2, 3, Direction::Ccw),
            ProtocolStep::braid(1, 2, Direction::Ccw),
            ProtocolStep::measure(measured.0, measured.1),
        ],
        vec![Expectation {
            engines: vec![EngineId::Stab, EngineId::Hv2],
            check: Check::SameAs { reference: EngineId::Quantum },
            basis: Basis::Computed("measurement table taken from the quantum engine".into()),
        }],
    )
}

fn catalog() -> Vec<BuiltinScenario> {
    use Parity::*;
    let mut out = vec![
        build(
            "fusion-same-pair",
            "split an unknown 4-box state into (1,2),(3,4), then fuse (1,2) again",
            4,
            vec![
                ProtocolStep::init(&[((1, 4), Even), ((2, 3), Even)]),
                ProtocolStep::measure(1, 2),
                ProtocolStep::measure(3, 4),
                ProtocolStep::measure(1, 2),
            ],
            vec![
                Expectation {
                    engines: ALL.to_vec(),
                    check: Check::Exact {
                        entries: vec![(vec![Even, Even, Even], Dyadic::HALF), (vec![Odd, Odd, Odd], Dyadic::HALF)],
                    },
                    basis: lit("fusion in the creation pair gives a deterministic result"),
                },
                Expectation {
                    engines: ALL.to_vec(),
                    check: odd_p(2, &[(0, Even)], Dyadic::ZERO),
                    basis: lit("fusion in the creation pair gives a deterministic result"),
                },
            ],
        ),
        build(
            "fusion-cross-pair",
            "create (1,2),(3,4), split into (2,3),(1,4), then fuse (1,2)",
            4,
            vec![
                even_even_init(),
                ProtocolStep::measure(2, 3),
                ProtocolStep::measure(1, 4),
                ProtocolStep::measure(1, 2),
            ],
            vec![
                Expectation {
                    engines: ALL.to_vec(),
                    check: odd_p(2, &[(0, Even), (1, Even)], Dyadic::HALF),
                    basis: lit("fusion across pairs gives even or odd with equal probability"),
                },
                Expectation {
                    engines: ALL.to_vec(),
                    check: odd_p(2, &[(0, Odd), (1, Odd)], Dyadic::HALF),
                    basis: lit("fusion across pairs gives even or odd with equal probability"),
                },
            ],
        ),
    ];
    out.extend((1..=SUCCESSIVE_MAX).map(successive));
    out.extend([hadamard((1, 2)), hadamard((2, 3)), hadamard((1, 3))]);
    out.push(build(
        "hv1-braid-failure",
        "one exchange of boxes 2 and 3, then the (1,3) parity",
        4,
        vec![even_even_init(), ProtocolStep::braid(2, 3, Direction::Ccw), ProtocolStep::measure(1, 3)],
        vec![
            Expectation {
                engines: vec![EngineId::Hv1],
                check: odd_p(0, &[], Dyadic::ZERO),
                basis: lit("model I relabels boxes and reads even"),
            },
            Expectation {
                engines: QUANTUM_LIKE.to_vec(),
                check: odd_p(0, &[], Dyadic::ONE),
                basis: lit("the braided state has definite odd (1,3) parity"),
            },
        ],
    ));
    out.push(build(
        "knot-p23p23",
        "two counter-clockwise exchanges of boxes 2 and 3, then both pair parities",
        4,
        vec![
            even_even_init(),
            ProtocolStep::braid(2, 3, Direction::Ccw),
            ProtocolStep::braid(2, 3, Direction::Ccw),
            ProtocolStep::measure(1, 2),
            ProtocolStep::measure(3, 4),
        ],
        vec![Expectation {
            engines: QUANTUM_LIKE.to_vec(),
            check: Check::Exact { entries: vec![(vec![Odd, Odd], Dyadic::ONE)] },
            basis: lit("a double exchange ends in odd-odd"),
        }],
    ));
    out.push(build(
        "knot-p23p32",
        "an exchange of boxes 2 and 3 and its inverse, then both pair parities",
        4,
        vec![
            even_even_init(),
            ProtocolStep::braid(2, 3, Direction::Ccw),
            ProtocolStep::braid(2, 3, Direction::Cw),
            ProtocolStep::measure(1, 2),
            ProtocolStep::measure(3, 4),
        ],
        vec![Expectation {
            engines: QUANTUM_LIKE.to_vec(),
            check: Check::Exact { entries: vec![(vec![Even, Even], Dyadic::ONE)] },
            basis: lit("an exchange followed by its inverse restores even-even"),
        }],
    ));
    let zz = Dyadic::inverse_power_of_two(2);
    out.push(build(
        "joint-zz-entangle",
        "two 4-box qubits in the (|0>+|1>)/sqrt2 analog, joint parity of (1,2),(5,6), then every pair",
        8,
        vec![
            ProtocolStep::init(&[((1, 4), Even), ((2, 3), Even), ((5, 8), Even), ((6, 7), Even)]),
            ProtocolStep::joint((1, 2), (5, 6)),
            ProtocolStep::measure(1, 2),
            ProtocolStep::measure(5, 6),
            ProtocolStep::measure(3, 4),
            ProtocolStep::measure(7, 8),
        ],
        vec![
            Expectation {
                engines: ALL.to_vec(),
                check: Check::Exact {
                    entries: vec![
                        (vec![Even, Even, Even, Even, Even], zz),
                        (vec![Even, Odd, Odd, Odd, Odd], zz),
                        (vec![Odd, Even, Odd, Even, Odd], zz),
                        (vec![Odd, Odd, Even, Odd, Even], zz),
                    ],
                },
                basis: lit("an even joint outcome leaves two equally likely, perfectly correlated states"),
            },
            Expectation {
                engines: ALL.to_vec(),
                check: odd_p(2, &[(0, Even), (1, Odd)], Dyadic::ONE),
                basis: lit("an even joint outcome leaves two equally likely, perfectly correlated states"),
            },
        ],
    ));
    out.push(build(
        "interference-6box",
        "joint parity of (2,3),(4,5) on three even pairs, then the (2,5) parity",
        6,
        vec![
            ProtocolStep::init(&[((1, 2), Even), ((3, 4), Even), ((5, 6), Even)]),
            ProtocolStep::joint((2, 3), (4, 5)),
            ProtocolStep::measure(2, 5),
        ],
        vec![
            Expectation {
                engines: vec![EngineId::Quantum, EngineId::Stab],
                check: odd_p(1, &[(0, Even)], Dyadic::ZERO),
                basis: lit("interference makes the (2,5) parity definitely even"),
            },
            Expectation {
                engines: vec![EngineId::Hv1, EngineId::Hv2],
                check: odd_p(1, &[(0, Even)], Dyadic::HALF),
                basis: lit("the classical models keep two uncertain branches"),
            },
        ],
    ));
    out
}

/// Every built-in, in catalog order.
pub fn builtins() -> Vec<BuiltinScenario> {
    catalog()
}

pub fn builtin_names() -> Vec<String> {
    catalog().into_iter().map(|b| b.name).collect()
}

pub fn get_builtin(name: &str) -> Result<BuiltinScenario, CatalogError> {
    if RESERVED.contains(&name) {
        return Err(CatalogError::Reserved(name.to_string()));
    }
    catalog().into_iter().find(|b| b.name == name).ok_or_else(|| CatalogError::Unknown(name.to_string()))
}

/// One failed expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationFailure {
    pub scenario: String,
    pub engine: EngineId,
    pub check: Check,
    pub found: String,
}

fn close(found: f64, want: Dyadic, exact: Option<Dyadic>) -> bool {
    match exact {
        Some(d) => d == want,
        None => (found - want.to_f64()).abs() <= FLOAT_CHECK_TOL,
    }
}

fn exact_odd(d: &Distribution, index: usize, given: &[(usize, Parity)]) -> Option<Dyadic> {
    let cond = d.conditioned(given).ok()?;
    cond.iter().filter(|(t, _)| t.0[index].is_odd()).map(|(_, p)| p.exact()).sum::<Option<Dyadic>>()
}

/// Evaluates the expectations of `builtin` that name `engine`.
pub fn check_expectations(
    builtin: &BuiltinScenario,
    engine: EngineHandle,
) -> Result<Vec<ExpectationFailure>, EvalError> {
    let id = engine.id();
    let relevant: Vec<&Expectation> = builtin.expectations.iter().filter(|e| e.engines.contains(&id)).collect();
    if relevant.is_empty() {
        return Ok(Vec::new());
    }
    let dist = enumerate_exact(engine, &builtin.scenario)?.distribution;
    let mut failures = Vec::new();
    for e in relevant {
        let found = match &e.check {
            Check::OddProbability { index, given, value } => {
                let p = dist.odd_probability(*index, given).ok();
                let exact = exact_odd(&dist, *index, given);
                match p {
                    Some(p) if close(p, *value, exact) => None,
                    Some(p) => Some(format!("P(odd) = {p}")),
                    None => Some("conditioning event has probability zero".into()),
                }
            }
            Check::Exact { entries } => {
                let ok = dist.support_len() == entries.len()
                    && entries.iter().all(|(t, want)| {
                        let exact = dist.get(t).and_then(|p| p.exact());
                        close(dist.probability(t), *want, exact)
                    });
                (!ok).then(|| format!("{dist:?}"))
            }
            Check::SameAs { reference } => {
                let other = enumerate_exact(EngineHandle::new(*reference), &builtin.scenario)?.distribution;
                let tv = tv_distance(&dist, &other).map_err(|source| EvalError::Distribution { engine: id, source })?;
                (tv > FLOAT_CHECK_TOL).then(|| format!("TV to {reference} = {tv}"))
            }
        };
        if let Some(found) = found {
            failures.push(ExpectationFailure {
                scenario: builtin.name.clone(),
                engine: id,
                check: e.check.clone(),
                found,
            });
        }
    }
    Ok(failures)
}

fn random_matching(rng: &mut ChaCha8Rng, box_count: usize) -> Vec<((usize, usize), Parity)> {
    let mut boxes: Vec<usize> = (1..=box_count).collect();
    boxes.shuffle(rng);
    boxes.chunks(2).map(|c| ((c[0], c[1]), Parity::Even)).collect()
}

fn random_pair(rng: &mut ChaCha8Rng, box_count: usize) -> (usize, usize) {
    let a = rng.gen_range(1..=box_count);
    let mut b = rng.gen_range(1..box_count);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn random_steps(rng: &mut ChaCha8Rng, box_count: usize, max_steps: usize, kinds: &[u8]) -> Vec<ProtocolStep> {
    let count = rng.gen_range(0..=max_steps);
    (0..count)
        .map(|_| match kinds[rng.gen_range(0..kinds.len())] {
            0 => {
                let a = rng.gen_range(1..box_count);
                let dir = if rng.gen_bool(0.5) { Direction::Ccw } else { Direction::Cw };
                ProtocolStep::braid(a, a + 1, dir)
            }
            1 => {
                let (a, b) = random_pair(rng, box_count);
                ProtocolStep::measure(a, b)
            }
            _ => {
                let mut boxes: Vec<usize> = (1..=box_count).collect();
                boxes.shuffle(rng);
                ProtocolStep::joint((boxes[0], boxes[1]), (boxes[2], boxes[3]))
            }
        })
        .collect()
}

fn check_box_count(box_count: usize) {
    assert!(box_count.is_multiple_of(2) && (4..=10).contains(&box_count), "box count must be even and in 4..=10");
}

/// A random all-even matching followed by up to `max_steps` uniformly drawn braids,
/// pair measurements and, if allowed, joint measurements.
pub fn random_scenario(box_count: usize, max_steps: usize, allow_joint: bool, seed: u64) -> Scenario {
    check_box_count(box_count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = vec![ProtocolStep::init(&random_matching(&mut rng, box_count))];
    let kinds: &[u8] = if allow_joint { &[0, 1, 2] } else { &[0, 1] };
    steps.extend(random_steps(&mut rng, box_count, max_steps, kinds));
    Scenario::new(format!("random-{box_count}-{seed}"), box_count, steps).expect("generated scenarios are valid")
}

/// Like [`random_scenario`] with pair measurements only.
pub fn random_measure_only(box_count: usize, max_steps: usize, seed: u64) -> Scenario {
    check_box_count(box_count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = vec![ProtocolStep::init(&random_matching(&mut rng, box_count))];
    steps.extend(random_steps(&mut rng, box_count, max_steps, &[1]));
    Scenario::new(format!("random-measure-{box_count}-{seed}"), box_count, steps)
        .expect("generated scenarios are valid")
}

/// Scenarios used to fix the hv2 braid convention.
pub fn calibration_suite() -> Vec<BuiltinScenario> {
    let mut names: Vec<String> = (1..=4).map(|n| format!("successive-braiding-n{n}")).collect();
    names.extend(
        ["hv1-braid-failure", "knot-p23p23", "knot-p23p32", "hadamard-braid", "hadamard-braid-23", "hadamard-braid-13"]
            .map(String::from),
    );
    names.iter().map(|n| get_builtin(n).expect("calibration scenarios are built in")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub scenario: String,
    pub ccw_sense: Sense,
    pub tv: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub oracle: EngineId,
    pub rows: Vec<CalibrationRow>,
    pub satisfying: Vec<CalibrationConvention>,
}

impl CalibrationReport {
    pub fn unique(&self) -> Option<CalibrationConvention> {
        match self.satisfying.as_slice() {
            [c] => Some(*c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("{0} is not a quantum oracle")]
    NotAnOracle(EngineId),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Runs the calibration suite on hv2 under both conventions and compares with `oracle`.
pub fn calibrate(oracle: EngineHandle) -> Result<CalibrationReport, CalibrationError> {
    if !oracle.id().is_oracle() {
        return Err(CalibrationError::NotAnOracle(oracle.id()));
    }
    let tol = if oracle.id() == EngineId::Quantum { FLOAT_CHECK_TOL } else { 0.0 };
    let mut rows = Vec::new();
    let mut satisfying = Vec::new();
    for sense in [Sense::RightFront, Sense::LeftFront] {
        let convention = CalibrationConvention::new(sense);
        let mut all = true;
        for b in calibration_suite() {
            let reference = enumerate_exact(oracle, &b.scenario)?.distribution;
            let hv2 = enumerate_exact(EngineHandle::Hv2(convention), &b.scenario)?.distribution;
            let tv = tv_distance(&hv2, &reference)
                .map_err(|source| EvalError::Distribution { engine: EngineId::Hv2, source })?;
            let pass = tv <= tol;
            all &= pass;
            rows.push(CalibrationRow { scenario: b.name, ccw_sense: sense, tv: round_sig12(tv), pass });
        }
        if all {
            satisfying.push(convention);
        }
    }
    Ok(CalibrationReport { oracle: oracle.id(), rows, satisfying })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_are_unique_and_resolvable() {
        let names = builtin_names();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for n in &names {
            assert_eq!(&get_builtin(n).unwrap().name, n);
        }
        assert_eq!(get_builtin("nope"), Err(CatalogError::Unknown("nope".into())));
        assert!(matches!(get_builtin("cnot-braid"), Err(CatalogError::Reserved(_))));
    }

    #[test]
    fn successive_two_is_shaped_as_documented() {
        let b = get_builtin("successive-braiding-n2").unwrap();
        assert_eq!(b.scenario.box_count, 4);
        assert_eq!(b.scenario.steps.len(), 4);
        assert_eq!(b.scenario.steps[1], ProtocolStep::braid(2, 3, Direction::Ccw));
        assert_eq!(b.scenario.steps[3], ProtocolStep::measure(3, 4));
    }

    #[test]
    fn random_generators_respect_options() {
        let s = random_scenario(4, 0, false, 9);
        assert_eq!(s.steps.len(), 1);
        for seed in 0..50 {
            let s = random_scenario(6, 10, false, seed);
            assert!(s.steps.len() <= 11);
            assert!(!s.steps.iter().any(|x| matches!(x, ProtocolStep::JointMeasure { .. })));
            assert!(s.init_pairs().iter().all(|(_, p)| *p == Parity::Even));
            let m = random_measure_only(8, 10, seed);
            assert!(m.steps[1..].iter().all(|x| matches!(x, ProtocolStep::MeasurePair { .. })));
        }
        assert_eq!(random_scenario(8, 10, true, 5), random_scenario(8, 10, true, 5));
    }
}
