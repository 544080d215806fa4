//! Simulators for Majorana zero-mode protocols: a dense quantum reference, a
//! Majorana stabilizer oracle, and two classical hidden-variable models, plus the
//! harness that runs scenarios on them and compares the outcome statistics.

pub mod checks;
pub mod distribution;
pub mod dyadic;
pub mod engine;
pub mod eval;
pub mod hierarchy;
pub mod hv1;
pub mod hv2;
pub mod matching;
pub mod parity;
pub mod protocol;
pub mod quantum;
pub mod scenario_file;
pub mod scenarios;
pub mod stab;

pub use distribution::{
    distributions_equal, tv_distance, Arithmetic, Distribution, DistributionDoc, OutcomeTrace, Probability,
};
pub use dyadic::Dyadic;
pub use engine::{Branch, Engine, EngineError, EngineId};
pub use eval::{
    compare, enumerate_exact, sample, CompareOptions, ComparisonReport, EngineHandle, EvalError, Mode, Verdict,
};
pub use hierarchy::{hierarchy, HierarchyReport, TestClass};
pub use hv2::{CalibrationConvention, Sense, CALIBRATED_CONVENTION};
pub use parity::Parity;
pub use protocol::{pair, Direction, PairSpec, ProtocolStep, Scenario, ValidationError};
pub use scenario_file::{parse_scenario, render_scenario, ScenarioError};
