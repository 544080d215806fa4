//! Class-by-engine verdict table over the built-in suite.
//!
//! Every row engine is compared against a reference engine: quantum for
//! hv1, hv2 and stab, and stab for the quantum row itself. A cell is a match
//! when every scenario in the class matches at the configured tolerance.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::short_number;
use crate::engine::EngineId;
use crate::eval::{compare, CompareOptions, EngineHandle, EvalError, Mode, Verdict};
use crate::parity::Parity;
use crate::scenarios::{get_builtin, SUCCESSIVE_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestClass {
    Fusion,
    Braiding,
    JointInterference,
}

impl TestClass {
    pub const ALL: [TestClass; 3] = [TestClass::Fusion, TestClass::Braiding, TestClass::JointInterference];

    pub fn as_str(self) -> &'static str {
        match self {
            TestClass::Fusion => "fusion",
            TestClass::Braiding => "braiding",
            TestClass::JointInterference => "joint-interference",
        }
    }

    /// Built-ins in this class with the outcome prefix each is conditioned on.
    pub fn members(self) -> Vec<(String, Vec<Parity>)> {
        match self {
            TestClass::Fusion => vec![("fusion-same-pair".into(), vec![]), ("fusion-cross-pair".into(), vec![])],
            TestClass::Braiding => {
                let mut v: Vec<(String, Vec<Parity>)> =
                    (1..=SUCCESSIVE_MAX).map(|n| (format!("successive-braiding-n{n}"), vec![])).collect();
                for name in [
                    "hv1-braid-failure",
                    "knot-p23p23",
                    "knot-p23p32",
                    "hadamard-braid",
                    "hadamard-braid-23",
                    "hadamard-braid-13",
                ] {
                    v.push((name.into(), vec![]));
                }
                v
            }
            TestClass::JointInterference => {
                vec![("joint-zz-entangle".into(), vec![]), ("interference-6box".into(), vec![Parity::Even])]
            }
        }
    }
}

impl fmt::Display for TestClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rows of the table, in display order.
pub const ROWS: [EngineId; 4] = [EngineId::Hv1, EngineId::Hv2, EngineId::Stab, EngineId::Quantum];

/// Engine each row is compared against.
pub fn reference_for(engine: EngineId) -> EngineId {
    match engine {
        EngineId::Quantum => EngineId::Stab,
        _ => EngineId::Quantum,
    }
}

/// The table the models are expected to produce, indexed like [`TestClass::ALL`].
pub fn expected_row(engine: EngineId) -> [Verdict; 3] {
    use Verdict::*;
    match engine {
        EngineId::Hv1 => [Match, Mismatch, Mismatch],
        EngineId::Hv2 => [Match, Match, Mismatch],
        EngineId::Stab | EngineId::Quantum => [Match, Match, Match],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioVerdict {
    pub scenario: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub condition: Vec<Parity>,
    pub tv: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub class: TestClass,
    pub verdict: Verdict,
    pub scenarios: Vec<ScenarioVerdict>,
}

impl Cell {
    pub fn max_tv(&self) -> f64 {
        self.scenarios.iter().map(|s| s.tv).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub engine: EngineId,
    pub reference: EngineId,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    /// Requested tolerance; `null` means the per-pair comparison defaults.
    pub tol: Option<f64>,
    pub rows: Vec<Row>,
}

impl HierarchyReport {
    pub fn verdict(&self, engine: EngineId, class: TestClass) -> Option<Verdict> {
        let row = self.rows.iter().find(|r| r.engine == engine)?;
        row.cells.iter().find(|c| c.class == class).map(|c| c.verdict)
    }

    /// One line per cell that differs from [`expected_row`].
    pub fn diff(&self) -> Vec<String> {
        let mut out = Vec::new();
        for engine in ROWS {
            for (class, want) in TestClass::ALL.into_iter().zip(expected_row(engine)) {
                match self.verdict(engine, class) {
                    Some(got) if got == want => {}
                    Some(got) => out.push(format!(
                        "{engine}/{class}: expected {}, found {}",
                        verdict_word(want),
                        verdict_word(got)
                    )),
                    None => out.push(format!("{engine}/{class}: missing")),
                }
            }
        }
        out
    }

    pub fn matches_expected(&self) -> bool {
        self.diff().is_empty()
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("| engine | vs | fusion | braiding | joint-interference |\n");
        s.push_str("|---|---|---|---|---|\n");
        for row in &self.rows {
            let _ = write!(s, "| {} | {} |", row.engine, row.reference);
            for c in &row.cells {
                let _ = write!(s, " {} |", mark(c.verdict));
            }
            s.push('\n');
        }
        s.push_str("\n| engine | scenario | TV | tol | verdict |\n");
        s.push_str("|---|---|---|---|---|\n");
        for row in &self.rows {
            for c in &row.cells {
                for v in &c.scenarios {
                    let name = if v.condition.is_empty() {
                        v.scenario.clone()
                    } else {
                        let prefix: Vec<&str> = v.condition.iter().map(|p| p.as_str()).collect();
                        format!("{} \\| [{}]", v.scenario, prefix.join(","))
                    };
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {} | {} |",
                        row.engine,
                        name,
                        short_number(v.tv),
                        short_number(v.tol),
                        mark(v.verdict)
                    );
                }
            }
        }
        s
    }
}

fn mark(v: Verdict) -> &'static str {
    match v {
        Verdict::Match => "✓",
        Verdict::Mismatch => "✗",
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Match => "match",
        Verdict::Mismatch => "mismatch",
    }
}

/// Runs every class member on all four engines and fills in the table.
pub fn hierarchy(tol: Option<f64>) -> Result<HierarchyReport, EvalError> {
    let handles: Vec<EngineHandle> = EngineId::ALL.iter().map(|&e| EngineHandle::new(e)).collect();
    let jobs: Vec<(TestClass, String, Vec<Parity>)> =
        TestClass::ALL.into_iter().flat_map(|c| c.members().into_iter().map(move |(n, p)| (c, n, p))).collect();
    let reports = jobs
        .par_iter()
        .map(|(_, name, condition)| {
            let b = get_builtin(name).expect("hierarchy members are built in");
            let options = CompareOptions { mode: Mode::Exact, tol, condition: condition.clone() };
            compare(&b.scenario, &handles, &options)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows = ROWS
        .into_iter()
        .map(|engine| {
            let reference = reference_for(engine);
            let cells = TestClass::ALL
                .into_iter()
                .map(|class| {
                    let scenarios: Vec<ScenarioVerdict> = jobs
                        .iter()
                        .zip(&reports)
                        .filter(|((c, _, _), _)| *c == class)
                        .map(|((_, name, condition), r)| {
                            let pv = r
                                .verdicts
                                .iter()
                                .find(|v| v.engines == [engine, reference] || v.engines == [reference, engine])
                                .expect("all engine pairs are compared");
                            ScenarioVerdict {
                                scenario: name.clone(),
                                condition: condition.clone(),
                                tv: pv.tv,
                                tol: pv.tol,
                                verdict: pv.verdict,
                            }
                        })
                        .collect();
                    let verdict = if scenarios.iter().all(|s| s.verdict == Verdict::Match) {
                        Verdict::Match
                    } else {
                        Verdict::Mismatch
                    };
                    Cell { class, verdict, scenarios }
                })
                .collect();
            Row { engine, reference, cells }
        })
        .collect();
    Ok(HierarchyReport { tol, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_member_is_a_builtin() {
        for class in TestClass::ALL {
            for (name, _) in class.members() {
                assert!(get_builtin(&name).is_ok(), "{name}");
            }
        }
    }

    #[test]
    fn default_run_reproduces_expected_table() {
        let r = hierarchy(None).unwrap();
        assert!(r.matches_expected(), "{:?}\n{}", r.diff(), r.to_markdown());
    }

    #[test]
    fn diff_names_the_deviating_cell() {
        let mut r = hierarchy(None).unwrap();
        r.rows[1].cells[2].verdict = Verdict::Match;
        assert_eq!(r.diff(), vec!["hv2/joint-interference: expected mismatch, found match".to_string()]);
    }
}
