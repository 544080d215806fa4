//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! report is printed on every `cargo test`.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use majorana_hv::checks::{invariant_suite, Equivalence};
use majorana_hv::hierarchy::TestClass;
use majorana_hv::hv2::{hv2_braid, hv2_init, hv2_joint_measure};
use majorana_hv::scenarios::{calibrate, get_builtin};
use majorana_hv::{
    compare, enumerate_exact, pair, tv_distance, Arithmetic, CompareOptions, Distribution, EngineHandle, EngineId,
    Parity, ProtocolStep, Scenario, Verdict, CALIBRATED_CONVENTION,
};

const FLOAT_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario(name: &str) -> Scenario {
    get_builtin(name).expect("built-in").scenario
}

fn exact(id: EngineId, s: &Scenario) -> Distribution {
    enumerate_exact(EngineHandle::new(id), s).expect("evaluates").distribution
}

/// Exact equality for dyadic distributions, `FLOAT_TOL` otherwise.
fn close(d: &Distribution, got: f64, want: f64) -> bool {
    match d.arithmetic() {
        Arithmetic::ExactDyadic => got == want,
        Arithmetic::Float => (got - want).abs() <= FLOAT_TOL,
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prefixes(d: &Distribution, len: usize) -> BTreeSet<Vec<Parity>> {
    d.iter().map(|(t, _)| t.0[..len].to_vec()).collect()
}

fn given(prefix: &[Parity]) -> Vec<(usize, Parity)> {
    prefix.iter().copied().enumerate().collect()
}

fn mzhv(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_mzhv")).args(args).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn fusion() -> Outcome {
    let same = scenario("fusion-same-pair");
    let dists: Vec<(EngineId, Distribution)> = EngineId::ALL.iter().map(|&e| (e, exact(e, &same))).collect();
    for (id, d) in &dists {
        for first in prefixes(d, 1) {
            let p_odd = d.odd_probability(2, &given(&first)).map_err(|e| e.to_string())?;
            let want = if first[0].is_odd() { 1.0 } else { 0.0 };
            ensure((p_odd - want).abs() <= FLOAT_TOL, || format!("{id}: second (1,2) not fixed by first {first:?}"))?;
        }
    }
    for (i, (a, p)) in dists.iter().enumerate() {
        for (b, q) in &dists[i + 1..] {
            let tv = tv_distance(p, q).map_err(|e| e.to_string())?;
            ensure(tv <= FLOAT_TOL, || format!("same-pair {a} vs {b}: tv {tv}"))?;
        }
    }
    let cross = scenario("fusion-cross-pair");
    for id in EngineId::ALL {
        let d = exact(id, &cross);
        for prefix in prefixes(&d, 2) {
            let p = d.odd_probability(2, &given(&prefix)).map_err(|e| e.to_string())?;
            ensure(close(&d, p, 0.5), || format!("cross-pair {id} after {prefix:?}: P(odd) = {p}"))?;
        }
    }
    Ok("same-pair deterministic on 4 engines, cross-pair final fusion 1/2".into())
}

fn period_four() -> Outcome {
    let pattern = [0.5, 1.0, 0.5, 0.0];
    for n in 1..=8 {
        let s = scenario(&format!("successive-braiding-n{n}"));
        for id in [EngineId::Quantum, EngineId::Stab, EngineId::Hv2] {
            let d = exact(id, &s);
            let p = d.odd_probability(0, &[]).map_err(|e| e.to_string())?;
            ensure(close(&d, p, pattern[(n - 1) % 4]), || format!("n={n} {id}: P(odd) = {p}"))?;
        }
    }
    Ok("n=1..8 gives 1/2,1,1/2,0 cyclically on quantum, stab, hv2".into())
}

fn hv1_braid_failure() -> Outcome {
    let s = scenario("hv1-braid-failure");
    let hv1 = exact(EngineId::Hv1, &s);
    ensure(hv1.odd_probability(0, &[]) == Ok(0.0), || "hv1 is not deterministic even".into())?;
    for id in [EngineId::Quantum, EngineId::Stab, EngineId::Hv2] {
        let d = exact(id, &s);
        let p = d.odd_probability(0, &[]).map_err(|e| e.to_string())?;
        ensure(close(&d, p, 1.0), || format!("{id}: P(odd) = {p}"))?;
    }
    let handles = [EngineHandle::new(EngineId::Quantum), EngineHandle::new(EngineId::Hv1)];
    let r = compare(&s, &handles, &CompareOptions::default()).map_err(|e| e.to_string())?;
    let tv = r.tv(EngineId::Quantum, EngineId::Hv1).unwrap_or(f64::NAN);
    ensure(r.verdict(EngineId::Quantum, EngineId::Hv1) == Some(Verdict::Mismatch), || "verdict is match".into())?;
    ensure((tv - 1.0).abs() <= FLOAT_TOL, || format!("tv {tv}"))?;
    Ok(format!("hv1 even, others odd, mismatch with TV {tv}"))
}

fn knots() -> Outcome {
    for (name, want) in [("knot-p23p23", Parity::Odd), ("knot-p23p32", Parity::Even)] {
        let s = scenario(name);
        let mut st = hv2_init(s.box_count, s.init_pairs()).map_err(|e| e.to_string())?;
        for step in &s.steps {
            if let ProtocolStep::Braid { pair, direction } = step {
                st = hv2_braid(&st, *pair, *direction, CALIBRATED_CONVENTION);
            }
        }
        for p in [pair(1, 2), pair(3, 4)] {
            let found = st.matching().parity_of(p);
            ensure(found == Some(want), || format!("{name}: hv2 {p} is {found:?}"))?;
        }
        let hv2 = exact(EngineId::Hv2, &s);
        let q = exact(EngineId::Quantum, &s);
        let trace = [want, want];
        ensure(hv2.probability(&trace) == 1.0, || format!("{name}: hv2 follow-up not deterministic"))?;
        let pq = q.probability(&trace);
        ensure((pq - 1.0).abs() <= FLOAT_TOL, || format!("{name}: quantum gives {pq}"))?;
    }
    Ok("P23P23 -> odd,odd and P23P32 -> even,even, confirmed by quantum".into())
}

fn joint_entangle() -> Outcome {
    let s = scenario("joint-zz-entangle");
    let ProtocolStep::JointMeasure { first, second } = s.steps[1] else {
        return Err("second step is not a joint measurement".into());
    };
    let st = hv2_init(s.box_count, s.init_pairs()).map_err(|e| e.to_string())?;
    let even: Vec<_> =
        hv2_joint_measure(&st, first, second).into_iter().filter(|b| b.outcome == Parity::Even).collect();
    ensure(even.len() == 2, || format!("{} even branches", even.len()))?;
    ensure(even[0].probability == even[1].probability, || "unequal weights".into())?;
    for b in &even {
        let (x, y) = (b.state.matching().parity_of(first), b.state.matching().parity_of(second));
        ensure(x.is_some() && x == y, || format!("new arcs {first}={x:?} {second}={y:?} not correlated"))?;
    }
    ensure(even[0].state != even[1].state, || "the two even states coincide".into())?;
    let tv = tv_distance(&exact(EngineId::Hv2, &s), &exact(EngineId::Quantum, &s)).map_err(|e| e.to_string())?;
    ensure(tv <= FLOAT_TOL, || format!("follow-up measurements differ from quantum, tv {tv}"))?;
    Ok(format!("two equal-weight correlated states, follow-ups TV {tv:.1e} vs quantum"))
}

fn interference() -> Outcome {
    let s = scenario("interference-6box");
    let even = [(0, Parity::Even)];
    for (id, want) in [(EngineId::Quantum, 0.0), (EngineId::Stab, 0.0), (EngineId::Hv2, 0.5), (EngineId::Hv1, 0.5)] {
        let d = exact(id, &s);
        let p = d.odd_probability(1, &even).map_err(|e| e.to_string())?;
        let ok = if id == EngineId::Quantum { (p - want).abs() <= FLOAT_TOL } else { p == want };
        ensure(ok, || format!("{id}: P((2,5) odd | joint even) = {p}"))?;
    }
    let h = majorana_hv::hierarchy(None).map_err(|e| e.to_string())?;
    for row in &h.rows {
        let cell = row.cells.iter().find(|c| c.class == TestClass::JointInterference).expect("joint column");
        let entry = cell.scenarios.iter().find(|v| v.scenario == "interference-6box").expect("listed");
        let classical = matches!(row.engine, EngineId::Hv1 | EngineId::Hv2);
        let want = if classical { Verdict::Mismatch } else { Verdict::Match };
        ensure(entry.verdict == want && cell.verdict == want, || {
            format!("{} joint cell is {:?}", row.engine, cell.verdict)
        })?;
    }
    Ok("quantum/stab P(even)=1, hv1/hv2 exactly 1/2, joint cell flips".into())
}

fn oracle_equivalences() -> Outcome {
    const CASES: u64 = 240;
    Equivalence::Hv2Stab.check(50_000, CASES)?;
    Equivalence::StabQuantum.check(60_000, CASES)?;
    Equivalence::Hv1Quantum.check(70_000, CASES)?;
    Ok(format!("{CASES} random cases each for hv2=stab, stab=quantum, hv1=quantum"))
}

fn calibration() -> Outcome {
    for oracle in [EngineId::Stab, EngineId::Quantum] {
        let r = calibrate(EngineHandle::new(oracle)).map_err(|e| e.to_string())?;
        ensure(r.unique() == Some(CALIBRATED_CONVENTION), || format!("{oracle}: satisfying {:?}", r.satisfying))?;
        let rejected = CALIBRATED_CONVENTION.flipped().ccw_sense;
        let failing: Vec<&str> = r
            .rows
            .iter()
            .filter(|row| row.ccw_sense == rejected && !row.pass)
            .map(|row| row.scenario.as_str())
            .collect();
        ensure(!failing.is_empty(), || format!("{oracle}: rejected convention fails nothing"))?;
        let (code, _) = mzhv(&["calibrate", "--oracle", oracle.as_str()]);
        ensure(code == 0, || format!("calibrate --oracle {oracle} exited {code}"))?;
    }
    Ok(format!("unique ccw={} for stab and quantum, calibrate exits 0", CALIBRATED_CONVENTION.ccw_sense))
}

fn invariants() -> Outcome {
    let cov = invariant_suite(1000, 500)?;
    ensure(cov.random_steps >= 1000 && cov.confluence_cases >= 500, || format!("{cov:?}"))?;
    Ok(format!(
        "{} random steps, {} states, {} confluence cases, {} distributions",
        cov.random_steps, cov.states_checked, cov.confluence_cases, cov.distributions
    ))
}

fn hierarchy_verdict() -> Outcome {
    let (code, table) = mzhv(&["hierarchy"]);
    ensure(code == 0, || format!("hierarchy exited {code}"))?;
    for row in [
        "| hv1 | quantum | ✓ | ✗ | ✗ |",
        "| hv2 | quantum | ✓ | ✓ | ✗ |",
        "| stab | quantum | ✓ | ✓ | ✓ |",
        "| quantum | stab | ✓ | ✓ | ✓ |",
    ] {
        ensure(table.contains(row), || format!("missing row {row}"))?;
    }
    Ok("hierarchy exits 0 with the expected table".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("fusion equivalence", fusion),
        ("period-4 braiding table", period_four),
        ("hv1 braiding failure", hv1_braid_failure),
        ("knot bookkeeping", knots),
        ("joint-measurement entanglement", joint_entangle),
        ("interference discriminator", interference),
        ("oracle equivalences", oracle_equivalences),
        ("calibration uniqueness", calibration),
        ("invariant suite", invariants),
        ("hierarchy verdict", hierarchy_verdict),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
