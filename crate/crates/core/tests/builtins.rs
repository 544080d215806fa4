use majorana_hv::eval::{enumerate_exact, EngineHandle};
use majorana_hv::scenarios::{builtins, check_expectations};
use majorana_hv::EngineId;

#[test]
fn every_builtin_expectation_holds() {
    let mut failures = Vec::new();
    for b in builtins() {
        for id in EngineId::ALL {
            failures.extend(check_expectations(&b, EngineHandle::new(id)).unwrap());
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn every_builtin_distribution_is_normalized() {
    for b in builtins() {
        for id in EngineId::ALL {
            let e = enumerate_exact(EngineHandle::new(id), &b.scenario).unwrap();
            e.distribution.check_normalized().unwrap_or_else(|err| panic!("{} on {id}: {err}", b.name));
            assert_eq!(e.distribution.trace_len(), b.scenario.measurement_count());
        }
    }
}

#[test]
fn shipped_scenario_files_match_the_catalog() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scenarios");
    let mut files = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let parsed = majorana_hv::parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let builtin = majorana_hv::scenarios::get_builtin(&parsed.name).unwrap();
        assert_eq!(parsed, builtin.scenario, "{}", path.display());
        files += 1;
    }
    assert_eq!(files, builtins().len());
}
