use majorana_hv::checks::{
    braid_inverse, invariant_suite, measurement_idempotent, reachable_states, sector_conserved, StateEquivalence,
};
use majorana_hv::hv1::Hv1Engine;
use majorana_hv::hv2::Hv2Engine;
use majorana_hv::quantum::QuantumEngine;
use majorana_hv::scenarios::get_builtin;
use majorana_hv::stab::StabEngine;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn full_suite_passes() {
    let cov = invariant_suite(1000, 200).unwrap();
    assert!(cov.random_steps >= 1000);
    assert!(cov.states_checked > 100);
}

#[test]
fn sector_check_counts_branch_steps() {
    // init, joint (2 branches), then one measurement on each of them
    let s = get_builtin("interference-6box").unwrap().scenario;
    assert_eq!(sector_conserved(&StabEngine, &s).unwrap(), 2 + 2);
}

fn per_engine<E: StateEquivalence>(engine: &E) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, st) in reachable_states(engine, 500, 20).unwrap() {
        measurement_idempotent(engine, &st, n, &mut rng).unwrap();
        braid_inverse(engine, &st, n, &mut rng).unwrap();
    }
}

#[test]
fn state_checks_hold_per_engine() {
    per_engine(&QuantumEngine);
    per_engine(&StabEngine);
    per_engine(&Hv1Engine);
    per_engine(&Hv2Engine::default());
}
