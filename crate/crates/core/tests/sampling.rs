use majorana_hv::scenarios::get_builtin;
use majorana_hv::{
    compare, enumerate_exact, sample, tv_distance, CompareOptions, EngineHandle, EngineId, Mode, Verdict,
};

#[test]
fn cross_pair_frequencies_converge() {
    let s = get_builtin("fusion-cross-pair").unwrap().scenario;
    for id in EngineId::ALL {
        let h = EngineHandle::new(id);
        let exact = enumerate_exact(h, &s).unwrap().distribution;
        let sampled = sample(h, &s, 10_000, 3).unwrap();
        sampled.check_normalized().unwrap();
        let tv = tv_distance(&exact, &sampled).unwrap();
        assert!(tv < 0.02, "{id}: tv {tv}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let s = get_builtin("interference-6box").unwrap().scenario;
    let h = EngineHandle::new(EngineId::Hv2);
    let a = sample(h, &s, 1000, 7).unwrap();
    let b = sample(h, &s, 1000, 7).unwrap();
    let c = sample(h, &s, 1000, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn sampled_comparison_separates_hv1_on_braiding() {
    let s = get_builtin("hv1-braid-failure").unwrap().scenario;
    let handles =
        [EngineHandle::new(EngineId::Quantum), EngineHandle::new(EngineId::Hv1), EngineHandle::new(EngineId::Hv2)];
    let options = CompareOptions { mode: Mode::Sampled { shots: 2000, seed: 1 }, ..CompareOptions::default() };
    let r = compare(&s, &handles, &options).unwrap();
    assert_eq!(r.verdict(EngineId::Quantum, EngineId::Hv1), Some(Verdict::Mismatch));
    assert_eq!(r.verdict(EngineId::Quantum, EngineId::Hv2), Some(Verdict::Match));
    assert_eq!(r.shots, Some(2000));
}
