use majorana_hv::scenarios::{random_measure_only, random_scenario};
use majorana_hv::{parse_scenario, render_scenario, tv_distance, Distribution, Dyadic, Parity};
use proptest::prelude::*;

const TRACE_LEN: usize = 3;

fn trace(i: usize) -> Vec<Parity> {
    (0..TRACE_LEN).map(|k| Parity::from_bit(i >> k & 1 == 1)).collect()
}

/// Exact distribution over up to eight traces with denominator 64.
fn exact_dist() -> impl Strategy<Value = Distribution> {
    (prop::collection::vec(0u64..8, 1..8), 0usize..8).prop_map(|(ws, offset)| {
        let used: u64 = ws.iter().sum();
        let mut items: Vec<(Vec<Parity>, Dyadic)> = ws
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(i, &w)| (trace((i + offset) % 8), Dyadic::new(w, 6)))
            .collect();
        items.push((trace((ws.len() + offset) % 8), Dyadic::new(64 - used, 6)));
        Distribution::exact(items)
    })
}

fn float_dist() -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, 8).prop_filter("some mass", |w| w.iter().sum::<f64>() > 0.1).prop_map(|w| {
        let total: f64 = w.iter().sum();
        Distribution::float(w.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, &x)| (trace(i), x / total)))
    })
}

fn any_dist() -> impl Strategy<Value = Distribution> {
    prop_oneof![exact_dist(), float_dist()]
}

proptest! {
    #[test]
    fn generated_distributions_are_normalized(d in any_dist()) {
        prop_assert!(d.check_normalized().is_ok());
    }

    #[test]
    fn tv_is_a_metric(p in any_dist(), q in any_dist(), r in any_dist()) {
        let pq = tv_distance(&p, &q).unwrap();
        prop_assert_eq!(pq, tv_distance(&q, &p).unwrap());
        prop_assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        let pr = tv_distance(&p, &r).unwrap();
        let rq = tv_distance(&r, &q).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
    }

    #[test]
    fn exact_tv_has_dyadic_value(p in exact_dist(), q in exact_dist()) {
        let tv = tv_distance(&p, &q).unwrap() * 128.0;
        prop_assert_eq!(tv, tv.round());
    }

    #[test]
    fn conditioning_stays_normalized(p in exact_dist(), first in any::<bool>()) {
        let given = [(0, Parity::from_bit(first))];
        if let Ok(c) = p.conditioned(&given) {
            prop_assert!(c.check_normalized().is_ok());
            prop_assert!(c.iter().all(|(t, _)| t.0[0] == Parity::from_bit(first)));
        }
    }

    #[test]
    fn scenario_text_round_trips(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 6, 8, 10]), joint in any::<bool>()) {
        let s = random_scenario(n, 12, joint, seed);
        prop_assert_eq!(parse_scenario(&render_scenario(&s)).unwrap(), s.clone());
        let m = random_measure_only(n, 12, seed);
        prop_assert_eq!(parse_scenario(&render_scenario(&m)).unwrap(), m);
    }

    #[test]
    fn random_scenarios_validate(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 6, 8, 10]), max in 0usize..15) {
        let s = random_scenario(n, max, true, seed);
        prop_assert!(s.validate().is_ok());
        prop_assert!(s.steps.len() <= max + 1);
        prop_assert!(s.init_pairs().iter().all(|(_, p)| *p == Parity::Even));
    }
}
