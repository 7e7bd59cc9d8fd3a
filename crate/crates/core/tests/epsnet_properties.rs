use pareto_recourse::epsnet::{
    check_rerouting_bound, replay_shrink, sample_indices, sample_size, shrink_graph, ShrinkConfig, ShrinkScope,
};
use pareto_recourse::synthetic::{derive_seed, lipschitz_graph, random_instance, rng, RandomGraphParams};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn shrink_replays_on_random_graphs() {
    let params = RandomGraphParams::default();
    for i in 0..100u64 {
        let seed = derive_seed(0x5A7, i);
        let g = random_instance(&params, seed).unwrap().graph;
        let mut r = rng(seed);
        let kappa = r.gen_range(1.0..3.0);
        let scope = if r.gen_bool(0.5) { ShrinkScope::All } else { ShrinkScope::Criterion(0) };
        let cfg = ShrinkConfig::new(kappa, scope).unwrap();
        let mut order: Vec<usize> = (0..g.len()).collect();
        order.shuffle(&mut r);
        let report = shrink_graph(&g, &cfg, &order).unwrap();
        assert!(replay_shrink(&g, &cfg, &report).unwrap(), "trial {i}");
        let rep = report.representatives(g.len());
        for &(v, r) in &report.merges {
            assert!(report.survivors.binary_search(&r).is_ok());
            assert!(report.survivors.binary_search(&v).is_err());
            assert_eq!(rep[r], r);
        }
        assert_eq!(report.survivors.len() + report.merges.len(), g.len());
    }
}

#[test]
fn lipschitz_bound_is_reported_not_hidden() {
    // Exercises the checker end to end; whether it finds a pair is data.
    let (g, _) = lipschitz_graph(10, 2.0, 0.7, 0.8, 7).unwrap();
    let cfg = ShrinkConfig::new(2.0, ShrinkScope::Criterion(0)).unwrap();
    let order: Vec<usize> = (0..g.len()).collect();
    let report = shrink_graph(&g, &cfg, &order).unwrap();
    if let Some(v) = check_rerouting_bound(&g, &report, 2.0, 0).unwrap() {
        assert!(v.shrunk_cost.is_none_or(|c| c > 2.0 * v.hops as f64 * v.original_cost));
    }
}

#[test]
fn sampling_is_uniform_across_seeds() {
    let n = 40;
    let mut hits = vec![0u32; n];
    for seed in 0..1000 {
        for i in sample_indices(n, n / 2, seed).unwrap().ids {
            hits[i] += 1;
        }
    }
    for (i, &h) in hits.iter().enumerate() {
        let f = f64::from(h) / 1000.0;
        assert!((0.45..=0.55).contains(&f), "vertex {i} included {f}");
    }
}

#[test]
fn sample_size_is_monotone_on_a_grid() {
    let eps: Vec<f64> = (1..=10).map(|i| i as f64 * 0.09).collect();
    let del: Vec<f64> = (1..=10).map(|i| i as f64 * 0.09).collect();
    for vc in 1..=4 {
        for (a, &e) in eps.iter().enumerate() {
            for (b, &d) in del.iter().enumerate() {
                let m = sample_size(e, d, vc).unwrap();
                if a + 1 < eps.len() {
                    assert!(sample_size(eps[a + 1], d, vc).unwrap() <= m);
                }
                if b + 1 < del.len() {
                    assert!(sample_size(e, del[b + 1], vc).unwrap() <= m);
                }
                assert!(sample_size(e, d, vc + 1).unwrap() >= m);
            }
        }
    }
    assert_eq!(sample_size(0.1, 0.1, 3).unwrap(), 1219);
}

proptest! {
    #[test]
    fn sample_has_distinct_sorted_ids(n in 1usize..300, m in 1usize..400, seed in any::<u64>()) {
        let s = sample_indices(n, m, seed).unwrap();
        prop_assert_eq!(s.ids.len(), m.min(n));
        prop_assert!(s.ids.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.ids.iter().all(|&i| i < n));
        prop_assert_eq!(s, sample_indices(n, m, seed).unwrap());
    }

    #[test]
    fn halving_epsilon_never_shrinks_the_sample(e in 0.01f64..0.99, d in 0.01f64..0.99, vc in 1usize..10) {
        prop_assert!(sample_size(e / 2.0, d, vc).unwrap() >= sample_size(e, d, vc).unwrap());
    }
}
