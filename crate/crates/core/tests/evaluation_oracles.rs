mod common;

use proptest::prelude::*;
use scirec_core::evaluation::{average_precision, mean_sd, ndcg, precision_at_k, rankscore, reciprocal_rank};

use common::*;

fn list() -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), 0..12)
}

proptest! {
    #[test]
    fn metrics_match_brute_force(rel in list(), k in 1usize..12, theta in 1.1f64..20.0) {
        let cut = &rel[..rel.len().min(k)];
        prop_assert!((rankscore(&rel, theta, k).unwrap() - brute_rankscore(&rel, theta, k)).abs() < 1e-12);
        prop_assert!((precision_at_k(&rel, k).unwrap() - brute_precision(&rel, k)).abs() < 1e-12);
        prop_assert!((average_precision(cut) - brute_ap(cut)).abs() < 1e-12);
        prop_assert!((reciprocal_rank(cut) - brute_rr(cut)).abs() < 1e-12);
        prop_assert!((ndcg(&rel, k) - brute_ndcg(&rel, k)).abs() < 1e-12);
    }

    #[test]
    fn moving_a_hit_up_never_hurts(rel in list(), k in 1usize..12) {
        let cut: Vec<bool> = rel.iter().copied().take(k).collect();
        for i in 1..cut.len() {
            if cut[i] && !cut[i - 1] {
                let mut better = cut.clone();
                better.swap(i, i - 1);
                prop_assert!(rankscore(&better, 5.0, k).unwrap() > rankscore(&cut, 5.0, k).unwrap());
                prop_assert!(average_precision(&better) > average_precision(&cut));
                prop_assert!(reciprocal_rank(&better) >= reciprocal_rank(&cut));
                prop_assert_eq!(precision_at_k(&better, k).unwrap(), precision_at_k(&cut, k).unwrap());
            }
        }
        let mut more = cut.clone();
        if let Some(i) = more.iter().position(|r| !r) {
            more[i] = true;
            prop_assert!(precision_at_k(&more, k).unwrap() > precision_at_k(&cut, k).unwrap());
            prop_assert!(rankscore(&more, 5.0, k).unwrap() > rankscore(&cut, 5.0, k).unwrap());
        }
    }

    #[test]
    fn perfect_lists_score_one(k in 1usize..15, theta in 1.01f64..50.0) {
        let all = vec![true; k];
        prop_assert_eq!(rankscore(&all, theta, k).unwrap(), 1.0);
        prop_assert_eq!(precision_at_k(&all, k).unwrap(), 1.0);
        prop_assert_eq!(average_precision(&all), 1.0);
        prop_assert_eq!(reciprocal_rank(&all), 1.0);
        prop_assert_eq!(ndcg(&all, k), 1.0);
    }

    #[test]
    fn values_stay_in_unit_interval(rel in list(), k in 1usize..12) {
        for v in [rankscore(&rel, 5.0, k).unwrap(), precision_at_k(&rel, k).unwrap(), average_precision(&rel), reciprocal_rank(&rel), ndcg(&rel, k)] {
            prop_assert!((0.0..=1.0).contains(&v) && v.is_sign_positive());
        }
    }
}

#[test]
fn population_standard_deviation() {
    assert_eq!(mean_sd(&[0.2, 0.8]), (0.5, 0.30000000000000004));
    let (m, sd) = mean_sd(&[1.0, 1.0, 1.0]);
    assert_eq!((m, sd), (1.0, 0.0));
}
