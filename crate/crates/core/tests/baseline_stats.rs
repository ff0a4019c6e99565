mod common;

use common::{instances, l1};
use edgeppr::baselines::{fora_hybrid_detailed, monte_carlo, WalkBudget};
use edgeppr::exact_ppr;

#[test]
fn independent_seeds_agree() {
    let w = 200_000;
    for inst in instances(5, 10, 31) {
        let (g, s, a) = (&inst.graph, inst.source, inst.alpha);
        let pi = exact_ppr(g, s, a).unwrap().values;
        let x = monte_carlo(g, s, a, WalkBudget::new(w, 1).unwrap()).unwrap().values;
        let y = monte_carlo(g, s, a, WalkBudget::new(w, 2).unwrap()).unwrap().values;
        for ((p, x), y) in pi.iter().zip(&x).zip(&y) {
            let sigma = (2.0 * p * (1.0 - p) / w as f64).sqrt();
            assert!((x - y).abs() <= 4.0 * sigma + 1e-12);
        }
    }
}

#[test]
fn fora_is_unbiased() {
    for inst in instances(4, 10, 32) {
        let (g, s, a) = (&inst.graph, inst.source, inst.alpha);
        let pi = exact_ppr(g, s, a).unwrap().values;
        let runs = 40;
        let mut mean = vec![0.0; g.n()];
        for seed in 0..runs {
            let out = fora_hybrid_detailed(g, s, a, 0.05, WalkBudget::new(2_000, seed).unwrap()).unwrap();
            let total: f64 = out.estimate.values.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
            for (m, v) in mean.iter_mut().zip(&out.estimate.values) {
                *m += v / runs as f64;
            }
        }
        assert!(l1(&mean, &pi) < 0.02, "{}", l1(&mean, &pi));
    }
}

#[test]
fn walk_budget_validation() {
    assert!(WalkBudget::new(0, 1).is_err());
    assert!(WalkBudget::from_error_params(0.0, 0.5, 0.01, 1).is_err());
    let b = WalkBudget::from_error_params(1e-3, 0.5, 0.01, 1).unwrap();
    let expect = ((2.0 * 0.5 / 3.0 + 2.0) * (2.0f64 / 0.01).ln() / (0.25 * 1e-3)).ceil() as u64;
    assert_eq!(b.total_walks, expect);
}
