mod common;

use common::{instances, l1, norm_add};
use edgeppr::local_push::l1_theta;
use edgeppr::synth::unbalanced_star_graph;
use edgeppr::*;

#[test]
fn instrumented_runs_hold_invariants() {
    for inst in instances(80, 40, 21) {
        let (g, s, a) = (&inst.graph, inst.source, inst.alpha);
        let opts = LocalPushOptions { instrumented: true };
        localpush_with(g, s, a, l1_theta(g, inst.epsilon).unwrap(), opts).unwrap();
        localpush_with(g, s, a, inst.r_max, opts).unwrap();
        for th in [EdgeThresholds::l1(g, inst.epsilon).unwrap(), EdgeThresholds::additive(g, inst.r_max).unwrap()] {
            let opts = EdgePushOptions { scan_fraction: None, instrumented: true };
            edgepush_with(g, s, a, &th, opts).unwrap();
        }
    }
}

#[test]
fn pushes_are_positive_and_keys_grow() {
    for inst in instances(60, 32, 22) {
        let (g, s, a) = (&inst.graph, inst.source, inst.alpha);
        let th = EdgeThresholds::l1(g, inst.epsilon).unwrap();
        let mut st = EdgePushState::new(g, s, a, &th, EdgePushOptions::default()).unwrap();
        let mut last = vec![f64::NEG_INFINITY; g.num_directed_edges()];
        while let Some(ev) = st.step() {
            assert!(ev.amount > 0.0);
            assert!(ev.key_after > ev.key_before);
            assert!(ev.key_before >= last[ev.edge]);
            last[ev.edge] = ev.key_after;
        }
        assert!(st.find_candidate().is_none());
        assert!(st.residues().iter().all(|&r| r >= 0.0));
    }
}

#[test]
fn scan_mode_meets_the_same_bounds() {
    for inst in instances(80, 48, 23) {
        let (g, s, a) = (&inst.graph, inst.source, inst.alpha);
        let pi = exact_ppr(g, s, a).unwrap().values;
        for f in [0.01, 0.125, 0.5] {
            let th = EdgeThresholds::l1(g, inst.epsilon).unwrap();
            let (est, _) = edgepush_with_scan_switch(g, s, a, &th, f).unwrap();
            assert!(l1(&est.to_dense(), &pi) <= inst.epsilon + 1e-9);
            let th = EdgeThresholds::additive(g, inst.r_max).unwrap();
            let (est, _) = edgepush_with_scan_switch(g, s, a, &th, f).unwrap();
            assert!(norm_add(g, &est.to_dense(), &pi) <= inst.r_max + 1e-9);
        }
    }
}

#[test]
fn estimates_never_exceed_truth() {
    for inst in instances(80, 40, 24) {
        let (g, s, a) = (&inst.graph, inst.source, inst.alpha);
        let pi = exact_ppr(g, s, a).unwrap().values;
        let ests = [
            localpush_l1(g, s, a, inst.epsilon).unwrap().0,
            edgepush_l1(g, s, a, inst.epsilon).unwrap().0,
            localpush_additive(g, s, a, inst.r_max).unwrap().0,
            edgepush_additive(g, s, a, inst.r_max).unwrap().0,
        ];
        for est in ests {
            for (e, p) in est.to_dense().iter().zip(&pi) {
                assert!(*e <= p + 1e-12);
            }
        }
    }
}

#[test]
fn tighter_parameters_do_not_increase_error() {
    for inst in instances(20, 32, 25) {
        let (g, s, a) = (&inst.graph, inst.source, inst.alpha);
        let pi = exact_ppr(g, s, a).unwrap().values;
        for eps in [0.5, 0.05, 0.005, 0.0005] {
            let e = l1(&edgepush_l1(g, s, a, eps).unwrap().0.to_dense(), &pi);
            assert!(e <= eps + 1e-9);
        }
    }
}

#[test]
fn balanced_star_gains_nothing() {
    // With uniform weights every edge carries the same share, so EdgePush
    // cannot skip any and touches at least as many edges per unit of error.
    let g = unbalanced_star_graph(200, 1.0 / 199.0).unwrap();
    let (lp, lpa) = localpush_l1(&g, 0, 0.2, 0.1).unwrap();
    let (ep, epa) = edgepush_l1(&g, 0, 0.2, 0.1).unwrap();
    let pi = exact_ppr(&g, 0, 0.2).unwrap().values;
    assert!(l1(&lp.to_dense(), &pi) <= 0.1 && l1(&ep.to_dense(), &pi) <= 0.1);
    assert!(epa.edges_touched as f64 >= 0.5 * lpa.edge_touches as f64);
}
