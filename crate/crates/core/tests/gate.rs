use std::f64::consts::PI;

use proptest::prelude::*;
use twolevel_control::gate::{self, grape_maximize, ClosedGateProblem};
use twolevel_control::PiecewiseConstantControl;

fn node() -> impl Strategy<Value = (f64, f64)> {
    (PI / 20.0..=9.0 * PI / 20.0, PI / 20.0..=PI / 2.0)
}

fn control() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, 1..16)
}

proptest! {
    #[test]
    fn propagators_stay_unitary((phi, t) in node(), a in control()) {
        let p = ClosedGateProblem::new(phi, t, a.len()).unwrap();
        let u = gate::propagate_gate(&p, &PiecewiseConstantControl::new(t, a).unwrap()).unwrap();
        prop_assert!(u.matrix().unitarity_defect() <= 1e-10);
    }

    #[test]
    fn matrix_and_realified_objectives_agree((phi, t) in node(), a in control()) {
        let p = ClosedGateProblem::new(phi, t, a.len()).unwrap();
        let c = PiecewiseConstantControl::new(t, a).unwrap();
        let j1 = gate::objective_jw(&p, &c).unwrap();
        let j2 = gate::objective_jw_realified(&p, &c).unwrap();
        prop_assert!((j1 - j2).abs() <= 1e-12, "{j1} vs {j2}");
        prop_assert!((0.0..=1.0 + 1e-12).contains(&j1));
    }

    #[test]
    fn zero_control_is_stationary((phi, t) in node(), n in 1usize..20) {
        let p = ClosedGateProblem::new(phi, t, n).unwrap();
        let g = gate::gradient_jw(&p, &PiecewiseConstantControl::zeros(t, n).unwrap()).unwrap();
        prop_assert!(g.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn best_value_nondecreasing_in_starts(j in 1usize..=9, i in 1usize..=10, k in 1usize..6) {
        let p = ClosedGateProblem::new(j as f64 * PI / 20.0, i as f64 * PI / 20.0, 4 + i).unwrap();
        let fewer = grape_maximize(&p, k, 3).best_value;
        let more = grape_maximize(&p, k + 1, 3).best_value;
        prop_assert!(more >= fewer);
    }
}

/// Anti-diagonal nodes `φ_W + T = π/2` have `J_W(0) = 0`. Long enough
/// durations reach the gate; shorter ones stay at their speed-limited optimum.
const ANTI_DIAGONAL: [(usize, f64); 9] =
    [(1, 0.066), (2, 0.261), (3, 0.538), (4, 0.808), (5, 0.976), (6, 1.0), (7, 1.0), (8, 1.0), (9, 1.0)];

#[test]
fn anti_diagonal_reaches_the_gate() {
    for (i, expected) in ANTI_DIAGONAL {
        let j = 10 - i;
        let p = ClosedGateProblem::new(j as f64 * PI / 20.0, i as f64 * PI / 20.0, 4 + i).unwrap();
        let r = grape_maximize(&p, 10, 0);
        if i >= 6 {
            assert!(r.best_value >= 0.999, "phi {j}, T {i}: {}", r.best_value);
        } else {
            assert!((r.best_value - expected).abs() < 5e-3, "phi {j}, T {i}: {}", r.best_value);
        }
        let check = gate::objective_jw(&p, &PiecewiseConstantControl::new(p.duration, r.best_point.clone()).unwrap()).unwrap();
        assert!((check - r.best_value).abs() < 1e-12);
    }
}

#[test]
fn bounded_ascent_respects_the_bound() {
    let p = ClosedGateProblem::new(4.0 * PI / 20.0, 6.0 * PI / 20.0, 10).unwrap().with_bound(2.0).unwrap();
    let r = grape_maximize(&p, 4, 1);
    assert!(r.best_point.iter().all(|a| a.abs() <= 2.0));
    assert!(r.best_value > p.zero_control_value());
}

#[test]
fn gradient_matches_propagator_differences() {
    let p = ClosedGateProblem::new(0.5, 1.1, 6).unwrap();
    let a = vec![0.3, -2.0, 4.5, 1.0, -0.7, 2.2];
    let g = gate::gradient_jw(&p, &PiecewiseConstantControl::new(1.1, a.clone()).unwrap()).unwrap();
    let f = |x: &[f64]| gate::objective_jw(&p, &PiecewiseConstantControl::new(1.1, x.to_vec()).unwrap()).unwrap();
    let fd = twolevel_control::oracle::central_gradient(f, &a, 1e-6);
    for (x, y) in g.iter().zip(&fd) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}
