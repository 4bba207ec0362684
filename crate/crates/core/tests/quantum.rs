use num_complex::Complex64;
use proptest::prelude::*;
use twolevel_control::linalg::Mat2;
use twolevel_control::quantum::{bloch_to_density, density_to_bloch, eigenvalues_descending, intermediate_targets};
use twolevel_control::{BlochState, DensityMatrix};

fn ball_point() -> impl Strategy<Value = BlochState> {
    (0.0..=1.0f64, 0.0..std::f64::consts::PI, 0.0..2.0 * std::f64::consts::PI)
        .prop_map(|(r, th, ph)| BlochState::raw(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()))
}

/// `U diag(p, 1 − p) U†` with `U` from Euler angles, built without the
/// Bloch parametrization.
fn rotated_state(p: f64, alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    let e = |phase: f64| Complex64::from_polar(1.0, phase);
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let u = Mat2::new(
        e(-(alpha + gamma) / 2.0) * c,
        -e(-(alpha - gamma) / 2.0) * s,
        e((alpha - gamma) / 2.0) * s,
        e((alpha + gamma) / 2.0) * c,
    );
    u * Mat2::from_real(p, 0.0, 0.0, 1.0 - p) * u.dagger()
}

proptest! {
    #[test]
    fn bloch_round_trip(x in ball_point()) {
        let back = density_to_bloch(&bloch_to_density(&x).unwrap());
        prop_assert!(back.max_abs_diff(&x) <= 1e-12);
    }

    #[test]
    fn spectrum_matches_characteristic_roots(p in 0.0..=1.0f64, a in 0.0..6.3f64, b in 0.0..3.2f64, g in 0.0..6.3f64) {
        let m = rotated_state(p, a, b, g);
        let rho = DensityMatrix::with_tolerance(m, 1e-12).unwrap();
        // λ² − tr λ + det = 0, solved from the raw entries.
        let tr = (m.get(0, 0) + m.get(1, 1)).re;
        let det = (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let (hi, lo) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        let e = eigenvalues_descending(&rho);
        prop_assert!((e.p1 - hi).abs() <= 1e-12 && (e.p2 - lo).abs() <= 1e-12, "{e:?} vs {hi}, {lo}");
        prop_assert!((e.p1 - p.max(1.0 - p)).abs() <= 1e-12);
    }

    #[test]
    fn unit_norm_iff_pure(x in ball_point(), pure in any::<bool>()) {
        let x = if pure {
            let n = x.norm().max(1e-3);
            BlochState::raw(x.x1 / n, x.x2 / n, x.x3 / n)
        } else {
            x
        };
        let n = x.norm();
        prop_assume!(n < 1.0 - 1e-6 || (n - 1.0).abs() < 1e-12);
        let rho = bloch_to_density(&x).unwrap();
        prop_assert_eq!((n - 1.0).abs() < 1e-12, rho.purity_defect() <= 1e-10);
    }

    #[test]
    fn intermediate_targets_share_the_spectrum(x in ball_point()) {
        let rho = bloch_to_density(&x).unwrap();
        let t = intermediate_targets(&eigenvalues_descending(&rho));
        for y in [t.north, t.south] {
            prop_assert!(y.x1 == 0.0 && y.x2 == 0.0);
            prop_assert!((y.norm() - x.norm()).abs() <= 1e-12);
        }
        prop_assert!(t.north.x3 >= 0.0 && t.south.x3 <= 0.0);
    }
}

#[test]
fn rejects_invalid_inputs() {
    assert!(bloch_to_density(&BlochState::raw(1.0, 1.0, 0.0)).is_err());
    assert!(BlochState::new(0.0, 0.0, 1.5).is_err());
    assert!(DensityMatrix::new(Mat2::from_real(0.5, 0.0, 0.0, 0.4)).is_err());
    assert!(DensityMatrix::new(Mat2::from_real(1.2, 0.0, 0.0, -0.2)).is_err());
}
