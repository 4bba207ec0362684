//! Exterior penalty on large jumps between neighbouring amplitudes:
//! `R(a) = α Σ_k max((a_{k+1} − a_k)² − δ, 0)²`, summed over the `N − 1`
//! neighbouring pairs.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyConfig {
    pub alpha: f64,
    /// Squared jump allowed for free.
    pub delta_a: f64,
}

impl PenaltyConfig {
    pub fn new(alpha: f64, delta_a: f64) -> Result<Self> {
        if !(alpha > 0.0 && delta_a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "penalty needs α > 0 and δ > 0 (got α = {alpha}, δ = {delta_a})"
            )));
        }
        Ok(PenaltyConfig { alpha, delta_a })
    }
}

/// Value and gradient of the penalty. The gradient of each active pair is
/// `±4α · excess · jump`, which vanishes continuously at the cutoff.
pub fn penalty_value_and_gradient(a: &[f64], cfg: &PenaltyConfig) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let mut grad = vec![0.0; a.len()];
    for k in 0..a.len().saturating_sub(1) {
        let jump = a[k + 1] - a[k];
        let excess = (jump * jump - cfg.delta_a).max(0.0);
        if excess > 0.0 {
            value += excess * excess;
            let push = 4.0 * cfg.alpha * excess * jump;
            grad[k + 1] += push;
            grad[k] -= push;
        }
    }
    (cfg.alpha * value, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{central_gradient, rel_err};
    use rand::{Rng, SeedableRng};

    #[test]
    fn inactive_below_cap() {
        let cfg = PenaltyConfig::new(3.0, 0.25).unwrap();
        let (v, g) = penalty_value_and_gradient(&[0.0, 0.4, 0.1, 0.5], &cfg);
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn hand_expansion() {
        let cfg = PenaltyConfig::new(0.7, 1.0).unwrap();
        let c: f64 = 2.0;
        let (v, _) = penalty_value_and_gradient(&[0.0, c, 0.0], &cfg);
        assert!((v - 2.0 * 0.7 * (c * c - 1.0).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let cfg = PenaltyConfig::new(0.3, 0.5).unwrap();
        let a: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..4.0)).collect();
        let (_, g) = penalty_value_and_gradient(&a, &cfg);
        let fd = central_gradient(|x| penalty_value_and_gradient(x, &cfg).0, &a, 1e-6);
        for (x, y) in g.iter().zip(&fd) {
            assert!(rel_err(*x, *y, 1e-3) < 1e-7, "{x} {y}");
        }
    }

    #[test]
    fn gradient_continuous_at_cutoff() {
        let cfg = PenaltyConfig::new(1.0, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for e in [1e-2, 1e-4, 1e-6, 1e-8] {
            let (_, g) = penalty_value_and_gradient(&[0.0, 1.0 + e], &cfg);
            assert!(g[1].abs() < last);
            last = g[1].abs();
        }
        assert!(last < 1e-7);
    }
}
