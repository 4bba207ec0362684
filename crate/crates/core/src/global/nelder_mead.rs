//! Nelder–Mead simplex search with every vertex clipped to the box.

use super::{BoxDomain, Counted};

/// Minimizes `f` from `x0` for at most `max_iterations` simplex updates.
/// Returns `(value, point, evaluations)`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], domain: &BoxDomain, max_iterations: usize) -> (f64, Vec<f64>, usize) {
    let mut fc = Counted::new(f);
    let (v, x) = run(&mut fc, x0, domain, max_iterations, 1e-8, 1e-12);
    (v, x, fc.evaluations)
}

pub(crate) fn run<F: Fn(&[f64]) -> f64>(f: &mut Counted<F>, x0: &[f64], domain: &BoxDomain, max_iterations: usize, xatol: f64, fatol: f64) -> (f64, Vec<f64>) {
    let n = x0.len();
    let mut start = x0.to_vec();
    domain.clip(&mut start);
    let mut simplex = vec![start.clone()];
    for k in 0..n {
        let mut y = start.clone();
        y[k] = if y[k] != 0.0 { 1.05 * y[k] } else { 0.00025 };
        domain.clip(&mut y);
        if y[k] == start[k] {
            // Clipped back onto the start; step inward instead.
            let step = 0.05 * (domain.upper[k] - domain.lower[k]);
            y[k] = (start[k] - step).max(domain.lower[k]);
        }
        simplex.push(y);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f.call(x)).collect();

    let clipped = |x: Vec<f64>| {
        let mut x = x;
        domain.clip(&mut x);
        x
    };

    for _ in 0..max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = simplex[1..]
            .iter()
            .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let fspread = values[1..].iter().map(|v| (v - values[0]).abs()).fold(0.0f64, f64::max);
        if spread <= xatol && fspread <= fatol {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|x| x[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let toward = |t: f64| clipped(centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect());

        let xr = toward(1.0);
        let fr = f.call(&xr);
        if fr < values[0] {
            let xe = toward(2.0);
            let fe = f.call(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fcv) = if fr < values[n] {
                let xc = toward(0.5);
                let v = f.call(&xc);
                (xc, v)
            } else {
                let xc = toward(-0.5);
                let v = f.call(&xc);
                (xc, v)
            };
            if fcv < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fcv;
            } else {
                for i in 1..=n {
                    let shrunk = clipped(simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect());
                    values[i] = f.call(&shrunk);
                    simplex[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    (values[best], simplex[best].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_in_box() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let d = BoxDomain::symmetric(2, 5.0).unwrap();
        let (v, x, _) = nelder_mead(&f, &[-1.2, 1.0], &d, 2000);
        assert!(v < 1e-6, "{v} {x:?}");
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| -(x[0] + x[1]);
        let d = BoxDomain::symmetric(2, 1.0).unwrap();
        let (v, x, _) = nelder_mead(&f, &[0.0, 0.0], &d, 500);
        assert!(d.contains(&x));
        assert!((v + 2.0).abs() < 1e-3);
    }
}
