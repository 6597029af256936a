//! Nelder-Mead simplex minimization.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Stop when `f_max − f_min ≤ f_rel · |f_min| + f_abs` over the simplex.
    pub f_rel: f64,
    pub f_abs: f64,
    /// Or when every vertex is within `x_tol` of the best one, per coordinate.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iterations: 2000,
            f_rel: 1e-8,
            f_abs: 0.0,
            x_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an initial simplex of per-coordinate
/// `steps`. Standard coefficients (1, 2, ½, ½).
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n, "one step per coordinate");
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while iterations < opts.max_iterations {
        // Order vertices, best first; ties keep their previous order.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let f_ok = spread <= opts.f_rel * vals[0].abs() + opts.f_abs;
        let x_ok = pts[1..]
            .iter()
            .all(|p| p.iter().zip(&pts[0]).all(|(a, b)| (a - b).abs() <= opts.x_tol));
        if f_ok || x_ok {
            converged = true;
            break;
        }
        iterations += 1;

        for c in centroid.iter_mut() {
            *c = 0.0;
        }
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let worst = pts[n].clone();
        let along = |t: f64, out: &mut Vec<f64>| {
            for i in 0..n {
                out[i] = centroid[i] + t * (worst[i] - centroid[i]);
            }
        };

        along(-1.0, &mut trial);
        let fr = eval(&trial);
        if fr < vals[0] {
            along(-2.0, &mut trial2);
            let fe = eval(&trial2);
            if fe < fr {
                pts[n].clone_from(&trial2);
                vals[n] = fe;
            } else {
                pts[n].clone_from(&trial);
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n].clone_from(&trial);
            vals[n] = fr;
            continue;
        }
        // Contraction, outside or inside.
        let (t, bound) = if fr < vals[n] { (-0.5, fr) } else { (0.5, vals[n]) };
        along(t, &mut trial2);
        let fc = eval(&trial2);
        if fc < bound {
            pts[n].clone_from(&trial2);
            vals[n] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        for j in 1..=n {
            for i in 0..n {
                pts[j][i] = pts[0][i] + 0.5 * (pts[j][i] - pts[0][i]);
            }
            vals[j] = eval(&pts[j]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    NelderMeadResult {
        x: pts[best].clone(),
        f: vals[best],
        iterations,
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &NelderMeadOptions {
                max_iterations: 5000,
                f_rel: 0.0,
                f_abs: 1e-20,
                x_tol: 1e-12,
            },
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn quadratic_bowl_3d() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 4.0 * (x[1] + 2.0).powi(2) + 9.0 * (x[2] - 0.5).powi(2),
            &[0.0, 0.0, 0.0],
            &[0.5, 0.5, 0.5],
            &NelderMeadOptions {
                f_abs: 1e-24,
                f_rel: 0.0,
                ..Default::default()
            },
        );
        assert!(r.converged);
        for (a, b) in r.x.iter().zip([1.0, -2.0, 0.5]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let r = nelder_mead(
            |x| x[0].powi(2) + x[1].powi(2),
            &[3.0, 3.0],
            &[1.0, 1.0],
            &NelderMeadOptions {
                max_iterations: 3,
                f_rel: 0.0,
                f_abs: 0.0,
                x_tol: 0.0,
            },
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn nan_treated_as_worse() {
        let r = nelder_mead(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[0.5],
            &[0.3],
            &NelderMeadOptions {
                f_abs: 1e-20,
                ..Default::default()
            },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-8);
    }
}
