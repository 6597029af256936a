use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mle::grid::ReceiverGrid;
use crate::mle::model::{fit, orientation_basis, EstimatorKind, SourceConstants};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Axis-aligned box of candidate source positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub center: Vector3<f64>,
    pub half_width: Vector3<f64>,
}

impl SearchBox {
    pub fn around(center: Vector3<f64>, half_width: f64) -> Self {
        SearchBox {
            center,
            half_width: Vector3::from_element(half_width),
        }
    }

    pub fn contains(&self, u: &Vector3<f64>) -> bool {
        (0..3).all(|i| (u[i] - self.center[i]).abs() <= self.half_width[i])
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0..3).all(|i| {
            self.center[i].is_finite() && self.half_width[i].is_finite() && self.half_width[i] >= 0.0
        });
        if !ok || self.center.x + self.half_width.x <= 0.0 {
            return Err(Error::InvalidParameter(
                "search box must be finite and reach x > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Minimum coarse-grid points per axis.
    pub coarse_min: usize,
    /// Cap on coarse-grid points per axis; the grid is refined up to this
    /// so that neighbouring points stay within a main lobe.
    pub coarse_max: usize,
    /// Starting points taken from the coarse grid.
    pub starts: usize,
    /// Half-length of the range scan along the line of sight, wavelengths.
    pub range_scan_wavelengths: f64,
    /// Phase lobes from the range scan refined per start.
    pub lobes: usize,
    /// Relative cost change that ends the simplex refinement.
    pub refine_rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            coarse_min: 9,
            coarse_max: 64,
            starts: 3,
            range_scan_wavelengths: 2.0,
            lobes: 5,
            refine_rel_tol: 1e-8,
            max_iterations: 2000,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_min < 2 || self.coarse_max < self.coarse_min {
            return Err(Error::InvalidParameter(
                "coarse grid needs 2 ≤ coarse_min ≤ coarse_max".into(),
            ));
        }
        if self.starts == 0 || self.lobes == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "starts, lobes and max_iterations must be positive".into(),
            ));
        }
        if !(self.refine_rel_tol >= 0.0 && self.range_scan_wavelengths >= 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleConfig {
    pub estimator: EstimatorKind,
    /// Only meaningful for the analytic estimator.
    pub orientation_known: bool,
    pub search: SearchBox,
    pub trials: usize,
    pub seed: u64,
    pub optimizer: OptimizerSettings,
}

impl MleConfig {
    pub fn new(estimator: EstimatorKind, search: SearchBox, trials: usize, seed: u64) -> Self {
        MleConfig {
            estimator,
            orientation_known: true,
            search,
            trials,
            seed,
            optimizer: OptimizerSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
        }
        self.search.validate()?;
        self.optimizer.validate()
    }

    fn estimates_orientation(&self) -> bool {
        self.estimator == EstimatorKind::Analytic && !self.orientation_known
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub position: Vector3<f64>,
    /// Estimated orientation, canonicalized to `t_x ≥ 0` (then `t_z ≥ 0`);
    /// present only when the orientation was estimated.
    pub orientation: Option<Vector3<f64>>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Everything the estimator may use: data, geometry and known constants.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub grid: &'a ReceiverGrid,
    pub voltages: &'a [Complex64],
    pub constants: SourceConstants,
    /// Transmit orientation; used when `orientation_known`.
    pub known_orientation: Vector3<f64>,
}

struct Objective<'a> {
    kind: EstimatorKind,
    search: SearchBox,
    profile: bool,
    t: Vector3<f64>,
    obs: &'a Observation<'a>,
}

impl Objective<'_> {
    fn admissible(&self, u: &Vector3<f64>) -> bool {
        u.x > 0.0 && self.search.contains(u)
    }

    /// Phase-insensitive statistic used to locate the main lobe; larger is
    /// better.
    fn envelope(&self, u: &Vector3<f64>) -> f64 {
        if !self.admissible(u) {
            return f64::NEG_INFINITY;
        }
        if self.profile {
            orientation_basis(u, self.obs.grid, self.obs.voltages, &self.obs.constants)
                .projected_energy()
        } else {
            fit(self.kind, &self.t, u, self.obs.grid, self.obs.voltages, &self.obs.constants)
                .envelope()
        }
    }

    /// `Σ|V − h|²`, minimized over the orientation when it is unknown.
    fn cost(&self, u: &Vector3<f64>) -> f64 {
        if !self.admissible(u) {
            return f64::INFINITY;
        }
        if self.profile {
            orientation_basis(u, self.obs.grid, self.obs.voltages, &self.obs.constants)
                .best_unit_orientation()
                .1
        } else {
            fit(self.kind, &self.t, u, self.obs.grid, self.obs.voltages, &self.obs.constants).cost
        }
    }

    fn direct_cost(&self, u: &Vector3<f64>, t: &Vector3<f64>) -> f64 {
        if !self.admissible(u) {
            return f64::INFINITY;
        }
        fit(self.kind, t, u, self.obs.grid, self.obs.voltages, &self.obs.constants).cost
    }
}

fn v3(x: &[f64]) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

fn axis_points(center: f64, half: f64, n: usize) -> Vec<f64> {
    if half == 0.0 {
        return vec![center];
    }
    (0..n)
        .map(|j| center - half + 2.0 * half * j as f64 / (n - 1) as f64)
        .collect()
}

/// Sign convention for reported orientations.
pub fn canonical_orientation(t: Vector3<f64>) -> Vector3<f64> {
    let eps = 1e-6;
    if t.x < -eps || (t.x.abs() <= eps && t.z < 0.0) {
        -t
    } else {
        t
    }
}

fn angles_of(t: &Vector3<f64>) -> [f64; 2] {
    let a = t.x.clamp(-1.0, 1.0).acos();
    let b = t.z.atan2(t.y);
    [a, b]
}

fn from_angles(a: f64, b: f64) -> Vector3<f64> {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    Vector3::new(ca, sa * cb, sa * sb)
}

/// Maximum-likelihood estimate of the source position (and orientation for
/// the analytic estimator with unknown orientation).
///
/// Coarse grid over the search box on a phase-insensitive statistic,
/// simplex refinement of that statistic from the best separated grid
/// points, a range scan at λ/8 steps to pick the right phase lobe, then
/// simplex refinement of the exact cost.
pub fn estimate(config: &MleConfig, obs: &Observation<'_>) -> Result<TrialResult> {
    config.validate()?;
    if obs.voltages.len() != obs.grid.len() {
        return Err(Error::InvalidParameter(format!(
            "{} voltages for {} grid elements",
            obs.voltages.len(),
            obs.grid.len()
        )));
    }
    let opt = &config.optimizer;
    let lambda = obs.constants.wavelength;
    let objective = Objective {
        kind: config.estimator,
        search: config.search,
        profile: config.estimates_orientation(),
        t: obs.known_orientation,
        obs,
    };
    let vv: f64 = obs.voltages.iter().map(|z| z.norm_sqr()).sum();
    let mut evaluations = 0usize;

    // Coarse grid, spaced to about half a main lobe where the cap allows.
    let sb = &config.search;
    let aperture = obs.grid.half_extent().max(lambda);
    let x0 = sb.center.x.max(lambda);
    let res = [
        0.5 * lambda * x0 * x0 / (aperture * aperture),
        0.25 * lambda * x0 / aperture,
        0.25 * lambda * x0 / aperture,
    ];
    let counts: Vec<usize> = (0..3)
        .map(|i| {
            let want = (2.0 * sb.half_width[i] / res[i]).ceil() as usize + 1;
            want.clamp(opt.coarse_min, opt.coarse_max)
        })
        .collect();
    let axes: Vec<Vec<f64>> = (0..3)
        .map(|i| axis_points(sb.center[i], sb.half_width[i], counts[i]))
        .collect();
    let (nx, ny, nz) = (axes[0].len(), axes[1].len(), axes[2].len());
    let mut coarse = Vec::with_capacity(nx * ny * nz);
    for (i, &x) in axes[0].iter().enumerate() {
        for (j, &y) in axes[1].iter().enumerate() {
            for (l, &z) in axes[2].iter().enumerate() {
                let s = objective.envelope(&Vector3::new(x, y, z));
                coarse.push(([i, j, l], s));
            }
        }
    }
    evaluations += coarse.len();
    coarse.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut starts: Vec<[usize; 3]> = Vec::new();
    for (idx, s) in &coarse {
        if !s.is_finite() {
            break;
        }
        let separated = starts.iter().all(|p| {
            (0..3).any(|a| (p[a] as i64 - idx[a] as i64).abs() > 1)
        });
        if separated {
            starts.push(*idx);
            if starts.len() == opt.starts {
                break;
            }
        }
    }
    if starts.is_empty() {
        return Err(Error::NoConvergence { iterations: 0 });
    }

    let spacing: Vec<f64> = (0..3)
        .map(|i| {
            if axes[i].len() > 1 {
                axes[i][1] - axes[i][0]
            } else {
                lambda
            }
        })
        .collect();
    let env_opts = NelderMeadOptions {
        max_iterations: 400,
        f_rel: 1e-10,
        f_abs: 0.0,
        x_tol: 1e-4 * lambda,
    };
    let fine_opts = NelderMeadOptions {
        max_iterations: opt.max_iterations,
        f_rel: opt.refine_rel_tol,
        f_abs: 1e-14 * vv,
        x_tol: 1e-12,
    };
    let scan_half = (opt.range_scan_wavelengths * 8.0).round() as i64;

    let mut best: Option<TrialResult> = None;
    let mut best_cost = f64::INFINITY;
    let mut any_converged = false;
    let mut iterations = 0usize;

    for idx in starts {
        let u0 = Vector3::new(axes[0][idx[0]], axes[1][idx[1]], axes[2][idx[2]]);
        let env = nelder_mead(
            |x| -objective.envelope(&v3(x)),
            u0.as_slice(),
            &[spacing[0] / 2.0, spacing[1] / 2.0, spacing[2] / 2.0],
            &env_opts,
        );
        evaluations += env.evaluations;
        let u = v3(&env.x);

        // Range scan along the line of sight; the best few phase lobes it
        // reveals are each refined on the exact cost.
        let dir = u.normalize();
        let scan: Vec<(Vector3<f64>, f64)> = (-scan_half..=scan_half)
            .map(|j| {
                let cand = u + dir * (j as f64 * lambda / 8.0);
                (cand, objective.cost(&cand))
            })
            .collect();
        evaluations += scan.len();
        let mut lobes: Vec<(Vector3<f64>, f64)> = (0..scan.len())
            .filter(|&j| {
                let c = scan[j].1;
                (j == 0 || c <= scan[j - 1].1) && (j + 1 == scan.len() || c <= scan[j + 1].1)
            })
            .map(|j| scan[j])
            .collect();
        lobes.sort_by(|a, b| a.1.total_cmp(&b.1));
        lobes.truncate(opt.lobes);

        let step = lambda / 20.0;
        let mut u_hat = u;
        let mut cost = f64::INFINITY;
        let mut converged = false;
        for (u_lobe, _) in lobes {
            let first = nelder_mead(|x| objective.cost(&v3(x)), u_lobe.as_slice(), &[step; 3], &fine_opts);
            let second = nelder_mead(
                |x| objective.cost(&v3(x)),
                &first.x,
                &[step / 10.0; 3],
                &fine_opts,
            );
            evaluations += first.evaluations + second.evaluations;
            iterations += first.iterations + second.iterations;
            if second.f < cost {
                u_hat = v3(&second.x);
                cost = second.f;
                converged = second.converged;
            }
        }
        let mut t_hat = None;

        if objective.profile {
            let (t0, _) =
                orientation_basis(&u_hat, obs.grid, obs.voltages, &obs.constants).best_unit_orientation();
            let [a0, b0] = angles_of(&t0);
            let x0 = [u_hat.x, u_hat.y, u_hat.z, a0, b0];
            let polish = |x: &[f64]| objective.direct_cost(&v3(x), &from_angles(x[3], x[4]));
            let ds = lambda / 100.0;
            let p1 = nelder_mead(polish, &x0, &[ds, ds, ds, 1e-2, 1e-2], &fine_opts);
            let p2 = nelder_mead(polish, &p1.x, &[ds / 10.0, ds / 10.0, ds / 10.0, 1e-3, 1e-3], &fine_opts);
            evaluations += p1.evaluations + p2.evaluations;
            iterations += p1.iterations + p2.iterations;
            if p2.f <= cost {
                u_hat = v3(&p2.x);
                cost = p2.f;
                t_hat = Some(from_angles(p2.x[3], p2.x[4]));
            } else {
                t_hat = Some(t0);
            }
            converged = converged && p2.converged;
        }

        any_converged |= converged;
        if converged && cost < best_cost {
            best_cost = cost;
            best = Some(TrialResult {
                position: u_hat,
                orientation: t_hat.map(canonical_orientation),
                log_likelihood: -cost,
                iterations: 0,
                evaluations: 0,
            });
        }
    }

    match best {
        Some(mut r) if any_converged => {
            r.iterations = iterations;
            r.evaluations = evaluations;
            Ok(r)
        }
        _ => Err(Error::NoConvergence { iterations }),
    }
}
