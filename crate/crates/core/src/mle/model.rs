use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::em_field::{chi, green, DipoleSource, SurfacePoint};
use crate::error::{Error, Result};
use crate::mle::grid::ReceiverGrid;

/// Signal model assumed by an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// MLE1: z-component of the analytic dipole field.
    Analytic,
    /// MLE2: scalar spherical wave with angle-of-arrival factor.
    HuScalar,
    /// MLE3: planar wave referred to the source centroid.
    Planar,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::Analytic,
        EstimatorKind::HuScalar,
        EstimatorKind::Planar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Analytic => "analytic",
            EstimatorKind::HuScalar => "hu_scalar",
            EstimatorKind::Planar => "planar",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" | "mle1" => Ok(EstimatorKind::Analytic),
            "hu_scalar" | "mle2" => Ok(EstimatorKind::HuScalar),
            "planar" | "mle3" => Ok(EstimatorKind::Planar),
            other => Err(Error::InvalidParameter(format!(
                "unknown estimator '{other}' (expected analytic, hu_scalar or planar)"
            ))),
        }
    }
}

/// Quantities every estimator treats as known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConstants {
    pub k: f64,
    pub wavelength: f64,
    /// `χ` (real for a real current), volts.
    pub chi: f64,
    /// Dipole moment `I_in l_s`, the amplitude of the scalar models.
    pub moment: f64,
    pub impedance: f64,
}

impl SourceConstants {
    pub fn of(source: &DipoleSource) -> Self {
        SourceConstants {
            k: source.wavenumber(),
            wavelength: source.wavelength,
            chi: chi(source).re,
            moment: source.moment(),
            impedance: source.impedance,
        }
    }
}

#[inline]
fn expi(phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, s)
}

/// `-iχ e^{-ikr}/r`.
#[inline]
fn dipole_amp(c: &SourceConstants, r: f64) -> Complex64 {
    let (s, co) = (c.k * r).sin_cos();
    Complex64::new(-s, -co) * (c.chi / r)
}

/// Per-element model values for a trial `(t, u)`; `t` is ignored by the
/// scalar models.
#[inline]
fn element_signal(
    kind: EstimatorKind,
    t: &Vector3<f64>,
    u: &Vector3<f64>,
    p: SurfacePoint,
    l_r: f64,
    c: &SourceConstants,
    rc: f64,
) -> Complex64 {
    match kind {
        EstimatorKind::Analytic => {
            let d = Vector3::new(-u.x, p.y - u.y, p.z - u.z);
            let r = d.norm();
            let rz = d.z / r;
            let proj = d.dot(t) / r;
            dipole_amp(c, r) * (l_r * (t.z - proj * rz))
        }
        EstimatorKind::HuScalar => {
            let dy = p.y - u.y;
            let dz = p.z - u.z;
            let r = (u.x * u.x + dy * dy + dz * dz).sqrt();
            green(c.k, c.impedance, r) * (l_r * c.moment * (u.x / r).sqrt())
        }
        EstimatorKind::Planar => {
            // r̂_C · d with r_C = -u
            let proj = -(u.y * p.y + u.z * p.z) / rc;
            green(c.k, c.impedance, rc) * expi(-c.k * proj) * (l_r * c.moment)
        }
    }
}

/// Model voltages for every grid element.
pub fn model_signal(
    kind: EstimatorKind,
    t: &Vector3<f64>,
    u: &Vector3<f64>,
    grid: &ReceiverGrid,
    c: &SourceConstants,
) -> Vec<Complex64> {
    let rc = u.norm();
    grid.points
        .iter()
        .map(|&p| element_signal(kind, t, u, p, grid.element_length, c, rc))
        .collect()
}

/// Sufficient statistics of one model evaluation against the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Fit {
    /// `Σ |V − h|²`
    pub cost: f64,
    /// `Σ h* V`
    pub hv: Complex64,
    /// `Σ |h|²`
    pub hh: f64,
}

impl Fit {
    /// Likelihood maximized over an unknown common phase of the model.
    pub fn envelope(&self) -> f64 {
        2.0 * self.hv.norm() - self.hh
    }
}

pub(crate) fn fit(
    kind: EstimatorKind,
    t: &Vector3<f64>,
    u: &Vector3<f64>,
    grid: &ReceiverGrid,
    v: &[Complex64],
    c: &SourceConstants,
) -> Fit {
    let rc = u.norm();
    let mut cost = 0.0;
    let mut hv = Complex64::new(0.0, 0.0);
    let mut hh = 0.0;
    for (&p, &vi) in grid.points.iter().zip(v) {
        let h = element_signal(kind, t, u, p, grid.element_length, c, rc);
        cost += (vi - h).norm_sqr();
        hv += h.conj() * vi;
        hh += h.norm_sqr();
    }
    Fit { cost, hv, hh }
}

/// `−Σ |V_mn − h̃_mn|²`.
pub fn log_likelihood(
    kind: EstimatorKind,
    trial_t: &Vector3<f64>,
    trial_u: &Vector3<f64>,
    v: &[Complex64],
    grid: &ReceiverGrid,
    c: &SourceConstants,
) -> f64 {
    -fit(kind, trial_t, trial_u, grid, v, c).cost
}

/// The analytic model is linear in the orientation: `h = A(u) t` with the
/// three columns sharing one complex factor per element, so `AᴴA` is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OrientationBasis {
    /// `AᴴA`
    pub q: Matrix3<f64>,
    /// `AᴴV`
    pub b: Vector3<Complex64>,
    /// `Σ |V|²`
    pub vv: f64,
}

pub(crate) fn orientation_basis(
    u: &Vector3<f64>,
    grid: &ReceiverGrid,
    v: &[Complex64],
    c: &SourceConstants,
) -> OrientationBasis {
    let mut q = Matrix3::zeros();
    let mut b = Vector3::from_element(Complex64::new(0.0, 0.0));
    let mut vv = 0.0;
    let l_r = grid.element_length;
    for (&p, &vi) in grid.points.iter().zip(v) {
        let d = Vector3::new(-u.x, p.y - u.y, p.z - u.z);
        let r = d.norm();
        let rh = d / r;
        let w = Vector3::new(-rh.z * rh.x, -rh.z * rh.y, 1.0 - rh.z * rh.z);
        let a = dipole_amp(c, r) * l_r;
        let a2 = a.norm_sqr();
        let av = a.conj() * vi;
        for i in 0..3 {
            b[i] += av * w[i];
            for j in i..3 {
                q[(i, j)] += a2 * w[i] * w[j];
            }
        }
        vv += vi.norm_sqr();
    }
    for i in 0..3 {
        for j in 0..i {
            q[(i, j)] = q[(j, i)];
        }
    }
    OrientationBasis { q, b, vv }
}

impl OrientationBasis {
    /// Energy of the data captured by the best complex orientation,
    /// `bᴴ Q⁻¹ b`; insensitive to the common phase, hence smooth in range.
    pub fn projected_energy(&self) -> f64 {
        let reg = self.q + Matrix3::identity() * (1e-12 * self.q.trace());
        match reg.cholesky() {
            Some(ch) => {
                let br = self.b.map(|z| z.re);
                let bi = self.b.map(|z| z.im);
                br.dot(&ch.solve(&br)) + bi.dot(&ch.solve(&bi))
            }
            None => 0.0,
        }
    }

    /// Best real unit orientation and the resulting cost
    /// `Σ|V|² − 2 tᵀ Re(b) + tᵀ Q t`.
    pub fn best_unit_orientation(&self) -> (Vector3<f64>, f64) {
        let br = self.b.map(|z| z.re);
        let t = unit_constrained_ls(&self.q, &br);
        let cost = self.vv - 2.0 * t.dot(&br) + t.dot(&(self.q * t));
        (t, cost.max(0.0))
    }
}

/// Minimizes `tᵀQt − 2bᵀt` over the unit sphere (`Q` symmetric PSD).
///
/// The minimizer solves `(Q − μI) t = b` with `μ ≤ λ_min(Q)` and `‖t‖ = 1`;
/// `μ` is found by bisection on the secular equation.
pub fn unit_constrained_ls(q: &Matrix3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    let e = q.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let lam = order.map(|i| e.eigenvalues[i]);
    let vecs = order.map(|i| e.eigenvectors.column(i).into_owned());
    let c = vecs.map(|v| v.dot(b));
    let bn = b.norm();
    let scale = lam[2].abs().max(bn).max(f64::MIN_POSITIVE);

    if bn <= 1e-300 {
        return vecs[0];
    }
    let norm2 = |mu: f64| -> f64 { (0..3).map(|i| (c[i] / (lam[i] - mu)).powi(2)).sum() };

    // Hard case: the component along the smallest eigenvector vanishes and
    // the remaining ones cannot reach the sphere.
    if c[0].abs() <= 1e-14 * bn {
        let partial: Vector3<f64> = (1..3)
            .filter(|&i| lam[i] - lam[0] > 1e-14 * scale)
            .map(|i| vecs[i] * (c[i] / (lam[i] - lam[0])))
            .sum();
        let pn = partial.norm_squared();
        if pn <= 1.0 {
            return partial + vecs[0] * (1.0 - pn).sqrt();
        }
    }

    let mut hi = lam[0];
    let mut lo = lam[0] - bn;
    // norm2 is increasing on (−∞, λ_min); norm2(lo) ≤ 1.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm2(mid) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = lo;
    let t: Vector3<f64> = (0..3).map(|i| vecs[i] * (c[i] / (lam[i] - mu))).sum();
    let n = t.norm();
    if n > 0.0 && n.is_finite() {
        t / n
    } else {
        vecs[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mle::grid::{build_grid, noiseless_voltages};
    use proptest::prelude::*;

    fn setup() -> (DipoleSource, ReceiverGrid, Vec<Complex64>, SourceConstants) {
        let src = DipoleSource::cpl(6.0, 0.1)
            .unwrap()
            .with_position(Vector3::new(6.0, 0.2, -0.1))
            .unwrap()
            .with_orientation(Vector3::new(0.2, 0.3, 0.9))
            .unwrap();
        let grid = build_grid(1.0, 0.1, None).unwrap();
        let v = noiseless_voltages(&src, &grid).unwrap();
        (src, grid, v, SourceConstants::of(&src))
    }

    #[test]
    fn truth_is_global_maximum_noiseless() {
        let (src, grid, v, c) = setup();
        let t = src.orientation;
        let at_truth = log_likelihood(EstimatorKind::Analytic, &t, &src.position, &v, &grid, &c);
        assert!(at_truth.abs() <= 1e-28 * v.iter().map(|z| z.norm_sqr()).sum::<f64>().max(1.0));
        for i in 0..10 {
            for j in 0..10 {
                let u = src.position
                    + Vector3::new(0.05 * (i as f64 - 4.5), 0.07 * (j as f64 - 4.5), 0.01);
                assert!(log_likelihood(EstimatorKind::Analytic, &t, &u, &v, &grid, &c) < 0.0);
            }
        }
    }

    #[test]
    fn hu_model_mismatch_for_horizontal_dipole() {
        let src = DipoleSource::cpl(6.0, 0.1)
            .unwrap()
            .with_orientation(Vector3::y())
            .unwrap();
        let grid = build_grid(3.0, 0.1, None).unwrap();
        let v = noiseless_voltages(&src, &grid).unwrap();
        let c = SourceConstants::of(&src);
        let ll = log_likelihood(EstimatorKind::HuScalar, &Vector3::z(), &src.position, &v, &grid, &c);
        assert!(ll < 0.0);
    }

    #[test]
    fn vertical_dipole_hu_matches_analytic_on_axis() {
        // At the CPL centre both models reduce to l_r M G(x_C).
        let src = DipoleSource::cpl(6.0, 0.1).unwrap();
        let c = SourceConstants::of(&src);
        let p = SurfacePoint::new(0.0, 0.0);
        let a = element_signal(EstimatorKind::Analytic, &src.orientation, &src.position, p, 0.01, &c, 6.0);
        let h = element_signal(EstimatorKind::HuScalar, &src.orientation, &src.position, p, 0.01, &c, 6.0);
        assert!((a - h).norm() <= 1e-14 * a.norm());
    }

    #[test]
    fn basis_reproduces_model() {
        let (src, grid, v, c) = setup();
        let basis = orientation_basis(&src.position, &grid, &v, &c);
        let (t, cost) = basis.best_unit_orientation();
        assert!((t - src.orientation).norm() < 1e-6, "{t:?}");
        assert!(cost <= 1e-10 * basis.vv);
        // Projected energy equals the total energy for noiseless data.
        assert!((basis.projected_energy() / basis.vv - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_offset_leaves_argmax() {
        let (src, grid, v, c) = setup();
        let off = Complex64::new(0.3, -0.2) * v[0].norm();
        let shifted: Vec<Complex64> = v.iter().map(|z| z + off).collect();
        let t = src.orientation;
        let u2 = src.position + Vector3::new(0.01, 0.0, 0.0);
        let h1 = model_signal(EstimatorKind::Analytic, &t, &src.position, &grid, &c);
        let h2 = model_signal(EstimatorKind::Analytic, &t, &u2, &grid, &c);
        let cost = |h: &[Complex64]| -> f64 {
            shifted.iter().zip(h).map(|(a, b)| (a - (b + off)).norm_sqr()).sum()
        };
        assert!(cost(&h1) < cost(&h2));
    }

    proptest! {
        #[test]
        fn constrained_ls_is_optimal(
            a in proptest::collection::vec(-1.0..1.0f64, 9),
            b in proptest::collection::vec(-2.0..2.0f64, 3),
            probes in proptest::collection::vec(-1.0..1.0f64, 60),
        ) {
            let m = Matrix3::from_row_slice(&a);
            let q = m.transpose() * m;
            let b = Vector3::from_row_slice(&b);
            let t = unit_constrained_ls(&q, &b);
            prop_assert!((t.norm() - 1.0).abs() < 1e-12);
            let f = |x: &Vector3<f64>| x.dot(&(q * x)) - 2.0 * b.dot(x);
            let ft = f(&t);
            for p in probes.chunks(3) {
                let x = Vector3::from_row_slice(p);
                if x.norm() < 1e-6 { continue; }
                let x = x / x.norm();
                prop_assert!(ft <= f(&x) + 1e-9 * (1.0 + ft.abs()));
            }
        }
    }
}
