//! Fisher information for `p = (t_x, t_y, t_z, x_C, y_C, z_C)` and the
//! Cramér-Rao bounds on the source position with known or unknown
//! orientation.

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::em_field::{chi, separation, DipoleSource, ObservationSurface, SurfacePoint};
use crate::error::{Error, Result};
use crate::quadrature::{integrate2d_vec_scaled, QuadOptions, Rect2};

/// Parameter labels in FIM order.
pub const PARAM_NAMES: [&str; 6] = ["t_x", "t_y", "t_z", "x_C", "y_C", "z_C"];

/// Field components contributing to the information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Components {
    pub x: bool,
    pub y: bool,
    pub z: bool,
}

impl Components {
    pub const ALL: Components = Components {
        x: true,
        y: true,
        z: true,
    };
    pub const Z_ONLY: Components = Components {
        x: false,
        y: false,
        z: true,
    };

    fn mask(&self) -> [bool; 3] {
        [self.x, self.y, self.z]
    }
}

/// `J[α][m] = ∂e_α / ∂p_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJacobian {
    pub j: [[Complex64; 6]; 3],
}

/// Debugging hook: flips the sign of one Jacobian entry so that the
/// validation suite can prove it notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Fault {
    pub entry: Option<(usize, usize)>,
}

pub fn field_jacobian(source: &DipoleSource, p: SurfacePoint) -> Result<FieldJacobian> {
    field_jacobian_with_fault(source, p, Fault::default())
}

pub fn field_jacobian_with_fault(
    source: &DipoleSource,
    p: SurfacePoint,
    fault: Fault,
) -> Result<FieldJacobian> {
    let (d, r) = separation(&source.position, p);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "observation point ({}, {}) coincides with the source",
            p.y, p.z
        )));
    }
    let mut j = jacobian_core(source, &d, r);
    if let Some((a, m)) = fault.entry {
        j[a][m] = -j[a][m];
    }
    Ok(FieldJacobian { j })
}

#[inline]
fn jacobian_core(source: &DipoleSource, d: &Vector3<f64>, r: f64) -> [[Complex64; 6]; 3] {
    let k = source.wavenumber();
    let rh = d / r;
    let t = &source.orientation;
    let c = rh.dot(t);
    // A = -iχ e^{-ikr} / r
    let (s, co) = (k * r).sin_cos();
    let a = Complex64::new(-s, -co) * (chi(source).re / r);
    let b = t - rh * c;
    // ∂A/∂c_j = A (ik + 1/r) r̂_j
    let ak = a * Complex64::new(1.0 / r, k);
    let inv_r = 1.0 / r;

    let mut j = [[Complex64::new(0.0, 0.0); 6]; 3];
    for al in 0..3 {
        for be in 0..3 {
            let delta = if al == be { 1.0 } else { 0.0 };
            j[al][be] = a * (delta - rh[al] * rh[be]);
            // ∂b_α/∂c_j = (t_j r̂_α + c δ_αj − 2c r̂_j r̂_α) / r
            let db = (t[be] * rh[al] + c * delta - 2.0 * c * rh[be] * rh[al]) * inv_r;
            j[al][3 + be] = ak * (rh[be] * b[al]) + a * db;
        }
    }
    j
}

/// Central-difference Jacobian of the analytic field with step
/// `h = 1e-6 · max(1, |p_m|)`; used as an independent oracle.
pub fn finite_difference_jacobian(source: &DipoleSource, p: SurfacePoint) -> Result<FieldJacobian> {
    let mut j = [[Complex64::new(0.0, 0.0); 6]; 3];
    let base = [
        source.orientation.x,
        source.orientation.y,
        source.orientation.z,
        source.position.x,
        source.position.y,
        source.position.z,
    ];
    for m in 0..6 {
        let h = 1e-6 * base[m].abs().max(1.0);
        let eval = |delta: f64| -> Result<[Complex64; 3]> {
            let mut s = *source;
            let mut q = base;
            q[m] += delta;
            s.orientation = Vector3::new(q[0], q[1], q[2]);
            s.position = Vector3::new(q[3], q[4], q[5]);
            Ok(crate::em_field::analytic_field(&s, p)?.to_array())
        };
        let plus = eval(h)?;
        let minus = eval(-h)?;
        for al in 0..3 {
            j[al][m] = (plus[al] - minus[al]) / (2.0 * h);
        }
    }
    Ok(FieldJacobian { j })
}

/// 6×6 Fisher information matrix with quadrature diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub matrix: Matrix6<f64>,
    pub sigma2: f64,
    /// Absolute error estimates of each entry (zero for exact sums).
    pub abs_error: Matrix6<f64>,
    pub cells_used: usize,
}

impl FisherMatrix {
    pub fn from_matrix(matrix: Matrix6<f64>, sigma2: f64) -> Self {
        FisherMatrix {
            matrix,
            sigma2,
            abs_error: Matrix6::zeros(),
            cells_used: 0,
        }
    }

    pub fn f_tt(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn f_tc(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 3).into_owned()
    }

    pub fn f_ct(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(3, 0).into_owned()
    }

    pub fn f_cc(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(3, 3).into_owned()
    }

    /// Largest quadrature error relative to `sqrt(F_ii F_jj)`.
    pub fn relative_quadrature_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..6 {
            for j in 0..6 {
                let s = (self.matrix[(i, i)] * self.matrix[(j, j)]).abs().sqrt();
                if s > 0.0 {
                    worst = worst.max(self.abs_error[(i, j)] / s);
                }
            }
        }
        worst
    }
}

const UPPER: [(usize, usize); 21] = {
    let mut out = [(0, 0); 21];
    let mut n = 0;
    let mut i = 0;
    while i < 6 {
        let mut j = i;
        while j < 6 {
            out[n] = (i, j);
            n += 1;
            j += 1;
        }
        i += 1;
    }
    out
};

const DIAG: [usize; 6] = [0, 6, 11, 15, 18, 20];

#[inline]
fn gram_upper(j: &[[Complex64; 6]; 3], mask: [bool; 3]) -> [f64; 21] {
    let mut out = [0.0; 21];
    for (n, &(a, b)) in UPPER.iter().enumerate() {
        let mut s = 0.0;
        for al in 0..3 {
            if mask[al] {
                // Re(z w*) = z.re w.re + z.im w.im
                s += j[al][a].re * j[al][b].re + j[al][a].im * j[al][b].im;
            }
        }
        out[n] = s;
    }
    out
}

fn from_upper(v: &[f64; 21], scale: f64) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for (n, &(a, b)) in UPPER.iter().enumerate() {
        m[(a, b)] = scale * v[n];
        m[(b, a)] = scale * v[n];
    }
    m
}

/// `[F]_mn = (2/σ²) Re ∬ Σ_α ∂e_α/∂p_m ∂e_α*/∂p_n dy dz` over the surface.
pub fn assemble_fim(
    source: &DipoleSource,
    surface: &ObservationSurface,
    sigma2: f64,
    quad: &QuadOptions,
) -> Result<FisherMatrix> {
    assemble_fim_components(source, surface, sigma2, quad, Components::ALL, Fault::default())
}

/// As [`assemble_fim`], keeping only the selected field components and
/// optionally corrupting one Jacobian entry.
pub fn assemble_fim_components(
    source: &DipoleSource,
    surface: &ObservationSurface,
    sigma2: f64,
    quad: &QuadOptions,
    components: Components,
    fault: Fault,
) -> Result<FisherMatrix> {
    source.validate()?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    let mask = components.mask();
    let h = surface.half_side();
    let domain = Rect2::centered_square(h)?;
    let integrand = |y: f64, z: f64| {
        let (d, r) = separation(&source.position, SurfacePoint::new(y, z));
        let mut j = jacobian_core(source, &d, r);
        if let Some((a, m)) = fault.entry {
            j[a][m] = -j[a][m];
        }
        gram_upper(&j, mask)
    };
    // Judge every entry against the geometric mean of its diagonal pair, but
    // never looser than a fraction of its own size.
    let scale = |v: &[f64; 21]| {
        let mut out = [0.0; 21];
        for (n, &(a, b)) in UPPER.iter().enumerate() {
            let g = (v[DIAG[a]] * v[DIAG[b]]).abs().sqrt();
            out[n] = v[n].abs().max(1e-4 * g);
        }
        out
    };
    let res = integrate2d_vec_scaled(integrand, domain, quad, scale)?;
    let f = 2.0 / sigma2;
    Ok(FisherMatrix {
        matrix: from_upper(&res.value, f),
        sigma2,
        abs_error: from_upper(&res.abs_error, f),
        cells_used: res.cells_used,
    })
}

/// Information from a finite set of point observations `scale · e(p_i)`
/// with independent circular complex noise of variance `sigma2`.
pub fn discrete_fim(
    source: &DipoleSource,
    points: &[SurfacePoint],
    scale: f64,
    sigma2: f64,
    components: Components,
) -> Result<FisherMatrix> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter("noise variance must be positive".into()));
    }
    let mask = components.mask();
    let mut acc = [0.0; 21];
    for &p in points {
        let jac = field_jacobian(source, p)?;
        let g = gram_upper(&jac.j, mask);
        for n in 0..21 {
            acc[n] += g[n];
        }
    }
    Ok(FisherMatrix::from_matrix(
        from_upper(&acc, 2.0 * scale * scale / sigma2),
        sigma2,
    ))
}

/// Conditioning above which bounds are reported as meaningless.
pub const CONDITION_CAP: f64 = 1e12;

/// Bounds on the centroid coordinates, meters².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbReport {
    pub crb_known: [f64; 3],
    pub crb_unknown: [f64; 3],
    /// `sqrt((CRB_u − CRB) / CRB)` per coordinate.
    pub delta_rcrb: [f64; 3],
    /// Condition number of the equilibrated `F_cc`.
    pub cond_cc: f64,
    /// Condition number of the equilibrated full matrix.
    pub cond_full: f64,
    pub mil_residual: f64,
    pub quad_rel_error: f64,
}

impl CrbReport {
    pub fn rcrb_known(&self) -> [f64; 3] {
        self.crb_known.map(f64::sqrt)
    }

    pub fn rcrb_unknown(&self) -> [f64; 3] {
        self.crb_unknown.map(f64::sqrt)
    }
}

/// Symmetric Jacobi scaling: `F = D⁻¹ F̃ D⁻¹` with unit diagonal `F̃`.
struct Equilibrated {
    m: Matrix6<f64>,
    d: [f64; 6],
}

fn equilibrate(f: &FisherMatrix) -> Result<Equilibrated> {
    let mut d = [0.0; 6];
    for i in 0..6 {
        let fii = f.matrix[(i, i)];
        if !(fii > 0.0 && fii.is_finite()) {
            return Err(Error::SingularInformation(format!(
                "diagonal entry for {} is {fii}",
                PARAM_NAMES[i]
            )));
        }
        d[i] = 1.0 / fii.sqrt();
    }
    let mut m = f.matrix;
    for i in 0..6 {
        for j in 0..6 {
            m[(i, j)] *= d[i] * d[j];
        }
    }
    // Restore exact symmetry.
    let m = (m + m.transpose()) * 0.5;
    Ok(Equilibrated { m, d })
}

fn condition_from(eigs: &[f64]) -> f64 {
    let max = eigs.iter().fold(f64::MIN, |a, &b| a.max(b));
    let min = eigs.iter().fold(f64::MAX, |a, &b| a.min(b));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn condition3(m: &Matrix3<f64>) -> f64 {
    condition_from(SymmetricEigen::new(*m).eigenvalues.as_slice())
}

fn condition6(m: &Matrix6<f64>) -> f64 {
    condition_from(SymmetricEigen::new(*m).eigenvalues.as_slice())
}

fn inverse3(m: &Matrix3<f64>, what: &str) -> Result<Matrix3<f64>> {
    m.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::SingularInformation(format!("{what} is not positive definite")))
}

fn check_cond(c: f64, what: &str) -> Result<()> {
    if c > CONDITION_CAP || !c.is_finite() {
        return Err(Error::SingularInformation(format!(
            "{what} has condition number {c:e} (cap {CONDITION_CAP:e})"
        )));
    }
    Ok(())
}

struct Blocks {
    tt: Matrix3<f64>,
    tc: Matrix3<f64>,
    cc: Matrix3<f64>,
    dc: [f64; 3],
    cond_cc: f64,
    cond_full: f64,
}

fn blocks(f: &FisherMatrix) -> Result<Blocks> {
    let e = equilibrate(f)?;
    let tt = e.m.fixed_view::<3, 3>(0, 0).into_owned();
    let tc = e.m.fixed_view::<3, 3>(0, 3).into_owned();
    let cc = e.m.fixed_view::<3, 3>(3, 3).into_owned();
    Ok(Blocks {
        tt,
        tc,
        cc,
        dc: [e.d[3], e.d[4], e.d[5]],
        cond_cc: condition3(&cc),
        cond_full: condition6(&e.m),
    })
}

fn rescale(diag: [f64; 3], d: &[f64; 3]) -> [f64; 3] {
    [diag[0] * d[0] * d[0], diag[1] * d[1] * d[1], diag[2] * d[2] * d[2]]
}

fn diag3(m: &Matrix3<f64>) -> [f64; 3] {
    [m[(0, 0)], m[(1, 1)], m[(2, 2)]]
}

/// `diag(F_cc⁻¹)`: bounds with known orientation.
pub fn crb_known(f: &FisherMatrix) -> Result<[f64; 3]> {
    let b = blocks(f)?;
    check_cond(b.cond_cc, "F_cc")?;
    Ok(rescale(diag3(&inverse3(&b.cc, "F_cc")?), &b.dc))
}

/// `diag((F_cc − F_tcᵀ F_tt⁻¹ F_tc)⁻¹)`: bounds with unknown orientation.
pub fn crb_unknown(f: &FisherMatrix) -> Result<[f64; 3]> {
    let b = blocks(f)?;
    check_cond(b.cond_full, "F")?;
    Ok(rescale(diag3(&schur_inverse(&b)?), &b.dc))
}

fn schur_inverse(b: &Blocks) -> Result<Matrix3<f64>> {
    let tt_inv = inverse3(&b.tt, "F_tt")?;
    let s = b.cc - b.tc.transpose() * tt_inv * b.tc;
    inverse3(&((s + s.transpose()) * 0.5), "Schur complement of F_tt")
}

/// Second term of the matrix-inversion-lemma form
/// `F_cc⁻¹ F_ct (F_tt − F_tc F_cc⁻¹ F_ct)⁻¹ F_tc F_cc⁻¹` (equilibrated).
fn mil_term(b: &Blocks) -> Result<Matrix3<f64>> {
    let cc_inv = inverse3(&b.cc, "F_cc")?;
    let st = b.tt - b.tc * cc_inv * b.tc.transpose();
    let st_inv = inverse3(&((st + st.transpose()) * 0.5), "Schur complement of F_cc")?;
    let w = b.tc * cc_inv;
    Ok(w.transpose() * st_inv * w)
}

/// Largest relative mismatch between `CRB_u` computed directly and through
/// the matrix inversion lemma.
pub fn mil_residual(f: &FisherMatrix) -> Result<f64> {
    let b = blocks(f)?;
    let direct = diag3(&schur_inverse(&b)?);
    let known = diag3(&inverse3(&b.cc, "F_cc")?);
    let extra = diag3(&mil_term(&b)?);
    Ok((0..3)
        .map(|i| ((known[i] + extra[i]) - direct[i]).abs() / direct[i])
        .fold(0.0, f64::max))
}

/// `sqrt((CRB_u − CRB)/CRB)`, from the lemma term so that tiny losses are
/// not swamped by cancellation.
pub fn delta_rcrb(f: &FisherMatrix) -> Result<[f64; 3]> {
    let b = blocks(f)?;
    let known = diag3(&inverse3(&b.cc, "F_cc")?);
    let extra = diag3(&mil_term(&b)?);
    Ok([0, 1, 2].map(|i| (extra[i].max(0.0) / known[i]).sqrt()))
}

pub fn crb_report(f: &FisherMatrix) -> Result<CrbReport> {
    let b = blocks(f)?;
    check_cond(b.cond_cc, "F_cc")?;
    check_cond(b.cond_full, "F")?;
    let known = diag3(&inverse3(&b.cc, "F_cc")?);
    let unknown = diag3(&schur_inverse(&b)?);
    let extra = diag3(&mil_term(&b)?);
    let mil = (0..3)
        .map(|i| ((known[i] + extra[i]) - unknown[i]).abs() / unknown[i])
        .fold(0.0, f64::max);
    Ok(CrbReport {
        crb_known: rescale(known, &b.dc),
        crb_unknown: rescale(unknown, &b.dc),
        delta_rcrb: [0, 1, 2].map(|i| (extra[i].max(0.0) / known[i]).sqrt()),
        cond_cc: b.cond_cc,
        cond_full: b.cond_full,
        mil_residual: mil,
        quad_rel_error: f.relative_quadrature_error(),
    })
}
