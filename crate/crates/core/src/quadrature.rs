//! Adaptive cubature over axis-aligned rectangles.
//!
//! Each cell is integrated with the tensor product of the 15-point
//! Gauss-Kronrod rule. The 7-point Gauss rule embedded in it gives two
//! error estimates per cell, one per axis, and the cell is bisected along
//! the axis whose estimate is larger. Refinement proceeds in epochs: the
//! worst cells are split together, their children are evaluated (in
//! parallel) and the cell list is rebuilt in a fixed order, so the result
//! does not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Positive abscissae of the 15-point Kronrod rule, largest first; the last
/// one is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 7-point Gauss weights, attached to XGK[1], XGK[3], XGK[5] and XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_768_474_294,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const NPTS: usize = 15;

/// Nodes on [-1, 1] with Kronrod and (zero-padded) Gauss weights.
struct Rule {
    x: [f64; NPTS],
    wk: [f64; NPTS],
    wg: [f64; NPTS],
}

const fn rule() -> Rule {
    let mut x = [0.0; NPTS];
    let mut wk = [0.0; NPTS];
    let mut wg = [0.0; NPTS];
    let mut i = 0;
    while i < 8 {
        x[i] = -XGK[i];
        x[NPTS - 1 - i] = XGK[i];
        wk[i] = WGK[i];
        wk[NPTS - 1 - i] = WGK[i];
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[NPTS - 1 - i] = WG[i / 2];
        }
        i += 1;
    }
    Rule { x, wk, wg }
}

const RULE: Rule = rule();

/// Axis-aligned integration rectangle `[u_min, u_max] × [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Rect2 {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        let r = Rect2 {
            u_min,
            u_max,
            v_min,
            v_max,
        };
        r.validate()?;
        Ok(r)
    }

    /// The square `[-half, half]²`.
    pub fn centered_square(half: f64) -> Result<Self> {
        Self::new(-half, half, -half, half)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.u_min, self.u_max, self.v_min, self.v_max]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite || self.u_min >= self.u_max || self.v_min >= self.v_max {
            return Err(Error::InvalidParameter(format!(
                "integration domain must be a non-empty finite rectangle, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.u_max - self.u_min) * (self.v_max - self.v_min)
    }

    /// Splits the rectangle into `nu × nv` equal cells, row-major in v.
    pub fn tile(&self, nu: usize, nv: usize) -> Vec<Rect2> {
        let du = (self.u_max - self.u_min) / nu as f64;
        let dv = (self.v_max - self.v_min) / nv as f64;
        let mut out = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            let u0 = self.u_min + du * i as f64;
            let u1 = if i + 1 == nu { self.u_max } else { u0 + du };
            for j in 0..nv {
                let v0 = self.v_min + dv * j as f64;
                let v1 = if j + 1 == nv { self.v_max } else { v0 + dv };
                out.push(Rect2 {
                    u_min: u0,
                    u_max: u1,
                    v_min: v0,
                    v_max: v1,
                });
            }
        }
        out
    }

    fn bisect(&self, along_u: bool) -> [Rect2; 2] {
        if along_u {
            let m = 0.5 * (self.u_min + self.u_max);
            [
                Rect2 { u_max: m, ..*self },
                Rect2 { u_min: m, ..*self },
            ]
        } else {
            let m = 0.5 * (self.v_min + self.v_max);
            [
                Rect2 { v_max: m, ..*self },
                Rect2 { v_min: m, ..*self },
            ]
        }
    }
}

/// Tolerances and budget for the adaptive scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    /// The domain is first tiled into `initial_split × initial_split` cells.
    pub initial_split: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_cells: 1_000_000,
            initial_split: 4,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_cells == 0 || self.initial_split == 0 {
            return Err(Error::InvalidParameter(
                "max_cells and initial_split must be at least 1".into(),
            ));
        }
        if self.initial_split * self.initial_split > self.max_cells {
            return Err(Error::InvalidParameter(
                "initial tiling already exceeds max_cells".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a scalar (real or complex) integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub cells_used: usize,
}

/// Result of a vector-valued integration; errors are per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecQuadResult<const N: usize> {
    pub value: [f64; N],
    pub abs_error: [f64; N],
    pub cells_used: usize,
}

#[derive(Clone, Copy)]
struct Cell<const N: usize> {
    rect: Rect2,
    value: [f64; N],
    err_u: [f64; N],
    err_v: [f64; N],
}

fn eval_cell<const N: usize, F>(f: &F, rect: Rect2) -> Result<Cell<N>>
where
    F: Fn(f64, f64) -> [f64; N],
{
    let cu = 0.5 * (rect.u_min + rect.u_max);
    let hu = 0.5 * (rect.u_max - rect.u_min);
    let cv = 0.5 * (rect.v_min + rect.v_max);
    let hv = 0.5 * (rect.v_max - rect.v_min);

    let mut kk = [0.0; N];
    let mut gk = [0.0; N]; // Gauss in u, Kronrod in v
    let mut kg = [0.0; N]; // Kronrod in u, Gauss in v
    for i in 0..NPTS {
        let u = cu + hu * RULE.x[i];
        let mut row_k = [0.0; N];
        let mut row_g = [0.0; N];
        for j in 0..NPTS {
            let v = cv + hv * RULE.x[j];
            let y = f(u, v);
            for c in 0..N {
                if !y[c].is_finite() {
                    return Err(Error::NonFinite { u, v });
                }
                row_k[c] += RULE.wk[j] * y[c];
                row_g[c] += RULE.wg[j] * y[c];
            }
        }
        for c in 0..N {
            kk[c] += RULE.wk[i] * row_k[c];
            gk[c] += RULE.wg[i] * row_k[c];
            kg[c] += RULE.wk[i] * row_g[c];
        }
    }
    let jac = hu * hv;
    let mut value = [0.0; N];
    let mut err_u = [0.0; N];
    let mut err_v = [0.0; N];
    for c in 0..N {
        value[c] = jac * kk[c];
        err_u[c] = (jac * (kk[c] - gk[c])).abs();
        err_v[c] = (jac * (kk[c] - kg[c])).abs();
    }
    Ok(Cell {
        rect,
        value,
        err_u,
        err_v,
    })
}

fn eval_all<const N: usize, F>(f: &F, rects: &[Rect2]) -> Result<Vec<Cell<N>>>
where
    F: Fn(f64, f64) -> [f64; N] + Sync,
{
    rects.par_iter().map(|&r| eval_cell(f, r)).collect()
}

fn totals<const N: usize>(cells: &[Cell<N>]) -> ([f64; N], [f64; N]) {
    let mut value = [0.0; N];
    let mut err = [0.0; N];
    for cell in cells {
        for c in 0..N {
            value[c] += cell.value[c];
            err[c] += cell.err_u[c] + cell.err_v[c];
        }
    }
    (value, err)
}

/// Integrates a vector-valued function; component `c` is converged once its
/// error estimate is below `max(abs_tol, rel_tol · scale(value)[c])`.
///
/// `scale` lets callers couple components, e.g. tolerating the error of an
/// off-diagonal Fisher entry relative to the geometric mean of its diagonal.
pub fn integrate2d_vec_scaled<const N: usize, F, S>(
    f: F,
    domain: Rect2,
    opts: &QuadOptions,
    scale: S,
) -> Result<VecQuadResult<N>>
where
    F: Fn(f64, f64) -> [f64; N] + Sync,
    S: Fn(&[f64; N]) -> [f64; N],
{
    domain.validate()?;
    opts.validate()?;

    let n0 = opts.initial_split;
    let mut cells = eval_all(&f, &domain.tile(n0, n0))?;

    loop {
        let (value, err) = totals(&cells);
        let sc = scale(&value);
        let mut tol = [0.0; N];
        let mut done = true;
        for c in 0..N {
            tol[c] = opts.abs_tol.max(opts.rel_tol * sc[c].abs());
            if err[c] > tol[c] {
                done = false;
            }
        }
        if done {
            return Ok(VecQuadResult {
                value,
                abs_error: err,
                cells_used: cells.len(),
            });
        }

        // Normalized error of each cell: the worst component relative to
        // its share of the tolerance.
        let weight = |e: &[f64; N]| -> f64 {
            (0..N).fold(0.0_f64, |m, c| m.max(e[c] / tol[c]))
        };
        let mut order: Vec<(usize, f64)> = cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let mut e = [0.0; N];
                for c in 0..N {
                    e[c] = cell.err_u[c] + cell.err_v[c];
                }
                (i, weight(&e))
            })
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        // Split the worst cells until the untouched ones account for at most
        // half of the tolerance.
        let mut remaining: f64 = order.iter().map(|o| o.1).sum();
        let mut n_split = 0;
        for o in &order {
            if remaining <= 0.5 {
                break;
            }
            remaining -= o.1;
            n_split += 1;
        }
        let n_split = n_split.max(1);

        if cells.len() + n_split > opts.max_cells {
            let worst = (0..N)
                .max_by(|&a, &b| (err[a] / tol[a]).total_cmp(&(err[b] / tol[b])))
                .unwrap_or(0);
            return Err(Error::AccuracyNotReached {
                cells: cells.len(),
                error: err[worst],
                tolerance: tol[worst],
                partial: value.to_vec(),
            });
        }

        let mut split = vec![false; cells.len()];
        let mut children = Vec::with_capacity(2 * n_split);
        let mut idx: Vec<usize> = order[..n_split].iter().map(|o| o.0).collect();
        idx.sort_unstable();
        for &i in &idx {
            split[i] = true;
            let cell = &cells[i];
            let along_u = weight(&cell.err_u) >= weight(&cell.err_v);
            children.extend_from_slice(&cell.rect.bisect(along_u));
        }
        let new_cells = eval_all(&f, &children)?;
        let mut next = Vec::with_capacity(cells.len() + n_split);
        next.extend(
            cells
                .iter()
                .zip(&split)
                .filter(|(_, &s)| !s)
                .map(|(c, _)| *c),
        );
        next.extend(new_cells);
        cells = next;
    }
}

/// Vector-valued integration with each component judged on its own magnitude.
pub fn integrate2d_vec<const N: usize, F>(
    f: F,
    domain: Rect2,
    opts: &QuadOptions,
) -> Result<VecQuadResult<N>>
where
    F: Fn(f64, f64) -> [f64; N] + Sync,
{
    integrate2d_vec_scaled(f, domain, opts, |v| *v)
}

/// Integrates a real function of `(u, v)` over `domain`.
pub fn integrate2d<F>(f: F, domain: Rect2, opts: &QuadOptions) -> Result<QuadResult<f64>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let r = integrate2d_vec(|u, v| [f(u, v)], domain, opts)?;
    Ok(QuadResult {
        value: r.value[0],
        abs_error_estimate: r.abs_error[0],
        cells_used: r.cells_used,
    })
}

/// Integrates a complex function; real and imaginary parts are integrated
/// on the same cells and the tolerance applies to each part relative to the
/// modulus of the result.
pub fn integrate2d_complex<F>(
    f: F,
    domain: Rect2,
    opts: &QuadOptions,
) -> Result<QuadResult<Complex64>>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let r = integrate2d_vec_scaled(
        |u, v| {
            let z = f(u, v);
            [z.re, z.im]
        },
        domain,
        opts,
        |v| {
            let m = v[0].hypot(v[1]);
            [m, m]
        },
    )?;
    Ok(QuadResult {
        value: Complex64::new(r.value[0], r.value[1]),
        abs_error_estimate: r.abs_error[0].hypot(r.abs_error[1]),
        cells_used: r.cells_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sq() -> Rect2 {
        Rect2::centered_square(1.0).unwrap()
    }

    #[test]
    fn rule_weights_integrate_constants() {
        let sk: f64 = RULE.wk.iter().sum();
        let sg: f64 = RULE.wg.iter().sum();
        assert_relative_eq!(sk, 2.0, epsilon = 1e-15);
        assert_relative_eq!(sg, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_integrand() {
        let r = integrate2d(|_, _| 1.0, sq(), &QuadOptions::default()).unwrap();
        assert_eq!(r.value, 4.0);
        assert_eq!(r.cells_used, 16);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let opts = QuadOptions::default();
        let r = integrate2d(|u, _| u, sq(), &opts).unwrap();
        assert!(r.value.abs() <= opts.abs_tol);
        let r = integrate2d(|u, v| v * (u * u + 3.0).ln(), sq(), &opts).unwrap();
        assert!(r.value.abs() <= opts.abs_tol);
    }

    #[test]
    fn gaussian_bump_matches_erf_product() {
        // ∫∫ exp(-(u²+v²)/(2s²)) over [-1,1]² = 2πs² erf(1/(s√2))².
        let s = 0.1_f64;
        let exact = 2.0 * std::f64::consts::PI * s * s; // erf(7.07) = 1 to 1e-22
        let r = integrate2d(
            |u, v| (-(u * u + v * v) / (2.0 * s * s)).exp(),
            sq(),
            &QuadOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-10);
        assert!(r.abs_error_estimate <= 1e-9 * exact);
    }

    #[test]
    fn complex_constant_is_imaginary() {
        let r = integrate2d_complex(
            |_, _| Complex64::new(0.0, 2.5),
            Rect2::new(0.0, 1.0, 0.0, 1.0).unwrap(),
            &QuadOptions::default(),
        )
        .unwrap();
        assert_eq!(r.value.re, 0.0);
        assert_relative_eq!(r.value.im, 2.5, epsilon = 1e-15);
    }

    #[test]
    fn non_finite_is_reported() {
        let e = integrate2d(
            |u, _| if u > 0.5 { f64::NAN } else { 1.0 },
            sq(),
            &QuadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(e, Error::NonFinite { .. }));
    }

    #[test]
    fn budget_exhaustion_returns_partial() {
        let opts = QuadOptions {
            max_cells: 20,
            ..QuadOptions::default()
        };
        let e = integrate2d(|u, v| (u * u + v * v).sqrt(), sq(), &opts).unwrap_err();
        match e {
            Error::AccuracyNotReached { partial, cells, .. } => {
                assert!(cells <= 20);
                // ∫∫ r over [-1,1]² = (4/3)(√2 + asinh 1)
                let exact = 4.0 / 3.0 * (2f64.sqrt() + 1f64.asinh());
                assert_relative_eq!(partial[0], exact, max_relative = 1e-4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(Rect2::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rect2::new(0.0, f64::INFINITY, 0.0, 1.0).is_err());
        let bad = QuadOptions {
            rel_tol: 0.0,
            ..QuadOptions::default()
        };
        assert!(integrate2d(|_, _| 1.0, sq(), &bad).is_err());
    }

    #[test]
    fn vector_components_converge_independently() {
        let r = integrate2d_vec(
            |u, v| [u * u, (u + v).cos(), 1.0 / (1.0 + u * u + v * v)],
            Rect2::new(0.0, 1.0, 0.0, 2.0).unwrap(),
            &QuadOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.value[0], 2.0 / 3.0, max_relative = 1e-12);
        // ∫0^1∫0^2 cos(u+v) = -cos 3 + cos 1 + cos 2 - 1
        let c = -(3f64).cos() + 1f64.cos() + 2f64.cos() - 1.0;
        assert_relative_eq!(r.value[1], c, max_relative = 1e-11);
    }
}
