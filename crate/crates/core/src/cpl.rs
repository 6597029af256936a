//! Closed-form machinery for a vertical dipole on the central perpendicular
//! line (CPL): the ten shape integrals, the Fisher blocks built from them,
//! the resulting bounds and their high-frequency and large-aperture limits.
//!
//! Everything is expressed through `ρ = L / x_C`, `k`, `x_C` and
//! `SNR = 2|χ|²/σ²`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use nalgebra::Matrix6;

use crate::em_field::{chi, DipoleSource};
use crate::error::{Error, Result};
use crate::fim::{self, CrbReport, FisherMatrix};
use crate::quadrature::{integrate2d_vec, QuadOptions, Rect2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CplParams {
    pub rho: f64,
    /// Wavenumber, 1/m.
    pub k: f64,
    pub x_c: f64,
    /// `2|χ|²/σ²`.
    pub snr: f64,
}

impl CplParams {
    pub fn new(rho: f64, k: f64, x_c: f64, snr: f64) -> Result<Self> {
        let p = CplParams { rho, k, x_c, snr };
        for (name, v) in [("rho", rho), ("k", k), ("x_C", x_c), ("SNR", snr)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(p)
    }

    /// Parameters of a CPL source observed on a surface of side `side` with
    /// noise variance `sigma2`.
    pub fn from_source(source: &DipoleSource, side: f64, sigma2: f64) -> Result<Self> {
        let u = source.position;
        if u.y != 0.0 || u.z != 0.0 {
            return Err(Error::InvalidParameter(
                "closed forms require the source on the central perpendicular line".into(),
            ));
        }
        let snr = 2.0 * chi(source).norm_sqr() / sigma2;
        Self::new(side / u.x, source.wavenumber(), u.x, snr)
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }
}

/// The shape integrals `𝓘₁ … 𝓘₁₀`, all dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptIntegrals {
    pub rho: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    pub i6: f64,
    pub i7: f64,
    pub i8: f64,
    pub i9: f64,
    pub i10: f64,
    /// `𝓘₁` by quadrature of its integrand form, as a consistency check.
    pub i1_quad: f64,
    /// Largest quadrature error estimate among the numerically integrated
    /// members.
    pub max_abs_error: f64,
}

impl ScriptIntegrals {
    pub fn as_array(&self) -> [f64; 10] {
        [
            self.i1, self.i2, self.i3, self.i4, self.i5, self.i6, self.i7, self.i8, self.i9,
            self.i10,
        ]
    }
}

/// `atan(ρ / sqrt(4 + ρ²))`, which saturates at π/2 instead of overflowing.
fn atan_term(rho: f64) -> f64 {
    (rho / (4.0 + rho * rho).sqrt()).atan()
}

pub fn i1_closed(rho: f64) -> f64 {
    let r2 = rho * rho;
    let s = (4.0 + r2).sqrt();
    rho / (4.0 + r2) * ((14.0 + 3.0 * r2) / s * atan_term(rho) + rho / (2.0 + r2))
}

pub fn i6_closed(rho: f64) -> f64 {
    let r2 = rho * rho;
    let s = (4.0 + r2).sqrt();
    let a = (9.0 * r2 * r2 + 76.0 * r2 + 136.0) / s * atan_term(rho);
    let b = rho * (3.0 * r2 * r2 + 4.0 * r2 - 8.0) / ((2.0 + r2) * (2.0 + r2));
    rho / (2.0 * (4.0 + r2) * (4.0 + r2)) * (a + b)
}

pub fn i9_closed(rho: f64) -> f64 {
    let r2 = rho * rho;
    let s = (4.0 + r2).sqrt();
    2.0 * rho / (4.0 + r2) * ((2.0 + r2) / s * atan_term(rho) - rho / (2.0 + r2))
}

/// Integrands without closed form, in the order
/// `𝓘₂, 𝓘₃, 𝓘₄, 𝓘₅, 𝓘₇, 𝓘₈, 𝓘₁₀` followed by the integrand form of `𝓘₁`.
#[inline]
fn script_integrands(u: f64, v: f64) -> [f64; 8] {
    let u2 = u * u;
    let v2 = v * v;
    let d = 1.0 + u2 + v2;
    let d2 = d * d;
    let d3 = d2 * d;
    let d4 = d2 * d2;
    [
        (1.0 + u2 * v2 + v2 * v2) / d4,
        u2 * (1.0 + u2) / d3,
        (u2 * (1.0 + u2) + v2 * (1.0 + v2) - u2 * v2) / d4,
        v2 * (1.0 + u2) / d3,
        (u2 + v2) / d2,
        (1.0 + u2) / d2,
        (1.0 + 2.0 * u2) / d4,
        (1.0 + v2) / d3,
    ]
}

type CacheKey = (u64, u64, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, ScriptIntegrals>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, ScriptIntegrals>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Evaluates the ten integrals at `ρ`; results are memoized per
/// `(ρ, tolerances)`.
pub fn script_integrals(rho: f64, quad: &QuadOptions) -> Result<ScriptIntegrals> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    let key = (rho.to_bits(), quad.rel_tol.to_bits(), quad.abs_tol.to_bits());
    if let Some(hit) = cache().lock().ok().and_then(|c| c.get(&key).copied()) {
        return Ok(hit);
    }
    // Every integrand is even in u and v.
    let h = 0.5 * rho;
    let q = integrate2d_vec(script_integrands, Rect2::new(0.0, h, 0.0, h)?, quad)?;
    let v = q.value.map(|x| 4.0 * x);
    let out = ScriptIntegrals {
        rho,
        i1: i1_closed(rho),
        i2: v[0],
        i3: v[1],
        i4: v[2],
        i5: v[3],
        i6: i6_closed(rho),
        i7: v[4],
        i8: v[5],
        i9: i9_closed(rho),
        i10: v[6],
        i1_quad: v[7],
        max_abs_error: 4.0 * q.abs_error.iter().fold(0.0_f64, |a, &b| a.max(b)),
    };
    if let Ok(mut c) = cache().lock() {
        c.insert(key, out);
    }
    Ok(out)
}

/// Closed-form bounds on `𝓘₃` from the disks inscribed in and
/// circumscribing the integration square.
///
/// The square `[-ρ/2, ρ/2]²` has half-side `h = ρ/2`, so the disks have
/// radii `h` and `√2 h`.
pub fn i3_bounds(rho: f64) -> (f64, f64) {
    let h = 0.5 * rho;
    let h2 = h * h;
    let lb = 3.0 * PI / 8.0 * (1.0 + h2).ln()
        - PI / 16.0 * h2 * (5.0 * h2 + 6.0) / ((1.0 + h2) * (1.0 + h2));
    let ub = 3.0 * PI / 8.0 * (1.0 + 2.0 * h2).ln()
        - PI / 4.0 * h2 * (5.0 * h2 + 3.0) / ((1.0 + 2.0 * h2) * (1.0 + 2.0 * h2));
    (lb, ub)
}

/// Disk bounds on the orientation-block integrals: `lb11 ≤ 𝓘₇ ≤ ub11` and
/// `lb22 ≤ 𝓘₈ ≤ ub22`. Multiply by SNR for bounds on `[F_tt]₁₁` and
/// `[F_tt]₂₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtBounds {
    pub lb11: f64,
    pub ub11: f64,
    pub lb22: f64,
    pub ub22: f64,
}

/// Evaluated at half-side `h = ρ/2`, the convention under which the printed
/// forms bracket the integrals.
pub fn ft_element_bounds(rho: f64) -> FtBounds {
    let h = 0.5 * rho;
    let h2 = h * h;
    let lb11 = PI * ((1.0 + h2).ln() - h2 / (1.0 + h2));
    let ub11 = PI * ((1.0 + 2.0 * h2).ln() - 2.0 * h2 / (1.0 + 2.0 * h2));
    let s = (1.0 + h2).sqrt();
    let common = 4.0 * h / s * (h / s).atan();
    FtBounds {
        lb11,
        ub11,
        lb22: common + 0.5 * lb11,
        ub22: common + 0.5 * ub11,
    }
}

/// Nonzero Fisher entries for the CPL vertical dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CplFimBlocks {
    /// Diagonal of `F_cc`, 1/m².
    pub f_cc: [f64; 3],
    /// Diagonal of `F_tt`.
    pub f_tt: [f64; 3],
    /// `[F_tc]₁₃`, 1/m.
    pub f_tc13: f64,
    /// `[F_tc]₃₁`, 1/m.
    pub f_tc31: f64,
}

impl CplFimBlocks {
    /// Full 6×6 matrix; `sigma2` is only carried along as metadata.
    pub fn to_fisher(&self, sigma2: f64) -> FisherMatrix {
        let mut m = Matrix6::zeros();
        for i in 0..3 {
            m[(i, i)] = self.f_tt[i];
            m[(3 + i, 3 + i)] = self.f_cc[i];
        }
        m[(0, 5)] = self.f_tc13;
        m[(5, 0)] = self.f_tc13;
        m[(2, 3)] = self.f_tc31;
        m[(3, 2)] = self.f_tc31;
        FisherMatrix::from_matrix(m, sigma2)
    }
}

pub fn fim_blocks_cpl(p: &CplParams, quad: &QuadOptions) -> Result<CplFimBlocks> {
    let s = script_integrals(p.rho, quad)?;
    Ok(fim_blocks_from(p, &s))
}

pub fn fim_blocks_from(p: &CplParams, s: &ScriptIntegrals) -> CplFimBlocks {
    let k2 = p.k * p.k;
    let ix = 1.0 / (p.x_c * p.x_c);
    CplFimBlocks {
        f_cc: [
            p.snr * (k2 * s.i1 + s.i2 * ix),
            p.snr * (k2 * s.i3 + s.i4 * ix),
            p.snr * (k2 * s.i5 + s.i6 * ix),
        ],
        f_tt: [p.snr * s.i7, p.snr * s.i8, p.snr * s.i8],
        f_tc13: p.snr * s.i9 / p.x_c,
        f_tc31: -p.snr * s.i10 / p.x_c,
    }
}

/// Bounds from the closed-form corollaries; the diagnostics come from the
/// equivalent 6×6 matrix.
pub fn crb_cpl(p: &CplParams, quad: &QuadOptions) -> Result<CrbReport> {
    let s = script_integrals(p.rho, quad)?;
    let k2 = p.k * p.k;
    let ix = 1.0 / (p.x_c * p.x_c);
    let a = [k2 * s.i1 + s.i2 * ix, k2 * s.i3 + s.i4 * ix, k2 * s.i5 + s.i6 * ix];
    // Information lost to the unknown orientation.
    let loss = [s.i10 * s.i10 / s.i8 * ix, 0.0, s.i9 * s.i9 / s.i7 * ix];
    let crb_known = [0, 1, 2].map(|i| 1.0 / (p.snr * a[i]));
    let crb_unknown = [0, 1, 2].map(|i| 1.0 / (p.snr * (a[i] - loss[i])));
    let delta = [0, 1, 2].map(|i| (loss[i] / (a[i] - loss[i])).sqrt());
    let f = fim_blocks_from(p, &s).to_fisher(f64::NAN);
    let diag = fim::crb_report(&f)?;
    Ok(CrbReport {
        crb_known,
        crb_unknown,
        delta_rcrb: delta,
        quad_rel_error: s.max_abs_error,
        ..diag
    })
}

/// High-frequency approximations of `CRB(x_C)` and `CRB(y_C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighFreqCrb {
    pub x: f64,
    pub y: f64,
    /// False when `x_C/λ < 100`, where the approximation is not meant to hold.
    pub in_regime: bool,
}

pub fn crb_highfreq(p: &CplParams, quad: &QuadOptions) -> Result<HighFreqCrb> {
    let s = script_integrals(p.rho, quad)?;
    let lambda = p.wavelength();
    let c = lambda * lambda / (4.0 * PI * PI * p.snr);
    Ok(HighFreqCrb {
        x: c / s.i1,
        y: c / s.i3,
        in_regime: p.x_c / lambda >= 100.0,
    })
}

/// Large-aperture limits `(λ²/(3π³), λ²/(3π³ ln ρ), λ²/(π³ ln ρ)) / SNR`.
pub fn crb_asymptotic(lambda: f64, snr: f64, rho: f64) -> [f64; 3] {
    let pi3 = PI * PI * PI;
    let base = lambda * lambda / snr;
    let lr = rho.ln();
    [base / (3.0 * pi3), base / (3.0 * pi3 * lr), base / (pi3 * lr)]
}
