use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::em_field::{analytic_field, DipoleSource, SurfacePoint};
use crate::error::{Error, Result};

/// Short receive dipoles, oriented along z, at `(mλ/2, nλ/2)` for
/// `1 ≤ |m|, |n| ≤ N_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverGrid {
    /// Element centres, `m` outer and `n` inner, both ascending.
    pub points: Vec<SurfacePoint>,
    /// Element length `l_r`, meters.
    pub element_length: f64,
    pub n_r: usize,
    pub wavelength: f64,
}

impl ReceiverGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest |y| (equivalently |z|) of any element.
    pub fn half_extent(&self) -> f64 {
        self.n_r as f64 * self.wavelength / 2.0
    }

    /// Variance `σ²_ν = 2σ² l_r / λ` of the element noise for a field noise
    /// level `σ²`.
    pub fn noise_variance(&self, sigma2: f64) -> f64 {
        2.0 * sigma2 * self.element_length / self.wavelength
    }
}

/// Grid for a square of side `side`; `element_length` defaults to λ/10 and
/// may not exceed it.
pub fn build_grid(side: f64, wavelength: f64, element_length: Option<f64>) -> Result<ReceiverGrid> {
    if !(side > 0.0 && wavelength > 0.0 && side.is_finite() && wavelength.is_finite()) {
        return Err(Error::InvalidParameter(
            "side and wavelength must be positive".into(),
        ));
    }
    let l_r = element_length.unwrap_or(wavelength / 10.0);
    if !(l_r > 0.0) || l_r > wavelength / 10.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "receive element length {l_r} m must be in (0, λ/10]"
        )));
    }
    // Guard against 3/0.1 = 29.999… style rounding.
    let ratio = side / wavelength;
    let n_r = (ratio * (1.0 + 1e-12)).floor() as usize;
    if n_r == 0 {
        return Err(Error::EmptyGrid { side, wavelength });
    }
    let n = n_r as i64;
    let idx: Vec<i64> = (-n..=n).filter(|&i| i != 0).collect();
    let step = wavelength / 2.0;
    let mut points = Vec::with_capacity(idx.len() * idx.len());
    for &m in &idx {
        for &q in &idx {
            points.push(SurfacePoint::new(m as f64 * step, q as f64 * step));
        }
    }
    Ok(ReceiverGrid {
        points,
        element_length: l_r,
        n_r,
        wavelength,
    })
}

/// Received voltages `V_mn = l_r e_z(r_mn) + ν_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageField {
    pub v: Vec<Complex64>,
    pub sigma2_nu: f64,
}

/// Noiseless voltages `l_r e_z(r_mn)`.
pub fn noiseless_voltages(source: &DipoleSource, grid: &ReceiverGrid) -> Result<Vec<Complex64>> {
    grid.points
        .iter()
        .map(|&p| Ok(analytic_field(source, p)?.ez * grid.element_length))
        .collect()
}

/// Noisy voltages for field noise level `sigma2`; the element noise is
/// circular complex Gaussian with total variance `σ²_ν`, drawn from a
/// ChaCha8 stream seeded with `seed`.
pub fn synthesize(
    source: &DipoleSource,
    grid: &ReceiverGrid,
    sigma2: f64,
    seed: u64,
) -> Result<VoltageField> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    let mut v = noiseless_voltages(source, grid)?;
    let sigma2_nu = grid.noise_variance(sigma2);
    if sigma2_nu > 0.0 {
        let s = (sigma2_nu / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in v.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *x += Complex64::new(s * re, s * im);
        }
    }
    Ok(VoltageField { v, sigma2_nu })
}
