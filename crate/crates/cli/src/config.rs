//! Run configuration: optional TOML file, command-line flags on top.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use nalgebra::Vector3;
use serde::Deserialize;

use holocrb::em_field::{chi, DipoleSource};
use holocrb::quadrature::QuadOptions;
use holocrb::units::{db_to_linear, linear_to_db, sigma2_from_snr, snr_in, SnrConvention};

/// Every key a config file may contain. Keys that do not apply to the
/// command being run are ignored; unknown keys are an error.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub x_c: Option<f64>,
    pub y_c: Option<f64>,
    pub z_c: Option<f64>,
    pub orientation: Option<Vec<f64>>,
    pub wavelength: Option<f64>,
    pub side: Option<f64>,
    pub snr_db: Option<f64>,
    pub sigma2: Option<f64>,
    pub snr_convention: Option<String>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub sides: Option<Vec<f64>>,
    pub y_offsets: Option<Vec<f64>>,
    pub z_offsets: Option<Vec<f64>>,
    pub x_values: Option<Vec<f64>>,
    pub wavelengths: Option<Vec<f64>>,
    pub rhos: Option<Vec<f64>>,
    pub estimators: Option<Vec<String>>,
    pub orientation_known: Option<bool>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub search_half_width: Option<f64>,
    pub coarse_min: Option<usize>,
    pub coarse_max: Option<usize>,
    pub refine_rel_tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub y: Option<f64>,
    pub z: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct IoArgs {
    /// TOML file with default values; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl IoArgs {
    pub fn file_config(&self) -> Result<FileConfig> {
        match &self.config {
            Some(p) => FileConfig::load(p),
            None => Ok(FileConfig::default()),
        }
    }
}

/// Source, surface and noise settings shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Source distance from the surface, m.
    #[arg(long, allow_hyphen_values = true)]
    pub x_c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_c: Option<f64>,
    /// Dipole orientation as tx,ty,tz (normalized).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub orientation: Option<Vec<f64>>,
    /// Wavelength, m.
    #[arg(long)]
    pub wavelength: Option<f64>,
    /// Surface side length, m.
    #[arg(long)]
    pub side: Option<f64>,
    /// SNR in dB, in the selected convention.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Noise variance σ², V²/m² (alternative to --snr-db).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// standard (2|χ|²/σ²) or caption (|χ|²/σ²).
    #[arg(long)]
    pub snr_convention: Option<String>,
    /// Quadrature relative tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Quadrature absolute tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

/// Per-command defaults for the shared settings.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub wavelength: f64,
    pub side: f64,
    pub snr_db: f64,
}

impl Defaults {
    pub const BOUNDS: Defaults = Defaults {
        wavelength: 0.01,
        side: 3.0,
        snr_db: 10.0,
    };
    pub const MLE: Defaults = Defaults {
        wavelength: 0.1,
        side: 2.0,
        snr_db: 30.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    SnrDb(f64),
    Sigma2(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub position: Vector3<f64>,
    pub orientation: Vector3<f64>,
    pub wavelength: f64,
    pub side: f64,
    pub noise: Noise,
    pub convention: SnrConvention,
    pub quad: QuadOptions,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name} must be a positive finite number, got {v}");
    }
    Ok(v)
}

/// Checks a sweep is non-empty, finite and strictly increasing.
pub fn check_sweep(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        bail!("{name} must list at least one value");
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        bail!("{name} contains a non-finite value {v}");
    }
    if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
        bail!("{name} must be strictly increasing ({} is followed by {})", w[0], w[1]);
    }
    Ok(())
}

/// `n` log-spaced values from `a` to `b`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl Scenario {
    pub fn resolve(args: &ScenarioArgs, file: &FileConfig, defaults: Defaults) -> Result<Self> {
        let x_c = args.x_c.or(file.x_c).unwrap_or(6.0);
        if !(x_c > 0.0 && x_c.is_finite()) {
            bail!("x_c must be positive (the source must be in front of the surface), got {x_c}");
        }
        let y_c = args.y_c.or(file.y_c).unwrap_or(0.0);
        let z_c = args.z_c.or(file.z_c).unwrap_or(0.0);
        let t = args
            .orientation
            .clone()
            .or_else(|| file.orientation.clone())
            .unwrap_or_else(|| vec![0.0, 0.0, 1.0]);
        if t.len() != 3 {
            bail!("orientation needs three components, got {}", t.len());
        }
        let t = Vector3::new(t[0], t[1], t[2]);
        if !(t.norm() > 0.0) || !t.iter().all(|c| c.is_finite()) {
            bail!("orientation must be a finite non-zero vector");
        }
        let wavelength = positive("wavelength", args.wavelength.or(file.wavelength).unwrap_or(defaults.wavelength))?;
        let side = positive("side", args.side.or(file.side).unwrap_or(defaults.side))?;

        // Flags replace the file's noise setting as a whole.
        let (snr, sigma2) = if args.snr_db.is_some() || args.sigma2.is_some() {
            (args.snr_db, args.sigma2)
        } else {
            (file.snr_db, file.sigma2)
        };
        let noise = match (snr, sigma2) {
            (Some(_), Some(_)) => bail!("give either snr_db or sigma2, not both"),
            (Some(db), None) => {
                if !db.is_finite() {
                    bail!("snr_db must be finite");
                }
                Noise::SnrDb(db)
            }
            (None, Some(s)) => Noise::Sigma2(positive("sigma2", s)?),
            (None, None) => Noise::SnrDb(defaults.snr_db),
        };
        let convention: SnrConvention = match args.snr_convention.as_ref().or(file.snr_convention.as_ref()) {
            Some(s) => s.parse()?,
            None => SnrConvention::Standard,
        };
        let mut quad = QuadOptions::default();
        if let Some(r) = args.rel_tol.or(file.rel_tol) {
            quad = quad.with_rel_tol(r);
        }
        if let Some(a) = args.abs_tol.or(file.abs_tol) {
            quad = quad.with_abs_tol(a);
        }
        quad.validate()?;
        Ok(Scenario {
            position: Vector3::new(x_c, y_c, z_c),
            orientation: t.normalize(),
            wavelength,
            side,
            noise,
            convention,
            quad,
        })
    }

    pub fn source(&self) -> Result<DipoleSource> {
        self.source_at(self.position, self.wavelength)
    }

    pub fn source_at(&self, position: Vector3<f64>, wavelength: f64) -> Result<DipoleSource> {
        Ok(DipoleSource::cpl(position.x, wavelength)?
            .with_position(position)?
            .with_orientation(self.orientation)?)
    }

    /// Noise variance for `source` (an SNR fixes σ² relative to `|χ|²`).
    pub fn sigma2(&self, source: &DipoleSource) -> Result<f64> {
        Ok(match self.noise {
            Noise::Sigma2(s) => s,
            Noise::SnrDb(db) => sigma2_from_snr(chi(source).norm_sqr(), db_to_linear(db), self.convention)?,
        })
    }

    /// `(standard, caption)` SNR in dB for `source`.
    pub fn snr_db_both(&self, source: &DipoleSource) -> Result<(f64, f64)> {
        let c2 = chi(source).norm_sqr();
        let s2 = self.sigma2(source)?;
        Ok((
            linear_to_db(snr_in(c2, s2, SnrConvention::Standard)),
            linear_to_db(snr_in(c2, s2, SnrConvention::Caption)),
        ))
    }

    pub fn noise_description(&self) -> String {
        match self.noise {
            Noise::SnrDb(db) => format!("snr_db={db} ({})", self.convention),
            Noise::Sigma2(s) => format!("sigma2={s}"),
        }
    }
}
