//! SNR conventions and decibel helpers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How an SNR figure relates `|χ|²` to the noise variance `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// `SNR = 2|χ|²/σ²`, the definition used by every bound formula.
    #[default]
    Standard,
    /// `SNR = |χ|²/σ²`, 3 dB below the standard value for the same noise.
    Caption,
}

impl SnrConvention {
    /// Ratio `SNR_standard / SNR_this`.
    fn factor(self) -> f64 {
        match self {
            SnrConvention::Standard => 1.0,
            SnrConvention::Caption => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SnrConvention::Standard => "standard",
            SnrConvention::Caption => "caption",
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(SnrConvention::Standard),
            "caption" => Ok(SnrConvention::Caption),
            other => Err(Error::InvalidParameter(format!(
                "unknown SNR convention '{other}' (expected 'standard' or 'caption')"
            ))),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Noise variance giving `snr` (linear) under `convention`.
pub fn sigma2_from_snr(chi_abs2: f64, snr: f64, convention: SnrConvention) -> Result<f64> {
    if !(snr > 0.0 && snr.is_finite()) || !(chi_abs2 > 0.0) {
        return Err(Error::InvalidParameter(format!("SNR must be positive, got {snr}")));
    }
    Ok(2.0 * chi_abs2 / (snr * convention.factor()))
}

/// `2|χ|²/σ²`.
pub fn snr_standard(chi_abs2: f64, sigma2: f64) -> f64 {
    2.0 * chi_abs2 / sigma2
}

/// The SNR of the same noise level expressed in `convention`.
pub fn snr_in(chi_abs2: f64, sigma2: f64, convention: SnrConvention) -> f64 {
    snr_standard(chi_abs2, sigma2) / convention.factor()
}
