use nalgebra::Vector3;
use rayon::prelude::*;

use crate::em_field::{DipoleSource, ObservationSurface};
use crate::error::{Error, Result};
use crate::fim::{assemble_fim_components, crb_report, discrete_fim, Components, CrbReport, Fault};
use crate::mle::estimator::{estimate, MleConfig, Observation, TrialResult};
use crate::mle::grid::{synthesize, ReceiverGrid};
use crate::mle::model::SourceConstants;
use crate::quadrature::QuadOptions;

/// True source, receive grid and field noise level for a Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct MleScenario {
    pub source: DipoleSource,
    pub grid: ReceiverGrid,
    /// Field noise variance `σ²`; element noise is `σ²_ν = 2σ² l_r/λ`.
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseSummary {
    /// RMSE per coordinate over converged trials, meters.
    pub rmse: [f64; 3],
    /// Approximate 95% band on each RMSE (delta method on the MSE).
    pub rmse_band: [[f64; 2]; 3],
    /// Mean error per coordinate.
    pub bias: [f64; 3],
    pub trials: usize,
    pub failures: usize,
    /// Per-trial outcomes in trial order.
    pub results: Vec<std::result::Result<TrialResult, Error>>,
}

impl RmseSummary {
    pub fn successes(&self) -> usize {
        self.trials - self.failures
    }
}

fn summarize(truth: &Vector3<f64>, results: Vec<std::result::Result<TrialResult, Error>>) -> RmseSummary {
    let trials = results.len();
    let ok: Vec<&TrialResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let n = ok.len();
    let mut rmse = [f64::NAN; 3];
    let mut band = [[f64::NAN; 2]; 3];
    let mut bias = [f64::NAN; 3];
    if n > 0 {
        for a in 0..3 {
            let err: Vec<f64> = ok.iter().map(|r| r.position[a] - truth[a]).collect();
            let sq: Vec<f64> = err.iter().map(|e| e * e).collect();
            let mse = sq.iter().sum::<f64>() / n as f64;
            bias[a] = err.iter().sum::<f64>() / n as f64;
            rmse[a] = mse.sqrt();
            let se = if n > 1 {
                let var = sq.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                mse
            };
            band[a] = [(mse - 1.96 * se).max(0.0).sqrt(), (mse + 1.96 * se).sqrt()];
        }
    }
    RmseSummary {
        rmse,
        rmse_band: band,
        bias,
        trials,
        failures: trials - n,
        results,
    }
}

/// Runs `config.trials` independent trials; trial `t` draws its noise from
/// seed `config.seed ^ t`. Results do not depend on the worker count.
pub fn monte_carlo(config: &MleConfig, scenario: &MleScenario) -> Result<RmseSummary> {
    config.validate()?;
    scenario.source.validate()?;
    let constants = SourceConstants::of(&scenario.source);
    let results: Vec<std::result::Result<TrialResult, Error>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let data = synthesize(&scenario.source, &scenario.grid, scenario.sigma2, config.seed ^ t)?;
            let obs = Observation {
                grid: &scenario.grid,
                voltages: &data.v,
                constants,
                known_orientation: scenario.source.orientation,
            };
            estimate(config, &obs)
        })
        .collect();
    Ok(summarize(&scenario.source.position, results))
}

/// Where the z-component-only observations are taken.
#[derive(Debug, Clone, Copy)]
pub enum ZObservation<'a> {
    /// Continuous square with field noise `σ²`.
    Surface(ObservationSurface),
    /// Discrete receive dipoles with element noise `σ²_ν`.
    Grid(&'a ReceiverGrid),
}

/// CRBs when only `e_z` is observed; `sigma2` is the field noise level
/// in both cases (converted to `σ²_ν` for a grid).
pub fn crb_z_component(
    source: &DipoleSource,
    observation: ZObservation<'_>,
    sigma2: f64,
    quad: &QuadOptions,
) -> Result<CrbReport> {
    let fim = match observation {
        ZObservation::Surface(surface) => {
            assemble_fim_components(source, &surface, sigma2, quad, Components::Z_ONLY, Fault::default())?
        }
        ZObservation::Grid(grid) => discrete_fim(
            source,
            &grid.points,
            grid.element_length,
            grid.noise_variance(sigma2),
            Components::Z_ONLY,
        )?,
    };
    crb_report(&fim)
}
