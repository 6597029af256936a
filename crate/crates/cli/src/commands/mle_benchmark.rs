//! Monte-Carlo RMSE of the three estimators against the bounds.

use anyhow::{bail, Context, Result};
use clap::Args;

use holocrb::fim::{crb_report, discrete_fim, Components};
use holocrb::mle::{build_grid, monte_carlo, EstimatorKind, MleConfig, MleScenario, SearchBox};

use crate::commands::describe;
use crate::config::{check_sweep, Defaults, IoArgs, Scenario, ScenarioArgs};
use crate::output::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct MleBenchmarkArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Master seed; trial t uses seed XOR t. Required (flag or config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Estimators: analytic, hu_scalar, planar (default: all three).
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    /// Side lengths, m (default: 1, 2, 4).
    #[arg(long, value_delimiter = ',')]
    pub sides: Option<Vec<f64>>,
    /// Whether the analytic estimator knows the orientation (default true).
    #[arg(long)]
    pub orientation_known: Option<bool>,
    /// Monte-Carlo trials per row (default 200).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Search box half-width around the true position, m (default 1).
    #[arg(long)]
    pub search_half_width: Option<f64>,
    /// Minimum coarse-grid points per axis (default 9).
    #[arg(long)]
    pub coarse_min: Option<usize>,
    /// Maximum coarse-grid points per axis (default 64).
    #[arg(long)]
    pub coarse_max: Option<usize>,
    /// Relative cost change ending the local refinement (default 1e-8).
    #[arg(long)]
    pub refine_rel_tol: Option<f64>,
    /// Iteration cap of the local refinement (default 2000).
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

const HEADER: &[&str] = &[
    "side_m",
    "estimator",
    "orientation_known",
    "rmse_x_m",
    "rmse_y_m",
    "rmse_z_m",
    "rmse_x_low95_m",
    "rmse_x_high95_m",
    "bias_x_m",
    "sqrt_crb_x_m",
    "sqrt_crb_y_m",
    "sqrt_crb_z_m",
    "sqrt_crb_zonly_x_m",
    "sqrt_crb_zonly_y_m",
    "sqrt_crb_zonly_z_m",
    "trials",
    "failures",
    "seed",
];

pub fn table(args: &MleBenchmarkArgs) -> Result<Table> {
    let file = args.io.file_config()?;
    let sc = Scenario::resolve(&args.scenario, &file, Defaults::MLE)?;
    let seed = args
        .seed
        .or(file.seed)
        .context("mle-benchmark needs a seed: pass --seed N")?;
    let kinds: Vec<EstimatorKind> = args
        .estimators
        .clone()
        .or(file.estimators)
        .map(|v| v.iter().map(|s| s.parse()).collect::<holocrb::Result<Vec<_>>>())
        .transpose()?
        .unwrap_or_else(|| EstimatorKind::ALL.to_vec());
    if kinds.is_empty() {
        bail!("estimators must list at least one estimator");
    }
    let sides = args.sides.clone().or(file.sides).unwrap_or_else(|| vec![1.0, 2.0, 4.0]);
    check_sweep("sides", &sides)?;
    let known = args.orientation_known.or(file.orientation_known).unwrap_or(true);
    let trials = args.trials.or(file.trials).unwrap_or(200);
    let half_width = args.search_half_width.or(file.search_half_width).unwrap_or(1.0);

    let source = sc.source()?;
    let sigma2 = sc.sigma2(&source)?;

    let mut cfg = MleConfig::new(EstimatorKind::Analytic, SearchBox::around(source.position, half_width), trials, seed);
    if let Some(v) = args.coarse_min.or(file.coarse_min) {
        cfg.optimizer.coarse_min = v;
    }
    if let Some(v) = args.coarse_max.or(file.coarse_max) {
        cfg.optimizer.coarse_max = v;
    }
    if let Some(v) = args.refine_rel_tol.or(file.refine_rel_tol) {
        cfg.optimizer.refine_rel_tol = v;
    }
    if let Some(v) = args.max_iterations.or(file.max_iterations) {
        cfg.optimizer.max_iterations = v;
    }
    cfg.validate()?;

    let mut t = Table::new("mle-benchmark", HEADER);
    describe(&mut t, &sc, &source)?;
    t.meta("seed", seed)
        .meta("trials", trials)
        .meta("search_half_width_m", num(half_width))
        .meta(
            "optimizer",
            format!(
                "coarse {}..{} per axis, {} starts, {} lobes, refine_rel_tol {}, max_iterations {}",
                cfg.optimizer.coarse_min,
                cfg.optimizer.coarse_max,
                cfg.optimizer.starts,
                cfg.optimizer.lobes,
                num(cfg.optimizer.refine_rel_tol),
                cfg.optimizer.max_iterations
            ),
        )
        .meta("crb_columns", "receive-grid bounds with element noise 2 sigma^2 l_r/lambda; unknown-orientation bound when the orientation is estimated");

    for &side in &sides {
        let grid = build_grid(side, sc.wavelength, None)?;
        let noise = grid.noise_variance(sigma2);
        let full = crb_report(&discrete_fim(&source, &grid.points, grid.element_length, noise, Components::ALL)?)?;
        let zonly = crb_report(&discrete_fim(&source, &grid.points, grid.element_length, noise, Components::Z_ONLY)?)?;
        let scenario = MleScenario { source, grid, sigma2 };
        for &kind in &kinds {
            cfg.estimator = kind;
            cfg.orientation_known = known;
            let estimates_t = kind == EstimatorKind::Analytic && !known;
            let s = monte_carlo(&cfg, &scenario)?;
            let pick = |r: &holocrb::fim::CrbReport| if estimates_t { r.crb_unknown } else { r.crb_known };
            let mut row = vec![
                num(side),
                kind.to_string(),
                if kind == EstimatorKind::Analytic { known.to_string() } else { "n/a".into() },
            ];
            row.extend(s.rmse.iter().map(|&v| num(v)));
            row.push(num(s.rmse_band[0][0]));
            row.push(num(s.rmse_band[0][1]));
            row.push(num(s.bias[0]));
            row.extend(pick(&full).iter().chain(&pick(&zonly)).map(|v| num(v.sqrt())));
            row.push(s.trials.to_string());
            row.push(s.failures.to_string());
            row.push(seed.to_string());
            t.row(row);
        }
    }
    Ok(t)
}
