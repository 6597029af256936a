//! Bounds against the source distance for several wavelengths.

use anyhow::{bail, Result};
use clap::Args;
use nalgebra::Vector3;

use holocrb::em_field::ObservationSurface;
use holocrb::fim::{assemble_fim, crb_report};

use crate::commands::describe;
use crate::config::{check_sweep, logspace, Defaults, IoArgs, Scenario, ScenarioArgs};
use crate::output::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct CrbDistanceArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Source distances, m (default: 12 log-spaced values, 1 to 30).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x_values: Option<Vec<f64>>,
    /// Wavelengths, m (default: 0.01, 0.1).
    #[arg(long, value_delimiter = ',')]
    pub wavelengths: Option<Vec<f64>>,
}

pub fn table(args: &CrbDistanceArgs) -> Result<Table> {
    let file = args.io.file_config()?;
    let sc = Scenario::resolve(&args.scenario, &file, Defaults::BOUNDS)?;
    let xs = args
        .x_values
        .clone()
        .or(file.x_values)
        .unwrap_or_else(|| logspace(1.0, 30.0, 12));
    let lambdas = args
        .wavelengths
        .clone()
        .or(file.wavelengths)
        .unwrap_or_else(|| vec![0.01, 0.1]);
    check_sweep("x_values", &xs)?;
    check_sweep("wavelengths", &lambdas)?;
    if let Some(x) = xs.iter().find(|&&x| x <= 0.0) {
        bail!("x_values must be positive (source in front of the surface), got {x}");
    }
    if let Some(l) = lambdas.iter().find(|&&l| l <= 0.0) {
        bail!("wavelengths must be positive, got {l}");
    }
    let surface = ObservationSurface::new(sc.side)?;
    let base = sc.source()?;

    let mut t = Table::new(
        "crb-distance",
        &[
            "x_c_m",
            "wavelength_m",
            "rcrb_x_m",
            "rcrb_y_m",
            "rcrb_z_m",
            "rcrb_u_x_m",
            "rcrb_u_y_m",
            "rcrb_u_z_m",
        ],
    );
    describe(&mut t, &sc, &base)?;
    t.meta("side_m", num(sc.side));
    for &lambda in &lambdas {
        for &x in &xs {
            let src = sc.source_at(Vector3::new(x, sc.position.y, sc.position.z), lambda)?;
            // An SNR setting is held fixed across wavelengths.
            let sigma2 = sc.sigma2(&src)?;
            let rep = crb_report(&assemble_fim(&src, &surface, sigma2, &sc.quad)?)?;
            let mut row = vec![num(x), num(lambda)];
            row.extend(rep.rcrb_known().iter().chain(&rep.rcrb_unknown()).map(|&v| num(v)));
            t.row(row);
        }
    }
    Ok(t)
}
