//! Bounds against the surface side length.

use anyhow::Result;
use clap::Args;

use holocrb::cpl::crb_asymptotic;
use holocrb::em_field::{chi, ObservationSurface};
use holocrb::fim::{assemble_fim, crb_report};
use holocrb::units::snr_standard;

use crate::commands::describe;
use crate::config::{check_sweep, logspace, Defaults, IoArgs, Scenario, ScenarioArgs};
use crate::output::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct CrbSweepArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Side lengths to evaluate, m (default: 24 log-spaced values, 0.2 to 20).
    #[arg(long, value_delimiter = ',')]
    pub sides: Option<Vec<f64>>,
}

pub fn table(args: &CrbSweepArgs) -> Result<Table> {
    let file = args.io.file_config()?;
    let sc = Scenario::resolve(&args.scenario, &file, Defaults::BOUNDS)?;
    let sides = args
        .sides
        .clone()
        .or(file.sides)
        .unwrap_or_else(|| logspace(0.2, 20.0, 24));
    check_sweep("sides", &sides)?;
    let source = sc.source()?;
    let sigma2 = sc.sigma2(&source)?;
    let snr = snr_standard(chi(&source).norm_sqr(), sigma2);

    let mut t = Table::new(
        "crb-sweep",
        &[
            "side_m",
            "rcrb_x_m",
            "rcrb_y_m",
            "rcrb_z_m",
            "rcrb_u_x_m",
            "rcrb_u_y_m",
            "rcrb_u_z_m",
            "asymptote_x_m",
        ],
    );
    describe(&mut t, &sc, &source)?;
    for &side in &sides {
        let f = assemble_fim(&source, &ObservationSurface::new(side)?, sigma2, &sc.quad)?;
        let rep = crb_report(&f)?;
        let known = rep.rcrb_known();
        let unknown = rep.rcrb_unknown();
        // Only the x limit is independent of ρ.
        let asym = crb_asymptotic(sc.wavelength, snr, side / sc.position.x)[0].sqrt();
        let mut row = vec![num(side)];
        row.extend(known.iter().chain(&unknown).map(|&v| num(v)));
        row.push(num(asym));
        t.row(row);
    }
    Ok(t)
}
