//! Every closed-form quantity of the central-perpendicular-line case per ρ.

use anyhow::{bail, Result};
use clap::Args;

use holocrb::cpl::{
    crb_asymptotic, crb_cpl, crb_highfreq, fim_blocks_from, ft_element_bounds, i3_bounds,
    script_integrals, CplParams,
};
use holocrb::em_field::chi;
use holocrb::units::snr_standard;

use crate::commands::describe;
use crate::config::{check_sweep, Defaults, IoArgs, Scenario, ScenarioArgs};
use crate::output::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct CplTableArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Values of ρ = L/x_C (default: 0.1, 0.5, 1, 5, 10, 50, 100, 1000).
    #[arg(long, value_delimiter = ',')]
    pub rhos: Option<Vec<f64>>,
}

const HEADER: &[&str] = &[
    "rho",
    "i1", "i2", "i3", "i4", "i5", "i6", "i7", "i8", "i9", "i10",
    "i1_quadrature",
    "i1_closed_minus_quadrature",
    "i3_lower", "i3_upper",
    "i7_lower", "i7_upper", "i8_lower", "i8_upper",
    "f_cc_xx_per_m2", "f_cc_yy_per_m2", "f_cc_zz_per_m2",
    "f_tt_11", "f_tt_22", "f_tt_33",
    "f_tc_13_per_m", "f_tc_31_per_m",
    "crb_x_m2", "crb_y_m2", "crb_z_m2",
    "crb_u_x_m2", "crb_u_y_m2", "crb_u_z_m2",
    "highfreq_crb_x_m2", "highfreq_crb_y_m2", "highfreq_in_regime",
    "asymptotic_crb_x_m2", "asymptotic_crb_y_m2", "asymptotic_crb_z_m2",
];

pub fn table(args: &CplTableArgs) -> Result<Table> {
    let file = args.io.file_config()?;
    let sc = Scenario::resolve(&args.scenario, &file, Defaults::BOUNDS)?;
    if sc.position.y != 0.0 || sc.position.z != 0.0 {
        bail!("cpl-table needs the source on the central perpendicular line (y_c = z_c = 0)");
    }
    if (sc.orientation - nalgebra::Vector3::z()).norm() > 1e-12 {
        bail!("cpl-table needs a vertical dipole (orientation 0,0,1)");
    }
    let rhos = args
        .rhos
        .clone()
        .or(file.rhos)
        .unwrap_or_else(|| vec![0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0, 1000.0]);
    check_sweep("rhos", &rhos)?;
    if let Some(r) = rhos.iter().find(|&&r| r <= 0.0) {
        bail!("rhos must be positive, got {r}");
    }
    let source = sc.source()?;
    let sigma2 = sc.sigma2(&source)?;
    let snr = snr_standard(chi(&source).norm_sqr(), sigma2);
    let k = source.wavenumber();

    let mut t = Table::new("cpl-table", HEADER);
    describe(&mut t, &sc, &source)?;
    for &rho in &rhos {
        let p = CplParams::new(rho, k, sc.position.x, snr)?;
        let s = script_integrals(rho, &sc.quad)?;
        let (i3_lo, i3_hi) = i3_bounds(rho);
        let ft = ft_element_bounds(rho);
        let b = fim_blocks_from(&p, &s);
        let crb = crb_cpl(&p, &sc.quad)?;
        let hf = crb_highfreq(&p, &sc.quad)?;
        let asym = crb_asymptotic(sc.wavelength, snr, rho);

        let mut row: Vec<String> = vec![num(rho)];
        row.extend(s.as_array().iter().map(|&v| num(v)));
        row.push(num(s.i1_quad));
        row.push(num(s.i1 - s.i1_quad));
        for v in [i3_lo, i3_hi, ft.lb11, ft.ub11, ft.lb22, ft.ub22] {
            row.push(num(v));
        }
        row.extend(b.f_cc.iter().chain(&b.f_tt).map(|&v| num(v)));
        row.push(num(b.f_tc13));
        row.push(num(b.f_tc31));
        row.extend(crb.crb_known.iter().chain(&crb.crb_unknown).map(|&v| num(v)));
        row.push(num(hf.x));
        row.push(num(hf.y));
        row.push(hf.in_regime.to_string());
        row.extend(asym.iter().map(|&v| num(v)));
        t.row(row);
    }
    Ok(t)
}
