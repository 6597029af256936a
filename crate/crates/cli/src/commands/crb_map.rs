//! Unknown-orientation bounds over source offsets parallel to the surface.

use anyhow::Result;
use clap::Args;
use nalgebra::Vector3;

use holocrb::em_field::ObservationSurface;
use holocrb::fim::{assemble_fim, crb_report};
use holocrb::units::linear_to_db;

use crate::commands::describe;
use crate::config::{check_sweep, linspace, Defaults, IoArgs, Scenario, ScenarioArgs};
use crate::output::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct CrbMapArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// y_C values, m (default: 9 values from -1 to 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y_offsets: Option<Vec<f64>>,
    /// z_C values, m (default: 9 values from -1 to 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z_offsets: Option<Vec<f64>>,
}

pub fn table(args: &CrbMapArgs) -> Result<Table> {
    let file = args.io.file_config()?;
    let sc = Scenario::resolve(&args.scenario, &file, Defaults::BOUNDS)?;
    let ys = args
        .y_offsets
        .clone()
        .or(file.y_offsets)
        .unwrap_or_else(|| linspace(-1.0, 1.0, 9));
    let zs = args
        .z_offsets
        .clone()
        .or(file.z_offsets)
        .unwrap_or_else(|| linspace(-1.0, 1.0, 9));
    check_sweep("y_offsets", &ys)?;
    check_sweep("z_offsets", &zs)?;
    let surface = ObservationSurface::new(sc.side)?;
    let base = sc.source()?;
    let sigma2 = sc.sigma2(&base)?;

    let mut cells = Vec::with_capacity(ys.len() * zs.len());
    for &y in &ys {
        for &z in &zs {
            let src = sc.source_at(Vector3::new(sc.position.x, y, z), sc.wavelength)?;
            let rep = crb_report(&assemble_fim(&src, &surface, sigma2, &sc.quad)?)?;
            cells.push((y, z, rep.crb_unknown));
        }
    }
    let mut min = [f64::INFINITY; 3];
    for (_, _, c) in &cells {
        for i in 0..3 {
            min[i] = min[i].min(c[i]);
        }
    }

    let mut t = Table::new(
        "crb-map",
        &[
            "y_c_m",
            "z_c_m",
            "rcrb_u_x_m",
            "rcrb_u_y_m",
            "rcrb_u_z_m",
            "crb_u_x_rel_db",
            "crb_u_y_rel_db",
            "crb_u_z_rel_db",
        ],
    );
    describe(&mut t, &sc, &base)?;
    t.meta("side_m", num(sc.side));
    t.meta("rel_db", "10 log10(CRB_u / min over the map)");
    for (y, z, c) in cells {
        let mut row = vec![num(y), num(z)];
        row.extend(c.iter().map(|v| num(v.sqrt())));
        row.extend((0..3).map(|i| num(linear_to_db(c[i] / min[i]))));
        t.row(row);
    }
    Ok(t)
}
