//! Field of every model at one surface point.

use anyhow::Result;
use clap::Args;

use holocrb::em_field::{
    analytic_field, dipole_radiation_vector, dyadic_green_field, fresnel_signal, general_farfield,
    hu_scalar_signal, planar_signal, spherical_from_point, SurfacePoint,
};

use crate::commands::describe;
use crate::config::{Defaults, IoArgs, Scenario, ScenarioArgs};
use crate::output::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct FieldProbeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Observation point y, m (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Observation point z, m (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
}

pub fn table(args: &FieldProbeArgs) -> Result<Table> {
    let file = args.io.file_config()?;
    let sc = Scenario::resolve(&args.scenario, &file, Defaults::BOUNDS)?;
    let p = SurfacePoint::new(args.y.or(file.y).unwrap_or(0.0), args.z.or(file.z).unwrap_or(0.0));
    let source = sc.source()?;

    let mut t = Table::new("field-probe", &["model", "component", "re_v_per_m", "im_v_per_m"]);
    describe(&mut t, &sc, &source)?;
    t.meta("point_m", format!("0,{},{}", num(p.y), num(p.z)));
    t.meta("scalar_models", "unit-amplitude Green's function times the model's phase and angle factor");

    let (rt, rp) = dipole_radiation_vector(&source);
    let coords = spherical_from_point(&source, p)?;
    let vector_models = [
        ("analytic", analytic_field(&source, p)?),
        ("dyadic_green", dyadic_green_field(&source, p)?),
        (
            "general_farfield",
            general_farfield(rt, rp, &coords, source.wavenumber(), source.impedance),
        ),
    ];
    for (name, e) in vector_models {
        for (c, v) in ["x", "y", "z"].iter().zip(e.to_array()) {
            t.row(vec![name.into(), c.to_string(), num(v.re), num(v.im)]);
        }
    }
    let scalar_models = [
        ("hu_scalar", hu_scalar_signal(&source, p)?),
        ("planar", planar_signal(&source, p)?),
        ("fresnel", fresnel_signal(&source, p)?),
    ];
    for (name, v) in scalar_models {
        t.row(vec![name.into(), "scalar".into(), num(v.re), num(v.im)]);
    }
    Ok(t)
}
