pub mod cpl_table;
pub mod crb_distance;
pub mod crb_map;
pub mod crb_sweep;
pub mod field_probe;
pub mod mle_benchmark;
pub mod validate;

use anyhow::Result;
use holocrb::em_field::DipoleSource;

use crate::config::Scenario;
use crate::output::{num, Table};

/// Scenario parameters every table records.
pub(crate) fn describe(table: &mut Table, sc: &Scenario, source: &DipoleSource) -> Result<()> {
    let (std_db, cap_db) = sc.snr_db_both(source)?;
    let t = sc.orientation;
    table
        .meta("x_c_m", num(sc.position.x))
        .meta("y_c_m", num(sc.position.y))
        .meta("z_c_m", num(sc.position.z))
        .meta("orientation", format!("{},{},{}", num(t.x), num(t.y), num(t.z)))
        .meta("wavelength_m", num(sc.wavelength))
        .meta("noise", sc.noise_description())
        .meta("snr_convention", sc.convention)
        .meta("snr_standard_db (2|chi|^2/sigma^2)", num(std_db))
        .meta("snr_caption_db (|chi|^2/sigma^2)", num(cap_db))
        .meta("quad_rel_tol", num(sc.quad.rel_tol))
        .meta("quad_abs_tol", num(sc.quad.abs_tol));
    Ok(())
}
