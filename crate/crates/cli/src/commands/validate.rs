//! Self-check of the numerical core: derivatives, closed forms, bound
//! ordering and limits, each reported with its measured margin.

use std::fmt;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use holocrb::cpl::{
    crb_cpl, fim_blocks_cpl, ft_element_bounds, i1_closed, i3_bounds, i6_closed, i9_closed,
    script_integrals, CplParams,
};
use holocrb::em_field::{DipoleSource, ObservationSurface, SurfacePoint};
use holocrb::fim::{
    assemble_fim, assemble_fim_components, crb_report, field_jacobian_with_fault,
    finite_difference_jacobian, Components, Fault, PARAM_NAMES,
};
use holocrb::quadrature::QuadOptions;

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Flip the sign of one Jacobian entry, given as COMPONENT,PARAMETER
    /// (0-based; components x,y,z; parameters t_x,t_y,t_z,x_C,y_C,z_C).
    #[arg(long, value_delimiter = ',')]
    pub inject_fault: Option<Vec<usize>>,
    /// Quadrature relative tolerance for the integral checks.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured value of the checked quantity.
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} measured {:.3e} limit {:.3e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.limit,
            self.detail
        )
    }
}

fn check(name: &'static str, measured: f64, limit: f64, detail: String) -> Check {
    Check {
        name,
        passed: measured <= limit,
        measured,
        limit,
        detail,
    }
}

const COMPONENTS: [&str; 3] = ["e_x", "e_y", "e_z"];

fn random_source(rng: &mut ChaCha8Rng) -> Result<DipoleSource> {
    let x = rng.random_range(1.0..10.0);
    let lambda = rng.random_range(0.05..1.0);
    let mut t;
    loop {
        t = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if t.norm() > 0.1 {
            break;
        }
    }
    Ok(DipoleSource::cpl(x, lambda)?
        .with_position(Vector3::new(x, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))?
        .with_orientation(t)?)
}

/// Analytic Jacobian against central differences, per column norm.
pub fn gradient_check(fault: Fault, configs: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = (0.0f64, 0usize, 0usize, 0usize);
    for c in 0..configs {
        let src = random_source(&mut rng)?;
        let p = SurfacePoint::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let a = field_jacobian_with_fault(&src, p, fault)?.j;
        let n = finite_difference_jacobian(&src, p)?.j;
        for m in 0..6 {
            let col: f64 = (0..3).map(|al| n[al][m].norm_sqr()).sum::<f64>().sqrt();
            for al in 0..3 {
                let e = (a[al][m] - n[al][m]).norm() / col;
                if e > worst.0 {
                    worst = (e, c, al, m);
                }
            }
        }
    }
    let (e, c, al, m) = worst;
    Ok(check(
        "gradient vs finite diff",
        e,
        1e-6,
        format!("{configs} configs; worst d{}/d{} (config {c})", COMPONENTS[al], PARAM_NAMES[m]),
    ))
}

/// Closed-form CPL entries against the general quadrature FIM.
pub fn cpl_oracle_check(quad: &QuadOptions, fault: Fault) -> Result<Check> {
    let mut worst = (-1.0f64, String::new());
    for side in [0.6, 3.0, 6.0] {
        let src = DipoleSource::cpl(6.0, 0.01)?;
        let sigma2 = 1.0;
        let f = assemble_fim_components(
            &src,
            &ObservationSurface::new(side)?,
            sigma2,
            quad,
            Components::ALL,
            fault,
        )?;
        let b = fim_blocks_cpl(&CplParams::from_source(&src, side, sigma2)?, quad)?;
        let m = &f.matrix;
        let mut pairs = vec![((0, 5), b.f_tc13), ((2, 3), b.f_tc31)];
        for i in 0..3 {
            pairs.push(((3 + i, 3 + i), b.f_cc[i]));
            pairs.push(((i, i), b.f_tt[i]));
        }
        for ((i, j), want) in pairs {
            let e = (m[(i, j)] - want).abs() / want.abs();
            if e > worst.0 {
                worst = (e, format!("L={side} entry ({i},{j})"));
            }
        }
    }
    Ok(check("closed form vs quadrature", worst.0, 1e-6, format!("worst at {}", worst.1)))
}

/// `CRB_u ≥ CRB` and the inversion-lemma residual on random geometries.
pub fn ordering_checks(quad: &QuadOptions, configs: usize) -> Result<[Check; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bde);
    let mut worst_order = f64::NEG_INFINITY;
    let mut worst_mil = 0.0f64;
    for _ in 0..configs {
        let src = random_source(&mut rng)?;
        let side = rng.random_range(0.5..4.0);
        let rep = crb_report(&assemble_fim(&src, &ObservationSurface::new(side)?, 1e-3, quad)?)?;
        for i in 0..3 {
            worst_order = worst_order.max((rep.crb_known[i] - rep.crb_unknown[i]) / rep.crb_known[i]);
        }
        worst_mil = worst_mil.max(rep.mil_residual);
    }
    Ok([
        check(
            "CRB_u >= CRB",
            worst_order.max(0.0),
            1e-10,
            format!("{configs} geometries; largest relative shortfall of CRB_u"),
        ),
        check(
            "inversion lemma residual",
            worst_mil,
            1e-8,
            format!("{configs} geometries"),
        ),
    ])
}

/// Disk bounds bracket the integrals they bound.
pub fn bound_checks(quad: &QuadOptions) -> Result<Check> {
    let mut worst = (f64::NEG_INFINITY, String::new());
    for rho in [0.5, 1.0, 5.0, 50.0, 1e3] {
        let s = script_integrals(rho, quad)?;
        let (lo, hi) = i3_bounds(rho);
        let ft = ft_element_bounds(rho);
        for (name, l, v, u) in [
            ("I3", lo, s.i3, hi),
            ("I7", ft.lb11, s.i7, ft.ub11),
            ("I8", ft.lb22, s.i8, ft.ub22),
        ] {
            // Positive when the value falls outside [l, u].
            let viol = ((l - v).max(v - u)) / v.abs();
            if viol > worst.0 {
                worst = (viol, format!("tightest: {name} at rho={rho}"));
            }
        }
    }
    Ok(Check {
        name: "disk bounds bracket",
        passed: worst.0 <= 0.0,
        measured: worst.0,
        limit: 0.0,
        detail: worst.1,
    })
}

/// Large-aperture limits of the closed-form integrals.
pub fn asymptote_check() -> Check {
    use std::f64::consts::PI;
    let rho = 1e3;
    let errs = [
        ("I1", (i1_closed(rho) / (3.0 * PI / 4.0) - 1.0).abs()),
        ("I6", (i6_closed(rho) / (9.0 * PI / 8.0) - 1.0).abs()),
        ("I9", (i9_closed(rho) / (PI / 2.0) - 1.0).abs()),
    ];
    let (name, e) = errs.iter().fold(("", 0.0f64), |a, &(n, e)| if e > a.1 { (n, e) } else { a });
    check("asymptotes at rho=1e3", e, 5e-3, format!("worst {name}"))
}

/// `CRB_u(y_C) = CRB(y_C)` for the CPL vertical dipole.
pub fn cpl_identity_check(quad: &QuadOptions) -> Result<Check> {
    let mut worst = 0.0f64;
    for rho in [0.1, 1.0, 10.0] {
        let p = CplParams::new(rho, 2.0 * std::f64::consts::PI / 0.01, 6.0, 10.0)?;
        let r = crb_cpl(&p, quad)?;
        worst = worst.max((r.crb_unknown[1] - r.crb_known[1]).abs() / r.crb_known[1]);
    }
    Ok(check("CPL CRB_u(y) = CRB(y)", worst, 1e-12, "rho in {0.1, 1, 10}".into()))
}

pub fn run_checks(fault: Fault, quad: &QuadOptions) -> Result<Vec<Check>> {
    let mut out = vec![gradient_check(fault, 100)?, cpl_oracle_check(quad, fault)?];
    out.extend(ordering_checks(quad, 20)?);
    out.push(bound_checks(quad)?);
    out.push(asymptote_check());
    out.push(cpl_identity_check(quad)?);
    Ok(out)
}

/// Prints the report; returns whether every check passed.
pub fn run(args: &ValidateArgs) -> Result<bool> {
    let fault = match args.inject_fault.as_deref() {
        None => Fault::default(),
        Some([a, m]) if *a < 3 && *m < 6 => Fault { entry: Some((*a, *m)) },
        Some(_) => bail!("--inject-fault takes COMPONENT,PARAMETER with COMPONENT < 3 and PARAMETER < 6"),
    };
    let mut quad = QuadOptions::default();
    if let Some(r) = args.rel_tol {
        quad = quad.with_rel_tol(r);
    }
    quad.validate()?;
    let checks = run_checks(fault, &quad)?;
    let mut report = String::new();
    for c in &checks {
        report.push_str(&c.to_string());
        report.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    report.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    std::io::stdout().write_all(report.as_bytes())?;
    if let Some(p) = &args.out {
        write_report(p, &report)?;
    }
    Ok(failed == 0)
}

fn write_report(path: &Path, report: &str) -> Result<()> {
    std::fs::write(path, report).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_gradients_pass() {
        let c = gradient_check(Fault::default(), 20).unwrap();
        assert!(c.passed, "{c}");
    }

    #[test]
    fn injected_fault_is_localized() {
        let c = gradient_check(Fault { entry: Some((0, 4)) }, 20).unwrap();
        assert!(!c.passed);
        assert!(c.detail.contains("de_x/dy_C"), "{}", c.detail);
    }

    #[test]
    fn asymptotes_pass() {
        assert!(asymptote_check().passed);
    }
}
