use std::path::Path;
use std::process::{Command, Output};

fn holocrb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holocrb"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Csv {
    meta: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(out: &Output) -> Csv {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        let mut lines = text.lines();
        let mut meta = Vec::new();
        let mut header = Vec::new();
        for l in lines.by_ref() {
            if let Some(m) = l.strip_prefix("# ") {
                meta.push(m.to_string());
            } else {
                header = l.split(',').map(String::from).collect();
                break;
            }
        }
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Csv { meta, header, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sweep_has_metadata_and_units() {
    let c = Csv::parse(&holocrb(&["crb-sweep", "--sides", "1,3"]));
    assert!(c.meta.iter().any(|m| m.starts_with("tool: holocrb ")));
    assert!(c.meta.iter().any(|m| m.starts_with("format: holocrb-csv/")));
    assert!(c.meta.iter().any(|m| m.starts_with("snr_standard_db")));
    assert!(c.meta.iter().any(|m| m.starts_with("snr_caption_db")));
    assert_eq!(c.header[0], "side_m");
    assert!(c.header[1..].iter().all(|h| h.ends_with("_m")));
    assert_eq!(c.rows.len(), 2);
    // Larger surfaces never hurt.
    let x = c.col("rcrb_u_x_m");
    assert!(x[1] < x[0]);
}

#[test]
fn snr_conventions_differ_by_3db() {
    let a = Csv::parse(&holocrb(&["crb-sweep", "--sides", "3", "--snr-db", "10"]));
    let b = Csv::parse(&holocrb(&["crb-sweep", "--sides", "3", "--snr-db", "10", "--snr-convention", "caption"]));
    // The same figure in the caption convention means half the noise.
    let r = a.col("rcrb_x_m")[0] / b.col("rcrb_x_m")[0];
    assert!((r - 2f64.sqrt()).abs() < 1e-9, "{r}");
}

#[test]
fn horizontal_x_dipole_loses_range_accuracy() {
    let v = Csv::parse(&holocrb(&["crb-sweep", "--sides", "3"]));
    let h = Csv::parse(&holocrb(&["crb-sweep", "--sides", "3", "--orientation", "1,0,0"]));
    assert!(h.col("rcrb_u_x_m")[0] > v.col("rcrb_u_x_m")[0]);
}

#[test]
fn large_surface_reaches_x_asymptote() {
    let c = Csv::parse(&holocrb(&["crb-sweep", "--sides", "20"]));
    let r = c.col("rcrb_x_m")[0] / c.col("asymptote_x_m")[0];
    assert!((r - 1.0).abs() < 0.05, "RCRB(x_C)/asymptote at L=20 m: {r}");
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "wavelength = 0.1\nsides = [2.0, 4.0]\n").unwrap();
    let out = dir.path().join("out.csv");
    let cfg_s = cfg.to_str().unwrap();
    let run = holocrb(&["crb-sweep", "--config", cfg_s, "--sides", "3", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", stderr(&run));
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# wavelength_m: 1.0000000000000001e-1"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2);

    std::fs::write(&cfg, "wavelenght = 0.1\n").unwrap();
    let bad = holocrb(&["crb-sweep", "--config", cfg_s]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("wavelenght"), "{}", stderr(&bad));
}

#[test]
fn validation_errors_are_actionable() {
    let e = holocrb(&["crb-sweep", "--sides", "3,2"]);
    assert!(!e.status.success());
    assert!(stderr(&e).contains("strictly increasing"));

    let e = holocrb(&["crb-sweep", "--snr-db", "10", "--sigma2", "1"]);
    assert!(stderr(&e).contains("not both"));

    let e = holocrb(&["crb-distance", "--x-values", "-1,2"]);
    assert!(stderr(&e).contains("positive"));

    let e = holocrb(&["mle-benchmark", "--trials", "1"]);
    assert!(!e.status.success());
    assert!(stderr(&e).contains("--seed"));

    let e = holocrb(&["mle-benchmark", "--seed", "1", "--estimators", "mle9"]);
    assert!(stderr(&e).contains("unknown estimator"));
}

#[test]
fn map_is_minimal_at_cpl_and_symmetric() {
    let c = Csv::parse(&holocrb(&[
        "crb-map",
        "--y-offsets",
        "-0.5,0,0.5",
        "--z-offsets",
        "-0.5,0,0.5",
    ]));
    let ys = c.col("y_c_m");
    let zs = c.col("z_c_m");
    for name in ["crb_u_x_rel_db", "crb_u_y_rel_db", "crb_u_z_rel_db"] {
        let v = c.col(name);
        assert!(v.iter().all(|&d| d >= 0.0));
        let centre = (0..v.len()).find(|&i| ys[i] == 0.0 && zs[i] == 0.0).unwrap();
        assert_eq!(v[centre], 0.0, "{name}");
    }
    let x = c.col("rcrb_u_x_m");
    for i in 0..x.len() {
        let j = (0..x.len()).find(|&j| ys[j] == -ys[i] && zs[j] == zs[i]).unwrap();
        assert!((x[i] / x[j] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn distance_scaling() {
    let c = Csv::parse(&holocrb(&["crb-distance", "--x-values", "2,4,8,16", "--wavelengths", "0.01,0.1"]));
    let lam = c.col("wavelength_m");
    let rx = c.col("rcrb_x_m");
    let ry = c.col("rcrb_y_m");
    let n = 4;
    for i in 0..n {
        assert_eq!(lam[i], 0.01);
        let r = rx[n + i] / rx[i];
        assert!((r / 10.0 - 1.0).abs() < 0.02, "x ratio {r}");
        let r = ry[n + i] / ry[i];
        assert!((r / 10.0 - 1.0).abs() < 0.02, "y ratio {r}");
    }
    let slope = |v: &[f64]| (v[n - 1] / v[0]).ln() / 8f64.ln();
    assert!(slope(&rx[..n]) < slope(&ry[..n]));
}

#[test]
fn cpl_table_consistency_column() {
    let c = Csv::parse(&holocrb(&["cpl-table", "--rhos", "0.5,5,50"]));
    let d = c.col("i1_closed_minus_quadrature");
    let i1 = c.col("i1");
    for k in 0..3 {
        assert!(d[k].abs() <= 1e-8 * i1[k]);
    }
    let (lo, mid, hi) = (c.col("i3_lower"), c.col("i3"), c.col("i3_upper"));
    for k in 0..3 {
        assert!(lo[k] <= mid[k] && mid[k] <= hi[k]);
    }
    let e = holocrb(&["cpl-table", "--y-c", "0.1"]);
    assert!(stderr(&e).contains("central perpendicular line"));
}

#[test]
fn field_probe_models_agree_far_away() {
    let c = Csv::parse(&holocrb(&["field-probe", "--x-c", "50", "--y", "0.2", "--z", "0.1"]));
    let re = c.col("re_v_per_m");
    let im = c.col("im_v_per_m");
    // analytic rows 0..3, dyadic rows 3..6
    for k in 0..3 {
        let a = (re[k], im[k]);
        let d = (re[3 + k], im[3 + k]);
        let scale = (re[2] * re[2] + im[2] * im[2]).sqrt();
        assert!(((a.0 - d.0).powi(2) + (a.1 - d.1).powi(2)).sqrt() < 1e-3 * scale);
    }
    assert_eq!(c.rows.len(), 12);
}

#[test]
fn validate_reports_and_fails_on_fault() {
    let ok = holocrb(&["validate"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let tight = holocrb(&["validate", "--rel-tol", "1e-11"]);
    assert_eq!(tight.status.code(), Some(0), "{}", String::from_utf8_lossy(&tight.stdout));

    let bad = holocrb(&["validate", "--inject-fault", "0,4"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("gradient")).unwrap();
    assert!(line.starts_with("FAIL") && line.contains("de_x/dy_C"), "{line}");
}

#[test]
fn benchmark_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = holocrb(&[
            "mle-benchmark",
            "--seed",
            "17",
            "--trials",
            "3",
            "--sides",
            "1",
            "--snr-db",
            "60",
            "--search-half-width",
            "0.2",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(Path::new(&p)).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# seed: 17"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].contains(",analytic,true,"));
    assert!(rows[2].contains(",hu_scalar,n/a,"));
    assert!(rows[3].contains(",planar,n/a,"));
}
