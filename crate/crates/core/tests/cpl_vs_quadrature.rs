use holocrb::cpl::{crb_cpl, fim_blocks_cpl, CplParams};
use holocrb::em_field::{DipoleSource, ObservationSurface};
use holocrb::fim::{assemble_fim, crb_report};
use holocrb::quadrature::QuadOptions;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn proposition_entries_match_general_fim() {
    let q = QuadOptions::default();
    for (lambda, side) in [(0.01, 0.6), (0.01, 3.0), (0.01, 6.0), (0.5, 3.0)] {
        let src = DipoleSource::cpl(6.0, lambda).unwrap();
        let sigma2 = 0.37;
        let f = assemble_fim(&src, &ObservationSurface::new(side).unwrap(), sigma2, &q).unwrap();
        let p = CplParams::from_source(&src, side, sigma2).unwrap();
        let b = fim_blocks_cpl(&p, &q).unwrap();
        let m = &f.matrix;
        for i in 0..3 {
            assert!(rel(m[(3 + i, 3 + i)], b.f_cc[i]) < 1e-6, "F_cc{i} {} {}", m[(3 + i, 3 + i)], b.f_cc[i]);
            assert!(rel(m[(i, i)], b.f_tt[i]) < 1e-6, "F_tt{i}");
        }
        assert!(rel(m[(0, 5)], b.f_tc13) < 1e-6, "F_tc13 {} {}", m[(0, 5)], b.f_tc13);
        assert!(rel(m[(2, 3)], b.f_tc31) < 1e-6, "F_tc31 {} {}", m[(2, 3)], b.f_tc31);

        // Everything else vanishes by symmetry.
        let zero = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3), (0, 4), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5)];
        for (i, j) in zero {
            let g = (m[(i, i)] * m[(j, j)]).sqrt();
            assert!(m[(i, j)].abs() <= 1e-8 * g, "({i},{j}) = {}", m[(i, j)]);
        }

        let general = crb_report(&f).unwrap();
        let closed = crb_cpl(&p, &q).unwrap();
        for i in 0..3 {
            assert!(rel(general.crb_known[i], closed.crb_known[i]) < 1e-6);
            assert!(rel(general.crb_unknown[i], closed.crb_unknown[i]) < 1e-6);
        }
        assert!(general.mil_residual <= 1e-8);
    }
}
