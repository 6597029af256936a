use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector3;

use holocrb::cpl::{crb_cpl, CplParams};
use holocrb::em_field::{DipoleSource, ObservationSurface, SurfacePoint};
use holocrb::fim::{assemble_fim, crb_report, field_jacobian};
use holocrb::mle::{build_grid, log_likelihood, noiseless_voltages, EstimatorKind, SourceConstants};
use holocrb::quadrature::{integrate2d, QuadOptions, Rect2};

fn quadrature(c: &mut Criterion) {
    let q = QuadOptions::default();
    let dom = Rect2::centered_square(1.0).unwrap();
    c.bench_function("integrate2d oscillatory", |b| {
        b.iter(|| integrate2d(|u, v| (40.0 * (u * u + v * v)).cos(), black_box(dom), &q).unwrap())
    });
}

fn fim(c: &mut Criterion) {
    let q = QuadOptions::default();
    let src = DipoleSource::cpl(6.0, 0.1).unwrap();
    c.bench_function("field jacobian", |b| {
        b.iter(|| field_jacobian(black_box(&src), SurfacePoint::new(0.3, -0.2)).unwrap())
    });
    let surface = ObservationSurface::new(1.0).unwrap();
    c.bench_function("fim + crb, L=1 m, lambda=0.1", |b| {
        b.iter(|| crb_report(&assemble_fim(black_box(&src), &surface, 1e-3, &q).unwrap()).unwrap())
    });
    let p = CplParams::new(1.0, 2.0 * PI / 0.01, 6.0, 10.0).unwrap();
    c.bench_function("cpl closed form crb", |b| b.iter(|| crb_cpl(black_box(&p), &q).unwrap()));
}

fn likelihood(c: &mut Criterion) {
    let src = DipoleSource::cpl(6.0, 0.1).unwrap();
    let grid = build_grid(2.0, 0.1, None).unwrap();
    let v = noiseless_voltages(&src, &grid).unwrap();
    let k = SourceConstants::of(&src);
    let u = src.position + Vector3::new(0.01, 0.0, 0.0);
    let mut g = c.benchmark_group("log likelihood, L=2 m");
    for kind in EstimatorKind::ALL {
        g.bench_function(kind.name(), |b| {
            b.iter(|| log_likelihood(kind, &src.orientation, black_box(&u), &v, &grid, &k))
        });
    }
    g.finish();
}

criterion_group!(benches, quadrature, fim, likelihood);
criterion_main!(benches);
