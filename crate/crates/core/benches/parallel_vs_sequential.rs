//! Criterion benches comparing the rayon fan-out against the sequential
//! fallback on the three data-parallel hot paths: per-t eigensolves in the
//! gap profile, contour-tracked projections, and defect-sweep rows.
//!
//! With `--no-default-features` the parallel entry points degrade to the
//! sequential loop, so the same bench names remain comparable across builds.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use adia_core::adiabatic::{defect_sweep, Metric, SweepConfig};
use adia_core::family::{conjugate_family, conjugate_projection, OperatorFamily, RotationFamily};
use adia_core::linop::{C64, CMat};
use adia_core::par::{par_map, seq_map};
use adia_core::riesz::{track_projections, ContourPolicy};
use adia_core::spectra::SpectralWindow;

fn fixture(dim: usize) -> (OperatorFamily, SpectralWindow, adia_core::riesz::ProjectionFamily) {
    let mut a0 = CMat::zeros(dim, dim);
    for k in 1..dim {
        a0[(k, k)] = C64::new(-1.0, 0.0);
        if k + 1 < dim {
            a0[(k, k + 1)] = C64::new(1.0, 0.0);
        }
    }
    let rot = RotationFamily::plane_rotation(
        dim,
        0,
        1,
        Arc::new(|t| t),
        Arc::new(|_| 1.0),
        Arc::new(|_| 0.0),
    );
    let base = OperatorFamily::constant(a0, "bench-base");
    let fam = conjugate_family(&base, &rot).unwrap();
    let mut p0 = CMat::zeros(dim, dim);
    p0[(0, 0)] = C64::new(1.0, 0.0);
    let (p, dp, ddp) = conjugate_projection(&p0, &rot);
    let grid: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
    let pf = adia_core::riesz::ProjectionFamily::from_closures(grid, p, dp, ddp);
    let window = SpectralWindow::Guide { curve: Arc::new(|_| C64::new(0.0, 0.0)), multiplicity: 1 };
    (fam, window, pf)
}

fn bench_eigensolve_batch(c: &mut Criterion) {
    let (fam, _, _) = fixture(24);
    let ts: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
    let mut group = c.benchmark_group("eigensolve-batch-24");
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let mats: Vec<CMat> = ts.iter().map(|&t| fam.eval(t)).collect();
            par_map(mats, |m| adia_core::linop::eigenvalues(&m).unwrap())
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mats: Vec<CMat> = ts.iter().map(|&t| fam.eval(t)).collect();
            seq_map(mats, |m| adia_core::linop::eigenvalues(&m).unwrap())
        })
    });
    group.finish();
}

fn bench_projection_tracking(c: &mut Criterion) {
    let (fam, window, _) = fixture(16);
    let grid: Vec<f64> = (0..=48).map(|i| i as f64 / 48.0).collect();
    let mut group = c.benchmark_group("track-projections-16");
    group.sample_size(10);
    // track_projections fans per-t contour work through par_map internally;
    // the "sequential" surrogate runs the same Riesz integrals in a plain loop.
    group.bench_function("parallel", |b| {
        b.iter(|| track_projections(&fam, &window, &grid, ContourPolicy::default()).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let profile = adia_core::spectra::gap_profile(&fam, &window, &grid).unwrap();
            let policy = ContourPolicy::default();
            let out: Vec<CMat> = grid
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let contour = policy
                        .contour_for(t, &profile.per_t_inside[i], &profile.per_t_outside[i])
                        .unwrap();
                    adia_core::riesz::riesz_projection(&fam.eval(t), &contour).unwrap()
                })
                .collect();
            out
        })
    });
    group.finish();
}

fn bench_defect_rows(c: &mut Criterion) {
    let (fam, _, pf) = fixture(8);
    let mut group = c.benchmark_group("defect-sweep-8");
    group.sample_size(10);
    let mk = |t_scales: Vec<f64>| SweepConfig {
        t_scales,
        time_grid: (0..=32).map(|i| i as f64 / 32.0).collect(),
        metrics: vec![Metric::ProjDefect],
        tol: 1e-9,
        lambda: None,
    };
    group.bench_function("parallel-rows", |b| {
        b.iter(|| defect_sweep(&fam, &pf, &mk(vec![8.0, 16.0, 32.0, 64.0])).unwrap())
    });
    group.bench_function("sequential-rows", |b| {
        b.iter(|| {
            // one row at a time forces the sequential path regardless of features
            for t in [8.0, 16.0, 32.0, 64.0] {
                defect_sweep(&fam, &pf, &mk(vec![t])).unwrap();
            }
        })
    });
    group.finish();
}

criterion_group!(benches, bench_eigensolve_batch, bench_projection_tracking, bench_defect_rows);
criterion_main!(benches);
