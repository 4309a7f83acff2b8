//! Moments by both backends, Chow weights and the corner-chop sweep.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wkstab::blowup::{self, Extras};
use wkstab::config::family_weights;
use wkstab::invariants::{moments_localization, moments_quadrature};
use wkstab::polytope::catalog;
use wkstab::rational::{int, ratio};
use wkstab::{
    AffinePiece, Backend, EvalOptions, ExpansionOptions, Family, PLConvex, QuadOptions, Quantity, ToricContext, ToricTC,
};

const POLYTOPES: [&str; 4] = ["cp2", "bl1cp2", "bl3cp2", "cube"];

fn corner_tc(dim: usize) -> ToricTC {
    let mut gradient = vec![int(0); dim];
    gradient[0] = int(1);
    let phi = PLConvex::new(vec![AffinePiece::new(gradient, int(0)), AffinePiece::new(vec![int(0); dim], ratio(1, 4))])
        .expect("convex pieces");
    ToricTC::new(phi)
}

fn moments(c: &mut Criterion) {
    let loc = EvalOptions { backend: Backend::Localization, ..EvalOptions::default() };
    let mut group = c.benchmark_group("moments");
    for name in POLYTOPES {
        let p = catalog::load(name).unwrap();
        let xi: Vec<f64> = (0..p.dim()).map(|i| 0.3 - 0.2 * i as f64).collect();
        let w = family_weights(Family::Soliton, &xi, &p).unwrap();
        group.bench_with_input(BenchmarkId::new("quadrature", name), &p, |b, p| {
            b.iter(|| moments_quadrature(black_box(p), &w, &QuadOptions::default()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("localization", name), &p, |b, p| {
            b.iter(|| moments_localization(black_box(p), &w, &loc).unwrap())
        });
        let zero = vec![0.0; p.dim()];
        let w0 = family_weights(Family::Soliton, &zero, &p).unwrap();
        group.bench_with_input(BenchmarkId::new("localization-degenerate", name), &p, |b, p| {
            b.iter(|| moments_localization(black_box(p), &w0, &loc).unwrap())
        });
    }
    group.finish();
}

fn chow(c: &mut Criterion) {
    let mut group = c.benchmark_group("chow");
    for name in POLYTOPES {
        let p = catalog::load(name).unwrap();
        let w = family_weights(Family::Csck, &vec![0.0; p.dim()], &p).unwrap();
        let ctx = ToricContext::new(&p, &w, &EvalOptions::default()).unwrap();
        let tc = corner_tc(p.dim());
        group.bench_function(BenchmarkId::new("destabilizing-vertex", name), |b| {
            b.iter(|| ctx.destabilizing_vertex(black_box(&tc)).unwrap())
        });
    }
    group.finish();
}

fn expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("blowup");
    group.sample_size(10);
    let p = catalog::load("cp2").unwrap();
    let w = family_weights(Family::Soliton, &[0.3, -0.2], &p).unwrap();
    let opts = ExpansionOptions::default();
    group.bench_function("volume-cp2", |b| {
        b.iter(|| blowup::verify_expansion(Quantity::Volume, &p, &w, 0, &Extras::default(), &opts).unwrap())
    });
    let extras = Extras { tc: Some(corner_tc(2)), ..Extras::default() };
    group.bench_function("dft-cp2", |b| {
        b.iter(|| blowup::verify_expansion(Quantity::Dft, &p, &w, 2, &extras, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, moments, chow, expansion);
criterion_main!(benches);
