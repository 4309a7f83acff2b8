//! Quadrature and vertex localisation agree, including directions nearly
//! orthogonal to an edge.

use proptest::prelude::*;
use wkstab::config::family_weights;
use wkstab::invariants::{moments_localization, moments_quadrature, EvalOptions, Moments};
use wkstab::polytope::catalog;
use wkstab::profiles::Family;

fn gap(q: &Moments, l: &Moments) -> f64 {
    let rel = |a: f64, b: f64, s: f64| (a - b).abs() / b.abs().max(s);
    let mut g = rel(l.vol_w, q.vol_w, 0.0).max(rel(l.per_v, q.per_v, 0.0));
    for i in 0..q.first_w.len() {
        g = g.max(rel(l.first_w[i], q.first_w[i], q.vol_w)).max(rel(l.first_v[i], q.first_v[i], q.per_v));
        for j in 0..q.first_w.len() {
            g = g.max(rel(l.second_w[i][j], q.second_w[i][j], q.vol_w));
        }
    }
    g
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Csck), Just(Family::Soliton), Just(Family::Sasaki), Just(Family::Ckem)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn backends_agree(
        index in 0usize..8,
        family in family(),
        raw in prop::collection::vec(-1.0f64..1.0, 3),
        tiny in prop::option::of((0usize..3, -7.0f64..-1.0)),
    ) {
        let p = &catalog::standard()[index];
        let n = p.dim();
        let mut xi = raw[..n].to_vec();
        if let Some((i, e)) = tiny {
            xi[i % n] = 10f64.powf(e);
        }
        let w = family_weights(family, &xi, p).unwrap();
        let opts = EvalOptions::default();
        let q = moments_quadrature(p, &w, &opts.quad).unwrap();
        let l = moments_localization(p, &w, &opts).unwrap();
        prop_assert!(gap(&q, &l) <= 1e-9, "{:?} {family:?} ξ = {xi:?}: {:.2e}", p.name(), gap(&q, &l));
    }
}

#[test]
fn zero_direction_is_a_limit() {
    for p in catalog::standard() {
        let w = family_weights(Family::Soliton, &vec![0.0; p.dim()], &p).unwrap();
        let opts = EvalOptions::default();
        let q = moments_quadrature(&p, &w, &opts.quad).unwrap();
        let l = moments_localization(&p, &w, &opts).unwrap();
        assert!(gap(&q, &l) <= 1e-10, "{:?}", p.name());
    }
}
