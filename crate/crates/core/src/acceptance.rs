//! The acceptance suite: ten end-to-end checks with fixed seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blowup::{self, ExpansionOptions, Extras, Quantity};
use crate::config;
use crate::error::Result;
use crate::invariants::{self, EvalOptions, Moments, NewtonOptions};
use crate::localize;
use crate::polytope::{catalog, DelzantPolytope};
use crate::profiles::{Family, WeightPair};
use crate::rational;
use crate::testconfig::{self, ToricContext, ToricTC};

/// Frozen convex-minimisation oracle for the soliton field on the reflexive
/// `Bl₁ℂP²`.
pub const SOLITON_ORACLE: &str = include_str!("../oracles/soliton-bl1cp2-reflexive.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonOracle {
    pub polytope: String,
    pub method: String,
    pub xi: Vec<f64>,
}

pub fn soliton_oracle() -> SolitonOracle {
    serde_json::from_str(SOLITON_ORACLE).expect("bundled oracle parses")
}

pub const CRITERIA: [&str; 10] = [
    "backend agreement",
    "derived constants",
    "symmetry vanishing",
    "extremal-field residual",
    "soliton oracle",
    "twist identities",
    "blowup expansions",
    "destabilizing vertex",
    "semistability spot-check",
    "Gram blowup convergence",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2}. {} ({:.1}s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

const FAMILIES: [Family; 4] = [Family::Csck, Family::Soliton, Family::Sasaki, Family::Ckem];

fn rng(id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + id as u64)
}

fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Random vector with entries in `{−2, −15/8, …, 2}`, exact in binary.
fn random_dyadic(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.gen_range(-16..=16)) / 8.0).collect()
}

fn radius(p: &DelzantPolytope) -> f64 {
    p.vertices().iter().map(|v| v.coords_f64().iter().map(|x| x * x).sum::<f64>().sqrt()).fold(1.0, f64::max)
}

fn name(p: &DelzantPolytope) -> &str {
    p.name().unwrap_or("unnamed")
}

/// Largest relative disagreement, each entry measured against its own size
/// or the natural scale of its kind (`V`, `V·R`, `V·R²`), whichever is larger.
fn backend_gap(q: &Moments, l: &Moments, r: f64) -> f64 {
    let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / b.abs().max(scale);
    let mut gap = rel(l.vol_w, q.vol_w, 0.0).max(rel(l.per_v, q.per_v, 0.0));
    for i in 0..q.first_w.len() {
        gap = gap.max(rel(l.first_w[i], q.first_w[i], q.vol_w * r));
        gap = gap.max(rel(l.first_v[i], q.first_v[i], q.per_v * r));
        for j in 0..q.first_w.len() {
            gap = gap.max(rel(l.second_w[i][j], q.second_w[i][j], q.vol_w * r * r));
        }
    }
    gap
}

fn family_for(family: Family, p: &DelzantPolytope, xi: &[f64]) -> Result<WeightPair> {
    config::family_weights(family, xi, p)
}

fn c1_backend_agreement() -> Result<(bool, String)> {
    let mut rng = rng(1);
    let opts = EvalOptions::default();
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    let mut count = 0;
    for p in catalog::standard() {
        let r = radius(&p);
        for family in FAMILIES {
            for _ in 0..10 {
                let xi = random_vec(&mut rng, p.dim(), 1.0);
                let w = family_for(family, &p, &xi)?;
                let q = invariants::moments_quadrature(&p, &w, &opts.quad)?;
                let l = invariants::moments_localization(&p, &w, &opts)?;
                let gap = backend_gap(&q, &l, r);
                count += 1;
                if gap > worst {
                    worst = gap;
                    at = format!("{} {family:?}", name(&p));
                }
            }
        }
    }
    Ok((worst <= 1e-8, format!("{count} evaluations, worst relative gap {worst:.2e} ({at}), tol 1e-8")))
}

fn c2_derived_constants() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, expected) in [("cp1", 2i64), ("cp2", 6)] {
        let p = catalog::load(name)?;
        let exact = p.lattice_perimeter() / p.volume();
        ok &= exact == rational::int(expected);
        let w = WeightPair::constant(p.dim());
        for backend in [invariants::Backend::Quadrature, invariants::Backend::Localization] {
            let opts = EvalOptions { backend, ..EvalOptions::default() };
            let s = invariants::s_hat(&p, &w, &opts)?;
            ok &= (s - expected as f64).abs() <= 1e-12 * expected as f64;
        }
        parts.push(format!("Ŝ({name}) = {}", rational::format(&exact)));
    }
    let cp2 = catalog::load("cp2")?;
    let mut rng = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let xi = loop {
            let xi = random_vec(&mut rng, 2, 1.0);
            if localize::genericity(&cp2, &xi) > 0.05 {
                break xi;
            }
        };
        let sum: f64 = localize::vertex_weights(&cp2).iter().map(|v| v.c1(&xi).powi(2) / v.euler(&xi)).sum();
        worst = worst.max((sum - 9.0).abs());
    }
    ok &= worst <= 1e-9;
    parts.push(format!("Σ c1²/e on ℂP² off by {worst:.2e} at 5 ξ"));
    Ok((ok, parts.join("; ")))
}

fn c3_symmetry() -> Result<(bool, String)> {
    let opts = EvalOptions::default();
    let mut worst: f64 = 0.0;
    for name in ["cp2", "cp1xcp1", "bl3cp2"] {
        let p = catalog::load(name)?;
        for w in [WeightPair::constant(2), WeightPair::soliton(&[0.0, 0.0])] {
            let (m, _) = invariants::moments(&p, &w, &opts)?;
            worst = worst.max(m.futaki_vector().iter().fold(0.0, |a, b| a.max(b.abs())));
        }
    }
    let p = catalog::load("bl1cp2")?;
    let (m, _) = invariants::moments(&p, &WeightPair::constant(2), &opts)?;
    let axis = m.futaki(&[1.0, 1.0]);
    let ok = worst <= 1e-10 && axis.abs() > 1e-3;
    Ok((ok, format!("max |F| on symmetric polytopes {worst:.2e} (tol 1e-10); F(1,1) on bl1cp2 = {axis:.6}")))
}

fn c4_extremal() -> Result<(bool, String)> {
    let mut rng = rng(4);
    let opts = EvalOptions::default();
    let mut worst: f64 = 0.0;
    let mut worst_signed: f64 = 0.0;
    let mut count = 0;
    for p in catalog::standard() {
        for family in FAMILIES {
            let xi = random_vec(&mut rng, p.dim(), 0.5);
            let w = family_for(family, &p, &xi)?;
            let (m, _) = invariants::moments(&p, &w, &opts)?;
            let ext = m.extremal()?;
            let cov = m.covariance();
            for _ in 0..20 {
                let beta = random_vec(&mut rng, p.dim(), 1.0);
                let f = m.futaki(&beta);
                let pairing: f64 =
                    (0..p.dim()).map(|i| (0..p.dim()).map(|j| ext.chi[i] * cov[(i, j)] * beta[j]).sum::<f64>()).sum();
                let scale = 1.0 + f.abs();
                worst = worst.max((f + pairing).abs() / scale);
                worst_signed = worst_signed.max(m.futaki_signed(&ext.chi, ext.a, &beta).abs() / scale);
                count += 1;
            }
        }
    }
    let ok = worst <= 1e-8 && worst_signed <= 1e-8;
    Ok((
        ok,
        format!(
            "{count} (P, W, β): max residual {worst:.2e}, max weighted-extremal Futaki {worst_signed:.2e} (tol 1e-8)"
        ),
    ))
}

fn c5_soliton() -> Result<(bool, String)> {
    let opts = EvalOptions::default();
    let newton = NewtonOptions::default();
    let oracle = soliton_oracle();
    let p = catalog::load(&oracle.polytope)?;
    let s = invariants::soliton_field(&p, &opts, &newton)?;
    let err = s.xi.iter().zip(&oracle.xi).map(|(x, o)| (x - o).abs()).fold(0.0, f64::max);
    let mut sym: f64 = 0.0;
    for name in ["cp2-reflexive", "cp1xcp1-reflexive", "bl3cp2-reflexive", "cube-reflexive"] {
        let q = catalog::load(name)?;
        let r = invariants::soliton_field(&q, &opts, &newton)?;
        sym = sym.max(r.xi.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    let ok = err <= 1e-8 && sym <= 1e-9;
    Ok((
        ok,
        format!(
            "ξ* = ({:.12}, {:.12}), oracle error {err:.2e} (tol 1e-8); symmetric max ‖ξ*‖ {sym:.2e} (tol 1e-9)",
            s.xi[0], s.xi[1]
        ),
    ))
}

fn c6_twists() -> Result<(bool, String)> {
    let mut rng = rng(6);
    let opts = EvalOptions::default();
    let polytopes = catalog::standard();
    let mut df_gap: f64 = 0.0;
    let mut dft_gap: f64 = 0.0;
    let mut chow_gap: f64 = 0.0;
    for trial in 0..50 {
        let p = &polytopes[trial % polytopes.len()];
        let n = p.dim();
        let w =
            if trial % 2 == 0 { WeightPair::constant(n) } else { WeightPair::soliton(&random_vec(&mut rng, n, 0.5)) };
        let ctx = ToricContext::new(p, &w, &opts)?;
        let tc = ToricTC::new(testconfig::random_pl(&mut rng, n));
        let beta = random_dyadic(&mut rng, n);
        let twisted = tc.twist(&beta);
        df_gap = df_gap.max((ctx.df(&twisted)? - ctx.df(&tc)? - ctx.futaki(&beta)).abs());
        dft_gap = dft_gap.max((ctx.df_t(&twisted)? - ctx.df_t(&tc)?).abs());
        let normed = ctx.normalize_chow(&tc)?;
        let shifted = tc.shifted(&rational::ratio(rng.gen_range(-16..=16), 8));
        for v in 0..p.vertices().len() {
            let c = ctx.chow(&tc, v)?;
            chow_gap = chow_gap.max((ctx.chow(&normed, v)? - c).abs()).max((ctx.chow(&shifted, v)? - c).abs());
        }
    }
    let ok = df_gap <= 1e-10 && dft_gap <= 1e-10 && chow_gap <= 1e-12;
    Ok((
        ok,
        format!("50 trials: df law {df_gap:.2e}, df_T invariance {dft_gap:.2e} (tol 1e-10); Chow invariance {chow_gap:.2e} (tol 1e-12)"),
    ))
}

/// A fixed non-product configuration on `p`.
fn sample_tc(p: &DelzantPolytope, rng: &mut impl Rng) -> ToricTC {
    loop {
        let phi = testconfig::random_pl(rng, p.dim());
        if !phi.is_affine_on(p) {
            return ToricTC::new(phi);
        }
    }
}

fn c7_blowup() -> Result<(bool, String)> {
    let mut rng = rng(7);
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut worst_constant_volume: f64 = 0.0;
    for name in ["cp2", "cp1xcp1"] {
        let p = catalog::load(name)?;
        let tc = sample_tc(&p, &mut rng);
        let beta = random_dyadic(&mut rng, 2);
        for w in [WeightPair::constant(2), WeightPair::soliton(&[0.3, -0.2])] {
            for v in 0..p.vertices().len() {
                for q in [Quantity::Volume, Quantity::Futaki, Quantity::Df, Quantity::Dft] {
                    let tol = if q == Quantity::Volume { 1e-8 } else { 1e-6 };
                    let opts = ExpansionOptions { coefficient_tol: tol, ..ExpansionOptions::default() };
                    let extras = Extras { beta: Some(beta.clone()), tc: Some(tc.clone()), basis: None };
                    let r = blowup::verify_expansion(q, &p, &w, v, &extras, &opts)?;
                    checks += 1;
                    worst = worst.max(r.coefficient_rel_error);
                    if q == Quantity::Volume && w.is_constant() {
                        worst_constant_volume = worst_constant_volume.max(r.coefficient_rel_error);
                    }
                    if !r.pass {
                        failures
                            .push(format!("{name} v{v} {q} {}", if w.is_constant() { "constant" } else { "soliton" }));
                    }
                }
            }
        }
    }
    let ok = failures.is_empty() && worst_constant_volume <= 1e-13;
    Ok((
        ok,
        format!(
            "{checks} expansions, worst coefficient error {worst:.2e}, constant-weight volume {worst_constant_volume:.1e}; failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join(", ") }
        ),
    ))
}

fn c8_destabilizing() -> Result<(bool, String)> {
    let mut rng = rng(8);
    let opts = EvalOptions::default();
    let mut min_ratio = f64::INFINITY;
    let mut trials = 0;
    let mut nonpositive = 0;
    for p in catalog::standard() {
        let w = WeightPair::constant(p.dim());
        let ctx = ToricContext::new(&p, &w, &opts)?;
        let mut done = 0;
        while done < 100 {
            let tc = ToricTC::new(testconfig::random_pl(&mut rng, p.dim()));
            let d = ctx.destabilizing_vertex(&tc)?;
            if d.orthogonal_norm <= 1e-6 {
                continue;
            }
            done += 1;
            trials += 1;
            if !(d.chow_t > 0.0) {
                nonpositive += 1;
            }
            if let Some(r) = d.ratio {
                min_ratio = min_ratio.min(r);
            }
        }
    }
    let ok = nonpositive == 0 && min_ratio > 0.01;
    Ok((ok, format!("{trials} trials, Ch^T ≤ 0 in {nonpositive}; empirical min Ch^T·V/‖TC⊥‖ = {min_ratio:.4}")))
}

fn c9_semistability() -> Result<(bool, String)> {
    let mut rng = rng(9);
    let opts = EvalOptions::default();
    let cp2 = catalog::load("cp2")?;
    let bl = catalog::load("bl1cp2")?;
    let w = WeightPair::constant(2);
    let ctx_cp2 = ToricContext::new(&cp2, &w, &opts)?;
    let ctx_bl = ToricContext::new(&bl, &w, &opts)?;
    let mut min_df = f64::INFINITY;
    let mut min_dft = f64::INFINITY;
    for _ in 0..100 {
        min_df = min_df.min(ctx_cp2.df(&ToricTC::new(testconfig::random_pl(&mut rng, 2)))?);
        min_dft = min_dft.min(ctx_bl.df_t(&ToricTC::new(testconfig::random_pl(&mut rng, 2)))?);
    }
    let ok = min_df >= -1e-10 && min_dft >= -1e-10;
    Ok((ok, format!("min df on ℂP² {min_df:.3e}; min df_T on Bl₁ℂP² {min_dft:.3e} (tol −1e-10)")))
}

fn c10_gram() -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    let mut at = String::new();
    let mut checks = 0;
    let mut failures = 0;
    for name in ["cp2", "cp1xcp1", "bl1cp2", "cube"] {
        let p = catalog::load(name)?;
        let n = p.dim();
        for w in [WeightPair::constant(n), WeightPair::soliton(&vec![0.25; n])] {
            for v in 0..p.vertices().len() {
                let r = blowup::gram_convergence(&p, &w, v, None, &ExpansionOptions::default())?;
                checks += 1;
                let e = r.remainder_exponent.unwrap_or(f64::INFINITY);
                let margin = e - (n as f64 - 0.5);
                if margin < worst {
                    worst = margin;
                    at = format!("{name} v{v}: exponent {e:.3}");
                }
                failures += usize::from(!r.pass);
            }
        }
    }
    Ok((failures == 0, format!("{checks} configurations, {failures} failing; tightest {at} (need ≥ n − 0.5)")))
}

/// Runs one criterion (1-based).
pub fn run_criterion(id: usize) -> CriterionResult {
    let start = std::time::Instant::now();
    let outcome = match id {
        1 => c1_backend_agreement(),
        2 => c2_derived_constants(),
        3 => c3_symmetry(),
        4 => c4_extremal(),
        5 => c5_soliton(),
        6 => c6_twists(),
        7 => c7_blowup(),
        8 => c8_destabilizing(),
        9 => c9_semistability(),
        10 => c10_gram(),
        _ => panic!("criteria are numbered 1 to 10"),
    };
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id, name: CRITERIA[id - 1].to_string(), pass, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}
