//! Adaptive simplex quadrature and exact moment oracles.
//!
//! Interior integrals run over a triangulation of `P`; boundary integrals run
//! over triangulations of the facet charts, whose Lebesgue measure is the
//! lattice measure. Each simplex is integrated with a Grundmann–Möller rule
//! and its error estimated against the rule one order lower; the simplex with
//! the largest estimate is bisected along its longest edge until the
//! tolerance is met or the depth limit is reached.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::polytope::DelzantPolytope;
use crate::rational::{self, Rational};
use crate::region::ConvexRegion;

/// A simplex embedded in `ℝⁿ` with the measure it carries (volume for
/// interior pieces, lattice measure for boundary pieces).
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub points: Vec<Vec<f64>>,
    pub measure: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }

    fn bisect(&self) -> (Simplex, Simplex) {
        let k = self.points.len();
        let (mut best, mut len) = ((0, 1), -1.0);
        for i in 0..k {
            for j in i + 1..k {
                let d: f64 = self.points[i].iter().zip(&self.points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                if d > len {
                    len = d;
                    best = (i, j);
                }
            }
        }
        let mid: Vec<f64> = self.points[best.0].iter().zip(&self.points[best.1]).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut a = self.points.clone();
        let mut b = self.points.clone();
        a[best.0] = mid.clone();
        b[best.1] = mid;
        let m = 0.5 * self.measure;
        (Simplex { points: a, measure: m }, Simplex { points: b, measure: m })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    /// Requested polynomial degree; the rule used is exact to degree
    /// `2⌊degree/2⌋ + 1`.
    pub degree: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { degree: 12, tol_abs: 1e-12, tol_rel: 1e-10, max_depth: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// Componentwise error estimate.
    pub error: Vec<f64>,
    pub evaluations: usize,
    pub simplices: usize,
    pub converged: bool,
}

/// Grundmann–Möller rule of index `s` on a `k`-simplex, as barycentric
/// points with weights summing to 1.
#[derive(Clone, Debug)]
struct GmRule {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn compositions(parts: usize, total: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if cur.len() + 1 == parts {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in 0..=total {
        cur.push(first);
        compositions(parts, total - first, out, cur);
        cur.pop();
    }
}

impl GmRule {
    fn new(k: usize, s: usize) -> Self {
        if k == 0 {
            return Self { points: vec![vec![1.0]], weights: vec![1.0] };
        }
        let d = 2 * s + 1;
        let fact = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..=s {
            let denom = (d + k - 2 * i) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            // The k! rescales the rule from the standard simplex (volume 1/k!)
            // to unit total weight.
            let w = sign * fact(k) * 2f64.powi(-2 * s as i32) * denom.powi(d as i32) / (fact(i) * fact(d + k - i));
            let mut betas = Vec::new();
            compositions(k + 1, s - i, &mut betas, &mut Vec::new());
            for beta in betas {
                points.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
                weights.push(w);
            }
        }
        Self { points, weights }
    }

    fn apply(
        &self,
        simplex: &Simplex,
        m: usize,
        f: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
        x: &mut [f64],
    ) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; m];
        for (bary, w) in self.points.iter().zip(&self.weights) {
            x.iter_mut().for_each(|v| *v = 0.0);
            for (l, p) in bary.iter().zip(&simplex.points) {
                for (xk, pk) in x.iter_mut().zip(p) {
                    *xk += l * pk;
                }
            }
            let val = f(x)?;
            for (a, v) in acc.iter_mut().zip(val) {
                *a += w * v;
            }
        }
        acc.iter_mut().for_each(|a| *a *= simplex.measure);
        Ok(acc)
    }
}

struct Piece {
    simplex: Simplex,
    value: Vec<f64>,
    error: Vec<f64>,
    depth: usize,
}

impl Piece {
    fn key(&self) -> f64 {
        self.error.iter().copied().fold(0.0, f64::max)
    }
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().total_cmp(&other.key())
    }
}

/// Adaptive integration of an `m`-vector valued integrand over a union of
/// simplices of a common dimension.
pub fn integrate_simplices(
    simplices: Vec<Simplex>,
    m: usize,
    mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let mut result =
        QuadResult { value: vec![0.0; m], error: vec![0.0; m], evaluations: 0, simplices: 0, converged: true };
    let Some(first) = simplices.first() else { return Ok(result) };
    let k = first.dim();
    let ambient = first.points[0].len();
    let s = (opts.degree / 2).max(1);
    let hi = GmRule::new(k, s);
    let lo = GmRule::new(k, s - 1);
    let mut x = vec![0.0; ambient];
    let mut eval = |simplex: Simplex, depth: usize, evals: &mut usize| -> Result<Piece> {
        let a = hi.apply(&simplex, m, &mut f, &mut x)?;
        let b = lo.apply(&simplex, m, &mut f, &mut x)?;
        *evals += hi.points.len() + lo.points.len();
        let error = if k == 0 { vec![0.0; m] } else { a.iter().zip(&b).map(|(p, q)| (p - q).abs()).collect() };
        Ok(Piece { simplex, value: a, error, depth })
    };

    let mut heap = BinaryHeap::new();
    let mut done: Vec<Piece> = Vec::new();
    for s in simplices {
        heap.push(eval(s, 0, &mut result.evaluations)?);
    }
    let totals = |heap: &BinaryHeap<Piece>, done: &[Piece]| {
        let mut v = vec![0.0; m];
        let mut e = vec![0.0; m];
        for p in heap.iter().chain(done) {
            for i in 0..m {
                v[i] += p.value[i];
                e[i] += p.error[i];
            }
        }
        (v, e)
    };
    loop {
        let (v, e) = totals(&heap, &done);
        let within = v.iter().zip(&e).all(|(v, e)| *e <= opts.tol_abs.max(opts.tol_rel * v.abs()));
        if within {
            break;
        }
        let Some(worst) = heap.pop() else {
            result.converged = false;
            break;
        };
        if worst.depth >= opts.max_depth || worst.key() == 0.0 {
            done.push(worst);
            continue;
        }
        let (a, b) = worst.simplex.bisect();
        heap.push(eval(a, worst.depth + 1, &mut result.evaluations)?);
        heap.push(eval(b, worst.depth + 1, &mut result.evaluations)?);
    }
    let (v, e) = totals(&heap, &done);
    result.value = v;
    result.error = e;
    result.simplices = heap.len() + done.len();
    Ok(result)
}

fn to_simplex(points: &[Vec<Rational>], measure: &Rational) -> Simplex {
    Simplex { points: points.iter().map(|p| rational::vec_to_f64(p)).collect(), measure: rational::to_f64(measure) }
}

/// Triangulation of a full-dimensional region, exact vertices and volumes.
pub fn region_simplices_exact(region: &ConvexRegion) -> Vec<(Vec<Vec<Rational>>, Rational)> {
    region
        .triangulate()
        .into_iter()
        .map(|s| (s.iter().map(|&i| region.vertices()[i].clone()).collect(), region.simplex_volume(&s)))
        .collect()
}

/// Boundary simplices of `P ∩ extra` lying in the facets of `P`, embedded in
/// `ℝⁿ`, with lattice measures. `extra` restricts each facet chart (used for
/// the cells of piecewise-linear functions).
pub fn boundary_simplices_exact(
    polytope: &DelzantPolytope,
    extra: &[crate::region::HalfSpace],
) -> Vec<(usize, Vec<Vec<Rational>>, Rational)> {
    let mut out = Vec::new();
    for facet in 0..polytope.facets().len() {
        let chart = polytope.facet_chart(facet);
        let region = if extra.is_empty() { chart.region.clone() } else { chart.restricted(extra) };
        for (pts, measure) in region_simplices_exact(&region) {
            let embedded = pts.iter().map(|y| chart.embed(y)).collect();
            out.push((facet, embedded, measure));
        }
    }
    out
}

pub fn interior_simplices(polytope: &DelzantPolytope) -> Vec<Simplex> {
    region_simplices_exact(polytope.region()).iter().map(|(p, m)| to_simplex(p, m)).collect()
}

pub fn boundary_simplices(polytope: &DelzantPolytope) -> Vec<Simplex> {
    boundary_simplices_exact(polytope, &[]).iter().map(|(_, p, m)| to_simplex(p, m)).collect()
}

pub fn region_simplices(region: &ConvexRegion) -> Vec<Simplex> {
    region_simplices_exact(region).iter().map(|(p, m)| to_simplex(p, m)).collect()
}

pub fn restricted_boundary_simplices(polytope: &DelzantPolytope, extra: &[crate::region::HalfSpace]) -> Vec<Simplex> {
    boundary_simplices_exact(polytope, extra).iter().map(|(_, p, m)| to_simplex(p, m)).collect()
}

/// `∫_P f dx`.
pub fn integrate(
    polytope: &DelzantPolytope,
    m: usize,
    f: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate_simplices(interior_simplices(polytope), m, f, opts)
}

/// `∫_∂P f dσ` with the lattice boundary measure.
pub fn integrate_boundary(
    polytope: &DelzantPolytope,
    m: usize,
    f: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate_simplices(boundary_simplices(polytope), m, f, opts)
}

/// Polynomial in barycentric coordinates: exponent vector → coefficient.
type LambdaPoly = HashMap<Vec<u32>, Rational>;

fn lambda_mul(a: &LambdaPoly, b: &LambdaPoly) -> LambdaPoly {
    let mut out = LambdaPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(Rational::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `x^exponents` on the simplex, written in barycentric coordinates.
fn monomial_in_lambda(points: &[Vec<Rational>], exponents: &[u32]) -> LambdaPoly {
    let k1 = points.len();
    let mut acc = LambdaPoly::new();
    acc.insert(vec![0; k1], Rational::one());
    for (i, &e) in exponents.iter().enumerate() {
        let mut lin = LambdaPoly::new();
        for (j, p) in points.iter().enumerate() {
            if !p[i].is_zero() {
                let mut ej = vec![0; k1];
                ej[j] = 1;
                lin.insert(ej, p[i].clone());
            }
        }
        for _ in 0..e {
            acc = lambda_mul(&acc, &lin);
        }
    }
    acc
}

fn factorial_q(k: u32) -> Rational {
    (1..=k).fold(Rational::one(), |acc, i| acc * rational::int(i64::from(i)))
}

/// `∫_S λ^β = k!·|S|·β!/(k + |β|)!` on a `k`-simplex of measure `|S|`.
fn dirichlet(beta: &[u32], k: u32, measure: &Rational) -> Rational {
    let total: u32 = beta.iter().sum();
    let num = beta.iter().fold(factorial_q(k), |acc, &b| acc * factorial_q(b));
    measure * num / factorial_q(k + total)
}

/// Exact `∫_S x^α` over a simplex with rational vertices.
pub fn simplex_monomial_exact(points: &[Vec<Rational>], measure: &Rational, exponents: &[u32]) -> Rational {
    let k = (points.len() - 1) as u32;
    monomial_in_lambda(points, exponents).iter().map(|(beta, c)| c * dirichlet(beta, k, measure)).sum()
}

/// Exact `∫_P x^α dx`.
pub fn polytope_monomial_exact(polytope: &DelzantPolytope, exponents: &[u32]) -> Rational {
    region_simplices_exact(polytope.region()).iter().map(|(p, m)| simplex_monomial_exact(p, m, exponents)).sum()
}

/// Exact `∫_∂P x^α dσ`.
pub fn boundary_monomial_exact(polytope: &DelzantPolytope, exponents: &[u32]) -> Rational {
    boundary_simplices_exact(polytope, &[]).iter().map(|(_, p, m)| simplex_monomial_exact(p, m, exponents)).sum()
}

fn multi_indices(parts: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for t in 0..=max_total {
        compositions(parts, t, &mut out, &mut Vec::new());
    }
    out
}

/// `∫_S x^α e^{⟨ξ,x⟩}` by the barycentric power series of the exponential,
/// truncated at total order `terms`. Independent of both quadrature and
/// localisation; intended as a reference value.
pub fn simplex_exp_moment(
    points: &[Vec<Rational>],
    measure: &Rational,
    xi: &[f64],
    exponents: &[u32],
    terms: usize,
) -> f64 {
    let k = points.len() - 1;
    let t: Vec<f64> = points.iter().map(|p| p.iter().zip(xi).map(|(a, b)| rational::to_f64(a) * b).sum()).collect();
    // Σ λ = 1, so a common shift of the tⱼ factors out.
    let c = t.iter().sum::<f64>() / t.len() as f64;
    let t: Vec<f64> = t.iter().map(|x| x - c).collect();
    let fact = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
    let poly = monomial_in_lambda(points, exponents);
    let betas = multi_indices(k + 1, terms);
    let mut total = 0.0;
    for (alpha, coeff) in &poly {
        let alpha_total: u32 = alpha.iter().sum();
        let mut sum = 0.0;
        for beta in &betas {
            let bt: usize = beta.iter().sum();
            // t^β (α+β)! / (β! (k+|α|+|β|)!)
            let mut term = 1.0;
            for j in 0..=k {
                term *= t[j].powi(beta[j] as i32);
                for r in 1..=alpha[j] as usize {
                    term *= (beta[j] + r) as f64;
                }
            }
            sum += term / fact(k + alpha_total as usize + bt);
        }
        total += rational::to_f64(coeff) * sum;
    }
    total * fact(k) * rational::to_f64(measure) * c.exp()
}

/// `∫_P x^α e^{⟨ξ,x⟩} dx` through the series oracle.
pub fn polytope_exp_moment(polytope: &DelzantPolytope, xi: &[f64], exponents: &[u32], terms: usize) -> f64 {
    region_simplices_exact(polytope.region()).iter().map(|(p, m)| simplex_exp_moment(p, m, xi, exponents, terms)).sum()
}

/// `∫_∂P x^α e^{⟨ξ,x⟩} dσ` through the series oracle.
pub fn boundary_exp_moment(polytope: &DelzantPolytope, xi: &[f64], exponents: &[u32], terms: usize) -> f64 {
    boundary_simplices_exact(polytope, &[]).iter().map(|(_, p, m)| simplex_exp_moment(p, m, xi, exponents, terms)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::catalog;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn rules_have_unit_mass() {
        for k in 0..4 {
            for s in 0..7 {
                let r = GmRule::new(k, s);
                let total: f64 = r.weights.iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "k={k} s={s} total={total}");
            }
        }
    }

    #[test]
    fn exact_oracle_values() {
        let simplex = catalog::load("cp2").unwrap();
        assert_eq!(polytope_monomial_exact(&simplex, &[1, 1]), ratio(1, 24));
        assert_eq!(polytope_monomial_exact(&simplex, &[0, 0]), ratio(1, 2));
        assert_eq!(boundary_monomial_exact(&simplex, &[0, 0]), int(3));
        let square = catalog::load("cp1xcp1").unwrap();
        assert_eq!(boundary_monomial_exact(&square, &[1, 0]), int(2));
        let bl = catalog::load("bl1cp2").unwrap();
        assert_eq!(polytope_monomial_exact(&bl, &[0, 0]), ratio(3, 2));
        assert_eq!(polytope_monomial_exact(&bl, &[1, 0]), ratio(7, 6));
        assert_eq!(boundary_monomial_exact(&bl, &[0, 0]), int(5));
        assert_eq!(boundary_monomial_exact(&bl, &[1, 0]), int(4));
    }

    #[test]
    fn cp1_boundary_is_two_points() {
        let cp1 = catalog::load("cp1").unwrap();
        assert_eq!(boundary_monomial_exact(&cp1, &[0]), int(2));
        let r = integrate_boundary(&cp1, 1, |x| Ok(vec![x[0] * x[0]]), &QuadOptions::default()).unwrap();
        assert!((r.value[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn abs_value_needs_adaptivity() {
        // ∫_{-1/2}^{1/2} |x| = 1/4, the kink sits at the midpoint.
        let cp1 = catalog::load("cp1").unwrap();
        let shifted = cp1.translate(&[ratio(1, 7)]);
        let opts = QuadOptions::default();
        let r = integrate(&shifted, 1, |x| Ok(vec![x[0].abs()]), &opts).unwrap();
        // [-5/14, 9/14]
        let exact = (25.0 / 196.0 + 81.0 / 196.0) / 2.0;
        assert!((r.value[0] - exact).abs() < 1e-9, "{}", r.value[0]);
        assert!(r.simplices > 1);
    }

    #[test]
    fn exponential_oracle_agrees_with_closed_form() {
        // ∫_[0,1]² e^{ax+by} = (e^a−1)(e^b−1)/(ab)
        let square = catalog::load("cp1xcp1").unwrap();
        let (a, b): (f64, f64) = (0.7, -1.3);
        let exact = (a.exp_m1() * b.exp_m1()) / (a * b);
        let got = polytope_exp_moment(&square, &[a, b], &[0, 0], 40);
        assert!((got - exact).abs() < 1e-13, "{got} vs {exact}");
        // ∫ x e^{ax} over [0,1] times ∫ e^{by}
        let ix = (a.exp() * (a - 1.0) + 1.0) / (a * a);
        let got = polytope_exp_moment(&square, &[a, b], &[1, 0], 40);
        assert!((got - ix * b.exp_m1() / b).abs() < 1e-13);
        let r =
            integrate(&square, 1, |x| Ok(vec![x[0] * (a * x[0] + b * x[1]).exp()]), &QuadOptions::default()).unwrap();
        assert!((r.value[0] - got).abs() < 1e-12);
    }

    fn catalog_poly() -> impl Strategy<Value = (String, Vec<u32>)> {
        let names = prop::sample::select(vec!["cp2", "bl1cp2", "bl2cp2", "bl3cp2", "hirzebruch-2", "cube"]);
        (names, prop::collection::vec(0u32..5, 3)).prop_map(|(n, e)| (n.to_string(), e))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quadrature_exact_on_polynomials((name, exps) in catalog_poly()) {
            let p = catalog::load(&name).unwrap();
            let exps: Vec<u32> = exps[..p.dim()].to_vec();
            prop_assume!(exps.iter().sum::<u32>() <= 9);
            let mono = |x: &[f64]| -> Result<Vec<f64>> {
                Ok(vec![x.iter().zip(&exps).map(|(v, &e)| v.powi(e as i32)).product()])
            };
            let opts = QuadOptions { max_depth: 0, ..QuadOptions::default() };
            let interior = integrate(&p, 1, mono, &opts).unwrap();
            let want = rational::to_f64(&polytope_monomial_exact(&p, &exps));
            prop_assert!((interior.value[0] - want).abs() <= 1e-11 * want.abs().max(1.0));
            let boundary = integrate_boundary(&p, 1, mono, &opts).unwrap();
            let want = rational::to_f64(&boundary_monomial_exact(&p, &exps));
            prop_assert!((boundary.value[0] - want).abs() <= 1e-11 * want.abs().max(1.0));
        }
    }
}
