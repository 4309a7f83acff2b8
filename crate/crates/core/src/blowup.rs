//! ε-expansions under blowup of a fixed point.
//!
//! Blowing up the fixed point over a vertex `p` with exceptional class of
//! size `ε` corresponds to chopping the corner of `P` at depth `ε`. The
//! leading corrections are predicted in closed form from data at `p` and
//! checked against the exact invariants of the chopped polytopes.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{self, Backend, EvalOptions, Moments};
use crate::polytope::DelzantPolytope;
use crate::profiles::WeightPair;
use crate::quadrature::QuadOptions;
use crate::rational::{self, Rational};
use crate::testconfig::{self, ToricContext, ToricTC};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Volume,
    Futaki,
    Df,
    Dft,
    Gram,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [Quantity::Volume, Quantity::Futaki, Quantity::Df, Quantity::Dft, Quantity::Gram];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Volume => "volume",
            Quantity::Futaki => "futaki",
            Quantity::Df => "df",
            Quantity::Dft => "dft",
            Quantity::Gram => "gram",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown quantity `{s}` (volume|futaki|df|dft|gram)")))
    }
}

/// Extra inputs some quantities need.
#[derive(Clone, Debug, Default)]
pub struct Extras {
    /// Direction for `futaki` (defaults to `e₁`).
    pub beta: Option<Vec<f64>>,
    /// Test configuration for `df`/`dft`.
    pub tc: Option<ToricTC>,
    /// Basis for `gram` (defaults to the standard basis).
    pub basis: Option<Vec<Vec<f64>>>,
}

/// A predicted term `coefficient · ε^order`; vector valued for `gram`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub order: u32,
    pub coefficient: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub quantity: Quantity,
    pub polytope: String,
    pub vertex: usize,
    pub vertex_coords: Vec<f64>,
    pub predicted: Vec<Term>,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    pub baseline: Vec<f64>,
    pub exact: Vec<Vec<f64>>,
    /// Fitted coefficients of orders `k, …, k+5` with `k` the leading order.
    pub fitted: Vec<Term>,
    pub coefficient_rel_error: f64,
    /// Log-log slope of the remainder; `None` when it sits at round-off.
    pub remainder_exponent: Option<f64>,
    pub required_exponent: f64,
    /// `|Q(0) − lim_{ε→0} Q(ε)|`, relative, from a fit with free constant term.
    pub continuity_error: f64,
    pub coefficient_tol: f64,
    pub pass: bool,
}

impl ExpansionReport {
    pub fn leading_order(&self) -> u32 {
        self.predicted[0].order
    }

    /// Rows `(eps, exact, predicted)` of the first component.
    pub fn series(&self) -> Vec<(f64, f64, f64)> {
        let term = &self.predicted[0];
        self.eps
            .iter()
            .zip(&self.exact)
            .map(|(&e, q)| (e, q[0], self.baseline[0] + term.coefficient[0] * e.powi(term.order as i32)))
            .collect()
    }
}

/// Number of powers `ε^k, …` in the least-squares ladder.
const FIT_TERMS: i32 = 6;

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn check_dim(polytope: &DelzantPolytope) -> Result<usize> {
    let n = polytope.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension { required: 2, found: n });
    }
    Ok(n)
}

fn vertex_point(polytope: &DelzantPolytope, vertex: usize) -> Result<Vec<f64>> {
    polytope.vertices().get(vertex).map(|v| v.coords_f64()).ok_or_else(|| Error::NotAVertex(format!("#{vertex}")))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Vol_w(P_ε) = Vol_w(P) − w(p) εⁿ/n! + O(εⁿ⁺¹)`.
pub fn predict_volume_expansion(polytope: &DelzantPolytope, weights: &WeightPair, vertex: usize) -> Result<Term> {
    let n = check_dim(polytope)?;
    let p = vertex_point(polytope, vertex)?;
    Ok(Term { order: n as u32, coefficient: vec![-weights.w(&p)? / factorial(n as u32)] })
}

/// `F_ε(β) = F(β) + v(p)(⟨p,β⟩ − b̄_β) εⁿ⁻¹/(n−2)! + O(εⁿ)`.
pub fn predict_futaki_expansion(
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    moments: &Moments,
    vertex: usize,
    beta: &[f64],
) -> Result<Term> {
    let n = check_dim(polytope)?;
    let p = vertex_point(polytope, vertex)?;
    let centred = dot(&p, beta) - dot(&moments.barycenter(), beta);
    Ok(Term { order: n as u32 - 1, coefficient: vec![weights.v(&p)? * centred / factorial(n as u32 - 2)] })
}

/// `DF_ε = DF − v(p)·Ch_p·εⁿ⁻¹/(n−2)!` and the same for `DF^T` with `Ch^T_p`.
/// Returns `(df term, df_T term)`.
pub fn predict_df_expansions(ctx: &ToricContext<'_>, tc: &ToricTC, vertex: usize) -> Result<(Term, Term)> {
    let n = check_dim(ctx.polytope)?;
    let p = vertex_point(ctx.polytope, vertex)?;
    let scale = -ctx.weights.v(&p)? / factorial(n as u32 - 2);
    let order = n as u32 - 1;
    Ok((
        Term { order, coefficient: vec![scale * ctx.chow(tc, vertex)?] },
        Term { order, coefficient: vec![scale * ctx.chow_t(tc, vertex)?] },
    ))
}

/// `Gram_ε = Gram − w(p)(p − b̄)(p − b̄)ᵀ εⁿ/n! + O(εⁿ⁺¹)`, entries row-major.
pub fn predict_gram_expansion(
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    moments: &Moments,
    vertex: usize,
    basis: &[Vec<f64>],
) -> Result<Term> {
    let n = check_dim(polytope)?;
    let p = vertex_point(polytope, vertex)?;
    let bbar = moments.barycenter();
    let centred: Vec<f64> = p.iter().zip(&bbar).map(|(a, b)| a - b).collect();
    let c = -weights.w(&p)? / factorial(n as u32);
    let proj: Vec<f64> = basis.iter().map(|b| dot(&centred, b)).collect();
    let coefficient = proj.iter().flat_map(|a| proj.iter().map(move |b| c * a * b)).collect();
    Ok(Term { order: n as u32, coefficient })
}

/// Geometric grid: `points` values from `eps_max/4`, halving.
pub fn default_grid(eps_max: &Rational, points: usize) -> Vec<Rational> {
    let mut eps = eps_max / rational::int(4);
    let half = rational::ratio(1, 2);
    (0..points)
        .map(|_| {
            let e = eps.clone();
            eps = &eps * &half;
            e
        })
        .collect()
}

fn check_grid(polytope: &DelzantPolytope, vertex: usize, grid: &[Rational]) -> Result<()> {
    if grid.len() < 5 {
        return Err(Error::IllConditionedFit(format!("{} grid points; at least 5 are needed", grid.len())));
    }
    let bound = polytope.admissible_chop_depth(vertex);
    for w in grid.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::IllConditionedFit("ε-grid must be strictly decreasing".into()));
        }
    }
    for e in grid {
        if *e <= Rational::zero() || *e >= bound {
            return Err(Error::ChopTooDeep { eps: rational::format(e), bound: rational::format(&bound) });
        }
    }
    Ok(())
}

/// Evaluates the quantity on `P` or on a chop of `P`. Chopped values are
/// assembled as `P − corner + new facet` by quadrature, so the baseline part
/// is bit-identical across the grid and cancels in `Q(ε) − Q(0)`.
struct Evaluator<'a> {
    quantity: Quantity,
    base: &'a DelzantPolytope,
    vertex: usize,
    weights: &'a WeightPair,
    quad: QuadOptions,
    beta: Vec<f64>,
    tc: Option<ToricTC>,
    basis: Vec<Vec<f64>>,
}

impl Evaluator<'_> {
    fn eval(&self, eps: Option<&Rational>) -> Result<Vec<f64>> {
        let chopped = eps.map(|e| self.base.corner_chop(self.vertex, e)).transpose()?;
        let corner = eps.map(|e| self.base.corner_halfspace(self.vertex, e));
        let moments = || -> Result<Moments> {
            match (&chopped, &corner) {
                (Some(c), Some(h)) => testconfig::corner_chopped_moments(self.base, c, h, self.weights, &self.quad),
                _ => invariants::moments_quadrature(self.base, self.weights, &self.quad),
            }
        };
        match self.quantity {
            Quantity::Volume => Ok(vec![moments()?.vol_w]),
            Quantity::Futaki => Ok(vec![moments()?.futaki(&self.beta)]),
            Quantity::Gram => {
                let g = moments()?.gram(&self.basis)?;
                let k = self.basis.len();
                Ok((0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| g[(i, j)]).collect())
            }
            Quantity::Df | Quantity::Dft => {
                let tc = self.tc.as_ref().expect("checked by caller");
                let ctx = match (&chopped, corner) {
                    (Some(c), Some(h)) => ToricContext::corner_chopped(self.base, c, h, self.weights, &self.quad)?,
                    _ => {
                        let opts =
                            EvalOptions { backend: Backend::Quadrature, quad: self.quad, ..EvalOptions::default() };
                        ToricContext::new(self.base, self.weights, &opts)?
                    }
                };
                Ok(vec![if self.quantity == Quantity::Df { ctx.df(tc)? } else { ctx.df_t(tc)? }])
            }
        }
    }
}

/// Least squares `y ≈ Σ_j c_j t^{e_j}` with columns scaled for conditioning.
fn fit(t: &[f64], y: &[f64], exponents: &[i32]) -> Result<Vec<f64>> {
    let t_ref = t.iter().cloned().fold(0.0, f64::max);
    let a = DMatrix::from_fn(t.len(), exponents.len(), |i, j| (t[i] / t_ref).powi(exponents[j]));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::IllConditionedFit(format!("design matrix condition {:.3e}", smax / smin)));
    }
    let b = DVector::from_column_slice(y);
    let c = svd.solve(&b, 1e-14 * smax).map_err(|e| Error::IllConditionedFit(e.to_string()))?;
    Ok(exponents.iter().enumerate().map(|(j, &e)| c[j] / t_ref.powi(e)).collect())
}

/// Least-squares slope of `log|r|` against `log ε` over the smallest half of
/// the grid, ignoring points at the round-off floor.
fn loglog_slope(eps: &[f64], r: &[f64], floor: f64) -> Option<f64> {
    let start = eps.len() / 2;
    let pts: Vec<(f64, f64)> = eps[start..]
        .iter()
        .zip(&r[start..])
        .filter(|(_, r)| r.abs() > floor)
        .map(|(e, r)| (e.ln(), r.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Options for [`verify_expansion`].
#[derive(Clone, Debug)]
pub struct ExpansionOptions {
    pub eval: EvalOptions,
    pub grid: Option<Vec<Rational>>,
    pub eps_max: Option<Rational>,
    pub points: usize,
    pub coefficient_tol: f64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self { eval: EvalOptions::default(), grid: None, eps_max: None, points: 8, coefficient_tol: 1e-6 }
    }
}

/// Computes the exact quantity on `P_ε` over the grid and fits it against the
/// predicted leading term.
pub fn verify_expansion(
    quantity: Quantity,
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    vertex: usize,
    extras: &Extras,
    opts: &ExpansionOptions,
) -> Result<ExpansionReport> {
    let n = check_dim(polytope)?;
    let p = vertex_point(polytope, vertex)?;
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => {
            let eps_max = opts.eps_max.clone().unwrap_or_else(|| polytope.admissible_chop_depth(vertex));
            default_grid(&eps_max, opts.points)
        }
    };
    check_grid(polytope, vertex, &grid)?;

    let (moments, _) = invariants::moments(polytope, weights, &opts.eval)?;
    let beta = extras.beta.clone().unwrap_or_else(|| (0..n).map(|i| f64::from(u8::from(i == 0))).collect());
    if beta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: beta.len() });
    }
    let basis = extras
        .basis
        .clone()
        .unwrap_or_else(|| (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect());
    let tc = match quantity {
        Quantity::Df | Quantity::Dft => Some(
            extras
                .tc
                .clone()
                .ok_or_else(|| Error::TestConfig(format!("quantity `{quantity}` needs a test configuration")))?,
        ),
        _ => None,
    };

    // `reference` is the natural size of the leading coefficient, used as the
    // denominator when the prediction itself vanishes
    let fact = |k: usize| factorial(k as u32);
    // `magnitude` is the size of the terms that cancel in the quantity, which
    // sets its round-off floor
    let abs_dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x * y).abs()).sum() };
    let (predicted, reference, magnitude) = match quantity {
        Quantity::Volume => {
            let t = predict_volume_expansion(polytope, weights, vertex)?;
            let r = t.coefficient[0].abs();
            (t, r, moments.vol_w.abs())
        }
        Quantity::Futaki => {
            let t = predict_futaki_expansion(polytope, weights, &moments, vertex, &beta)?;
            let r = weights.v(&p)? * (dot(&p, &beta).abs() + dot(&moments.barycenter(), &beta).abs()) / fact(n - 2);
            let mag = moments.s_hat().abs() * abs_dot(&moments.first_w, &beta) + abs_dot(&moments.first_v, &beta);
            (t, r, mag)
        }
        Quantity::Gram => {
            let t = predict_gram_expansion(polytope, weights, &moments, vertex, &basis)?;
            let r = t.coefficient.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let mag = moments.second_w.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            (t, r, mag)
        }
        Quantity::Df | Quantity::Dft => {
            let ctx = ToricContext::new(polytope, weights, &opts.eval)?;
            let tc = tc.as_ref().expect("set above");
            let (df, dft) = predict_df_expansions(&ctx, tc, vertex)?;
            let table = ctx.chow_table(tc)?;
            let chow_max = table
                .iter()
                .map(|e| if quantity == Quantity::Df { e.chow.abs() } else { e.chow_t.abs() })
                .fold(0.0, f64::max);
            let r = weights.v(&p)? * chow_max / fact(n - 2);
            let i = ctx.integrals(tc)?;
            let mag = i.phi_v.abs() + moments.s_hat().abs() * i.phi_w.abs() + abs_dot(&i.phi_x_w, &ctx.moments.first_w);
            (if quantity == Quantity::Df { df } else { dft }, r, mag)
        }
    };

    let evaluator = Evaluator { quantity, base: polytope, vertex, weights, quad: opts.eval.quad, beta, tc, basis };
    let baseline = evaluator.eval(None)?;
    let exact: Vec<Vec<f64>> = grid.par_iter().map(|e| evaluator.eval(Some(e))).collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = grid.iter().map(rational::to_f64).collect();

    let k = predicted.order as i32;
    let ladder: Vec<i32> = (k..k + FIT_TERMS).collect();
    let m = baseline.len();
    let mut fitted = vec![vec![0.0; m]; ladder.len()];
    let mut continuity_error: f64 = 0.0;
    let mut remainder = vec![0.0; eps.len()];
    let mut deficit = vec![0.0; eps.len()];
    let observed_scale = baseline.iter().chain(exact.iter().flatten()).fold(0.0f64, |a, b| a.max(b.abs()));
    let value_scale = observed_scale.max(magnitude);
    let floor = 256.0 * f64::EPSILON * value_scale;
    for c in 0..m {
        let y: Vec<f64> = exact.iter().map(|q| q[c] - baseline[c]).collect();
        // shortest ladder that reproduces the data to round-off, else all of it
        let mut coeffs = Vec::new();
        for len in 1..=ladder.len() {
            coeffs = fit(&eps, &y, &ladder[..len])?;
            let exact_fit = eps.iter().zip(&y).all(|(&e, &yi)| {
                let model: f64 = ladder[..len].iter().zip(&coeffs).map(|(&o, cf)| cf * e.powi(o)).sum();
                (yi - model).abs() <= 1e-10 * yi.abs() + 16.0 * f64::EPSILON * observed_scale
            });
            if exact_fit {
                break;
            }
        }
        for (j, v) in coeffs.into_iter().enumerate() {
            fitted[j][c] = v;
        }
        let free: Vec<i32> = std::iter::once(0).chain(ladder.iter().cloned()).collect();
        let raw: Vec<f64> = exact.iter().map(|q| q[c]).collect();
        let with_const = fit(&eps, &raw, &free)?;
        continuity_error =
            continuity_error.max((with_const[0] - baseline[c]).abs() / value_scale.max(f64::MIN_POSITIVE));
        for (i, &e) in eps.iter().enumerate() {
            let r = y[i] - predicted.coefficient[c] * e.powi(k);
            remainder[i] += r * r;
            deficit[i] += y[i] * y[i];
        }
    }
    let remainder: Vec<f64> = remainder.into_iter().map(f64::sqrt).collect();
    let deficit: Vec<f64> = deficit.into_iter().map(f64::sqrt).collect();

    let pred_scale = predicted.coefficient.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let denominator = if pred_scale > 1e-8 * reference {
        pred_scale
    } else if reference > 0.0 {
        reference
    } else {
        value_scale.max(f64::MIN_POSITIVE)
    };
    let coefficient_rel_error =
        predicted.coefficient.iter().zip(&fitted[0]).map(|(p, f)| (p - f).abs()).fold(0.0, f64::max) / denominator;
    let (remainder_exponent, required_exponent) = if quantity == Quantity::Gram {
        (loglog_slope(&eps, &deficit, floor), n as f64 - 0.5)
    } else {
        (loglog_slope(&eps, &remainder, floor), f64::from(predicted.order + 1) - 0.1)
    };
    let coefficient_ok = coefficient_rel_error <= opts.coefficient_tol;
    let exponent_ok = remainder_exponent.is_none_or(|e| e >= required_exponent);
    let pass = coefficient_ok && exponent_ok;

    Ok(ExpansionReport {
        quantity,
        polytope: polytope.name().unwrap_or("unnamed").to_string(),
        vertex,
        vertex_coords: p,
        predicted: vec![predicted],
        eps,
        baseline,
        exact,
        fitted: ladder.iter().zip(fitted).map(|(&o, c)| Term { order: o as u32, coefficient: c }).collect(),
        coefficient_rel_error,
        remainder_exponent,
        required_exponent,
        continuity_error,
        coefficient_tol: opts.coefficient_tol,
        pass,
    })
}

/// Gram deficit under the chop; passes when the fitted exponent is `≥ n − 1/2`.
pub fn gram_convergence(
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    vertex: usize,
    basis: Option<Vec<Vec<f64>>>,
    opts: &ExpansionOptions,
) -> Result<ExpansionReport> {
    let extras = Extras { basis, ..Extras::default() };
    verify_expansion(Quantity::Gram, polytope, weights, vertex, &extras, opts)
}

/// Exact volume deficit of a chop with constant weights, `εⁿ/n!`.
pub fn corner_volume(dim: usize, eps: &Rational) -> Rational {
    let mut fact = Rational::one();
    for k in 1..=dim {
        fact *= rational::int(k as i64);
    }
    num_traits::pow(eps.clone(), dim) / fact
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::catalog;
    use crate::rational::{int, ratio};
    use crate::testconfig::{AffinePiece, PLConvex};

    #[test]
    fn constant_volume_deficit_is_exact() {
        for name in ["cp2", "cp1xcp1", "cube"] {
            let p = catalog::load(name).unwrap();
            let v = p.vertex_index(&p.vertices()[0].coords).unwrap();
            let eps = ratio(1, 8);
            let chopped = p.corner_chop(v, &eps).unwrap();
            assert_eq!(p.volume() - chopped.volume(), corner_volume(p.dim(), &eps));
        }
    }

    #[test]
    fn volume_expansion_constant_weights() {
        let p = catalog::load("cp2").unwrap();
        let w = WeightPair::constant(2);
        let r =
            verify_expansion(Quantity::Volume, &p, &w, 0, &Extras::default(), &ExpansionOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.coefficient_rel_error < 1e-12);
        assert!(r.continuity_error < 1e-12);
    }

    #[test]
    fn futaki_on_cp2_at_1_0() {
        // F^ε(e₁) = 2ε/3 − 2ε² + …
        let p = catalog::load("cp2").unwrap();
        let w = WeightPair::constant(2);
        let v = p.vertex_index(&[int(1), int(0)]).unwrap();
        let extras = Extras { beta: Some(vec![1.0, 0.0]), ..Extras::default() };
        let r = verify_expansion(Quantity::Futaki, &p, &w, v, &extras, &ExpansionOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.predicted[0].coefficient[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((r.fitted[1].coefficient[0] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn futaki_on_square_at_origin() {
        // F^ε(e₁) = −ε/2 + ε² − 11ε³/12 + …
        let p = catalog::load("cp1xcp1").unwrap();
        let w = WeightPair::constant(2);
        let v = p.vertex_index(&[int(0), int(0)]).unwrap();
        let extras = Extras { beta: Some(vec![1.0, 0.0]), ..Extras::default() };
        let r = verify_expansion(Quantity::Futaki, &p, &w, v, &extras, &ExpansionOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.fitted[0].coefficient[0] + 0.5).abs() < 1e-9);
        assert!((r.fitted[1].coefficient[0] - 1.0).abs() < 1e-6);
        assert!((r.fitted[2].coefficient[0] + 11.0 / 12.0).abs() < 1e-3);
    }

    #[test]
    fn df_expansions_pin_the_sign() {
        let p = catalog::load("cp2").unwrap();
        let w = WeightPair::soliton(&[0.2, -0.3]);
        let phi = PLConvex::new(vec![
            AffinePiece::new(vec![int(1), int(0)], int(0)),
            AffinePiece::new(vec![int(0), int(2)], ratio(-1, 4)),
        ])
        .unwrap();
        let extras = Extras { tc: Some(ToricTC::new(phi)), ..Extras::default() };
        for v in 0..3 {
            for q in [Quantity::Df, Quantity::Dft] {
                let r = verify_expansion(q, &p, &w, v, &extras, &ExpansionOptions::default()).unwrap();
                assert!(r.pass, "{q} at {v}: {r:?}");
            }
        }
    }

    #[test]
    fn gram_exponents() {
        for (name, w) in [
            ("cp1xcp1", WeightPair::constant(2)),
            ("cp2", WeightPair::soliton(&[0.4, 0.1])),
            ("cube", WeightPair::constant(3)),
        ] {
            let p = catalog::load(name).unwrap();
            let r = gram_convergence(&p, &w, 0, None, &ExpansionOptions::default()).unwrap();
            assert!(r.pass, "{name}: {r:?}");
            assert!(r.remainder_exponent.unwrap() > p.dim() as f64 - 0.1);
        }
    }

    #[test]
    fn rejects_bad_grids_and_dimension() {
        let p = catalog::load("cp2").unwrap();
        let w = WeightPair::constant(2);
        let too_deep = ExpansionOptions { grid: Some(default_grid(&int(8), 6)), ..ExpansionOptions::default() };
        assert!(matches!(
            verify_expansion(Quantity::Volume, &p, &w, 0, &Extras::default(), &too_deep),
            Err(Error::ChopTooDeep { .. })
        ));
        let short = ExpansionOptions { points: 3, ..ExpansionOptions::default() };
        assert!(matches!(
            verify_expansion(Quantity::Volume, &p, &w, 0, &Extras::default(), &short),
            Err(Error::IllConditionedFit(_))
        ));
        let cp1 = catalog::load("cp1").unwrap();
        assert!(matches!(
            predict_volume_expansion(&cp1, &WeightPair::constant(1), 0),
            Err(Error::UnsupportedDimension { .. })
        ));
        assert!(matches!(
            verify_expansion(Quantity::Df, &p, &w, 0, &Extras::default(), &ExpansionOptions::default()),
            Err(Error::TestConfig(_))
        ));
    }

    #[test]
    fn futaki_coefficient_is_linear_in_beta() {
        let p = catalog::load("bl1cp2").unwrap();
        let w = WeightPair::soliton(&[0.1, 0.2]);
        let (m, _) = invariants::moments(&p, &w, &EvalOptions::default()).unwrap();
        let c = |b: &[f64]| predict_futaki_expansion(&p, &w, &m, 1, b).unwrap().coefficient[0];
        let lhs = c(&[2.0, -1.0]);
        let rhs = 2.0 * c(&[1.0, 0.0]) - c(&[0.0, 1.0]);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
