//! Weighted invariants of a polytope with a weight pair: volume, perimeter,
//! `Ŝ`, the Futaki character, the Gram form, the extremal affine function and
//! the soliton field.
//!
//! Everything is assembled from one bundle of moments,
//!
//! ```text
//! ∫_P w,  ∫_P xᵢ w,  ∫_P xᵢxⱼ w,  ∫_∂P v dσ,  ∫_∂P xᵢ v dσ,
//! ```
//!
//! which either backend can produce.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localize::{self, ClassKind, LocOptions};
use crate::polytope::DelzantPolytope;
use crate::profiles::{self, PositivityVerdict, WeightPair};
use crate::quadrature::{self, QuadOptions};
use crate::rational::{self, Rational};
use crate::region::HalfSpace;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Quadrature,
    Localization,
    Both,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(Self::Quadrature),
            "localization" | "localisation" => Ok(Self::Localization),
            "both" => Ok(Self::Both),
            _ => Err(Error::Parse(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub backend: Backend,
    pub quad: QuadOptions,
    pub loc: LocOptions,
    /// Relative tolerance for agreement of the two backends.
    pub agreement_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Quadrature,
            quad: QuadOptions::default(),
            loc: LocOptions::default(),
            agreement_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub vol_w: f64,
    /// `∫_P xᵢ w dx`
    pub first_w: Vec<f64>,
    /// `∫_P xᵢxⱼ w dx`
    pub second_w: Vec<Vec<f64>>,
    pub per_v: f64,
    /// `∫_∂P xᵢ v dσ`
    pub first_v: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Moments {
    pub fn dim(&self) -> usize {
        self.first_w.len()
    }

    pub fn s_hat(&self) -> f64 {
        self.per_v / self.vol_w
    }

    /// The w-barycenter `b̄`.
    pub fn barycenter(&self) -> Vec<f64> {
        self.first_w.iter().map(|m| m / self.vol_w).collect()
    }

    /// `F(β) = Ŝ ∫_P ⟨x,β⟩ w dx − ∫_∂P ⟨x,β⟩ v dσ`.
    pub fn futaki(&self, beta: &[f64]) -> f64 {
        self.s_hat() * dot(&self.first_w, beta) - dot(&self.first_v, beta)
    }

    pub fn futaki_vector(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.s_hat() * self.first_w[i] - self.first_v[i]).collect()
    }

    /// Centered second moments `∫(xᵢ − b̄ᵢ)(xⱼ − b̄ⱼ) w`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.second_w[i][j] - self.first_w[i] * self.first_w[j] / self.vol_w)
    }

    /// `Gᵢⱼ = ∫(⟨x,βᵢ⟩ − b̄ᵢ)(⟨x,βⱼ⟩ − b̄ⱼ) w`.
    pub fn gram(&self, basis: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let cov = self.covariance();
        let b = DMatrix::from_fn(n, basis.len(), |r, c| basis[c][r]);
        let g = b.transpose() * cov * b;
        let min = g.clone().symmetric_eigen().eigenvalues.min();
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(min > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::SingularGram(min));
        }
        Ok(g)
    }

    /// Solves `Gχ = −F` in the standard basis and fixes `a` so that the
    /// w-average of `w_ext = ⟨x,χ⟩ + a` is `Ŝ`.
    pub fn extremal(&self) -> Result<ExtremalData> {
        let n = self.dim();
        let basis: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        let g = self.gram(&basis)?;
        let f = DVector::from_vec(self.futaki_vector());
        let chol =
            g.clone().cholesky().ok_or_else(|| Error::LinearSolve("Gram matrix is not positive definite".into()))?;
        let chi = chol.solve(&(-&f));
        let chi: Vec<f64> = chi.iter().copied().collect();
        let a = self.s_hat() - dot(&self.barycenter(), &chi);
        let residual = (&g * DVector::from_vec(chi.clone()) + &f).amax();
        Ok(ExtremalData { chi, a, residual })
    }

    /// Futaki character for the second weight `w′ = w·(⟨x,χ⟩ + a)`. When
    /// `∫ w′` vanishes the normalising constant is replaced by 1.
    pub fn futaki_signed(&self, chi: &[f64], a: f64, beta: &[f64]) -> f64 {
        let n = self.dim();
        let mass = dot(chi, &self.first_w) + a * self.vol_w;
        let scale = dot(chi, chi).sqrt() * self.first_w.iter().map(|x| x.abs()).sum::<f64>() + a.abs() * self.vol_w;
        let s_prime = if mass.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) { 1.0 } else { self.per_v / mass };
        let moment: f64 = (0..n)
            .map(|i| beta[i] * ((0..n).map(|j| self.second_w[i][j] * chi[j]).sum::<f64>() + a * self.first_w[i]))
            .sum();
        s_prime * moment - dot(&self.first_v, beta)
    }

    /// Moments of the same weights on `P + η`.
    pub fn translated(&self, eta: &[f64]) -> Self {
        let n = self.dim();
        let first_w: Vec<f64> = (0..n).map(|i| self.first_w[i] + eta[i] * self.vol_w).collect();
        let second_w = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.second_w[i][j]
                            + eta[i] * self.first_w[j]
                            + eta[j] * self.first_w[i]
                            + eta[i] * eta[j] * self.vol_w
                    })
                    .collect()
            })
            .collect();
        let first_v = (0..n).map(|i| self.first_v[i] + eta[i] * self.per_v).collect();
        Self { vol_w: self.vol_w, first_w, second_w, per_v: self.per_v, first_v }
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = vec![self.vol_w, self.per_v];
        out.extend(&self.first_w);
        out.extend(&self.first_v);
        for row in &self.second_w {
            out.extend(row);
        }
        out
    }

    /// Largest componentwise `|a − b| / (1 + |b|)`.
    /// `self + sign·other`, entrywise.
    pub fn combine(&self, other: &Self, sign: f64) -> Self {
        let add = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + sign * y).collect() };
        Self {
            vol_w: self.vol_w + sign * other.vol_w,
            first_w: add(&self.first_w, &other.first_w),
            second_w: self.second_w.iter().zip(&other.second_w).map(|(a, b)| add(a, b)).collect(),
            per_v: self.per_v + sign * other.per_v,
            first_v: add(&self.first_v, &other.first_v),
        }
    }

    pub fn discrepancy(&self, other: &Self) -> f64 {
        self.flatten().iter().zip(other.flatten()).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalData {
    pub chi: Vec<f64>,
    pub a: f64,
    /// `max |Gχ + F|` in the standard basis.
    pub residual: f64,
}

impl ExtremalData {
    pub fn w_ext(&self, x: &[f64]) -> f64 {
        dot(&self.chi, x) + self.a
    }
}

fn jet(p: &profiles::Profile, order: u32) -> impl Fn(u32, Complex64) -> Result<Complex64> + '_ {
    move |k, t| p.derivative_complex(order + k, t)
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

fn assemble(n: usize, vol_w: f64, per_v: f64, first_w: &[f64], first_v: &[f64], upper: &[f64]) -> Moments {
    let mut second_w = vec![vec![0.0; n]; n];
    for (k, &(i, j)) in upper_pairs(n).iter().enumerate() {
        second_w[i][j] = upper[k];
        second_w[j][i] = upper[k];
    }
    Moments { vol_w, first_w: first_w.to_vec(), second_w, per_v, first_v: first_v.to_vec() }
}

pub fn moments_quadrature(polytope: &DelzantPolytope, weights: &WeightPair, opts: &QuadOptions) -> Result<Moments> {
    moments_clipped(polytope, weights, &[], opts)
}

/// Moments over `P ∩ clip`, with boundary terms from `∂P ∩ clip` only.
pub fn moments_clipped(
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    clip: &[HalfSpace],
    opts: &QuadOptions,
) -> Result<Moments> {
    let n = polytope.dim();
    check_dim(polytope, weights)?;
    let pairs = upper_pairs(n);
    let region = if clip.is_empty() { polytope.region().clone() } else { polytope.region().intersect(clip) };
    let interior = quadrature::integrate_simplices(
        quadrature::region_simplices(&region),
        1 + n + pairs.len(),
        |x| {
            let w = weights.w(x)?;
            let mut out = Vec::with_capacity(1 + n + pairs.len());
            out.push(w);
            out.extend(x.iter().map(|xi| xi * w));
            out.extend(pairs.iter().map(|&(i, j)| x[i] * x[j] * w));
            Ok(out)
        },
        opts,
    )?;
    let boundary = quadrature::integrate_simplices(
        quadrature::restricted_boundary_simplices(polytope, clip),
        1 + n,
        |x| {
            let v = weights.v(x)?;
            let mut out = Vec::with_capacity(1 + n);
            out.push(v);
            out.extend(x.iter().map(|xi| xi * v));
            Ok(out)
        },
        opts,
    )?;
    let iv = &interior.value;
    let bv = &boundary.value;
    Ok(assemble(n, iv[0], bv[0], &iv[1..1 + n], &bv[1..], &iv[1 + n..]))
}

fn check_dim(polytope: &DelzantPolytope, weights: &WeightPair) -> Result<()> {
    if weights.dim != polytope.dim() || weights.xi.len() != polytope.dim() {
        return Err(Error::DimensionMismatch { expected: polytope.dim(), got: weights.xi.len() });
    }
    Ok(())
}

/// Moments by vertex localisation. The polytope is first translated so its
/// vertex centroid sits at the origin, which keeps the vertex sums well
/// conditioned; profiles are recentred to match.
pub fn moments_localization(polytope: &DelzantPolytope, weights: &WeightPair, opts: &EvalOptions) -> Result<Moments> {
    check_dim(polytope, weights)?;
    let n = polytope.dim();
    let count = rational::int(polytope.vertices().len() as i64);
    let centroid: Vec<Rational> =
        (0..n).map(|i| polytope.vertices().iter().map(|v| v.coords[i].clone()).sum::<Rational>() / &count).collect();
    let eta_q: Vec<Rational> = centroid.iter().map(|c| -c.clone()).collect();
    let eta = rational::vec_to_f64(&eta_q);
    let q = polytope.translate(&eta_q);
    let w = weights.translated(&eta);
    let g_anti = w.g.antiderivative();
    let pairs = upper_pairs(n);
    let basis: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();

    let g1 = jet(&w.g, 1);
    let g0 = jet(&w.g, 0);
    let f1 = jet(&w.f, 1);
    let f0 = jet(&w.f, 0);
    let vw = localize::vertex_weights(&q);
    let evaluate = |xi: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut out = vec![
            localize::class_jet_on(&vw, ClassKind::Plain, &g1, xi, None, None)?.v,
            localize::class_jet_on(&vw, ClassKind::C1, &f1, xi, None, None)?.v,
        ];
        for e in &basis {
            out.push(localize::class_jet_on(&vw, ClassKind::Plain, &g0, xi, Some(e), None)?.a);
        }
        for e in &basis {
            out.push(localize::class_jet_on(&vw, ClassKind::C1, &f0, xi, Some(e), None)?.a);
        }
        if let Some(big) = &g_anti {
            let gg = jet(big, 0);
            for &(i, j) in &pairs {
                out.push(localize::class_jet_on(&vw, ClassKind::Plain, &gg, xi, Some(&basis[i]), Some(&basis[j]))?.ab);
            }
        }
        Ok(out)
    };
    let (vals, _) = localize::with_limit(&q, &w.xi, &opts.loc, evaluate)?;
    let upper: Vec<f64> = if g_anti.is_some() {
        vals[2 + 2 * n..].to_vec()
    } else {
        // No closed-form antiderivative: second moments by quadrature.
        let m = moments_quadrature(&q, &w, &opts.quad)?;
        pairs.iter().map(|&(i, j)| m.second_w[i][j]).collect()
    };
    let local = assemble(n, vals[0], vals[1], &vals[2..2 + n], &vals[2 + n..2 + 2 * n], &upper);
    Ok(local.translated(&rational::vec_to_f64(&centroid)))
}

/// Moments with the configured backend. With `Both`, the quadrature values
/// are returned together with the measured discrepancy.
pub fn moments(polytope: &DelzantPolytope, weights: &WeightPair, opts: &EvalOptions) -> Result<(Moments, Option<f64>)> {
    match opts.backend {
        Backend::Quadrature => Ok((moments_quadrature(polytope, weights, &opts.quad)?, None)),
        Backend::Localization => Ok((moments_localization(polytope, weights, opts)?, None)),
        Backend::Both => {
            let q = moments_quadrature(polytope, weights, &opts.quad)?;
            let l = moments_localization(polytope, weights, opts)?;
            let d = l.discrepancy(&q);
            Ok((q, Some(d)))
        }
    }
}

pub fn s_hat(polytope: &DelzantPolytope, weights: &WeightPair, opts: &EvalOptions) -> Result<f64> {
    ensure_positive(polytope, weights)?;
    Ok(moments(polytope, weights, opts)?.0.s_hat())
}

pub fn futaki(polytope: &DelzantPolytope, weights: &WeightPair, beta: &[f64], opts: &EvalOptions) -> Result<f64> {
    Ok(moments(polytope, weights, opts)?.0.futaki(beta))
}

pub fn gram(
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    basis: &[Vec<f64>],
    opts: &EvalOptions,
) -> Result<DMatrix<f64>> {
    moments(polytope, weights, opts)?.0.gram(basis)
}

pub fn extremal_field(polytope: &DelzantPolytope, weights: &WeightPair, opts: &EvalOptions) -> Result<ExtremalData> {
    moments(polytope, weights, opts)?.0.extremal()
}

pub fn ensure_positive(polytope: &DelzantPolytope, weights: &WeightPair) -> Result<PositivityVerdict> {
    let verdict = profiles::positivity_check(weights, polytope);
    if !verdict.positive {
        let bad = if verdict.v.positive { &verdict.w } else { &verdict.v };
        return Err(Error::Positivity(format!(
            "{:?} fails on ⟨P,ξ⟩ = [{}, {}]: {}",
            bad.which,
            verdict.interval.0,
            verdict.interval.1,
            bad.reason.clone().unwrap_or_default()
        )));
    }
    Ok(verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub polytope: Option<String>,
    pub dim: usize,
    pub backend: Backend,
    pub vol_w: f64,
    pub per_v: f64,
    pub s_hat: f64,
    pub barycenter: Vec<f64>,
    pub futaki: Vec<f64>,
    pub gram: Vec<Vec<f64>>,
    pub chi: Vec<f64>,
    pub a: f64,
    pub extremal_residual: f64,
    pub backend_discrepancy: Option<f64>,
}

pub fn invariant_report(
    polytope: &DelzantPolytope,
    weights: &WeightPair,
    opts: &EvalOptions,
) -> Result<InvariantReport> {
    ensure_positive(polytope, weights)?;
    let (m, discrepancy) = moments(polytope, weights, opts)?;
    let n = m.dim();
    let basis: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let g = m.gram(&basis)?;
    let ext = m.extremal()?;
    Ok(InvariantReport {
        polytope: polytope.name().map(str::to_string),
        dim: n,
        backend: opts.backend,
        vol_w: m.vol_w,
        per_v: m.per_v,
        s_hat: m.s_hat(),
        barycenter: m.barycenter(),
        futaki: m.futaki_vector(),
        gram: (0..n).map(|i| (0..n).map(|j| g[(i, j)]).collect()).collect(),
        chi: ext.chi,
        a: ext.a,
        extremal_residual: ext.residual,
        backend_discrepancy: discrepancy,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonReport {
    pub xi: Vec<f64>,
    pub iterations: usize,
    /// `max_β |F_ξ(β) + ⟨ξ, β⟩_G|` over the standard basis.
    pub residual: f64,
    /// `‖∫_P x e^{⟨ξ,x⟩} dx‖ / ∫_P e^{⟨ξ,x⟩} dx` at the solution.
    pub barycenter_residual: f64,
    pub reflexive: bool,
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 50, tolerance: 1e-10 }
    }
}

/// `R(ξ) = F_ξ + G_ξ ξ`: the soliton weights `e^{⟨ξ,x⟩}` have extremal
/// field `ξ` exactly when this vanishes.
fn soliton_residual(polytope: &DelzantPolytope, xi: &[f64], opts: &EvalOptions) -> Result<(Vec<f64>, Moments)> {
    let w = WeightPair::soliton(xi);
    let (m, _) = moments(polytope, &w, opts)?;
    let cov = m.covariance();
    let f = m.futaki_vector();
    let r: Vec<f64> = (0..xi.len()).map(|i| f[i] + (0..xi.len()).map(|j| cov[(i, j)] * xi[j]).sum::<f64>()).collect();
    Ok((r, m))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration for the soliton field, starting from `ξ = 0` and
/// preconditioned by the Gram form.
pub fn soliton_field(polytope: &DelzantPolytope, opts: &EvalOptions, newton: &NewtonOptions) -> Result<SolitonReport> {
    let n = polytope.dim();
    let mut xi = vec![0.0; n];
    let (mut r, mut m) = soliton_residual(polytope, &xi, opts)?;
    let mut history = vec![max_abs(&r)];
    let mut iterations = 0;
    while max_abs(&r) >= newton.tolerance {
        if iterations == newton.max_iterations {
            return Err(Error::NewtonDivergence { iterations, residual: max_abs(&r) });
        }
        iterations += 1;
        let cov = m.covariance();
        let step = cov
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("Gram matrix is not positive definite".into()))?
            .solve(&DVector::from_vec(r.clone()));
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = xi.iter().zip(step.iter()).map(|(x, s)| x + lambda * s).collect();
            let (tr, tm) = soliton_residual(polytope, &trial, opts)?;
            if max_abs(&tr) < max_abs(&r) || lambda < 1e-6 {
                xi = trial;
                r = tr;
                m = tm;
                break;
            }
            lambda *= 0.5;
        }
        history.push(max_abs(&r));
    }
    let bary = max_abs(&m.first_w) / m.vol_w;
    Ok(SolitonReport {
        xi,
        iterations,
        residual: max_abs(&r),
        barycenter_residual: bary,
        reflexive: polytope.is_reflexive(),
        history,
    })
}
