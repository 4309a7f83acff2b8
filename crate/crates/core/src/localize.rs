//! Vertex localisation: equivariant integrals as sums over the vertices of a
//! Delzant polytope.
//!
//! For generic `ξ`,
//!
//! ```text
//! ∫_P  h⁽ⁿ⁾(⟨x,ξ⟩) dx   = Σ_v h(⟨v,ξ⟩) / e_v(ξ)
//! ∫_∂P h⁽ⁿ⁻¹⁾(⟨x,ξ⟩) dσ = Σ_v c1_v(ξ) h(⟨v,ξ⟩) / e_v(ξ)
//! ```
//!
//! with `e_v(ξ) = ∏ᵢ(−⟨uᵢ,ξ⟩)` and `c1_v(ξ) = Σᵢ(−⟨uᵢ,ξ⟩)` over the inward
//! primitive edges `uᵢ` at `v`. Derivatives in `ξ` are carried exactly by
//! hyper-dual arithmetic. When `ξ` is orthogonal, or nearly so, to an edge
//! the terms blow up and cancel but the sum is analytic in `ξ`; it is then
//! recovered by the mean value over a complex circle `ξ + r·e^{iθ}·η`, on
//! which every term stays bounded.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::DelzantPolytope;

/// `v + a·ε₁ + b·ε₂ + ab·ε₁ε₂` with `ε₁² = ε₂² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HyperDual<T = f64> {
    pub v: T,
    pub a: T,
    pub b: T,
    pub ab: T,
}

/// Field operations needed by [`HyperDual`].
pub trait Scalar:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Copy + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T> + Neg<Output = T>
{
}

impl<T: Scalar> HyperDual<T> {
    pub fn constant(v: T) -> Self {
        Self { v, a: T::zero(), b: T::zero(), ab: T::zero() }
    }

    pub fn new(v: T, a: T, b: T, ab: T) -> Self {
        Self { v, a, b, ab }
    }

    /// `h(self)` given `h, h′, h″` at the real part.
    pub fn chain(&self, h0: T, h1: T, h2: T) -> Self {
        Self { v: h0, a: h1 * self.a, b: h1 * self.b, ab: h1 * self.ab + h2 * self.a * self.b }
    }

    pub fn recip(&self) -> Self {
        let r = T::one() / self.v;
        self.chain(r, -(r * r), (r + r) * r * r)
    }
}

impl<T: Scalar> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.a + o.a, self.b + o.b, self.ab + o.ab)
    }
}

impl<T: Scalar> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, self.a - o.a, self.b - o.b, self.ab - o.ab)
    }
}

impl<T: Scalar> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.a, -self.b, -self.ab)
    }
}

impl<T: Scalar> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.v * o.v,
            self.v * o.a + self.a * o.v,
            self.v * o.b + self.b * o.v,
            self.v * o.ab + self.a * o.b + self.b * o.a + self.ab * o.v,
        )
    }
}

impl<T: Scalar> Div for HyperDual<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct ComplexKahan {
    re: Kahan,
    im: Kahan,
}

impl ComplexKahan {
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    /// `(h(α_T))(ξ) = ∫_P h⁽ⁿ⁾(⟨x,ξ⟩) dx`
    Plain,
    /// `(c1(X)_T h(α_T))(ξ) = ∫_∂P h⁽ⁿ⁻¹⁾(⟨x,ξ⟩) dσ`
    C1,
}

/// Tangent data at one vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexWeights {
    pub vertex: Vec<f64>,
    /// Inward primitive edge vectors.
    pub edges: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_c(a: &[f64], z: &[Complex64]) -> Complex64 {
    a.iter().zip(z).map(|(x, y)| y * x).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn radius(polytope: &DelzantPolytope) -> f64 {
    polytope.vertices().iter().map(|v| norm(&v.coords_f64())).fold(1.0, f64::max)
}

impl VertexWeights {
    pub fn euler(&self, xi: &[f64]) -> f64 {
        self.edges.iter().map(|u| -dot(u, xi)).product()
    }

    pub fn c1(&self, xi: &[f64]) -> f64 {
        self.edges.iter().map(|u| -dot(u, xi)).sum()
    }
}

pub fn vertex_weights(polytope: &DelzantPolytope) -> Vec<VertexWeights> {
    polytope.vertices().iter().map(|v| VertexWeights { vertex: v.coords_f64(), edges: v.edges_f64() }).collect()
}

/// Smallest `|⟨u,ξ⟩| / (‖u‖‖ξ‖)` over all edges; 0 for `ξ = 0`.
pub fn genericity(polytope: &DelzantPolytope, xi: &[f64]) -> f64 {
    let nx = norm(xi);
    if nx == 0.0 {
        return 0.0;
    }
    polytope
        .vertices()
        .iter()
        .flat_map(|v| v.edges_f64())
        .map(|u| dot(&u, xi).abs() / (norm(&u) * nx))
        .fold(f64::INFINITY, f64::min)
}

/// `R · min |⟨u,ξ⟩| / ‖u‖` over all edges, `R` the largest vertex norm (at
/// least 1). Small values mean heavy cancellation in the vertex sums.
pub fn separation(polytope: &DelzantPolytope, xi: &[f64]) -> f64 {
    separation_c(polytope, &xi.iter().map(|&x| Complex64::from(x)).collect::<Vec<_>>())
}

fn separation_c(polytope: &DelzantPolytope, xi: &[Complex64]) -> f64 {
    separation_on(&unit_edges(polytope), radius(polytope), xi)
}

fn unit_edges(polytope: &DelzantPolytope) -> Vec<Vec<f64>> {
    let mut edges: Vec<Vec<f64>> = polytope
        .vertices()
        .iter()
        .flat_map(|v| v.edges_f64())
        .map(|u| {
            let l = norm(&u);
            u.iter().map(|x| x / l).collect()
        })
        .collect();
    edges.dedup();
    edges
}

fn separation_on(edges: &[Vec<f64>], radius: f64, xi: &[Complex64]) -> f64 {
    radius * edges.iter().map(|u| dot_c(u, xi).norm()).fold(f64::INFINITY, f64::min)
}

/// `k`-th derivative (`k ≤ 2`) of the one-variable function being localised,
/// at a possibly complex argument.
pub type Jet<'a> = dyn Fn(u32, Complex64) -> Result<Complex64> + 'a;

/// The vertex sum at `ξ + s·β + r·γ` (`ξ` possibly complex), differentiated
/// once in `s`, once in `r`, and mixed. Missing directions contribute zero.
pub fn class_jet(
    polytope: &DelzantPolytope,
    kind: ClassKind,
    h: &Jet,
    xi: &[Complex64],
    beta: Option<&[f64]>,
    gamma: Option<&[f64]>,
) -> Result<HyperDual<Complex64>> {
    class_jet_on(&vertex_weights(polytope), kind, h, xi, beta, gamma)
}

/// [`class_jet`] from precomputed vertex data.
pub fn class_jet_on(
    weights: &[VertexWeights],
    kind: ClassKind,
    h: &Jet,
    xi: &[Complex64],
    beta: Option<&[f64]>,
    gamma: Option<&[f64]>,
) -> Result<HyperDual<Complex64>> {
    let zero = Complex64::zero();
    let mut acc = [ComplexKahan::default(); 4];
    for vw in weights {
        let pair = |u: &[f64]| {
            HyperDual::new(
                dot_c(u, xi),
                beta.map_or(zero, |b| dot(u, b).into()),
                gamma.map_or(zero, |g| dot(u, g).into()),
                zero,
            )
        };
        let t = pair(&vw.vertex);
        let ht = t.chain(h(0, t.v)?, h(1, t.v)?, h(2, t.v)?);
        let mut euler = HyperDual::constant(Complex64::one());
        let mut c1 = HyperDual::constant(zero);
        for u in &vw.edges {
            let w = -pair(u);
            euler = euler * w;
            c1 = c1 + w;
        }
        if euler.v == zero {
            return Err(Error::DegenerateDirection(format!("ξ = {xi:?} is orthogonal to an edge")));
        }
        let mut term = ht / euler;
        if kind == ClassKind::C1 {
            term = term * c1;
        }
        acc[0].add(term.v);
        acc[1].add(term.a);
        acc[2].add(term.b);
        acc[3].add(term.ab);
    }
    Ok(HyperDual::new(acc[0].value(), acc[1].value(), acc[2].value(), acc[3].value()))
}

/// [`class_jet`] at a real point.
pub fn class_jet_real(
    polytope: &DelzantPolytope,
    kind: ClassKind,
    h: &Jet,
    xi: &[f64],
    beta: Option<&[f64]>,
    gamma: Option<&[f64]>,
) -> Result<HyperDual> {
    let z: Vec<Complex64> = xi.iter().map(|&x| x.into()).collect();
    let j = class_jet(polytope, kind, h, &z, beta, gamma)?;
    Ok(HyperDual::new(j.v.re, j.a.re, j.b.re, j.ab.re))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocOptions {
    /// Relative threshold below which `ξ` counts as orthogonal to an edge.
    pub genericity: f64,
    /// Below this value of [`separation`] the vertex sum cancels too badly
    /// to be evaluated directly and the circle mean is used instead.
    pub separation: f64,
    /// Nodes of the trapezoidal rule on the circle.
    pub nodes: usize,
    /// Auxiliary direction `η` for the circle; a fixed generic one if unset.
    pub aux: Option<Vec<f64>>,
    /// Take the circle mean automatically instead of reporting degenerate
    /// directions.
    pub perturb: bool,
}

impl Default for LocOptions {
    fn default() -> Self {
        Self { genericity: 1e-9, separation: 0.25, nodes: 64, aux: None, perturb: true }
    }
}

/// How a value was obtained.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitInfo {
    /// Whether the circle mean was used.
    pub extrapolated: bool,
    /// Difference between the full and the half rule (0 when direct).
    pub error: f64,
}

use std::f64::consts::{FRAC_1_PI, LN_2};

const AUX_DIRECTIONS: [[f64; 4]; 3] = [
    [1.0, 0.618_033_988_749_894_9, 0.414_213_562_373_095_1, FRAC_1_PI],
    [0.577_215_664_901_532_9, -1.0, LN_2, -0.267_949_192_431_122_7],
    [-0.302_775_637_731_994_6, 0.847_213_595_499_958, 1.0, 0.236_067_977_499_789_7],
];

/// Circle radii tried, as multiples of `1/(R‖η‖)`.
const RADII: [f64; 4] = [0.5, 0.4, 0.3, 0.6];

fn circle(xi: &[f64], eta: &[f64], r: f64, nodes: usize) -> Vec<Vec<Complex64>> {
    (0..nodes)
        .map(|k| {
            let z = Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / nodes as f64);
            xi.iter().zip(eta).map(|(&x, &e)| z * e + x).collect()
        })
        .collect()
}

/// Picks `η` and `r` maximising the smallest separation on the circle.
fn pick_circle(polytope: &DelzantPolytope, xi: &[f64], nodes: usize, opts: &LocOptions) -> Result<Vec<Vec<Complex64>>> {
    let n = polytope.dim();
    let candidates: Vec<Vec<f64>> = match &opts.aux {
        Some(a) => vec![a.clone()],
        None => AUX_DIRECTIONS.iter().map(|d| d[..n].to_vec()).collect(),
    };
    let r = radius(polytope);
    let edges = unit_edges(polytope);
    let mut best: Option<(f64, Vec<Vec<Complex64>>)> = None;
    for eta in &candidates {
        for scale in RADII {
            let points = circle(xi, eta, scale / (r * norm(eta)), nodes);
            let sep = points.iter().map(|p| separation_on(&edges, r, p)).fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|(s, _)| sep > *s) {
                best = Some((sep, points));
            }
        }
    }
    match best {
        Some((sep, points)) if sep > 1e-6 => Ok(points),
        _ => Err(Error::DegenerateDirection("no auxiliary circle avoids the edge hyperplanes".into())),
    }
}

/// Evaluates `f` (a vector of vertex sums) at `ξ`, or as the mean over a
/// complex circle around `ξ` when `ξ` is degenerate or nearly so.
pub fn with_limit(
    polytope: &DelzantPolytope,
    xi: &[f64],
    opts: &LocOptions,
    f: impl Fn(&[Complex64]) -> Result<Vec<Complex64>>,
) -> Result<(Vec<f64>, LimitInfo)> {
    if genericity(polytope, xi) > opts.genericity && separation(polytope, xi) > opts.separation {
        let z: Vec<Complex64> = xi.iter().map(|&x| x.into()).collect();
        return Ok((f(&z)?.iter().map(|v| v.re).collect(), LimitInfo::default()));
    }
    if !opts.perturb {
        return Err(Error::DegenerateDirection(format!("ξ = {xi:?} is orthogonal to an edge")));
    }
    // an even node count, so the even-indexed half is itself a rule
    let nodes = opts.nodes.max(8).next_multiple_of(2);
    let points = pick_circle(polytope, xi, nodes, opts)?;
    let mut full: Vec<ComplexKahan> = Vec::new();
    let mut half: Vec<ComplexKahan> = Vec::new();
    for (k, p) in points.iter().enumerate() {
        let vals = f(p)?;
        if full.is_empty() {
            full = vec![ComplexKahan::default(); vals.len()];
            half = vec![ComplexKahan::default(); vals.len()];
        }
        for (i, v) in vals.into_iter().enumerate() {
            full[i].add(v);
            if k % 2 == 0 {
                half[i].add(v);
            }
        }
    }
    let best: Vec<f64> = full.iter().map(|a| a.value().re / nodes as f64).collect();
    let coarse: Vec<f64> = half.iter().map(|a| a.value().re / (nodes / 2) as f64).collect();
    let error = best.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = best.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if !(error <= 1e-6 * scale) {
        return Err(Error::Extrapolation(error));
    }
    Ok((best, LimitInfo { extrapolated: true, error }))
}

/// `∫_P h⁽ⁿ⁾(⟨x,ξ⟩) dx` from vertex data.
pub fn eval_class(polytope: &DelzantPolytope, h: &Jet, xi: &[f64], opts: &LocOptions) -> Result<f64> {
    eval_kind(polytope, ClassKind::Plain, h, xi, opts)
}

/// `∫_∂P h⁽ⁿ⁻¹⁾(⟨x,ξ⟩) dσ` from vertex data.
pub fn eval_c1_class(polytope: &DelzantPolytope, h: &Jet, xi: &[f64], opts: &LocOptions) -> Result<f64> {
    eval_kind(polytope, ClassKind::C1, h, xi, opts)
}

pub fn eval_kind(polytope: &DelzantPolytope, kind: ClassKind, h: &Jet, xi: &[f64], opts: &LocOptions) -> Result<f64> {
    let (v, _) = with_limit(polytope, xi, opts, |p| Ok(vec![class_jet(polytope, kind, h, p, None, None)?.v]))?;
    Ok(v[0])
}

/// The circle mean around `ξ` along `η`, regardless of genericity.
pub fn eval_at_degenerate(
    polytope: &DelzantPolytope,
    kind: ClassKind,
    h: &Jet,
    xi: &[f64],
    eta: &[f64],
    opts: &LocOptions,
) -> Result<(f64, LimitInfo)> {
    let forced = LocOptions { genericity: f64::INFINITY, aux: Some(eta.to_vec()), perturb: true, ..opts.clone() };
    let (v, info) = with_limit(polytope, xi, &forced, |p| Ok(vec![class_jet(polytope, kind, h, p, None, None)?.v]))?;
    Ok((v[0], info))
}

/// `d/ds` at `s = 0` of the class evaluated at `ξ + sβ`.
pub fn directional_derivative(
    kind: ClassKind,
    polytope: &DelzantPolytope,
    h: &Jet,
    xi: &[f64],
    beta: &[f64],
    opts: &LocOptions,
) -> Result<f64> {
    let (v, _) = with_limit(polytope, xi, opts, |p| Ok(vec![class_jet(polytope, kind, h, p, Some(beta), None)?.a]))?;
    Ok(v[0])
}

/// `∂²/∂s∂r` at 0 of the class evaluated at `ξ + sβ + rγ`.
pub fn second_derivative(
    kind: ClassKind,
    polytope: &DelzantPolytope,
    h: &Jet,
    xi: &[f64],
    beta: &[f64],
    gamma: &[f64],
    opts: &LocOptions,
) -> Result<f64> {
    let (v, _) =
        with_limit(polytope, xi, opts, |p| Ok(vec![class_jet(polytope, kind, h, p, Some(beta), Some(gamma))?.ab]))?;
    Ok(v[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IntMatrix;
    use crate::polytope::catalog;
    use crate::profiles::Profile;
    use crate::quadrature::{self, QuadOptions};
    use crate::rational::{self, int};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn jet(p: &Profile, order: u32) -> impl Fn(u32, Complex64) -> Result<Complex64> + '_ {
        move |k, t| p.derivative_complex(order + k, t)
    }

    fn opts() -> LocOptions {
        LocOptions::default()
    }

    #[test]
    fn interval_examples() {
        let cp1 = catalog::load("cp1").unwrap();
        let lin = Profile::monomial(1);
        assert!((eval_class(&cp1, &jet(&lin, 0), &[0.37], &opts()).unwrap() - 1.0).abs() < 1e-14);
        // ∫ h′ of x²/2 over the symmetric interval
        let sq = Profile::monomial(2);
        assert!(eval_class(&cp1, &jet(&sq, 0), &[0.37], &opts()).unwrap().abs() < 1e-14);
        let unit = cp1.translate(&[rational::ratio(1, 2)]);
        let e = Profile::exponential();
        let t: f64 = 0.8;
        let got = eval_class(&unit, &jet(&e, 0), &[t], &opts()).unwrap();
        assert!((got - t.exp_m1() / t).abs() < 1e-14);
        let d = directional_derivative(ClassKind::Plain, &unit, &jet(&e, 0), &[t], &[1.0], &opts()).unwrap();
        let want = (t.exp() * t - t.exp_m1()) / (t * t);
        assert!((d - want).abs() < 1e-13);
        let f = Profile::monomial(1);
        assert!((eval_c1_class(&cp1, &jet(&f, 1), &[0.2], &opts()).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_examples() {
        let cp2 = catalog::load("cp2").unwrap();
        let (t1, t2) = (0.31, -0.77);
        let h = Profile::monomial(2);
        let got = eval_c1_class(&cp2, &jet(&h, 0), &[t1, t2], &opts()).unwrap();
        assert!((got - (t1 + t2)).abs() < 1e-13);
        let got = eval_c1_class(&cp2, &jet(&h, 1), &[t1, t2], &opts()).unwrap();
        assert!((got - 3.0).abs() < 1e-13);
    }

    #[test]
    fn characteristic_numbers() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cp2 = catalog::load("cp2").unwrap();
        for _ in 0..5 {
            let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let ws = vertex_weights(&cp2);
            let s: f64 = ws.iter().map(|w| w.c1(&xi).powi(2) / w.euler(&xi)).sum();
            assert!((s - 9.0).abs() < 1e-9);
            let zero: f64 = ws.iter().map(|w| 1.0 / w.euler(&xi)).sum();
            assert!(zero.abs() < 1e-9);
            let top: f64 = ws.iter().map(|w| dot(&w.vertex, &xi).powi(2) / w.euler(&xi)).sum();
            assert!((top - 1.0).abs() < 1e-9, "n!·Vol = 1");
        }
    }

    #[test]
    fn degenerate_directions() {
        for name in ["cp1", "cp2", "cp1xcp1", "bl1cp2", "cube"] {
            let p = catalog::load(name).unwrap();
            let n = p.dim() as u32;
            let zero = vec![0.0; p.dim()];
            let vol = rational::to_f64(&p.volume());
            let h = Profile::monomial(n);
            let got = eval_class(&p, &jet(&h, 0), &zero, &opts()).unwrap();
            assert!((got - vol).abs() < 1e-9 * vol.max(1.0), "{name}: {got} vs {vol}");
            let per = rational::to_f64(&p.lattice_perimeter());
            let got = eval_c1_class(&p, &jet(&h, 1), &zero, &opts()).unwrap();
            assert!((got - per).abs() < 1e-9 * per, "{name}: {got} vs {per}");
        }
        let square = catalog::load("cp1xcp1").unwrap();
        let e = Profile::exponential();
        let xi = [0.9, 0.0];
        let got = eval_class(&square, &jet(&e, 0), &xi, &opts()).unwrap();
        let want = 0.9f64.exp_m1() / 0.9;
        assert!((got - want).abs() < 1e-8);
        let strict = LocOptions { perturb: false, ..opts() };
        assert!(matches!(eval_class(&square, &jet(&e, 0), &xi, &strict), Err(Error::DegenerateDirection(_))));
    }

    #[test]
    fn agrees_with_quadrature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let e = Profile::exponential();
        for name in ["cp1", "cp2", "cp1xcp1", "bl1cp2", "hirzebruch-2", "cube"] {
            let p = catalog::load(name).unwrap();
            for _ in 0..3 {
                let xi: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let loc = eval_class(&p, &jet(&e, 0), &xi, &opts()).unwrap();
                let quad = quadrature::integrate(&p, 1, |x| Ok(vec![dot(x, &xi).exp()]), &QuadOptions::default())
                    .unwrap()
                    .value[0];
                assert!((loc - quad).abs() <= 1e-8 * (1.0 + quad.abs()), "{name}");
                let loc = eval_c1_class(&p, &jet(&e, 0), &xi, &opts()).unwrap();
                let quad =
                    quadrature::integrate_boundary(&p, 1, |x| Ok(vec![dot(x, &xi).exp()]), &QuadOptions::default())
                        .unwrap()
                        .value[0];
                assert!((loc - quad).abs() <= 1e-8 * (1.0 + quad.abs()), "{name} boundary");
            }
        }
    }

    #[test]
    fn unimodular_invariance() {
        let p = catalog::load("bl1cp2").unwrap();
        let a = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        let q = p.transform(&a).unwrap();
        // ⟨Ax, ξ'⟩ = ⟨x, ξ⟩ for ξ' = A⁻ᵀξ
        let xi = [0.3, -0.45];
        let xi_q = [xi[0] - xi[1], -xi[0] + 2.0 * xi[1]];
        let e = Profile::exponential();
        let a1 = eval_class(&p, &jet(&e, 0), &xi, &opts()).unwrap();
        let a2 = eval_class(&q, &jet(&e, 0), &xi_q, &opts()).unwrap();
        assert!((a1 - a2).abs() < 1e-13);
        assert_eq!(q.volume(), p.volume());
        assert_eq!(q.lattice_perimeter(), int(5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn derivatives_match_stencils(x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, b0 in -1.0f64..1.0, b1 in -1.0f64..1.0) {
            let p = catalog::load("bl2cp2").unwrap();
            let xi = [x0, x1];
            prop_assume!(genericity(&p, &xi) > 1e-2);
            let beta = [b0, b1];
            let e = Profile::exponential();
            let h = jet(&e, 0);
            let at = |s: f64| eval_class(&p, &h, &[x0 + s * b0, x1 + s * b1], &opts()).unwrap();
            let step = 1e-3;
            let fd = (-at(2.0 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2.0 * step)) / (12.0 * step);
            let d = directional_derivative(ClassKind::Plain, &p, &h, &xi, &beta, &opts()).unwrap();
            prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0), "{} vs {}", fd, d);
            let dd = second_derivative(ClassKind::Plain, &p, &h, &xi, &beta, &beta, &opts()).unwrap();
            let fd2 = (at(step) - 2.0 * at(0.0) + at(-step)) / (step * step);
            prop_assert!((fd2 - dd).abs() <= 1e-5 * dd.abs().max(1.0), "{} vs {}", fd2, dd);
        }
    }
}
