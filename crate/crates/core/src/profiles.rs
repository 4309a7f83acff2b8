//! Weight profiles.
//!
//! Weights are induced by one-variable analytic profiles composed with a
//! linear functional: `v(x) = f⁽ⁿ⁾(⟨ξ,x⟩)` and `w(x) = g⁽ⁿ⁺¹⁾(⟨ξ,x⟩)`.
//! Every profile variant carries closed-form derivatives of all orders; the
//! generic power series is supported but needs its radius to cover the
//! interval `⟨P, ξ⟩`.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::DelzantPolytope;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `xᵏ / k!`
    Monomial { degree: u32 },
    /// `scale · eˣ`
    Exponential { scale: f64 },
    /// `coef · (shift + x)^exponent`
    PowerLaw { coef: f64, shift: f64, exponent: f64 },
    /// `coef · ln(shift + x)`
    Logarithm { coef: f64, shift: f64 },
    /// `Σ cₖ xᵏ`
    Polynomial {
        #[serde(with = "rational::serde_rational_vec")]
        coeffs: Vec<Rational>,
    },
    /// `Σ cₖ (x − center)ᵏ`, convergent for `|x − center| < radius`.
    PowerSeries {
        coeffs: Vec<f64>,
        radius: f64,
        #[serde(default)]
        center: f64,
    },
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `p (p−1) ⋯ (p−k+1)`
fn falling(p: f64, k: u32) -> f64 {
    (0..k).map(|i| p - f64::from(i)).product()
}

fn is_nonneg_integer(p: f64) -> bool {
    p >= 0.0 && p.fract() == 0.0
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * rational::int(i64::from(n - i)) / rational::int(i64::from(i + 1));
    }
    acc
}

fn factorial_q(k: u32) -> Rational {
    (1..=k).fold(Rational::one(), |acc, i| acc * rational::int(i64::from(i)))
}

/// Coefficients of `p(x − δ)` given those of `p(x)`.
fn taylor_shift(coeffs: &[Rational], delta: &Rational) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); coeffs.len()];
    let neg = -delta.clone();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        // c (x − δ)^k = c Σ_j C(k,j) x^j (−δ)^{k−j}
        let mut pow = Rational::one();
        for j in (0..=k).rev() {
            out[j] += c * binomial(k as u32, j as u32) * &pow;
            pow *= &neg;
        }
    }
    out
}

fn poly_derivative(coeffs: &[Rational]) -> Vec<Rational> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| c * rational::int(k as i64)).collect()
}

fn poly_eval_f64(coeffs: &[Rational], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + rational::to_f64(c))
}

impl Profile {
    pub fn monomial(degree: u32) -> Self {
        Self::Monomial { degree }
    }

    pub fn exponential() -> Self {
        Self::Exponential { scale: 1.0 }
    }

    /// Open interval on which the profile is analytic.
    pub fn domain(&self) -> (f64, f64) {
        match *self {
            Self::PowerLaw { shift, exponent, .. } if !is_nonneg_integer(exponent) => (-shift, f64::INFINITY),
            Self::Logarithm { shift, .. } => (-shift, f64::INFINITY),
            Self::PowerSeries { radius, center, .. } => (center - radius, center + radius),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `k`-th derivative at `t`, in closed form.
    pub fn derivative(&self, k: u32, t: f64) -> Result<f64> {
        let outside = |reason: &str| Error::OutsideDomain { t, reason: reason.to_string() };
        match self {
            Self::Monomial { degree } => {
                if k > *degree {
                    Ok(0.0)
                } else {
                    let m = degree - k;
                    Ok(t.powi(m as i32) / factorial(m))
                }
            }
            Self::Exponential { scale } => Ok(scale * t.exp()),
            Self::PowerLaw { coef, shift, exponent } => {
                let base = shift + t;
                let q = exponent - f64::from(k);
                let c = coef * falling(*exponent, k);
                if c == 0.0 {
                    return Ok(0.0);
                }
                if base > 0.0 {
                    Ok(c * base.powf(q))
                } else if is_nonneg_integer(*exponent) && q >= 0.0 {
                    Ok(c * base.powi(q as i32))
                } else {
                    Err(outside("power law evaluated at or beyond its pole"))
                }
            }
            Self::Logarithm { coef, shift } => {
                let base = shift + t;
                if base <= 0.0 {
                    return Err(outside("logarithm evaluated at non-positive argument"));
                }
                if k == 0 {
                    Ok(coef * base.ln())
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    Ok(coef * sign * factorial(k - 1) * base.powi(-(k as i32)))
                }
            }
            Self::Polynomial { coeffs } => {
                let mut d = coeffs.clone();
                for _ in 0..k {
                    d = poly_derivative(&d);
                }
                Ok(poly_eval_f64(&d, t))
            }
            Self::PowerSeries { coeffs, radius, center } => {
                let s = t - center;
                if s.abs() >= *radius {
                    return Err(outside("power series evaluated beyond its radius"));
                }
                let k = k as usize;
                let mut acc = 0.0;
                for j in (k..coeffs.len()).rev() {
                    acc = acc * s + coeffs[j] * falling(j as f64, k as u32);
                }
                Ok(acc)
            }
        }
    }

    /// `k`-th derivative at a complex point, on the principal branch.
    pub fn derivative_complex(&self, k: u32, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            return self.derivative(k, z.re).map(Complex64::from);
        }
        let outside = |reason: &str| Error::OutsideDomain { t: z.re, reason: reason.to_string() };
        match self {
            Self::Monomial { degree } => {
                if k > *degree {
                    Ok(Complex64::from(0.0))
                } else {
                    let m = degree - k;
                    Ok(z.powu(m) / factorial(m))
                }
            }
            Self::Exponential { scale } => Ok(z.exp() * *scale),
            Self::PowerLaw { coef, shift, exponent } => {
                let base = z + *shift;
                let q = exponent - f64::from(k);
                let c = coef * falling(*exponent, k);
                if c == 0.0 {
                    Ok(Complex64::from(0.0))
                } else if is_nonneg_integer(*exponent) && q >= 0.0 {
                    Ok(base.powu(q as u32) * c)
                } else if base.re > 0.0 {
                    Ok(base.powf(q) * c)
                } else {
                    Err(outside("power law continued beyond its half-plane"))
                }
            }
            Self::Logarithm { coef, shift } => {
                let base = z + *shift;
                if base.re <= 0.0 {
                    return Err(outside("logarithm continued beyond its half-plane"));
                }
                if k == 0 {
                    Ok(base.ln() * *coef)
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    Ok(base.powi(-(k as i32)) * (coef * sign * factorial(k - 1)))
                }
            }
            Self::Polynomial { coeffs } => {
                let mut d = coeffs.clone();
                for _ in 0..k {
                    d = poly_derivative(&d);
                }
                Ok(d.iter().rev().fold(Complex64::from(0.0), |acc, c| acc * z + rational::to_f64(c)))
            }
            Self::PowerSeries { coeffs, radius, center } => {
                let s = z - *center;
                if s.norm() >= *radius {
                    return Err(outside("power series continued beyond its radius"));
                }
                let mut acc = Complex64::from(0.0);
                for j in (k as usize..coeffs.len()).rev() {
                    acc = acc * s + coeffs[j] * falling(j as f64, k);
                }
                Ok(acc)
            }
        }
    }

    /// A closed-form antiderivative, when the variant family has one.
    pub fn antiderivative(&self) -> Option<Self> {
        match self {
            Self::Monomial { degree } => Some(Self::Monomial { degree: degree + 1 }),
            Self::Exponential { scale } => Some(Self::Exponential { scale: *scale }),
            Self::PowerLaw { coef, shift, exponent } => {
                if *exponent == -1.0 {
                    Some(Self::Logarithm { coef: *coef, shift: *shift })
                } else {
                    Some(Self::PowerLaw { coef: coef / (exponent + 1.0), shift: *shift, exponent: exponent + 1.0 })
                }
            }
            Self::Logarithm { .. } => None,
            Self::Polynomial { coeffs } => {
                let mut out = vec![Rational::zero()];
                out.extend(coeffs.iter().enumerate().map(|(k, c)| c / rational::int(k as i64 + 1)));
                Some(Self::Polynomial { coeffs: out })
            }
            Self::PowerSeries { coeffs, radius, center } => {
                let mut out = vec![0.0];
                out.extend(coeffs.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)));
                Some(Self::PowerSeries { coeffs: out, radius: *radius, center: *center })
            }
        }
    }

    /// `n`-fold antiderivative, constants of integration zero.
    pub fn antiderivative_n(&self, n: u32) -> Option<Self> {
        (0..n).try_fold(self.clone(), |p, _| p.antiderivative())
    }

    /// The profile `t ↦ self(t − delta)`.
    pub fn recentered(&self, delta: f64) -> Self {
        match self {
            Self::Monomial { degree } => {
                let mut coeffs = vec![Rational::zero(); *degree as usize + 1];
                coeffs[*degree as usize] = factorial_q(*degree).recip();
                Self::Polynomial { coeffs: taylor_shift(&coeffs, &rational::from_f64(delta)) }
            }
            Self::Exponential { scale } => Self::Exponential { scale: scale * (-delta).exp() },
            Self::PowerLaw { coef, shift, exponent } => {
                Self::PowerLaw { coef: *coef, shift: shift - delta, exponent: *exponent }
            }
            Self::Logarithm { coef, shift } => Self::Logarithm { coef: *coef, shift: shift - delta },
            Self::Polynomial { coeffs } => {
                Self::Polynomial { coeffs: taylor_shift(coeffs, &rational::from_f64(delta)) }
            }
            Self::PowerSeries { coeffs, radius, center } => {
                Self::PowerSeries { coeffs: coeffs.clone(), radius: *radius, center: center + delta }
            }
        }
    }

    /// Exact rational coefficients when the profile is a polynomial.
    fn polynomial_coeffs(&self) -> Option<Vec<Rational>> {
        match self {
            Self::Monomial { degree } => {
                let mut c = vec![Rational::zero(); *degree as usize + 1];
                c[*degree as usize] = factorial_q(*degree).recip();
                Some(c)
            }
            Self::Polynomial { coeffs } => Some(coeffs.clone()),
            _ => None,
        }
    }
}

/// A profile differentiated a fixed number of times. Localisation sums
/// consume `h = f′`, `h = g′` and friends through this view.
#[derive(Clone, Copy, Debug)]
pub struct Derived<'a> {
    pub base: &'a Profile,
    pub order: u32,
}

impl<'a> Derived<'a> {
    pub fn new(base: &'a Profile, order: u32) -> Self {
        Self { base, order }
    }

    pub fn eval(&self, k: u32, t: f64) -> Result<f64> {
        self.base.derivative(self.order + k, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    V,
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "cscK", alias = "csck")]
    Csck,
    #[serde(rename = "extremal")]
    Extremal,
    #[serde(rename = "soliton")]
    Soliton,
    #[serde(rename = "sasaki")]
    Sasaki,
    #[serde(rename = "ckem")]
    Ckem,
    #[serde(rename = "custom")]
    Custom,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csck" => Ok(Self::Csck),
            "extremal" => Ok(Self::Extremal),
            "soliton" => Ok(Self::Soliton),
            "sasaki" => Ok(Self::Sasaki),
            "ckem" => Ok(Self::Ckem),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::Parse(format!("unknown weight family `{s}`"))),
        }
    }
}

/// Direction `ξ` with profiles `f`, `g`; `n` is the polytope dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPair {
    pub xi: Vec<f64>,
    pub f: Profile,
    pub g: Profile,
    pub dim: usize,
    pub family: Family,
}

impl WeightPair {
    pub fn new(xi: Vec<f64>, f: Profile, g: Profile) -> Self {
        let dim = xi.len();
        Self { xi, f, g, dim, family: Family::Custom }
    }

    pub fn constant(dim: usize) -> Self {
        builtin(Family::Csck, &vec![0.0; dim], None, None).expect("constant weights")
    }

    pub fn soliton(xi: &[f64]) -> Self {
        builtin(Family::Soliton, xi, None, None).expect("soliton weights")
    }

    pub fn pairing(&self, x: &[f64]) -> f64 {
        self.xi.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn v(&self, x: &[f64]) -> Result<f64> {
        self.f.derivative(self.dim as u32, self.pairing(x))
    }

    pub fn w(&self, x: &[f64]) -> Result<f64> {
        self.g.derivative(self.dim as u32 + 1, self.pairing(x))
    }

    pub fn eval_weight(&self, which: Which, x: &[f64]) -> Result<f64> {
        match which {
            Which::V => self.v(x),
            Which::W => self.w(x),
        }
    }

    /// `v ≡ w ≡ 1` exactly, so polynomial quadrature is exact.
    pub fn is_constant(&self) -> bool {
        let n = self.dim as u32;
        let is_const = |p: &Profile, order: u32| match p.polynomial_coeffs() {
            Some(c) => c.len() as u32 == order + 1 && c[order as usize] == factorial_q(order).recip(),
            None => false,
        };
        is_const(&self.f, n) && is_const(&self.g, n + 1)
    }

    /// Weights for `P + η` that agree pointwise with these weights on `P`.
    pub fn translated(&self, eta: &[f64]) -> Self {
        let delta = self.pairing(eta);
        Self { f: self.f.recentered(delta), g: self.g.recentered(delta), ..self.clone() }
    }
}

fn power_antiderivative(target_exponent: f64, shift: f64, times: u32) -> Profile {
    Profile::PowerLaw { coef: 1.0, shift, exponent: target_exponent }
        .antiderivative_n(times)
        .expect("power-law antiderivatives stay closed form for these exponents")
}

/// The standard weight families. `a` is required for `sasaki` and `ckem`;
/// when a polytope is given, positivity of `a + ⟨ξ,x⟩` on it is enforced.
pub fn builtin(family: Family, xi: &[f64], a: Option<f64>, polytope: Option<&DelzantPolytope>) -> Result<WeightPair> {
    let n = xi.len() as u32;
    let need_a = || a.ok_or_else(|| Error::Parse(format!("family {family:?} needs parameter `a`")));
    let (f, g) = match family {
        Family::Csck | Family::Extremal => (Profile::monomial(n), Profile::monomial(n + 1)),
        Family::Soliton => (Profile::exponential(), Profile::exponential()),
        Family::Sasaki => {
            let a = need_a()?;
            let v_exp = -(f64::from(n)) - 1.0;
            let w_exp = -(f64::from(n)) - 3.0;
            (power_antiderivative(v_exp, a, n), power_antiderivative(w_exp, a, n + 1))
        }
        Family::Ckem => {
            let a = need_a()?;
            let v_exp = -2.0 * f64::from(n) + 1.0;
            let w_exp = -2.0 * f64::from(n) - 1.0;
            (power_antiderivative(v_exp, a, n), power_antiderivative(w_exp, a, n + 1))
        }
        Family::Custom => return Err(Error::Parse("custom weights need explicit profiles".into())),
    };
    if let (Some(a), Some(p)) = (a, polytope) {
        if matches!(family, Family::Sasaki | Family::Ckem) {
            let (lo, _) = p.interval_along(xi);
            if a + lo <= 0.0 {
                return Err(Error::Positivity(format!(
                    "a + ⟨ξ,x⟩ = {} ≤ 0 at the low end of ⟨P,ξ⟩; pole at t = {}",
                    a + lo,
                    -a
                )));
            }
        }
    }
    Ok(WeightPair { xi: xi.to_vec(), f, g, dim: n as usize, family })
}

/// Lower bound for one weight over `⟨P,ξ⟩`, or a witness where it fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightBound {
    pub which: Which,
    pub positive: bool,
    /// Verified lower bound of the weight on the interval (when positive).
    pub margin: f64,
    /// Parameter `t = ⟨ξ,x⟩` where positivity fails.
    pub witness: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityVerdict {
    pub positive: bool,
    pub interval: (f64, f64),
    pub v: WeightBound,
    pub w: WeightBound,
}

pub fn positivity_check(weights: &WeightPair, polytope: &DelzantPolytope) -> PositivityVerdict {
    let interval = polytope.interval_along(&weights.xi);
    let n = weights.dim as u32;
    let v = bound_derivative(&weights.f, n, interval, Which::V);
    let w = bound_derivative(&weights.g, n + 1, interval, Which::W);
    PositivityVerdict { positive: v.positive && w.positive, interval, v, w }
}

fn bound_derivative(p: &Profile, k: u32, (lo, hi): (f64, f64), which: Which) -> WeightBound {
    let ok = |margin: f64| WeightBound { which, positive: true, margin, witness: None, reason: None };
    let fail = |t: f64, reason: String| WeightBound {
        which,
        positive: false,
        margin: f64::NEG_INFINITY,
        witness: Some(t),
        reason: Some(reason),
    };
    let (dlo, dhi) = p.domain();
    if lo <= dlo || hi >= dhi {
        let t = if lo <= dlo { dlo } else { dhi };
        return fail(t, format!("singularity of the profile at t = {t} inside [{lo}, {hi}]"));
    }
    if let Some(coeffs) = p.polynomial_coeffs() {
        let mut d = coeffs;
        for _ in 0..k {
            d = poly_derivative(&d);
        }
        return match polynomial_min(&d, lo, hi) {
            Ok(m) => ok(m),
            Err(t) => fail(t, format!("derivative {k} is non-positive at t = {t}")),
        };
    }
    match p {
        Profile::PowerSeries { coeffs, center, .. } => {
            // Dense sampling with a Lipschitz pad.
            let samples = 2001;
            let h = (hi - lo) / (samples - 1) as f64;
            let rho = (lo - center).abs().max((hi - center).abs());
            let lip: f64 = coeffs
                .iter()
                .enumerate()
                .skip(k as usize + 1)
                .map(|(j, c)| c.abs() * falling(j as f64, k + 1) * rho.powi((j - k as usize - 1) as i32))
                .sum();
            let mut min = f64::INFINITY;
            let mut arg = lo;
            for i in 0..samples {
                let t = lo + h * i as f64;
                let val = p.derivative(k, t).unwrap_or(f64::NEG_INFINITY);
                if val < min {
                    min = val;
                    arg = t;
                }
            }
            let margin = min - lip * h / 2.0;
            if margin > 0.0 {
                ok(margin)
            } else {
                fail(arg, format!("sampled lower bound {margin:e} is not positive"))
            }
        }
        _ => {
            // Exponential, power law and logarithm derivatives are monotone
            // on the domain, so the endpoints bound them.
            let a = p.derivative(k, lo);
            let b = p.derivative(k, hi);
            match (a, b) {
                (Ok(a), Ok(b)) if a > 0.0 && b > 0.0 => ok(a.min(b)),
                (Ok(a), Ok(b)) => {
                    let t = if a <= b { lo } else { hi };
                    fail(t, format!("derivative {k} is non-positive ({}) at t = {t}", a.min(b)))
                }
                (Err(e), _) | (_, Err(e)) => fail(lo, e.to_string()),
            }
        }
    }
}

fn poly_eval(c: &[Rational], t: &Rational) -> Rational {
    c.iter().rev().fold(Rational::zero(), |acc, x| acc * t + x)
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db {
        let top = r.pop().unwrap();
        if top.is_zero() {
            continue;
        }
        let q = &top / &lead;
        let shift = r.len() - db;
        for (i, bi) in b[..db].iter().enumerate() {
            r[shift + i] -= &q * bi;
        }
    }
    trim(r)
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn sturm_chain(p: &[Rational]) -> Vec<Vec<Rational>> {
    let mut chain = vec![trim(p.to_vec())];
    let d = trim(poly_derivative(p));
    if d.iter().all(Zero::is_zero) {
        return chain;
    }
    chain.push(d);
    loop {
        let n = chain.len();
        let r = poly_rem(&chain[n - 2], &chain[n - 1]);
        if r.iter().all(Zero::is_zero) {
            break;
        }
        chain.push(r.into_iter().map(|x| -x).collect());
    }
    chain
}

fn sign_changes(chain: &[Vec<Rational>], t: &Rational) -> usize {
    let signs: Vec<bool> =
        chain.iter().map(|p| poly_eval(p, t)).filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Distinct real roots in `(a, b]`.
fn count_roots(chain: &[Vec<Rational>], a: &Rational, b: &Rational) -> usize {
    sign_changes(chain, a).saturating_sub(sign_changes(chain, b))
}

/// Approximate locations of all distinct roots of `p` in `(lo, hi)`.
fn isolate_roots(p: &[Rational], lo: &Rational, hi: &Rational, width: f64) -> Vec<f64> {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return Vec::new();
    }
    let chain = sturm_chain(&p);
    let mut out = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone())];
    while let Some((a, b)) = stack.pop() {
        let c = count_roots(&chain, &a, &b);
        if c == 0 {
            continue;
        }
        if rational::to_f64(&(&b - &a)) < width {
            out.push(rational::to_f64(&b));
            continue;
        }
        let mid = (&a + &b) / rational::int(2);
        stack.push((mid.clone(), b));
        stack.push((a, mid));
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Minimum of a rational polynomial on `[lo, hi]` when positive there,
/// otherwise a witness point where it is non-positive.
fn polynomial_min(p: &[Rational], lo: f64, hi: f64) -> std::result::Result<f64, f64> {
    let (qlo, qhi) = (rational::from_f64(lo), rational::from_f64(hi));
    let at_lo = poly_eval(p, &qlo);
    if !at_lo.is_positive() {
        return Err(lo);
    }
    let roots = isolate_roots(p, &qlo, &qhi, 1e-12);
    if let Some(&t) = roots.first() {
        return Err(t);
    }
    let crit = isolate_roots(&poly_derivative(p), &qlo, &qhi, 1e-12);
    let min = crit.iter().chain([lo, hi].iter()).map(|&t| poly_eval_f64(p, t)).fold(f64::INFINITY, f64::min);
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::catalog;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn constant_family_is_one() {
        for n in 1..4 {
            let w = builtin(Family::Csck, &vec![0.3; n], None, None).unwrap();
            let x = vec![0.7; n];
            assert_eq!(w.v(&x).unwrap(), 1.0);
            assert_eq!(w.w(&x).unwrap(), 1.0);
            assert!(w.is_constant());
        }
    }

    #[test]
    fn soliton_family_is_exponential() {
        let w = WeightPair::soliton(&[0.4, -1.1]);
        let x = [0.3, 0.8];
        let e = (0.4f64 * 0.3 - 1.1 * 0.8).exp();
        assert!((w.v(&x).unwrap() - e).abs() < 1e-15);
        assert!((w.w(&x).unwrap() - e).abs() < 1e-15);
        let zero = WeightPair::soliton(&[0.0, 0.0]);
        let c = WeightPair::constant(2);
        for x in [[0.1, 0.2], [0.9, 0.0], [0.5, 0.5]] {
            assert_eq!(zero.v(&x).unwrap(), c.v(&x).unwrap());
            assert_eq!(zero.w(&x).unwrap(), c.w(&x).unwrap());
        }
    }

    #[test]
    fn sasaki_and_ckem_powers() {
        for n in 1..4usize {
            let xi = vec![0.5; n];
            let x = vec![0.2; n];
            let t: f64 = 0.1 * n as f64;
            let a = 3.0;
            let s = builtin(Family::Sasaki, &xi, Some(a), None).unwrap();
            let rel = |got: f64, want: f64| ((got - want) / want).abs();
            assert!(rel(s.v(&x).unwrap(), (a + t).powf(-(n as f64) - 1.0)) < 1e-13);
            assert!(rel(s.w(&x).unwrap(), (a + t).powf(-(n as f64) - 3.0)) < 1e-13);
            let c = builtin(Family::Ckem, &xi, Some(a), None).unwrap();
            assert!(rel(c.v(&x).unwrap(), (a + t).powf(-2.0 * n as f64 + 1.0)) < 1e-13);
            assert!(rel(c.w(&x).unwrap(), (a + t).powf(-2.0 * n as f64 - 1.0)) < 1e-13);
        }
        // n = 1 ckem needs a logarithm for f
        let c = builtin(Family::Ckem, &[1.0], Some(2.0), None).unwrap();
        assert!(matches!(c.f, Profile::Logarithm { .. }));
    }

    #[test]
    fn sasaki_pole_is_rejected() {
        let p = catalog::load("cp2").unwrap();
        assert!(builtin(Family::Sasaki, &[1.0, 1.0], Some(3.0), Some(&p)).is_ok());
        let centred = p.translate(&[ratio(-1, 2), ratio(-1, 2)]);
        assert!(matches!(builtin(Family::Sasaki, &[1.0, 1.0], Some(0.0), Some(&centred)), Err(Error::Positivity(_))));
    }

    #[test]
    fn positivity_verdicts() {
        let p = catalog::load("cp2").unwrap();
        let sol = WeightPair::soliton(&[-0.5, 0.25]);
        let verdict = positivity_check(&sol, &p);
        assert!(verdict.positive);
        assert!((verdict.w.margin - (-0.5f64).exp()).abs() < 1e-15);

        let pole = WeightPair::new(
            vec![1.0, 0.0],
            Profile::PowerLaw { coef: 1.0, shift: -0.5, exponent: -1.0 },
            Profile::PowerLaw { coef: -1.0, shift: 2.0, exponent: -1.0 },
        );
        let v = positivity_check(&pole, &p);
        assert!(!v.positive && !v.v.positive && v.w.positive);
        assert_eq!(v.v.witness, Some(0.5));

        // g''' = 6t − 2 changes sign at t = 1/3 on [0, 1]
        let g = Profile::Polynomial { coeffs: vec![int(0), int(0), int(0), ratio(-1, 3), ratio(1, 4)] };
        let bad = WeightPair::new(vec![1.0, 0.0], Profile::monomial(2), g);
        let v = positivity_check(&bad, &p);
        assert!(!v.w.positive);
        assert_eq!(v.w.witness, Some(0.0));
        // on [1/2, 3/2] the same polynomial is positive with minimum 1 at t = 1/2
        let shifted = p.translate(&[ratio(1, 2), int(0)]);
        let v = positivity_check(&bad, &shifted);
        assert!(v.w.positive);
        assert!((v.w.margin - 1.0).abs() < 1e-12);
        // g''' = (3t − 1)² touches zero at t = 1/3
        let g = Profile::Polynomial { coeffs: vec![int(0), int(0), int(0), ratio(1, 6), ratio(-1, 4), ratio(3, 20)] };
        let v = positivity_check(&WeightPair::new(vec![1.0, 0.0], Profile::monomial(2), g), &p);
        let t = v.w.witness.unwrap();
        assert!(!v.w.positive && (t - 1.0 / 3.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn power_series_checks() {
        let p = catalog::load("cp1").unwrap();
        // e^x truncated: fine on [-1/2, 1/2]
        let coeffs: Vec<f64> = (0..25).map(|k| 1.0 / factorial(k)).collect();
        let series = Profile::PowerSeries { coeffs, radius: 10.0, center: 0.0 };
        let w = WeightPair::new(vec![1.0], series.clone(), series);
        let verdict = positivity_check(&w, &p);
        assert!(verdict.positive);
        assert!(verdict.w.margin < (-0.5f64).exp() && verdict.w.margin > 0.5);
        let short = Profile::PowerSeries { coeffs: vec![1.0, 1.0], radius: 0.2, center: 0.0 };
        assert!(short.derivative(0, 0.3).is_err());
    }

    #[test]
    fn recentering_preserves_weights() {
        let p = catalog::load("cp2").unwrap();
        let xi = [0.7, -0.2];
        let families = [
            builtin(Family::Csck, &xi, None, None).unwrap(),
            builtin(Family::Soliton, &xi, None, None).unwrap(),
            builtin(Family::Sasaki, &xi, Some(2.0), Some(&p)).unwrap(),
            builtin(Family::Ckem, &xi, Some(2.0), Some(&p)).unwrap(),
        ];
        let eta = [1.0 / 3.0, -0.25];
        for w in families {
            let moved = w.translated(&eta);
            for x in [[0.1, 0.1], [0.6, 0.3], [0.0, 1.0]] {
                let y = [x[0] + eta[0], x[1] + eta[1]];
                let (a, b) = (w.v(&x).unwrap(), moved.v(&y).unwrap());
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{:?}", w.family);
                let (a, b) = (w.w(&x).unwrap(), moved.w(&y).unwrap());
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{:?}", w.family);
            }
        }
    }

    #[test]
    fn profile_json() {
        let p = Profile::Polynomial { coeffs: vec![ratio(1, 2), int(0), int(3)] };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"kind":"polynomial","coeffs":["1/2","0","3"]}"#);
        assert_eq!(serde_json::from_str::<Profile>(&s).unwrap(), p);
        let e: Profile = serde_json::from_str(r#"{"kind":"exponential","scale":2.0}"#).unwrap();
        assert_eq!(e, Profile::Exponential { scale: 2.0 });
    }

    fn profiles() -> Vec<Profile> {
        vec![
            Profile::monomial(5),
            Profile::Exponential { scale: 1.5 },
            Profile::PowerLaw { coef: 0.7, shift: 3.0, exponent: -2.5 },
            Profile::PowerLaw { coef: -1.0, shift: 2.0, exponent: 1.5 },
            Profile::Logarithm { coef: 2.0, shift: 3.0 },
            Profile::Polynomial { coeffs: vec![int(1), ratio(-1, 3), int(2), ratio(5, 7)] },
        ]
    }

    proptest! {
        #[test]
        fn derivatives_match_central_differences(t in -1.0f64..1.0, k in 1u32..4) {
            for p in profiles() {
                let h = 1e-4;
                let fd = (p.derivative(k - 1, t + h).unwrap() - p.derivative(k - 1, t - h).unwrap()) / (2.0 * h);
                let exact = p.derivative(k, t).unwrap();
                // central differences carry O(h²) truncation
                let scale = exact.abs().max(p.derivative(k + 2, t).unwrap().abs()).max(1.0);
                prop_assert!((fd - exact).abs() <= 1e-6 * scale, "{:?} k={} t={}: {} vs {}", p, k, t, fd, exact);
            }
        }

        #[test]
        fn antiderivative_inverts_derivative(t in -1.0f64..1.0) {
            for p in profiles() {
                if let Some(a) = p.antiderivative() {
                    let (x, y) = (a.derivative(1, t).unwrap(), p.derivative(0, t).unwrap());
                    prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
                }
            }
        }
    }
}
