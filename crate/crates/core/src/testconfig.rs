//! Toric test configurations: convex piecewise-linear functions on `P`.
//!
//! Sign conventions, fixed once for the whole crate:
//!
//! * the product configuration of `β` is `φ = −⟨x,β⟩`, so `DF(φ) = F(β)`;
//! * twisting by `β` is `φ ↦ φ − ⟨x,β⟩`, which adds `F(β)` to `DF`;
//! * the λ-pairing uses `φ̃ = −φ`: `⟨λ,β⟩ = −∫_P φ (⟨x,β⟩ − b̄_β) w dx`;
//! * the Chow weight of a vertex is `Ch_p = φ(p) − avg_w(φ)`, so that
//!   `DF` of the chopped polytope is `DF − v(p)·Ch_p·εⁿ⁻¹/(n−2)! + O(εⁿ)`
//!   and twisting changes it by `−⟨p,β⟩ + b̄_β`.
//!
//! Integrals of `φ` are exact cell sums: `P` is split into the regions where
//! each affine piece is maximal and every cell carries a polynomial moment
//! integral.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{self, EvalOptions, Moments};
use crate::polytope::DelzantPolytope;
use crate::profiles::WeightPair;
use crate::quadrature::{self, QuadOptions};
use crate::rational::{self, Rational};
use crate::region::{ConvexRegion, HalfSpace};

/// One affine piece `⟨gradient, x⟩ + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinePiece {
    #[serde(with = "rational::serde_rational_vec")]
    pub gradient: Vec<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub constant: Rational,
}

impl AffinePiece {
    pub fn new(gradient: Vec<Rational>, constant: Rational) -> Self {
        Self { gradient, constant }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        rational::dot(&self.gradient, x) + &self.constant
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.gradient.iter().zip(x).map(|(a, b)| rational::to_f64(a) * b).sum::<f64>()
            + rational::to_f64(&self.constant)
    }

    /// `self − other ≥ 0` as a half-space.
    fn dominates(&self, other: &Self) -> HalfSpace {
        HalfSpace::new(
            self.gradient.iter().zip(&other.gradient).map(|(a, b)| a - b).collect(),
            &self.constant - &other.constant,
        )
    }
}

/// `φ(x) = max_k (⟨a_k,x⟩ + c_k)`, convex by construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLConvex {
    pub pieces: Vec<AffinePiece>,
}

impl PLConvex {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::TestConfig("a piecewise-linear function needs at least one piece".into()));
        }
        let n = pieces[0].gradient.len();
        if pieces.iter().any(|p| p.gradient.len() != n) {
            return Err(Error::TestConfig("pieces have gradients of different lengths".into()));
        }
        let mut unique: Vec<AffinePiece> = Vec::new();
        for p in pieces {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        Ok(Self { pieces: unique })
    }

    pub fn affine(gradient: Vec<Rational>, constant: Rational) -> Self {
        Self { pieces: vec![AffinePiece::new(gradient, constant)] }
    }

    pub fn zero(dim: usize) -> Self {
        Self::affine(vec![Rational::zero(); dim], Rational::zero())
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].gradient.len()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.pieces.iter().map(|p| p.eval(x)).max().expect("at least one piece")
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.pieces.iter().map(|p| p.eval_f64(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Adds the same affine function to every piece.
    pub fn add_affine(&self, gradient: &[Rational], constant: &Rational) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                AffinePiece::new(p.gradient.iter().zip(gradient).map(|(a, b)| a + b).collect(), &p.constant + constant)
            })
            .collect();
        Self { pieces }
    }

    /// Full-dimensional cells `P ∩ {piece k is maximal}`.
    pub fn cells(&self, polytope: &DelzantPolytope) -> Vec<(usize, ConvexRegion)> {
        (0..self.pieces.len())
            .filter_map(|k| {
                let extra = self.cell_constraints(k);
                let region = polytope.region().intersect(&extra);
                region.is_full_dimensional().then_some((k, region))
            })
            .collect()
    }

    fn cell_constraints(&self, k: usize) -> Vec<HalfSpace> {
        (0..self.pieces.len()).filter(|&j| j != k).map(|j| self.pieces[k].dominates(&self.pieces[j])).collect()
    }

    /// Pieces that are maximal on no open subset of `P`.
    pub fn redundant_pieces(&self, polytope: &DelzantPolytope) -> Vec<usize> {
        let live: Vec<usize> = self.cells(polytope).into_iter().map(|(k, _)| k).collect();
        (0..self.pieces.len()).filter(|k| !live.contains(k)).collect()
    }

    pub fn is_affine_on(&self, polytope: &DelzantPolytope) -> bool {
        self.cells(polytope).len() <= 1
    }
}

/// A toric test configuration: `φ + c₀`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricTC {
    pub phi: PLConvex,
    #[serde(with = "rational::serde_rational", default = "Rational::zero")]
    pub offset: Rational,
}

impl ToricTC {
    pub fn new(phi: PLConvex) -> Self {
        Self { phi, offset: Rational::zero() }
    }

    pub fn trivial(dim: usize) -> Self {
        Self::new(PLConvex::zero(dim))
    }

    /// The product configuration of `β`: `φ = −⟨x,β⟩`.
    pub fn associated_product(beta: &[f64]) -> Self {
        let gradient = beta.iter().map(|&b| -rational::from_f64(b)).collect();
        Self::new(PLConvex::affine(gradient, Rational::zero()))
    }

    /// `φ ↦ φ − ⟨x,β⟩`.
    pub fn twist(&self, beta: &[f64]) -> Self {
        let gradient: Vec<Rational> = beta.iter().map(|&b| -rational::from_f64(b)).collect();
        Self { phi: self.phi.add_affine(&gradient, &Rational::zero()), offset: self.offset.clone() }
    }

    pub fn shifted(&self, c: &Rational) -> Self {
        Self { phi: self.phi.clone(), offset: &self.offset + c }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.phi.eval(x) + &self.offset
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.phi.eval_f64(x) + rational::to_f64(&self.offset)
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }
}

/// `∫_P φ w`, `∫_P φ xᵢ w`, `∫_∂P φ v dσ` (offset included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiIntegrals {
    pub phi_w: f64,
    pub phi_x_w: Vec<f64>,
    pub phi_v: f64,
}

/// `sign · ∫` over `polytope ∩ clip`, boundary terms from `∂polytope ∩ clip`.
#[derive(Clone, Debug)]
struct DomainPart<'a> {
    sign: f64,
    polytope: &'a DelzantPolytope,
    clip: Vec<HalfSpace>,
}

/// A polytope with weights and everything that does not depend on the test
/// configuration: moments and a Gram-orthonormal basis of `𝔱`.
#[derive(Clone, Debug)]
pub struct ToricContext<'a> {
    pub polytope: &'a DelzantPolytope,
    pub weights: &'a WeightPair,
    pub moments: Moments,
    /// Orthonormal for the Gram form (Gram–Schmidt on the standard basis).
    pub basis: Vec<Vec<f64>>,
    pub quad: QuadOptions,
    /// Integration domain as a signed sum; a single part unless chopped.
    domain: Vec<DomainPart<'a>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sorted_by_coords(polytope: &DelzantPolytope, indices: &mut [usize]) {
    indices.sort_by(|&a, &b| polytope.vertices()[a].coords.cmp(&polytope.vertices()[b].coords));
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChowEntry {
    pub vertex: usize,
    pub coords: Vec<f64>,
    pub chow: f64,
    pub chow_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Destabilizing {
    /// `None` when the configuration is a product (`‖TC⊥‖ = 0`).
    pub vertex: Option<usize>,
    pub coords: Option<Vec<f64>>,
    pub chow_t: f64,
    pub orthogonal_norm: f64,
    /// `Ch^T · V_w / ‖TC⊥‖₁`.
    pub ratio: Option<f64>,
    /// All vertices attaining the maximum.
    pub ties: Vec<usize>,
    pub product: bool,
}

impl<'a> ToricContext<'a> {
    pub fn new(polytope: &'a DelzantPolytope, weights: &'a WeightPair, opts: &EvalOptions) -> Result<Self> {
        let (moments, _) = invariants::moments(polytope, weights, opts)?;
        let domain = vec![DomainPart { sign: 1.0, polytope, clip: Vec::new() }];
        Self::assemble(polytope, weights, moments, opts.quad, domain)
    }

    /// Context on `P_ε = base ∖ corner`, with every integral written as
    /// `∫_base − ∫_{base ∩ corner} + ∫_{∂P_ε ∩ corner}`. The large baseline
    /// term is then shared exactly between `P` and all its chops.
    pub fn corner_chopped(
        base: &'a DelzantPolytope,
        chopped: &'a DelzantPolytope,
        corner: HalfSpace,
        weights: &'a WeightPair,
        quad: &QuadOptions,
    ) -> Result<Self> {
        let domain = vec![
            DomainPart { sign: 1.0, polytope: base, clip: Vec::new() },
            DomainPart { sign: -1.0, polytope: base, clip: vec![corner.clone()] },
            DomainPart { sign: 1.0, polytope: chopped, clip: vec![corner] },
        ];
        let moments = chopped_moments(&domain, weights, quad)?;
        Self::assemble(chopped, weights, moments, *quad, domain)
    }

    fn assemble(
        polytope: &'a DelzantPolytope,
        weights: &'a WeightPair,
        moments: Moments,
        quad: QuadOptions,
        domain: Vec<DomainPart<'a>>,
    ) -> Result<Self> {
        let cov = moments.covariance();
        let n = polytope.dim();
        let inner = |u: &[f64], v: &[f64]| -> f64 {
            (0..n).map(|i| (0..n).map(|j| u[i] * cov[(i, j)] * v[j]).sum::<f64>()).sum()
        };
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut u: Vec<f64> = (0..n).map(|j| f64::from(u8::from(i == j))).collect();
            for b in &basis {
                let c = inner(&u, b);
                for k in 0..n {
                    u[k] -= c * b[k];
                }
            }
            let norm2 = inner(&u, &u);
            if !(norm2 > 0.0) {
                return Err(Error::SingularGram(norm2));
            }
            let norm = norm2.sqrt();
            basis.push(u.iter().map(|x| x / norm).collect());
        }
        Ok(Self { polytope, weights, moments, basis, quad, domain })
    }

    fn cell_integrals(
        &self,
        polytope: &DelzantPolytope,
        region: &ConvexRegion,
        extra: &[HalfSpace],
        piece: &AffinePiece,
    ) -> Result<PhiIntegrals> {
        let n = polytope.dim();
        let a = rational::vec_to_f64(&piece.gradient);
        let c = rational::to_f64(&piece.constant);
        let w = self.weights;
        let interior = quadrature::integrate_simplices(
            quadrature::region_simplices(region),
            1 + n,
            |x| {
                let val = (dot(&a, x) + c) * w.w(x)?;
                let mut out = Vec::with_capacity(1 + n);
                out.push(val);
                out.extend(x.iter().map(|xi| xi * val));
                Ok(out)
            },
            &self.quad,
        )?;
        let boundary = quadrature::integrate_simplices(
            quadrature::restricted_boundary_simplices(polytope, extra),
            1,
            |x| Ok(vec![(dot(&a, x) + c) * w.v(x)?]),
            &self.quad,
        )?;
        Ok(PhiIntegrals { phi_w: interior.value[0], phi_x_w: interior.value[1..].to_vec(), phi_v: boundary.value[0] })
    }

    pub fn integrals(&self, tc: &ToricTC) -> Result<PhiIntegrals> {
        self.check(tc)?;
        let n = self.polytope.dim();
        let mut acc = PhiIntegrals { phi_w: 0.0, phi_x_w: vec![0.0; n], phi_v: 0.0 };
        for part in &self.domain {
            // cells are taken full-dimensional in the whole polytope so that
            // boundary pieces are not counted twice
            for (k, cell) in tc.phi.cells(part.polytope) {
                let region = if part.clip.is_empty() { cell } else { cell.intersect(&part.clip) };
                let mut extra = tc.phi.cell_constraints(k);
                extra.extend(part.clip.iter().cloned());
                let piece = &tc.phi.pieces[k];
                let shifted = AffinePiece::new(piece.gradient.clone(), &piece.constant + &tc.offset);
                let got = self.cell_integrals(part.polytope, &region, &extra, &shifted)?;
                acc.phi_w += part.sign * got.phi_w;
                acc.phi_v += part.sign * got.phi_v;
                for i in 0..n {
                    acc.phi_x_w[i] += part.sign * got.phi_x_w[i];
                }
            }
        }
        Ok(acc)
    }

    fn check(&self, tc: &ToricTC) -> Result<()> {
        if tc.dim() != self.polytope.dim() {
            return Err(Error::DimensionMismatch { expected: self.polytope.dim(), got: tc.dim() });
        }
        Ok(())
    }

    pub fn futaki(&self, beta: &[f64]) -> f64 {
        self.moments.futaki(beta)
    }

    /// `DF(φ) = ∫_∂P φ v dσ − Ŝ ∫_P φ w dx`.
    pub fn df(&self, tc: &ToricTC) -> Result<f64> {
        let i = self.integrals(tc)?;
        Ok(i.phi_v - self.moments.s_hat() * i.phi_w)
    }

    /// `avg_w(φ)`.
    pub fn average(&self, tc: &ToricTC) -> Result<f64> {
        Ok(self.integrals(tc)?.phi_w / self.moments.vol_w)
    }

    fn pairing_from(&self, i: &PhiIntegrals, beta: &[f64]) -> f64 {
        let bbar = dot(&self.moments.barycenter(), beta);
        -(dot(&i.phi_x_w, beta) - bbar * i.phi_w)
    }

    /// `⟨λ,β⟩ = ∫_P (φ̃ − avg)(⟨x,β⟩ − b̄_β) w dx` with `φ̃ = −φ`.
    pub fn lambda_pairing(&self, tc: &ToricTC, beta: &[f64]) -> Result<f64> {
        Ok(self.pairing_from(&self.integrals(tc)?, beta))
    }

    /// Components of `λ` in the orthonormal basis.
    pub fn lambda(&self, tc: &ToricTC) -> Result<Vec<f64>> {
        let i = self.integrals(tc)?;
        Ok(self.basis.iter().map(|b| self.pairing_from(&i, b)).collect())
    }

    /// `DF^T = DF − Σⱼ ⟨λ,βⱼ⟩ F(βⱼ)`.
    pub fn df_t(&self, tc: &ToricTC) -> Result<f64> {
        let i = self.integrals(tc)?;
        let df = i.phi_v - self.moments.s_hat() * i.phi_w;
        let correction: f64 = self.basis.iter().map(|b| self.pairing_from(&i, b) * self.futaki(b)).sum();
        Ok(df - correction)
    }

    /// `DF` with the second weight `w·w_ext` at the extremal data.
    pub fn df_extremal(&self, tc: &ToricTC) -> Result<f64> {
        let ext = self.moments.extremal()?;
        let i = self.integrals(tc)?;
        Ok(i.phi_v - dot(&ext.chi, &i.phi_x_w) - ext.a * i.phi_w)
    }

    /// `φ + c₀` with `c₀` chosen so that `∫_P φ w = 0`.
    pub fn normalize_chow(&self, tc: &ToricTC) -> Result<ToricTC> {
        let avg = self.average(tc)?;
        Ok(tc.shifted(&-rational::from_f64(avg)))
    }

    fn vertex_coords(&self, vertex: usize) -> Result<Vec<f64>> {
        self.polytope
            .vertices()
            .get(vertex)
            .map(|v| v.coords_f64())
            .ok_or_else(|| Error::NotAVertex(format!("#{vertex}")))
    }

    /// `Ch_p = φ(p) − avg_w(φ)`.
    pub fn chow(&self, tc: &ToricTC, vertex: usize) -> Result<f64> {
        self.vertex_coords(vertex)?;
        let phi_p = rational::to_f64(&tc.eval(&self.polytope.vertices()[vertex].coords));
        Ok(phi_p - self.average(tc)?)
    }

    fn chow_t_from(&self, tc: &ToricTC, i: &PhiIntegrals, vertex: usize) -> Result<(f64, f64)> {
        let p = self.vertex_coords(vertex)?;
        let phi_p = rational::to_f64(&tc.eval(&self.polytope.vertices()[vertex].coords));
        let chow = phi_p - i.phi_w / self.moments.vol_w;
        let bbar = self.moments.barycenter();
        let centred: Vec<f64> = p.iter().zip(&bbar).map(|(a, b)| a - b).collect();
        let correction: f64 = self.basis.iter().map(|b| self.pairing_from(i, b) * dot(&centred, b)).sum();
        Ok((chow, chow + correction))
    }

    /// `Ch^T_p = Ch_p + Σⱼ ⟨λ,βⱼ⟩(⟨p,βⱼ⟩ − b̄ⱼ)`.
    pub fn chow_t(&self, tc: &ToricTC, vertex: usize) -> Result<f64> {
        let i = self.integrals(tc)?;
        Ok(self.chow_t_from(tc, &i, vertex)?.1)
    }

    pub fn chow_table(&self, tc: &ToricTC) -> Result<Vec<ChowEntry>> {
        let i = self.integrals(tc)?;
        (0..self.polytope.vertices().len())
            .map(|v| {
                let (chow, chow_t) = self.chow_t_from(tc, &i, v)?;
                Ok(ChowEntry { vertex: v, coords: self.vertex_coords(v)?, chow, chow_t })
            })
            .collect()
    }

    /// `‖TC‖₁ = ∫_P |φ − avg_w φ| w dx`.
    pub fn l1_norm(&self, tc: &ToricTC) -> Result<f64> {
        let avg = rational::from_f64(self.average(tc)?);
        self.abs_integral(&tc.phi.add_affine(&vec![Rational::zero(); tc.dim()], &(&tc.offset - avg)))
    }

    /// `φ⊥ = φ − (w-weighted L² projection of φ onto affine functions)` and
    /// `‖TC⊥‖₁ = ∫_P |φ⊥| w dx`.
    pub fn orthogonal_part(&self, tc: &ToricTC) -> Result<(PLConvex, f64)> {
        let i = self.integrals(tc)?;
        let n = self.polytope.dim();
        let avg = i.phi_w / self.moments.vol_w;
        let bbar = self.moments.barycenter();
        // φ⊥ = φ − avg + Σⱼ ⟨λ,βⱼ⟩ (⟨x,βⱼ⟩ − b̄ⱼ)
        let mut grad = vec![0.0; n];
        let mut constant = rational::to_f64(&tc.offset) - avg;
        for b in &self.basis {
            let l = self.pairing_from(&i, b);
            for k in 0..n {
                grad[k] += l * b[k];
            }
            constant -= l * dot(&bbar, b);
        }
        let grad_q: Vec<Rational> = grad.iter().map(|&g| rational::from_f64(g)).collect();
        let perp = tc.phi.add_affine(&grad_q, &rational::from_f64(constant));
        let norm = self.abs_integral(&perp)?;
        Ok((perp, norm))
    }

    /// `∫_P |ψ| w dx` for a PL function, splitting each cell along `ψ = 0`.
    pub fn abs_integral(&self, psi: &PLConvex) -> Result<f64> {
        let mut total = 0.0;
        for dom in &self.domain {
            total += dom.sign * self.abs_integral_part(psi, dom)?;
        }
        Ok(total)
    }

    fn abs_integral_part(&self, psi: &PLConvex, dom: &DomainPart<'_>) -> Result<f64> {
        let mut total = 0.0;
        for (k, cell) in psi.cells(dom.polytope) {
            let region = if dom.clip.is_empty() { cell } else { cell.intersect(&dom.clip) };
            let piece = &psi.pieces[k];
            let plus = HalfSpace::new(piece.gradient.clone(), piece.constant.clone());
            let minus = HalfSpace::new(piece.gradient.iter().map(|x| -x.clone()).collect(), -piece.constant.clone());
            for (half, sign) in [(plus, 1.0), (minus, -1.0)] {
                let part = region.intersect(std::slice::from_ref(&half));
                if !part.is_full_dimensional() {
                    continue;
                }
                let a = rational::vec_to_f64(&piece.gradient);
                let c = rational::to_f64(&piece.constant);
                let r = quadrature::integrate_simplices(
                    quadrature::region_simplices(&part),
                    1,
                    |x| Ok(vec![(dot(&a, x) + c) * self.weights.w(x)?]),
                    &self.quad,
                )?;
                total += sign * r.value[0];
            }
        }
        Ok(total)
    }

    /// The vertex maximising `Ch^T`, with the ratio `Ch^T·V_w/‖TC⊥‖₁`.
    pub fn destabilizing_vertex(&self, tc: &ToricTC) -> Result<Destabilizing> {
        let (_, norm) = self.orthogonal_part(tc)?;
        let table = self.chow_table(tc)?;
        let scale = table.iter().map(|e| e.chow.abs()).fold(1.0, f64::max);
        if norm <= 1e-12 * scale * self.moments.vol_w {
            return Ok(Destabilizing {
                vertex: None,
                coords: None,
                chow_t: table.iter().map(|e| e.chow_t).fold(f64::NEG_INFINITY, f64::max),
                orthogonal_norm: norm,
                ratio: None,
                ties: Vec::new(),
                product: true,
            });
        }
        let max = table.iter().map(|e| e.chow_t).fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-12 * scale;
        let mut ties: Vec<usize> = table.iter().filter(|e| e.chow_t >= max - tol).map(|e| e.vertex).collect();
        sorted_by_coords(self.polytope, &mut ties);
        let best = ties[0];
        Ok(Destabilizing {
            vertex: Some(best),
            coords: Some(table[best].coords.clone()),
            chow_t: table[best].chow_t,
            orthogonal_norm: norm,
            ratio: Some(table[best].chow_t * self.moments.vol_w / norm),
            ties,
            product: false,
        })
    }
}

fn chopped_moments(domain: &[DomainPart<'_>], weights: &WeightPair, quad: &QuadOptions) -> Result<Moments> {
    let mut parts = domain.iter();
    let first = parts.next().expect("non-empty domain");
    let mut acc = invariants::moments_clipped(first.polytope, weights, &first.clip, quad)?;
    for part in parts {
        let m = invariants::moments_clipped(part.polytope, weights, &part.clip, quad)?;
        acc = acc.combine(&m, part.sign);
    }
    Ok(acc)
}

/// Moments of `P_ε` assembled as in [`ToricContext::corner_chopped`].
pub fn corner_chopped_moments(
    base: &DelzantPolytope,
    chopped: &DelzantPolytope,
    corner: &HalfSpace,
    weights: &WeightPair,
    quad: &QuadOptions,
) -> Result<Moments> {
    let domain = [
        DomainPart { sign: 1.0, polytope: base, clip: Vec::new() },
        DomainPart { sign: -1.0, polytope: base, clip: vec![corner.clone()] },
        DomainPart { sign: 1.0, polytope: chopped, clip: vec![corner.clone()] },
    ];
    chopped_moments(&domain, weights, quad)
}

/// Random convex PL function: 2–5 pieces, integer gradients in `[−3, 3]`,
/// constants in `{−2, −15/8, …, 2}`.
pub fn random_pl(rng: &mut impl Rng, dim: usize) -> PLConvex {
    let count = rng.gen_range(2..=5);
    let pieces = (0..count)
        .map(|_| {
            let gradient = (0..dim).map(|_| rational::int(rng.gen_range(-3..=3))).collect();
            let constant = rational::ratio(rng.gen_range(-16..=16), 8);
            AffinePiece::new(gradient, constant)
        })
        .collect();
    PLConvex::new(pieces).expect("non-empty piece list")
}

/// `true` when `φ` takes its maximum over `P` at a vertex (checked on a
/// sample of points); holds for every convex `φ`.
pub fn max_at_vertex(polytope: &DelzantPolytope, phi: &PLConvex, samples: &[Vec<f64>]) -> bool {
    let vmax =
        polytope.vertices().iter().map(|v| rational::to_f64(&phi.eval(&v.coords))).fold(f64::NEG_INFINITY, f64::max);
    samples.iter().all(|x| phi.eval_f64(x) <= vmax + 1e-12 * vmax.abs().max(1.0))
}

/// Uniform-ish interior samples: random convex combinations of vertices.
pub fn sample_points(polytope: &DelzantPolytope, rng: &mut impl Rng, count: usize) -> Vec<Vec<f64>> {
    let verts: Vec<Vec<f64>> = polytope.vertices().iter().map(|v| v.coords_f64()).collect();
    (0..count)
        .map(|_| {
            let weights: Vec<f64> = verts.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let total: f64 = weights.iter().sum();
            let mut x = vec![0.0; polytope.dim()];
            for (w, v) in weights.iter().zip(&verts) {
                for k in 0..x.len() {
                    x[k] += w / total * v[k];
                }
            }
            x
        })
        .collect()
}

/// `true` if the rational point is a vertex of `P`.
pub fn is_vertex(polytope: &DelzantPolytope, p: &[Rational]) -> bool {
    polytope.vertex_index(p).is_some()
}

/// Sign of a rational, for display.
pub fn sign(q: &Rational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}
