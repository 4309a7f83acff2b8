//! Delzant polytopes: facet data, derived vertex data, lattice facet charts,
//! translation, unimodular change of coordinates and corner chopping.
//!
//! The facet list is the source of truth. A polytope is
//! `P = { x : ⟨n_F, x⟩ + c_F ≥ 0 for all facets F }` with `n_F` primitive and
//! inward pointing. Vertices, their inward edges and adjacent facets are
//! derived once at construction.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix};
use crate::rational::{self, Rational};
use crate::region::{ConvexRegion, HalfSpace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    #[serde(with = "rational::serde_rational")]
    pub offset: Rational,
}

impl Facet {
    pub fn new(normal: Vec<i64>, offset: Rational) -> Self {
        Self { normal, offset }
    }

    pub fn halfspace(&self) -> HalfSpace {
        HalfSpace::new(self.normal.iter().map(|&x| rational::int(x)).collect(), self.offset.clone())
    }

    pub fn slack(&self, x: &[Rational]) -> Rational {
        rational::dot_int(&self.normal, x) + &self.offset
    }
}

/// A vertex together with its tangent-cone data.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexData {
    pub coords: Vec<Rational>,
    /// Primitive inward edge generators; `inward_edges[i]` is dual to
    /// `adjacent_facets[i]` (it pairs to 1 with that normal and 0 with the rest).
    pub inward_edges: Vec<Vec<i64>>,
    pub adjacent_facets: Vec<usize>,
}

impl VertexData {
    pub fn coords_f64(&self) -> Vec<f64> {
        rational::vec_to_f64(&self.coords)
    }

    pub fn edges_f64(&self) -> Vec<Vec<f64>> {
        self.inward_edges.iter().map(|e| e.iter().map(|&x| x as f64).collect()).collect()
    }
}

/// Problems found by [`validate_delzant`].
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    WrongDimension { facet: usize, len: usize },
    NonPrimitiveNormal { facet: usize, normal: Vec<i64> },
    Empty,
    NotFullDimensional,
    Unbounded { vertex: Vec<Rational>, edge: Vec<i64> },
    NonSimple { vertex: Vec<Rational>, facets: Vec<usize> },
    NotUnimodular { vertex: Vec<Rational>, facets: Vec<usize>, determinant: i64 },
    RedundantFacet { facet: usize },
}

fn fmt_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(rational::format).collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrongDimension { facet, len } => write!(f, "facet {facet}: normal has {len} entries"),
            Self::NonPrimitiveNormal { facet, normal } => {
                write!(f, "facet {facet}: normal {normal:?} is not primitive")
            }
            Self::Empty => write!(f, "polytope is empty"),
            Self::NotFullDimensional => write!(f, "polytope is not full-dimensional"),
            Self::Unbounded { vertex, edge } => {
                write!(f, "unbounded: ray from vertex {} along {edge:?} never leaves", fmt_point(vertex))
            }
            Self::NonSimple { vertex, facets } => {
                write!(f, "vertex {} is not simple: facets {facets:?} meet there", fmt_point(vertex))
            }
            Self::NotUnimodular { vertex, facets, determinant } => write!(
                f,
                "vertex {}: normals of facets {facets:?} have determinant {determinant} (need ±1)",
                fmt_point(vertex)
            ),
            Self::RedundantFacet { facet } => write!(f, "facet {facet} does not support a codimension-1 face"),
        }
    }
}

struct Analysis {
    region: ConvexRegion,
    vertices: Vec<VertexData>,
    diagnostics: Vec<Diagnostic>,
}

fn analyse(dim: usize, facets: &[Facet]) -> Analysis {
    let mut diagnostics = Vec::new();
    for (i, f) in facets.iter().enumerate() {
        if f.normal.len() != dim {
            diagnostics.push(Diagnostic::WrongDimension { facet: i, len: f.normal.len() });
        } else if !lattice::is_primitive(&f.normal) {
            diagnostics.push(Diagnostic::NonPrimitiveNormal { facet: i, normal: f.normal.clone() });
        }
    }
    if !diagnostics.is_empty() {
        let region = ConvexRegion::new(dim, Vec::new());
        return Analysis { region, vertices: Vec::new(), diagnostics };
    }
    let region = ConvexRegion::new(dim, facets.iter().map(Facet::halfspace).collect());
    if region.vertices().is_empty() {
        diagnostics.push(Diagnostic::Empty);
        return Analysis { region, vertices: Vec::new(), diagnostics };
    }
    if !region.is_full_dimensional() {
        diagnostics.push(Diagnostic::NotFullDimensional);
    }
    let mut vertices = Vec::new();
    for (vi, coords) in region.vertices().iter().enumerate() {
        let adjacent: Vec<usize> = (0..facets.len()).filter(|&f| region.is_tight(f, vi)).collect();
        if adjacent.len() != dim {
            diagnostics.push(Diagnostic::NonSimple { vertex: coords.clone(), facets: adjacent });
            continue;
        }
        let normals = IntMatrix::from_rows(&adjacent.iter().map(|&f| facets[f].normal.clone()).collect::<Vec<_>>());
        let det = normals.det();
        if det.abs() != 1 {
            diagnostics.push(Diagnostic::NotUnimodular { vertex: coords.clone(), facets: adjacent, determinant: det });
            continue;
        }
        // Edges are the columns of the inverse normal matrix.
        let rows: Vec<Vec<Rational>> =
            (0..dim).map(|r| (0..dim).map(|c| rational::int(normals.get(r, c))).collect()).collect();
        let mut edges = vec![vec![0i64; dim]; dim];
        for (i, edge) in edges.iter_mut().enumerate() {
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::one();
            let col = rational::solve(&rows, &e).expect("unimodular matrix is invertible");
            for (k, q) in col.iter().enumerate() {
                edge[k] = q.to_integer().try_into().expect("small integer edge");
            }
        }
        for edge in &edges {
            let leaves = facets.iter().any(|f| f.normal.iter().zip(edge).map(|(a, b)| a * b).sum::<i64>() < 0);
            if !leaves {
                diagnostics.push(Diagnostic::Unbounded { vertex: coords.clone(), edge: edge.clone() });
            }
        }
        vertices.push(VertexData { coords: coords.clone(), inward_edges: edges, adjacent_facets: adjacent });
    }
    for f in 0..facets.len() {
        if dim > 0 && region.facet_vertices(f).is_none() {
            diagnostics.push(Diagnostic::RedundantFacet { facet: f });
        }
    }
    Analysis { region, vertices, diagnostics }
}

/// Checks every Delzant invariant; empty output means valid.
pub fn validate_delzant(dim: usize, facets: &[Facet]) -> Vec<Diagnostic> {
    analyse(dim, facets).diagnostics
}

/// JSON layout of a polytope file. Vertices are never serialized.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub dim: usize,
    pub facets: Vec<Facet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct DelzantPolytope {
    dim: usize,
    facets: Vec<Facet>,
    name: Option<String>,
    region: ConvexRegion,
    vertices: Vec<VertexData>,
}

/// An affine chart `y ↦ origin + Σ yᵢ·basisᵢ` of a facet whose Lebesgue
/// measure is the lattice measure `dσ` on that facet.
#[derive(Clone, Debug)]
pub struct FacetChart {
    pub facet: usize,
    pub origin: Vec<Rational>,
    /// `n − 1` integer vectors forming a basis of `n_F^⊥ ∩ ℤⁿ`.
    pub basis: Vec<Vec<i64>>,
    /// Rows `1..n` of the inverse of the completed unimodular matrix: they
    /// read chart coordinates off `x − origin`.
    coord_rows: Vec<Vec<i64>>,
    pub region: ConvexRegion,
}

impl FacetChart {
    pub fn embed(&self, y: &[Rational]) -> Vec<Rational> {
        let mut x = self.origin.clone();
        for (yi, b) in y.iter().zip(&self.basis) {
            for (xk, bk) in x.iter_mut().zip(b) {
                *xk += yi * rational::int(*bk);
            }
        }
        x
    }

    pub fn coords(&self, x: &[Rational]) -> Vec<Rational> {
        let d: Vec<Rational> = x.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        self.coord_rows.iter().map(|row| rational::dot_int(row, &d)).collect()
    }

    /// Pulls an ambient half-space back to chart coordinates.
    pub fn pullback(&self, h: &HalfSpace) -> HalfSpace {
        let normal =
            self.basis.iter().map(|b| b.iter().zip(&h.normal).map(|(bk, nk)| nk * rational::int(*bk)).sum()).collect();
        HalfSpace::new(normal, h.slack(&self.origin))
    }

    /// The chart region cut further by ambient constraints.
    pub fn restricted(&self, extra: &[HalfSpace]) -> ConvexRegion {
        let pulled: Vec<HalfSpace> = extra.iter().map(|h| self.pullback(h)).collect();
        self.region.intersect(&pulled)
    }

    pub fn lattice_measure(&self) -> Rational {
        self.region.volume()
    }
}

impl DelzantPolytope {
    pub fn new(dim: usize, facets: Vec<Facet>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPolytope("dimension must be positive".into()));
        }
        let Analysis { region, vertices, diagnostics } = analyse(dim, &facets);
        if let Some(Diagnostic::NonSimple { vertex, facets }) =
            diagnostics.iter().find(|d| matches!(d, Diagnostic::NonSimple { .. }))
        {
            return Err(Error::NonSimpleVertex { vertex: fmt_point(vertex), facets: facets.clone() });
        }
        if !diagnostics.is_empty() {
            return Err(Error::NotDelzant(diagnostics.iter().map(ToString::to_string).collect()));
        }
        Ok(Self { dim, facets, name: None, region, vertices })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn from_file(file: PolytopeFile) -> Result<Self> {
        let p = Self::new(file.dim, file.facets)?;
        Ok(match file.name {
            Some(n) => p.with_name(n),
            None => p,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PolytopeFile = serde_json::from_str(s)?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> PolytopeFile {
        PolytopeFile { dim: self.dim, facets: self.facets.clone(), name: self.name.clone(), note: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("polytope serializes")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn region(&self) -> &ConvexRegion {
        &self.region
    }

    /// Derived vertex data (cached at construction).
    pub fn vertices(&self) -> &[VertexData] {
        &self.vertices
    }

    pub fn vertex_index(&self, coords: &[Rational]) -> Option<usize> {
        self.vertices.iter().position(|v| v.coords == coords)
    }

    /// Index of the vertex closest to a float point, if within `tol`.
    pub fn vertex_near(&self, x: &[f64], tol: f64) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.coords_f64().iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= tol)
    }

    pub fn halfspaces(&self) -> Vec<HalfSpace> {
        self.facets.iter().map(Facet::halfspace).collect()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|f| !f.slack(x).is_negative())
    }

    /// Simplices partitioning `P` (vertex coordinates), with exact volumes.
    pub fn triangulate(&self) -> Vec<Vec<Vec<Rational>>> {
        self.region
            .triangulate()
            .into_iter()
            .map(|s| s.into_iter().map(|i| self.region.vertices()[i].clone()).collect())
            .collect()
    }

    pub fn volume(&self) -> Rational {
        self.region.volume()
    }

    pub fn facet_chart(&self, facet: usize) -> FacetChart {
        let f = &self.facets[facet];
        let (u, u_inv) = lattice::complete_primitive(&f.normal).expect("facet normals are primitive");
        let basis: Vec<Vec<i64>> = (1..self.dim).map(|c| u.column(c)).collect();
        let coord_rows: Vec<Vec<i64>> = (1..self.dim).map(|r| u_inv.row(r)).collect();
        let origin = self
            .region
            .facet_vertices(facet)
            .map(|vs| self.region.vertices()[vs[0]].clone())
            .expect("facets support codimension-1 faces");
        let mut chart =
            FacetChart { facet, origin, basis, coord_rows, region: ConvexRegion::new(self.dim - 1, Vec::new()) };
        let pulled: Vec<HalfSpace> = self
            .facets
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != facet)
            .map(|(_, g)| chart.pullback(&g.halfspace()))
            .filter(|h| h.normal.iter().any(|x| !x.is_zero()))
            .collect();
        chart.region = ConvexRegion::new(self.dim - 1, pulled);
        chart
    }

    /// Total lattice measure of the boundary.
    pub fn lattice_perimeter(&self) -> Rational {
        (0..self.facets.len()).map(|f| self.facet_chart(f).lattice_measure()).sum()
    }

    /// Largest admissible chop depth (exclusive) at a vertex: half the
    /// smallest lattice distance from the vertex's chop hyperplane family to
    /// any other vertex.
    pub fn admissible_chop_depth(&self, vertex: usize) -> Rational {
        let v = &self.vertices[vertex];
        let level = |x: &[Rational]| -> Rational { v.adjacent_facets.iter().map(|&f| self.facets[f].slack(x)).sum() };
        let min = self
            .vertices
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != vertex)
            .map(|(_, q)| level(&q.coords))
            .min()
            .expect("polytope has at least two vertices");
        min / rational::int(2)
    }

    /// The corner `{y₁ + ⋯ + yₙ ≤ eps}` removed by [`Self::corner_chop`].
    pub fn corner_halfspace(&self, vertex: usize, eps: &Rational) -> HalfSpace {
        let v = &self.vertices[vertex];
        let mut normal = vec![Rational::zero(); self.dim];
        let mut offset = eps.clone();
        for &f in &v.adjacent_facets {
            for (k, x) in self.facets[f].normal.iter().enumerate() {
                normal[k] -= rational::int(*x);
            }
            offset -= &self.facets[f].offset;
        }
        HalfSpace::new(normal, offset)
    }

    /// Truncates the corner at `vertex` at lattice depth `eps`: in
    /// vertex-adapted coordinates the new facet is `y₁ + ⋯ + yₙ = eps`.
    pub fn corner_chop(&self, vertex: usize, eps: &Rational) -> Result<Self> {
        if self.dim < 2 {
            return Err(Error::UnsupportedDimension { required: 2, found: self.dim });
        }
        let bound = self.admissible_chop_depth(vertex);
        if !eps.is_positive() || *eps >= bound {
            return Err(Error::ChopTooDeep { eps: rational::format(eps), bound: rational::format(&bound) });
        }
        let v = &self.vertices[vertex];
        let mut normal = vec![0i64; self.dim];
        let mut offset = -eps.clone();
        for &f in &v.adjacent_facets {
            for (k, x) in self.facets[f].normal.iter().enumerate() {
                normal[k] += x;
            }
            offset += &self.facets[f].offset;
        }
        let mut facets = self.facets.clone();
        facets.push(Facet::new(normal, offset));
        let chopped = Self::new(self.dim, facets)?;
        Ok(match &self.name {
            Some(n) => chopped.with_name(format!("{n}-chop")),
            None => chopped,
        })
    }

    pub fn translate(&self, eta: &[Rational]) -> Self {
        let facets = self
            .facets
            .iter()
            .map(|f| Facet::new(f.normal.clone(), &f.offset - rational::dot_int(&f.normal, eta)))
            .collect();
        let mut p = Self::new(self.dim, facets).expect("translation preserves Delzant");
        p.name = self.name.clone();
        p
    }

    /// `[min, max]` of `⟨x, ξ⟩` over `P`.
    pub fn interval_along(&self, xi: &[f64]) -> (f64, f64) {
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let t: f64 = v.coords_f64().iter().zip(xi).map(|(a, b)| a * b).sum();
            (lo.min(t), hi.max(t))
        })
    }

    /// Translates `P` so that `⟨P, ξ⟩` has midpoint 0. Returns the new
    /// polytope and the scalar shift applied to `⟨ξ, ·⟩`.
    pub fn midpoint_normalize(&self, xi: &[f64]) -> (Self, f64) {
        let norm2: f64 = xi.iter().map(|x| x * x).sum();
        if norm2 == 0.0 {
            return (self.clone(), 0.0);
        }
        // Exact: work with the rational image of ξ.
        let xi_q: Vec<Rational> = xi.iter().map(|&x| rational::from_f64(x)).collect();
        let vals: Vec<Rational> = self.vertices.iter().map(|v| rational::dot(&v.coords, &xi_q)).collect();
        let lo = vals.iter().min().unwrap().clone();
        let hi = vals.iter().max().unwrap().clone();
        let shift = -(lo + hi) / rational::int(2);
        let norm2_q = rational::dot(&xi_q, &xi_q);
        let eta: Vec<Rational> = xi_q.iter().map(|x| x * &shift / &norm2_q).collect();
        (self.translate(&eta), rational::to_f64(&shift))
    }

    /// Image under `x ↦ A·x` for unimodular integer `A`.
    pub fn transform(&self, a: &IntMatrix) -> Result<Self> {
        if a.n != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.n });
        }
        if a.det().abs() != 1 {
            return Err(Error::InvalidPolytope("transform is not unimodular".into()));
        }
        // normals transform by A^{-T}: n' = (A^{-1})ᵀ n solves Aᵀ n' = n
        let at: Vec<Vec<Rational>> =
            (0..self.dim).map(|r| (0..self.dim).map(|c| rational::int(a.get(c, r))).collect()).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let n: Vec<Rational> = f.normal.iter().map(|&x| rational::int(x)).collect();
                let sol = rational::solve(&at, &n).expect("unimodular");
                let normal = sol.iter().map(|q| q.to_integer().try_into().expect("integer normal")).collect();
                Facet::new(normal, f.offset.clone())
            })
            .collect();
        let mut p = Self::new(self.dim, facets)?;
        p.name = self.name.clone();
        Ok(p)
    }

    /// All facet offsets equal to 1 (so 0 is the unique interior lattice point
    /// of a lattice polytope).
    pub fn is_reflexive(&self) -> bool {
        self.facets.iter().all(|f| f.offset.is_one())
    }
}

pub mod catalog {
    //! Built-in example polytopes. Each file states where its facet data
    //! comes from; vertex lists are always derived.

    use super::*;

    const FILES: &[(&str, &str)] = &[
        ("cp1", include_str!("../catalog/cp1.json")),
        ("cp1-reflexive", include_str!("../catalog/cp1-reflexive.json")),
        ("cp2", include_str!("../catalog/cp2.json")),
        ("cp2-reflexive", include_str!("../catalog/cp2-reflexive.json")),
        ("cp1xcp1", include_str!("../catalog/cp1xcp1.json")),
        ("cp1xcp1-reflexive", include_str!("../catalog/cp1xcp1-reflexive.json")),
        ("bl1cp2", include_str!("../catalog/bl1cp2.json")),
        ("bl1cp2-reflexive", include_str!("../catalog/bl1cp2-reflexive.json")),
        ("bl2cp2", include_str!("../catalog/bl2cp2.json")),
        ("bl2cp2-reflexive", include_str!("../catalog/bl2cp2-reflexive.json")),
        ("bl3cp2", include_str!("../catalog/bl3cp2.json")),
        ("cube", include_str!("../catalog/cube.json")),
        ("cube-reflexive", include_str!("../catalog/cube-reflexive.json")),
    ];

    /// Names accepted by [`load`]; `hirzebruch-a` stands for any `a ≥ 0`.
    pub fn names() -> Vec<&'static str> {
        let mut v: Vec<&str> = FILES.iter().map(|(n, _)| *n).collect();
        v.push("bl3cp2-reflexive");
        v.push("hirzebruch-a");
        v
    }

    /// The non-reflexive defaults used by sweeps over "every catalog polytope".
    pub fn standard() -> Vec<DelzantPolytope> {
        ["cp1", "cp2", "cp1xcp1", "bl1cp2", "bl2cp2", "bl3cp2", "hirzebruch-2", "cube"]
            .iter()
            .map(|n| load(n).expect("catalog entry"))
            .collect()
    }

    /// Hirzebruch surface `F_a`: `{x ≥ 0, 0 ≤ y ≤ 1, x + a·y ≤ a + 1}`.
    pub fn hirzebruch(a: i64) -> DelzantPolytope {
        let facets = vec![
            Facet::new(vec![1, 0], rational::int(0)),
            Facet::new(vec![0, 1], rational::int(0)),
            Facet::new(vec![0, -1], rational::int(1)),
            Facet::new(vec![-1, -a], rational::int(a + 1)),
        ];
        DelzantPolytope::new(2, facets).expect("Hirzebruch polytope is Delzant").with_name(format!("hirzebruch-{a}"))
    }

    pub fn load(name: &str) -> Result<DelzantPolytope> {
        if let Some(a) = name.strip_prefix("hirzebruch-") {
            let a: i64 = a.parse().map_err(|_| Error::UnknownCatalog(name.into()))?;
            if a < 0 {
                return Err(Error::UnknownCatalog(name.into()));
            }
            return Ok(hirzebruch(a));
        }
        let key = if name == "bl3cp2-reflexive" { "bl3cp2" } else { name };
        let (_, text) = FILES.iter().find(|(n, _)| *n == key).ok_or_else(|| Error::UnknownCatalog(name.into()))?;
        let p = DelzantPolytope::from_json(text)?;
        Ok(if p.name.is_none() { p.with_name(name) } else { p })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn facets(spec: &[(&[i64], Rational)]) -> Vec<Facet> {
        spec.iter().map(|(n, c)| Facet::new(n.to_vec(), c.clone())).collect()
    }

    fn unit_simplex() -> DelzantPolytope {
        DelzantPolytope::new(2, facets(&[(&[1, 0], int(0)), (&[0, 1], int(0)), (&[-1, -1], int(1))])).unwrap()
    }

    fn unit_square() -> DelzantPolytope {
        catalog::load("cp1xcp1").unwrap()
    }

    #[test]
    fn interval_endpoints() {
        let p = catalog::load("cp1").unwrap();
        let vs = p.vertices();
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[0].coords, vec![ratio(-1, 2)]);
        assert_eq!(vs[0].inward_edges, vec![vec![1]]);
        assert_eq!(vs[1].coords, vec![ratio(1, 2)]);
        assert_eq!(vs[1].inward_edges, vec![vec![-1]]);
    }

    #[test]
    fn simplex_vertices_and_edges() {
        let p = unit_simplex();
        let find = |x: i64, y: i64| p.vertices().iter().find(|v| v.coords == vec![int(x), int(y)]).unwrap().clone();
        let sorted = |mut e: Vec<Vec<i64>>| {
            e.sort();
            e
        };
        assert_eq!(sorted(find(0, 0).inward_edges), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(sorted(find(1, 0).inward_edges), vec![vec![-1, 0], vec![-1, 1]]);
        assert_eq!(sorted(find(0, 1).inward_edges), vec![vec![0, -1], vec![1, -1]]);
        assert_eq!(p.vertices().len(), 3);
    }

    #[test]
    fn square_edges_axis_parallel() {
        let p = unit_square();
        assert_eq!(p.vertices().len(), 4);
        for v in p.vertices() {
            for e in &v.inward_edges {
                assert_eq!(e.iter().filter(|&&x| x != 0).count(), 1);
            }
        }
    }

    #[test]
    fn non_unimodular_triangle_is_reported() {
        let f = facets(&[(&[1, 0], int(0)), (&[0, 1], int(0)), (&[-1, -2], int(2))]);
        let diags = validate_delzant(2, &f);
        assert!(diags.iter().any(|d| matches!(d,
            Diagnostic::NotUnimodular { vertex, determinant, .. } if *vertex == vec![int(0), int(1)] && determinant.abs() == 2)));
        assert!(!diags.iter().any(|d| matches!(d,
            Diagnostic::NotUnimodular { vertex, .. } if *vertex == vec![int(2), int(0)])));
        assert!(matches!(DelzantPolytope::new(2, f), Err(Error::NotDelzant(_))));
        assert!(validate_delzant(2, unit_simplex().facets()).is_empty());
        assert!(validate_delzant(2, unit_square().facets()).is_empty());
    }

    #[test]
    fn non_simple_vertex_is_an_error() {
        // square pyramid apex
        let f = facets(&[
            (&[0, 0, 1], int(0)),
            (&[1, 0, -1], int(1)),
            (&[-1, 0, -1], int(1)),
            (&[0, 1, -1], int(1)),
            (&[0, -1, -1], int(1)),
        ]);
        match DelzantPolytope::new(3, f) {
            Err(Error::NonSimpleVertex { facets, .. }) => assert_eq!(facets, vec![1, 2, 3, 4]),
            other => panic!("expected non-simple error, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_and_redundant_are_diagnosed() {
        let quadrant = facets(&[(&[1, 0], int(0)), (&[0, 1], int(0))]);
        assert!(validate_delzant(2, &quadrant).iter().any(|d| matches!(d, Diagnostic::Unbounded { .. })));
        let redundant = facets(&[(&[1, 0], int(0)), (&[0, 1], int(0)), (&[-1, -1], int(1)), (&[-1, 0], int(5))]);
        assert!(validate_delzant(2, &redundant).contains(&Diagnostic::RedundantFacet { facet: 3 }));
        let non_primitive = facets(&[(&[2, 0], int(0)), (&[0, 1], int(0)), (&[-1, -1], int(1))]);
        assert!(matches!(validate_delzant(2, &non_primitive)[0], Diagnostic::NonPrimitiveNormal { facet: 0, .. }));
    }

    #[test]
    fn triangulations_partition_volume() {
        assert_eq!(unit_simplex().triangulate().len(), 1);
        let sq = unit_square();
        let tris = sq.triangulate();
        assert_eq!(tris.len(), 2);
        for t in &tris {
            assert_eq!(crate::region::simplex_volume(t), ratio(1, 2));
        }
        let origin = sq.vertex_index(&[int(0), int(0)]).unwrap();
        let pent = sq.corner_chop(origin, &ratio(1, 4)).unwrap();
        let tris = pent.triangulate();
        assert_eq!(tris.len(), 3);
        let total: Rational = tris.iter().map(|t| crate::region::simplex_volume(t)).sum();
        assert_eq!(total, int(1) - ratio(1, 32));
    }

    #[test]
    fn facet_charts_measure_lattice_length() {
        let p = unit_simplex();
        let hyp = p.facets().iter().position(|f| f.normal == vec![-1, -1]).unwrap();
        let chart = p.facet_chart(hyp);
        assert_eq!(chart.lattice_measure(), int(1));
        let b = &chart.basis[0];
        assert_eq!(b[0].abs(), 1);
        assert_eq!(b[0], -b[1]);
        assert_eq!(p.lattice_perimeter(), int(3));
        assert_eq!(unit_square().facet_chart(0).lattice_measure(), int(1));
        let cp1 = catalog::load("cp1").unwrap();
        assert_eq!(cp1.facet_chart(0).lattice_measure(), int(1));
        assert_eq!(cp1.lattice_perimeter(), int(2));
        // chart coordinates invert the embedding
        let y = vec![ratio(1, 3)];
        assert_eq!(chart.coords(&chart.embed(&y)), y);
    }

    #[test]
    fn corner_chop_of_square_adds_diagonal_facet() {
        let sq = unit_square();
        let origin = sq.vertex_index(&[int(0), int(0)]).unwrap();
        let pent = sq.corner_chop(origin, &ratio(1, 4)).unwrap();
        let last = pent.facets().last().unwrap();
        assert_eq!(last.normal, vec![1, 1]);
        assert_eq!(last.offset, ratio(-1, 4));
        assert_eq!(pent.volume(), int(1) - ratio(1, 32));
        assert_eq!(pent.facets().len(), 5);
        assert_eq!(pent.vertices().len(), 5);
        assert_eq!(sq.admissible_chop_depth(origin), ratio(1, 2));
        assert!(matches!(sq.corner_chop(origin, &ratio(1, 2)), Err(Error::ChopTooDeep { .. })));
        assert!(matches!(
            catalog::load("cp1").unwrap().corner_chop(0, &ratio(1, 10)),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn chopping_simplex_gives_trapezoid_and_cube_deficit() {
        let p = unit_simplex();
        let o = p.vertex_index(&[int(0), int(0)]).unwrap();
        let t = p.corner_chop(o, &ratio(1, 3)).unwrap();
        assert_eq!(t.vertices().len(), 4);
        assert_eq!(t.volume(), ratio(1, 2) - ratio(1, 18));
        let cube = catalog::load("cube").unwrap();
        let c0 = cube.vertex_index(&[int(0), int(0), int(0)]).unwrap();
        let chopped = cube.corner_chop(c0, &ratio(1, 10)).unwrap();
        assert_eq!(chopped.volume(), int(1) - ratio(1, 6000));
        assert_eq!(chopped.facets().len(), 7);
        assert_eq!(chopped.vertices().len(), 8 + 2);
    }

    #[test]
    fn translation_and_midpoint() {
        let seg = DelzantPolytope::new(1, facets(&[(&[1], int(0)), (&[-1], int(1))])).unwrap();
        let (centred, shift) = seg.midpoint_normalize(&[1.0]);
        assert_eq!(shift, -0.5);
        assert_eq!(centred.interval_along(&[1.0]), (-0.5, 0.5));
        let (same, s) = catalog::load("cp1").unwrap().midpoint_normalize(&[3.0]);
        assert_eq!(s, 0.0);
        assert_eq!(same.facets(), catalog::load("cp1").unwrap().facets());
        let (tri, s) = unit_simplex().midpoint_normalize(&[1.0, 0.0]);
        assert_eq!(s, -0.5);
        assert!(tri.vertex_index(&[ratio(-1, 2), int(0)]).is_some());
        assert!(validate_delzant(2, tri.facets()).is_empty());
    }

    #[test]
    fn catalog_entries_are_valid() {
        for name in catalog::names() {
            let name = if name == "hirzebruch-a" { "hirzebruch-3" } else { name };
            let p = catalog::load(name).unwrap();
            assert!(validate_delzant(p.dim(), p.facets()).is_empty(), "{name}");
            if name.ends_with("reflexive") {
                assert!(p.is_reflexive(), "{name}");
            }
        }
        assert_eq!(catalog::load("cube").unwrap().vertices().len(), 8);
        assert!(catalog::load("nope").is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = catalog::load("bl1cp2").unwrap();
        let q = DelzantPolytope::from_json(&p.to_json()).unwrap();
        assert_eq!(p.facets(), q.facets());
        let text = r#"{ "dim": 1, "facets": [ {"normal": [1], "offset": "1/2"}, {"normal": [-1], "offset": "1/2"} ] }"#;
        assert_eq!(DelzantPolytope::from_json(text).unwrap().volume(), int(1));
    }

    #[test]
    fn unimodular_transform_preserves_combinatorics() {
        let p = catalog::load("bl1cp2").unwrap();
        let a = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        let q = p.transform(&a).unwrap();
        assert_eq!(q.volume(), p.volume());
        assert_eq!(q.lattice_perimeter(), p.lattice_perimeter());
        assert_eq!(q.vertices().len(), p.vertices().len());
        assert!(p.transform(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]])).is_err());
    }
}
