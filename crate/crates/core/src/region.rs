//! Bounded convex regions in H-representation over the rationals.
//!
//! This is the combinatorial workhorse behind Delzant polytopes, the cells of
//! piecewise-linear functions, and facet charts. Vertex enumeration is the
//! brute-force `n`-subset method; it is exact and handles degenerate
//! (non-simple) cells, which arise routinely when a PL function's corner locus
//! passes through a vertex.

use std::collections::{BTreeSet, HashSet};

use num_traits::{Signed, Zero};

use crate::rational::{self, Rational};

/// The closed half-space `⟨normal, x⟩ + offset ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfSpace {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl HalfSpace {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Self {
        Self { normal, offset }
    }

    pub fn slack(&self, x: &[Rational]) -> Rational {
        rational::dot(&self.normal, x) + &self.offset
    }

    fn is_trivial(&self) -> bool {
        self.normal.iter().all(Zero::is_zero)
    }
}

#[derive(Clone, Debug)]
pub struct ConvexRegion {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<Vec<Rational>>,
    /// `tight[h][v]`: half-space `h` is an equality at vertex `v`.
    tight: Vec<Vec<bool>>,
}

fn combinations(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + m - k) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl ConvexRegion {
    /// Builds the region and enumerates its vertices. The region is assumed
    /// bounded; an empty vertex list means the region is empty.
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Self {
        debug_assert!(halfspaces.iter().all(|h| h.normal.len() == dim));
        let infeasible_constant = halfspaces.iter().any(|h| h.is_trivial() && h.offset.is_negative());
        let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
        if !infeasible_constant {
            let active: Vec<usize> = (0..halfspaces.len()).filter(|&i| !halfspaces[i].is_trivial()).collect();
            combinations(active.len(), dim, |subset| {
                let rows: Vec<Vec<Rational>> = subset.iter().map(|&i| halfspaces[active[i]].normal.clone()).collect();
                let rhs: Vec<Rational> = subset.iter().map(|&i| -halfspaces[active[i]].offset.clone()).collect();
                if let Some(x) = rational::solve(&rows, &rhs) {
                    if halfspaces.iter().all(|h| !h.slack(&x).is_negative()) {
                        found.insert(x);
                    }
                }
            });
        }
        let vertices: Vec<Vec<Rational>> = found.into_iter().collect();
        let tight = halfspaces.iter().map(|h| vertices.iter().map(|v| h.slack(v).is_zero()).collect()).collect();
        Self { dim, halfspaces, vertices, tight }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn is_tight(&self, halfspace: usize, vertex: usize) -> bool {
        self.tight[halfspace][vertex]
    }

    /// Affine dimension of the region, `None` when empty.
    pub fn affine_dim(&self) -> Option<usize> {
        let pts: Vec<&Vec<Rational>> = self.vertices.iter().collect();
        rational::affine_dim(&pts)
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == Some(self.dim)
    }

    /// Adds constraints and re-enumerates.
    pub fn intersect(&self, extra: &[HalfSpace]) -> Self {
        let mut hs = self.halfspaces.clone();
        hs.extend_from_slice(extra);
        Self::new(self.dim, hs)
    }

    fn face_dim(&self, face: &[usize]) -> Option<usize> {
        let pts: Vec<&Vec<Rational>> = face.iter().map(|&i| &self.vertices[i]).collect();
        rational::affine_dim(&pts)
    }

    /// Vertices lying on half-space `h`, when they span a facet (codimension 1).
    pub fn facet_vertices(&self, h: usize) -> Option<Vec<usize>> {
        let face: Vec<usize> = (0..self.vertices.len()).filter(|&v| self.tight[h][v]).collect();
        if self.dim == 0 || face.is_empty() {
            return None;
        }
        (self.face_dim(&face) == Some(self.dim - 1)).then_some(face)
    }

    /// Pulling triangulation of the full region: simplices as vertex-index
    /// lists of length `dim + 1`. Empty if the region is not full-dimensional.
    pub fn triangulate(&self) -> Vec<Vec<usize>> {
        if !self.is_full_dimensional() {
            return Vec::new();
        }
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        self.triangulate_face(&all, self.dim)
    }

    /// Triangulation of the facet cut out by half-space `h` (simplices of
    /// length `dim`), or empty if `h` does not support a facet.
    pub fn triangulate_facet(&self, h: usize) -> Vec<Vec<usize>> {
        match self.facet_vertices(h) {
            Some(face) => self.triangulate_face(&face, self.dim - 1),
            None => Vec::new(),
        }
    }

    fn triangulate_face(&self, face: &[usize], k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![face[0]]];
        }
        let apex = face[0];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::new();
        for h in 0..self.halfspaces.len() {
            let sub: Vec<usize> = face.iter().copied().filter(|&v| self.tight[h][v]).collect();
            if sub.len() == face.len() || sub.len() < k || sub.contains(&apex) || seen.contains(&sub) {
                continue;
            }
            if self.face_dim(&sub) != Some(k - 1) {
                continue;
            }
            for mut s in self.triangulate_face(&sub, k - 1) {
                s.push(apex);
                out.push(s);
            }
            seen.insert(sub);
        }
        out
    }

    /// Exact Lebesgue volume of a simplex given by vertex indices.
    pub fn simplex_volume(&self, simplex: &[usize]) -> Rational {
        simplex_volume(&simplex.iter().map(|&i| self.vertices[i].clone()).collect::<Vec<_>>())
    }

    pub fn volume(&self) -> Rational {
        self.triangulate().iter().map(|s| self.simplex_volume(s)).sum()
    }
}

/// `|det(p_i − p_0)| / k!` for `k + 1` points in `ℚᵏ`.
pub fn simplex_volume(points: &[Vec<Rational>]) -> Rational {
    let k = points.len() - 1;
    if k == 0 {
        return rational::int(1);
    }
    let rows: Vec<Vec<Rational>> =
        points[1..].iter().map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect()).collect();
    let fact: i64 = (1..=k as i64).product();
    rational::det(&rows).abs() / rational::int(fact)
}
