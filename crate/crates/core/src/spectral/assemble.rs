//! Piecewise-linear discretization of the Rayleigh quotient
//! `∫|∇u|² dx dy / ∫ u² y⁻² dx dy`.
//!
//! The Dirichlet energy is conformally invariant in two dimensions, so the
//! stiffness matrix is the Euclidean one; all of the hyperbolic metric sits
//! in the weighted mass matrix.

use rayon::prelude::*;

use super::mesh::{EdgeCondition, Mesh};
use super::sparse::CsrMatrix;

/// Six-point, degree-4 rule on the reference triangle: barycentric
/// coordinates `(a, b)` of the last two vertices and weights summing to 1.
const QUAD: [(f64, f64, f64); 6] = [
    (0.445_948_490_915_965, 0.445_948_490_915_965, 0.223_381_589_678_011),
    (0.445_948_490_915_965, 0.108_103_018_168_070, 0.223_381_589_678_011),
    (0.108_103_018_168_070, 0.445_948_490_915_965, 0.223_381_589_678_011),
    (0.091_576_213_509_771, 0.091_576_213_509_771, 0.109_951_743_655_322),
    (0.091_576_213_509_771, 0.816_847_572_980_459, 0.109_951_743_655_322),
    (0.816_847_572_980_459, 0.091_576_213_509_771, 0.109_951_743_655_322),
];

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// Stiffness on all vertices.
    pub stiffness: CsrMatrix,
    /// Mass with weight `1/y²` on all vertices.
    pub mass: CsrMatrix,
    /// Euclidean boundary mass of the cusp-Robin edges.
    pub top_mass: CsrMatrix,
    /// Euclidean boundary mass of the funnel-Robin edges.
    pub funnel_mass: CsrMatrix,
    pub dirichlet: Vec<bool>,
    pub eps: f64,
    pub top: f64,
    free: Vec<Option<usize>>,
    n_free: usize,
}

type Local = ([usize; 3], [[f64; 3]; 3], [[f64; 3]; 3]);

fn element(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let (e1, e2) = ([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]);
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    let area = 0.5 * det.abs();
    // gradients of the barycentric coordinates
    let g1 = [e2[1] / det, -e2[0] / det];
    let g2 = [-e1[1] / det, e1[0] / det];
    let g = [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2];
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    for &(a, b, w) in &QUAD {
        let phi = [1.0 - a - b, a, b];
        let y = phi[0] * p[0][1] + phi[1] * p[1][1] + phi[2] * p[2][1];
        let wt = w * area / (y * y);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += wt * phi[i] * phi[j];
            }
        }
    }
    (k, m)
}

fn edge_mass(mesh: &Mesh, cond: EdgeCondition) -> CsrMatrix {
    let mut entries = Vec::new();
    for e in mesh.boundary.iter().filter(|e| e.condition == cond) {
        let (p, q) = (mesh.vertices[e.a], mesh.vertices[e.b]);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        entries.extend([
            (e.a, e.a, len / 3.0),
            (e.b, e.b, len / 3.0),
            (e.a, e.b, len / 6.0),
            (e.b, e.a, len / 6.0),
        ]);
    }
    CsrMatrix::from_triplets(mesh.vertices.len(), entries)
}

pub fn assemble(mesh: &Mesh) -> AssembledSystem {
    let n = mesh.vertices.len();
    let locals: Vec<Local> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            let (k, m) = element(t.map(|i| mesh.vertices[i]));
            (*t, k, m)
        })
        .collect();
    let mut ke = Vec::with_capacity(9 * locals.len());
    let mut me = Vec::with_capacity(9 * locals.len());
    for (t, k, m) in &locals {
        for i in 0..3 {
            for j in 0..3 {
                ke.push((t[i], t[j], k[i][j]));
                me.push((t[i], t[j], m[i][j]));
            }
        }
    }
    let dirichlet = mesh.dirichlet_vertices();
    let mut free = vec![None; n];
    let mut n_free = 0;
    for (slot, &fixed) in free.iter_mut().zip(&dirichlet) {
        if !fixed {
            *slot = Some(n_free);
            n_free += 1;
        }
    }
    AssembledSystem {
        stiffness: CsrMatrix::from_triplets(n, ke),
        mass: CsrMatrix::from_triplets(n, me),
        top_mass: edge_mass(mesh, EdgeCondition::CuspRobin),
        funnel_mass: edge_mass(mesh, EdgeCondition::FunnelRobin),
        dirichlet,
        eps: mesh.eps,
        top: mesh.top,
        free,
        n_free,
    }
}

impl AssembledSystem {
    pub fn free_count(&self) -> usize {
        self.n_free
    }

    pub fn has_robin(&self) -> bool {
        self.top_mass.nnz() > 0 || self.funnel_mass.nnz() > 0
    }

    /// Stiffness with the asymptotic Robin terms for exponent `s`:
    /// `K − ((1−s)/Y) M_top + (s/ε) M_funnel`, on all vertices.
    pub fn stiffness_at(&self, s: f64) -> CsrMatrix {
        CsrMatrix::combine(&[
            (1.0, &self.stiffness),
            (-(1.0 - s) / self.top, &self.top_mass),
            (s / self.eps, &self.funnel_mass),
        ])
    }

    /// The pencil restricted to the free (non-Dirichlet) vertices.
    pub fn reduced_pencil(&self, s: f64) -> (CsrMatrix, CsrMatrix) {
        (
            self.stiffness_at(s).restrict(&self.free, self.n_free),
            self.mass.restrict(&self.free, self.n_free),
        )
    }

    /// Restricts a vector on all vertices to the free ones.
    pub fn restrict_vector(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (i, slot) in self.free.iter().enumerate() {
            if let Some(k) = slot {
                out[*k] = full[i];
            }
        }
        out
    }

    /// Extends a vector on free vertices by zero.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.free.iter().map(|slot| slot.map_or(0.0, |k| reduced[k])).collect()
    }
}
