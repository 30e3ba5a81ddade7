//! Triangulation of a truncated domain, graded so that triangles have
//! roughly constant hyperbolic size `h`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::domain::{BottomPiece, BoundaryCondition, HyperbolicDomain, TruncationBc, WallShape};
use crate::{Error, Result};

/// Where a boundary edge lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Wall(usize),
    Top,
    Bottom { funnel: bool },
}

impl EdgeKind {
    pub fn is_truncation(self) -> bool {
        !matches!(self, EdgeKind::Wall(_))
    }
}

/// The condition the weak form imposes on an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeCondition {
    Neumann,
    Dirichlet,
    /// Robin `∂ₙu = (1 − s) u / Y` on the top edge.
    CuspRobin,
    /// Robin `∂ₙu = −s u / ε` on a funnel floor.
    FunnelRobin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    pub condition: EdgeCondition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
    pub h: f64,
    pub eps: f64,
    pub top: f64,
}

/// Largest accepted target edge length.
pub const MAX_H: f64 = 0.5;

/// Minimum angle requested from the refiner.
const ANGLE_LIMIT_DEG: f64 = 25.0;

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn min_angle_deg(&self) -> f64 {
        let mut best = f64::INFINITY;
        for t in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[t[k]];
                let q = self.vertices[t[(k + 1) % 3]];
                let r = self.vertices[t[(k + 2) % 3]];
                let u = [q[0] - p[0], q[1] - p[1]];
                let v = [r[0] - p[0], r[1] - p[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                best = best.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        best
    }

    /// Vertices fixed to zero by a Dirichlet edge.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut fixed = vec![false; self.vertices.len()];
        for e in &self.boundary {
            if e.condition == EdgeCondition::Dirichlet {
                fixed[e.a] = true;
                fixed[e.b] = true;
            }
        }
        fixed
    }

    /// Hyperbolic distance from each vertex to the nearest truncation line
    /// that carries boundary edges.
    pub fn truncation_distance(&self) -> Vec<f64> {
        let has_top = self.boundary.iter().any(|e| e.kind == EdgeKind::Top);
        let has_bottom = self.boundary.iter().any(|e| matches!(e.kind, EdgeKind::Bottom { .. }));
        self.vertices
            .iter()
            .map(|v| {
                let mut d = f64::INFINITY;
                if has_top {
                    d = d.min((self.top / v[1]).ln());
                }
                if has_bottom {
                    d = d.min((v[1] / self.eps).ln());
                }
                d.max(0.0)
            })
            .collect()
    }
}

/// Boundary polygon, counter-clockwise, starting at the lower left corner.
fn boundary_polygon(domain: &HyperbolicDomain, h: f64) -> Vec<[f64; 2]> {
    let (eps, top) = (domain.eps(), domain.top());
    let (l, r) = (domain.left().1, domain.right().1);
    let mut pts = Vec::new();

    for piece in domain.bottom_pieces() {
        match piece {
            BottomPiece::Floor { x0, x1, .. } => {
                let n = ((x1 - x0) / (h * eps)).ceil().max(1.0) as usize;
                pts.extend((0..n).map(|i| [x0 + (x1 - x0) * i as f64 / n as f64, eps]));
            }
            BottomPiece::Arc { wall, x0, x1 } => {
                let WallShape::Semicircle { center, radius } = domain.walls[wall].shape else {
                    unreachable!()
                };
                let theta = |x: f64| ((x - center) / radius).clamp(-1.0, 1.0).acos();
                let (t0, t1) = (theta(x0), theta(x1));
                // u = log tan(θ/2) is hyperbolic arclength along the geodesic;
                // the θ bound keeps the sagitta of each chord below h²
                let u = |t: f64| (t / 2.0).tan().ln();
                let by_length = ((u(t0) - u(t1)).abs() / h).ceil();
                let by_sagitta = ((t0 - t1).abs() / ((8.0 / radius).sqrt() * h)).ceil();
                let n = by_length.max(by_sagitta).max(1.0) as usize;
                let (u0, u1) = (u(t0), u(t1));
                pts.extend((0..n).map(|i| {
                    let ui = u0 + (u1 - u0) * i as f64 / n as f64;
                    let t = 2.0 * ui.exp().atan();
                    [center + radius * t.cos(), radius * t.sin()]
                }));
            }
        }
    }

    let log_run = |x: f64, ya: f64, yb: f64, out: &mut Vec<[f64; 2]>| {
        let n = ((yb / ya).ln().abs() / h).ceil().max(1.0) as usize;
        let (la, lb) = (ya.ln(), yb.ln());
        out.extend((0..n).map(|i| [x, (la + (lb - la) * i as f64 / n as f64).exp()]));
    };
    log_run(r, domain.floor_height(r), top, &mut pts);
    let n = ((r - l) / (h * top)).ceil().max(1.0) as usize;
    pts.extend((0..n).map(|i| [r - (r - l) * i as f64 / n as f64, top]));
    log_run(l, top, domain.floor_height(l), &mut pts);
    pts
}

/// Staggered rows with spacing proportional to `y`, kept away from the
/// boundary by half a local mesh width.
fn interior_points(domain: &HyperbolicDomain, h: f64) -> Vec<[f64; 2]> {
    let (l, r) = (domain.left().1, domain.right().1);
    let mut pts = Vec::new();
    let mut y = domain.eps();
    let mut row = 0usize;
    while y < domain.top() {
        let dx = h * y;
        let mut x = l + if row % 2 == 1 { 0.5 * dx } else { 0.0 };
        while x < r {
            if domain.contains(x, y) && domain.boundary_distance(x, y) > 0.5 * h * y {
                pts.push([x, y]);
            }
            x += dx;
        }
        y *= 1.0 + h * 3f64.sqrt() / 2.0;
        row += 1;
    }
    pts
}

fn classify_edge(domain: &HyperbolicDomain, h: f64, p: [f64; 2], q: [f64; 2]) -> Option<EdgeKind> {
    let m = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
    let scale = 1e-9 * (1.0 + m[0].abs() + m[1].abs());
    let on = |a: f64, b: f64| (a - b).abs() <= scale && (a - b).abs() <= 1e-9 * (1.0 + a.abs());
    let (li, l) = domain.left();
    let (ri, r) = domain.right();
    if on(p[0], l) && on(q[0], l) {
        return Some(EdgeKind::Wall(li));
    }
    if on(p[0], r) && on(q[0], r) {
        return Some(EdgeKind::Wall(ri));
    }
    if on(p[1], domain.top()) && on(q[1], domain.top()) {
        return Some(EdgeKind::Top);
    }
    let eps = domain.eps();
    if (p[1] - eps).abs() <= 1e-12 * eps.max(1.0) && (q[1] - eps).abs() <= 1e-12 * eps.max(1.0) {
        let funnel = domain.bottom_pieces().iter().any(|piece| match *piece {
            BottomPiece::Floor { x0, x1, funnel } => funnel && m[0] >= x0 - scale && m[0] <= x1 + scale,
            BottomPiece::Arc { .. } => false,
        });
        return Some(EdgeKind::Bottom { funnel });
    }
    let chord = (q[0] - p[0]).hypot(q[1] - p[1]);
    domain
        .arcs()
        .into_iter()
        .filter_map(|(i, c, rad)| {
            let dev = rad - (m[0] - c).hypot(m[1]);
            // refinement splits constrained chords at their midpoints, so a
            // boundary edge may sit inside a chord of the original polygon
            let spacing = chord.max(h * m[1]);
            let sagitta = spacing * spacing / (8.0 * rad);
            let slack = 1e-9 * rad;
            (dev >= -slack && dev <= 1.01 * sagitta + slack).then_some((i, dev.abs()))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| EdgeKind::Wall(i))
}

fn condition_for(domain: &HyperbolicDomain, kind: EdgeKind) -> EdgeCondition {
    match kind {
        EdgeKind::Wall(i) => match domain.walls[i].bc {
            BoundaryCondition::Neumann => EdgeCondition::Neumann,
            BoundaryCondition::Dirichlet => EdgeCondition::Dirichlet,
        },
        _ => match (domain.truncation.bc, kind) {
            (TruncationBc::Neumann, _) => EdgeCondition::Neumann,
            (TruncationBc::Dirichlet, _) => EdgeCondition::Dirichlet,
            (TruncationBc::Asymptotic, EdgeKind::Top) => EdgeCondition::CuspRobin,
            (TruncationBc::Asymptotic, EdgeKind::Bottom { funnel: true }) => EdgeCondition::FunnelRobin,
            (TruncationBc::Asymptotic, _) => EdgeCondition::Neumann,
        },
    }
}

/// Constrained Delaunay triangulation of the truncated domain, refined to
/// a minimum angle of 25°. Curved walls become inscribed polylines.
pub fn build_mesh(domain: &HyperbolicDomain, h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h <= MAX_H) {
        return Err(Error::Mesh(format!("target size h = {h} must lie in (0, {MAX_H}]")));
    }
    let outline = boundary_polygon(domain, h);
    let inner = interior_points(domain, h);

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let insert_err = |e: spade::InsertionError| Error::Mesh(format!("triangulation failed: {e:?}"));
    let handles = outline
        .iter()
        .map(|p| cdt.insert(Point2::new(p[0], p[1])))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(insert_err)?;
    for i in 0..handles.len() {
        let (a, b) = (handles[i], handles[(i + 1) % handles.len()]);
        if a != b && cdt.can_add_constraint(a, b) {
            cdt.add_constraint(a, b);
        } else if a != b {
            return Err(Error::Mesh("boundary polygon self-intersects".into()));
        }
    }
    for p in &inner {
        cdt.insert(Point2::new(p[0], p[1])).map_err(insert_err)?;
    }

    let budget = 20 * cdt.num_vertices() + 1000;
    let result = cdt.refine(
        RefinementParameters::new()
            .with_angle_limit(AngleLimit::from_deg(ANGLE_LIMIT_DEG))
            .exclude_outer_faces(true)
            .with_max_additional_vertices(budget),
    );
    if !result.refinement_complete {
        return Err(Error::Mesh("mesh refinement did not converge".into()));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.into_iter().collect();

    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (slot, v) in tri.iter_mut().zip(face.vertices()) {
            let key = v.fix().index();
            *slot = *index.entry(key).or_insert_with(|| {
                let p = v.position();
                vertices.push([p.x, p.y]);
                vertices.len() - 1
            });
        }
        if signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0 {
            tri.swap(1, 2);
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::Mesh(format!("h = {h} is too coarse to resolve {}", domain.name)));
    }

    let mut edge_use: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edge_use.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut boundary = Vec::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if edge_use[&(a.min(b), a.max(b))] == 1 {
                let kind = classify_edge(domain, h, vertices[a], vertices[b]).ok_or_else(|| {
                    Error::Mesh(format!(
                        "boundary edge {:?}-{:?} lies on no wall of {}",
                        vertices[a], vertices[b], domain.name
                    ))
                })?;
                boundary.push(BoundaryEdge { a, b, kind, condition: condition_for(domain, kind) });
            }
        }
    }

    Ok(Mesh { vertices, triangles, boundary, h, eps: domain.eps(), top: domain.top() })
}
