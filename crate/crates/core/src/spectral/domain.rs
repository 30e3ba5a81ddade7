//! Regions of the upper half-plane between two vertical geodesics and above
//! a family of geodesic semicircles, cut off at heights `ε` and `Y`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WallShape {
    Vertical { x: f64 },
    Semicircle { center: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicWall {
    pub shape: WallShape,
    pub bc: BoundaryCondition,
}

impl GeodesicWall {
    pub fn vertical(x: f64, bc: BoundaryCondition) -> Self {
        Self { shape: WallShape::Vertical { x }, bc }
    }

    pub fn semicircle(center: f64, radius: f64, bc: BoundaryCondition) -> Self {
        Self { shape: WallShape::Semicircle { center, radius }, bc }
    }
}

/// Condition on the artificial edges `y = ε` and `y = Y`.
///
/// `Asymptotic` imposes the Robin condition satisfied exactly by the
/// leading term of an eigenfunction with `λ = s(1 − s)` in a cusp
/// (`u ~ y^{1−s}` as `y → ∞`) or a funnel (`u ~ y^s` as `y → 0`), with `s`
/// solved self-consistently; bottom edges that close off a cusp on the real
/// axis stay Neumann.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationBc {
    Neumann,
    Dirichlet,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub eps: f64,
    pub top: f64,
    pub bc: TruncationBc,
}

/// One stretch of the lower boundary, listed left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BottomPiece {
    Arc { wall: usize, x0: f64, x1: f64 },
    /// Segment of `y = ε`. `funnel` when it sits over an interval of the
    /// real axis of positive length, rather than closing a cusp.
    Floor { x0: f64, x1: f64, funnel: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicDomain {
    pub name: String,
    pub walls: Vec<GeodesicWall>,
    pub truncation: Truncation,
}

/// Default truncation of the first refinement level.
pub const DEFAULT_EPS: f64 = 0.05;
pub const DEFAULT_TOP: f64 = 8.0;

impl HyperbolicDomain {
    pub fn new(name: impl Into<String>, walls: Vec<GeodesicWall>, truncation: Truncation) -> Result<Self> {
        let d = Self { name: name.into(), walls, truncation };
        d.validate()?;
        Ok(d)
    }

    fn default_truncation() -> Truncation {
        Truncation { eps: DEFAULT_EPS, top: DEFAULT_TOP, bc: TruncationBc::Asymptotic }
    }

    /// `{0 < x < μ/2, |z| > 1}`, half a fundamental domain of the Hecke
    /// group, with Neumann conditions on all three walls.
    pub fn hecke_d(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Self::new(
            format!("hecke_D({mu})"),
            vec![
                GeodesicWall::vertical(0.0, BoundaryCondition::Neumann),
                GeodesicWall::semicircle(0.0, 1.0, BoundaryCondition::Neumann),
                GeodesicWall::vertical(mu / 2.0, BoundaryCondition::Neumann),
            ],
            Self::default_truncation(),
        )
    }

    /// `{0 < x < 1, |z| > 1}`: right angle at `i`, cusps at 1 and ∞.
    pub fn hecke_d1() -> Self {
        Self::new(
            "hecke_D1",
            vec![
                GeodesicWall::vertical(0.0, BoundaryCondition::Neumann),
                GeodesicWall::semicircle(0.0, 1.0, BoundaryCondition::Neumann),
                GeodesicWall::vertical(1.0, BoundaryCondition::Neumann),
            ],
            Self::default_truncation(),
        )
        .expect("valid by construction")
    }

    /// The strip `1 < x < μ/2`.
    pub fn hecke_d2(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Self::new(
            format!("hecke_D2({mu})"),
            vec![
                GeodesicWall::vertical(1.0, BoundaryCondition::Neumann),
                GeodesicWall::vertical(mu / 2.0, BoundaryCondition::Neumann),
            ],
            Self::default_truncation(),
        )
    }

    /// `0 < x < a`, `1 < y < e^L` with Neumann sides and Dirichlet
    /// truncations. Separable: `u = y^{1/2} sin(jπ log y / L)` has
    /// eigenvalue `1/4 + (jπ/L)²`.
    pub fn strip(a: f64, l: f64) -> Result<Self> {
        if !(a > 0.0 && l > 0.0) {
            return Err(Error::InvalidDomain(format!("strip needs a > 0 and L > 0, got a = {a}, L = {l}")));
        }
        Self::new(
            format!("strip({a}, {l})"),
            vec![
                GeodesicWall::vertical(0.0, BoundaryCondition::Neumann),
                GeodesicWall::vertical(a, BoundaryCondition::Neumann),
            ],
            Truncation { eps: 1.0, top: l.exp(), bc: TruncationBc::Dirichlet },
        )
    }

    pub fn strip_eigenvalue(l: f64, j: u32) -> f64 {
        0.25 + (f64::from(j) * std::f64::consts::PI / l).powi(2)
    }

    pub fn with_truncation(&self, eps: f64, top: f64) -> Result<Self> {
        let mut d = self.clone();
        d.truncation.eps = eps;
        d.truncation.top = top;
        d.validate()?;
        Ok(d)
    }

    pub fn with_truncation_bc(&self, bc: TruncationBc) -> Self {
        let mut d = self.clone();
        d.truncation.bc = bc;
        d
    }

    pub fn with_wall_bc(&self, wall: usize, bc: BoundaryCondition) -> Result<Self> {
        let mut d = self.clone();
        let w = d
            .walls
            .get_mut(wall)
            .ok_or_else(|| Error::InvalidDomain(format!("no wall {wall}")))?;
        w.bc = bc;
        Ok(d)
    }

    fn verticals(&self) -> Vec<(usize, f64)> {
        self.walls
            .iter()
            .enumerate()
            .filter_map(|(i, w)| match w.shape {
                WallShape::Vertical { x } => Some((i, x)),
                WallShape::Semicircle { .. } => None,
            })
            .collect()
    }

    /// Semicircles as `(wall index, centre, radius)`.
    pub fn arcs(&self) -> Vec<(usize, f64, f64)> {
        self.walls
            .iter()
            .enumerate()
            .filter_map(|(i, w)| match w.shape {
                WallShape::Semicircle { center, radius } => Some((i, center, radius)),
                WallShape::Vertical { .. } => None,
            })
            .collect()
    }

    /// `(wall index, x)` of the left side.
    pub fn left(&self) -> (usize, f64) {
        let v = self.verticals();
        if v[0].1 < v[1].1 {
            v[0]
        } else {
            v[1]
        }
    }

    pub fn right(&self) -> (usize, f64) {
        let v = self.verticals();
        if v[0].1 < v[1].1 {
            v[1]
        } else {
            v[0]
        }
    }

    pub fn eps(&self) -> f64 {
        self.truncation.eps
    }

    pub fn top(&self) -> f64 {
        self.truncation.top
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        let v = self.verticals();
        if v.len() != 2 {
            return bad(format!("need exactly two vertical walls, got {}", v.len()));
        }
        let (l, r) = (self.left().1, self.right().1);
        if !(l.is_finite() && r.is_finite() && l < r) {
            return bad(format!("vertical walls x = {l} and x = {r} bound no region"));
        }
        let Truncation { eps, top, .. } = self.truncation;
        if !(eps > 0.0 && top > eps && top.is_finite()) {
            return bad(format!("truncation needs 0 < eps < Y, got eps = {eps}, Y = {top}"));
        }
        let mut spans = Vec::new();
        for (_, c, rad) in self.arcs() {
            if !(rad > 0.0 && rad.is_finite() && c.is_finite()) {
                return bad(format!("semicircle radius must be positive, got {rad}"));
            }
            if let Some((a, b)) = self.raised_span(c, rad) {
                if self.arc_height(c, rad, 0.5 * (a + b)) >= top {
                    return bad(format!("semicircle at {c} with radius {rad} reaches the top truncation"));
                }
                spans.push((a, b));
            }
        }
        spans.sort_by(|p, q| p.0.total_cmp(&q.0));
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            return bad("overlapping semicircles are not supported".into());
        }
        for (_, c, rad) in self.arcs() {
            for x in [l, r] {
                if self.arc_height(c, rad, x) >= top {
                    return bad("a semicircle covers a vertical wall up to the top truncation".into());
                }
            }
        }
        Ok(())
    }

    fn arc_height(&self, c: f64, r: f64, x: f64) -> f64 {
        (r * r - (x - c).powi(2)).max(0.0).sqrt()
    }

    /// Part of `[left, right]` where the semicircle rises above `ε`.
    fn raised_span(&self, c: f64, r: f64) -> Option<(f64, f64)> {
        let eps = self.truncation.eps;
        if r <= eps {
            return None;
        }
        let half = (r * r - eps * eps).sqrt();
        let (a, b) = ((c - half).max(self.left().1), (c + half).min(self.right().1));
        (a < b).then_some((a, b))
    }

    /// Height of the lower boundary above `x`.
    pub fn floor_height(&self, x: f64) -> f64 {
        self.arcs()
            .iter()
            .map(|&(_, c, r)| self.arc_height(c, r, x))
            .fold(self.truncation.eps, f64::max)
    }

    /// The lower boundary from left to right.
    pub fn bottom_pieces(&self) -> Vec<BottomPiece> {
        let (l, r) = (self.left().1, self.right().1);
        let mut spans: Vec<(usize, f64, f64)> = self
            .arcs()
            .iter()
            .filter_map(|&(i, c, rad)| self.raised_span(c, rad).map(|(a, b)| (i, a, b)))
            .collect();
        spans.sort_by(|p, q| p.1.total_cmp(&q.1));
        let mut pieces = Vec::new();
        let mut x = l;
        for (wall, a, b) in spans {
            if a > x {
                pieces.push(self.floor_piece(x, a));
            }
            pieces.push(BottomPiece::Arc { wall, x0: a, x1: b });
            x = b;
        }
        if x < r {
            pieces.push(self.floor_piece(x, r));
        }
        pieces
    }

    fn floor_piece(&self, x0: f64, x1: f64) -> BottomPiece {
        // measure of [x0, x1] not shadowed by any full semicircle
        let mut covered: Vec<(f64, f64)> = self
            .arcs()
            .iter()
            .map(|&(_, c, r)| ((c - r).max(x0), (c + r).min(x1)))
            .filter(|(a, b)| a < b)
            .collect();
        covered.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut free = 0.0;
        let mut x = x0;
        for (a, b) in covered {
            if a > x {
                free += a - x;
            }
            x = x.max(b);
        }
        free += (x1 - x).max(0.0);
        BottomPiece::Floor { x0, x1, funnel: free > 1e-12 * (1.0 + x1.abs()) }
    }

    pub fn has_funnel(&self) -> bool {
        self.bottom_pieces()
            .iter()
            .any(|p| matches!(p, BottomPiece::Floor { funnel: true, .. }))
    }

    /// Strictly inside the truncated region.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (l, r) = (self.left().1, self.right().1);
        x > l
            && x < r
            && y > self.truncation.eps
            && y < self.truncation.top
            && self.arcs().iter().all(|&(_, c, rad)| (x - c).hypot(y) > rad)
    }

    /// Euclidean distance to the nearest boundary curve (walls, arcs and
    /// truncation lines).
    pub fn boundary_distance(&self, x: f64, y: f64) -> f64 {
        let (l, r) = (self.left().1, self.right().1);
        let mut d = (x - l).min(r - x).min(y - self.truncation.eps).min(self.truncation.top - y);
        for (_, c, rad) in self.arcs() {
            d = d.min((x - c).hypot(y) - rad);
        }
        d
    }

    /// Hyperbolic area `∫∫ dx dy / y²` of the truncated region.
    pub fn area(&self) -> f64 {
        let (l, r) = (self.left().1, self.right().1);
        let mut total = -(r - l) / self.truncation.top;
        for piece in self.bottom_pieces() {
            total += match piece {
                BottomPiece::Floor { x0, x1, .. } => (x1 - x0) / self.truncation.eps,
                BottomPiece::Arc { wall, x0, x1 } => {
                    let WallShape::Semicircle { center, radius } = self.walls[wall].shape else {
                        unreachable!("arc pieces come from semicircles")
                    };
                    ((x1 - center) / radius).asin() - ((x0 - center) / radius).asin()
                }
            };
        }
        total
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 2.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must exceed 2")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// Composite Simpson on `∫ (1/floor(x) − 1/Y) dx`, with the arc
    /// endpoints as breakpoints.
    fn area_by_quadrature(d: &HyperbolicDomain) -> f64 {
        let mut breaks = vec![d.left().1, d.right().1];
        for p in d.bottom_pieces() {
            match p {
                BottomPiece::Arc { x0, x1, .. } | BottomPiece::Floor { x0, x1, .. } => breaks.extend([x0, x1]),
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let f = |x: f64| 1.0 / d.floor_height(x) - 1.0 / d.top();
        breaks
            .windows(2)
            .map(|w| {
                // substitute x = a + (b−a)(1 − cos t)/2 to tame the
                // square-root behaviour at arc feet
                let (a, b) = (w[0], w[1]);
                let n = 20_000;
                let g = |t: f64| f(a + (b - a) * (1.0 - t.cos()) / 2.0) * (b - a) * t.sin() / 2.0;
                let hstep = PI / n as f64;
                let mut s = g(0.0) + g(PI);
                for i in 1..n {
                    s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * hstep);
                }
                s * hstep / 3.0
            })
            .sum()
    }

    #[test]
    fn d1_area_tends_to_half_pi() {
        let d = HyperbolicDomain::hecke_d1().with_truncation(1e-6, 1e7).unwrap();
        assert_abs_diff_eq!(d.area(), PI / 2.0, epsilon = 1e-5);
    }

    #[test]
    fn area_matches_quadrature() {
        for d in [
            HyperbolicDomain::hecke_d1(),
            HyperbolicDomain::hecke_d(3.0).unwrap(),
            HyperbolicDomain::hecke_d2(3.0).unwrap(),
            HyperbolicDomain::strip(1.0, 2.0).unwrap(),
        ] {
            assert_abs_diff_eq!(d.area(), area_by_quadrature(&d), epsilon = 1e-6);
        }
    }

    #[test]
    fn area_is_additive_across_the_cut() {
        for mu in [2.5, 3.0, 4.0, 6.0] {
            let d = HyperbolicDomain::hecke_d(mu).unwrap();
            let sum = HyperbolicDomain::hecke_d1().area() + HyperbolicDomain::hecke_d2(mu).unwrap().area();
            assert_abs_diff_eq!(d.area(), sum, epsilon = 1e-9);
        }
    }

    #[test]
    fn named_domains() {
        let d2 = HyperbolicDomain::hecke_d2(3.0).unwrap();
        assert_eq!((d2.left().1, d2.right().1), (1.0, 1.5));
        assert!(d2.arcs().is_empty());
        assert!(d2.has_funnel());
        let d1 = HyperbolicDomain::hecke_d1();
        assert!(!d1.has_funnel(), "D1 only has cusps");
        assert!(HyperbolicDomain::hecke_d(3.0).unwrap().has_funnel());
        assert_eq!(
            HyperbolicDomain::hecke_d1().bottom_pieces().len(),
            2,
            "arc then the floor closing the cusp at 1"
        );
        assert!(HyperbolicDomain::hecke_d(2.0).is_err());
    }

    #[test]
    fn inconsistent_walls_are_rejected() {
        let t = Truncation { eps: 0.1, top: 5.0, bc: TruncationBc::Neumann };
        let n = BoundaryCondition::Neumann;
        let v = |x| GeodesicWall::vertical(x, n);
        assert!(HyperbolicDomain::new("one wall", vec![v(0.0)], t).is_err());
        assert!(HyperbolicDomain::new("empty", vec![v(1.0), v(1.0)], t).is_err());
        assert!(HyperbolicDomain::new("tall arc", vec![v(0.0), v(1.0), GeodesicWall::semicircle(0.5, 6.0, n)], t).is_err());
        assert!(HyperbolicDomain::new("bad radius", vec![v(0.0), v(1.0), GeodesicWall::semicircle(0.5, -1.0, n)], t).is_err());
        let overlapping = vec![v(0.0), v(2.0), GeodesicWall::semicircle(0.5, 1.0, n), GeodesicWall::semicircle(1.5, 1.0, n)];
        assert!(HyperbolicDomain::new("overlap", overlapping, t).is_err());
        assert!(HyperbolicDomain::hecke_d1().with_truncation(0.5, 0.4).is_err());
    }

    #[test]
    fn containment() {
        let d = HyperbolicDomain::hecke_d(3.0).unwrap();
        assert!(d.contains(0.5, 1.5));
        assert!(!d.contains(0.5, 0.5));
        assert!(d.contains(1.2, 0.1));
        assert!(!d.contains(1.6, 1.0));
        assert!(d.boundary_distance(0.5, 1.5) > 0.0);
    }
}
