//! Planar inversive geometry.
//!
//! Circles and lines are stored in augmented curvature-centre coordinates
//! `(b̂, b, b·x, b·y)`, where `b` is the signed curvature and `b̂` the
//! curvature of the image under inversion in the unit circle. With the
//! bilinear form
//!
//! ```text
//! ⟨c, c'⟩ = cx·cx' + cy·cy' − (b·b̂' + b̂·b') / 2
//! ```
//!
//! every oriented circle has `⟨c, c⟩ = 1`, and reflection in a mirror `m`
//! is the linear map `c ↦ c − 2⟨c, m⟩ m`. Lines are the `b = 0` case, so
//! callers never branch on circle-versus-line.
//!
//! Orientation: a circle with `b > 0` bounds its disk, `b < 0` bounds the
//! outside of its disk (the bounding circle of a packing). Two oriented
//! circles with disjoint interiors that touch have product `−1`; touching
//! circles whose interiors are nested have product `+1`. Use [`is_tangent`]
//! and [`classify`] rather than comparing raw signs.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance for the product-based incidence predicates, scaled by
/// the size of the coordinates involved.
pub const INCIDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// True for points of the open upper half-plane.
    pub fn is_interior(&self) -> bool {
        self.y > 0.0
    }
}

/// `cosh` of the hyperbolic distance between two upper half-plane points.
pub fn cosh_distance(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversiveCircle {
    /// Co-curvature `b̂`.
    pub cocurv: f64,
    /// Signed curvature `b`; zero for lines.
    pub curv: f64,
    /// `b·x` for circles, the unit normal's x component for lines.
    pub cx: f64,
    /// `b·y` for circles, the unit normal's y component for lines.
    pub cy: f64,
}

impl InversiveCircle {
    pub const fn new(cocurv: f64, curv: f64, cx: f64, cy: f64) -> Self {
        Self { cocurv, curv, cx, cy }
    }

    /// Circle whose interior is the open disk of radius `r` about `(x, y)`.
    pub fn disk(x: f64, y: f64, r: f64) -> Self {
        Self::oriented(x, y, r)
    }

    /// Circle whose interior is the complement of the closed disk, as for the
    /// outer circle of a bounded packing.
    pub fn bounding(x: f64, y: f64, r: f64) -> Self {
        Self::oriented(x, y, -r)
    }

    fn oriented(x: f64, y: f64, signed_radius: f64) -> Self {
        let b = 1.0 / signed_radius;
        let cocurv = (x * x + y * y - signed_radius * signed_radius) / signed_radius;
        Self::new(cocurv, b, b * x, b * y)
    }

    /// The line `{p : n·p = offset}` with interior `{p : n·p > offset}`.
    /// The normal is normalised here.
    pub fn line(normal: (f64, f64), offset: f64) -> Self {
        let len = normal.0.hypot(normal.1);
        let (nx, ny) = (normal.0 / len, normal.1 / len);
        Self::new(2.0 * offset / len, 0.0, nx, ny)
    }

    pub fn is_line(&self) -> bool {
        self.curv == 0.0
    }

    pub fn center(&self) -> Option<Point> {
        (!self.is_line()).then(|| Point::new(self.cx / self.curv, self.cy / self.curv))
    }

    pub fn radius(&self) -> Option<f64> {
        (!self.is_line()).then(|| 1.0 / self.curv.abs())
    }

    /// The same circle with the opposite interior.
    pub fn flipped(&self) -> Self {
        Self::new(-self.cocurv, -self.curv, -self.cx, -self.cy)
    }

    /// `[cocurv, curv, cx, cy]`.
    pub fn coords(&self) -> [f64; 4] {
        [self.cocurv, self.curv, self.cx, self.cy]
    }

    pub fn product(&self, other: &Self) -> f64 {
        inversive_product(self, other)
    }

    /// `⟨c, c⟩`, which is 1 for every valid circle.
    pub fn norm(&self) -> f64 {
        inversive_product(self, self)
    }

    fn magnitude(&self) -> f64 {
        self.cocurv
            .abs()
            .max(self.curv.abs())
            .max(self.cx.abs())
            .max(self.cy.abs())
    }

    /// Tangency point with `other`, valid when the two are tangent with
    /// disjoint interiors and at least one of them is a proper circle.
    pub fn tangency_point(&self, other: &Self) -> Option<Point> {
        let denom = self.curv + other.curv;
        (denom != 0.0).then(|| Point::new((self.cx + other.cx) / denom, (self.cy + other.cy) / denom))
    }
}

pub fn inversive_product(c1: &InversiveCircle, c2: &InversiveCircle) -> f64 {
    c1.cx * c2.cx + c1.cy * c2.cy - 0.5 * (c1.curv * c2.cocurv + c1.cocurv * c2.curv)
}

/// Relative position of two oriented circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Incidence {
    /// The boundaries cross at two points.
    Intersecting,
    /// Touching, interiors disjoint (product −1).
    ExternallyTangent,
    /// Touching, one interior inside the other (product +1).
    InternallyTangent,
    /// Interiors disjoint and boundaries apart.
    Separated,
    /// One interior strictly inside the other.
    Nested,
}

fn tolerance(c1: &InversiveCircle, c2: &InversiveCircle) -> f64 {
    INCIDENCE_TOL * (c1.magnitude() * c2.magnitude()).max(1.0)
}

pub fn classify(c1: &InversiveCircle, c2: &InversiveCircle) -> Incidence {
    let p = inversive_product(c1, c2);
    let tol = tolerance(c1, c2);
    if (p + 1.0).abs() <= tol {
        Incidence::ExternallyTangent
    } else if (p - 1.0).abs() <= tol {
        Incidence::InternallyTangent
    } else if p < -1.0 {
        Incidence::Separated
    } else if p > 1.0 {
        Incidence::Nested
    } else {
        Incidence::Intersecting
    }
}

pub fn is_tangent(c1: &InversiveCircle, c2: &InversiveCircle) -> bool {
    matches!(
        classify(c1, c2),
        Incidence::ExternallyTangent | Incidence::InternallyTangent
    )
}

/// The packing condition: oriented interiors do not overlap.
pub fn interiors_disjoint(c1: &InversiveCircle, c2: &InversiveCircle) -> bool {
    inversive_product(c1, c2) <= -1.0 + tolerance(c1, c2)
}

pub fn reflect_point(mirror: &InversiveCircle, p: Point) -> Result<Point> {
    if mirror.is_line() {
        let offset = 0.5 * mirror.cocurv;
        let t = 2.0 * (mirror.cx * p.x + mirror.cy * p.y - offset);
        return Ok(Point::new(p.x - t * mirror.cx, p.y - t * mirror.cy));
    }
    let c = Point::new(mirror.cx / mirror.curv, mirror.cy / mirror.curv);
    let (dx, dy) = (p.x - c.x, p.y - c.y);
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return Err(Error::Singular(format!(
            "point ({}, {}) is the centre of the mirror",
            p.x, p.y
        )));
    }
    let r2 = 1.0 / (mirror.curv * mirror.curv);
    Ok(Point::new(c.x + r2 * dx / d2, c.y + r2 * dy / d2))
}

pub fn reflect_circle(mirror: &InversiveCircle, c: &InversiveCircle) -> InversiveCircle {
    let t = 2.0 * inversive_product(c, mirror);
    InversiveCircle::new(
        c.cocurv - t * mirror.cocurv,
        c.curv - t * mirror.curv,
        c.cx - t * mirror.cx,
        c.cy - t * mirror.cy,
    )
}

/// An inversive circle with integer coordinates.
///
/// Reflections only involve `2⟨c, m⟩`, which is an integer whenever both
/// arguments are integral, so orbits of integral configurations can be
/// followed exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntegralCircle {
    pub cocurv: i128,
    pub curv: i128,
    pub cx: i128,
    pub cy: i128,
}

impl IntegralCircle {
    pub const fn new(cocurv: i128, curv: i128, cx: i128, cy: i128) -> Self {
        Self { cocurv, curv, cx, cy }
    }

    /// `2⟨self, other⟩`, exact.
    pub fn double_product(&self, other: &Self) -> Result<i128> {
        let ovf = || Error::Overflow("inversive product");
        let a = self.cx.checked_mul(other.cx).ok_or_else(ovf)?;
        let b = self.cy.checked_mul(other.cy).ok_or_else(ovf)?;
        let c = self.curv.checked_mul(other.cocurv).ok_or_else(ovf)?;
        let d = self.cocurv.checked_mul(other.curv).ok_or_else(ovf)?;
        a.checked_add(b)
            .and_then(|s| s.checked_mul(2))
            .and_then(|s| s.checked_sub(c))
            .and_then(|s| s.checked_sub(d))
            .ok_or_else(ovf)
    }

    /// True iff `⟨c, c⟩ = 1` exactly.
    pub fn is_unit(&self) -> bool {
        matches!(self.double_product(self), Ok(2))
    }

    pub fn reflect(&self, mirror: &Self) -> Result<Self> {
        let t = self.double_product(mirror)?;
        let ovf = || Error::Overflow("reflection");
        let step = |v: i128, m: i128| t.checked_mul(m).and_then(|tm| v.checked_sub(tm)).ok_or_else(ovf);
        Ok(Self::new(
            step(self.cocurv, mirror.cocurv)?,
            step(self.curv, mirror.curv)?,
            step(self.cx, mirror.cx)?,
            step(self.cy, mirror.cy)?,
        ))
    }

    pub fn to_real(&self) -> InversiveCircle {
        InversiveCircle::new(
            self.cocurv as f64,
            self.curv as f64,
            self.cx as f64,
            self.cy as f64,
        )
    }

    /// Rounds `c` if every coordinate is within `tol` of an integer.
    pub fn from_real(c: &InversiveCircle, tol: f64) -> Option<Self> {
        let round = |v: f64| {
            let r = v.round();
            ((v - r).abs() <= tol && r.abs() < 1e30).then_some(r as i128)
        };
        Some(Self::new(round(c.cocurv)?, round(c.curv)?, round(c.cx)?, round(c.cy)?))
    }
}

/// Boundary circles of the reflective supergroup behind the strip
/// Apollonian packing (the Picard-type configuration).
///
/// Index 0 is the packing circle `W₀`, the line `y = 0` whose ball is the
/// lower half-plane. Indices 1..=4 are the mirrors generating the symmetry
/// group: `x = 0`, `x = 1/2`, `y = 1/2` and the unit circle. `W₀` meets
/// `W₁`, `W₂`, `W₄` orthogonally and `W₃` tangentially (at infinity). The
/// orbit of `W₀` under the four mirrors is the packing bounded by `y = 0`
/// and `y = 1` with unit-diameter circles at the integers.
pub const fn strip_configuration() -> [IntegralCircle; 5] {
    [
        IntegralCircle::new(0, 0, 0, -1),
        IntegralCircle::new(0, 0, 1, 0),
        IntegralCircle::new(1, 0, 1, 0),
        IntegralCircle::new(1, 0, 0, 1),
        IntegralCircle::new(-1, 1, 0, 0),
    ]
}

/// A real 2×2 matrix acting on the upper half-plane, normalised to
/// `|ad − bc| = 1`. Negative determinant means the orientation-reversing
/// action `z ↦ (a z̄ + b)/(c z̄ + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Image of a point under a Möbius map; ideal points may go to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImagePoint {
    Finite(Point),
    Infinity,
}

impl ImagePoint {
    pub fn finite(self) -> Option<Point> {
        match self {
            ImagePoint::Finite(p) => Some(p),
            ImagePoint::Infinity => None,
        }
    }
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Möbius matrix ({a}, {b}; {c}, {d}) is singular"
            )));
        }
        let s = det.abs().sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub const fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub const fn translation(t: f64) -> Self {
        Self { a: 1.0, b: t, c: 0.0, d: 1.0 }
    }

    /// `z ↦ −1/z`.
    pub const fn inversion() -> Self {
        Self { a: 0.0, b: -1.0, c: 1.0, d: 0.0 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn preserves_orientation(&self) -> bool {
        self.det() > 0.0
    }

    pub fn apply(&self, p: Point) -> ImagePoint {
        let y = if self.preserves_orientation() { p.y } else { -p.y };
        let (nr, ni) = (self.a * p.x + self.b, self.a * y);
        let (dr, di) = (self.c * p.x + self.d, self.c * y);
        let den = dr * dr + di * di;
        if den == 0.0 {
            return ImagePoint::Infinity;
        }
        ImagePoint::Finite(Point::new(
            (nr * dr + ni * di) / den,
            (ni * dr - nr * di) / den,
        ))
    }
}

impl Mul for Mobius {
    type Output = Mobius;

    fn mul(self, rhs: Mobius) -> Mobius {
        Mobius {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

pub fn apply_mobius(m: &Mobius, p: Point) -> ImagePoint {
    m.apply(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> InversiveCircle {
        InversiveCircle::disk(0.0, 0.0, 1.0)
    }

    #[test]
    fn self_product_is_one() {
        for c in [
            unit(),
            InversiveCircle::disk(2.5, -1.0, 0.3),
            InversiveCircle::bounding(0.1, 0.2, 4.0),
            InversiveCircle::line((3.0, 4.0), 2.0),
        ] {
            assert_abs_diff_eq!(c.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn external_tangency_product() {
        let c2 = InversiveCircle::disk(2.0, 0.0, 1.0);
        assert_abs_diff_eq!(inversive_product(&unit(), &c2), -1.0, epsilon = 1e-12);
        assert_eq!(classify(&unit(), &c2), Incidence::ExternallyTangent);
        assert!(is_tangent(&unit(), &c2));
    }

    #[test]
    fn concentric_circles_match_distance_classification() {
        // (r1² + r2² − d²) / (2 r1 r2) with r1 = 1, r2 = 2, d = 0.
        let big = InversiveCircle::disk(0.0, 0.0, 2.0);
        let p = inversive_product(&unit(), &big);
        assert_abs_diff_eq!(p, 1.25, epsilon = 1e-12);
        // d + r1 < r2: strictly nested, no contact
        assert_eq!(classify(&unit(), &big), Incidence::Nested);
    }

    #[test]
    fn classification_agrees_with_center_distance() {
        let cases = [
            ((0.0, 0.0, 1.0), (3.0, 0.0, 1.0)),
            ((0.0, 0.0, 1.0), (1.5, 0.0, 1.0)),
            ((0.0, 0.0, 3.0), (1.0, 0.0, 1.0)),
            ((0.0, 0.0, 3.0), (0.5, 0.5, 1.0)),
            ((0.0, 0.0, 1.0), (0.0, 1.5, 0.5)),
        ];
        for ((x1, y1, r1), (x2, y2, r2)) in cases {
            let d = f64::hypot(x1 - x2, y1 - y2);
            let expected = if (d - (r1 + r2)).abs() < 1e-12 {
                Incidence::ExternallyTangent
            } else if (d - (r1 - r2).abs()).abs() < 1e-12 {
                Incidence::InternallyTangent
            } else if d > r1 + r2 {
                Incidence::Separated
            } else if d < (r1 - r2).abs() {
                Incidence::Nested
            } else {
                Incidence::Intersecting
            };
            let got = classify(
                &InversiveCircle::disk(x1, y1, r1),
                &InversiveCircle::disk(x2, y2, r2),
            );
            assert_eq!(got, expected, "{:?} vs {:?}", (x1, y1, r1), (x2, y2, r2));
        }
    }

    #[test]
    fn bounding_circle_touches_inner_circle_with_disjoint_interiors() {
        let outer = InversiveCircle::bounding(0.0, 0.0, 1.0);
        let inner = InversiveCircle::disk(0.5, 0.0, 0.5);
        assert_eq!(classify(&outer, &inner), Incidence::ExternallyTangent);
        assert!(interiors_disjoint(&outer, &inner));
    }

    #[test]
    fn reflect_point_examples() {
        let axis = InversiveCircle::line((1.0, 0.0), 0.0);
        let p = reflect_point(&axis, Point::new(3.0, 1.0)).unwrap();
        assert_abs_diff_eq!(p.x, -3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-15);

        let p = reflect_point(&unit(), Point::new(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.5, epsilon = 1e-15);

        let m = InversiveCircle::disk(1.0, 0.0, 0.5);
        let q = Point::new(1.0, 1.0);
        let back = reflect_point(&m, reflect_point(&m, q).unwrap()).unwrap();
        assert_abs_diff_eq!(back.x, q.x, epsilon = 1e-14);
        assert_abs_diff_eq!(back.y, q.y, epsilon = 1e-14);
    }

    #[test]
    fn reflect_point_at_centre_is_singular() {
        let m = InversiveCircle::disk(1.0, 0.0, 0.5);
        assert!(matches!(
            reflect_point(&m, Point::new(1.0, 0.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn reflect_point_fixes_the_mirror() {
        let m = InversiveCircle::disk(1.0, 2.0, 0.5);
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let p = Point::new(1.0 + 0.5 * t.cos(), 2.0 + 0.5 * t.sin());
            let q = reflect_point(&m, p).unwrap();
            assert_abs_diff_eq!(p.x, q.x, epsilon = 1e-14);
            assert_abs_diff_eq!(p.y, q.y, epsilon = 1e-14);
        }
    }

    #[test]
    fn reflect_circle_examples() {
        let mirror = InversiveCircle::line((1.0, 0.0), 1.0);
        let img = reflect_circle(&mirror, &unit());
        let expected = InversiveCircle::disk(2.0, 0.0, 1.0);
        assert_abs_diff_eq!(img.cocurv, expected.cocurv, epsilon = 1e-14);
        assert_abs_diff_eq!(img.curv, expected.curv, epsilon = 1e-14);
        assert_abs_diff_eq!(img.cx, expected.cx, epsilon = 1e-14);
        assert_abs_diff_eq!(img.cy, expected.cy, epsilon = 1e-14);

        let c = InversiveCircle::disk(0.3, 0.4, 2.0);
        assert_eq!(reflect_circle(&c, &c), c.flipped());
    }

    #[test]
    fn strip_configuration_incidences() {
        let w = strip_configuration();
        for c in &w {
            assert!(c.is_unit());
        }
        // W0 meets W1, W2, W4 at right angles and W3 tangentially.
        let expected = [0, 0, -2, 0];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(w[0].double_product(&w[i + 1]).unwrap(), *e);
        }
        // Coxeter angles among the mirrors: π/∞, π/2 and π/3.
        assert_eq!(w[1].double_product(&w[2]).unwrap().abs(), 2);
        assert_eq!(w[1].double_product(&w[3]).unwrap(), 0);
        assert_eq!(w[1].double_product(&w[4]).unwrap(), 0);
        assert_eq!(w[2].double_product(&w[3]).unwrap(), 0);
        assert_eq!(w[2].double_product(&w[4]).unwrap().abs(), 1);
        assert_eq!(w[3].double_product(&w[4]).unwrap().abs(), 1);
    }

    #[test]
    fn strip_orbit_first_generations_form_a_packing() {
        let w = strip_configuration();
        let mut orbit = vec![w[0]];
        let mut frontier = vec![w[0]];
        for _ in 0..3 {
            let mut next = Vec::new();
            for c in &frontier {
                for m in &w[1..] {
                    let img = c.reflect(m).unwrap();
                    if !orbit.contains(&img) {
                        orbit.push(img);
                        next.push(img);
                    }
                }
            }
            frontier = next;
        }
        // y = 0, y = 1 and the unit-diameter circles at 0 and 1 are mutually
        // tangent with curvatures (0, 0, 2, 2), a Descartes quadruple.
        let quad = [
            IntegralCircle::new(0, 0, 0, -1),
            IntegralCircle::new(2, 0, 0, 1),
            IntegralCircle::new(0, 2, 0, 1),
            IntegralCircle::new(2, 2, 2, 1),
        ];
        for q in &quad {
            assert!(orbit.contains(q), "missing {q:?}");
        }
        for i in 0..4 {
            for j in i + 1..4 {
                assert_eq!(quad[i].double_product(&quad[j]).unwrap(), -2);
            }
        }
        let k: Vec<i128> = quad.iter().map(|c| c.curv).collect();
        let s: i128 = k.iter().sum();
        assert_eq!(2 * k.iter().map(|v| v * v).sum::<i128>(), s * s);
        for (i, a) in orbit.iter().enumerate() {
            for b in &orbit[i + 1..] {
                assert!(interiors_disjoint(&a.to_real(), &b.to_real()), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn mobius_examples() {
        let p = Point::new(0.3, 1.7);
        assert_eq!(Mobius::identity().apply(p), ImagePoint::Finite(p));
        let q = Mobius::translation(3.0).apply(Point::new(0.0, 1.0)).finite().unwrap();
        assert_abs_diff_eq!(q.x, 3.0);
        assert_abs_diff_eq!(q.y, 1.0);
        let q = Mobius::inversion().apply(Point::new(0.0, 2.0)).finite().unwrap();
        assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.y, 0.5, epsilon = 1e-15);
        // −1/z is the unit-circle reflection composed with x ↦ −x.
        let z = Point::new(0.7, 0.4);
        let via_inv = Mobius::inversion().apply(z).finite().unwrap();
        let r = reflect_point(&unit(), z).unwrap();
        assert_abs_diff_eq!(via_inv.x, -r.x, epsilon = 1e-14);
        assert_abs_diff_eq!(via_inv.y, r.y, epsilon = 1e-14);
    }

    #[test]
    fn ideal_point_can_map_to_infinity() {
        assert_eq!(Mobius::inversion().apply(Point::new(0.0, 0.0)), ImagePoint::Infinity);
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(Mobius::new(1.0, 2.0, 2.0, 4.0).is_err());
        let m = Mobius::new(2.0, 0.0, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(m.det(), 1.0);
    }

    fn mobius_strategy() -> impl Strategy<Value = Mobius> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
            .prop_filter("non-degenerate", |(a, b, c, d)| (a * d - b * c).abs() > 0.1)
            .prop_map(|(a, b, c, d)| Mobius::new(a, b, c, d).unwrap())
    }

    fn point_strategy() -> impl Strategy<Value = Point> {
        (-3.0..3.0f64, 0.05..4.0f64).prop_map(|(x, y)| Point::new(x, y))
    }

    fn circle_strategy() -> impl Strategy<Value = InversiveCircle> {
        prop_oneof![
            (-3.0..3.0f64, -3.0..3.0f64, 0.1..3.0f64).prop_map(|(x, y, r)| InversiveCircle::disk(x, y, r)),
            (-3.0..3.0f64, -3.0..3.0f64, 0.1..3.0f64).prop_map(|(x, y, r)| InversiveCircle::bounding(x, y, r)),
            (-1.0..1.0f64, -1.0..1.0f64, -2.0..2.0f64)
                .prop_filter("normal", |(a, b, _)| a.hypot(*b) > 0.1)
                .prop_map(|(a, b, s)| InversiveCircle::line((a, b), s)),
        ]
    }

    proptest! {
        #[test]
        fn mobius_is_an_isometry(m in mobius_strategy(), p in point_strategy(), q in point_strategy()) {
            let (mp, mq) = (m.apply(p).finite().unwrap(), m.apply(q).finite().unwrap());
            prop_assert!(mp.y > 0.0);
            let before = cosh_distance(p, q);
            let after = cosh_distance(mp, mq);
            prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0) * 1e2, "{} vs {}", before, after);
        }

        #[test]
        fn mobius_composition(m1 in mobius_strategy(), m2 in mobius_strategy(), p in point_strategy()) {
            let lhs = (m1 * m2).apply(p).finite().unwrap();
            let rhs = m1.apply(m2.apply(p).finite().unwrap()).finite().unwrap();
            prop_assert!((lhs.x - rhs.x).abs() < 1e-9 * (1.0 + lhs.x.abs()));
            prop_assert!((lhs.y - rhs.y).abs() < 1e-9 * (1.0 + lhs.y.abs()));
        }

        #[test]
        fn reflection_preserves_products(m in circle_strategy(), a in circle_strategy(), b in circle_strategy()) {
            let (ra, rb) = (reflect_circle(&m, &a), reflect_circle(&m, &b));
            let scale = 1.0 + a.magnitude() * b.magnitude() * m.magnitude().powi(2);
            prop_assert!((inversive_product(&ra, &rb) - inversive_product(&a, &b)).abs() <= 1e-12 * scale);
        }
    }
}
