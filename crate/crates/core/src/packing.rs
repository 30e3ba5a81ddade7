//! Apollonian packings from a root Descartes quadruple.
//!
//! Every circle of a bounded Apollonian packing other than the four root
//! circles appears exactly once as the new circle of a non-backtracking
//! word of swaps `k_i ↦ 2(k_j + k_k + k_l) − k_i` applied to the root. The
//! same linear map acts on full inversive coordinates, where it is the
//! reflection in the circle orthogonal to the three kept circles (see
//! [`CirclesQuadruple::dual_circle`]). Along such words the new curvature
//! never drops below the current maximum when the root is reduced, so a
//! branch can be cut as soon as its new curvature exceeds the bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{self, IntegralCircle, InversiveCircle, Point};
use crate::stats::fit_line;
use crate::{Error, Result};

/// Signed curvatures of four mutually tangent circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DescartesQuadruple(pub [i64; 4]);

impl DescartesQuadruple {
    /// The bounded packing with outer circle of radius 1.
    pub const CLASSICAL: Self = Self([-1, 2, 2, 3]);

    pub const fn new(k: [i64; 4]) -> Self {
        Self(k)
    }

    pub fn curvatures(&self) -> [i64; 4] {
        self.0
    }

    /// `2 Σ kᵢ² = (Σ kᵢ)²`, checked exactly.
    pub fn satisfies_descartes(&self) -> bool {
        let k = self.0.map(i128::from);
        let s: i128 = k.iter().sum();
        2 * k.iter().map(|v| v * v).sum::<i128>() == s * s
    }

    /// Replaces `kᵢ` (0-based) by `2(sum of the others) − kᵢ`.
    pub fn swap(&self, i: usize) -> Result<Self> {
        if i > 3 {
            return Err(Error::InvalidParameter(format!("swap index {i} out of range 0..4")));
        }
        let mut k = self.0;
        k[i] = swapped_value(&k, i).ok_or(Error::Overflow("Descartes swap"))?;
        Ok(Self(k))
    }

    /// Checks the quadruple can seed [`enumerate_curvatures`]: it satisfies
    /// Descartes' relation, has exactly one negative entry (the bounding
    /// circle) and is reduced, i.e. no swap lowers a curvature.
    pub fn validate_root(&self) -> Result<()> {
        let fail = |reason: &str| Err(Error::InvalidRoot { root: self.0, reason: reason.into() });
        if !self.satisfies_descartes() {
            return fail("Descartes relation 2Σk² = (Σk)² does not hold");
        }
        let negatives = self.0.iter().filter(|&&k| k < 0).count();
        let zeros = self.0.iter().filter(|&&k| k == 0).count();
        if negatives != 1 || zeros != 0 {
            return fail("need exactly one negative curvature and three positive ones");
        }
        for i in 0..4 {
            match swapped_value(&self.0, i) {
                Some(v) if v >= self.0[i] => {}
                Some(_) => return fail("not reduced: a swap decreases a curvature"),
                None => return Err(Error::Overflow("Descartes swap")),
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for DescartesQuadruple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = self.0;
        write!(f, "({}, {}, {}, {})", k[0], k[1], k[2], k[3])
    }
}

impl std::str::FromStr for DescartesQuadruple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(str::trim)
            .collect();
        let bad = || Error::InvalidParameter(format!("cannot parse quadruple {s:?}"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let mut k = [0i64; 4];
        for (slot, p) in k.iter_mut().zip(parts) {
            *slot = p.parse().map_err(|_| bad())?;
        }
        Ok(Self(k))
    }
}

pub fn swap(q: &DescartesQuadruple, i: usize) -> Result<DescartesQuadruple> {
    q.swap(i)
}

fn swapped_value(k: &[i64; 4], i: usize) -> Option<i64> {
    let mut others = 0i64;
    for (j, &v) in k.iter().enumerate() {
        if j != i {
            others = others.checked_add(v)?;
        }
    }
    others.checked_mul(2)?.checked_sub(k[i])
}

/// Upper curvature bound as an integer; curvatures are integral here.
fn integer_bound(t: f64) -> i64 {
    if t >= i64::MAX as f64 {
        i64::MAX / 8
    } else {
        t.floor() as i64
    }
}

/// Size of the breadth-first frontier handed to the parallel depth-first
/// workers.
const PARALLEL_FRONTIER: usize = 512;

/// Non-backtracking swap tree shared by the curvature-only and geometric
/// enumerations. A node is a quadruple together with the index that
/// produced it; `NONE` marks the root.
trait SwapNode: Copy + Send + Sync {
    fn curvature(&self, i: usize) -> i64;
    fn swapped(&self, i: usize) -> Option<Self>;
}

const NONE: u8 = u8::MAX;

impl SwapNode for [i64; 4] {
    fn curvature(&self, i: usize) -> i64 {
        self[i]
    }

    fn swapped(&self, i: usize) -> Option<Self> {
        let mut k = *self;
        k[i] = swapped_value(self, i)?;
        Some(k)
    }
}

impl SwapNode for IntegralQuadruple {
    fn curvature(&self, i: usize) -> i64 {
        self.0[i].curv as i64
    }

    fn swapped(&self, i: usize) -> Option<Self> {
        self.swap(i).ok()
    }
}

impl SwapNode for CirclesQuadruple {
    fn curvature(&self, i: usize) -> i64 {
        self.circles[i].curv.round() as i64
    }

    fn swapped(&self, i: usize) -> Option<Self> {
        Some(self.swap(i))
    }
}

/// Walks the pruned tree below `root`, calling `visit(node, i)` for every
/// node whose new circle `i` has curvature in `(0, bound]`. Root circles are
/// not visited. Output order is deterministic.
fn walk<N, T, F>(root: N, bound: i64, visit: F) -> Vec<T>
where
    N: SwapNode,
    T: Send,
    F: Fn(&N, usize, &mut Vec<T>) + Sync,
{
    let children = |node: &N, last: u8, out: &mut Vec<T>, next: &mut Vec<(N, u8)>| {
        for i in 0..4 {
            if i as u8 == last {
                continue;
            }
            if let Some(child) = node.swapped(i) {
                let k = child.curvature(i);
                if k > 0 && k <= bound {
                    visit(&child, i, out);
                    next.push((child, i as u8));
                }
            }
        }
    };

    let mut out = Vec::new();
    let mut frontier = vec![(root, NONE)];
    while !frontier.is_empty() && frontier.len() < PARALLEL_FRONTIER {
        let mut next = Vec::new();
        for (node, last) in &frontier {
            children(node, *last, &mut out, &mut next);
        }
        frontier = next;
    }

    let chunks: Vec<Vec<T>> = frontier
        .par_iter()
        .map(|&(node, last)| {
            let mut local = Vec::new();
            let mut stack = Vec::new();
            // the frontier nodes themselves were already visited
            children(&node, last, &mut local, &mut stack);
            while let Some((n, l)) = stack.pop() {
                children(&n, l, &mut local, &mut stack);
            }
            local
        })
        .collect();
    out.extend(chunks.into_iter().flatten());
    out
}

/// Curvatures in `(0, t_max]` of the packing generated by `root`, sorted.
/// The bounding circle is never counted.
pub fn enumerate_curvatures(root: &DescartesQuadruple, t_max: f64) -> Result<Vec<i64>> {
    root.validate_root()?;
    if !(t_max > 0.0) {
        return Ok(Vec::new());
    }
    let bound = integer_bound(t_max);
    let mut ks: Vec<i64> = root.0.iter().copied().filter(|&k| k > 0 && k <= bound).collect();
    ks.extend(walk(root.0, bound, |node: &[i64; 4], i, out| out.push(node[i])));
    ks.sort_unstable();
    Ok(ks)
}

/// Four mutually tangent oriented circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclesQuadruple {
    pub circles: [InversiveCircle; 4],
}

/// Integral version of [`CirclesQuadruple`] used for exact orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegralQuadruple(pub [IntegralCircle; 4]);

impl IntegralQuadruple {
    pub fn swap(&self, i: usize) -> Result<Self> {
        let ovf = || Error::Overflow("quadruple swap");
        let c = &self.0;
        let comb = |f: fn(&IntegralCircle) -> i128| -> Result<i128> {
            let mut s = 0i128;
            for (j, cj) in c.iter().enumerate() {
                if j != i {
                    s = s.checked_add(f(cj)).ok_or_else(ovf)?;
                }
            }
            s.checked_mul(2)
                .and_then(|v| v.checked_sub(f(&c[i])))
                .ok_or_else(ovf)
        };
        let mut out = *c;
        out[i] = IntegralCircle::new(
            comb(|c| c.cocurv)?,
            comb(|c| c.curv)?,
            comb(|c| c.cx)?,
            comb(|c| c.cy)?,
        );
        Ok(Self(out))
    }

    pub fn to_real(&self) -> CirclesQuadruple {
        CirclesQuadruple { circles: self.0.map(|c| c.to_real()) }
    }
}

impl CirclesQuadruple {
    pub fn new(circles: [InversiveCircle; 4]) -> Result<Self> {
        let q = Self { circles };
        q.check_tangency()?;
        Ok(q)
    }

    /// Places the circles of a root quadruple: the bounding circle centred
    /// at the origin, the first positive circle on the positive x-axis, the
    /// next one above (or on) the axis, and the last in the upper position.
    pub fn from_descartes(q: &DescartesQuadruple) -> Result<Self> {
        q.validate_root()?;
        let k = q.0;
        let outer = k.iter().position(|&v| v < 0).expect("validated");
        let others: Vec<usize> = (0..4).filter(|&i| i != outer).collect();
        let (a, b, c) = (others[0], others[1], others[2]);

        let big_r = -1.0 / k[outer] as f64;
        let (ra, rb) = (1.0 / k[a] as f64, 1.0 / k[b] as f64);
        let da = big_r - ra;
        let db = big_r - rb;
        let za = (da, 0.0);
        let zb = if da == 0.0 {
            (0.0, 0.0)
        } else {
            let x = (db * db + da * da - (ra + rb).powi(2)) / (2.0 * da);
            let y2 = (db - x) * (db + x);
            // collinear centres: y² is zero up to rounding, and its square
            // root would magnify that rounding to ~1e-8
            let y2 = if y2 < 1e-12 * db * db { 0.0 } else { y2 };
            (x, y2.sqrt())
        };

        let mut circles = [InversiveCircle::new(0.0, 0.0, 0.0, 0.0); 4];
        circles[outer] = InversiveCircle::bounding(0.0, 0.0, big_r);
        circles[a] = InversiveCircle::disk(za.0, za.1, ra);
        circles[b] = InversiveCircle::disk(zb.0, zb.1, rb);

        // The two circles tangent to three mutually tangent ones are
        // s ± 2n, where s is their sum and n the unit circle orthogonal to
        // all three. This avoids the square root of a possibly vanishing
        // quantity in the complex Descartes formula.
        let rows = [outer, a, b].map(|i| circles[i].coords());
        let n = orthogonal_circle(&rows);
        let s: [f64; 4] = std::array::from_fn(|j| rows.iter().map(|r| r[j]).sum());
        let kc = k[c] as f64;
        let mut best: Option<InversiveCircle> = None;
        for sign in [1.0, -1.0] {
            let v: [f64; 4] = std::array::from_fn(|j| s[j] + sign * 2.0 * n[j]);
            let cand = InversiveCircle::new(v[0], v[1], v[2], v[3]);
            if (cand.curv - kc).abs() > 1e-9 * kc.abs().max(1.0) {
                continue;
            }
            if best.is_none_or(|prev| cand.cy > prev.cy) {
                best = Some(cand);
            }
        }
        circles[c] = best.ok_or_else(|| Error::InvalidRoot {
            root: k,
            reason: "could not place the fourth circle".into(),
        })?;
        let q = Self { circles };
        q.check_tangency()?;
        Ok(q)
    }

    fn check_tangency(&self) -> Result<()> {
        for i in 0..4 {
            for j in i + 1..4 {
                if geom::classify(&self.circles[i], &self.circles[j]) != geom::Incidence::ExternallyTangent {
                    return Err(Error::InvalidParameter(format!(
                        "circles {i} and {j} are not tangent with disjoint interiors (product {})",
                        geom::inversive_product(&self.circles[i], &self.circles[j])
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn curvatures(&self) -> [f64; 4] {
        self.circles.map(|c| c.curv)
    }

    /// The circle through the three tangency points not involving circle
    /// `i`; it is orthogonal to the other three circles and reflecting circle
    /// `i` in it performs the Descartes swap.
    pub fn dual_circle(&self, i: usize) -> InversiveCircle {
        let mut s = [0.0f64; 4];
        for (j, c) in self.circles.iter().enumerate() {
            let sign = if j == i { -0.5 } else { 0.5 };
            s[0] += sign * c.cocurv;
            s[1] += sign * c.curv;
            s[2] += sign * c.cx;
            s[3] += sign * c.cy;
        }
        InversiveCircle::new(s[0], s[1], s[2], s[3])
    }

    pub fn swap(&self, i: usize) -> Self {
        let mut out = *self;
        out.circles[i] = geom::reflect_circle(&self.dual_circle(i), &self.circles[i]);
        out
    }

    /// Exact copy when every coordinate is an integer.
    pub fn to_integral(&self) -> Option<IntegralQuadruple> {
        let mut out = [IntegralCircle::new(0, 0, 0, 0); 4];
        for (slot, c) in out.iter_mut().zip(&self.circles) {
            *slot = IntegralCircle::from_real(c, 1e-9)?;
        }
        Some(IntegralQuadruple(out))
    }
}

/// Unit vector orthogonal, in the inversive form, to three circles.
fn orthogonal_circle(rows: &[[f64; 4]; 3]) -> [f64; 4] {
    // generalized cross product, then raise the index with the inverse form
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        let m = |r: usize, c: usize| rows[r][cols[c]];
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    };
    let v = [minor(0), -minor(1), minor(2), -minor(3)];
    let n = [-2.0 * v[1], -2.0 * v[0], v[2], v[3]];
    let c = InversiveCircle::new(n[0], n[1], n[2], n[3]);
    let scale = c.norm().abs().sqrt();
    n.map(|x| x / scale)
}

fn sort_circles(circles: &mut [InversiveCircle]) {
    circles.sort_by(|a, b| {
        let ca = a.center().unwrap_or(Point::new(0.0, 0.0));
        let cb = b.center().unwrap_or(Point::new(0.0, 0.0));
        a.curv
            .total_cmp(&b.curv)
            .then(ca.x.total_cmp(&cb.x))
            .then(ca.y.total_cmp(&cb.y))
    });
}

/// Circles with curvature in `(0, t_max]`, with full position data, sorted
/// by curvature then centre. Integral roots are followed in exact
/// arithmetic.
pub fn enumerate_circles_geometric(root: &CirclesQuadruple, t_max: f64) -> Result<Vec<InversiveCircle>> {
    let curvs = DescartesQuadruple(root.circles.map(|c| c.curv.round() as i64));
    if root.circles.iter().any(|c| (c.curv - c.curv.round()).abs() > 1e-9) {
        return Err(Error::InvalidParameter("geometric enumeration needs integral curvatures".into()));
    }
    curvs.validate_root()?;
    root.check_tangency()?;
    if !(t_max > 0.0) {
        return Ok(Vec::new());
    }
    let bound = integer_bound(t_max);
    let in_range = |c: &InversiveCircle| c.curv > 0.0 && c.curv <= bound as f64;
    let mut out: Vec<InversiveCircle> = root.circles.iter().copied().filter(in_range).collect();
    match root.to_integral() {
        Some(exact) => out.extend(walk(exact, bound, |n: &IntegralQuadruple, i, v| v.push(n.0[i].to_real()))),
        None => out.extend(walk(*root, bound, |n: &CirclesQuadruple, i, v| v.push(n.circles[i]))),
    }
    sort_circles(&mut out);
    Ok(out)
}

/// Tangency points between each circle of curvature `≤ t_max` and the three
/// circles it was born tangent to, plus the six root tangencies. These lie
/// on the residual set and sample it at resolution of order `1/t_max`.
pub fn residual_set_points(root: &CirclesQuadruple, t_max: f64) -> Result<Vec<Point>> {
    let curvs = DescartesQuadruple(root.circles.map(|c| c.curv.round() as i64));
    curvs.validate_root()?;
    let bound = integer_bound(t_max.max(0.0));
    let mut pts = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            pts.extend(root.circles[i].tangency_point(&root.circles[j]));
        }
    }
    let born = |n: &CirclesQuadruple, i: usize, v: &mut Vec<Point>| {
        for j in (0..4).filter(|&j| j != i) {
            v.extend(n.circles[i].tangency_point(&n.circles[j]));
        }
    };
    match root.to_integral() {
        Some(exact) => pts.extend(walk(exact, bound, |n: &IntegralQuadruple, i, v| born(&n.to_real(), i, v))),
        None => pts.extend(walk(*root, bound, born)),
    }
    Ok(pts)
}

/// Counting function `N(T)` sampled at several thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountProfile {
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    pub root: DescartesQuadruple,
}

/// `N(T)` for every `T` in `thresholds`, from a single enumeration up to the
/// largest threshold.
pub fn count_profile(root: &DescartesQuadruple, thresholds: &[f64]) -> Result<CountProfile> {
    let t_max = thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ks = if thresholds.is_empty() {
        root.validate_root()?;
        Vec::new()
    } else {
        enumerate_curvatures(root, t_max)?
    };
    let counts = thresholds
        .iter()
        .map(|&t| ks.partition_point(|&k| (k as f64) <= t) as u64)
        .collect();
    Ok(CountProfile { thresholds: thresholds.to_vec(), counts, root: *root })
}

/// `n` thresholds spaced evenly in `log T` from `t_min` to `t_max`.
pub fn log_spaced(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t_max];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub delta: f64,
    pub stderr: f64,
    pub points: usize,
    pub t_min: f64,
}

/// Least-squares slope of `log N(T)` against `log T` over `T ≥ t_min`.
pub fn fit_growth_exponent(profile: &CountProfile, t_min: f64) -> Result<GrowthFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = profile
        .thresholds
        .iter()
        .zip(&profile.counts)
        .filter(|(&t, &n)| t >= t_min && n > 0)
        .map(|(&t, &n)| (t.ln(), (n as f64).ln()))
        .unzip();
    if xs.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "growth fit needs at least 5 thresholds with T ≥ {t_min} and N(T) > 0, got {}",
            xs.len()
        )));
    }
    let fit = fit_line(&xs, &ys)?;
    Ok(GrowthFit { delta: fit.slope, stderr: fit.slope_stderr, points: fit.n, t_min })
}
