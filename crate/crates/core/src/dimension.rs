//! Hausdorff dimension of limit sets and the Patterson–Sullivan relation
//! `λ₀ = δ(n − δ)`.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::stats::fit_line;
use crate::{Error, Result};

/// `δ(n − δ)`. Only a discrete eigenvalue when `δ > n/2`.
pub fn ps_eigenvalue(delta: f64, n: u32) -> Result<f64> {
    let n = f64::from(n);
    if !(delta > 0.0 && delta <= n) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, {n}]")));
    }
    Ok(delta * (n - delta))
}

/// The larger root `n/2 + √(n²/4 − λ₀)` of `δ(n − δ) = λ₀`.
pub fn invert_ps(lambda0: f64, n: u32) -> Result<f64> {
    let half = f64::from(n) / 2.0;
    if !(lambda0 >= 0.0 && lambda0 <= half * half) {
        return Err(Error::InvalidParameter(format!(
            "lambda0 = {lambda0} outside [0, {}]: no real dimension",
            half * half
        )));
    }
    Ok(half + (half * half - lambda0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetSample {
    /// Boundary points; the second coordinate is 0 when `ambient_dim == 1`.
    pub points: Vec<[f64; 2]>,
    pub ambient_dim: u32,
    pub depth: usize,
    pub generators: String,
}

impl LimitSetSample {
    pub fn on_line(xs: impl IntoIterator<Item = f64>, depth: usize, generators: impl Into<String>) -> Self {
        Self {
            points: xs.into_iter().map(|x| [x, 0.0]).collect(),
            ambient_dim: 1,
            depth,
            generators: generators.into(),
        }
    }

    pub fn in_plane(points: Vec<[f64; 2]>, depth: usize, generators: impl Into<String>) -> Self {
        Self { points, ambient_dim: 2, depth, generators: generators.into() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionMethod {
    BoxCount,
    GrowthFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub delta: f64,
    pub stderr: f64,
    pub method: DimensionMethod,
    pub scales: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Resolution below which the sampler stops refining a cylinder.
pub const DEFAULT_RESOLUTION: f64 = 1.0 / 65536.0;

/// Dyadic box sizes `2^-4 … 2^-14`.
pub fn default_scales() -> Vec<f64> {
    dyadic_scales(4, 14)
}

pub fn dyadic_scales(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|e| 2f64.powi(-e)).collect()
}

/// Limit set of the Hecke group `⟨z ↦ z + μ, z ↦ −1/z⟩` through the
/// contractions `f_k(x) = −1/(x + kμ)`, `k ≠ 0`, which map `[−1, 1]` into
/// itself when `μ > 2`. Points are `f_w(0)` over words `w` of length at
/// most `depth`; a word is not extended once its cylinder `f_w([−1, 1])` is
/// shorter than `resolution`.
///
/// With `adaptive_tail` the branch range `|k| ≤ branches` is extended per
/// word until the remaining images `f_w(−1/(kμ))` all lie within
/// `resolution` of their limit `f_w(0)`. Without it the infinite family is
/// simply cut at `branches`, which starves the neighbourhood of the cusp
/// images and biases box counts low.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeckeSampler {
    pub mu: f64,
    pub depth: usize,
    pub branches: u32,
    pub resolution: f64,
    pub adaptive_tail: bool,
}

/// Möbius map `x ↦ (ax + b)/(cx + d)` with `ad − bc = 1`.
#[derive(Clone, Copy)]
struct Word {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Word {
    const IDENTITY: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    fn apply(&self, x: f64) -> f64 {
        (self.a * x + self.b) / (self.c * x + self.d)
    }

    fn derivative(&self, x: f64) -> f64 {
        1.0 / (self.c * x + self.d).powi(2)
    }

    /// `self ∘ f_k` with `f_k = [[0, −1], [1, kμ]]`.
    fn then_branch(&self, t: f64) -> Self {
        Self {
            a: self.b,
            b: -self.a + self.b * t,
            c: self.d,
            d: -self.c + self.d * t,
        }
    }

    fn cylinder_length(&self) -> f64 {
        (self.apply(1.0) - self.apply(-1.0)).abs()
    }
}

impl HeckeSampler {
    pub fn new(mu: f64, depth: usize, branches: u32) -> Result<Self> {
        let s = Self { mu, depth, branches, resolution: DEFAULT_RESOLUTION, adaptive_tail: false };
        s.validate()?;
        Ok(s)
    }

    pub fn adaptive(mut self, on: bool) -> Self {
        self.adaptive_tail = on;
        self
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "mu = {} must exceed 2 (for mu <= 2 the limit set is the whole boundary)",
                self.mu
            )));
        }
        if self.depth < 1 || self.branches < 1 {
            return Err(Error::InvalidParameter("depth and branch count must be at least 1".into()));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::InvalidParameter("resolution must be positive".into()));
        }
        Ok(())
    }

    /// Largest `|k|` used below word `w`.
    fn branch_limit(&self, w: &Word) -> u64 {
        let k = u64::from(self.branches);
        if !self.adaptive_tail {
            return k;
        }
        // |f_w(−1/(kμ)) − f_w(0)| ≈ |f_w'(0)| / (kμ); stop once twice that
        // is below the resolution
        let tail = (2.0 * w.derivative(0.0) / (self.mu * self.resolution)).ceil();
        k.max(tail.min(1e9) as u64)
    }

    fn expand(&self, w: Word, len: usize, out: &mut Vec<f64>) {
        out.push(w.apply(0.0));
        if len >= self.depth || w.cylinder_length() < self.resolution {
            return;
        }
        for k in 1..=self.branch_limit(&w) {
            for sign in [1.0, -1.0] {
                self.expand(w.then_branch(sign * k as f64 * self.mu), len + 1, out);
            }
        }
    }

    pub fn sample(&self) -> Result<LimitSetSample> {
        self.validate()?;
        let root = Word::IDENTITY;
        let top: Vec<i64> = (1..=self.branch_limit(&root) as i64).flat_map(|k| [k, -k]).collect();
        let mut xs: Vec<f64> = top
            .par_iter()
            .map(|&k| {
                let mut out = Vec::new();
                self.expand(root.then_branch(k as f64 * self.mu), 1, &mut out);
                out
            })
            .flatten()
            .collect();
        xs.push(root.apply(0.0));
        xs.sort_by(f64::total_cmp);
        let generators = format!(
            "x -> -1/(x + k*{}), 0 < |k| <= {}{}, resolution {:e}",
            self.mu,
            self.branches,
            if self.adaptive_tail { " plus adaptive tail" } else { "" },
            self.resolution
        );
        Ok(LimitSetSample::on_line(xs, self.depth, generators))
    }
}

/// Points `f_w(0)` for all words of length `≤ depth` in the branches
/// `0 < |k| ≤ K` (cylinders below [`DEFAULT_RESOLUTION`] are not refined).
pub fn sample_hecke_limit_set(mu: f64, depth: usize, k: u32) -> Result<LimitSetSample> {
    HeckeSampler::new(mu, depth, k)?.sample()
}

fn occupied_boxes(points: &[[f64; 2]], scale: f64) -> usize {
    let boxes: HashSet<(i64, i64)> = points
        .iter()
        .map(|p| ((p[0] / scale).floor() as i64, (p[1] / scale).floor() as i64))
        .collect();
    boxes.len()
}

/// Slope of `log N(s)` against `log(1/s)`, where `N(s)` counts occupied
/// cells of the grid of side `s` anchored at the origin.
pub fn box_counting_dimension(sample: &LimitSetSample, scales: &[f64]) -> Result<DimensionEstimate> {
    if scales.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 scales, got {}", scales.len())));
    }
    if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter("scales must be positive and finite".into()));
    }
    let (lo, hi) = scales
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if hi / lo < 100.0 - 1e-9 {
        return Err(Error::InvalidParameter("scales must span at least two decades".into()));
    }
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty limit-set sample".into()));
    }

    let first = sample.points[0];
    if sample.points.iter().all(|p| *p == first) {
        return Ok(DimensionEstimate {
            delta: 0.0,
            stderr: 0.0,
            method: DimensionMethod::BoxCount,
            scales: scales.to_vec(),
            warning: Some("degenerate sample: all points coincide".into()),
        });
    }

    let counts: Vec<usize> = scales.par_iter().map(|&s| occupied_boxes(&sample.points, s)).collect();
    let xs: Vec<f64> = scales.iter().map(|s| -s.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let fit = fit_line(&xs, &ys)?;

    let ambient = f64::from(sample.ambient_dim);
    let mut warning = None;
    let mut delta = fit.slope;
    if !(0.0..=ambient).contains(&delta) {
        warning = Some(format!("raw slope {delta:.4} clamped to [0, {ambient}]"));
        delta = delta.clamp(0.0, ambient);
    }
    Ok(DimensionEstimate {
        delta,
        stderr: fit.slope_stderr,
        method: DimensionMethod::BoxCount,
        scales: scales.to_vec(),
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Left endpoints of the level-`depth` intervals of the attractor of
    /// `x ↦ r x + i/(m−1)·(1−r)`, `i = 0..m`.
    fn self_similar(m: usize, r: f64, depth: u32) -> LimitSetSample {
        let mut pts = vec![0.0f64];
        for _ in 0..depth {
            pts = pts
                .iter()
                .flat_map(|&x| (0..m).map(move |i| r * x + i as f64 / (m - 1) as f64 * (1.0 - r)))
                .collect();
        }
        LimitSetSample::on_line(pts, depth as usize, "planted")
    }

    #[test]
    fn ps_examples() {
        assert_abs_diff_eq!(ps_eigenvalue(1.3057, 2).unwrap(), 0.9065, epsilon = 1e-3);
        assert_eq!(ps_eigenvalue(1.0, 2).unwrap(), 1.0);
        assert_eq!(ps_eigenvalue(1.5, 3).unwrap(), 2.25);
        assert_eq!(ps_eigenvalue(1.0, 1).unwrap(), 0.0);
        assert!(ps_eigenvalue(0.0, 2).is_err());
        assert!(ps_eigenvalue(2.5, 2).is_err());
    }

    #[test]
    fn invert_examples() {
        assert_abs_diff_eq!(invert_ps(0.9065, 2).unwrap(), 1.3057, epsilon = 1e-3);
        assert_eq!(invert_ps(0.0, 1).unwrap(), 1.0);
        assert_eq!(invert_ps(1.0, 2).unwrap(), 1.0);
        assert_eq!(invert_ps(0.25, 1).unwrap(), 0.5);
        assert!(invert_ps(0.3, 1).is_err());
        assert!(invert_ps(-0.1, 1).is_err());
    }

    proptest! {
        #[test]
        fn ps_round_trip(n in 1u32..5, t in 0.0f64..=1.0) {
            let lambda = t * f64::from(n * n) / 4.0;
            let back = ps_eigenvalue(invert_ps(lambda, n).unwrap(), n).unwrap();
            prop_assert!((back - lambda).abs() < 1e-12);
        }

        #[test]
        fn ps_symmetric(n in 1u32..5, t in 0.001f64..0.999) {
            let d = t * f64::from(n);
            let a = ps_eigenvalue(d, n).unwrap();
            let b = ps_eigenvalue(f64::from(n) - d, n).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cantor_set() {
        let est = box_counting_dimension(&self_similar(2, 1.0 / 3.0, 12), &default_scales()).unwrap();
        assert_abs_diff_eq!(est.delta, 2f64.ln() / 3f64.ln(), epsilon = 0.02);
        assert!(est.warning.is_none());
    }

    #[test]
    fn planted_self_similar_sets() {
        for (m, r) in [(3usize, 0.2), (4, 0.2), (2, 0.25)] {
            let est = box_counting_dimension(&self_similar(m, r, 10), &default_scales()).unwrap();
            let expected = (m as f64).ln() / (1.0 / r).ln();
            assert_abs_diff_eq!(est.delta, expected, epsilon = 0.02);
        }
    }

    #[test]
    fn full_interval() {
        let n = 1 << 16;
        let sample = LimitSetSample::on_line((0..n).map(|i| i as f64 / n as f64), 0, "interval");
        let est = box_counting_dimension(&sample, &default_scales()).unwrap();
        assert_abs_diff_eq!(est.delta, 1.0, epsilon = 0.02);
    }

    #[test]
    fn filled_square_is_two_dimensional() {
        let n = 1024;
        let pts = (0..n * n).map(|i| [(i % n) as f64 / n as f64, (i / n) as f64 / n as f64]).collect();
        let est = box_counting_dimension(&LimitSetSample::in_plane(pts, 0, "square"), &dyadic_scales(2, 9)).unwrap();
        assert_abs_diff_eq!(est.delta, 2.0, epsilon = 0.02);
    }

    #[test]
    fn degenerate_sample_warns() {
        let sample = LimitSetSample::on_line([0.3; 10], 0, "point");
        let est = box_counting_dimension(&sample, &default_scales()).unwrap();
        assert_eq!(est.delta, 0.0);
        assert!(est.warning.is_some());
    }

    #[test]
    fn scale_preconditions() {
        let sample = self_similar(2, 1.0 / 3.0, 6);
        assert!(box_counting_dimension(&sample, &[0.1, 0.05, 0.02]).is_err());
        assert!(box_counting_dimension(&sample, &[0.1, 0.08, 0.05, 0.02]).is_err());
        assert!(box_counting_dimension(&sample, &[0.1, 0.01, 0.001, 0.0]).is_err());
    }

    #[test]
    fn hecke_depth_one() {
        let s = sample_hecke_limit_set(4.0, 1, 1).unwrap();
        let xs: Vec<f64> = s.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![-0.25, 0.0, 0.25]);
    }

    #[test]
    fn hecke_rejects_lattice_regime() {
        assert!(sample_hecke_limit_set(2.0, 3, 4).is_err());
        assert!(sample_hecke_limit_set(1.5, 3, 4).is_err());
        assert!(sample_hecke_limit_set(3.0, 0, 4).is_err());
    }

    #[test]
    fn hecke_refinement_is_monotone() {
        for adaptive in [false, true] {
            let coarse = HeckeSampler::new(3.0, 3, 4).unwrap().adaptive(adaptive).sample().unwrap();
            let fine = HeckeSampler::new(3.0, 6, 4).unwrap().adaptive(adaptive).sample().unwrap();
            let fine_set: HashSet<u64> = fine.points.iter().map(|p| p[0].to_bits()).collect();
            assert!(fine.len() > coarse.len());
            assert!(coarse.points.iter().all(|p| fine_set.contains(&p[0].to_bits())));
        }
    }

    #[test]
    fn hecke_points_stay_in_the_interval() {
        let s = HeckeSampler::new(2.5, 6, 6).unwrap().adaptive(true).sample().unwrap();
        let bound = 1.0 / (2.5 - 1.0);
        assert!(s.points.iter().all(|p| p[0].abs() <= bound + 1e-12 && p[1] == 0.0));
    }

    /// The images `f_w(0)` of the cusp at infinity are permuted by the
    /// symmetry `x ↦ −x` (conjugating `k` to `−k`).
    #[test]
    fn hecke_sample_is_symmetric() {
        let s = sample_hecke_limit_set(3.0, 5, 5).unwrap();
        let n = s.len();
        for i in 0..n {
            assert_abs_diff_eq!(s.points[i][0], -s.points[n - 1 - i][0], epsilon = 1e-14);
        }
    }

    #[test]
    fn hecke_dimension_is_between_half_and_one() {
        for mu in [2.5, 3.0, 4.0, 6.0] {
            let s = HeckeSampler::new(mu, 8, 20).unwrap().adaptive(true).sample().unwrap();
            let est = box_counting_dimension(&s, &default_scales()).unwrap();
            assert!(est.delta > 0.5 && est.delta < 1.0, "mu = {mu}: {}", est.delta);
        }
    }
}
