//! Eigenvalues below a threshold, tracked across a refinement schedule and
//! classified as genuine or as artifacts of the truncation.

use serde::{Deserialize, Serialize};

use super::assemble::{assemble, AssembledSystem};
use super::domain::{HyperbolicDomain, TruncationBc};
use super::eigen::solve_lowest;
use super::mesh::{build_mesh, Mesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub h: f64,
    pub eps: f64,
    pub top: f64,
}

/// `(h, ε, Y) = (0.2, 0.05, 8)`, then halving `h` and `ε` and doubling `Y`.
pub fn default_schedule() -> Vec<ScheduleStep> {
    (0..3)
        .map(|i| {
            let f = 2f64.powi(i);
            ScheduleStep { h: 0.2 / f, eps: 0.05 / f, top: 8.0 * f }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Largest change across the last two schedule steps of a genuine
    /// eigenvalue.
    pub stability_tol: f64,
    /// Largest fraction of `B`-mass a genuine eigenfunction may carry near
    /// the truncation.
    pub boundary_mass_tol: f64,
    /// Width of that layer, in units of the final `h` (hyperbolic).
    pub boundary_layer_widths: f64,
    /// Cap on the number of eigenpairs computed per step.
    pub max_eigenpairs: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { stability_tol: 5e-3, boundary_mass_tol: 0.1, boundary_layer_widths: 3.0, max_eigenpairs: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Genuine,
    Spurious,
    Unresolved,
}

/// An eigenpair of one discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub value: f64,
    /// Exponent `s` of the asymptotic truncation, when one was solved for.
    pub exponent: Option<f64>,
    pub residual: f64,
    /// Eigenvector on all mesh vertices, `B`-normalized.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: ScheduleStep,
    pub vertices: usize,
    pub triangles: usize,
    pub min_angle_deg: f64,
    /// Eigenvalues below κ plus the next one, when computed.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEntry {
    pub value: f64,
    pub stability: Stability,
    /// Change from the previous schedule step; absent when that step had
    /// no matching eigenvalue.
    pub drift: Option<f64>,
    pub boundary_mass: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub domain: String,
    pub kappa: f64,
    pub truncation: TruncationBc,
    pub config: SpectralConfig,
    pub eigenvalues: Vec<EigenvalueEntry>,
    pub genuine_count: usize,
    pub steps: Vec<StepSummary>,
    /// Final mesh vertices and eigenfunctions, for export.
    #[serde(skip)]
    pub vertices: Vec<[f64; 2]>,
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
}

impl SpectrumReport {
    pub fn genuine_values(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .filter(|e| e.stability == Stability::Genuine)
            .map(|e| e.value)
            .collect()
    }

    pub fn lowest_genuine(&self) -> Option<f64> {
        self.genuine_values().into_iter().next()
    }
}

fn lowest_modes(sys: &AssembledSystem, s: f64, k: usize) -> Result<Vec<Mode>> {
    let (a, b) = sys.reduced_pencil(s);
    let pairs = solve_lowest(&a, &b, k.min(a.dim()))?;
    Ok(pairs
        .values
        .iter()
        .zip(&pairs.vectors)
        .zip(&pairs.residuals)
        .map(|((&value, v), &residual)| Mode { value, exponent: None, residual, vector: sys.expand(v) })
        .collect())
}

/// Eigenpairs with eigenvalue below `bound`, plus the first one above it
/// when the pencil has one. Grows the request until the bound is passed.
fn modes_up_to(sys: &AssembledSystem, s: f64, bound: f64, cap: usize) -> Result<Vec<Mode>> {
    let n = sys.free_count();
    let mut k = 6.min(n);
    loop {
        let modes = lowest_modes(sys, s, k)?;
        let passed = modes.last().is_some_and(|m| m.value >= bound);
        if passed || k == n || k >= cap {
            let below = modes.iter().filter(|m| m.value < bound).count();
            return Ok(modes.into_iter().take(below + 1).collect());
        }
        k = (2 * k).min(n).min(cap);
    }
}

/// Solves `λ_i(s) = s(1 − s)` for `s ∈ [1/2, 1]`, given `λ_i(1/2) < 1/4`.
fn self_consistent_mode(sys: &AssembledSystem, i: usize) -> Result<Mode> {
    let eval = |s: f64| -> Result<(f64, Mode)> {
        let mut modes = lowest_modes(sys, s, i + 1)?;
        let m = modes.pop().expect("i + 1 modes");
        Ok((m.value - s * (1.0 - s), m))
    };
    let (f1, m1) = eval(1.0)?;
    if f1 <= 1e-9 {
        return Ok(Mode { value: 0.0, exponent: Some(1.0), ..m1 });
    }
    let (mut a, mut b) = (0.5, 1.0);
    let (mut fa, mut fb) = (eval(0.5)?.0, f1);
    if fa >= 0.0 {
        return Err(Error::NoConvergence("exponent bracket lost its sign change".into()));
    }
    // Illinois variant of regula falsi
    let mut side = 0i8;
    for _ in 0..100 {
        let s = (a * fb - b * fa) / (fb - fa);
        let (fs, mode) = eval(s)?;
        if fs.abs() < 1e-13 || (b - a) < 1e-11 {
            return Ok(Mode { value: s * (1.0 - s), exponent: Some(s), ..mode });
        }
        if fs < 0.0 {
            a = s;
            fa = fs;
            if side == -1 {
                fb /= 2.0;
            }
            side = -1;
        } else {
            b = s;
            fb = fs;
            if side == 1 {
                fa /= 2.0;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence(format!("exponent iteration for eigenvalue {i} did not converge")))
}

/// Eigenpairs of one discretization with value below `kappa`, plus the
/// next one. Under the asymptotic truncation each mode below `1/4` carries
/// its own self-consistent exponent.
pub fn eigenpairs_below(sys: &AssembledSystem, kappa: f64, cap: usize) -> Result<Vec<Mode>> {
    if !sys.has_robin() {
        return modes_up_to(sys, 1.0, kappa, cap);
    }
    let at_half = modes_up_to(sys, 0.5, kappa.max(0.25), cap)?;
    let mut out = Vec::with_capacity(at_half.len());
    for (i, m) in at_half.into_iter().enumerate() {
        if m.value < 0.25 {
            out.push(self_consistent_mode(sys, i)?);
        } else {
            out.push(Mode { exponent: Some(0.5), ..m });
        }
    }
    // each mode has its own exponent, so the order is not automatic
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    let below = out.iter().filter(|m| m.value < kappa).count();
    out.truncate(below + 1);
    Ok(out)
}

/// Fraction of `uᵀBu` carried by vertices within hyperbolic distance `d0`
/// of a truncation line.
pub fn boundary_mass_fraction(mesh: &Mesh, sys: &AssembledSystem, u: &[f64], d0: f64) -> f64 {
    let bu = sys.mass.mul_vec(u);
    let total: f64 = u.iter().zip(&bu).map(|(a, b)| a * b).sum();
    let near: f64 = mesh
        .truncation_distance()
        .iter()
        .zip(u.iter().zip(&bu))
        .filter(|(d, _)| **d < d0)
        .map(|(_, (a, b))| a * b)
        .sum();
    if total > 0.0 {
        (near / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn check_schedule(schedule: &[ScheduleStep]) -> Result<()> {
    if schedule.len() < 3 {
        return Err(Error::InvalidParameter(format!("schedule needs at least 3 steps, got {}", schedule.len())));
    }
    for w in schedule.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(q.h < p.h && q.eps <= p.eps && q.top >= p.top) {
            return Err(Error::InvalidParameter(
                "each schedule step must refine h and keep or extend the truncation".into(),
            ));
        }
    }
    Ok(())
}

/// Discrete spectrum below `kappa` on `domain`, computed at each step of
/// `schedule` and classified on the last one.
///
/// An eigenvalue is genuine when it moved by less than `stability_tol`
/// since the previous step and its eigenfunction keeps less than
/// `boundary_mass_tol` of its mass within `boundary_layer_widths · h` of
/// the truncation. Too much mass there marks it spurious; otherwise an
/// unstable value is unresolved.
pub fn spectrum_below(
    domain: &HyperbolicDomain,
    kappa: f64,
    schedule: &[ScheduleStep],
    config: &SpectralConfig,
) -> Result<SpectrumReport> {
    check_schedule(schedule)?;
    let mut steps = Vec::with_capacity(schedule.len());
    let mut previous: Vec<f64> = Vec::new();
    let mut last = None;
    for (idx, step) in schedule.iter().enumerate() {
        let d = domain.with_truncation(step.eps, step.top)?;
        let mesh = build_mesh(&d, step.h)?;
        let sys = assemble(&mesh);
        let modes = eigenpairs_below(&sys, kappa, config.max_eigenpairs)?;
        steps.push(StepSummary {
            step: *step,
            vertices: mesh.vertex_count(),
            triangles: mesh.triangle_count(),
            min_angle_deg: mesh.min_angle_deg(),
            eigenvalues: modes.iter().map(|m| m.value).collect(),
        });
        if idx + 1 == schedule.len() {
            last = Some((mesh, sys, modes));
        } else {
            previous = steps.last().expect("pushed").eigenvalues.clone();
        }
    }
    let (mesh, sys, modes) = last.expect("schedule is nonempty");
    let h = schedule.last().expect("nonempty").h;
    let d0 = config.boundary_layer_widths * h;

    let mut eigenvalues = Vec::new();
    let mut eigenfunctions = Vec::new();
    for (i, m) in modes.iter().enumerate().filter(|(_, m)| m.value < kappa) {
        let drift = previous.get(i).map(|p| (m.value - p).abs());
        let boundary_mass = boundary_mass_fraction(&mesh, &sys, &m.vector, d0);
        let stability = if boundary_mass >= config.boundary_mass_tol {
            Stability::Spurious
        } else if drift.is_some_and(|d| d < config.stability_tol) {
            Stability::Genuine
        } else {
            Stability::Unresolved
        };
        eigenvalues.push(EigenvalueEntry {
            value: m.value,
            stability,
            drift,
            boundary_mass,
            residual: m.residual,
            exponent: m.exponent,
        });
        eigenfunctions.push(m.vector.clone());
    }
    let genuine_count = eigenvalues.iter().filter(|e| e.stability == Stability::Genuine).count();
    Ok(SpectrumReport {
        domain: domain.name.clone(),
        kappa,
        truncation: domain.truncation.bc,
        config: *config,
        eigenvalues,
        genuine_count,
        steps,
        vertices: mesh.vertices,
        eigenfunctions,
    })
}
