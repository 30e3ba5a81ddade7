//! Checks that tie the packing, dimension and spectral modules together:
//! the wall-count criterion for eigenvalue-free regions, the counting
//! inequality for Neumann cuts, the Hecke gap and the Apollonian constants.
//!
//! Each check is split into evidence gathering (expensive, serializable)
//! and an assessment that is a pure function of the evidence and the
//! tolerances.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dimension::{
    box_counting_dimension, default_scales, dyadic_scales, ps_eigenvalue, DimensionEstimate, DimensionMethod,
    HeckeSampler, DEFAULT_RESOLUTION,
};
use crate::packing::{
    count_profile, fit_growth_exponent, log_spaced, residual_set_points, CirclesQuadruple, CountProfile,
    DescartesQuadruple, GrowthFit,
};
use crate::spectral::{
    default_schedule, spectrum_below, HyperbolicDomain, ScheduleStep, SpectralConfig, SpectrumReport, Stability,
};
use crate::{Error, Result};

/// Whether a region of `H^{n+1}` bounded by `m` geodesic hyperplanes is
/// guaranteed free of Neumann eigenvalues below `(n/2)²`: `m ≤ ⌊(n+4)/2⌋`.
pub fn eigenvalue_free_bound(n: u32, m: u32) -> bool {
    m <= (n + 4) / 2
}

/// `#{λ_i(D) < κ} ≤ #{λ_i(D₁) < κ} + #{λ_i(D₂) < κ}` on genuine counts.
pub fn neumann_cut_check(d: &SpectrumReport, d1: &SpectrumReport, d2: &SpectrumReport, kappa: f64) -> Result<bool> {
    for r in [d, d1, d2] {
        if r.kappa != kappa {
            return Err(Error::InvalidParameter(format!(
                "report for {} was computed below {}, not {kappa}",
                r.domain, r.kappa
            )));
        }
    }
    Ok(counts_satisfy_cut(d.genuine_count, d1.genuine_count, d2.genuine_count))
}

pub fn counts_satisfy_cut(d: usize, d1: usize, d2: usize) -> bool {
    d <= d1 + d2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Unresolved,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Unresolved => "UNRESOLVED",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub target: String,
}

impl Criterion {
    fn new(name: &str, status: Status, value: Option<f64>, target: impl Into<String>) -> Self {
        Self { name: name.into(), status, value, target: target.into() }
    }

    fn band(name: &str, value: f64, band: [f64; 2]) -> Self {
        let ok = value >= band[0] && value <= band[1];
        Self::new(name, if ok { Status::Pass } else { Status::Fail }, Some(value), format!("in [{}, {}]", band[0], band[1]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub label: String,
    pub delta: f64,
    pub stderr: f64,
    pub method: DimensionMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainCount {
    pub domain: String,
    pub genuine: usize,
    pub spurious: usize,
    pub unresolved: usize,
}

impl DomainCount {
    fn of(r: &SpectrumReport) -> Self {
        let count = |s| r.eigenvalues.iter().filter(|e| e.stability == s).count();
        Self {
            domain: r.domain.clone(),
            genuine: count(Stability::Genuine),
            spurious: count(Stability::Spurious),
            unresolved: count(Stability::Unresolved),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub case: String,
    pub deltas: Vec<DeltaEntry>,
    pub lambda0: Option<f64>,
    /// Next eigenvalue of the full domain, when the solver reached it.
    pub lambda1: Option<f64>,
    pub spectral_gap: Option<f64>,
    pub identity_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub counts: Vec<DomainCount>,
    pub criteria: Vec<Criterion>,
    pub notes: Vec<String>,
}

impl GapReport {
    /// `Fail` if any criterion failed, else `Unresolved` if any is
    /// unresolved, else `Pass`.
    pub fn status(&self) -> Status {
        self.criteria.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for GapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.case)?;
        for d in &self.deltas {
            writeln!(f, "  delta ({}, {:?}) = {:.5} ± {:.5}", d.label, d.method, d.delta, d.stderr)?;
        }
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.5}"));
        writeln!(f, "  lambda0 = {}  lambda1 = {}  gap = {}", opt(self.lambda0), opt(self.lambda1), opt(self.spectral_gap))?;
        if let Some(r) = self.identity_residual {
            writeln!(f, "  identity residual = {r:.5}")?;
        }
        if let Some(eta) = self.eta {
            writeln!(f, "  eta = {eta:.5}")?;
        }
        for c in &self.counts {
            writeln!(
                f,
                "  {:<16} genuine {}  spurious {}  unresolved {}",
                c.domain, c.genuine, c.spurious, c.unresolved
            )?;
        }
        writeln!(f, "  {:<20} {:<11} {:>10}  target", "criterion", "status", "value")?;
        for c in &self.criteria {
            writeln!(f, "  {:<20} {:<11} {:>10}  {}", c.name, c.status.to_string(), opt(c.value), c.target)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        write!(f, "  overall: {}", self.status())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeckeConfig {
    pub kappa: f64,
    pub schedule: Vec<ScheduleStep>,
    pub spectral: SpectralConfig,
    pub depth: usize,
    /// Minimum number of branches `K` per sign.
    pub branches: u32,
    pub adaptive_tail: bool,
    pub resolution: f64,
    pub scales: Vec<f64>,
    pub identity_tol: f64,
    /// Largest change of the dimension estimate when `K` doubles.
    pub branch_stability_tol: f64,
    /// Interval that must hold no genuine eigenvalue of the congruence
    /// domain `D₁`.
    pub d1_window: [f64; 2],
}

impl Default for HeckeConfig {
    fn default() -> Self {
        Self {
            kappa: 0.25,
            schedule: default_schedule(),
            spectral: SpectralConfig::default(),
            depth: 8,
            branches: 20,
            adaptive_tail: true,
            resolution: DEFAULT_RESOLUTION,
            scales: default_scales(),
            identity_tol: 0.02,
            branch_stability_tol: 0.01,
            d1_window: [0.01, 0.24],
        }
    }
}

/// Everything [`assess_hecke`] looks at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeckeEvidence {
    pub mu: f64,
    pub d: SpectrumReport,
    pub d1: SpectrumReport,
    pub d2: SpectrumReport,
    pub delta: DimensionEstimate,
    /// The same estimate with twice as many branches.
    pub delta_doubled: DimensionEstimate,
}

pub fn hecke_delta(mu: f64, branches: u32, config: &HeckeConfig) -> Result<DimensionEstimate> {
    let sample = HeckeSampler::new(mu, config.depth, branches)?
        .adaptive(config.adaptive_tail)
        .with_resolution(config.resolution)
        .sample()?;
    box_counting_dimension(&sample, &config.scales)
}

pub fn hecke_evidence(mu: f64, config: &HeckeConfig) -> Result<HeckeEvidence> {
    let d = HyperbolicDomain::hecke_d(mu)?;
    let d2 = HyperbolicDomain::hecke_d2(mu)?;
    let run = |dom: &HyperbolicDomain| spectrum_below(dom, config.kappa, &config.schedule, &config.spectral);
    Ok(HeckeEvidence {
        mu,
        d: run(&d)?,
        d1: run(&HyperbolicDomain::hecke_d1())?,
        d2: run(&d2)?,
        delta: hecke_delta(mu, config.branches, config)?,
        delta_doubled: hecke_delta(mu, 2 * config.branches, config)?,
    })
}

fn unresolved_below(r: &SpectrumReport) -> bool {
    r.eigenvalues.iter().any(|e| e.stability == Stability::Unresolved)
}

pub fn assess_hecke(ev: &HeckeEvidence, config: &HeckeConfig) -> Result<GapReport> {
    let mut criteria = Vec::new();
    let counts = [&ev.d, &ev.d1, &ev.d2].map(DomainCount::of);

    let exact_count = |r: &SpectrumReport, want: usize| {
        if r.genuine_count == want && !unresolved_below(r) {
            Status::Pass
        } else if unresolved_below(r) {
            Status::Unresolved
        } else {
            Status::Fail
        }
    };
    criteria.push(Criterion::new(
        "count-d",
        exact_count(&ev.d, 1),
        Some(ev.d.genuine_count as f64),
        "exactly one genuine eigenvalue below kappa",
    ));

    let cut = neumann_cut_check(&ev.d, &ev.d1, &ev.d2, config.kappa)?;
    let cut_status = if !cut {
        Status::Fail
    } else if [&ev.d, &ev.d1, &ev.d2].into_iter().any(unresolved_below) {
        Status::Unresolved
    } else {
        Status::Pass
    };
    criteria.push(Criterion::new("cut-inequality", cut_status, None, "count(D) <= count(D1) + count(D2)"));

    criteria.push(Criterion::new(
        "d2-wall-bound",
        if eigenvalue_free_bound(1, 2) { exact_count(&ev.d2, 0) } else { Status::Fail },
        Some(ev.d2.genuine_count as f64),
        "two walls: no genuine eigenvalue",
    ));

    let [lo, hi] = config.d1_window;
    let in_window = ev
        .d1
        .eigenvalues
        .iter()
        .filter(|e| e.stability == Stability::Genuine && e.value > lo && e.value < hi)
        .count();
    criteria.push(Criterion::new(
        "d1-window",
        if in_window == 0 { exact_count(&ev.d1, 1) } else { Status::Fail },
        Some(in_window as f64),
        format!("no genuine eigenvalue in ({lo}, {hi})"),
    ));

    let delta = ev.delta.delta;
    let ok = delta > 0.5 && delta < 1.0;
    criteria.push(Criterion::new(
        "delta-range",
        if ok { Status::Pass } else { Status::Fail },
        Some(delta),
        "in (0.5, 1)",
    ));

    let branch_change = (ev.delta_doubled.delta - delta).abs();
    criteria.push(Criterion::new(
        "branch-stability",
        if branch_change <= config.branch_stability_tol { Status::Pass } else { Status::Unresolved },
        Some(branch_change),
        format!("<= {} when K doubles", config.branch_stability_tol),
    ));

    let lambda0 = ev.d.lowest_genuine();
    let identity_residual = lambda0.map(|l| (l - delta * (1.0 - delta)).abs());
    criteria.push(Criterion::new(
        "identity",
        match identity_residual {
            Some(r) if r <= config.identity_tol => Status::Pass,
            Some(_) => Status::Fail,
            None => Status::Unresolved,
        },
        identity_residual,
        format!("|lambda0 - delta(1 - delta)| <= {}", config.identity_tol),
    ));

    let lambda1 = lambda0.and_then(|l0| {
        ev.d.steps
            .last()
            .and_then(|s| s.eigenvalues.iter().copied().find(|&v| v > l0 + config.spectral.stability_tol))
    });
    let mut deltas = vec![DeltaEntry {
        label: format!("limit set, K = {}", config.branches),
        delta,
        stderr: ev.delta.stderr,
        method: ev.delta.method,
    }];
    deltas.push(DeltaEntry {
        label: format!("limit set, K = {}", 2 * config.branches),
        delta: ev.delta_doubled.delta,
        stderr: ev.delta_doubled.stderr,
        method: ev.delta_doubled.method,
    });
    let mut notes: Vec<String> = [&ev.delta, &ev.delta_doubled].iter().filter_map(|e| e.warning.clone()).collect();
    if ev.mu <= 2.0 {
        notes.push("mu <= 2: the limit set is the whole boundary".into());
    }
    Ok(GapReport {
        case: format!("hecke mu = {}", ev.mu),
        deltas,
        lambda0,
        lambda1,
        spectral_gap: lambda0.zip(lambda1).map(|(a, b)| b - a),
        identity_residual,
        eta: None,
        counts: counts.to_vec(),
        criteria,
        notes,
    })
}

/// Spectra on the Hecke domain and its two cut pieces, the limit-set
/// dimension, and the checks that connect them.
pub fn verify_hecke_gap(mu: f64, config: &HeckeConfig) -> Result<GapReport> {
    if !(mu > 2.0) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must exceed 2")));
    }
    assess_hecke(&hecke_evidence(mu, config)?, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApollonianConfig {
    pub root: DescartesQuadruple,
    pub thresholds: usize,
    /// The growth fit uses `T` in `[T_max / 10^fit_decades, T_max]`.
    pub fit_decades: f64,
    pub box_tmax: f64,
    pub delta_band: [f64; 2],
    pub lambda_band: [f64; 2],
    pub eta_band: [f64; 2],
    pub box_band: [f64; 2],
}

impl Default for ApollonianConfig {
    fn default() -> Self {
        Self {
            root: DescartesQuadruple::CLASSICAL,
            thresholds: 31,
            fit_decades: 3.0,
            box_tmax: 1e4,
            delta_band: [1.29, 1.32],
            lambda_band: [0.89, 0.92],
            eta_band: [1.17, 1.20],
            box_band: [1.25, 1.36],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApollonianEvidence {
    pub tmax: f64,
    pub profile: CountProfile,
    pub fit: GrowthFit,
    pub box_estimate: DimensionEstimate,
}

/// Dyadic box sizes for a packing enumerated to curvature `t`: the finest
/// is about `t^(-2/3)`, and the range spans seven octaves.
pub fn packing_box_scales(t: f64) -> Vec<f64> {
    let finest = ((2.0 / 3.0) * t.log2()).round() as i32;
    dyadic_scales(finest - 7, finest)
}

pub fn apollonian_evidence(tmax: f64, config: &ApollonianConfig) -> Result<ApollonianEvidence> {
    if !(tmax >= 1e4) {
        return Err(Error::InvalidParameter(format!("tmax = {tmax} must be at least 1e4")));
    }
    let t_min = tmax / 10f64.powf(config.fit_decades);
    let profile = count_profile(&config.root, &log_spaced(t_min, tmax, config.thresholds))?;
    // exp(ln t) may land an ulp below t_min
    let fit = fit_growth_exponent(&profile, t_min * (1.0 - 1e-12))?;
    let circles = CirclesQuadruple::from_descartes(&config.root)?;
    let points = residual_set_points(&circles, config.box_tmax)?;
    let sample = crate::dimension::LimitSetSample::in_plane(
        points.iter().map(|p| [p.x, p.y]).collect(),
        0,
        format!("tangency points of circles with curvature <= {}", config.box_tmax),
    );
    let box_estimate = box_counting_dimension(&sample, &packing_box_scales(config.box_tmax))?;
    Ok(ApollonianEvidence { tmax, profile, fit, box_estimate })
}

pub fn assess_apollonian(ev: &ApollonianEvidence, config: &ApollonianConfig) -> Result<GapReport> {
    let delta = ev.fit.delta;
    let lambda0 = ps_eigenvalue(delta, 2)?;
    let eta = 0.6 * delta + 0.4;
    let affine = (eta - (3.0 * delta / 5.0 + 2.0 / 5.0)).abs();
    let criteria = vec![
        Criterion::band("delta", delta, config.delta_band),
        Criterion::band("lambda0", lambda0, config.lambda_band),
        Criterion::band("eta", eta, config.eta_band),
        Criterion::new(
            "eta-affine",
            if affine <= 4.0 * f64::EPSILON * eta { Status::Pass } else { Status::Fail },
            Some(affine),
            "eta - (3 delta/5 + 2/5) = 0 to machine precision",
        ),
        Criterion::band("box-band", ev.box_estimate.delta, config.box_band),
    ];
    let mut notes = vec![
        "lambda0 = delta(2 - delta) and eta = 3 delta/5 + 2/5 are computed from delta; \
         no eigensolve is done on the three-dimensional quotient"
            .to_string(),
    ];
    notes.extend(ev.box_estimate.warning.clone());
    Ok(GapReport {
        case: format!("apollonian root {} tmax = {}", ev.profile.root, ev.tmax),
        deltas: vec![
            DeltaEntry {
                label: format!("growth fit, {} thresholds from {:.0}", ev.fit.points, ev.fit.t_min),
                delta,
                stderr: ev.fit.stderr,
                method: DimensionMethod::GrowthFit,
            },
            DeltaEntry {
                label: format!("box count, curvature <= {}", config.box_tmax),
                delta: ev.box_estimate.delta,
                stderr: ev.box_estimate.stderr,
                method: DimensionMethod::BoxCount,
            },
        ],
        lambda0: Some(lambda0),
        lambda1: None,
        spectral_gap: None,
        identity_residual: None,
        eta: Some(eta),
        counts: Vec::new(),
        criteria,
        notes,
    })
}

/// Growth exponent of the packing and the constants derived from it.
pub fn apollonian_report(tmax: f64, config: &ApollonianConfig) -> Result<GapReport> {
    assess_apollonian(&apollonian_evidence(tmax, config)?, config)
}
