//! Reproducible experiments on top of `kleinian-core`. Every command reads a
//! [`RunConfig`], writes its data files into an output directory and maps
//! its verdict onto a process exit code.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use kleinian_core::gap::{self, ApollonianConfig, GapReport, HeckeConfig, Status};
use kleinian_core::geom::InversiveCircle;
use kleinian_core::packing::{
    count_profile, enumerate_circles_geometric, fit_growth_exponent, log_spaced, CirclesQuadruple, DescartesQuadruple,
    GrowthFit,
};
use kleinian_core::spectral::{
    default_schedule, spectrum_below, HyperbolicDomain, ScheduleStep, SpectralConfig, SpectrumReport,
};
use serde::{Deserialize, Serialize};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNRESOLVED: i32 = 3;

/// Bad input rather than a failed computation; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Exit code for an error returned by a command.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    use kleinian_core::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidRoot { .. } | E::InvalidParameter(_) | E::InvalidDomain(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            };
        }
    }
    EXIT_FAIL
}

pub fn exit_code_for_status(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Unresolved => EXIT_UNRESOLVED,
    }
}

/// A domain named on the command line: `hecke_D(3)`, `hecke_D1`,
/// `hecke_D2(3)` or `strip(a, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    HeckeD { mu: f64 },
    HeckeD1,
    HeckeD2 { mu: f64 },
    Strip { a: f64, l: f64 },
}

impl DomainSpec {
    pub fn build(&self) -> kleinian_core::Result<HyperbolicDomain> {
        match *self {
            DomainSpec::HeckeD { mu } => HyperbolicDomain::hecke_d(mu),
            DomainSpec::HeckeD1 => Ok(HyperbolicDomain::hecke_d1()),
            DomainSpec::HeckeD2 { mu } => HyperbolicDomain::hecke_d2(mu),
            DomainSpec::Strip { a, l } => HyperbolicDomain::strip(a, l),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let spec: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let args = |name: &str| -> Option<Vec<f64>> {
            let inner = spec.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
            inner.split(',').map(|t| t.parse().ok()).collect()
        };
        if spec == "hecke_d1" {
            return Ok(DomainSpec::HeckeD1);
        }
        match (args("hecke_d2"), args("hecke_d"), args("strip")) {
            (Some(v), _, _) if v.len() == 1 => Ok(DomainSpec::HeckeD2 { mu: v[0] }),
            (_, Some(v), _) if v.len() == 1 => Ok(DomainSpec::HeckeD { mu: v[0] }),
            (_, _, Some(v)) if v.len() == 2 => Ok(DomainSpec::Strip { a: v[0], l: v[1] }),
            _ => Err(UsageError(format!(
                "unknown domain '{s}'; expected hecke_D(mu), hecke_D1, hecke_D2(mu) or strip(a,L)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PackConfig {
    pub root: DescartesQuadruple,
    pub tmax: f64,
    /// Width of the SVG canvas in pixels.
    pub size: f64,
}

impl Default for PackConfig {
    fn default() -> Self {
        Self { root: DescartesQuadruple::CLASSICAL, tmax: 100.0, size: 800.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CountConfig {
    pub root: DescartesQuadruple,
    pub tmax: f64,
    pub tmin: f64,
    pub thresholds: usize,
    /// Smallest threshold used by the fit.
    pub fit_from: f64,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self { root: DescartesQuadruple::CLASSICAL, tmax: 1e5, tmin: 10.0, thresholds: 41, fit_from: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumConfig {
    pub domain: DomainSpec,
    pub kappa: f64,
    pub schedule: Vec<ScheduleStep>,
    pub spectral: SpectralConfig,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::HeckeD { mu: 3.0 },
            kappa: 0.25,
            schedule: default_schedule(),
            spectral: SpectralConfig::default(),
        }
    }
}

/// Parameters of every command. A file needs to name only what differs
/// from the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub pack: PackConfig,
    pub count: CountConfig,
    pub spectrum: SpectrumConfig,
    pub hecke: HeckeConfig,
    pub apollonian: ApollonianConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}

/// Output directory of one run.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
}

impl Output {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)
    }

    fn csv_writer(&self, name: &str) -> Result<csv::Writer<fs::File>> {
        let p = self.path(name);
        csv::Writer::from_path(&p).with_context(|| format!("writing {}", p.display()))
    }
}

#[derive(Debug, Clone, Serialize)]
struct CircleRow {
    curv: f64,
    cocurv: f64,
    cx: f64,
    cy: f64,
}

pub struct PackSummary {
    pub circles: usize,
    pub svg_circles: usize,
}

fn root_circles(root: &DescartesQuadruple) -> Result<CirclesQuadruple> {
    root.validate_root()?;
    Ok(CirclesQuadruple::from_descartes(root)?)
}

fn svg(bounding: &[InversiveCircle], circles: &[InversiveCircle], size: f64) -> String {
    // frame: the bounding circle if there is one, else the box around the
    // drawn circles
    let (cx, cy, r) = match bounding.first().and_then(|b| Some((b.center()?, b.radius()?))) {
        Some((c, r)) => (c.x, c.y, r),
        None => {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for c in circles {
                if let (Some(p), Some(r)) = (c.center(), c.radius()) {
                    lo = [lo[0].min(p.x - r), lo[1].min(p.y - r)];
                    hi = [hi[0].max(p.x + r), hi[1].max(p.y + r)];
                }
            }
            ((lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0, ((hi[0] - lo[0]).max(hi[1] - lo[1]) / 2.0).max(1e-9))
        }
    };
    let scale = 0.48 * size / r;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let mut draw = |c: &InversiveCircle, class: &str| {
        if let (Some(p), Some(rad)) = (c.center(), c.radius()) {
            let _ = writeln!(
                s,
                r#"  <circle class="{class}" cx="{:.4}" cy="{:.4}" r="{:.4}" fill="none" stroke="black" stroke-width="{:.3}"/>"#,
                size / 2.0 + (p.x - cx) * scale,
                size / 2.0 - (p.y - cy) * scale,
                rad * scale,
                if class == "bounding" { 1.5 } else { 0.5 },
            );
        }
    };
    for c in bounding {
        draw(c, "bounding");
    }
    for c in circles {
        draw(c, "circle");
    }
    s.push_str("</svg>\n");
    s
}

/// `circles.csv` and `packing.svg`: every circle of curvature at most
/// `tmax`, plus the bounding circle.
pub fn cmd_pack(cfg: &PackConfig, out: &Output) -> Result<PackSummary> {
    let root = root_circles(&cfg.root)?;
    let circles = enumerate_circles_geometric(&root, cfg.tmax)?;
    let bounding: Vec<InversiveCircle> = root.circles.iter().copied().filter(|c| c.curv < 0.0).collect();
    let mut w = out.csv_writer("circles.csv")?;
    for c in bounding.iter().chain(&circles) {
        // adding zero turns -0.0 into 0.0
        let z = |v: f64| v + 0.0;
        w.serialize(CircleRow { curv: z(c.curv), cocurv: z(c.cocurv), cx: z(c.cx), cy: z(c.cy) })?;
    }
    w.flush()?;
    out.write("packing.svg", &svg(&bounding, &circles, cfg.size))?;
    Ok(PackSummary { circles: circles.len(), svg_circles: circles.len() + bounding.len() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountSummary {
    pub root: DescartesQuadruple,
    pub tmax: f64,
    pub count_at_tmax: u64,
    pub fit: GrowthFit,
}

/// `counts.csv` with `(T, N(T))` and `growth.json` with the fitted exponent.
pub fn cmd_count(cfg: &CountConfig, out: &Output) -> Result<CountSummary> {
    if !(cfg.tmin > 0.0 && cfg.tmax > cfg.tmin && cfg.thresholds >= 2) {
        return Err(UsageError(format!(
            "need 0 < tmin < tmax and at least two thresholds, got tmin = {}, tmax = {}, {} thresholds",
            cfg.tmin, cfg.tmax, cfg.thresholds
        ))
        .into());
    }
    let profile = count_profile(&cfg.root, &log_spaced(cfg.tmin, cfg.tmax, cfg.thresholds))?;
    let mut w = out.csv_writer("counts.csv")?;
    w.write_record(["T", "N"])?;
    for (t, n) in profile.thresholds.iter().zip(&profile.counts) {
        w.write_record([t.to_string(), n.to_string()])?;
    }
    w.flush()?;
    let fit = fit_growth_exponent(&profile, cfg.fit_from * (1.0 - 1e-12))?;
    let summary = CountSummary {
        root: cfg.root,
        tmax: cfg.tmax,
        count_at_tmax: *profile.counts.last().unwrap_or(&0),
        fit,
    };
    out.write_json("growth.json", &summary)?;
    Ok(summary)
}

/// `spectrum.json` and one `eigenfunction_<i>.csv` per eigenvalue below κ.
pub fn cmd_spectrum(cfg: &SpectrumConfig, out: &Output) -> Result<SpectrumReport> {
    let domain = cfg.domain.build()?;
    let report = spectrum_below(&domain, cfg.kappa, &cfg.schedule, &cfg.spectral)?;
    out.write_json("spectrum.json", &report)?;
    for (i, f) in report.eigenfunctions.iter().enumerate() {
        let mut w = out.csv_writer(&format!("eigenfunction_{i}.csv"))?;
        w.write_record(["vertex", "x", "y", "value"])?;
        for (v, (p, u)) in report.vertices.iter().zip(f).enumerate() {
            w.write_record([v.to_string(), p[0].to_string(), p[1].to_string(), u.to_string()])?;
        }
        w.flush()?;
    }
    Ok(report)
}

pub fn cmd_verify_hecke(mu: f64, cfg: &HeckeConfig, out: &Output) -> Result<GapReport> {
    if !(mu > 2.0) {
        return Err(UsageError(format!("mu = {mu} must exceed 2")).into());
    }
    let report = gap::verify_hecke_gap(mu, cfg)?;
    out.write_json("hecke_report.json", &report)?;
    Ok(report)
}

pub fn cmd_verify_apollonian(tmax: f64, cfg: &ApollonianConfig, out: &Output) -> Result<GapReport> {
    let report = gap::apollonian_report(tmax, cfg)?;
    out.write_json("apollonian_report.json", &report)?;
    Ok(report)
}
