use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use kleinian_cli::*;
use kleinian_core::packing::DescartesQuadruple;

#[derive(Parser)]
#[command(name = "kleinian", version, about = "Apollonian packings, Hecke-group limit sets and hyperbolic spectra")]
struct Cli {
    /// TOML file with run parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for all output files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate a packing to curvature T; writes circles.csv and packing.svg.
    Pack {
        /// Root quadruple, e.g. "(-1, 2, 2, 3)".
        #[arg(long)]
        root: Option<DescartesQuadruple>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        size: Option<f64>,
    },
    /// Count circles up to each threshold and fit the growth exponent.
    Count {
        #[arg(long)]
        root: Option<DescartesQuadruple>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        tmin: Option<f64>,
        #[arg(long)]
        thresholds: Option<usize>,
        #[arg(long)]
        fit_from: Option<f64>,
    },
    /// Eigenvalues below kappa on a named domain.
    Spectrum {
        /// hecke_D(mu), hecke_D1, hecke_D2(mu) or strip(a,L).
        #[arg(long)]
        domain: Option<DomainSpec>,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Run a verification case and exit with its verdict.
    Verify {
        #[command(subcommand)]
        case: Case,
    },
}

#[derive(Subcommand)]
enum Case {
    /// Spectral gap of the Hecke group with translation length mu.
    Hecke {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
    },
    /// Growth exponent of the classical packing and derived constants.
    Apollonian {
        #[arg(long, default_value_t = 1e6)]
        tmax: f64,
    },
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out = Output::create(&cli.out)?;
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    match cli.command {
        Command::Pack { root, tmax, size } => {
            if let Some(r) = root {
                cfg.pack.root = r;
            }
            set(&mut cfg.pack.tmax, tmax);
            set(&mut cfg.pack.size, size);
            out.write("config.toml", &cfg.to_toml()?)?;
            let s = cmd_pack(&cfg.pack, &out)?;
            println!("{} circles with curvature <= {}; {} drawn", s.circles, cfg.pack.tmax, s.svg_circles);
            Ok(EXIT_PASS)
        }
        Command::Count { root, tmax, tmin, thresholds, fit_from } => {
            if let Some(r) = root {
                cfg.count.root = r;
            }
            set(&mut cfg.count.tmax, tmax);
            set(&mut cfg.count.tmin, tmin);
            set(&mut cfg.count.fit_from, fit_from);
            if let Some(n) = thresholds {
                cfg.count.thresholds = n;
            }
            out.write("config.toml", &cfg.to_toml()?)?;
            let s = cmd_count(&cfg.count, &out)?;
            println!(
                "N({}) = {}; growth exponent {:.5} ± {:.5} over {} thresholds",
                s.tmax, s.count_at_tmax, s.fit.delta, s.fit.stderr, s.fit.points
            );
            Ok(EXIT_PASS)
        }
        Command::Spectrum { domain, kappa } => {
            if let Some(d) = domain {
                cfg.spectrum.domain = d;
            }
            set(&mut cfg.spectrum.kappa, kappa);
            out.write("config.toml", &cfg.to_toml()?)?;
            let r = cmd_spectrum(&cfg.spectrum, &out)?;
            println!("{}: {} genuine eigenvalue(s) below {}", r.domain, r.genuine_count, r.kappa);
            for e in &r.eigenvalues {
                println!("  {:.6}  {:?}", e.value, e.stability);
            }
            Ok(EXIT_PASS)
        }
        Command::Verify { case } => {
            out.write("config.toml", &cfg.to_toml()?)?;
            let report = match case {
                Case::Hecke { mu } => cmd_verify_hecke(mu, &cfg.hecke, &out)?,
                Case::Apollonian { tmax } => cmd_verify_apollonian(tmax, &cfg.apollonian, &out)?,
            };
            println!("{report}");
            Ok(exit_code_for_status(report.status()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
