//! `smoothpa` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical assertion, 1 anything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use smoothpa::adversary::{min_support, SmoothDistribution};
use smoothpa::diagnostics::{
    chi_square_bruteforce, chi_square_closed_form, nml_value, FiniteClass, MAX_BRUTE_RATE,
    MAX_BRUTE_UNIVERSE,
};
use smoothpa::harness::{self, group_fits, ExperimentConfig, SweepSummary};
use smoothpa::hypotheses::{FamilySpec, RegionFamily};
use smoothpa::learners::{cover_radius, epsilon_cover};
use smoothpa::{ContextUniverse, Error, Result};

const DEFAULT_CUTOFF: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "smoothpa",
    version,
    about = "Sequential probability assignment against smooth adversaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output` directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// χ² report for D uniform on the first ⌈σU⌉ contexts.
    Chi2 {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        universe: usize,
        /// Tail mass left out of the brute-force enumeration.
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
    },
    /// NML log-normaliser of a finite class on fixed contexts.
    Nml {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        contexts: PathBuf,
    },
    /// ε-cover of a region family.
    Cover {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Re-fit scaling laws from a `summary.json`.
    Fit {
        #[arg(long)]
        summary: PathBuf,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn run(config: &Path, output: Option<PathBuf>) -> Result<Value> {
    let text = fs::read_to_string(config)?;
    let cfg = ExperimentConfig::from_json_str(&text)?;
    let out = harness::output_dir(&cfg, output);
    let summary = harness::run(&cfg, out.as_deref())?;
    Ok(json!({"run": {
        "output": out.map(|p| p.display().to_string()),
        "cells": summary.cells.len(),
        "fits": summary.fits,
    }}))
}

fn chi2(sigma: f64, n: f64, universe: usize, cutoff: f64) -> Result<Value> {
    let u = ContextUniverse::new(universe)?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma} outside (0, 1]"
        )));
    }
    let support: Vec<usize> = (0..min_support(&u, sigma)).collect();
    let d = SmoothDistribution::uniform_on(&u, &support, sigma)?;
    let report = chi_square_closed_form(&d, n)?;
    let brute = if universe <= MAX_BRUTE_UNIVERSE && n <= MAX_BRUTE_RATE {
        Some(chi_square_bruteforce(&d, n, cutoff)?)
    } else {
        None
    };
    Ok(json!({"chi2": {
        "closed": report.closed_form,
        "brute": brute.map(|b| b.value),
        "bound": report.bound,
        "discarded_mass": brute.map(|b| b.discarded_mass),
        "support": support.len(),
    }}))
}

fn nml(class: &Path, contexts: &Path) -> Result<Value> {
    let class: FiniteClass = read_json(class)?;
    let class = FiniteClass::new(class.hypotheses).map_err(|e| Error::Config {
        path: "class".into(),
        message: e.to_string(),
    })?;
    let xs: Vec<usize> = read_json(contexts)?;
    let value = nml_value(&class, &xs)?;
    Ok(json!({"nml": {"value": value, "horizon": xs.len(), "hypotheses": class.len()}}))
}

fn cover(family: &Path, eps: f64) -> Result<Value> {
    let spec: FamilySpec = read_json(family)?;
    let fam = RegionFamily::from_spec(&spec).map_err(|e| Error::Config {
        path: family.display().to_string(),
        message: e.to_string(),
    })?;
    let cover = epsilon_cover(&fam, eps)?;
    Ok(json!({"cover": {
        "eps": eps,
        "size": cover.len(),
        "radius": cover_radius(&fam, &cover),
        "indices": cover,
    }}))
}

fn fit(summary: &Path) -> Result<Value> {
    let s: SweepSummary = read_json(summary)?;
    Ok(json!({"fit": group_fits(&s.cells)?}))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::NumericalAssertion(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output } => run(&config, output),
        Command::Chi2 {
            sigma,
            n,
            universe,
            cutoff,
        } => chi2(sigma, n, universe, cutoff),
        Command::Nml { class, contexts } => nml(&class, &contexts),
        Command::Cover { family, eps } => cover(&family, eps),
        Command::Fit { summary } => fit(&summary),
    };
    match result {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
