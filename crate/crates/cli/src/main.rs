use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotnls_cli::config::{ExperimentConfig, Scenario};
use rotnls_cli::experiments::{failures, run_evolve, run_fit, run_groundstate, run_threshold, run_verify, ExperimentError};
use rotnls_cli::figures::{self, FIGURE_CASES};

#[derive(Parser)]
#[command(name = "rotnls", version, about = "Rotating trapped NLS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the ground state and store it as a snapshot.
    Groundstate(Common),
    /// Evolve `amplitude · Q` and record diagnostics.
    Evolve(Common),
    /// Bisect the blowup threshold over the configured bracket.
    Threshold(Common),
    /// Run every invariant suite and emit a PASS/FAIL report.
    Verify(Common),
    /// Fit the blowup rate of a diagnostics CSV.
    Fit(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; absent keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// `key=value`, applied after the file and the figure preset.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Figure case preset (model and amplitude), e.g. `3a`.
    #[arg(long)]
    figure: Option<String>,
}

fn preset_overrides(id: &str) -> Result<Vec<String>, String> {
    let case = figures::find(id).ok_or_else(|| {
        let ids: Vec<&str> = FIGURE_CASES.iter().map(|c| c.id).collect();
        format!("unknown figure `{id}`; expected one of {}", ids.join(", "))
    })?;
    let m = case.model();
    Ok(vec![
        format!("model.p={}", m.p),
        format!("model.gamma1={}", m.gamma1),
        format!("model.gamma2={}", m.gamma2),
        format!("model.omega_rot={}", m.omega_rot),
        format!("amplitude={}", case.amplitude),
    ])
}

fn load(common: &Common, scenario: Scenario) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let mut overrides = match &common.figure {
        Some(id) => preset_overrides(id)?,
        None => Vec::new(),
    };
    overrides.extend(common.overrides.iter().cloned());
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path, &overrides)?,
        None => ExperimentConfig::parse_with_overrides("", &overrides)?,
    };
    cfg.scenario = scenario;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let (common, scenario) = match &cli.command {
        Command::Groundstate(c) => (c, Scenario::GroundState),
        Command::Evolve(c) => (c, Scenario::Evolve),
        Command::Threshold(c) => (c, Scenario::Threshold),
        Command::Verify(c) => (c, Scenario::Verify),
        Command::Fit(c) => (c, Scenario::Fit),
    };
    let cfg = load(common, scenario)?;
    let dir = cfg.output_dir.display();
    match scenario {
        Scenario::GroundState => {
            let (_, s) = run_groundstate(&cfg)?;
            println!(
                "omega = {}  residual = {:e}  iterations = {}  -> {dir}/groundstate.rnls",
                s.chemical_potential, s.residual, s.iterations
            );
        }
        Scenario::Evolve => {
            let (_, s) = run_evolve(&cfg)?;
            println!(
                "{} ({}) at t = {}  steps = {}  max |u|^2 = {}  -> {dir}/diagnostics.csv",
                s.classification, s.reason, s.t_final, s.steps, s.max_sup_sq
            );
        }
        Scenario::Threshold => match run_threshold(&cfg) {
            Ok(r) => {
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
                println!("C* = {}  in ({}, {})  runs = {}", r.c_star, r.c_lo_final, r.c_hi_final, r.runs.len());
            }
            Err(e @ ExperimentError::BracketFailure { .. }) => {
                eprintln!("{e}");
                return Ok(false);
            }
            Err(e) => return Err(e.into()),
        },
        Scenario::Verify => {
            let report = run_verify(&cfg)?;
            for (name, r) in &report {
                let tag = if r.pass { "PASS" } else { "FAIL" };
                println!("{tag} {name}: measured {:e}, threshold {:e}", r.measured, r.threshold);
            }
            let failed = failures(&report);
            println!("{} of {} suites passed -> {dir}/verify.json", report.len() - failed.len(), report.len());
            return Ok(failed.is_empty());
        }
        Scenario::Fit => {
            let s = run_fit(&cfg)?;
            println!(
                "T_hat = {}  kappa_hat = {}  gbound_slope = {}  R^2 = {}  -> {dir}/fit.json",
                s.t_hat, s.kappa_hat, s.gbound_slope, s.rate_r2
            );
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
