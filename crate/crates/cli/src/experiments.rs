//! Scenario drivers behind the `rotnls` subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rotnls::diagnostics::{
    check_lower_bound, check_universal_bound, decade_window, fit_blowup_rate, gn_exterior_ratio,
    verify_virial_identities, CutoffProfile, NullSink, RateFit, VirialReport,
};
use rotnls::{
    compute_ground_state, euler_lagrange_residual, evolve_with_cutoff, exponents, make_grid, mehler_apply,
    solve_radial_profile, Classification, Complex, DiagnosticsRecord, DiagnosticsSink, Field, GroundStateConfig,
    GroundStateResult, KernelParams, ModelParams, RunOutcome, Stepper, TimeConfig,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::io::{read_csv, write_json, write_snapshot, FileSink};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] rotnls::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(
        "bracket ({lo}, {hi}) does not straddle the threshold: {lo} is {lo_class}, {hi} is {hi_class}"
    )]
    BracketFailure {
        lo: f64,
        hi: f64,
        lo_class: &'static str,
        hi_class: &'static str,
    },

    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

fn out_file(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg.output_dir.join(name))
}

pub fn ground_state(cfg: &ExperimentConfig) -> Result<GroundStateResult<f64>> {
    cfg.validate()?;
    Ok(compute_ground_state(&cfg.model, &cfg.grid(), &cfg.groundstate, None)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateSummary {
    pub chemical_potential: f64,
    pub residual: f64,
    /// Euler–Lagrange residual recomputed from the stored field.
    pub recomputed_residual: f64,
    pub iterations: usize,
    pub mass: f64,
    pub energy: f64,
    pub sup_sq: f64,
}

pub fn run_groundstate(cfg: &ExperimentConfig) -> Result<(GroundStateResult<f64>, GroundStateSummary)> {
    let gs = ground_state(cfg)?;
    let summary = GroundStateSummary {
        chemical_potential: gs.chemical_potential,
        residual: gs.residual,
        recomputed_residual: euler_lagrange_residual(&cfg.model, &gs.field, gs.chemical_potential)?,
        iterations: gs.iterations,
        mass: gs.field.norm_sq(),
        energy: *gs.energies.last().expect("at least the initial energy"),
        sup_sq: gs.field.sup_sq(),
    };
    write_snapshot(&out_file(cfg, "groundstate.rnls")?, &gs.field, 0.0)?;
    write_json(&out_file(cfg, "groundstate.json")?, &summary)?;
    cfg.save(&out_file(cfg, "config.txt")?)?;
    Ok((gs, summary))
}

/// `C · Q`.
pub fn initial_data(q: &Field<f64>, amplitude: f64) -> Field<f64> {
    q.scaled(Complex::new(amplitude, 0.0))
}

/// Evolves `C · Q` under the configured model and time settings.
pub fn evolve_amplitude(
    q: &Field<f64>,
    cfg: &ExperimentConfig,
    amplitude: f64,
    sink: &mut dyn DiagnosticsSink<f64>,
) -> Result<RunOutcome<f64>> {
    let cutoff = cfg
        .cutoff_radius
        .map(|r| CutoffProfile::new(r, &q.grid))
        .transpose()?;
    Ok(evolve_with_cutoff(&initial_data(q, amplitude), &cfg.model, &cfg.time, cutoff, sink)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub amplitude: f64,
    pub classification: &'static str,
    pub reason: &'static str,
    pub t_final: f64,
    pub steps: usize,
    pub initial_sup_sq: f64,
    pub max_sup_sq: f64,
    pub peak_growth: f64,
    pub estimated_t: Option<f64>,
}

impl RunSummary {
    pub fn new(amplitude: f64, out: &RunOutcome<f64>) -> Self {
        let sup0 = out.records.first().map_or(f64::NAN, |r| r.sup_sq);
        Self {
            amplitude,
            classification: out.classification.name(),
            reason: out.reason.name(),
            t_final: out.t_final,
            steps: out.steps,
            initial_sup_sq: sup0,
            max_sup_sq: out.records.iter().map(|r| r.sup_sq).fold(sup0, f64::max),
            peak_growth: out.peak_growth,
            estimated_t: out.estimated_t,
        }
    }
}

/// Ground state, evolution of `C · Q`, diagnostics CSV, snapshots and a
/// JSON summary in the output directory.
pub fn run_evolve(cfg: &ExperimentConfig) -> Result<(RunOutcome<f64>, RunSummary)> {
    let (gs, _) = run_groundstate(cfg)?;
    let mut sink = FileSink::create(&cfg.output_dir)?;
    let out = evolve_amplitude(&gs.field, cfg, cfg.amplitude, &mut sink)?;
    sink.finish()?;
    write_snapshot(&out_file(cfg, "initial.rnls")?, &initial_data(&gs.field, cfg.amplitude), 0.0)?;
    write_snapshot(&out_file(cfg, "final.rnls")?, &out.final_field, out.t_final)?;
    let summary = RunSummary::new(cfg.amplitude, &out);
    write_json(&out_file(cfg, "summary.json")?, &summary)?;
    Ok((out, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRun {
    pub amplitude: f64,
    pub classification: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub c_star: f64,
    pub c_lo_final: f64,
    pub c_hi_final: f64,
    /// In the order they were run.
    pub runs: Vec<ThresholdRun>,
    pub warnings: Vec<String>,
}

/// One warning per bounded run at an amplitude above a blowup run.
pub fn monotonicity_warnings(runs: &[ThresholdRun]) -> Vec<String> {
    let mut sorted: Vec<&ThresholdRun> = runs.iter().collect();
    sorted.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
    let mut first_blowup: Option<f64> = None;
    let mut out = Vec::new();
    for r in sorted {
        let bounded = r.classification == Classification::Bounded.name();
        match first_blowup {
            Some(c) if bounded => out.push(format!(
                "non-monotone: bounded at {} above blowup at {c}",
                r.amplitude
            )),
            None if r.classification == Classification::Blowup.name() => first_blowup = Some(r.amplitude),
            _ => {}
        }
    }
    out
}

/// Ambiguous runs count on the blowup side of the bracket.
fn blowup_side(c: Classification) -> bool {
    c != Classification::Bounded
}

/// Bisection on the amplitude over `cfg.bracket`.
pub fn threshold_from(
    cfg: &ExperimentConfig,
    mut classify: impl FnMut(f64) -> Result<Classification>,
) -> Result<ThresholdResult> {
    let (mut lo, mut hi) = cfg.bracket;
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    let mut record = |c: f64, class: Classification, runs: &mut Vec<ThresholdRun>| {
        if class == Classification::Ambiguous {
            warnings.push(format!("amplitude {c}: ambiguous run counted as blowup"));
        }
        runs.push(ThresholdRun {
            amplitude: c,
            classification: class.name(),
        });
    };
    let lo_class = classify(lo)?;
    record(lo, lo_class, &mut runs);
    let hi_class = classify(hi)?;
    record(hi, hi_class, &mut runs);
    if blowup_side(lo_class) || !blowup_side(hi_class) {
        return Err(ExperimentError::BracketFailure {
            lo,
            hi,
            lo_class: lo_class.name(),
            hi_class: hi_class.name(),
        });
    }
    while hi - lo > cfg.threshold_tol {
        let mid = 0.5 * (lo + hi);
        let class = classify(mid)?;
        record(mid, class, &mut runs);
        if blowup_side(class) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    warnings.extend(monotonicity_warnings(&runs));
    Ok(ThresholdResult {
        c_star: 0.5 * (lo + hi),
        c_lo_final: lo,
        c_hi_final: hi,
        runs,
        warnings,
    })
}

pub fn run_threshold(cfg: &ExperimentConfig) -> Result<ThresholdResult> {
    let (gs, _) = run_groundstate(cfg)?;
    let q = gs.field;
    let res = threshold_from(cfg, |c| Ok(evolve_amplitude(&q, cfg, c, &mut NullSink)?.classification))?;
    write_json(&out_file(cfg, "threshold.json")?, &res)?;
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteResult {
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
}

impl SuiteResult {
    /// Passes when `measured ≤ threshold`.
    pub fn at_most(measured: f64, threshold: f64) -> Self {
        Self {
            pass: measured <= threshold,
            measured,
            threshold,
        }
    }

    /// Passes when `measured ≥ threshold`.
    pub fn at_least(measured: f64, threshold: f64) -> Self {
        Self {
            pass: measured >= threshold,
            measured,
            threshold,
        }
    }
}

pub type Report = BTreeMap<String, SuiteResult>;

pub fn failures(report: &Report) -> Vec<(&str, SuiteResult)> {
    report
        .iter()
        .filter(|(_, r)| !r.pass)
        .map(|(k, r)| (k.as_str(), *r))
        .collect()
}

pub const MASS_TOL: f64 = 1e-10;
pub const ENERGY_TOL: f64 = 1e-6;
pub const ELL_A_TOL: f64 = 1e-9;
pub const MEHLER_TOL: f64 = 1e-6;
pub const GN_FROZEN_TOL: f64 = 1e-8;
pub const GN_INVARIANCE_TOL: f64 = 1e-8;
pub const GS_LINEAR_TOL: f64 = 1e-6;
pub const GS_RESIDUAL_TOL: f64 = 1e-8;
pub const SECH_TOL: f64 = 1e-8;
pub const SHOOTER_STEP_TOL: f64 = 1e-5;
pub const FIT_T_TOL: f64 = 1e-4;
pub const FIT_KAPPA_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct ConservationReport {
    pub mass_drift: f64,
    pub energy_drift: f64,
    /// `max |ℓ_A|`; only meaningful for radial data in an isotropic trap.
    pub ell_a_max: Option<f64>,
    pub classification: &'static str,
    pub seconds: f64,
}

pub fn relative_drift(records: &[DiagnosticsRecord<f64>], f: impl Fn(&DiagnosticsRecord<f64>) -> f64) -> f64 {
    let v0 = f(&records[0]);
    records
        .iter()
        .map(|r| (f(r) - v0).abs() / v0.abs())
        .fold(0.0, f64::max)
}

/// Drifts over one evolution of `C · Q` with the configured settings.
pub fn conservation(q: &Field<f64>, cfg: &ExperimentConfig) -> Result<ConservationReport> {
    let clock = Instant::now();
    let out = evolve_amplitude(q, cfg, cfg.amplitude, &mut NullSink)?;
    let seconds = clock.elapsed().as_secs_f64();
    let radial = cfg.model.is_isotropic();
    Ok(ConservationReport {
        mass_drift: relative_drift(&out.records, |r| r.mass),
        energy_drift: relative_drift(&out.records, |r| r.energy),
        ell_a_max: radial.then(|| out.records.iter().map(|r| r.ell_a.abs()).fold(0.0, f64::max)),
        classification: out.classification.name(),
        seconds,
    })
}

/// Relative 2-norm distance between split-step and Mehler evolution of a
/// displaced Gaussian: λ = 0, γ = 1, Ω = 0.5, 64², half-width 6, t = 0.3.
pub fn mehler_oracle() -> Result<f64> {
    let g = make_grid::<f64>(6.0, 64)?;
    let params = ModelParams::unit(3.0, 0.0, 1.0, 0.5);
    let u0 = Field::from_real_fn(&g, |x: f64, y: f64| (-((x - 1.0).powi(2) + y * y)).exp());
    let (dt, steps) = (1e-4, 3000);
    let mut stepper = Stepper::new(&params, &g)?;
    let mut u = u0.clone();
    for _ in 0..steps {
        stepper.step_in_place(&mut u, dt)?;
    }
    let exact = mehler_apply(&u0, &KernelParams::from_model(&params, dt * steps as f64)?)?;
    Ok(u.rel_distance(&exact))
}

pub enum VirialCase {
    Radial,
    Vortex,
}

/// Halving test of the virial identities on a bounded cubic run at
/// half-width 8, 128², `t ∈ [0, 0.5]`, steps 1e-3 and 5e-4.
pub fn virial_suite(case: VirialCase) -> Result<VirialReport<f64>> {
    let g = make_grid::<f64>(8.0, 128)?;
    let (params, u0) = match case {
        VirialCase::Radial => (
            ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.5),
            Field::from_real_fn(&g, |x: f64, y: f64| 1.2 * (-(x * x + y * y) / 2.0).exp()),
        ),
        VirialCase::Vortex => (
            ModelParams::half(3.0, 1.0, 1.0, 1.5, 0.5),
            Field::from_fn(&g, |x: f64, y: f64| Complex::new(x + 0.3, y) * (-(x * x + y * y) / 2.0).exp()),
        ),
    };
    let run = |dt: f64| -> Result<Vec<DiagnosticsRecord<f64>>> {
        let cutoff = CutoffProfile::new(8.0 / 3.0, &g)?;
        let out = evolve_with_cutoff(&u0, &params, &TimeConfig::fixed(0.5, dt), Some(cutoff), &mut NullSink)?;
        if out.classification != Classification::Bounded {
            return Err(ExperimentError::Input(format!("virial run stopped early: {}", out.reason.name())));
        }
        Ok(out.records)
    };
    Ok(verify_virial_identities(&run(1e-3)?, &run(5e-4)?)?)
}

/// Exterior ratios of the Gaussian sweep, regression-frozen on the 256²
/// grid of half-width 12, indexed by (σ, R).
pub const GN_FROZEN: [(f64, f64, f64); 12] = [
    (0.5, 0.5, 0.3147596234986963),
    (0.5, 1.0, 0.3676828435587915),
    (0.5, 2.0, 0.24580209998664268),
    (1.0, 0.5, 0.35120684065821595),
    (1.0, 1.0, 0.3388727645298565),
    (1.0, 2.0, 0.10708930848725833),
    (2.0, 0.5, 0.36768284355879144),
    (2.0, 1.0, 0.24205037876297317),
    (2.0, 2.0, 0.017092660468076032),
    (4.0, 0.5, 0.3388727645298565),
    (4.0, 1.0, 0.10384521013465242),
    (4.0, 2.0, 0.0003661670575289067),
];

pub const GN_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GnReport {
    pub max_ratio: f64,
    pub frozen_deviation: f64,
    pub scale_deviation: f64,
    pub phase_deviation: f64,
}

pub fn gn_sweep() -> Result<GnReport> {
    let hw = 12.0;
    let gaussian = |s: f64, sigma: f64| -> Result<Field<f64>> {
        let gs = make_grid::<f64>(hw * s, 256)?;
        Ok(Field::from_real_fn(&gs, |x: f64, y: f64| {
            let (x, y) = (x / s, y / s);
            (-sigma * (x * x + y * y) / 2.0).exp()
        }))
    };
    let mut rep = GnReport {
        max_ratio: 0.0,
        frozen_deviation: 0.0,
        scale_deviation: 0.0,
        phase_deviation: 0.0,
    };
    for &(sigma, r, want) in &GN_FROZEN {
        let u = gaussian(1.0, sigma)?;
        let got = gn_exterior_ratio(&u, r)?;
        rep.max_ratio = rep.max_ratio.max(got);
        rep.frozen_deviation = rep.frozen_deviation.max((got - want).abs());
        for s in [0.5, 2.0, 3.0] {
            let scaled = gn_exterior_ratio(&gaussian(s, sigma)?, s * r)?;
            rep.scale_deviation = rep.scale_deviation.max((scaled - got).abs());
        }
        for theta in [0.3, 1.7, -2.9] {
            let phased = gn_exterior_ratio(&u.scaled(Complex::from_polar(2.5, theta)), r)?;
            rep.phase_deviation = rep.phase_deviation.max((phased - got).abs());
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearGroundStateReport {
    pub omega_error: f64,
    pub field_error: f64,
}

/// λ = 0, γ = 1, Ω = 0 on 64², half-width 6, against `e^{-r²/2}/√π`, ω = 1.
pub fn linear_ground_state() -> Result<LinearGroundStateReport> {
    let g = make_grid::<f64>(6.0, 64)?;
    let params = ModelParams::half(3.0, 0.0, 1.0, 1.0, 0.0);
    let gs = compute_ground_state(&params, &g, &GroundStateConfig::default(), None)?;
    let exact = Field::from_real_fn(&g, |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp() / std::f64::consts::PI.sqrt());
    Ok(LinearGroundStateReport {
        omega_error: (gs.chemical_potential - 1.0).abs(),
        field_error: gs.field.rel_distance(&exact),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShooterReport {
    /// `max |Q - √2 sech r|` for `p = 3, n = 1`.
    pub sech_error: f64,
    /// `max |Q_h - Q_{h/2}| / Q(0)` for `p = 3, n = 2`.
    pub step_consistency: f64,
}

pub fn radial_shooter() -> Result<ShooterReport> {
    let one = solve_radial_profile::<f64>(3.0, 1, 25.0, 1e-3)?;
    let sech_error = one
        .samples
        .iter()
        .map(|&(r, q)| (q - 2f64.sqrt() / r.cosh()).abs())
        .fold(0.0, f64::max);
    let a = solve_radial_profile::<f64>(3.0, 2, 25.0, 1e-3)?;
    let b = solve_radial_profile::<f64>(3.0, 2, 25.0, 5e-4)?;
    let step_consistency = a
        .samples
        .iter()
        .map(|&(r, q)| (q - b.value_at(r)).abs())
        .fold(0.0, f64::max)
        / a.q0;
    Ok(ShooterReport {
        sech_error,
        step_consistency,
    })
}

/// Fit of the exact series `‖∇u‖₂² = 1/(0.7 - t)`, i.e. `T = 0.7`, `κ = 1/2`.
pub fn synthetic_fit() -> Result<RateFit<f64>> {
    let (n, t_end) = (200, 0.69);
    let recs: Vec<DiagnosticsRecord<f64>> = (0..n)
        .map(|k| {
            let t = t_end * k as f64 / (n - 1) as f64;
            DiagnosticsRecord {
                t,
                grad_norm_sq: 1.0 / (0.7 - t),
                ..DiagnosticsRecord::default()
            }
        })
        .collect();
    Ok(fit_blowup_rate(&recs, (0.0, t_end))?)
}

fn ratio_window(name: &str, r: &VirialReport<f64>, report: &mut Report) {
    let (lo, hi) = rotnls::diagnostics::virial::ORDER_RATIO_WINDOW;
    for (key, v) in [("j1_ratio", r.j1_ratio), ("j2_ratio", r.j2_ratio)] {
        report.insert(
            format!("virial.{name}.{key}"),
            SuiteResult {
                pass: v >= lo && v <= hi,
                measured: v,
                threshold: lo,
            },
        );
    }
}

/// Every invariant suite; the conservation and ground-state residual
/// suites use the configured model, the rest use fixed settings.
pub fn verify_report(cfg: &ExperimentConfig) -> Result<Report> {
    let gs = ground_state(cfg)?;
    let mut report = Report::new();
    let mut put = |k: &str, r: SuiteResult| {
        report.insert(k.to_string(), r);
    };

    let cons = conservation(&gs.field, cfg)?;
    put("conservation.mass", SuiteResult::at_most(cons.mass_drift, MASS_TOL));
    put("conservation.energy", SuiteResult::at_most(cons.energy_drift, ENERGY_TOL));
    if let Some(l) = cons.ell_a_max {
        put("conservation.ell_a_radial", SuiteResult::at_most(l, ELL_A_TOL));
    }

    put(
        "groundstate.residual",
        SuiteResult::at_most(
            euler_lagrange_residual(&cfg.model, &gs.field, gs.chemical_potential)?,
            GS_RESIDUAL_TOL,
        ),
    );
    let lin = linear_ground_state()?;
    put("groundstate.linear_omega", SuiteResult::at_most(lin.omega_error, GS_LINEAR_TOL));
    put("groundstate.linear_field", SuiteResult::at_most(lin.field_error, GS_LINEAR_TOL));
    let shoot = radial_shooter()?;
    put("radial.sech", SuiteResult::at_most(shoot.sech_error, SECH_TOL));
    put("radial.step_consistency", SuiteResult::at_most(shoot.step_consistency, SHOOTER_STEP_TOL));

    put("mehler", SuiteResult::at_most(mehler_oracle()?, MEHLER_TOL));

    let gn = gn_sweep()?;
    put("gn.cap", SuiteResult::at_most(gn.max_ratio, GN_CAP));
    put("gn.frozen", SuiteResult::at_most(gn.frozen_deviation, GN_FROZEN_TOL));
    put("gn.scale_invariance", SuiteResult::at_most(gn.scale_deviation, GN_INVARIANCE_TOL));
    put("gn.phase_invariance", SuiteResult::at_most(gn.phase_deviation, GN_INVARIANCE_TOL));

    let fit = synthetic_fit()?;
    put("fit.t_hat", SuiteResult::at_most((fit.t_hat - 0.7).abs(), FIT_T_TOL));
    put("fit.kappa_hat", SuiteResult::at_most((fit.kappa_hat - 0.5).abs(), FIT_KAPPA_TOL));

    ratio_window("radial", &virial_suite(VirialCase::Radial)?, &mut report);
    ratio_window("vortex", &virial_suite(VirialCase::Vortex)?, &mut report);
    Ok(report)
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let report = verify_report(cfg)?;
    write_json(&out_file(cfg, "verify.json")?, &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub t_hat: f64,
    pub kappa_hat: f64,
    pub gbound_slope: f64,
    pub window: (f64, f64),
    pub rate_r2: f64,
    pub g_r2: f64,
    pub low_confidence: bool,
    pub g_divergent: bool,
    pub tail_contribution: f64,
    pub records_used: usize,
    pub lower_exp: f64,
    pub upper_exp: f64,
    pub lower_bound: SuiteResult,
    pub upper_bound: SuiteResult,
}

/// Rate fit over the last decade of resolved growth in `records`.
pub fn fit_records(model: &ModelParams<f64>, records: &[DiagnosticsRecord<f64>]) -> Result<FitSummary> {
    let window = decade_window(records)
        .ok_or_else(|| ExperimentError::Input("too few monotone records for a rate fit".into()))?;
    let fit = fit_blowup_rate(records, window)?;
    let exps = exponents(model)?;
    let lower = check_lower_bound(&fit, &exps);
    let upper = check_universal_bound(&fit, &exps);
    let sr = |b: rotnls::diagnostics::BoundReport<f64>| SuiteResult {
        pass: b.pass,
        measured: b.measured,
        threshold: b.threshold,
    };
    Ok(FitSummary {
        t_hat: fit.t_hat,
        kappa_hat: fit.kappa_hat,
        gbound_slope: fit.gbound_slope,
        window: fit.window,
        rate_r2: fit.rate_r2,
        g_r2: fit.g_r2,
        low_confidence: fit.low_confidence,
        g_divergent: fit.g_divergent,
        tail_contribution: fit.tail_contribution,
        records_used: fit.records_used,
        lower_exp: exps.lower_exp,
        upper_exp: exps.upper_exp,
        lower_bound: sr(lower),
        upper_bound: sr(upper),
    })
}

/// Fits the CSV named by `fit.input`, defaulting to the diagnostics file
/// in the output directory.
pub fn run_fit(cfg: &ExperimentConfig) -> Result<FitSummary> {
    cfg.validate()?;
    let input = cfg
        .fit_input
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join("diagnostics.csv"));
    let records = read_csv(Path::new(&input))?;
    let summary = fit_records(&cfg.model, &records)?;
    write_json(&out_file(cfg, "fit.json")?, &summary)?;
    Ok(summary)
}
