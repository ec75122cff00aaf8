//! Line-oriented `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rotnls::{Convention, GroundStateConfig, ModelParams, TimeConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    GroundState,
    Evolve,
    Threshold,
    Verify,
    Fit,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::GroundState => "groundstate",
            Scenario::Evolve => "evolve",
            Scenario::Threshold => "threshold",
            Scenario::Verify => "verify",
            Scenario::Fit => "fit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "groundstate" => Scenario::GroundState,
            "evolve" => Scenario::Evolve,
            "threshold" => Scenario::Threshold,
            "verify" => Scenario::Verify,
            "fit" => Scenario::Fit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub model: ModelParams<f64>,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub time: TimeConfig<f64>,
    pub groundstate: GroundStateConfig<f64>,
    /// Multiplier `C` of the initial datum `C·Q`.
    pub amplitude: f64,
    pub bracket: (f64, f64),
    pub threshold_tol: f64,
    /// Virial cutoff radius; `None` disables `J, J', J''`.
    pub cutoff_radius: Option<f64>,
    /// Diagnostics CSV consumed by the `fit` scenario; empty runs a fresh
    /// evolution instead.
    pub fit_input: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Evolve,
            model: ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.5),
            half_width: 3.0,
            points_per_axis: 256,
            time: TimeConfig::default(),
            groundstate: GroundStateConfig::default(),
            amplitude: 2.0,
            bracket: (2.0, 2.5),
            threshold_tol: 0.01,
            cutoff_radius: None,
            fit_input: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "scenario",
    "amplitude",
    "bracket.lo",
    "bracket.hi",
    "threshold.tol",
    "output_dir",
    "model.convention",
    "model.dim_n",
    "model.p",
    "model.lambda",
    "model.gamma1",
    "model.gamma2",
    "model.omega_rot",
    "model.kin_coef",
    "model.pot_coef",
    "grid.half_width",
    "grid.points_per_axis",
    "time.t_end",
    "time.dt0",
    "time.dt_min",
    "time.phase_budget",
    "time.blowup_factor",
    "time.tail_tol",
    "time.snapshot_every",
    "time.adaptive",
    "time.boundary_tol",
    "groundstate.dt_imag",
    "groundstate.tol",
    "groundstate.max_iter",
    "groundstate.target_mass",
    "virial.cutoff_radius",
    "fit.input",
];

/// Splits `key = value` lines; `#` starts a comment.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                msg: format!("expected `key = value`, got `{body}`"),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        out.push((line, key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().map_err(|_| ConfigError::Parse {
        line,
        msg: format!("`{key}` expects a number, got `{v}`"),
    })
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>().map_err(|_| ConfigError::Parse {
        line,
        msg: format!("`{key}` expects a nonnegative integer, got `{v}`"),
    })
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::Parse {
            line,
            msg: format!("`{key}` expects true or false, got `{v}`"),
        }),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text`, then applies `key=value` overrides in order.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut list = entries(text)?;
        for (k, o) in overrides.iter().enumerate() {
            let Some((key, value)) = o.split_once('=') else {
                return Err(ConfigError::Invalid(format!("override `{o}` is not key=value")));
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::Invalid(format!("override {}: unknown key `{key}`", k + 1)));
            }
            list.push((0, key.to_string(), value.trim().to_string()));
        }
        let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (line, key, value) in list {
            seen.insert(key, (line, value));
        }

        let mut cfg = Self::default();
        // the convention fixes the default coefficients, so it goes first
        if let Some((line, v)) = seen.get("model.convention") {
            let conv = Convention::parse(v).ok_or_else(|| ConfigError::Parse {
                line: *line,
                msg: format!("unknown convention `{v}`"),
            })?;
            let (a, b) = conv.coefficients();
            cfg.model.convention = conv;
            cfg.model.kin_coef = a;
            cfg.model.pot_coef = b;
        }
        for (key, (line, v)) in &seen {
            let line = *line;
            let f = || parse_f64(line, key, v);
            match key.as_str() {
                "scenario" => {
                    cfg.scenario = Scenario::parse(v).ok_or_else(|| ConfigError::Parse {
                        line,
                        msg: format!("unknown scenario `{v}`"),
                    })?
                }
                "amplitude" => cfg.amplitude = f()?,
                "bracket.lo" => cfg.bracket.0 = f()?,
                "bracket.hi" => cfg.bracket.1 = f()?,
                "threshold.tol" => cfg.threshold_tol = f()?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                "model.convention" => {}
                "model.dim_n" => cfg.model.dim_n = parse_usize(line, key, v)?,
                "model.p" => cfg.model.p = f()?,
                "model.lambda" => cfg.model.lambda = f()?,
                "model.gamma1" => cfg.model.gamma1 = f()?,
                "model.gamma2" => cfg.model.gamma2 = f()?,
                "model.omega_rot" => cfg.model.omega_rot = f()?,
                "model.kin_coef" => cfg.model.kin_coef = f()?,
                "model.pot_coef" => cfg.model.pot_coef = f()?,
                "grid.half_width" => cfg.half_width = f()?,
                "grid.points_per_axis" => cfg.points_per_axis = parse_usize(line, key, v)?,
                "time.t_end" => cfg.time.t_end = f()?,
                "time.dt0" => cfg.time.dt0 = f()?,
                "time.dt_min" => cfg.time.dt_min = f()?,
                "time.phase_budget" => cfg.time.phase_budget = f()?,
                "time.blowup_factor" => cfg.time.blowup_factor = f()?,
                "time.tail_tol" => cfg.time.tail_tol = f()?,
                "time.snapshot_every" => cfg.time.snapshot_every = parse_usize(line, key, v)?,
                "time.adaptive" => cfg.time.adaptive = parse_bool(line, key, v)?,
                "time.boundary_tol" => cfg.time.boundary_tol = f()?,
                "groundstate.dt_imag" => cfg.groundstate.dt_imag = f()?,
                "groundstate.tol" => cfg.groundstate.tol = f()?,
                "groundstate.max_iter" => cfg.groundstate.max_iter = parse_usize(line, key, v)?,
                "groundstate.target_mass" => cfg.groundstate.target_mass = f()?,
                "virial.cutoff_radius" => {
                    cfg.cutoff_radius = if v == "none" { None } else { Some(f()?) }
                }
                "fit.input" => cfg.fit_input = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
                other => unreachable!("key list and parser disagree on `{other}`"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.amplitude > 0.0) {
            return bad(format!("amplitude must be positive, got {}", self.amplitude));
        }
        if !(self.bracket.0 > 0.0 && self.bracket.0 < self.bracket.1) {
            return bad(format!("bracket must satisfy 0 < lo < hi, got {:?}", self.bracket));
        }
        if !(self.threshold_tol > 0.0) {
            return bad("threshold.tol must be positive".into());
        }
        if let Some(r) = self.cutoff_radius {
            if !(r > 0.0) {
                return bad(format!("virial.cutoff_radius must be positive, got {r}"));
            }
        }
        self.model.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        rotnls::make_grid(self.half_width, self.points_per_axis).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.time.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.groundstate.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Every key, in `KEYS` order; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let t = &self.time;
        let g = &self.groundstate;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("scenario", self.scenario.name().into());
        put("amplitude", self.amplitude.to_string());
        put("bracket.lo", self.bracket.0.to_string());
        put("bracket.hi", self.bracket.1.to_string());
        put("threshold.tol", self.threshold_tol.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("model.convention", m.convention.name().into());
        put("model.dim_n", m.dim_n.to_string());
        put("model.p", m.p.to_string());
        put("model.lambda", m.lambda.to_string());
        put("model.gamma1", m.gamma1.to_string());
        put("model.gamma2", m.gamma2.to_string());
        put("model.omega_rot", m.omega_rot.to_string());
        put("model.kin_coef", m.kin_coef.to_string());
        put("model.pot_coef", m.pot_coef.to_string());
        put("grid.half_width", self.half_width.to_string());
        put("grid.points_per_axis", self.points_per_axis.to_string());
        put("time.t_end", t.t_end.to_string());
        put("time.dt0", t.dt0.to_string());
        put("time.dt_min", t.dt_min.to_string());
        put("time.phase_budget", t.phase_budget.to_string());
        put("time.blowup_factor", t.blowup_factor.to_string());
        put("time.tail_tol", t.tail_tol.to_string());
        put("time.snapshot_every", t.snapshot_every.to_string());
        put("time.adaptive", t.adaptive.to_string());
        put("time.boundary_tol", t.boundary_tol.to_string());
        put("groundstate.dt_imag", g.dt_imag.to_string());
        put("groundstate.tol", g.tol.to_string());
        put("groundstate.max_iter", g.max_iter.to_string());
        put("groundstate.target_mass", g.target_mass.to_string());
        put(
            "virial.cutoff_radius",
            self.cutoff_radius.map_or_else(|| "none".to_string(), |r| r.to_string()),
        );
        put(
            "fit.input",
            self.fit_input.as_ref().map_or_else(String::new, |p| p.display().to_string()),
        );
        s
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn grid(&self) -> rotnls::GridSpec<f64> {
        rotnls::make_grid(self.half_width, self.points_per_axis).expect("validated grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_is_fully_defaulted() {
        let c = ExperimentConfig::parse("scenario = verify\n").unwrap();
        assert_eq!(c.scenario, Scenario::Verify);
        assert_eq!(
            ExperimentConfig {
                scenario: Scenario::Evolve,
                ..c
            },
            ExperimentConfig::default()
        );
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let e = ExperimentConfig::parse("# comment\n\nmodel.p = 3\nmodel.gamma3 = 1\n").unwrap_err();
        match e {
            ConfigError::UnknownKey { line, key } => {
                assert_eq!(line, 4);
                assert_eq!(key, "model.gamma3");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = ExperimentConfig::parse("model.p = 3\ntime.dt0 = fast\n").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 2, .. }), "{e}");
        let e = ExperimentConfig::parse("model.p 3\n").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn round_trip() {
        let text = "scenario = threshold\nmodel.p = 4 # quartic\nmodel.gamma2 = 2\nvirial.cutoff_radius = 1.25\n\
                    time.adaptive = false\nfit.input = runs/a.csv\nbracket.lo = 1.5\nbracket.hi = 1.8\n";
        let a = ExperimentConfig::parse(text).unwrap();
        let b = ExperimentConfig::parse(&a.to_text()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ExperimentConfig::parse(&ExperimentConfig::default().to_text()).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn convention_sets_coefficients() {
        let c = ExperimentConfig::parse("model.convention = unit\n").unwrap();
        assert_eq!((c.model.kin_coef, c.model.pot_coef), (1.0, 1.0));
        assert!(ExperimentConfig::parse("model.convention = unit\nmodel.gamma2 = 2\n").is_err());
    }

    #[test]
    fn overrides_apply_last() {
        let c = ExperimentConfig::parse_with_overrides("model.p = 3\n", &["model.p=4".into(), "amplitude = 1.8".into()]).unwrap();
        assert_eq!((c.model.p, c.amplitude), (4.0, 1.8));
        assert!(ExperimentConfig::parse_with_overrides("", &["model.q=1".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::parse("bracket.lo = 3\nbracket.hi = 2\n").is_err());
        assert!(ExperimentConfig::parse("amplitude = 0\n").is_err());
        assert!(ExperimentConfig::parse("time.dt_min = 1\n").is_err());
    }
}
