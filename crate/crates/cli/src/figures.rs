//! The fourteen figure-reproduction cases, as presets over the default
//! experiment configuration.

use rotnls::{Classification, ModelParams};

use crate::config::{ExperimentConfig, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureCase {
    /// Panel label such as `"3a"`.
    pub id: &'static str,
    pub p: f64,
    pub gamma: (f64, f64),
    pub omega_rot: f64,
    pub amplitude: f64,
    pub expected: Classification,
}

const fn case(id: &'static str, p: f64, g2: f64, omega: f64, c: f64, expected: Classification) -> FigureCase {
    FigureCase {
        id,
        p,
        gamma: (1.0, g2),
        omega_rot: omega,
        amplitude: c,
        expected,
    }
}

use Classification::{Blowup, Bounded};

pub const FIGURE_CASES: [FigureCase; 14] = [
    case("1a", 3.0, 1.0, 0.5, 2.5, Blowup),
    case("1b", 3.0, 1.0, 0.5, 2.0, Bounded),
    case("2a", 4.0, 1.0, 0.5, 2.0, Blowup),
    case("2b", 4.0, 1.0, 0.5, 1.6, Bounded),
    case("3a", 4.0, 2.0, 0.5, 1.8, Blowup),
    case("3b", 4.0, 2.0, 0.5, 1.5, Bounded),
    case("4a", 6.0, 1.0, 0.0, 1.565, Blowup),
    case("4b", 6.0, 1.0, 0.0, 1.56, Bounded),
    case("4c", 6.0, 2.0, 0.0, 1.395, Blowup),
    case("4d", 6.0, 2.0, 0.0, 1.39, Bounded),
    case("5a", 6.0, 1.0, 0.5, 1.565, Blowup),
    case("5b", 6.0, 1.0, 0.5, 1.56, Bounded),
    case("5c", 6.0, 2.0, 0.5, 1.395, Blowup),
    case("5d", 6.0, 2.0, 0.5, 1.39, Bounded),
];

pub fn find(id: &str) -> Option<FigureCase> {
    FIGURE_CASES.iter().copied().find(|c| c.id == id)
}

impl FigureCase {
    pub fn model(&self) -> ModelParams<f64> {
        ModelParams::half(self.p, 1.0, self.gamma.0, self.gamma.1, self.omega_rot)
    }

    /// Default configuration with this case's model and amplitude.
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            scenario: Scenario::Evolve,
            model: self.model(),
            amplitude: self.amplitude,
            ..ExperimentConfig::default()
        }
    }
}
