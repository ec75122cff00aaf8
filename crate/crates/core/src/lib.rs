//! Spectral solver and verification toolkit for the rotating, trapped
//! focusing nonlinear Schrödinger equation on a periodic 2-D box.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this file fix the common double precision instances.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod groundstate;
pub mod model;
pub mod propagator;
pub mod scalar;
pub mod spectral;

pub use diagnostics::{DiagnosticsRecord, DiagnosticsSink};
pub use error::{Error, Result};
pub use evolution::{
    evolve, evolve_with_cutoff, step, Classification, RunOutcome, StopReason, Stepper, TimeConfig,
};
pub use groundstate::{
    compute_ground_state, euler_lagrange_residual, solve_radial_profile, GroundStateConfig,
    GroundStateResult, RadialProfile,
};
pub use model::{
    angular_momentum, apply_rotation_term, energy, exponents, exponents_for, mass, potential,
    Convention, Evaluator, Exponents, ModelParams, Observables, RotationMatrix,
};
pub use num_complex::Complex;
pub use propagator::{mehler_apply, rotate_field, KernelParams};
pub use scalar::Real;
pub use spectral::{
    integrate, make_grid, spectral_gradient, spectral_laplacian, transform_forward,
    transform_inverse, Field, GridSpec, Spectral, SpectralField,
};

pub type C64 = Complex<f64>;
pub type Grid64 = GridSpec<f64>;
pub type Field64 = Field<f64>;
pub type Field32 = Field<f32>;
pub type Params64 = ModelParams<f64>;
pub type TimeConfig64 = TimeConfig<f64>;
