//! Per-step observables and the identity, inequality and rate checks built
//! on top of them.

pub mod cutoff;
pub mod fit;
pub mod gn;
pub mod virial;

pub use cutoff::CutoffProfile;
pub use fit::{
    auto_window, check_lower_bound, check_universal_bound, decade_window, fit_blowup_rate, BoundReport,
    RateFit,
};
pub use gn::{gn_exterior_ratio, radial_asymmetry};
pub use virial::{
    verify_virial_identities, virial, virial_j, virial_j1, virial_j2, virial_j2_general, Virial,
    VirialReport,
};

use crate::error::Result;
use crate::model::{Evaluator, ModelParams};
use crate::scalar::Real;
use crate::spectral::{Field, GridSpec};

/// One row of the per-step time series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord<T> {
    pub t: T,
    pub mass: T,
    pub energy: T,
    pub ell_a: T,
    pub grad_norm_sq: T,
    pub sup_sq: T,
    pub dt: T,
    pub tail_frac: T,
    pub j: Option<T>,
    pub j1: Option<T>,
    pub j2: Option<T>,
}

/// Consumer of records (in time order) and optional field snapshots.
pub trait DiagnosticsSink<T: Real> {
    fn record(&mut self, rec: &DiagnosticsRecord<T>);

    fn snapshot(&mut self, _step: usize, _t: T, _field: &Field<T>) {}
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl<T: Real> DiagnosticsSink<T> for NullSink {
    fn record(&mut self, _rec: &DiagnosticsRecord<T>) {}
}

impl<T: Real> DiagnosticsSink<T> for Vec<DiagnosticsRecord<T>> {
    fn record(&mut self, rec: &DiagnosticsRecord<T>) {
        self.push(*rec);
    }
}

/// Computes full records, reusing one spectral transform per call.
pub struct Monitor<T: Real> {
    evaluator: Evaluator<T>,
    cutoff: Option<CutoffProfile<T>>,
}

impl<T: Real> Monitor<T> {
    pub fn new(params: &ModelParams<T>, grid: &GridSpec<T>, cutoff: Option<CutoffProfile<T>>) -> Self {
        Self {
            evaluator: Evaluator::new(params, grid),
            cutoff,
        }
    }

    pub fn cutoff(&self) -> Option<&CutoffProfile<T>> {
        self.cutoff.as_ref()
    }

    pub fn record(&mut self, u: &Field<T>, t: T, dt: T) -> Result<DiagnosticsRecord<T>> {
        let (obs, der) = self.evaluator.observe_full(u)?;
        let v = self
            .cutoff
            .as_ref()
            .map(|c| virial::virial_from_gradient(c, &self.evaluator.params, &u.values, &der.dx, &der.dy));
        Ok(DiagnosticsRecord {
            t,
            mass: obs.mass,
            energy: obs.energy,
            ell_a: obs.ell_a,
            grad_norm_sq: obs.grad_norm_sq,
            sup_sq: obs.sup_sq,
            dt,
            tail_frac: obs.tail_frac,
            j: v.map(|v| v.j),
            j1: v.map(|v| v.j1),
            j2: v.map(|v| v.j2),
        })
    }
}
