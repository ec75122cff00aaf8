//! Split-step time integration with an exact linear substep (kinetic
//! multiplier and shear-factored rotation), adaptive steps near
//! concentration, and run classification.

use num_complex::Complex;

use crate::diagnostics::{auto_window, fit_blowup_rate, CutoffProfile, DiagnosticsRecord, DiagnosticsSink, Monitor};
use crate::error::{Error, Result};
use crate::model::{potential, ModelParams};
use crate::scalar::{lit, Real};
use crate::spectral::{Axis, Field, GridSpec, Spectral};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig<T> {
    pub t_end: T,
    pub dt0: T,
    pub dt_min: T,
    /// Phase budget `η` of the adaptive law.
    pub phase_budget: T,
    pub blowup_factor: T,
    pub tail_tol: T,
    /// Emit a field snapshot every this many steps; 0 disables.
    pub snapshot_every: usize,
    /// Use the adaptive law; otherwise every step is `dt0`.
    pub adaptive: bool,
    /// Boundary density (relative to the peak) tolerated before aborting.
    pub boundary_tol: T,
}

impl<T: Real> Default for TimeConfig<T> {
    fn default() -> Self {
        Self {
            t_end: lit(5.0),
            dt0: lit(1e-3),
            dt_min: lit(1e-9),
            phase_budget: lit(0.1),
            blowup_factor: lit(100.0),
            tail_tol: lit(1e-3),
            snapshot_every: 0,
            adaptive: true,
            boundary_tol: lit(1e-10),
        }
    }
}

impl<T: Real> TimeConfig<T> {
    pub fn fixed(t_end: T, dt: T) -> Self {
        Self {
            t_end,
            dt0: dt,
            adaptive: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.t_end > T::zero()) {
            return bad("t_end must be positive");
        }
        if !(self.dt0 > T::zero()) || !(self.dt_min > T::zero()) {
            return bad("dt0 and dt_min must be positive");
        }
        if !(self.dt_min < self.dt0) {
            return bad("dt_min must be smaller than dt0");
        }
        if !(self.phase_budget > T::zero()) {
            return bad("phase_budget must be positive");
        }
        if !(self.blowup_factor > T::one()) {
            return bad("blowup_factor must exceed 1");
        }
        if !(self.tail_tol > T::zero() && self.tail_tol < T::one()) {
            return bad("tail_tol must lie in (0, 1)");
        }
        if !(self.boundary_tol > T::zero()) {
            return bad("boundary_tol must be positive");
        }
        Ok(())
    }

    /// `clamp(dt0 / (1 + (λ‖u‖∞^{p-1} + V_max)/η · dt0), dt_min, dt0)`,
    /// returned unclamped so that underflow can be detected.
    pub fn adaptive_step(&self, lambda: T, sup_pow: T, v_max: T) -> T {
        self.dt0 / (T::one() + (lambda * sup_pow + v_max) / self.phase_budget * self.dt0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Bounded,
    Blowup,
    Ambiguous,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Bounded => "bounded",
            Classification::Blowup => "blowup",
            Classification::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    ReachedTEnd,
    SupNormExploded,
    DtUnderflow,
    ResolutionExhausted,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::ReachedTEnd => "reached_t_end",
            StopReason::SupNormExploded => "sup_norm_exploded",
            StopReason::DtUnderflow => "dt_underflow",
            StopReason::ResolutionExhausted => "resolution_exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub classification: Classification,
    pub t_final: T,
    pub reason: StopReason,
    pub records: Vec<DiagnosticsRecord<T>>,
    pub estimated_t: Option<T>,
    pub final_field: Field<T>,
    pub steps: usize,
    /// `max |u|²` over the run divided by its initial value.
    pub peak_growth: T,
}

/// Precomputed phases for one Strang step of the linear part.
struct PhaseTables<T> {
    dt: T,
    /// `Ky(dt/2)`.
    y_kinetic: Vec<Complex<T>>,
    /// `Kx(dt/2)` merged with the outer shears.
    x_shear: Vec<Complex<T>>,
    y_shear: Vec<Complex<T>>,
}

/// Reusable integrator for one model on one grid.
pub struct Stepper<T: Real> {
    params: ModelParams<T>,
    grid: GridSpec<T>,
    spectral: Spectral<T>,
    potential: Vec<T>,
    tables: Option<PhaseTables<T>>,
}

impl<T: Real> Stepper<T> {
    pub fn new(params: &ModelParams<T>, grid: &GridSpec<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params: params.clone(),
            grid: grid.clone(),
            spectral: Spectral::new(grid),
            potential: potential(params, grid),
            tables: None,
        })
    }

    pub fn potential_max(&self) -> T {
        self.potential.iter().copied().fold(T::zero(), T::max)
    }

    /// `e^{iαdtΔ}` commutes with `e^{-idtL_A}`, which is the rotation by
    /// `Ω dt` and factors exactly into the shears `Sx(a) Sy(b) Sx(a)`.
    /// The linear flow is applied as the palindrome `K(dt/2) R K(dt/2)`;
    /// every factor is a phase along one axis with the transverse
    /// coordinate as a parameter.
    fn build_tables(&self, dt: T) -> Result<PhaseTables<T>> {
        let theta = self.params.omega_rot * dt;
        if theta.abs() >= T::FRAC_PI_4() {
            return Err(Error::Config(format!("rotation angle per step {theta} exceeds π/4")));
        }
        let n = self.grid.points_per_axis();
        let k = self.grid.wavenumbers();
        let ko = self.grid.odd_wavenumbers();
        let c = self.grid.coords();
        let alpha = self.params.kin_coef;
        let a = -(theta * lit(0.5)).tan();
        let b = theta.sin();
        let mut y_kinetic = Vec::with_capacity(n * n);
        let mut x_shear = Vec::with_capacity(n * n);
        let mut y_shear = Vec::with_capacity(n * n);
        for &transverse in &c {
            for m in 0..n {
                let kin = -dt * lit::<T>(0.5) * alpha * k[m] * k[m];
                y_kinetic.push(Complex::from_polar(T::one(), kin));
                x_shear.push(Complex::from_polar(T::one(), kin + ko[m] * a * transverse));
                y_shear.push(Complex::from_polar(T::one(), ko[m] * b * transverse));
            }
        }
        Ok(PhaseTables {
            dt,
            y_kinetic,
            x_shear,
            y_shear,
        })
    }

    /// `u ← u exp(-iτ(V - λ|u|^{p-1}))`.
    fn pointwise(&self, u: &mut [Complex<T>], tau: T) {
        let lam = self.params.lambda;
        let half_pm1 = (self.params.p - T::one()) * lit(0.5);
        let cubic = half_pm1 == T::one();
        for (z, &v) in u.iter_mut().zip(&self.potential) {
            let d = z.norm_sqr();
            let w = if cubic {
                d
            } else if d == T::zero() {
                T::zero()
            } else {
                d.powf(half_pm1)
            };
            *z = *z * Complex::from_polar(T::one(), -tau * (v - lam * w));
        }
    }

    /// One symmetric step `N(dt/2) L(dt) N(dt/2)` with the linear flow
    /// `L` applied exactly. Negative `dt` runs the inverse step.
    pub fn step_in_place(&mut self, u: &mut Field<T>, dt: T) -> Result<()> {
        if u.values.len() != self.grid.len() {
            return Err(Error::SizeMismatch {
                expected: self.grid.len(),
                got: u.values.len(),
            });
        }
        if !dt.is_finite() || dt == T::zero() {
            return Err(Error::Config(format!("step size must be finite and nonzero, got {dt}")));
        }
        if !u.is_finite() {
            u.diverged = true;
            return Err(Error::NonFinite);
        }
        if self.tables.as_ref().map_or(true, |t| t.dt != dt) {
            self.tables = Some(self.build_tables(dt)?);
        }
        let half = dt * lit(0.5);
        let tables = self.tables.take().expect("tables built above");
        self.pointwise(&mut u.values, half);
        self.spectral.multiply_along(&mut u.values, Axis::Y, &tables.y_kinetic);
        self.spectral.multiply_along(&mut u.values, Axis::X, &tables.x_shear);
        self.spectral.multiply_along(&mut u.values, Axis::Y, &tables.y_shear);
        self.spectral.multiply_along(&mut u.values, Axis::X, &tables.x_shear);
        self.spectral.multiply_along(&mut u.values, Axis::Y, &tables.y_kinetic);
        self.pointwise(&mut u.values, half);
        self.tables = Some(tables);
        if !u.is_finite() {
            u.diverged = true;
        }
        Ok(())
    }
}

/// One Strang step on a copy of `u`.
pub fn step<T: Real>(u: &Field<T>, dt: T, params: &ModelParams<T>) -> Result<Field<T>> {
    u.check_finite()?;
    let mut out = u.clone();
    Stepper::new(params, &u.grid)?.step_in_place(&mut out, dt)?;
    Ok(out)
}

/// `max |u|²` on the outermost ring of nodes.
fn boundary_sup_sq<T: Real>(u: &Field<T>) -> T {
    let n = u.n();
    let mut m = T::zero();
    for k in 0..n {
        for &(i, j) in &[(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
            m = m.max(u.at(i, j).norm_sqr());
        }
    }
    m
}

pub fn evolve<T: Real>(
    u0: &Field<T>,
    params: &ModelParams<T>,
    tcfg: &TimeConfig<T>,
    sink: &mut dyn DiagnosticsSink<T>,
) -> Result<RunOutcome<T>> {
    evolve_with_cutoff(u0, params, tcfg, None, sink)
}

pub fn evolve_with_cutoff<T: Real>(
    u0: &Field<T>,
    params: &ModelParams<T>,
    tcfg: &TimeConfig<T>,
    cutoff: Option<CutoffProfile<T>>,
    sink: &mut dyn DiagnosticsSink<T>,
) -> Result<RunOutcome<T>> {
    tcfg.validate()?;
    u0.check_finite()?;
    if !(u0.norm_sq() > T::zero()) {
        return Err(Error::Config("initial field has zero mass".into()));
    }
    if let Some(c) = &cutoff {
        if c.grid != u0.grid {
            return Err(Error::Config("cutoff grid differs from the field grid".into()));
        }
    }
    let grid = u0.grid.clone();
    let mut stepper = Stepper::new(params, &grid)?;
    let mut monitor = Monitor::new(params, &grid, cutoff);
    let v_max = stepper.potential_max();
    let half_pm1 = (params.p - T::one()) * lit(0.5);

    let mut u = u0.clone();
    u.diverged = false;
    let first = monitor.record(&u, T::zero(), T::zero())?;
    sink.record(&first);
    let sup0 = first.sup_sq;
    let boundary0 = boundary_sup_sq(&u) / sup0;
    let boundary_limit = tcfg.boundary_tol.max(boundary0 * lit(100.0));
    let mut records = vec![first];
    let mut peak = sup0;
    let mut t = T::zero();
    let mut steps = 0usize;
    let finish_eps = tcfg.t_end * lit(1e-12);

    let reason = loop {
        let remaining = tcfg.t_end - t;
        if remaining <= finish_eps {
            break StopReason::ReachedTEnd;
        }
        let sup_sq = records.last().map(|r| r.sup_sq).unwrap_or(sup0);
        let mut dt = if tcfg.adaptive {
            let raw = tcfg.adaptive_step(params.lambda, sup_sq.powf(half_pm1), v_max);
            if raw < tcfg.dt_min {
                break StopReason::DtUnderflow;
            }
            raw.min(tcfg.dt0)
        } else {
            tcfg.dt0
        };
        if dt > remaining {
            dt = remaining;
        }
        stepper.step_in_place(&mut u, dt)?;
        t = if dt == remaining { tcfg.t_end } else { t + dt };
        steps += 1;
        if u.diverged {
            peak = T::infinity();
            break StopReason::SupNormExploded;
        }
        let rec = monitor.record(&u, t, dt)?;
        sink.record(&rec);
        records.push(rec);
        if tcfg.snapshot_every > 0 && steps % tcfg.snapshot_every == 0 {
            sink.snapshot(steps, t, &u);
        }
        peak = peak.max(rec.sup_sq);
        if rec.sup_sq >= tcfg.blowup_factor * sup0 {
            break StopReason::SupNormExploded;
        }
        if rec.tail_frac > tcfg.tail_tol {
            break StopReason::ResolutionExhausted;
        }
        if boundary_sup_sq(&u) / rec.sup_sq > boundary_limit {
            break StopReason::ResolutionExhausted;
        }
    };

    let growth = peak / sup0;
    let classification = match reason {
        StopReason::ReachedTEnd => Classification::Bounded,
        StopReason::SupNormExploded => Classification::Blowup,
        _ if growth >= tcfg.blowup_factor => Classification::Blowup,
        _ => Classification::Ambiguous,
    };
    let estimated_t = if classification == Classification::Blowup {
        auto_window(&records)
            .and_then(|w| fit_blowup_rate(&records, w).ok())
            .map(|f| f.t_hat)
    } else {
        None
    };
    Ok(RunOutcome {
        classification,
        t_final: t,
        reason,
        records,
        estimated_t,
        final_field: u,
        steps,
        peak_growth: growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::NullSink;
    use crate::spectral::make_grid;

    #[test]
    fn tiny_step_is_identity() {
        let g = make_grid(6.0_f64, 64).unwrap();
        let params = ModelParams::half(3.0, 1.0, 1.0, 2.0, 0.5);
        let u = Field::from_fn(&g, |x: f64, y: f64| Complex::new(1.0 + x, y) * (-(x * x + y * y) / 2.0).exp());
        let v = step(&u, 1e-12, &params).unwrap();
        assert!(v.max_abs_diff(&u) <= 1e-10);
    }

    #[test]
    fn free_packet_matches_fourier_solution() {
        let g = make_grid(10.0_f64, 128).unwrap();
        let params = ModelParams::unit(3.0, 0.0, 1.0, 0.0);
        let u0 = Field::from_fn(&g, |x: f64, y: f64| {
            Complex::from_polar((-(x * x + y * y) / 2.0).exp(), 1.5 * x)
        });
        // V = 0 is not a preset; zero the trap by hand through the stepper
        let mut stepper = Stepper::new(&params, &g).unwrap();
        stepper.potential.iter_mut().for_each(|v| *v = 0.0);
        let mut u = u0.clone();
        for _ in 0..50 {
            stepper.step_in_place(&mut u, 0.01).unwrap();
        }
        let mut spec = Spectral::new(&g);
        let mut c = u0.values.clone();
        spec.forward_in_place(&mut c);
        let k = g.wavenumbers();
        let n = g.points_per_axis();
        for i in 0..n {
            for j in 0..n {
                c[i * n + j] = c[i * n + j] * Complex::from_polar(1.0, -0.5 * (k[i] * k[i] + k[j] * k[j]));
            }
        }
        spec.inverse_in_place(&mut c);
        let exact = Field::from_values(&g, c).unwrap();
        assert!(u.max_abs_diff(&exact) <= 1e-10, "{:e}", u.max_abs_diff(&exact));
    }

    #[test]
    fn negative_step_inverts() {
        let g = make_grid(6.0_f64, 64).unwrap();
        let params = ModelParams::half(3.0, 1.0, 1.0, 2.0, 0.5);
        let u = Field::from_fn(&g, |x: f64, y: f64| Complex::new(1.0 + x, y) * (-(x * x + y * y) / 2.0).exp());
        let mut s = Stepper::new(&params, &g).unwrap();
        let mut v = u.clone();
        for _ in 0..20 {
            s.step_in_place(&mut v, 1e-3).unwrap();
        }
        for _ in 0..20 {
            s.step_in_place(&mut v, -1e-3).unwrap();
        }
        assert!(v.max_abs_diff(&u) <= 1e-12);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let g = make_grid(6.0_f64, 16).unwrap();
        let params = ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.0);
        let mut u = Field::zeros(&g);
        u.values[3] = Complex::new(f64::NAN, 0.0);
        assert!(step(&u, 1e-3, &params).is_err());
        let tc = TimeConfig::<f64>::default();
        assert!(evolve(&u, &params, &tc, &mut NullSink).is_err());
    }

    #[test]
    fn time_config_validation() {
        let mut tc = TimeConfig::<f64>::default();
        tc.validate().unwrap();
        tc.dt_min = 1.0;
        assert!(tc.validate().is_err());
        let mut tc = TimeConfig::<f64>::default();
        tc.blowup_factor = 1.0;
        assert!(tc.validate().is_err());
    }

    #[test]
    fn adaptive_law_shrinks_with_amplitude() {
        let tc = TimeConfig::<f64>::default();
        let a = tc.adaptive_step(1.0, 1.0, 9.0);
        let b = tc.adaptive_step(1.0, 1000.0, 9.0);
        assert!(a < tc.dt0 && b < a);
        assert!((a - 1e-3 / (1.0 + 100.0 * 1e-3)).abs() < 1e-15);
    }

    #[test]
    fn short_run_lands_on_t_end() {
        let g = make_grid(6.0_f64, 32).unwrap();
        let params = ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.5);
        let u = Field::from_real_fn(&g, |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp());
        let tc = TimeConfig::fixed(0.0105, 1e-3);
        let mut recs = Vec::new();
        let out = evolve(&u, &params, &tc, &mut recs).unwrap();
        assert_eq!(out.classification, Classification::Bounded);
        assert_eq!(out.reason, StopReason::ReachedTEnd);
        assert_eq!(out.t_final, 0.0105);
        assert_eq!(out.steps, 11);
        assert_eq!(recs.len(), 12);
        assert_eq!(recs, out.records);
    }
}
