//! Ground states: the trapped rotating state by normalized gradient flow,
//! and the free radial profile `-ΔQ + Q - Q^p = 0` by shooting.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{apply_rotation_term, potential, rotation_term_from_gradient, ModelParams};
use crate::scalar::{from_usize, lit, Real};
use crate::spectral::{integrate, spectral_laplacian, tail_fraction, Field, GridSpec, Spectral};

/// Free parameters of the imaginary-time flow.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateConfig<T> {
    pub dt_imag: T,
    pub tol: T,
    pub max_iter: usize,
    pub target_mass: T,
}

impl<T: Real> Default for GroundStateConfig<T> {
    fn default() -> Self {
        Self {
            dt_imag: lit(1e-2),
            tol: lit(1e-10),
            max_iter: 100_000,
            target_mass: T::one(),
        }
    }
}

impl<T: Real> GroundStateConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_imag > T::zero()) || !(self.tol > T::zero()) {
            return Err(Error::Config("dt_imag and tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.target_mass > T::zero()) {
            return Err(Error::Config("target_mass must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult<T> {
    pub field: Field<T>,
    /// `ω`, the Rayleigh quotient at the final iterate.
    pub chemical_potential: T,
    /// `‖ωQ - (H Q - λ|Q|^{p-1}Q)‖₂`.
    pub residual: T,
    pub iterations: usize,
    /// Energy of every accepted iterate, starting with the initial guess.
    pub energies: Vec<T>,
    /// Step actually in use at the end (halved after rejected steps).
    pub final_dt: T,
}

/// Sup-norm growth (relative to the initial guess) treated as collapse.
pub const COLLAPSE_FACTOR: f64 = 1e6;

/// Spectral tail fraction at which the flow has concentrated to grid scale.
pub const COLLAPSE_TAIL: f64 = 1e-3;

struct FlowState<T> {
    coeffs: Vec<Complex<T>>,
    /// Fourier coefficients of the non-kinetic part `V u - λ|u|^{p-1}u + L_A u`.
    rest_hat: Vec<Complex<T>>,
    energy: T,
    mu: T,
}

struct Flow<T: Real> {
    params: ModelParams<T>,
    grid: GridSpec<T>,
    spectral: Spectral<T>,
    potential: Vec<T>,
    k2: Vec<T>,
}

impl<T: Real> Flow<T> {
    fn new(params: &ModelParams<T>, grid: &GridSpec<T>) -> Self {
        let n = grid.points_per_axis();
        let k = grid.wavenumbers();
        let mut k2 = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                k2.push(k[i] * k[i] + k[j] * k[j]);
            }
        }
        Self {
            params: params.clone(),
            grid: grid.clone(),
            spectral: Spectral::new(grid),
            potential: potential(params, grid),
            k2,
        }
    }

    fn evaluate(&mut self, u: &[Complex<T>]) -> FlowState<T> {
        let mut coeffs = u.to_vec();
        self.spectral.forward_in_place(&mut coeffs);
        let (dx, dy) = self.spectral.gradient_from_coeffs(&coeffs);
        let lam = self.params.lambda;
        let half_pm1 = (self.params.p - T::one()) * lit(0.5);
        let mut rest: Vec<Complex<T>> = if self.params.omega_rot == T::zero() {
            vec![Complex::new(T::zero(), T::zero()); u.len()]
        } else {
            rotation_term_from_gradient(&self.grid, self.params.rotation(), &dx, &dy)
        };
        let mut grad = Vec::with_capacity(u.len());
        let mut pot = Vec::with_capacity(u.len());
        let mut nl = Vec::with_capacity(u.len());
        let mut rot = Vec::with_capacity(u.len());
        for idx in 0..u.len() {
            let d = u[idx].norm_sqr();
            let w = if d == T::zero() { T::zero() } else { d.powf(half_pm1) };
            rot.push((u[idx].conj() * rest[idx]).re);
            rest[idx] = rest[idx] + u[idx].scale(self.potential[idx] - lam * w);
            grad.push(dx[idx].norm_sqr() + dy[idx].norm_sqr());
            pot.push(self.potential[idx] * d);
            nl.push(d * w);
        }
        let g = &self.grid;
        let kin = self.params.kin_coef * integrate(g, &grad);
        let v = integrate(g, &pot);
        let q = integrate(g, &nl);
        let ell = integrate(g, &rot);
        let mass = integrate(g, &u.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
        let p = self.params.p;
        let energy = kin + v - lit::<T>(2.0) * lam / (p + T::one()) * q + ell;
        let mu = (kin + v + ell - lam * q) / mass;
        self.spectral.forward_in_place(&mut rest);
        FlowState {
            coeffs,
            rest_hat: rest,
            energy,
            mu,
        }
    }

    /// `û ← û - dt (α k² û + ĝ - μ û) / (1 + dt α k²)`, then back to space.
    fn advance(&mut self, state: &FlowState<T>, dt: T) -> Vec<Complex<T>> {
        let a = self.params.kin_coef;
        let mut next: Vec<Complex<T>> = state
            .coeffs
            .iter()
            .zip(&state.rest_hat)
            .zip(&self.k2)
            .map(|((c, g), &k2)| {
                let grad = c.scale(a * k2 - state.mu) + *g;
                *c - grad.scale(dt / (T::one() + dt * a * k2))
            })
            .collect();
        self.spectral.inverse_in_place(&mut next);
        next
    }
}

fn renormalize<T: Real>(grid: &GridSpec<T>, u: &mut [Complex<T>], target: T) {
    let m = integrate(grid, &u.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
    let s = (target / m).sqrt();
    u.iter_mut().for_each(|z| *z = z.scale(s));
}

/// Rotate the global phase so that `Σ Q` is real and positive.
fn fix_phase<T: Real>(u: &mut [Complex<T>]) {
    let s = u.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + *b);
    let r = s.norm();
    if r > T::zero() {
        let c = s.conj().unscale(r);
        u.iter_mut().for_each(|z| *z = *z * c);
    }
}

/// `‖ωQ - (-kin_coef ΔQ + VQ - λ|Q|^{p-1}Q + L_A Q)‖₂`, evaluated directly
/// from the operator definitions.
pub fn euler_lagrange_residual<T: Real>(params: &ModelParams<T>, q: &Field<T>, omega: T) -> Result<T> {
    let lap = spectral_laplacian(q)?;
    let la = apply_rotation_term(q, params)?;
    let v = potential(params, &q.grid);
    let half_pm1 = (params.p - T::one()) * lit(0.5);
    let defect: Vec<T> = (0..q.values.len())
        .map(|i| {
            let u = q.values[i];
            let d = u.norm_sqr();
            let w = if d == T::zero() { T::zero() } else { d.powf(half_pm1) };
            let h = -lap.values[i].scale(params.kin_coef) + u.scale(v[i] - params.lambda * w) + la.values[i];
            (u.scale(omega) - h).norm_sqr()
        })
        .collect();
    Ok(integrate(&q.grid, &defect).sqrt())
}

/// Normalized gradient flow for the Euler–Lagrange equation
/// `ωQ = -kin_coef ΔQ + VQ - λ|Q|^{p-1}Q + L_A Q` at fixed mass.
pub fn compute_ground_state<T: Real>(
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    cfg: &GroundStateConfig<T>,
    initial_guess: Option<&Field<T>>,
) -> Result<GroundStateResult<T>> {
    params.validate()?;
    cfg.validate()?;
    let limit = params.confinement_limit();
    if params.omega_rot.abs() >= limit {
        return Err(Error::Config(format!(
            "|omega_rot| = {} is not below {limit}; the rotating trap no longer confines",
            params.omega_rot.abs()
        )));
    }
    let mut u = match initial_guess {
        Some(f) => {
            if f.grid != *grid {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    got: f.values.len(),
                });
            }
            f.check_finite()?;
            f.values.clone()
        }
        None => Field::from_real_fn(grid, |x, y| (-(x * x + y * y) * lit(0.5)).exp()).values,
    };
    if u.iter().all(|z| z.norm_sqr() == T::zero()) {
        return Err(Error::Config("initial guess is identically zero".into()));
    }
    renormalize(grid, &mut u, cfg.target_mass);
    let sup0 = u.iter().map(|z| z.norm()).fold(T::zero(), T::max);

    let mut flow = Flow::new(params, grid);
    let mut state = flow.evaluate(&u);
    let mut energies = vec![state.energy];
    let mut dt = cfg.dt_imag;
    let min_dt = cfg.dt_imag * lit(1e-6);
    let mut last_change = T::infinity();
    let collapse = lit::<T>(COLLAPSE_FACTOR) * sup0;

    for iter in 1..=cfg.max_iter {
        let mut next = flow.advance(&state, dt);
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::FlowCollapse {
                iteration: iter,
                sup_norm: f64::INFINITY,
            });
        }
        renormalize(grid, &mut next, cfg.target_mass);
        let next_state = flow.evaluate(&next);
        let slack = lit::<T>(1e-12) * T::one().max(state.energy.abs());
        if next_state.energy > state.energy + slack {
            dt = dt * lit(0.5);
            if dt < min_dt {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    last_change: last_change.as_f64(),
                });
            }
            continue;
        }
        let diff: Vec<T> = u.iter().zip(&next).map(|(a, b)| (*a - *b).norm_sqr()).collect();
        let change = (integrate(grid, &diff) / cfg.target_mass).sqrt() / dt;
        u = next;
        state = next_state;
        energies.push(state.energy);
        last_change = change;

        let sup = u.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let tail = tail_fraction(grid, &state.coeffs);
        if !sup.is_finite() || sup > collapse || tail > lit(COLLAPSE_TAIL) {
            return Err(Error::FlowCollapse {
                iteration: iter,
                sup_norm: sup.as_f64(),
            });
        }
        if change <= cfg.tol {
            fix_phase(&mut u);
            let field = Field::from_values(grid, u)?;
            let omega = state.mu;
            let residual = euler_lagrange_residual(params, &field, omega)?;
            return Ok(GroundStateResult {
                field,
                chemical_potential: omega,
                residual,
                iterations: iter,
                energies,
                final_dt: dt,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        last_change: last_change.as_f64(),
    })
}

/// Positive radial solution of `Q'' + (n-1)/r Q' - Q + Q^p = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T> {
    pub r_max: T,
    pub dr: T,
    /// `(r_k, Q(r_k))` with `r_k = k dr`, starting at `r = 0`.
    pub samples: Vec<(T, T)>,
    pub p: T,
    pub dim_n: usize,
    pub q0: T,
    /// `|S^{n-1}| ∫ Q² r^{n-1} dr`.
    pub mass: T,
    /// Radius beyond which the samples follow the asymptotic decay law.
    pub tail_from: T,
}

impl<T: Real> RadialProfile<T> {
    /// Linear interpolation; zero beyond `r_max`.
    pub fn value_at(&self, r: T) -> T {
        let r = r.abs();
        let pos = r / self.dr;
        let k = pos.floor().to_usize().unwrap_or(usize::MAX);
        if k + 1 >= self.samples.len() {
            return T::zero();
        }
        let w = pos - from_usize(k);
        self.samples[k].1 * (T::one() - w) + self.samples[k + 1].1 * w
    }
}

/// Area of the unit sphere `S^{n-1}`.
pub fn unit_sphere_area<T: Real>(n: usize) -> T {
    match n {
        0 => T::zero(),
        1 => lit(2.0),
        2 => T::TAU(),
        _ => unit_sphere_area::<T>(n - 2) * T::TAU() / from_usize(n - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// Crossed zero: `Q(0)` too large.
    Over,
    /// Turned upward: `Q(0)` too small.
    Under,
}

struct Trajectory<T> {
    q: Vec<T>,
    dq: Vec<T>,
    outcome: Shot,
}

fn signed_pow<T: Real>(q: T, p: T) -> T {
    if q >= T::zero() {
        q.powf(p)
    } else {
        -(-q).powf(p)
    }
}

/// Radius covered by the power series before the one-step method starts.
const SERIES_RADIUS: f64 = 8e-3;

/// Integrates from the series start until the shot is classified or
/// `r_limit` is hit, whichever comes first.
fn shoot<T: Real>(q0: T, p: T, n: usize, dr: T, r_limit: T) -> Trajectory<T> {
    let nm1 = from_usize::<T>(n - 1);
    let rhs = |r: T, q: T, dq: T| -> T { q - signed_pow(q, p) - nm1 / r * dq };
    // Q ≈ Q0 + a r² + b r⁴ + c r⁶ near the origin
    let f1 = T::one() - p * q0.powf(p - T::one());
    let f2 = -p * (p - T::one()) * q0.powf(p - lit(2.0));
    let a = (q0 - q0.powf(p)) / from_usize::<T>(2 * n);
    let b = f1 * a / from_usize::<T>(4 * (n + 2));
    let c = (f1 * b + f2 * a * a * lit(0.5)) / from_usize::<T>(6 * (n + 4));
    let series_points = (lit::<T>(SERIES_RADIUS) / dr)
        .floor()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, 8);
    let mut q = Vec::new();
    let mut dq = Vec::new();
    for k in 0..=series_points {
        let r = from_usize::<T>(k) * dr;
        let r2 = r * r;
        q.push(q0 + r2 * (a + r2 * (b + r2 * c)));
        dq.push(r * (lit::<T>(2.0) * a + r2 * (lit::<T>(4.0) * b + r2 * lit::<T>(6.0) * c)));
    }
    let steps = (r_limit / dr).ceil().to_usize().unwrap_or(0).max(series_points + 1);
    let half = lit::<T>(0.5);
    let sixth = T::one() / lit(6.0);
    for k in series_points..steps {
        let r = from_usize::<T>(k) * dr;
        let (y, v) = (q[k], dq[k]);
        let k1y = v;
        let k1v = rhs(r, y, v);
        let k2y = v + half * dr * k1v;
        let k2v = rhs(r + half * dr, y + half * dr * k1y, v + half * dr * k1v);
        let k3y = v + half * dr * k2v;
        let k3v = rhs(r + half * dr, y + half * dr * k2y, v + half * dr * k2v);
        let k4y = v + dr * k3v;
        let k4v = rhs(r + dr, y + dr * k3y, v + dr * k3v);
        let ny = y + dr * sixth * (k1y + lit::<T>(2.0) * (k2y + k3y) + k4y);
        let nv = v + dr * sixth * (k1v + lit::<T>(2.0) * (k2v + k3v) + k4v);
        q.push(ny);
        dq.push(nv);
        if ny < T::zero() {
            return Trajectory { q, dq, outcome: Shot::Over };
        }
        if nv > T::zero() {
            return Trajectory { q, dq, outcome: Shot::Under };
        }
    }
    // still decaying at r_limit: decide by the sign of the growing mode
    let r = from_usize::<T>(q.len() - 1) * dr;
    let last = q.len() - 1;
    let growing = dq[last] + q[last] * (T::one() + nm1 / (lit::<T>(2.0) * r));
    let outcome = if growing > T::zero() { Shot::Under } else { Shot::Over };
    Trajectory { q, dq, outcome }
}

/// Shooting on `Q(0)` with bisection to machine precision.
pub fn solve_radial_profile<T: Real>(p: T, dim_n: usize, r_max: T, dr: T) -> Result<RadialProfile<T>> {
    if dim_n == 0 {
        return Err(Error::Config("dim_n must be positive".into()));
    }
    if !(p > T::one()) {
        return Err(Error::Config(format!("p must exceed 1, got {p}")));
    }
    if dim_n > 2 && !(p < T::one() + lit::<T>(4.0) / from_usize(dim_n - 2)) {
        return Err(Error::Config(format!(
            "p = {p} is not below the energy-critical power for n = {dim_n}"
        )));
    }
    if !(r_max > T::zero() && dr > T::zero() && dr < r_max) {
        return Err(Error::Config("need 0 < dr < r_max".into()));
    }
    let r_limit = r_max + lit(100.0);

    let mut lo = T::one();
    let mut hi = lit::<T>(2.0);
    let mut grow = 0;
    while shoot(hi, p, dim_n, dr, r_limit).outcome == Shot::Under {
        lo = hi;
        hi = hi * lit(2.0);
        grow += 1;
        if grow > 60 || !hi.is_finite() {
            return Err(Error::BracketFailure(format!(
                "no overshooting Q(0) found up to {hi}"
            )));
        }
    }
    if shoot(lo, p, dim_n, dr, r_limit).outcome != Shot::Under {
        return Err(Error::BracketFailure(format!(
            "lower end Q(0) = {lo} does not undershoot"
        )));
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, p, dim_n, dr, r_limit).outcome {
            Shot::Under => lo = mid,
            Shot::Over => hi = mid,
        }
    }

    // keep whichever end stays on the separatrix longer
    let a = shoot(lo, p, dim_n, dr, r_limit);
    let b = shoot(hi, p, dim_n, dr, r_limit);
    let (traj, q0) = if b.q.len() > a.q.len() { (b, hi) } else { (a, lo) };
    let departure = traj.q.len() - 1;
    let margin = (lit::<T>(4.0) / dr).to_usize().unwrap_or(0);
    let cut = departure.saturating_sub(margin).max(1);

    let mut steps = (r_max / dr).ceil().to_usize().unwrap_or(0);
    if steps % 2 == 1 {
        steps += 1;
    }
    let nm1_half = from_usize::<T>(dim_n - 1) * lit(0.5);
    let rc = from_usize::<T>(cut) * dr;
    let qc = traj.q[cut];
    let samples: Vec<(T, T)> = (0..=steps)
        .map(|k| {
            let r = from_usize::<T>(k) * dr;
            let v = if k <= cut && k < traj.q.len() {
                traj.q[k]
            } else {
                qc * (rc / r).powf(nm1_half) * (rc - r).exp()
            };
            (r, v)
        })
        .collect();
    let _ = traj.dq;

    // composite Simpson for ∫ Q² r^{n-1} dr
    let weight = |k: usize| -> T {
        if k == 0 || k == steps {
            T::one()
        } else if k % 2 == 1 {
            lit(4.0)
        } else {
            lit(2.0)
        }
    };
    let exponent = (dim_n - 1) as i32;
    let integral = crate::spectral::neumaier_sum(
        samples
            .iter()
            .enumerate()
            .map(|(k, &(r, q))| weight(k) * q * q * r.powi(exponent)),
    ) * dr
        / lit(3.0);
    let r_end = from_usize::<T>(steps) * dr;
    Ok(RadialProfile {
        r_max: r_end,
        dr,
        samples,
        p,
        dim_n,
        q0,
        mass: unit_sphere_area::<T>(dim_n) * integral,
        tail_from: rc.min(r_end),
    })
}
