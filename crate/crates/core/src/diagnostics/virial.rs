//! Localized virial quantities `J = ∫φ|u|²` and its first two time
//! derivatives, plus the convergence-order check of the identities.

use num_complex::Complex;

use crate::diagnostics::cutoff::CutoffProfile;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::{lit, Real};
use crate::spectral::{integrate, Field, Spectral};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Virial<T> {
    pub j: T,
    pub j1: T,
    /// General form, valid without radial symmetry.
    pub j2: T,
    /// Radial specialization (`4∫φ''|∇u|²` kinetic term, isotropic trap).
    pub j2_radial: T,
}

fn check_grid<T: Real>(u: &Field<T>, cutoff: &CutoffProfile<T>) -> Result<()> {
    if u.grid != cutoff.grid {
        return Err(Error::SizeMismatch {
            expected: cutoff.grid.len(),
            got: u.values.len(),
        });
    }
    u.check_finite()
}

/// All virial quantities from precomputed spectral derivatives.
pub fn virial_from_gradient<T: Real>(
    cutoff: &CutoffProfile<T>,
    params: &ModelParams<T>,
    u: &[Complex<T>],
    dx: &[Complex<T>],
    dy: &[Complex<T>],
) -> Virial<T> {
    let grid = &cutoff.grid;
    let a = params.kin_coef;
    let b = params.pot_coef;
    let (g1, g2) = (params.gamma1 * params.gamma1, params.gamma2 * params.gamma2);
    let gamma_sq = params.gamma1 * params.gamma2;
    let half_pm1 = (params.p - T::one()) * lit(0.5);
    let nl_coef = lit::<T>(2.0) * params.lambda * (params.p - T::one()) / (params.p + T::one());
    let len = u.len();
    let mut j = Vec::with_capacity(len);
    let mut j1 = Vec::with_capacity(len);
    let mut common = Vec::with_capacity(len);
    let mut general = Vec::with_capacity(len);
    let mut radial = Vec::with_capacity(len);
    for idx in 0..len {
        let (x, y) = grid.node(idx);
        let d = u[idx].norm_sqr();
        let w = if d == T::zero() { T::zero() } else { d.powf(half_pm1) };
        let (gx, gy) = (cutoff.grad_x[idx], cutoff.grad_y[idx]);
        j.push(cutoff.phi[idx] * d);
        let flux = u[idx].conj() * (dx[idx].scale(gx) + dy[idx].scale(gy));
        j1.push(flux.im);
        let grad_sq = dx[idx].norm_sqr() + dy[idx].norm_sqr();
        let radial_part = (dx[idx].scale(x) + dy[idx].scale(y)).norm_sqr();
        let grad_v_dot = lit::<T>(2.0) * b * (g1 * x * gx + g2 * y * gy);
        common.push(-a * nl_coef * cutoff.laplacian[idx] * d * w - a * a * cutoff.bilaplacian[idx] * d);
        general.push(
            lit::<T>(4.0) * a * a * (cutoff.cross_coef[idx] * radial_part + cutoff.phi_r_over_r[idx] * grad_sq)
                - lit::<T>(2.0) * a * grad_v_dot * d,
        );
        radial.push(
            lit::<T>(4.0) * a * a * cutoff.phi_rr[idx] * grad_sq
                - lit::<T>(4.0) * a * b * gamma_sq * (x * gx + y * gy) * d,
        );
    }
    let common = integrate(grid, &common);
    Virial {
        j: integrate(grid, &j),
        j1: lit::<T>(2.0) * a * integrate(grid, &j1),
        j2: common + integrate(grid, &general),
        j2_radial: common + integrate(grid, &radial),
    }
}

pub fn virial<T: Real>(u: &Field<T>, cutoff: &CutoffProfile<T>, params: &ModelParams<T>) -> Result<Virial<T>> {
    check_grid(u, cutoff)?;
    let (dx, dy) = Spectral::new(&u.grid).gradient(u)?;
    Ok(virial_from_gradient(cutoff, params, &u.values, &dx.values, &dy.values))
}

/// `J = ∫ φ |u|²`.
pub fn virial_j<T: Real>(u: &Field<T>, cutoff: &CutoffProfile<T>) -> Result<T> {
    check_grid(u, cutoff)?;
    let d: Vec<T> = u.values.iter().zip(&cutoff.phi).map(|(z, p)| z.norm_sqr() * *p).collect();
    Ok(integrate(&u.grid, &d))
}

/// `J' = 2 kin_coef Im ∫ ū ∇φ·∇u`.
pub fn virial_j1<T: Real>(u: &Field<T>, cutoff: &CutoffProfile<T>, params: &ModelParams<T>) -> Result<T> {
    Ok(virial(u, cutoff, params)?.j1)
}

/// Radial form of `J''`; assumes an isotropic trap.
pub fn virial_j2<T: Real>(u: &Field<T>, cutoff: &CutoffProfile<T>, params: &ModelParams<T>) -> Result<T> {
    Ok(virial(u, cutoff, params)?.j2_radial)
}

/// General form of `J''` with the `|x·∇u|²` term.
pub fn virial_j2_general<T: Real>(u: &Field<T>, cutoff: &CutoffProfile<T>, params: &ModelParams<T>) -> Result<T> {
    Ok(virial(u, cutoff, params)?.j2)
}

/// Outcome of the order-of-convergence check on two runs, the second at
/// half the step of the first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialReport<T> {
    /// `max |dJ/dt - J'|` on the coarse and fine runs.
    pub j1_defect: (T, T),
    /// `max |dJ'/dt - J''|` on the coarse and fine runs.
    pub j2_defect: (T, T),
    pub j1_ratio: T,
    pub j2_ratio: T,
    pub pass: bool,
}

/// Accepted window for the defect ratio under halving of the step.
pub const ORDER_RATIO_WINDOW: (f64, f64) = (3.5, 4.5);

pub const MIN_VIRIAL_RECORDS: usize = 16;

/// Three-point derivative on a possibly non-uniform time grid.
fn centered_defects<T: Real>(t: &[T], f: &[T], g: &[T]) -> T {
    let mut worst = T::zero();
    for k in 1..t.len() - 1 {
        let h1 = t[k] - t[k - 1];
        let h2 = t[k + 1] - t[k];
        let d = -h2 / (h1 * (h1 + h2)) * f[k - 1] + (h2 - h1) / (h1 * h2) * f[k] + h1 / (h2 * (h1 + h2)) * f[k + 1];
        worst = worst.max((d - g[k]).abs());
    }
    worst
}

fn defects<T: Real>(records: &[DiagnosticsRecord<T>]) -> Result<(T, T)> {
    if records.len() < MIN_VIRIAL_RECORDS {
        return Err(Error::InsufficientRecords {
            needed: MIN_VIRIAL_RECORDS,
            got: records.len(),
        });
    }
    let mut t = Vec::with_capacity(records.len());
    let mut j = Vec::with_capacity(records.len());
    let mut j1 = Vec::with_capacity(records.len());
    let mut j2 = Vec::with_capacity(records.len());
    for r in records {
        match (r.j, r.j1, r.j2) {
            (Some(a), Some(b), Some(c)) => {
                t.push(r.t);
                j.push(a);
                j1.push(b);
                j2.push(c);
            }
            _ => return Err(Error::Config("records carry no virial values".into())),
        }
    }
    Ok((centered_defects(&t, &j, &j1), centered_defects(&t, &j1, &j2)))
}

pub fn verify_virial_identities<T: Real>(
    coarse: &[DiagnosticsRecord<T>],
    fine: &[DiagnosticsRecord<T>],
) -> Result<VirialReport<T>> {
    let (c1, c2) = defects(coarse)?;
    let (f1, f2) = defects(fine)?;
    let ratio = |a: T, b: T| if b > T::zero() { a / b } else { T::infinity() };
    let j1_ratio = ratio(c1, f1);
    let j2_ratio = ratio(c2, f2);
    let (lo, hi) = (lit::<T>(ORDER_RATIO_WINDOW.0), lit::<T>(ORDER_RATIO_WINDOW.1));
    let inside = |r: T| r >= lo && r <= hi;
    Ok(VirialReport {
        j1_defect: (c1, f1),
        j2_defect: (c2, f2),
        j1_ratio,
        j2_ratio,
        pass: inside(j1_ratio) && inside(j2_ratio),
    })
}
