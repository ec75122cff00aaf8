//! Blowup time and rate estimation from a gradient-norm time series, and
//! the slope checks against the closed-form exponents.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::model::Exponents;
use crate::scalar::{from_usize, lit, Real};

pub const MIN_FIT_RECORDS: usize = 30;

/// Coefficient of determination below which a fit is flagged.
pub const MIN_R2: f64 = 0.95;

/// `2 - 2κ` at or below which `∫(T-s)‖∇u‖² ds` is treated as divergent.
pub const DIVERGENCE_MARGIN: f64 = 2e-3;

/// Absolute slack on the upper-exponent slope check.
pub const UPPER_SLACK: f64 = 0.075;

/// Relative slack on the lower-exponent check.
pub const LOWER_REL_SLACK: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit<T> {
    pub t_hat: T,
    /// Exponent in `‖∇u‖₂ ~ C (T - t)^{-κ}`.
    pub kappa_hat: T,
    /// Log-log slope of `g(t) = ∫_t^T (T-s) ‖∇u(s)‖₂² ds` against `T - t`.
    pub gbound_slope: T,
    pub window: (T, T),
    /// `R²` of the rate fit at `t_hat`.
    pub rate_r2: T,
    /// `R²` of the `g` slope fit.
    pub g_r2: T,
    pub low_confidence: bool,
    pub g_divergent: bool,
    /// Extrapolated contribution of `[t_last, T]` to `g(t_last)`.
    pub tail_contribution: T,
    pub records_used: usize,
}

/// Least-squares line `y ≈ a + b x`; returns `(b, a, R²)`.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> (T, T, T) {
    let n = from_usize::<T>(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a - mx, *b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > T::zero() {
        (sxy * sxy / (sxx * syy)).min(T::one())
    } else {
        T::one()
    };
    (slope, intercept, r2)
}

/// Records in `[t_lo, t_hi]`, checked for count and monotone growth.
fn select<T: Real>(records: &[DiagnosticsRecord<T>], window: (T, T)) -> Result<Vec<&DiagnosticsRecord<T>>> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Config(format!("fit window must satisfy t_lo < t_hi, got ({lo}, {hi})")));
    }
    let sel: Vec<_> = records.iter().filter(|r| r.t >= lo && r.t <= hi).collect();
    if sel.len() < MIN_FIT_RECORDS {
        return Err(Error::InsufficientRecords {
            needed: MIN_FIT_RECORDS,
            got: sel.len(),
        });
    }
    for w in sel.windows(2) {
        if w[1].grad_norm_sq < w[0].grad_norm_sq {
            return Err(Error::NonMonotone { t: w[1].t.as_f64() });
        }
    }
    Ok(sel)
}

/// Trailing stretch of non-decreasing `grad_norm_sq`, starting where the
/// gradient norm has passed the geometric mean of the stretch's end values.
pub fn auto_window<T: Real>(records: &[DiagnosticsRecord<T>]) -> Option<(T, T)> {
    if records.len() < MIN_FIT_RECORDS {
        return None;
    }
    let last = records.len() - 1;
    let mut start = last;
    while start > 0 && records[start - 1].grad_norm_sq <= records[start].grad_norm_sq {
        start -= 1;
    }
    let g0 = records[start].grad_norm_sq;
    let g1 = records[last].grad_norm_sq;
    let mid = (g0 * g1).sqrt();
    let mut lo = records[start..]
        .iter()
        .position(|r| r.grad_norm_sq >= mid)
        .map(|k| k + start)
        .unwrap_or(start);
    if last + 1 - lo < MIN_FIT_RECORDS {
        lo = (last + 1).saturating_sub(MIN_FIT_RECORDS).max(start);
    }
    if last + 1 - lo < MIN_FIT_RECORDS {
        return None;
    }
    Some((records[lo].t, records[last].t))
}

/// Trailing stretch of non-decreasing `grad_norm_sq` over which `‖∇u‖₂`
/// spans at most its last decade of growth.
pub fn decade_window<T: Real>(records: &[DiagnosticsRecord<T>]) -> Option<(T, T)> {
    if records.len() < MIN_FIT_RECORDS {
        return None;
    }
    let last = records.len() - 1;
    let mut start = last;
    while start > 0 && records[start - 1].grad_norm_sq <= records[start].grad_norm_sq {
        start -= 1;
    }
    // a decade in the norm is two in its square
    let floor = records[last].grad_norm_sq * lit(1e-2);
    let lo = (start..=last).find(|&k| records[k].grad_norm_sq >= floor).unwrap_or(start);
    if last + 1 - lo < MIN_FIT_RECORDS {
        return None;
    }
    Some((records[lo].t, records[last].t))
}

pub fn fit_blowup_rate<T: Real>(records: &[DiagnosticsRecord<T>], window: (T, T)) -> Result<RateFit<T>> {
    let sel = select(records, window)?;
    let t: Vec<T> = sel.iter().map(|r| r.t).collect();
    let y: Vec<T> = sel.iter().map(|r| r.grad_norm_sq.ln() * lit(0.5)).collect();
    let t_lo = t[0];
    let t_hi = *t.last().expect("nonempty window");
    let span = t_hi - t_lo;

    let quality = |ln_delta: T| -> T {
        let big_t = t_hi + ln_delta.exp();
        let x: Vec<T> = t.iter().map(|s| (big_t - *s).ln()).collect();
        linear_fit(&x, &y).2
    };
    // coarse scan in ln(T - t_hi), then golden section around the best
    let a0 = (span * lit(1e-6)).ln();
    let b0 = (span * lit(10.0)).ln();
    let samples = 240;
    let step = (b0 - a0) / from_usize(samples);
    let mut best = (0usize, T::neg_infinity());
    for k in 0..=samples {
        let q = quality(a0 + step * from_usize(k));
        if q > best.1 {
            best = (k, q);
        }
    }
    let mut lo = a0 + step * from_usize(best.0.saturating_sub(1));
    let mut hi = a0 + step * from_usize((best.0 + 1).min(samples));
    let inv_phi = (lit::<T>(5.0).sqrt() - T::one()) * lit(0.5);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (quality(c), quality(d));
    for _ in 0..200 {
        if hi - lo <= lit(1e-13) {
            break;
        }
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = quality(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = quality(d);
        }
    }
    let ln_delta = (lo + hi) * lit(0.5);
    let t_hat = t_hi + ln_delta.exp();
    let x: Vec<T> = t.iter().map(|s| (t_hat - *s).ln()).collect();
    let (slope, intercept, rate_r2) = linear_fit(&x, &y);
    let kappa_hat = -slope;

    let two = lit::<T>(2.0);
    let expo = two - two * kappa_hat;
    let g_divergent = expo <= lit(DIVERGENCE_MARGIN);
    let (gbound_slope, g_r2, tail) = if g_divergent {
        (T::zero(), T::zero(), T::infinity())
    } else {
        let tail = (two * intercept).exp() * (t_hat - t_hi).powf(expo) / expo;
        let m = sel.len();
        let mut g = vec![T::zero(); m];
        g[m - 1] = tail;
        for k in (0..m - 1).rev() {
            let f0 = (t_hat - t[k]) * sel[k].grad_norm_sq;
            let f1 = (t_hat - t[k + 1]) * sel[k + 1].grad_norm_sq;
            g[k] = g[k + 1] + (t[k + 1] - t[k]) * (f0 + f1) * lit(0.5);
        }
        let lg: Vec<T> = g.iter().map(|v| v.ln()).collect();
        let (s, _, r2) = linear_fit(&x, &lg);
        (s, r2, tail)
    };
    let low_confidence = rate_r2 < lit(MIN_R2) || (!g_divergent && g_r2 < lit(MIN_R2));
    Ok(RateFit {
        t_hat,
        kappa_hat,
        gbound_slope,
        window: (t_lo, t_hi),
        rate_r2,
        g_r2,
        low_confidence,
        g_divergent,
        tail_contribution: tail,
        records_used: sel.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport<T> {
    pub pass: bool,
    pub measured: T,
    pub threshold: T,
    pub low_confidence: bool,
}

/// `gbound_slope ≥ upper_exp - 0.075`, failing on a low-confidence or
/// divergent fit.
pub fn check_universal_bound<T: Real>(fit: &RateFit<T>, exps: &Exponents<T>) -> BoundReport<T> {
    let threshold = exps.upper_exp - lit(UPPER_SLACK);
    let low = fit.low_confidence || fit.g_divergent;
    BoundReport {
        pass: !low && fit.gbound_slope >= threshold,
        measured: fit.gbound_slope,
        threshold,
        low_confidence: low,
    }
}

/// `kappa_hat ≥ lower_exp (1 - 0.15)`.
pub fn check_lower_bound<T: Real>(fit: &RateFit<T>, exps: &Exponents<T>) -> BoundReport<T> {
    let threshold = exps.lower_exp * (T::one() - lit(LOWER_REL_SLACK));
    BoundReport {
        pass: !fit.low_confidence && fit.kappa_hat >= threshold,
        measured: fit.kappa_hat,
        threshold,
        low_confidence: fit.low_confidence,
    }
}
