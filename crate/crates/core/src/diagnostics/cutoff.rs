//! Radial cutoff `φ(x) = R² ψ(|x|/R)` with `ψ = r²/2` on `r ≤ 2`, `ψ = 0`
//! on `r ≥ 3`, and a quintic Hermite blend in between.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spectral::GridSpec;

/// Blend coefficients in `s = r - 2`: `2 + 2s + s²/2 + c3 s³ + c4 s⁴ + c5 s⁵`.
const C3: f64 = -33.5;
const C4: f64 = 47.5;
const C5: f64 = -18.5;

/// `(ψ, ψ', ψ'', ψ''', ψ'''')` at radius `r` (unscaled).
pub fn psi_derivatives<T: Real>(r: T) -> [T; 5] {
    let z = T::zero();
    let r = r.abs();
    if r <= lit(2.0) {
        return [r * r * lit(0.5), r, T::one(), z, z];
    }
    if r >= lit(3.0) {
        return [z; 5];
    }
    let s = r - lit(2.0);
    let (c3, c4, c5) = (lit::<T>(C3), lit::<T>(C4), lit::<T>(C5));
    let v = lit::<T>(2.0) + s * (lit::<T>(2.0) + s * (lit::<T>(0.5) + s * (c3 + s * (c4 + s * c5))));
    let d1 = lit::<T>(2.0) + s * (T::one() + s * (lit::<T>(3.0) * c3 + s * (lit::<T>(4.0) * c4 + s * lit::<T>(5.0) * c5)));
    let d2 = T::one() + s * (lit::<T>(6.0) * c3 + s * (lit::<T>(12.0) * c4 + s * lit::<T>(20.0) * c5));
    let d3 = lit::<T>(6.0) * c3 + s * (lit::<T>(24.0) * c4 + s * lit::<T>(60.0) * c5);
    let d4 = lit::<T>(24.0) * c4 + s * lit::<T>(120.0) * c5;
    [v, d1, d2, d3, d4]
}

/// `ψ'(s)/s`, with its limit 1 in the quadratic region.
fn psi1_over_s<T: Real>(s: T, d: &[T; 5]) -> T {
    if s <= lit(2.0) {
        T::one()
    } else {
        d[1] / s
    }
}

/// 2-D radial Laplacian of `ψ` at `s`.
pub fn laplacian_psi<T: Real>(s: T) -> T {
    let s = s.abs();
    let d = psi_derivatives(s);
    if s <= lit(2.0) {
        return lit(2.0);
    }
    d[2] + psi1_over_s(s, &d)
}

/// 2-D radial bi-Laplacian `ψ'''' + 2ψ'''/s - ψ''/s² + ψ'/s³` of `ψ`.
pub fn bilaplacian_psi<T: Real>(s: T) -> T {
    let s = s.abs();
    if s <= lit(2.0) || s >= lit(3.0) {
        return T::zero();
    }
    let d = psi_derivatives(s);
    d[4] + lit::<T>(2.0) * d[3] / s - d[2] / (s * s) + d[1] / (s * s * s)
}

/// Extremes of `ψ''` over the blend, sampled on `samples` points.
pub fn psi_second_derivative_range<T: Real>(samples: usize) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for k in 0..=samples {
        let r = lit::<T>(2.0) + lit::<T>(k as f64 / samples as f64);
        let d2 = psi_derivatives(r)[2];
        lo = lo.min(d2);
        hi = hi.max(d2);
    }
    (lo, hi)
}

/// `φ` and the derived quantities entering the virial identities, sampled
/// on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile<T> {
    pub radius: T,
    pub grid: GridSpec<T>,
    pub phi: Vec<T>,
    pub grad_x: Vec<T>,
    pub grad_y: Vec<T>,
    /// Second radial derivative `φ''(r) = ψ''(r/R)`.
    pub phi_rr: Vec<T>,
    /// `φ'(r)/r = ψ'(s)/s`.
    pub phi_r_over_r: Vec<T>,
    /// `φ''/r² - φ'/r³`.
    pub cross_coef: Vec<T>,
    pub laplacian: Vec<T>,
    pub bilaplacian: Vec<T>,
}

impl<T: Real> CutoffProfile<T> {
    pub fn new(radius: T, grid: &GridSpec<T>) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Config(format!("cutoff radius must be positive, got {radius}")));
        }
        let len = grid.len();
        let mut out = Self {
            radius,
            grid: grid.clone(),
            phi: Vec::with_capacity(len),
            grad_x: Vec::with_capacity(len),
            grad_y: Vec::with_capacity(len),
            phi_rr: Vec::with_capacity(len),
            phi_r_over_r: Vec::with_capacity(len),
            cross_coef: Vec::with_capacity(len),
            laplacian: Vec::with_capacity(len),
            bilaplacian: Vec::with_capacity(len),
        };
        let inv_r2 = T::one() / (radius * radius);
        for idx in 0..len {
            let (x, y) = grid.node(idx);
            let r = (x * x + y * y).sqrt();
            let s = r / radius;
            let d = psi_derivatives(s);
            let q = psi1_over_s(s, &d);
            out.phi.push(radius * radius * d[0]);
            // ∇φ = R ψ'(s) x / r = ψ'(s)/s · x
            out.grad_x.push(q * x);
            out.grad_y.push(q * y);
            out.phi_rr.push(d[2]);
            out.phi_r_over_r.push(q);
            out.cross_coef.push(if s <= lit(2.0) {
                T::zero()
            } else {
                (d[2] - q) / (r * r)
            });
            out.laplacian.push(laplacian_psi(s));
            out.bilaplacian.push(bilaplacian_psi(s) * inv_r2);
        }
        Ok(out)
    }

    /// Whether the support `r ≤ 3R` fits inside the box.
    pub fn support_inside(&self) -> bool {
        lit::<T>(3.0) * self.radius <= self.grid.half_width()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn blend_is_c2() {
        for r0 in [2.0_f64, 3.0] {
            let below = psi_derivatives(r0 - 1e-13);
            let above = psi_derivatives(r0 + 1e-13);
            for k in 0..3 {
                assert!((below[k] - above[k]).abs() <= 1e-10, "r={r0} k={k}");
            }
        }
        let at2 = psi_derivatives(2.0_f64 + 1e-15);
        assert!((at2[0] - 2.0).abs() < 1e-12 && (at2[1] - 2.0).abs() < 1e-12 && (at2[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blend_derivatives_match_finite_differences() {
        let h = 1e-4;
        for &r in &[2.1_f64, 2.37, 2.5, 2.81, 2.95] {
            let d = psi_derivatives(r);
            for k in 0..4 {
                let f = |x: f64| psi_derivatives(x)[k];
                let fd = (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h);
                assert!((fd - d[k + 1]).abs() <= 1e-8 * (1.0 + d[k + 1].abs()), "r={r} k={k}");
            }
        }
    }

    #[test]
    fn radial_laplacians_match_finite_differences() {
        let h = 1e-3;
        let radial_lap = |f: &dyn Fn(f64) -> f64, s: f64| {
            let d2 = (-f(s + 2.0 * h) + 16.0 * f(s + h) - 30.0 * f(s) + 16.0 * f(s - h) - f(s - 2.0 * h)) / (12.0 * h * h);
            let d1 = (f(s - 2.0 * h) - 8.0 * f(s - h) + 8.0 * f(s + h) - f(s + 2.0 * h)) / (12.0 * h);
            d2 + d1 / s
        };
        for &s in &[0.7_f64, 1.5, 2.2, 2.5, 2.8, 3.5] {
            let psi = |x: f64| psi_derivatives(x)[0];
            let lap = radial_lap(&psi, s);
            assert!((lap - laplacian_psi(s)).abs() <= 1e-8, "s={s}");
            let lapf = |x: f64| laplacian_psi(x);
            let bil = radial_lap(&lapf, s);
            assert!((bil - bilaplacian_psi(s)).abs() <= 1e-6 * (1.0 + bil.abs()), "s={s}");
        }
    }

    #[test]
    fn scaling_identities_on_grid() {
        let g = make_grid(12.0_f64, 64).unwrap();
        let radius = 1.7;
        let c = CutoffProfile::new(radius, &g).unwrap();
        let h = 1e-3;
        let phi = |x: f64, y: f64| radius * radius * psi_derivatives((x * x + y * y).sqrt() / radius)[0];
        for idx in (0..g.len()).step_by(37) {
            let (x, y) = g.node(idx);
            let s = (x * x + y * y).sqrt() / radius;
            // stay clear of the kinks at s = 2, 3
            if (s - 2.0).abs() < 0.05 || (s - 3.0).abs() < 0.05 {
                continue;
            }
            let gx = (phi(x - 2.0 * h, y) - 8.0 * phi(x - h, y) + 8.0 * phi(x + h, y) - phi(x + 2.0 * h, y)) / (12.0 * h);
            let gy = (phi(x, y - 2.0 * h) - 8.0 * phi(x, y - h) + 8.0 * phi(x, y + h) - phi(x, y + 2.0 * h)) / (12.0 * h);
            assert!((gx - c.grad_x[idx]).abs() <= 1e-8 && (gy - c.grad_y[idx]).abs() <= 1e-8);
            let d2 = |o: f64, p: fn(f64, f64, f64) -> (f64, f64)| {
                let f = |t: f64| {
                    let (a, b) = p(x, y, t);
                    phi(a, b)
                };
                (-f(2.0 * o) + 16.0 * f(o) - 30.0 * f(0.0) + 16.0 * f(-o) - f(-2.0 * o)) / (12.0 * o * o)
            };
            let lap = d2(h, |x, y, t| (x + t, y)) + d2(h, |x, y, t| (x, y + t));
            assert!((lap - c.laplacian[idx]).abs() <= 1e-8 * (1.0 + lap.abs()), "{lap} vs {}", c.laplacian[idx]);
            let want = bilaplacian_psi(s) / (radius * radius);
            assert!((c.bilaplacian[idx] - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn quadratic_region_values() {
        let g = make_grid(6.0_f64, 32).unwrap();
        let c = CutoffProfile::new(3.0, &g).unwrap();
        for idx in 0..g.len() {
            let (x, y) = g.node(idx);
            if x * x + y * y > 36.0 {
                continue;
            }
            assert!((c.phi[idx] - (x * x + y * y) / 2.0).abs() < 1e-12);
            assert_eq!(c.laplacian[idx], 2.0);
            assert_eq!(c.bilaplacian[idx], 0.0);
        }
        assert!(!c.support_inside());
        assert!(CutoffProfile::new(0.0, &g).is_err());
    }

    #[test]
    fn second_derivative_cap_is_exceeded() {
        let (lo, hi): (f64, f64) = psi_second_derivative_range(10_000);
        assert!(hi > 15.0 && hi < 16.0, "{hi}");
        assert!(lo < -19.0 && lo > -20.0, "{lo}");
    }
}
