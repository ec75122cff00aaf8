//! Equation coefficients, the trap and rotation operators, conserved
//! functionals, and the closed-form blowup exponents.
//!
//! Every run integrates the generalized equation
//!
//! ```text
//! i u_t = -kin_coef Δu + V u - λ |u|^{p-1} u + L_A u,
//! V = pot_coef (γ₁² x² + γ₂² y²),   L_A u = i (M x)·∇u,
//! ```
//!
//! with `M = [[0, -Ω], [Ω, 0]]`, so that `L_A u = -iΩ (y ∂x - x ∂y) u`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spectral::{neumaier_sum, Field, GridSpec, Spectral};

/// Which published form of the equation the coefficients follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    /// `-Δ` kinetic term, isotropic `V = γ² |x|²`.
    Unit,
    /// `-½Δ` kinetic term, `V = ½ (γ₁² x² + γ₂² y²)`.
    Half,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::Unit => "unit",
            Convention::Half => "half",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unit" => Some(Convention::Unit),
            "half" => Some(Convention::Half),
            _ => None,
        }
    }

    /// `(kin_coef, pot_coef)` fixed by the preset.
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            Convention::Unit => (1.0, 1.0),
            Convention::Half => (0.5, 0.5),
        }
    }
}

/// Physical coefficients of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    /// Dimension entering the closed-form exponents; the grid is always 2-D.
    pub dim_n: usize,
    pub p: T,
    pub lambda: T,
    pub gamma1: T,
    pub gamma2: T,
    pub omega_rot: T,
    pub kin_coef: T,
    pub pot_coef: T,
    pub convention: Convention,
}

impl<T: Real> ModelParams<T> {
    /// Isotropic trap `γ² |x|²` with `-Δ`.
    pub fn unit(p: T, lambda: T, gamma: T, omega_rot: T) -> Self {
        Self {
            dim_n: 2,
            p,
            lambda,
            gamma1: gamma,
            gamma2: gamma,
            omega_rot,
            kin_coef: T::one(),
            pot_coef: T::one(),
            convention: Convention::Unit,
        }
    }

    /// Trap `½ (γ₁² x² + γ₂² y²)` with `-½Δ`.
    pub fn half(p: T, lambda: T, gamma1: T, gamma2: T, omega_rot: T) -> Self {
        let half = lit(0.5);
        Self {
            dim_n: 2,
            p,
            lambda,
            gamma1,
            gamma2,
            omega_rot,
            kin_coef: half,
            pot_coef: half,
            convention: Convention::Half,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dim_n < 2 {
            return bad(format!("dim_n must be >= 2, got {}", self.dim_n));
        }
        if !(self.p > T::one()) {
            return bad(format!("p must exceed 1, got {}", self.p));
        }
        if !(self.lambda >= T::zero()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.gamma1 > T::zero() && self.gamma2 > T::zero()) {
            return bad("trap frequencies must be positive".into());
        }
        if !(self.kin_coef > T::zero() && self.pot_coef > T::zero()) {
            return bad("kin_coef and pot_coef must be positive".into());
        }
        if !self.omega_rot.is_finite() {
            return bad("omega_rot must be finite".into());
        }
        let (kin, pot) = self.convention.coefficients();
        if self.kin_coef != lit(kin) || self.pot_coef != lit(pot) {
            return bad(format!(
                "{} requires kin_coef = {kin} and pot_coef = {pot}",
                self.convention.name()
            ));
        }
        if self.convention == Convention::Unit && self.gamma1 != self.gamma2 {
            return bad("the unit convention uses an isotropic trap (gamma1 = gamma2)".into());
        }
        Ok(())
    }

    pub fn rotation(&self) -> RotationMatrix<T> {
        RotationMatrix::new(self.omega_rot)
    }

    pub fn is_isotropic(&self) -> bool {
        self.gamma1 == self.gamma2
    }

    /// `1 + 4/n < p < 1 + 4/(n-2)` (or `3 < p < 5` when `n = 2`).
    pub fn in_supercritical_window(&self) -> bool {
        let n = lit::<T>(self.dim_n as f64);
        let lo = T::one() + lit::<T>(4.0) / n;
        if self.dim_n == 2 {
            self.p > lo && self.p < lit(5.0)
        } else {
            self.p > lo && self.p < T::one() + lit::<T>(4.0) / (n - lit(2.0))
        }
    }

    /// Runs outside the window are allowed but exploratory.
    pub fn is_exploratory(&self) -> bool {
        !self.in_supercritical_window()
    }

    /// Rotation speed above which the trap no longer confines:
    /// `2 sqrt(kin_coef · pot_coef) · min(γ₁, γ₂)`.
    pub fn confinement_limit(&self) -> T {
        lit::<T>(2.0) * (self.kin_coef * self.pot_coef).sqrt() * self.gamma1.min(self.gamma2)
    }
}

/// Skew matrix `M = [[0, -m21], [m21, 0]]` generating `A(x) = M x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix<T> {
    pub m21: T,
}

impl<T: Real> RotationMatrix<T> {
    pub fn new(m21: T) -> Self {
        Self { m21 }
    }

    pub fn matrix(&self) -> [[T; 2]; 2] {
        [[T::zero(), -self.m21], [self.m21, T::zero()]]
    }

    /// `A(x, y) = M (x, y)`.
    #[inline]
    pub fn field_at(&self, x: T, y: T) -> (T, T) {
        (-self.m21 * y, self.m21 * x)
    }

    /// `e^{tM}`, a rotation by angle `m21 · t`.
    pub fn exp(&self, t: T) -> [[T; 2]; 2] {
        let (s, c) = (self.m21 * t).sin_cos();
        [[c, -s], [s, c]]
    }
}

/// Closed-form exponents of the blowup-rate bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents<T> {
    /// `1/(p-1) - (n-2)/4`.
    pub lower_exp: T,
    /// `2(5-p) / (5-p+(n-1)(p-1))`.
    pub upper_exp: T,
    /// `(n-1)(p-1) / (5-p+(n-1)(p-1))`.
    pub delta: T,
}

pub fn exponents<T: Real>(params: &ModelParams<T>) -> Result<Exponents<T>> {
    exponents_for(params.p, params.dim_n)
}

pub fn exponents_for<T: Real>(p: T, dim_n: usize) -> Result<Exponents<T>> {
    if !(p > T::one()) {
        return Err(Error::Domain(format!("p must exceed 1, got {p}")));
    }
    if dim_n == 2 && p == lit(5.0) {
        return Err(Error::Domain(
            "upper exponent is undefined at p = 5, n = 2".into(),
        ));
    }
    let n = lit::<T>(dim_n as f64);
    let one = T::one();
    let five = lit::<T>(5.0);
    let denom = five - p + (n - one) * (p - one);
    if denom == T::zero() {
        return Err(Error::Domain(format!(
            "upper exponent denominator vanishes at p = {p}, n = {dim_n}"
        )));
    }
    Ok(Exponents {
        lower_exp: one / (p - one) - (n - lit(2.0)) / lit(4.0),
        upper_exp: lit::<T>(2.0) * (five - p) / denom,
        delta: (n - one) * (p - one) / denom,
    })
}

/// `pot_coef (γ₁² x² + γ₂² y²)` on every node.
pub fn potential<T: Real>(params: &ModelParams<T>, grid: &GridSpec<T>) -> Vec<T> {
    let (b, g1, g2) = (params.pot_coef, params.gamma1, params.gamma2);
    grid.sample_real(|x, y| b * (g1 * g1 * x * x + g2 * g2 * y * y))
}

/// `L_A f = i A·∇f` from precomputed derivatives.
pub(crate) fn rotation_term_from_gradient<T: Real>(
    grid: &GridSpec<T>,
    rot: RotationMatrix<T>,
    dx: &[Complex<T>],
    dy: &[Complex<T>],
) -> Vec<Complex<T>> {
    let i_unit = Complex::new(T::zero(), T::one());
    (0..grid.len())
        .map(|idx| {
            let (x, y) = grid.node(idx);
            let (ax, ay) = rot.field_at(x, y);
            i_unit * (dx[idx].scale(ax) + dy[idx].scale(ay))
        })
        .collect()
}

/// `L_A f` with spectral derivatives; equals `-iΩ(y∂x - x∂y) f`.
pub fn apply_rotation_term<T: Real>(f: &Field<T>, params: &ModelParams<T>) -> Result<Field<T>> {
    f.check_finite()?;
    let rot = params.rotation();
    if rot.m21 == T::zero() {
        return Ok(Field::zeros(&f.grid));
    }
    let (dx, dy) = Spectral::new(&f.grid).gradient(f)?;
    let v = rotation_term_from_gradient(&f.grid, rot, &dx.values, &dy.values);
    Field::from_values(&f.grid, v)
}

/// `∫ |u|²`.
pub fn mass<T: Real>(f: &Field<T>) -> T {
    f.norm_sq()
}

/// `∫ ū L_A u` including its (discretization) imaginary part.
pub fn angular_momentum_complex<T: Real>(f: &Field<T>, params: &ModelParams<T>) -> Result<Complex<T>> {
    let la = apply_rotation_term(f, params)?;
    Ok(f.inner(&la))
}

/// `ℓ_A[u] = Re ∫ ū L_A u`.
pub fn angular_momentum<T: Real>(f: &Field<T>, params: &ModelParams<T>) -> Result<T> {
    Ok(angular_momentum_complex(f, params)?.re)
}

/// Generalized conserved energy
/// `∫ (kin_coef |∇u|² + V|u|² - 2λ/(p+1) |u|^{p+1}) + ℓ_A[u]`.
pub fn energy<T: Real>(f: &Field<T>, params: &ModelParams<T>) -> Result<T> {
    let mut ev = Evaluator::new(params, &f.grid);
    Ok(ev.observe(f)?.energy)
}

/// Energy split into its parts, plus the other per-step observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables<T> {
    pub mass: T,
    pub energy: T,
    pub ell_a: T,
    /// Imaginary part of `∫ ū L_A u`, discarded from `ell_a`.
    pub ell_a_imag: T,
    pub grad_norm_sq: T,
    pub potential_energy: T,
    /// `∫ |u|^{p+1}`.
    pub nonlinear_integral: T,
    pub sup_sq: T,
    pub tail_frac: T,
}

/// Cached potential, coordinates and FFT plans for repeated evaluation.
pub struct Evaluator<T: Real> {
    pub params: ModelParams<T>,
    pub grid: GridSpec<T>,
    pub potential: Vec<T>,
    pub spectral: Spectral<T>,
}

/// Intermediate arrays produced by [`Evaluator::observe_full`].
pub struct Derivatives<T> {
    pub coeffs: Vec<Complex<T>>,
    pub dx: Vec<Complex<T>>,
    pub dy: Vec<Complex<T>>,
}

impl<T: Real> Evaluator<T> {
    pub fn new(params: &ModelParams<T>, grid: &GridSpec<T>) -> Self {
        Self {
            params: params.clone(),
            grid: grid.clone(),
            potential: potential(params, grid),
            spectral: Spectral::new(grid),
        }
    }

    pub fn observe(&mut self, f: &Field<T>) -> Result<Observables<T>> {
        Ok(self.observe_full(f)?.0)
    }

    /// `|u|^{p-1}` from `|u|²`.
    #[inline]
    pub fn nonlinear_factor(&self, density: T) -> T {
        let half_pm1 = (self.params.p - T::one()) * lit(0.5);
        if half_pm1 == T::one() {
            density
        } else if density == T::zero() {
            T::zero()
        } else {
            density.powf(half_pm1)
        }
    }

    pub fn observe_full(&mut self, f: &Field<T>) -> Result<(Observables<T>, Derivatives<T>)> {
        if f.values.len() != self.grid.len() {
            return Err(Error::SizeMismatch {
                expected: self.grid.len(),
                got: f.values.len(),
            });
        }
        f.check_finite()?;
        let mut coeffs = f.values.clone();
        self.spectral.forward_in_place(&mut coeffs);
        let tail_frac = crate::spectral::tail_fraction(&self.grid, &coeffs);
        let (dx, dy) = self.spectral.gradient_from_coeffs(&coeffs);

        let h2 = self.grid.spacing() * self.grid.spacing();
        let density = || f.values.iter().map(|z| z.norm_sqr());
        let grad_norm_sq = h2 * neumaier_sum(dx.iter().zip(&dy).map(|(a, b)| a.norm_sqr() + b.norm_sqr()));
        let potential_energy = h2 * neumaier_sum(density().zip(&self.potential).map(|(d, v)| d * *v));
        let nonlinear_integral = h2 * neumaier_sum(density().map(|d| d * self.nonlinear_factor(d)));
        let ell = if self.params.omega_rot == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            let rot = self.params.rotation();
            let i_unit = Complex::new(T::zero(), T::one());
            let prod = |idx: usize| {
                let (x, y) = self.grid.node(idx);
                let (ax, ay) = rot.field_at(x, y);
                f.values[idx].conj() * (i_unit * (dx[idx].scale(ax) + dy[idx].scale(ay)))
            };
            let len = self.grid.len();
            Complex::new(
                h2 * neumaier_sum((0..len).map(|k| prod(k).re)),
                h2 * neumaier_sum((0..len).map(|k| prod(k).im)),
            )
        };
        let mass = h2 * neumaier_sum(density());
        let p = self.params.p;
        let energy = self.params.kin_coef * grad_norm_sq + potential_energy
            - lit::<T>(2.0) * self.params.lambda / (p + T::one()) * nonlinear_integral
            + ell.re;
        let obs = Observables {
            mass,
            energy,
            ell_a: ell.re,
            ell_a_imag: ell.im,
            grad_norm_sq,
            potential_energy,
            nonlinear_integral,
            sup_sq: f.sup_sq(),
            tail_frac,
        };
        Ok((obs, Derivatives { coeffs, dx, dy }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn gaussian(grid: &GridSpec<f64>) -> Field<f64> {
        Field::from_real_fn(grid, |x, y| (-(x * x + y * y) / 2.0).exp())
    }

    fn vortex(grid: &GridSpec<f64>) -> Field<f64> {
        Field::from_fn(grid, |x, y| Complex::new(x, y) * (-(x * x + y * y) / 2.0).exp())
    }

    #[test]
    fn potential_values() {
        let g = make_grid(2.0_f64, 8).unwrap();
        // node (i, j) = (6, 6) sits at (1, 1); (6, 4) at (1, 0); (4, 6) at (0, 1)
        assert_eq!((g.coord(6), g.coord(4)), (1.0, 0.0));
        let v = potential(&ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.0), &g);
        assert!((v[6 * 8 + 6] - 1.0).abs() < 1e-15);
        let v = potential(&ModelParams::unit(3.0, 1.0, 1.0, 0.0), &g);
        assert!((v[6 * 8 + 4] - 1.0).abs() < 1e-15);
        let v = potential(&ModelParams::half(3.0, 1.0, 1.0, 2.0, 0.0), &g);
        assert!((v[4 * 8 + 6] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn presets_validate() {
        ModelParams::unit(3.0, 1.0, 1.0, 0.5).validate().unwrap();
        ModelParams::half(4.0, 1.0, 1.0, 2.0, 0.5).validate().unwrap();
        let mut bad = ModelParams::half(4.0, 1.0, 1.0, 2.0, 0.5);
        bad.kin_coef = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = ModelParams::unit(3.0, 1.0, 1.0, 0.5);
        bad.gamma2 = 2.0;
        assert!(bad.validate().is_err());
        assert!(ModelParams::unit(1.0, 1.0, 1.0, 0.5).validate().is_err());
    }

    #[test]
    fn supercritical_window_flags() {
        let p = |p| ModelParams::half(p, 1.0, 1.0, 1.0, 0.0);
        assert!(p(4.0).in_supercritical_window());
        assert!(!p(3.0).in_supercritical_window());
        assert!(p(6.0).is_exploratory());
        let mut q = p(2.5);
        q.dim_n = 3;
        assert!(q.in_supercritical_window());
    }

    #[test]
    fn rotation_matrix_is_skew() {
        let r = RotationMatrix::new(0.7_f64);
        let m = r.matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m[i][j] + m[j][i], 0.0);
            }
        }
        assert_eq!(m[0][0] + m[1][1], 0.0);
    }

    #[test]
    fn rotation_term_on_radial_and_vortex() {
        let g = make_grid(6.0_f64, 256).unwrap();
        let params = ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.5);
        let u = gaussian(&g);
        let la = apply_rotation_term(&u, &params).unwrap();
        assert!(u.inner(&la).norm() <= 1e-10);

        let v = vortex(&g);
        let la = apply_rotation_term(&v, &params).unwrap();
        let ell = v.inner(&la);
        assert!((ell.re + 0.5 * PI).abs() <= 1e-8, "{ell}");
        assert!(ell.im.abs() <= 1e-10);
        // L_A f = -Ω f pointwise for this vortex, away from the periodic seam
        let target = v.scaled(Complex::new(-0.5, 0.0));
        for idx in 0..g.len() {
            let (x, y) = g.node(idx);
            if x.abs() <= 3.0 && y.abs() <= 3.0 {
                let e = (la.values[idx] - target.values[idx]).norm();
                assert!(e < 1e-8, "({x}, {y}): {e:e}");
            }
        }

        let still = ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.0);
        let la = apply_rotation_term(&v, &still).unwrap();
        assert!(la.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn conserved_functionals_on_gaussian() {
        let g = make_grid(6.0_f64, 256).unwrap();
        let u = gaussian(&g);
        assert!((mass(&u) - PI).abs() <= 1e-10);
        let linear = ModelParams::unit(3.0, 0.0, 1.0, 0.0);
        assert!((energy(&u, &linear).unwrap() - 2.0 * PI).abs() <= 1e-8);
        for omega in [0.0, 0.5, -1.3] {
            let p = ModelParams::unit(3.0, 1.0, 1.0, omega);
            assert!(angular_momentum(&u, &p).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn exponent_values() {
        let e = exponents_for(4.0_f64, 2).unwrap();
        assert!((e.lower_exp - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.upper_exp - 0.5).abs() < 1e-15);
        assert!((e.delta - 0.75).abs() < 1e-15);
        let e = exponents_for(3.0_f64, 3).unwrap();
        assert!((e.lower_exp - 0.25).abs() < 1e-15);
        assert!((e.upper_exp - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.delta - 2.0 / 3.0).abs() < 1e-15);
        let e = exponents_for(3.0_f64, 2).unwrap();
        assert!((e.lower_exp - 0.5).abs() < 1e-15);
        assert!(matches!(exponents_for(5.0_f64, 2), Err(Error::Domain(_))));
        assert!(exponents_for(1.0_f64, 2).is_err());
    }

    #[test]
    fn delta_is_monotone_on_lattice() {
        // n >= 3 where the window is bounded on both sides
        for n in 3..=7usize {
            let nf = n as f64;
            let lo = 1.0 + 4.0 / nf;
            let hi = 1.0 + 4.0 / (nf - 2.0);
            let cap = (nf - 1.0) / (2.0 * nf - 4.0);
            let ps: Vec<f64> = (0..40).map(|k| lo + (hi - lo) * k as f64 / 40.0).collect();
            let mut prev = None;
            for &p in &ps {
                let d = exponents_for(p, n).unwrap().delta;
                assert!(d >= 0.5 - 1e-15 && d < cap, "n={n} p={p} delta={d}");
                if p > lo {
                    assert!(d > 0.5);
                }
                if let Some(prev) = prev {
                    assert!(d > prev);
                }
                prev = Some(d);
                // increasing in n wherever p stays admissible for n + 1
                let n1 = nf + 1.0;
                if p >= 1.0 + 4.0 / n1 && p < 1.0 + 4.0 / (n1 - 2.0) {
                    assert!(exponents_for(p, n + 1).unwrap().delta > d);
                }
            }
        }
        let d = exponents_for(1.0_f64 + 4.0 / 3.0, 3).unwrap().delta;
        assert!((d - 0.5).abs() < 1e-14);
    }

    fn arb_smooth_field() -> impl Strategy<Value = Field<f64>> {
        (
            -1.0..1.0f64, -1.0..1.0f64, 0.6..1.5f64, -1.0..1.0f64, -1.0..1.0f64,
            -1.0..1.0f64, -1.0..1.0f64,
        )
            .prop_map(|(cx, cy, w, a, b, kx, ky)| {
                let g = make_grid(8.0, 64).unwrap();
                Field::from_fn(&g, |x, y| {
                    let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                    let env = (-r2 / (2.0 * w * w)).exp();
                    Complex::new(a + x, b * y) * Complex::from_polar(env, kx * x + ky * y)
                })
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rotation_term_is_symmetric(f in arb_smooth_field(), g in arb_smooth_field(), om in -1.0..1.0f64) {
            let params = ModelParams::half(3.0, 1.0, 1.0, 1.0, om);
            let lf = apply_rotation_term(&f, &params).unwrap();
            let lg = apply_rotation_term(&g, &params).unwrap();
            let lhs = g.inner(&lf);
            let rhs = f.inner(&lg).conj();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
            let ell = f.inner(&lf);
            prop_assert!(ell.im.abs() <= 1e-10 * (1.0 + ell.re.abs()));
        }

        #[test]
        fn angular_momentum_phase_invariant(f in arb_smooth_field(), theta in -3.0..3.0f64) {
            let params = ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.4);
            let a = angular_momentum(&f, &params).unwrap();
            let b = angular_momentum(&f.scaled(Complex::from_polar(1.0, theta)), &params).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn linear_energy_nonnegative(f in arb_smooth_field()) {
            let params = ModelParams::half(3.0, 0.0, 1.0, 2.0, 0.0);
            prop_assert!(energy(&f, &params).unwrap() >= 0.0);
        }

        #[test]
        fn upper_exponent_identity(p in 1.01..4.99f64, n in 2usize..6) {
            let e = exponents_for(p, n).unwrap();
            prop_assert!((e.upper_exp - 2.0 * (1.0 - e.delta)).abs() <= 1e-15 * 4.0);
        }
    }
}
