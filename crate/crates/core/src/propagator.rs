//! Exact linear propagators: the rotating harmonic-oscillator kernel
//! (dense quadrature, oracle use only) and the rotation group acting on
//! fields.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{ModelParams, RotationMatrix};
use crate::scalar::{lit, Real};
use crate::spectral::{Axis, Field, Spectral};

/// Largest `points_per_axis` accepted by [`mehler_apply`].
pub const DEFAULT_MEHLER_CAP: usize = 128;

/// Smallest admissible `|sin(2γt)|`.
pub const SINGULAR_GUARD: f64 = 1e-6;

/// Parameters of the exact kernel for `-Δ + γ²|x|² + L_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams<T> {
    pub gamma: T,
    pub t: T,
    pub rotation: RotationMatrix<T>,
}

impl<T: Real> KernelParams<T> {
    pub fn new(gamma: T, t: T, rotation: RotationMatrix<T>) -> Self {
        Self { gamma, t, rotation }
    }

    /// Kernel parameters matching an isotropic `unit` model.
    pub fn from_model(params: &ModelParams<T>, t: T) -> Result<Self> {
        if !params.is_isotropic() {
            return Err(Error::Config("exact kernel needs an isotropic trap".into()));
        }
        if params.kin_coef != T::one() || params.pot_coef != T::one() {
            return Err(Error::Config(
                "exact kernel is stated for kin_coef = pot_coef = 1".into(),
            ));
        }
        Ok(Self::new(params.gamma1, t, params.rotation()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        let s = (lit::<T>(2.0) * self.gamma * self.t).sin().abs();
        if !s.is_finite() || s < lit(SINGULAR_GUARD) {
            return Err(Error::SingularTime {
                t: self.t.as_f64(),
                sin_abs: s.as_f64(),
            });
        }
        Ok(())
    }
}

/// `U(t) f` by dense quadrature with the default size cap.
pub fn mehler_apply<T: Real>(f: &Field<T>, kp: &KernelParams<T>) -> Result<Field<T>> {
    mehler_apply_capped(f, kp, DEFAULT_MEHLER_CAP)
}

/// `U(t) f(x) = spacing² Σ_y K(t; x, y) f(y)` with
/// `K = γ/(2πi sin 2γt) · e^{i(γ/2)(|x|²+|y|²) cot 2γt} · e^{-iγ (e^{tM}x)·y / sin 2γt}`.
pub fn mehler_apply_capped<T: Real>(
    f: &Field<T>,
    kp: &KernelParams<T>,
    max_points: usize,
) -> Result<Field<T>> {
    kp.validate()?;
    f.check_finite()?;
    let grid = &f.grid;
    let n = grid.points_per_axis();
    if n > max_points {
        return Err(Error::Resource(format!(
            "dense kernel quadrature is O(N^4); N = {n} exceeds the cap {max_points}"
        )));
    }
    let two_gt = lit::<T>(2.0) * kp.gamma * kp.t;
    let (s2, c2) = two_gt.sin_cos();
    let half_cot = kp.gamma * lit::<T>(0.5) * c2 / s2;
    let cross = kp.gamma / s2;
    let h2 = grid.spacing() * grid.spacing();
    // γ / (2πi sin 2γt) · h², with 1/i = -i
    let prefactor = Complex::new(T::zero(), -(kp.gamma * h2) / (T::TAU() * s2));

    let coords = grid.coords();
    let chirp: Vec<Complex<T>> = coords
        .iter()
        .map(|&c| Complex::from_polar(T::one(), half_cot * c * c))
        .collect();
    // g(y) = e^{i(γ/2)|y|² cot} f(y)
    let g: Vec<Complex<T>> = (0..grid.len())
        .map(|idx| f.values[idx] * chirp[idx / n] * chirp[idx % n])
        .collect();

    let rot = kp.rotation.exp(kp.t);
    let mut out = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    let mut e1 = vec![Complex::new(T::zero(), T::zero()); n];
    let mut e2 = vec![Complex::new(T::zero(), T::zero()); n];
    for i in 0..n {
        for j in 0..n {
            let (x1, x2) = (coords[i], coords[j]);
            let rx1 = rot[0][0] * x1 + rot[0][1] * x2;
            let rx2 = rot[1][0] * x1 + rot[1][1] * x2;
            for k in 0..n {
                e1[k] = Complex::from_polar(T::one(), -cross * rx1 * coords[k]);
                e2[k] = Complex::from_polar(T::one(), -cross * rx2 * coords[k]);
            }
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in 0..n {
                let row = &g[a * n..(a + 1) * n];
                let mut inner = Complex::new(T::zero(), T::zero());
                for (gv, ev) in row.iter().zip(&e2) {
                    inner = inner + *gv * *ev;
                }
                acc = acc + inner * e1[a];
            }
            out[i * n + j] = prefactor * chirp[i] * chirp[j] * acc;
        }
    }
    Field::from_values(grid, out)
}

/// `e^{-itL_A} f(x) = f(e^{tM} x)`.
///
/// Quarter turns are exact grid permutations; the remaining angle in
/// `[-π/4, π/4]` uses three Fourier shears.
pub fn rotate_field<T: Real>(f: &Field<T>, t: T, params: &ModelParams<T>) -> Result<Field<T>> {
    rotate_by_angle(f, params.omega_rot * t)
}

/// `f(R_θ x)` for the counterclockwise rotation `R_θ`.
pub fn rotate_by_angle<T: Real>(f: &Field<T>, theta: T) -> Result<Field<T>> {
    f.check_finite()?;
    if !theta.is_finite() {
        return Err(Error::Config(format!("rotation angle must be finite, got {theta}")));
    }
    let half_pi = T::FRAC_PI_2();
    let quarters = (theta / half_pi).round();
    let rest = theta - quarters * half_pi;
    let q = quarters.to_i64().unwrap_or(0).rem_euclid(4) as usize;

    let grid = &f.grid;
    let n = grid.points_per_axis();
    let mut data = f.values.clone();
    for _ in 0..q {
        // g(x, y) = f(-y, x)
        let src = data.clone();
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = src[((n - j) % n) * n + i];
            }
        }
    }
    if rest != T::zero() {
        let a = -(rest * lit(0.5)).tan();
        let b = rest.sin();
        let mut spec = Spectral::new(grid);
        let kx = grid.odd_wavenumbers();
        let coords = grid.coords();
        let shear = |amount: T| -> Vec<Complex<T>> {
            let mut table = Vec::with_capacity(n * n);
            for &c in &coords {
                for &k in &kx {
                    table.push(Complex::from_polar(T::one(), k * amount * c));
                }
            }
            table
        };
        // (Sx h)(x, y) = h(x + a y, y), (Sy h)(x, y) = h(x, y + b x)
        let sx = shear(a);
        let sy = shear(b);
        spec.multiply_along(&mut data, Axis::X, &sx);
        spec.multiply_along(&mut data, Axis::Y, &sy);
        spec.multiply_along(&mut data, Axis::X, &sx);
    }
    Field::from_values(grid, data)
}
