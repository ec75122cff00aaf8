//! Periodic square grid, 2-D DFTs, spectral derivatives and quadrature.
//!
//! Fields are stored row-major with the x index as the row: the sample at
//! node `(x_i, y_j)` lives at `i * n + j`. Transforms along y therefore act
//! on contiguous rows; transforms along x go through an in-place transpose.
//!
//! Normalization: the forward transform carries no scale factor and the
//! inverse carries `1 / n²`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Minimum supported points per axis.
pub const MIN_POINTS: usize = 8;

/// Uniform periodic grid on `[-half_width, half_width)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    half_width: T,
    points_per_axis: usize,
    spacing: T,
    wavenumbers: Vec<T>,
}

/// Builds a grid; `points_per_axis` must be even and at least [`MIN_POINTS`].
pub fn make_grid<T: Real>(half_width: T, points_per_axis: usize) -> Result<GridSpec<T>> {
    GridSpec::new(half_width, points_per_axis)
}

impl<T: Real> GridSpec<T> {
    pub fn new(half_width: T, points_per_axis: usize) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Config(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if points_per_axis < MIN_POINTS || points_per_axis % 2 != 0 {
            return Err(Error::Config(format!(
                "points_per_axis must be even and >= {MIN_POINTS}, got {points_per_axis}"
            )));
        }
        let n = points_per_axis;
        let spacing = lit::<T>(2.0) * half_width / from_usize(n);
        let k0 = T::PI() / half_width;
        let wavenumbers = (0..n)
            .map(|m| {
                let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                k0 * lit(signed)
            })
            .collect();
        Ok(Self {
            half_width,
            points_per_axis,
            spacing,
            wavenumbers,
        })
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Total number of nodes, `points_per_axis²`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points_per_axis * self.points_per_axis
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `pi / half_width`.
    #[inline]
    pub fn fundamental_wavenumber(&self) -> T {
        T::PI() / self.half_width
    }

    /// Wavenumbers per axis in standard DFT ordering.
    #[inline]
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    /// Wavenumbers used for odd-order derivatives: the Nyquist entry is zeroed
    /// so that real fields stay real.
    pub fn odd_wavenumbers(&self) -> Vec<T> {
        let mut k = self.wavenumbers.clone();
        k[self.points_per_axis / 2] = T::zero();
        k
    }

    /// Largest representable |k| along one axis.
    #[inline]
    pub fn nyquist(&self) -> T {
        self.fundamental_wavenumber() * from_usize(self.points_per_axis / 2)
    }

    /// Node coordinate `-half_width + i * spacing`.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + self.spacing * from_usize(i)
    }

    /// All node coordinates along one axis.
    pub fn coords(&self) -> Vec<T> {
        (0..self.points_per_axis).map(|i| self.coord(i)).collect()
    }

    /// Node at flat index `idx`.
    #[inline]
    pub fn node(&self, idx: usize) -> (T, T) {
        let n = self.points_per_axis;
        (self.coord(idx / n), self.coord(idx % n))
    }

    /// Real samples of `f(x, y)` on every node.
    pub fn sample_real(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        let xs = self.coords();
        let mut out = Vec::with_capacity(self.len());
        for &x in &xs {
            for &y in &xs {
                out.push(f(x, y));
            }
        }
        out
    }
}

/// Complex samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub grid: GridSpec<T>,
    pub values: Vec<Complex<T>>,
    /// Set by the integrator when a step produced non-finite values.
    pub diverged: bool,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.len()],
            grid: grid.clone(),
            diverged: false,
        }
    }

    pub fn from_values(grid: &GridSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            diverged: false,
        })
    }

    /// Samples `f(x, y)` on every node.
    pub fn from_fn(grid: &GridSpec<T>, f: impl Fn(T, T) -> Complex<T>) -> Self {
        let xs = grid.coords();
        let mut values = Vec::with_capacity(grid.len());
        for &x in &xs {
            for &y in &xs {
                values.push(f(x, y));
            }
        }
        Self {
            grid: grid.clone(),
            values,
            diverged: false,
        }
    }

    /// Samples a real function as a complex field.
    pub fn from_real_fn(grid: &GridSpec<T>, f: impl Fn(T, T) -> T) -> Self {
        Self::from_fn(grid, |x, y| Complex::new(f(x, y), T::zero()))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.points_per_axis()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.n() + j]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Errors with [`Error::NonFinite`] when any sample is NaN or infinite.
    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.values.len() != other.values.len() || self.grid != other.grid {
            return Err(Error::SizeMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|z| *z = *z * c);
        out
    }

    pub fn density(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `max |u|²` over the nodes.
    pub fn sup_sq(&self) -> T {
        self.values
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// `∫ |u|²` by the rectangle rule.
    pub fn norm_sq(&self) -> T {
        integrate(&self.grid, &self.density())
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// `∫ conj(self) · other`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let prod: Vec<Complex<T>> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .collect();
        integrate_complex(&self.grid, &prod)
    }

    /// Relative 2-norm distance `‖self - other‖ / ‖other‖`.
    pub fn rel_distance(&self, other: &Self) -> T {
        let diff: Vec<T> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .collect();
        let num = integrate(&self.grid, &diff).sqrt();
        num / other.norm()
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }
}

/// DFT coefficients of a [`Field`], indexed like the field by `(kx_i, ky_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    pub grid: GridSpec<T>,
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    /// `∑ |F_k|²`.
    pub fn energy(&self) -> T {
        neumaier_sum(self.coeffs.iter().map(|z| z.norm_sqr()))
    }

    /// Fraction of spectral mass with `max(|kx|, |ky|) > nyquist / 2`.
    pub fn tail_fraction(&self) -> T {
        tail_fraction(&self.grid, &self.coeffs)
    }
}

pub(crate) fn tail_fraction<T: Real>(grid: &GridSpec<T>, coeffs: &[Complex<T>]) -> T {
    let n = grid.points_per_axis();
    let cut = grid.nyquist() * lit(0.5);
    let k = grid.wavenumbers();
    let total = neumaier_sum(coeffs.iter().map(|z| z.norm_sqr()));
    let tail = neumaier_sum(
        coeffs
            .iter()
            .enumerate()
            .filter(|(idx, _)| k[idx / n].abs() > cut || k[idx % n].abs() > cut)
            .map(|(_, z)| z.norm_sqr()),
    );
    if total > T::zero() {
        tail / total
    } else {
        T::zero()
    }
}

/// Transform direction along one grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Reusable FFT plans and scratch space for one grid size.
pub struct Spectral<T: Real> {
    grid: GridSpec<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    odd_k: Vec<T>,
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: &GridSpec<T>) -> Self {
        let n = grid.points_per_axis();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            grid: grid.clone(),
            fwd,
            inv,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            odd_k: grid.odd_wavenumbers(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::SizeMismatch {
                expected: self.grid.len(),
                got: len,
            });
        }
        Ok(())
    }

    fn transpose(&self, data: &mut [Complex<T>]) {
        const TILE: usize = 16;
        let n = self.grid.points_per_axis();
        for bi in (0..n).step_by(TILE) {
            for bj in (bi..n).step_by(TILE) {
                for i in bi..(bi + TILE).min(n) {
                    let j0 = if bi == bj { i + 1 } else { bj };
                    for j in j0..(bj + TILE).min(n) {
                        data.swap(i * n + j, j * n + i);
                    }
                }
            }
        }
    }

    fn rows(&mut self, data: &mut [Complex<T>], forward: bool) {
        let plan = if forward { &self.fwd } else { &self.inv };
        plan.process_with_scratch(data, &mut self.scratch);
    }

    /// Unscaled 1-D transform along `axis` in place.
    pub fn transform_axis(&mut self, data: &mut [Complex<T>], axis: Axis, forward: bool) {
        match axis {
            Axis::Y => self.rows(data, forward),
            Axis::X => {
                self.transpose(data);
                self.rows(data, forward);
                self.transpose(data);
            }
        }
    }

    /// Forward 2-D DFT in place, no scale factor.
    pub fn forward_in_place(&mut self, data: &mut [Complex<T>]) {
        self.rows(data, true);
        self.transpose(data);
        self.rows(data, true);
        self.transpose(data);
    }

    /// Inverse 2-D DFT in place, scaled by `1 / n²`.
    pub fn inverse_in_place(&mut self, data: &mut [Complex<T>]) {
        self.rows(data, false);
        self.transpose(data);
        self.rows(data, false);
        self.transpose(data);
        let s = T::one() / from_usize(self.grid.len());
        data.iter_mut().for_each(|z| *z = z.scale(s));
    }

    /// Transforms along `axis`, multiplies by `table`, and transforms back.
    ///
    /// `table` is laid out in the transformed ordering: for `Axis::Y` entry
    /// `i * n + j` pairs `x_i` with `ky_j`; for `Axis::X` entry `j * n + i`
    /// pairs `y_j` with `kx_i`.
    pub fn multiply_along(&mut self, data: &mut [Complex<T>], axis: Axis, table: &[Complex<T>]) {
        debug_assert_eq!(table.len(), data.len());
        let n = self.grid.points_per_axis();
        let s = T::one() / from_usize(n);
        if axis == Axis::X {
            self.transpose(data);
        }
        self.rows(data, true);
        data.iter_mut()
            .zip(table)
            .for_each(|(z, m)| *z = (*z * m).scale(s));
        self.rows(data, false);
        if axis == Axis::X {
            self.transpose(data);
        }
    }

    pub fn forward(&mut self, f: &Field<T>) -> Result<SpectralField<T>> {
        self.check_len(f.values.len())?;
        let mut coeffs = f.values.clone();
        self.forward_in_place(&mut coeffs);
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    pub fn inverse(&mut self, s: &SpectralField<T>) -> Result<Field<T>> {
        self.check_len(s.coeffs.len())?;
        let mut values = s.coeffs.clone();
        self.inverse_in_place(&mut values);
        Field::from_values(&self.grid, values)
    }

    /// `(∂x f, ∂y f)` from precomputed coefficients.
    pub fn gradient_from_coeffs(&mut self, coeffs: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let n = self.grid.points_per_axis();
        let mut dx = coeffs.to_vec();
        let mut dy = coeffs.to_vec();
        for i in 0..n {
            let kx = self.odd_k[i];
            for j in 0..n {
                let ky = self.odd_k[j];
                let idx = i * n + j;
                dx[idx] = Complex::new(-coeffs[idx].im * kx, coeffs[idx].re * kx);
                dy[idx] = Complex::new(-coeffs[idx].im * ky, coeffs[idx].re * ky);
            }
        }
        self.inverse_in_place(&mut dx);
        self.inverse_in_place(&mut dy);
        (dx, dy)
    }

    /// `Δ f` from precomputed coefficients.
    pub fn laplacian_from_coeffs(&mut self, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.grid.points_per_axis();
        let k = self.grid.wavenumbers().to_vec();
        let mut out = coeffs.to_vec();
        for i in 0..n {
            for j in 0..n {
                let k2 = k[i] * k[i] + k[j] * k[j];
                out[i * n + j] = out[i * n + j].scale(-k2);
            }
        }
        self.inverse_in_place(&mut out);
        out
    }

    pub fn gradient(&mut self, f: &Field<T>) -> Result<(Field<T>, Field<T>)> {
        f.check_finite()?;
        let s = self.forward(f)?;
        let (dx, dy) = self.gradient_from_coeffs(&s.coeffs);
        Ok((Field::from_values(&self.grid, dx)?, Field::from_values(&self.grid, dy)?))
    }

    pub fn laplacian(&mut self, f: &Field<T>) -> Result<Field<T>> {
        f.check_finite()?;
        let s = self.forward(f)?;
        let lap = self.laplacian_from_coeffs(&s.coeffs);
        Field::from_values(&self.grid, lap)
    }
}

pub fn transform_forward<T: Real>(f: &Field<T>) -> Result<SpectralField<T>> {
    Spectral::new(&f.grid).forward(f)
}

pub fn transform_inverse<T: Real>(s: &SpectralField<T>) -> Result<Field<T>> {
    Spectral::new(&s.grid).inverse(s)
}

/// `(∂x f, ∂y f)`, exact for band-limited fields.
pub fn spectral_gradient<T: Real>(f: &Field<T>) -> Result<(Field<T>, Field<T>)> {
    Spectral::new(&f.grid).gradient(f)
}

pub fn spectral_laplacian<T: Real>(f: &Field<T>) -> Result<Field<T>> {
    Spectral::new(&f.grid).laplacian(f)
}

/// Compensated sum in a fixed order.
pub fn neumaier_sum<T: Real>(values: impl Iterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Rectangle rule `spacing² · ∑ f`.
pub fn integrate<T: Real>(grid: &GridSpec<T>, samples: &[T]) -> T {
    let h = grid.spacing();
    h * h * neumaier_sum(samples.iter().copied())
}

/// Complex variant of [`integrate`].
pub fn integrate_complex<T: Real>(grid: &GridSpec<T>, samples: &[Complex<T>]) -> Complex<T> {
    let h2 = grid.spacing() * grid.spacing();
    let re = neumaier_sum(samples.iter().map(|z| z.re));
    let im = neumaier_sum(samples.iter().map(|z| z.im));
    Complex::new(re * h2, im * h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(3.0_f64, 8).unwrap();
        assert_eq!(g.spacing(), 0.75);
        assert_relative_eq!(g.fundamental_wavenumber(), std::f64::consts::PI / 3.0);
        assert_eq!(g.coord(0), -3.0);
        assert_eq!(g.wavenumbers().len(), 8);
        assert_relative_eq!(g.spacing() * 8.0, 2.0 * g.half_width());
        for (m, k) in g.wavenumbers().iter().enumerate() {
            let ratio = k / g.fundamental_wavenumber();
            assert!((ratio - ratio.round()).abs() < 1e-12, "mode {m}");
        }

        let g = make_grid(1.0_f64, 128).unwrap();
        assert_eq!(g.spacing(), 1.0 / 64.0);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(matches!(make_grid(3.0_f64, 7), Err(Error::Config(_))));
        assert!(matches!(make_grid(3.0_f64, 6), Err(Error::Config(_))));
        assert!(matches!(make_grid(-1.0_f64, 16), Err(Error::Config(_))));
    }

    #[test]
    fn constant_field_spectrum() {
        let g = make_grid(3.0_f64, 16).unwrap();
        let f = Field::from_fn(&g, |_, _| c(1.0, 0.0));
        let s = transform_forward(&f).unwrap();
        assert_relative_eq!(s.coeffs[0].re, 256.0, epsilon = 1e-12);
        let rest: f64 = s.coeffs[1..].iter().map(|z| z.norm()).sum();
        assert!(rest < 1e-10);
    }

    #[test]
    fn plane_wave_single_mode() {
        let g = make_grid(3.0_f64, 16).unwrap();
        let k0 = std::f64::consts::PI / 3.0;
        let f = Field::from_fn(&g, |x, _| Complex::from_polar(1.0, k0 * x));
        let s = transform_forward(&f).unwrap();
        // mode (kx = k0, ky = 0) is index (1, 0)
        let peak = s.coeffs[16].norm();
        assert_relative_eq!(peak, 256.0, epsilon = 1e-10);
        let others: f64 = s
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 16)
            .map(|(_, z)| z.norm())
            .sum();
        assert!(others < 1e-9, "leakage {others}");
    }

    #[test]
    fn derivative_of_plane_wave() {
        let g = make_grid(3.0_f64, 32).unwrap();
        let k0 = std::f64::consts::PI / 3.0;
        let f = Field::from_fn(&g, |x, _| Complex::from_polar(1.0, k0 * x));
        let (dx, dy) = spectral_gradient(&f).unwrap();
        let expect = f.scaled(c(0.0, k0));
        assert!(dx.max_abs_diff(&expect) < 1e-12);
        assert!(dy.values.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = make_grid(3.0_f64, 16).unwrap();
        let f = Field::from_fn(&g, |_, _| c(2.0, -1.0));
        let (dx, dy) = spectral_gradient(&f).unwrap();
        assert!(dx.values.iter().chain(&dy.values).all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn gaussian_laplacian() {
        let g = make_grid(6.0_f64, 256).unwrap();
        let f = Field::from_real_fn(&g, |x, y| (-(x * x + y * y) / 2.0).exp());
        let lap = spectral_laplacian(&f).unwrap();
        let exact = Field::from_real_fn(&g, |x, y| {
            let r2 = x * x + y * y;
            (r2 - 2.0) * (-r2 / 2.0).exp()
        });
        // the periodic seam at |x| = 6 carries a kink of size e^{-18}
        let mut interior = 0.0_f64;
        for i in 0..256 {
            for j in 0..256 {
                if g.coord(i).abs() <= 4.0 && g.coord(j).abs() <= 4.0 {
                    interior = interior.max((lap.at(i, j) - exact.at(i, j)).norm());
                }
            }
        }
        assert!(interior <= 1e-8, "laplacian error {interior:e}");

        let g = make_grid(7.0_f64, 256).unwrap();
        let f = Field::from_real_fn(&g, |x, y| (-(x * x + y * y) / 2.0).exp());
        let lap = spectral_laplacian(&f).unwrap();
        let exact = Field::from_real_fn(&g, |x, y| {
            let r2 = x * x + y * y;
            (r2 - 2.0) * (-r2 / 2.0).exp()
        });
        let err = lap.max_abs_diff(&exact);
        assert!(err <= 1e-8, "laplacian error {err:e}");
    }

    #[test]
    fn gaussian_integrals() {
        let g = make_grid(6.0_f64, 256).unwrap();
        let pi = std::f64::consts::PI;
        let s = g.sample_real(|x, y| (-(x * x + y * y)).exp());
        assert!((integrate(&g, &s) - pi).abs() <= 1e-10);
        let s = g.sample_real(|x, y| {
            let r2 = x * x + y * y;
            (-r2 / 2.0).exp() * r2 * (-r2 / 2.0).exp()
        });
        assert!((integrate(&g, &s) - pi).abs() <= 1e-10);
        assert_eq!(integrate(&g, &vec![0.0; g.len()]), 0.0);
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let g8 = make_grid(3.0_f64, 8).unwrap();
        let g16 = make_grid(3.0_f64, 16).unwrap();
        assert!(Field::from_values(&g8, vec![c(0.0, 0.0); 10]).is_err());
        let f = Field::zeros(&g16);
        assert!(matches!(
            Spectral::new(&g8).forward(&f),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn single_precision_round_trip() {
        let g = make_grid(3.0_f32, 32).unwrap();
        let f = Field::from_fn(&g, |x, y| Complex::new((-(x * x + y * y)).exp(), 0.3 * x));
        let back = transform_inverse(&transform_forward(&f).unwrap()).unwrap();
        assert!(back.rel_distance(&f) < 1e-5);
    }

    fn arb_field() -> impl Strategy<Value = Field<f64>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16 * 16).prop_map(|v| {
            let g = make_grid(2.0, 16).unwrap();
            Field::from_values(&g, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip_identity(f in arb_field()) {
            let back = transform_inverse(&transform_forward(&f).unwrap()).unwrap();
            prop_assert!(back.rel_distance(&f) <= 1e-12);
        }

        #[test]
        fn parseval(f in arb_field()) {
            let s = transform_forward(&f).unwrap();
            let h = f.grid.spacing();
            let spectral = h * h * s.energy() / (f.grid.len() as f64);
            let physical = f.norm_sq();
            prop_assert!((spectral - physical).abs() <= 1e-12 * physical);
        }

        #[test]
        fn integrate_is_linear_and_conjugation_compatible(
            f in arb_field(), g in arb_field(), a in -2.0..2.0f64
        ) {
            let grid = f.grid.clone();
            let sum: Vec<_> = f.values.iter().zip(&g.values).map(|(x, y)| x.scale(a) + y).collect();
            let lhs = integrate_complex(&grid, &sum);
            let rhs = integrate_complex(&grid, &f.values).scale(a) + integrate_complex(&grid, &g.values);
            prop_assert!((lhs - rhs).norm() <= 1e-12);
            let conj: Vec<_> = f.values.iter().map(|z| z.conj()).collect();
            let lhs = integrate_complex(&grid, &conj);
            prop_assert!((lhs - integrate_complex(&grid, &f.values).conj()).norm() <= 1e-15);
        }

        #[test]
        fn pure_modes_differentiate_exactly(mx in -7i32..8, my in -7i32..8) {
            let g = make_grid(2.0_f64, 16).unwrap();
            let k0 = g.fundamental_wavenumber();
            let (kx, ky) = (k0 * mx as f64, k0 * my as f64);
            let f = Field::from_fn(&g, |x, y| Complex::from_polar(1.0, kx * x + ky * y));
            let (dx, dy) = spectral_gradient(&f).unwrap();
            prop_assert!(dx.max_abs_diff(&f.scaled(c(0.0, kx))) <= 1e-12 * (1.0 + kx.abs()));
            prop_assert!(dy.max_abs_diff(&f.scaled(c(0.0, ky))) <= 1e-12 * (1.0 + ky.abs()));
        }
    }
}
