//! Exterior radial Gagliardo–Nirenberg ratio.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spectral::{integrate, Field, Spectral};

/// Relative asymmetry above which a field is rejected as non-radial.
pub const RADIAL_TOL: f64 = 1e-8;

/// Largest deviation of `u` from its images under the grid's symmetry
/// group (reflections `x ↦ -x` and the swap `x ↔ y`), relative to `max|u|`.
pub fn radial_asymmetry<T: Real>(u: &Field<T>) -> T {
    let n = u.n();
    let scale = u.values.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if scale == T::zero() {
        return T::zero();
    }
    let mut worst = T::zero();
    for i in 0..n {
        let mi = (n - i) % n;
        for j in 0..n {
            let v = u.at(i, j);
            worst = worst
                .max((v - u.at(mi, j)).norm())
                .max((v - u.at(j, i)).norm());
        }
    }
    worst / scale
}

/// `sup_{|x| ≥ R} |u| · R^{1/2} / (‖∇u‖₂^{1/2} ‖u‖₂^{1/2})` in two dimensions.
pub fn gn_exterior_ratio<T: Real>(u: &Field<T>, radius: T) -> Result<T> {
    u.check_finite()?;
    let hw = u.grid.half_width();
    if !(radius > T::zero() && radius < hw * lit(0.5)) {
        return Err(Error::Domain(format!(
            "R must lie in (0, half_width/2) = (0, {}), got {radius}",
            hw * lit(0.5)
        )));
    }
    let asym = radial_asymmetry(u);
    if asym > lit(RADIAL_TOL) {
        return Err(Error::NonRadial {
            asymmetry: asym.as_f64(),
        });
    }
    let mut sup = T::zero();
    for idx in 0..u.grid.len() {
        let (x, y) = u.grid.node(idx);
        if (x * x + y * y).sqrt() >= radius {
            sup = sup.max(u.values[idx].norm());
        }
    }
    let (dx, dy) = Spectral::new(&u.grid).gradient(u)?;
    let g: Vec<T> = dx
        .values
        .iter()
        .zip(&dy.values)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    let grad = integrate(&u.grid, &g).sqrt();
    let l2 = u.norm();
    let denom = (grad * l2).sqrt();
    if !(denom > T::zero()) {
        return Err(Error::Domain("ratio undefined for a field with zero norm or gradient".into()));
    }
    Ok(sup * radius.sqrt() / denom)
}
