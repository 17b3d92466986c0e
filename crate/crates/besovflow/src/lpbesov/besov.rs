//! Lebesgue and homogeneous Besov norms on periodic fields, plus the
//! fractional derivative multiplier.

use super::dyadic::DyadicDecomposition;
use super::field::Field;
use crate::scalar::{lit, Real};
use crate::{Error, Result};

/// Frequency-band selection relative to the threshold `j0`: the low band is
/// `j <= j0`, the high band `j >= j0 - 1` (one-band overlap).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Full,
    Low,
    High,
}

/// A Besov-norm request: regularity `s`, Lebesgue exponent `p`, summation
/// exponent `r` (use `f64::INFINITY` for sup norms) and a band selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub band: Band,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64, band: Band) -> Result<Self> {
        if !(1.0..=f64::INFINITY).contains(&p) || p.is_nan() {
            return Err(Error::Config(format!(
                "Lebesgue exponent p = {p} outside [1, inf]"
            )));
        }
        if !(1.0..=f64::INFINITY).contains(&r) || r.is_nan() {
            return Err(Error::Config(format!(
                "summation exponent r = {r} outside [1, inf]"
            )));
        }
        Ok(BesovSpec { s, p, r, band })
    }

    /// Validates the exponent constraints of the hybrid framework:
    /// `2 <= p <= 4` and additionally `p <= 2d/(d-2)` for `d >= 3`.
    pub fn validate_hybrid(&self, dim: usize) -> Result<()> {
        validate_hybrid_p(self.p, dim)
    }
}

/// Checks `2 <= p <= min(4, 2d/(d-2))`.
pub fn validate_hybrid_p(p: f64, dim: usize) -> Result<()> {
    let mut p_max: f64 = 4.0;
    if dim >= 3 {
        p_max = p_max.min(2.0 * dim as f64 / (dim as f64 - 2.0));
    }
    if !(2.0..=f64::INFINITY).contains(&p) || p > p_max {
        return Err(Error::Config(format!(
            "Lebesgue exponent p = {p} outside the admissible range [2, {p_max}] in dimension {dim}"
        )));
    }
    Ok(())
}

/// Grid quadrature of the `L^p` norm; `p = inf` returns the max modulus.
pub fn lp_norm<T: Real>(f: &Field<T>, p: f64) -> T {
    lp_norm_vec(&[f], p)
}

/// `L^p` norm of a vector field given by its components (pointwise Euclidean
/// magnitude).
pub fn lp_norm_vec<T: Real>(components: &[&Field<T>], p: f64) -> T {
    assert!(!components.is_empty());
    let grid = components[0].grid();
    let n = grid.len();
    let mag2 = |i: usize| -> T {
        components
            .iter()
            .map(|f| {
                let v = f.values()[i];
                v * v
            })
            .sum::<T>()
    };
    if p.is_infinite() {
        let mut max = T::zero();
        for i in 0..n {
            max = max.max(mag2(i));
        }
        return max.sqrt();
    }
    let dv = lit::<T>(grid.cell_volume());
    let half_p = lit::<T>(p / 2.0);
    let mut acc = T::zero();
    for i in 0..n {
        acc += mag2(i).powf(half_p);
    }
    (acc * dv).powf(T::one() / lit::<T>(p))
}

/// Homogeneous Besov norm of a scalar field over the requested band.
///
/// Returns 0 (with a logged warning) when the band is empty on this grid.
pub fn besov_norm<T: Real>(f: &Field<T>, spec: &BesovSpec, dec: &DyadicDecomposition) -> T {
    besov_norm_vec(&[f], spec, dec)
}

/// Besov norm of a vector field: at each dyadic block the `L^p` norm of the
/// pointwise magnitude of the blocked components.
pub fn besov_norm_vec<T: Real>(
    components: &[&Field<T>],
    spec: &BesovSpec,
    dec: &DyadicDecomposition,
) -> T {
    let (low, high) = match spec.band {
        Band::Full => (false, false),
        Band::Low => (true, false),
        Band::High => (false, true),
    };
    let range = match dec.band_range(low, high) {
        Some(r) => r,
        None => {
            log::warn!(
                "besov_norm: empty {:?} band on this grid, returning 0",
                spec.band
            );
            return T::zero();
        }
    };
    let mut acc = T::zero();
    let mut max = T::zero();
    for j in range.0..=range.1 {
        let blocks: Vec<Field<T>> = components.iter().map(|f| dec.block(f, j)).collect();
        let refs: Vec<&Field<T>> = blocks.iter().collect();
        let a = lit::<T>((j as f64 * spec.s).exp2()) * lp_norm_vec(&refs, spec.p);
        if spec.r.is_infinite() {
            max = max.max(a);
        } else {
            acc += a.powf(lit::<T>(spec.r));
        }
    }
    if spec.r.is_infinite() {
        max
    } else {
        acc.powf(T::one() / lit::<T>(spec.r))
    }
}

/// Fractional derivative `Lambda^sigma`: spectrum multiplied by `|xi|^sigma`
/// with the zero mode annihilated. A nonzero mean with negative `sigma` is
/// projected out (warned, not an error).
pub fn frac_deriv<T: Real>(f: &Field<T>, sigma: f64) -> Field<T> {
    if sigma < 0.0 {
        let mean = f.mean().to_f64();
        if mean.abs() > 1e-12 * (1.0 + f.max_abs().to_f64()) {
            log::warn!(
                "frac_deriv: sigma = {sigma} < 0 with nonzero mean {mean}; projecting the mean out"
            );
        }
    }
    f.apply_radial_multiplier(|r| if r == 0.0 { 0.0 } else { r.powf(sigma) })
}
