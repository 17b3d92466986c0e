//! Periodic grids and scalar fields with lazily cached spectra.

use std::sync::OnceLock;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::{lit, Real};
use crate::{Error, Result};

/// Uniform periodic grid in `d` dimensions with the same resolution and
/// period along every axis. Resolvable wavenumbers are `2*pi*k/L` with
/// `|k| <= n_per_dim / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub n_per_dim: usize,
    pub box_len: f64,
}

impl Grid {
    pub fn new(dim: usize, n_per_dim: usize, box_len: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!(
                "grid dim must be 1, 2 or 3, got {dim}"
            )));
        }
        if n_per_dim < 8 || !n_per_dim.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_per_dim must be a power of two >= 8, got {n_per_dim}"
            )));
        }
        if !(box_len > 0.0) {
            return Err(Error::Config(format!(
                "box_len must be positive, got {box_len}"
            )));
        }
        Ok(Grid {
            dim,
            n_per_dim,
            box_len,
        })
    }

    pub fn len(&self) -> usize {
        self.n_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n_per_dim; self.dim]
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.n_per_dim as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(self.dim as i32)
    }

    /// Smallest nonzero wavenumber magnitude.
    pub fn xi_min(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len
    }

    /// Largest resolvable wavenumber magnitude (corner of the spectral box).
    pub fn xi_max(&self) -> f64 {
        self.xi_min() * (self.n_per_dim as f64 / 2.0) * (self.dim as f64).sqrt()
    }

    /// Multi-index of a flattened (row-major) linear index.
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let n = self.n_per_dim;
        match self.dim {
            1 => [flat, 0, 0],
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    /// Physical coordinates of a grid point.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Signed integer wavenumbers of a flattened spectral index.
    pub fn k_signed(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let n = self.n_per_dim as i64;
        let mut k = [0i64; 3];
        for (a, &i) in idx.iter().enumerate().take(self.dim) {
            let i = i as i64;
            k[a] = if i <= n / 2 { i } else { i - n };
        }
        k
    }

    /// Continuous wavenumber vector `2*pi*k/L`.
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let k = self.k_signed(flat);
        let f = self.xi_min();
        [k[0] as f64 * f, k[1] as f64 * f, k[2] as f64 * f]
    }

    pub fn xi_mag(&self, flat: usize) -> f64 {
        let xi = self.xi(flat);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }
}

/// In-place n-dimensional complex FFT over a row-major array.
pub fn fft_nd<T: Real>(data: &mut [Complex<T>], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total);
    let mut planner = FftPlanner::<T>::new();
    for (axis, &n) in shape.iter().enumerate() {
        if n == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride: usize = shape[axis + 1..].iter().product();
        let block = stride * n;
        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        let mut base = 0;
        while base < total {
            for off in 0..stride {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + off + i * stride];
                }
                fft.process(&mut line);
                for (i, slot) in line.iter().enumerate() {
                    data[base + off + i * stride] = *slot;
                }
            }
            base += block;
        }
    }
    if inverse {
        let scale = T::one() / lit::<T>(total as f64);
        for v in data.iter_mut() {
            *v = *v * scale;
        }
    }
}

/// Real scalar field on a periodic grid. The spectrum is computed on first
/// use and cached; construction from a spectrum keeps the given coefficients
/// as the cache (callers must hand in conjugate-symmetric data).
#[derive(Debug)]
pub struct Field<T: Real> {
    grid: Grid,
    values: Vec<T>,
    spectrum: OnceLock<Vec<Complex<T>>>,
}

impl<T: Real> Clone for Field<T> {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Field {
            grid: self.grid,
            values: self.values.clone(),
            spectrum,
        }
    }
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![T::zero(); grid.len()],
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_values(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    /// Samples a function of the physical coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 3]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Field {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    /// Builds the field whose DFT equals the given coefficients.
    pub fn from_spectrum(grid: Grid, spec: Vec<Complex<T>>) -> Self {
        let mut data = spec.clone();
        fft_nd(&mut data, &grid.shape(), true);
        let values = data.iter().map(|c| c.re).collect();
        let cache = OnceLock::new();
        let _ = cache.set(spec);
        Field {
            grid,
            values,
            spectrum: cache,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn spectrum(&self) -> &[Complex<T>] {
        self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex<T>> = self
                .values
                .iter()
                .map(|&v| Complex::new(v, T::zero()))
                .collect();
            fft_nd(&mut data, &self.grid.shape(), false);
            data
        })
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / lit::<T>(self.grid.len() as f64)
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// Applies a radial Fourier multiplier `m(|xi|)`.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let spec = self.spectrum();
        let out: Vec<Complex<T>> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| c * lit::<T>(m(self.grid.xi_mag(i))))
            .collect();
        Field::from_spectrum(self.grid, out)
    }

    /// Spectral partial derivative along the given axis. The Nyquist mode is
    /// zeroed to keep the result real-valued.
    pub fn deriv(&self, axis: usize) -> Self {
        assert!(axis < self.grid.dim);
        let n = self.grid.n_per_dim as i64;
        let spec = self.spectrum();
        let out: Vec<Complex<T>> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = self.grid.k_signed(i)[axis];
                if k == -n / 2 {
                    Complex::new(T::zero(), T::zero())
                } else {
                    let xi = lit::<T>(k as f64 * self.grid.xi_min());
                    Complex::new(-c.im * xi, c.re * xi)
                }
            })
            .collect();
        Field::from_spectrum(self.grid, out)
    }

    pub fn grad(&self) -> Vec<Self> {
        (0..self.grid.dim).map(|a| self.deriv(a)).collect()
    }

    /// 2/3-rule dealiasing: zeroes every mode with any `|k_i| > n/3`.
    pub fn dealias(&self) -> Self {
        let cut = (self.grid.n_per_dim as i64) / 3;
        let spec = self.spectrum();
        let out: Vec<Complex<T>> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = self.grid.k_signed(i);
                if k.iter().take(self.grid.dim).any(|&ki| ki.abs() > cut) {
                    Complex::new(T::zero(), T::zero())
                } else {
                    c
                }
            })
            .collect();
        Field::from_spectrum(self.grid, out)
    }

    /// L2 norm of the pointwise difference, relative to the other field.
    pub fn rel_l2_distance(&self, other: &Self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&a, &b) in self.values.iter().zip(&other.values) {
            let d = (a - b).to_f64();
            num += d * d;
            den += b.to_f64() * b.to_f64();
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

pub fn divergence<T: Real>(components: &[Field<T>]) -> Field<T> {
    let mut out = components[0].deriv(0);
    for (axis, f) in components.iter().enumerate().skip(1) {
        out = out.add(&f.deriv(axis));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(2, 64, 10.0).is_ok());
        assert!(Grid::new(4, 64, 10.0).is_err());
        assert!(Grid::new(2, 48, 10.0).is_err());
        assert!(Grid::new(2, 4, 10.0).is_err());
        assert!(Grid::new(2, 64, 0.0).is_err());
    }

    #[test]
    fn fft_round_trip_is_identity() {
        let grid = Grid::new(2, 16, 3.0).unwrap();
        let f = Field::<f64>::from_fn(grid, |x| (x[0] * 2.1).sin() + 0.3 * (x[1] * 5.0).cos());
        let spec = f.spectrum().to_vec();
        let back = Field::from_spectrum(grid, spec);
        assert!(f.rel_l2_distance(&back) < 1e-13);
    }

    #[test]
    fn single_mode_spectrum_is_sharp() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let f = Field::<f64>::from_fn(grid, |x| (3.0 * x[0]).cos());
        let spec = f.spectrum();
        for i in 0..grid.len() {
            let k = grid.k_signed(i)[0];
            let expected = if k.abs() == 3 { 16.0 } else { 0.0 };
            assert!(
                (spec[i].re - expected).abs() < 1e-10 && spec[i].im.abs() < 1e-10,
                "k={k} coeff={:?}",
                spec[i]
            );
        }
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = Field::<f64>::from_fn(grid, |x| (4.0 * x[0]).sin());
        let df = f.deriv(0);
        let exact = Field::<f64>::from_fn(grid, |x| 4.0 * (4.0 * x[0]).cos());
        assert!(df.rel_l2_distance(&exact) < 1e-12);
    }

    #[test]
    fn divergence_has_zero_mean() {
        let grid = Grid::new(2, 32, 5.0).unwrap();
        let fx = Field::<f64>::from_fn(grid, |x| (x[0] * 1.3).sin() * (x[1] * 0.9).cos() + 0.7);
        let fy = Field::<f64>::from_fn(grid, |x| (x[0] * 2.0).cos() + x[1].sin());
        let div = divergence(&[fx, fy]);
        assert!(div.mean().abs() < 1e-13);
    }

    #[test]
    fn dealias_removes_top_third() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let f = Field::<f64>::from_fn(grid, |x| (14.0 * x[0]).cos() + (3.0 * x[0]).cos());
        let g = f.dealias();
        let spec = g.spectrum();
        for i in 0..grid.len() {
            let k = grid.k_signed(i)[0];
            if k.abs() == 14 {
                assert_eq!(spec[i].re, 0.0);
            }
            if k.abs() == 3 {
                assert!((spec[i].re - 16.0).abs() < 1e-10);
            }
        }
    }
}
