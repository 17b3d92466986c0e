//! The dyadic partition of unity and the block operators realized as radial
//! Fourier multipliers.

use super::field::{Field, Grid};
use crate::scalar::Real;
use crate::{Error, Result};

fn glue(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C-infinity ramp from 0 at t=0 to 1 at t=1.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = glue(t);
    a / (a + glue(1.0 - t))
}

/// Low-pass profile: identically 1 on `|xi| <= 1`, identically 0 on
/// `|xi| >= 4/3`, smooth in between.
pub fn chi(r: f64) -> f64 {
    let r = r.abs();
    if r <= 1.0 {
        1.0
    } else if r >= 4.0 / 3.0 {
        0.0
    } else {
        smoothstep((4.0 / 3.0 - r) * 3.0)
    }
}

/// Annulus profile `phi(xi) = chi(xi/2) - chi(xi)`, supported in
/// `1 <= |xi| <= 8/3`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Grid-bound dyadic decomposition: the resolvable band `[j_min, j_max]` and
/// the low/high threshold `j0`.
///
/// `j_min` and `j_max` are chosen so the telescoping sum of the annulus
/// profiles equals 1 at every nonzero grid wavenumber; dyadic indices below
/// `j_min` are unresolvable on the periodic box and are silently truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicDecomposition {
    pub grid: Grid,
    pub j_min: i32,
    pub j_max: i32,
    pub j0: i32,
}

impl DyadicDecomposition {
    pub fn new(grid: Grid, j0: i32) -> Result<Self> {
        let j_min = (0.75 * grid.xi_min()).log2().floor() as i32;
        let j_max = grid.xi_max().log2().ceil() as i32;
        if j_max - j_min + 1 < 4 {
            return Err(Error::Config(format!(
                "grid hosts only {} dyadic bands; at least 4 are required",
                j_max - j_min + 1
            )));
        }
        if j0 < j_min || j0 > j_max {
            return Err(Error::Config(format!(
                "threshold j0 = {j0} outside the resolvable band [{j_min}, {j_max}]"
            )));
        }
        Ok(DyadicDecomposition {
            grid,
            j_min,
            j_max,
            j0,
        })
    }

    /// Band profile evaluated at dyadic scale `j`.
    pub fn phi_at(&self, j: i32, r: f64) -> f64 {
        phi(r * (-j as f64).exp2())
    }

    /// Block operator `Delta_j f`: multiplies the spectrum by `phi(2^-j xi)`.
    pub fn block<T: Real>(&self, f: &Field<T>, j: i32) -> Field<T> {
        debug_assert!(j >= self.j_min - 1 && j <= self.j_max + 1);
        let scale = (-j as f64).exp2();
        f.apply_radial_multiplier(|r| phi(r * scale))
    }

    /// Low-frequency cut `S_j f`: multiplies the spectrum by `chi(2^-j xi)`.
    pub fn low_cut<T: Real>(&self, f: &Field<T>, j: i32) -> Field<T> {
        let scale = (-j as f64).exp2();
        f.apply_radial_multiplier(|r| chi(r * scale))
    }

    /// Inclusive dyadic index range of a band selection; `None` if empty.
    pub fn band_range(&self, low: bool, high: bool) -> Option<(i32, i32)> {
        let (a, b) = match (low, high) {
            (true, true) | (false, false) => (self.j_min, self.j_max),
            (true, false) => (self.j_min, self.j0.min(self.j_max)),
            (false, true) => ((self.j0 - 1).max(self.j_min), self.j_max),
        };
        if a > b {
            None
        } else {
            Some((a, b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec() -> DyadicDecomposition {
        let grid = Grid::new(1, 256, 10.0).unwrap();
        DyadicDecomposition::new(grid, 0).unwrap()
    }

    #[test]
    fn chi_is_one_at_origin_and_supported_in_ball() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(chi(2.0), 0.0);
        assert!(chi(1.2) > 0.0 && chi(1.2) < 1.0);
    }

    #[test]
    fn phi_supported_in_annulus() {
        assert_eq!(phi(0.9), 0.0);
        assert_eq!(phi(0.0), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        assert!(phi(1.5) > 0.0);
        // on the plateau chi(r/2)=1, chi(r)=0
        assert_eq!(phi(1.5), 1.0 - chi(1.5));
        assert_eq!(phi(2.0), 1.0);
    }

    #[test]
    fn partition_of_unity_on_grid() {
        let d = dec();
        for i in 0..d.grid.len() {
            let r = d.grid.xi_mag(i);
            let mut sum = chi(r);
            for j in 0..=(d.j_max + 1) {
                sum += d.phi_at(j, r);
            }
            assert!((sum - 1.0).abs() < 1e-12, "xi={r} sum={sum}");
        }
    }

    #[test]
    fn full_band_partition_away_from_zero() {
        let d = dec();
        for i in 1..d.grid.len() {
            let r = d.grid.xi_mag(i);
            if r == 0.0 {
                continue;
            }
            let sum: f64 = (d.j_min..=d.j_max).map(|j| d.phi_at(j, r)).sum();
            assert!((sum - 1.0).abs() < 1e-12, "xi={r} sum={sum}");
        }
    }

    #[test]
    fn distant_bands_do_not_overlap() {
        let d = dec();
        for i in 0..d.grid.len() {
            let r = d.grid.xi_mag(i);
            let prod = d.phi_at(3, r) * d.phi_at(6, r);
            assert_eq!(prod, 0.0);
        }
    }

    #[test]
    fn single_mode_in_plateau_passes_unchanged() {
        let grid = Grid::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        let d = DyadicDecomposition::new(grid, 0).unwrap();
        // |xi| = 4 sits on the plateau of the j=1 annulus (phi(2) = 1).
        let f = Field::<f64>::from_fn(grid, |x| (4.0 * x[0]).sin());
        let b = d.block(&f, 1);
        assert!(b.rel_l2_distance(&f) < 1e-12);
    }

    #[test]
    fn blocks_reconstruct_mean_free_part() {
        let grid = Grid::new(1, 128, 7.0).unwrap();
        let d = DyadicDecomposition::new(grid, 0).unwrap();
        let f = Field::<f64>::from_fn(grid, |x| {
            1.4 + (x[0] * 2.0).sin() + 0.2 * (x[0] * 11.0).cos()
        });
        let mut sum = Field::zeros(grid);
        for j in d.j_min..=d.j_max {
            sum = sum.add(&d.block(&f, j));
        }
        let mean = f.mean();
        let target = f.map(|v| v - mean);
        assert!(sum.rel_l2_distance(&target) < 1e-10);
    }

    #[test]
    fn repeated_distant_blocks_annihilate() {
        let grid = Grid::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        let d = DyadicDecomposition::new(grid, 0).unwrap();
        let f = Field::<f64>::from_fn(grid, |x| (x[0] * 9.0).sin() + (x[0] * 40.0).cos());
        let b = d.block(&d.block(&f, 3), 6);
        let l2: f64 = b.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        let fl2: f64 = f.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(l2 < 1e-12 * fl2);
    }

    #[test]
    fn low_cut_is_partial_sum_of_blocks_plus_mean() {
        let grid = Grid::new(1, 128, 9.0).unwrap();
        let d = DyadicDecomposition::new(grid, 0).unwrap();
        let f = Field::<f64>::from_fn(grid, |x| {
            0.5 + (x[0] * 1.5).sin() + 0.1 * (x[0] * 20.0).sin()
        });
        let j = 2;
        let sj = d.low_cut(&f, j);
        let mean = f.mean();
        let mut sum = Field::from_fn(grid, |_| mean);
        for q in d.j_min..=(j - 1) {
            sum = sum.add(&d.block(&f, q));
        }
        assert!(sj.rel_l2_distance(&sum) < 1e-10);
    }

    #[test]
    fn threshold_outside_band_is_rejected() {
        let grid = Grid::new(1, 64, 10.0).unwrap();
        let d = DyadicDecomposition::new(grid, 0).unwrap();
        assert!(DyadicDecomposition::new(grid, d.j_max + 1).is_err());
        assert!(DyadicDecomposition::new(grid, d.j_min - 1).is_err());
    }
}
