//! Initial-data generation: seeded perturbations of the equilibrium scaled
//! so the hybrid functional of the datum equals the requested amplitude.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{InitialKind, RunConfig};
use crate::analysis::{besov_data_profile, hybrid_sample};
use crate::lpbesov::{smooth_noise, DyadicDecomposition, Field, Grid};
use crate::solver::TState;
use crate::{Error, Result};

fn localized_bump(grid: Grid, center_frac: f64) -> Field<f64> {
    let l = grid.box_len;
    let width = l / 16.0;
    let c = l * center_frac;
    let f = Field::from_fn(grid, |x| {
        // periodic squared distance to the bump center
        let mut d2 = 0.0;
        for xi in x.iter().take(grid.dim) {
            let mut d = (xi - c).abs() % l;
            if d > l / 2.0 {
                d = l - d;
            }
            d2 += d * d;
        }
        (-d2 / (2.0 * width * width)).exp()
    });
    let mean = f.mean();
    f.map(|v| v - mean)
}

/// Samples the borderline radial spectral profile onto the grid: real,
/// radially symmetric coefficients, so the field is real and even.
fn profile_field(grid: Grid, sigma1: f64) -> Field<f64> {
    let prof = besov_data_profile(sigma1, grid.dim);
    let spec: Vec<Complex<f64>> = (0..grid.len())
        .map(|i| Complex::new(prof.amplitude(grid.xi_mag(i)), 0.0))
        .collect();
    Field::from_spectrum(grid, spec)
}

/// Builds the configured initial state, normalized so the instantaneous
/// hybrid functional equals `experiment.amplitude` (exactly, by homogeneity).
pub fn gen_initial(cfg: &RunConfig, dec: &DyadicDecomposition) -> Result<TState<f64>> {
    let grid = cfg.grid()?;
    if cfg.amplitude == 0.0 {
        return Ok(TState::zeros(grid));
    }
    let mut state = TState::zeros(grid);
    match cfg.initial {
        InitialKind::LocalizedBump => {
            state.pt = localized_bump(grid, 0.5);
            state.ct = localized_bump(grid, 0.3).scale(0.5);
        }
        InitialKind::BandLimited => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let width = grid.xi_max() / 8.0;
            state.pt = smooth_noise(grid, width, &mut rng);
            for u in state.ut.iter_mut() {
                *u = smooth_noise(grid, width, &mut rng);
            }
            state.ct = smooth_noise(grid, width, &mut rng).scale(0.5);
        }
        InitialKind::BesovProfile => {
            state.pt = profile_field(grid, cfg.sigma1);
        }
    }
    let x0 = hybrid_sample(&state, cfg.p, dec)?.instantaneous();
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::Config(format!(
            "initial datum has hybrid functional {x0} at this resolution; cannot scale to amplitude {}",
            cfg.amplitude
        )));
    }
    let scale = cfg.amplitude / x0;
    state.pt = state.pt.scale(scale);
    state.ct = state.ct.scale(scale);
    for u in state.ut.iter_mut() {
        *u = u.scale(scale);
    }
    Ok(state)
}
