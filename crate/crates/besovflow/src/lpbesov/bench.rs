//! Empirical benches for the Bernstein and product-law inequalities: over a
//! corpus of random band-limited (resp. smooth) fields, record the largest
//! observed ratio between the two sides of each inequality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::besov::{besov_norm, lp_norm, lp_norm_vec, Band, BesovSpec};
use super::dyadic::DyadicDecomposition;
use super::field::{Field, Grid};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernsteinEntry {
    pub p: f64,
    pub q: f64,
    pub k: u32,
    pub support: String,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub grid_n: usize,
    pub corpus_size: usize,
    pub entries: Vec<BernsteinEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductLawEntry {
    pub s: f64,
    pub p: f64,
    pub max_constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductLawReport {
    pub grid_n: usize,
    pub corpus_size: usize,
    pub entries: Vec<ProductLawEntry>,
}

/// White-noise field with unit-variance independent samples.
pub fn white_noise<T: Real>(grid: Grid, rng: &mut impl Rng) -> Field<T> {
    let values = (0..grid.len())
        .map(|_| crate::scalar::lit::<T>(rng.gen_range(-1.0..1.0)))
        .collect();
    Field::from_values(grid, values).expect("sized by grid")
}

/// Mean-zero smooth random field: white noise under a Gaussian spectral
/// envelope of width `width` (in wavenumber units).
pub fn smooth_noise<T: Real>(grid: Grid, width: f64, rng: &mut impl Rng) -> Field<T> {
    let f = white_noise::<T>(grid, rng);
    let g = f.apply_radial_multiplier(|r| {
        if r == 0.0 {
            0.0
        } else {
            (-r * r / (2.0 * width * width)).exp()
        }
    });
    let sup = g.max_abs();
    if sup > T::zero() {
        g.scale(T::one() / sup)
    } else {
        g
    }
}

fn grad_magnitude_norm<T: Real>(f: &Field<T>, q: f64) -> T {
    let grads = f.grad();
    let refs: Vec<&Field<T>> = grads.iter().collect();
    lp_norm_vec(&refs, q)
}

/// Estimates the empirical constants in the Bernstein inequalities over a
/// random corpus.
///
/// Ball entries use `S_j`-localized fields and check the direct inequality
/// `||grad^k f||_q <= C lambda^{k + d(1/p - 1/q)} ||f||_p`; ring entries use
/// `Delta_j`-localized fields and also check the reverse bound at `p = q`.
pub fn check_bernstein<T: Real>(
    corpus_size: usize,
    grid: Grid,
    dec: &DyadicDecomposition,
    seed: u64,
) -> BernsteinReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim as f64;
    // (p, q, k, ring?)
    let schedule: [(f64, f64, u32, bool); 5] = [
        (2.0, 2.0, 1, true),
        (2.0, f64::INFINITY, 0, false),
        (2.0, 4.0, 0, false),
        (2.0, 4.0, 1, true),
        (1.0, 2.0, 0, false),
    ];
    let mut entries: Vec<BernsteinEntry> = schedule
        .iter()
        .map(|&(p, q, k, ring)| BernsteinEntry {
            p,
            q,
            k,
            support: if ring { "ring".into() } else { "ball".into() },
            max_ratio: 0.0,
        })
        .collect();
    // Reverse ring inequality lambda^k ||f||_p <= C ||grad^k f||_p at p = 2.
    entries.push(BernsteinEntry {
        p: 2.0,
        q: 2.0,
        k: 1,
        support: "ring-reverse".into(),
        max_ratio: 0.0,
    });

    // Keep bands away from the edges so localization is not clipped.
    let j_lo = dec.j_min + 1;
    let j_hi = dec.j_max - 2;
    for _ in 0..corpus_size {
        let noise = white_noise::<T>(grid, &mut rng);
        let j = rng.gen_range(j_lo..=j_hi.max(j_lo));
        let lambda = (j as f64).exp2();
        let ring = dec.block(&noise, j);
        let ball = dec.low_cut(&noise, j);
        for (idx, &(p, q, k, on_ring)) in schedule.iter().enumerate() {
            let f = if on_ring { &ring } else { &ball };
            let denom = lp_norm(f, p).to_f64();
            if denom < 1e-300 {
                continue;
            }
            let numer = if k == 0 {
                lp_norm(f, q).to_f64()
            } else {
                grad_magnitude_norm(f, q).to_f64()
            };
            let scale = lambda.powf(k as f64 + d * (1.0 / p - 1.0 / q));
            let ratio = numer / (scale * denom);
            if ratio > entries[idx].max_ratio {
                entries[idx].max_ratio = ratio;
            }
        }
        // reverse: lambda ||f||_2 / ||grad f||_2 on the ring
        let g = grad_magnitude_norm(&ring, 2.0).to_f64();
        if g > 1e-300 {
            let ratio = lambda * lp_norm(&ring, 2.0).to_f64() / g;
            let last = entries.last_mut().expect("reverse entry present");
            if ratio > last.max_ratio {
                last.max_ratio = ratio;
            }
        }
    }
    BernsteinReport {
        grid_n: grid.n_per_dim,
        corpus_size,
        entries,
    }
}

/// Estimates the implied constant in the product law
/// `||ab||_{B^s_{p,1}} <= C (||a||_inf ||b||_{B^s_{p,1}} + ||b||_inf ||a||_{B^s_{p,1}})`
/// for `s` in {0.5, 1} and `p` in {2, 4} over random smooth fields.
pub fn check_product_law<T: Real>(
    corpus_size: usize,
    grid: Grid,
    dec: &DyadicDecomposition,
    seed: u64,
) -> ProductLawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = [(0.5, 2.0), (0.5, 4.0), (1.0, 2.0), (1.0, 4.0)];
    let mut entries: Vec<ProductLawEntry> = cases
        .iter()
        .map(|&(s, p)| ProductLawEntry {
            s,
            p,
            max_constant: 0.0,
        })
        .collect();
    for _ in 0..corpus_size {
        let width = grid.xi_max() / 8.0;
        let a = smooth_noise::<T>(grid, width, &mut rng);
        let b = smooth_noise::<T>(grid, width, &mut rng);
        let ab = a.mul(&b);
        for (idx, &(s, p)) in cases.iter().enumerate() {
            let spec = BesovSpec::new(s, p, 1.0, Band::Full).expect("valid exponents");
            let lhs = besov_norm(&ab, &spec, dec).to_f64();
            let rhs = lp_norm(&a, f64::INFINITY).to_f64() * besov_norm(&b, &spec, dec).to_f64()
                + lp_norm(&b, f64::INFINITY).to_f64() * besov_norm(&a, &spec, dec).to_f64();
            if rhs > 1e-300 {
                let c = lhs / rhs;
                if c > entries[idx].max_constant {
                    entries[idx].max_constant = c;
                }
            }
        }
    }
    ProductLawReport {
        grid_n: grid.n_per_dim,
        corpus_size,
        entries,
    }
}
