//! Numerical Littlewood-Paley machinery on periodic grids: the dyadic
//! partition of unity, block operators realized as Fourier multipliers,
//! homogeneous Besov norms with low/high band restrictions, fractional
//! derivatives, and empirical benches for the Bernstein and product-law
//! inequalities.

mod bench;
mod besov;
mod dyadic;
mod field;

pub use bench::{
    check_bernstein, check_product_law, smooth_noise, white_noise, BernsteinReport,
    ProductLawReport,
};
pub use besov::{
    besov_norm, besov_norm_vec, frac_deriv, lp_norm, lp_norm_vec, validate_hybrid_p, Band,
    BesovSpec,
};
pub use dyadic::{chi, phi, DyadicDecomposition};
pub use field::{divergence, fft_nd, Field, Grid};
