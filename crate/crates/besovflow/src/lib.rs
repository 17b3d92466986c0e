//! Pseudo-spectral simulator and Littlewood-Paley/Besov diagnostics for an
//! inviscid liquid-gas two-phase flow model with linear friction.
//!
//! The crate evolves the flow both in its primitive variables `(m, n, u)` and
//! in the reformulated variables `(P~, u~, c~)`, provides dyadic
//! frequency-decomposition machinery (block operators, homogeneous Besov
//! norms, fractional derivatives), an exact Fourier-multiplier oracle for the
//! linearized system, and decay-rate fitting against the predicted algebraic
//! exponents.

pub mod analysis;
pub mod cli;
pub mod lpbesov;
pub mod model;
pub mod scalar;
pub mod solver;

pub use scalar::Real;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

// Concrete double-precision aliases; the CLI and all acceptance tolerances
// are pinned at f64.
pub type Params64 = model::ModelParams<f64>;
pub type Field64 = lpbesov::Field<f64>;
pub type TState64 = solver::TState<f64>;
pub type PState64 = solver::PState<f64>;
