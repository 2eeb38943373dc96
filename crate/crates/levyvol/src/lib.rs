//! Simulation and estimation toolkit for the integrated volatility of
//! Lévy processes with infinite-variation stable-like jumps.
//!
//! The library covers four layers:
//!
//! - **model**: Brownian + tempered-stable (or pure stable) models, their
//!   characteristic exponents, the induced strictly stable law, and
//!   Lévy-measure integrals ([`model`], [`assumption`]).
//! - **simulation**: exact stable sampling and a compound-Poisson scheme
//!   with Gaussian small-jump substitution, reproducible across thread
//!   schedules ([`stable`], [`sim`]).
//! - **estimation**: truncated realized quadratic variation, bipower
//!   variation, threshold policies, one-/two-step debiased estimators with
//!   the clamped practical variants, and a characteristic-function
//!   comparison estimator ([`estimators`]).
//! - **validation**: closed-form small-time expansions checked against
//!   independent Fourier/quadrature oracles with envelope and rate tests,
//!   plus a Monte Carlo harness with deterministic parallelism
//!   ([`expansions`], [`oracle`], [`harness`]).
//!
//! Each major capability has a runnable example under `examples/`; the
//! `levyvol` binary exposes the same functionality as subcommands.

pub mod assumption;
pub mod density;
pub mod error;
pub mod estimators;
pub mod expansions;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod sim;
pub mod stable;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    cgmy_char_exponent, derive_stable_params, stable_char_exponent, DriftConvention,
    LevyModelSpec, SamplingGrid, StableParams,
};
pub use sim::{simulate_increments, small_jump_sigma, IncrementSeries, SimScheme};
