//! Threshold energies and Mourre positivity for the discrete Laplacian with a
//! κ-periodic potential.
//!
//! The crate is organised bottom-up:
//!
//! * [`chebyshev`]: Chebyshev polynomials `T_n`, `U_{n-1}`, their extrema and
//!   the monotone-branch inverse of `T_κ`.
//! * [`symbol`]: the single-index functions `g_{jκ}^E` and their weighted sums
//!   `G_κ^E` on the constant-energy surface in dimensions 2 and 3.
//! * [`pingpong`]: the reflection / level-matching chain construction that
//!   produces threshold energies, together with their ω-weights.
//! * [`catalog`]: zeroth-order lattice sums, first-order ansatz solutions,
//!   ping-pong sequences and dimension shifts merged into one catalog.
//! * [`interpolation`]: the homogeneous linear systems that pin `G_κ^E` to zero
//!   at consecutive thresholds and yield coefficient vectors ρ.
//! * [`verifier`]: grid scans with golden-section refinement that classify the
//!   sign of `G_κ^E` over energy bands, plus the κ=2 factorization check and
//!   the convergence-rate study.
//! * [`export`]: deterministic CSV/JSON rendering shared by the CLI and the
//!   Python bindings.

pub mod catalog;
pub mod chebyshev;
pub mod error;
pub mod export;
pub mod interpolation;
pub mod linalg;
pub mod pingpong;
pub mod symbol;
pub mod verifier;

pub use error::{MourreError, Result};
