//! Spectral-stability toolkit for real matrices under random perturbation.
//!
//! What lives here:
//! - [`spectral`]: eigendecompositions with per-eigenvalue condition numbers
//!   kappa(lambda_i) = ||v_i|| ||w_i||, the overlap matrix, gap statistics,
//!   and the two-eigenvalue disk certificate.
//! - [`ensemble`]: reproducible samplers for A + gamma*M with independent
//!   absolutely continuous entries, plus norm-moment estimation.
//! - [`pseudospec`]: sigma_min grids, pseudospectrum length on the real line
//!   and area off it, the limiting ratios tying both to the condition
//!   numbers, and the bounded-rank inclusion check.
//! - [`submatrix`]: restricted-invertibility submatrix selection.
//! - [`resolvent`]: Schur-complement corner identities for shifted inverses.
//! - [`verify`]: the Monte Carlo engine comparing empirical tails against
//!   the theoretical bounds, with DKW bands and log-log exponent fits.
//! - [`io`] and [`plot`]: file formats, CSV reports and SVG plots.
//!
//! Determinism: every stochastic routine takes an explicit seed, derives one
//! RNG stream per trial, and aggregates in trial order, so reports are
//! byte-identical across runs and thread counts.
//!
//! A note on scaling: samplers normalize entries to variance 1/n. The sqrt(n)
//! scaling is only guaranteed to normalize the operator norm for entry laws
//! with finite fourth moment; all shipped families satisfy that.

pub mod ensemble;
pub mod io;
pub mod linalg;
pub mod plot;
pub mod pseudospec;
pub mod resolvent;
pub mod rng;
pub mod spectral;
pub mod submatrix;
pub mod verify;

pub use linalg::{C64, CMat, RMat};
