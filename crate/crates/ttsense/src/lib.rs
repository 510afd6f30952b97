//! Tensor-train surrogates and compressed-domain variance-based sensitivity
//! analysis.
//!
//! The pipeline: build a TT surrogate of a black-box model over a discretized
//! input space by cross-approximation, extract the Sobol tensor train (a
//! `2^N` tensor whose entry at a binary tuple index approximates that
//! tuple's Sobol index), then compute aggregate sensitivity metrics — mean
//! dimension, dimension distribution, three effective dimensions, Shapley
//! values — as contractions between the Sobol TT and explicitly constructed
//! automaton mask tensors.
//!
//! Modules:
//!
//! - [`tt`]: the TT container and its algebra (evaluation, contraction,
//!   Hadamard product, addition, SVD rounding, materialization, entry
//!   maximization, file I/O).
//! - [`space`]: per-variable quadrature grids encoding the (independent)
//!   input measure.
//! - [`blackbox`]: batch-evaluable models — built-in benchmarks and a
//!   line-protocol subprocess coupling.
//! - [`cross`]: rank-adaptive TT cross-approximation with maxvol pivoting.
//! - [`sobol`]: Sobol tensor-train extraction and index queries.
//! - [`masks`]: Hamming weight/mask/state and length mask/state automaton
//!   tensors, plus the reciprocal-weight tensor.
//! - [`metrics`]: the sensitivity metrics and the aggregate report.
//! - [`baselines`]: independent oracles and Monte-Carlo comparison
//!   estimators.

pub mod baselines;
pub mod blackbox;
pub mod cross;
pub mod error;
mod linalg;
pub mod masks;
pub mod metrics;
pub mod sobol;
pub mod space;
pub mod tt;

pub use error::{Error, Result};
pub use tt::TTTensor;
