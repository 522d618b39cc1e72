//! Maximum-entropy subset design.
//!
//! Picks `k` of `n` candidate sites to maximize `log det K[S]` and judges how
//! close a stochastic search has come to the optimum:
//!
//! - [`kernel`]: kernel storage, log-determinants, eigendecomposition.
//! - [`dpp`]: exact k-DPP sampling and probabilities.
//! - [`search`]: k-DPP stochastic search, greedy, exchange, genetic and
//!   exhaustive solvers.
//! - [`records`]: jittering, record extraction and the classical record laws.
//! - [`tail`]: GPD peaks-over-threshold and censored Weibull tail fits.
//! - [`stopping`]: record-based conditional probabilities and stopping rules.
//!
//! Linear algebra and search are generic over [`Scalar`] (`f32`/`f64`); the
//! statistical modules work in `f64`.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod distribution;
pub mod dpp;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod records;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod stats;
pub mod stopping;
pub mod tail;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Kernel = kernel::KernelMatrix<f64>;
pub type Kernel32 = kernel::KernelMatrix<f32>;
pub type Eigen = kernel::EigenSystem<f64>;
pub type Eigen32 = kernel::EigenSystem<f32>;
pub type Trace = search::SampleTrace<f64>;
pub type Trace32 = search::SampleTrace<f32>;
pub type Subset = search::DesignSubset<f64>;
pub type Subset32 = search::DesignSubset<f32>;
