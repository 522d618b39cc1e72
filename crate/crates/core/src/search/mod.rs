//! Solvers for `max_{|S| = k} log det K[S]`.

mod dpp_search;
mod exhaustive;
mod genetic;
mod greedy;
mod trace;

pub use dpp_search::{dpp_search, dpp_search_with_eigen, DppSearchConfig, DppSearchOutcome};
pub use exhaustive::{exhaustive_search, exhaustive_search_with_limit, EXHAUSTIVE_LIMIT};
pub use genetic::{genetic_search, genetic_search_from, GaConfig, GaOutcome};
pub use greedy::{exchange_refine, greedy_backward, greedy_forward};
pub use trace::{parse_trace_csv, read_trace_csv, write_trace_csv, SampleTrace, TraceEntry, TRACE_HEADER};

use crate::error::{Error, Result};
use crate::kernel::{log_det_submatrix, KernelMatrix};
use crate::scalar::Scalar;

/// A `k`-subset of sites (strictly increasing indices) and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSubset<T> {
    indices: Vec<usize>,
    log_det: T,
}

impl<T: Scalar> DesignSubset<T> {
    /// Sorts `indices` and evaluates the log-determinant.
    pub fn new(kernel: &KernelMatrix<T>, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        let log_det = log_det_submatrix(kernel, &indices)?;
        Ok(Self { indices, log_det })
    }

    /// Caller guarantees `indices` is sorted and `log_det` matches.
    pub(crate) fn from_parts(indices: Vec<usize>, log_det: T) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices, log_det }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn log_det(&self) -> T {
        self.log_det
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.indices
    }
}

/// Early-termination hook for iterative searches.
///
/// The search calls [`StopRule::should_stop`] after every block of
/// [`StopRule::check_every`] iterations with the trace so far.
pub trait StopRule<T> {
    fn check_every(&self) -> usize;

    fn should_stop(&mut self, trace: &SampleTrace<T>) -> bool;
}

pub(crate) fn validate_k<T: Scalar>(kernel: &KernelMatrix<T>, k: usize) -> Result<()> {
    let n = kernel.dim();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    Ok(())
}

/// `Ok(None)` for singular subsets, propagating every other error.
pub(crate) fn try_log_det<T: Scalar>(kernel: &KernelMatrix<T>, indices: &[usize]) -> Result<Option<T>> {
    match log_det_submatrix(kernel, indices) {
        Ok(v) => Ok(Some(v)),
        Err(Error::SingularSubmatrix { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
