use rayon::prelude::*;

use super::{validate_k, DesignSubset};
use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::kernel::{CholeskyRows, KernelMatrix};
use crate::scalar::Scalar;

/// Default enumeration limit for [`exhaustive_search`].
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

/// Global maximizer by complete enumeration, lowest lexicographic subset on ties.
pub fn exhaustive_search<T: Scalar>(kernel: &KernelMatrix<T>, k: usize) -> Result<DesignSubset<T>> {
    exhaustive_search_with_limit(kernel, k, EXHAUSTIVE_LIMIT)
}

/// Depth-first enumeration of all `k`-subsets in lexicographic order sharing
/// Cholesky prefixes: each visited node costs one `O(k²)` row update.
/// Prefixes with a non-positive pivot are pruned (every superset is singular).
pub fn exhaustive_search_with_limit<T: Scalar>(
    kernel: &KernelMatrix<T>,
    k: usize,
    limit: u128,
) -> Result<DesignSubset<T>> {
    validate_k(kernel, k)?;
    let n = kernel.dim();
    let count = binomial(n, k);
    if count > limit {
        return Err(Error::BudgetExceeded { count, limit });
    }
    let branches: Vec<Option<(T, Vec<usize>)>> = (0..=(n - k))
        .into_par_iter()
        .map(|first| {
            let mut chol = CholeskyRows::new(kernel, k);
            let mut best = None;
            if chol.push(first) > T::zero() {
                visit(kernel, k, first + 1, &mut chol, &mut best);
            }
            best
        })
        .collect();
    // branches are in lexicographic order; strict > keeps the earliest maximum
    let mut best: Option<(T, Vec<usize>)> = None;
    for cand in branches.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| cand.0 > b.0) {
            best = Some(cand);
        }
    }
    best.map(|(v, s)| DesignSubset::from_parts(s, v))
        .ok_or(Error::SingularSubmatrix {
            position: 0,
            pivot: 0.0,
        })
}

fn visit<T: Scalar>(
    kernel: &KernelMatrix<T>,
    k: usize,
    start: usize,
    chol: &mut CholeskyRows<'_, T>,
    best: &mut Option<(T, Vec<usize>)>,
) {
    let depth = chol.len();
    if depth == k {
        if chol.is_well_conditioned() {
            let v = chol.log_det();
            if best.as_ref().is_none_or(|b| v > b.0) {
                *best = Some((v, chol.indices().to_vec()));
            }
        }
        return;
    }
    let n = kernel.dim();
    for i in start..=(n - (k - depth)) {
        if chol.push(i) > T::zero() && chol.len() == depth + 1 {
            visit(kernel, k, i + 1, chol, best);
            chol.pop();
        }
    }
}
