//! Exact k-DPP sampling from a precomputed eigendecomposition, and exact
//! k-DPP probabilities by enumeration.
//!
//! Sampling runs in two phases. The first picks `k` eigenvectors, keeping
//! eigenvector `m` with probability `λₘ·e[m−1][k−1] / e[m][k]` while walking
//! `m = n, …, 1` (`k` is decremented after every pick). The second samples
//! from the projection DPP spanned by the chosen eigenvectors: item `i` is
//! drawn with probability `(1/|V|) Σ_{v∈V} v_i²`, then `V` is replaced by an
//! orthonormal basis of its subspace orthogonal to `e_i`.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::kernel::{det_submatrix, EigenSystem, KernelMatrix};
use crate::rng::stream_rng;
use crate::scalar::Scalar;

/// Enumeration limit for [`exact_k_dpp_pmf`].
pub const EXACT_PMF_LIMIT: u128 = 1_000_000;

const OVERFLOW_GUARD: f64 = 1e300;

/// `e[m][j]`: the `j`-th elementary symmetric polynomial of the first `m`
/// eigenvalues, for `0 ≤ m ≤ n`, `0 ≤ j ≤ k`.
///
/// If the unscaled `e[n][k]` would exceed `1e300` (or the type's range), every
/// eigenvalue is divided by the largest one first. [`Self::eigenvalue`]
/// returns the values actually used, so the ratio
/// `λₘ·e[m−1][j−1] / e[m][j]` is unchanged by the rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementarySymmetricTable<T> {
    n: usize,
    k: usize,
    table: Vec<T>,
    eigenvalues: Vec<T>,
    scale: T,
}

impl<T: Scalar> ElementarySymmetricTable<T> {
    #[inline]
    pub fn get(&self, m: usize, j: usize) -> T {
        self.table[m * (self.k + 1) + j]
    }

    /// Eigenvalue `m` (1-based), after rescaling.
    #[inline]
    pub fn eigenvalue(&self, m: usize) -> T {
        self.eigenvalues[m - 1]
    }

    /// Divisor applied to the eigenvalues (1 when no rescaling happened).
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `e[n][k]` on the original eigenvalue scale (may overflow to infinity).
    pub fn top(&self) -> T {
        self.get(self.n, self.k) * self.scale.powi(self.k as i32)
    }
}

fn fill_table<T: Scalar>(eigenvalues: &[T], k: usize) -> Vec<T> {
    let n = eigenvalues.len();
    let w = k + 1;
    let mut table = vec![T::zero(); (n + 1) * w];
    for m in 0..=n {
        table[m * w] = T::one();
    }
    for m in 1..=n {
        let lambda = eigenvalues[m - 1];
        for j in 1..=k.min(m) {
            table[m * w + j] = table[(m - 1) * w + j] + lambda * table[(m - 1) * w + j - 1];
        }
    }
    table
}

pub fn elementary_table<T: Scalar>(eigenvalues: &[T], k: usize) -> Result<ElementarySymmetricTable<T>> {
    let n = eigenvalues.len();
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds ground set size {n}")));
    }
    if let Some(bad) = eigenvalues.iter().find(|l| !(**l >= T::zero()) || !l.is_finite()) {
        return Err(Error::invalid(format!("eigenvalue {bad} is not a nonnegative number")));
    }
    let guard = T::from_f64(OVERFLOW_GUARD)
        .filter(|g| g.is_finite())
        .unwrap_or_else(|| T::max_value() / T::lit(1e8));
    let table = fill_table(eigenvalues, k);
    let top = table[n * (k + 1) + k];
    if top.is_finite() && top <= guard {
        return Ok(ElementarySymmetricTable {
            n,
            k,
            table,
            eigenvalues: eigenvalues.to_vec(),
            scale: T::one(),
        });
    }
    let scale = eigenvalues.iter().fold(T::zero(), |m, &l| m.max(l));
    let scaled: Vec<T> = eigenvalues.iter().map(|&l| l / scale).collect();
    Ok(ElementarySymmetricTable {
        n,
        k,
        table: fill_table(&scaled, k),
        eigenvalues: scaled,
        scale,
    })
}

/// A k-DPP draw and the random stream it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DppSample {
    pub indices: Vec<usize>,
    pub stream: u64,
}

/// Reusable k-DPP sampler over a fixed eigendecomposition.
#[derive(Debug, Clone)]
pub struct KDppSampler<'a, T> {
    eig: &'a EigenSystem<T>,
    table: ElementarySymmetricTable<T>,
}

impl<'a, T: Scalar> KDppSampler<'a, T> {
    /// Eigenvalues at or below `n · ε · λ_max` are treated as zero.
    pub fn new(eig: &'a EigenSystem<T>, k: usize) -> Result<Self> {
        let n = eig.dim();
        if k == 0 || k > n {
            return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
        }
        let max = eig.eigenvalues().iter().fold(T::zero(), |m, &l| m.max(l));
        let cutoff = max * T::epsilon() * T::lit(n as f64);
        let clamped: Vec<T> = eig
            .eigenvalues()
            .iter()
            .map(|&l| if l > cutoff { l } else { T::zero() })
            .collect();
        let positive = clamped.iter().filter(|&&l| l > T::zero()).count();
        if positive < k {
            return Err(Error::RankDeficient {
                positive,
                required: k,
            });
        }
        let table = elementary_table(&clamped, k)?;
        Ok(Self { eig, table })
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }

    pub fn table(&self) -> &ElementarySymmetricTable<T> {
        &self.table
    }

    /// Draws one subset (sorted ascending).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let chosen = self.select_eigenvectors(rng);
        debug_assert_eq!(chosen.len(), self.k());
        let mut items = self.sample_projection(&chosen, rng);
        debug_assert_eq!(items.len(), self.k());
        items.sort_unstable();
        items
    }

    /// Draws one subset from stream `stream` of `seed`.
    pub fn sample_stream(&self, seed: u64, stream: u64) -> DppSample {
        let mut rng = stream_rng(seed, stream);
        DppSample {
            indices: self.sample(&mut rng),
            stream,
        }
    }

    fn select_eigenvectors<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let e = &self.table;
        let mut remaining = e.k();
        let mut chosen = Vec::with_capacity(remaining);
        for m in (1..=e.n()).rev() {
            if remaining == 0 {
                break;
            }
            // when every remaining eigenvector is needed the ratio is exactly 1
            let take = remaining == m || {
                let u = T::lit(rng.random::<f64>());
                u < e.eigenvalue(m) * e.get(m - 1, remaining - 1) / e.get(m, remaining)
            };
            if take {
                chosen.push(m - 1);
                remaining -= 1;
            }
        }
        chosen
    }

    fn sample_projection<R: Rng + ?Sized>(&self, chosen: &[usize], rng: &mut R) -> Vec<usize> {
        let n = self.eig.dim();
        let mut basis: Vec<Vec<T>> = chosen.iter().map(|&j| self.eig.eigenvector(j)).collect();
        let mut taken = vec![false; n];
        let mut items = Vec::with_capacity(basis.len());
        while !basis.is_empty() {
            let weights: Vec<T> = (0..n)
                .map(|i| {
                    if taken[i] {
                        T::zero()
                    } else {
                        basis.iter().map(|v| v[i] * v[i]).sum()
                    }
                })
                .collect();
            let total: T = weights.iter().copied().sum();
            let target = T::lit(rng.random::<f64>()) * total;
            let mut acc = T::zero();
            let mut pick = None;
            for (i, &w) in weights.iter().enumerate() {
                if w <= T::zero() {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if target < acc {
                    break;
                }
            }
            let i = pick.expect("projection weights sum to |V| > 0");
            taken[i] = true;
            items.push(i);

            let (pivot_col, _) = basis
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v[i].abs()))
                .fold((0, -T::one()), |b, c| if c.1 > b.1 { c } else { b });
            let pivot = basis.remove(pivot_col);
            for v in basis.iter_mut() {
                let f = v[i] / pivot[i];
                for (x, p) in v.iter_mut().zip(&pivot) {
                    *x -= f * *p;
                }
                v[i] = T::zero();
            }
            orthonormalize(&mut basis);
        }
        items
    }
}

/// Modified Gram–Schmidt, with a second pass for any vector whose norm
/// dropped below half its pre-projection value.
fn orthonormalize<T: Scalar>(basis: &mut [Vec<T>]) {
    for a in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(a);
        let v = &mut rest[0];
        let before = norm(v);
        let mut after = before;
        for pass in 0..2 {
            for u in done.iter() {
                let proj: T = v.iter().zip(u).map(|(x, y)| *x * *y).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * *y;
                }
            }
            after = norm(v);
            if pass == 0 && after >= T::lit(0.5) * before {
                break;
            }
        }
        for x in v.iter_mut() {
            *x /= after;
        }
    }
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

/// Draws one k-DPP subset; builds the elementary table on every call. Use
/// [`KDppSampler`] for repeated draws.
pub fn sample_k_dpp<T: Scalar, R: Rng + ?Sized>(
    eig: &EigenSystem<T>,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    Ok(KDppSampler::new(eig, k)?.sample(rng))
}

/// `P(Y) = det(L[Y]) / Σ_{|Y'|=k} det(L[Y'])` for every `k`-subset, by
/// enumeration (at most [`EXACT_PMF_LIMIT`] subsets).
pub fn exact_k_dpp_pmf<T: Scalar>(kernel: &KernelMatrix<T>, k: usize) -> Result<BTreeMap<Vec<usize>, T>> {
    let n = kernel.dim();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    let count = binomial(n, k);
    if count > EXACT_PMF_LIMIT {
        return Err(Error::BudgetExceeded {
            count,
            limit: EXACT_PMF_LIMIT,
        });
    }
    let mut pmf = BTreeMap::new();
    let mut total = T::zero();
    for subset in (0..n).combinations(k) {
        let det = det_submatrix(kernel, &subset)?.max(T::zero());
        total += det;
        pmf.insert(subset, det);
    }
    if !(total > T::zero()) {
        return Err(Error::RankDeficient {
            positive: 0,
            required: k,
        });
    }
    for p in pmf.values_mut() {
        *p /= total;
    }
    Ok(pmf)
}
