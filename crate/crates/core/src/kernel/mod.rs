//! Kernel matrices: storage, validation, principal-submatrix log-determinants,
//! symmetric eigendecomposition and a synthetic kernel generator.

mod cholesky;
mod eigen;
mod io;
mod synth;

pub use cholesky::{det_submatrix, log_det_submatrix, CholeskyRows};
pub use eigen::{eigendecompose, EigenSystem};
pub use io::{load_kernel, parse_kernel, write_kernel, MatrixFormat};
pub use synth::{synth_kernel, SynthParams};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative asymmetry tolerated (and silently removed) on ingest.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-6;

/// Relative negative-eigenvalue magnitude tolerated and clamped to zero.
pub const NEGATIVE_EIGEN_TOLERANCE: f64 = 1e-10;

/// A real symmetric matrix indexed by candidate sites.
///
/// Entries are stored row-major and are exactly symmetric after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix<T> {
    dim: usize,
    entries: Vec<T>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> KernelMatrix<T> {
    /// Builds a kernel from row-major data, symmetrizing as `(A + Aᵀ) / 2`.
    ///
    /// Rejects inputs whose asymmetry exceeds `ASYMMETRY_TOLERANCE · max|A|`.
    pub fn from_row_major(dim: usize, mut entries: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != dim * dim {
            return Err(Error::NonSquare {
                row: entries.len() / dim,
                expected: dim,
                found: entries.len() % dim,
            });
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line: 0,
                token: bad.to_string(),
            });
        }
        let max_abs = entries.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let mut max_dev = T::zero();
        for i in 0..dim {
            for j in (i + 1)..dim {
                max_dev = max_dev.max((entries[i * dim + j] - entries[j * dim + i]).abs());
            }
        }
        let tolerance = T::lit(ASYMMETRY_TOLERANCE) * max_abs;
        if max_dev > tolerance {
            return Err(Error::Asymmetric {
                max_dev: max_dev.to_f64_lossy(),
                tolerance: tolerance.to_f64_lossy(),
            });
        }
        let half = T::lit(0.5);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = (entries[i * dim + j] + entries[j * dim + i]) * half;
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg;
            }
        }
        Ok(Self {
            dim,
            entries,
            labels: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != dim {
                return Err(Error::NonSquare {
                    row,
                    expected: dim,
                    found: values.len(),
                });
            }
            entries.extend(values);
        }
        Self::from_row_major(dim, entries)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![T::one(); dim])
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![T::zero(); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = d;
        }
        Self::from_row_major(dim, entries)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim {
            return Err(Error::invalid(format!(
                "{} labels for dimension {}",
                labels.len(),
                self.dim
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Relabels sites: entry `(i, j)` of the result is entry
    /// `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim {
            return Err(Error::invalid("permutation length mismatch"));
        }
        let mut seen = vec![false; self.dim];
        for &p in perm {
            if p >= self.dim {
                return Err(Error::IndexOutOfBounds {
                    index: p,
                    dim: self.dim,
                });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::DuplicateIndex(p));
            }
        }
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for &pi in perm {
            for &pj in perm {
                entries.push(self.get(pi, pj));
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&p| l[p].clone()).collect());
        Ok(Self {
            dim: n,
            entries,
            labels,
        })
    }

    /// Checks positive semidefiniteness, clamping eigenvalues in
    /// `(-NEGATIVE_EIGEN_TOLERANCE · max|λ|, 0)` to zero.
    ///
    /// The matrix is only rebuilt when some eigenvalue actually needed clamping.
    pub fn into_psd(self) -> Result<Self> {
        let eig = eigendecompose(&self)?;
        let max_abs = eig
            .eigenvalues()
            .iter()
            .fold(T::zero(), |m, l| m.max(l.abs()));
        let min = *eig.eigenvalues().last().expect("dim >= 1");
        if min >= T::zero() {
            return Ok(self);
        }
        if min < -T::lit(NEGATIVE_EIGEN_TOLERANCE) * max_abs {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min.to_f64_lossy(),
            });
        }
        let clamped: Vec<T> = eig
            .eigenvalues()
            .iter()
            .map(|&l| l.max(T::zero()))
            .collect();
        let rebuilt = eig.reconstruct_with(&clamped);
        let labels = self.labels;
        let mut out = Self::from_row_major(self.dim, rebuilt)?;
        out.labels = labels;
        Ok(out)
    }

    pub(crate) fn check_subset(&self, indices: &[usize]) -> Result<()> {
        if indices.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut seen = vec![false; self.dim];
        for &i in indices {
            if i >= self.dim {
                return Err(Error::IndexOutOfBounds {
                    index: i,
                    dim: self.dim,
                });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> KernelMatrix<U> {
        KernelMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|x| U::lit(x.to_f64_lossy()))
                .collect(),
            labels: self.labels.clone(),
        }
    }
}
