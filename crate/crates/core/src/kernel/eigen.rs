use super::KernelMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and matching orthonormal eigenvectors of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T> {
    dim: usize,
    values: Vec<T>,
    // row-major n×n; column j is the eigenvector for values[j]
    vectors: Vec<T>,
}

impl<T: Scalar> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.values
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn component(&self, i: usize, j: usize) -> T {
        self.vectors[i * self.dim + j]
    }

    pub fn eigenvector(&self, j: usize) -> Vec<T> {
        (0..self.dim).map(|i| self.component(i, j)).collect()
    }

    /// `V · diag(values) · Vᵀ`, row-major.
    pub fn reconstruct_with(&self, values: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = T::zero();
                for (m, &l) in values.iter().enumerate() {
                    s += self.component(i, m) * l * self.component(j, m);
                }
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        out
    }

    /// `max |V Λ Vᵀ − K|`.
    pub fn reconstruction_error(&self, kernel: &KernelMatrix<T>) -> T {
        self.reconstruct_with(&self.values)
            .iter()
            .zip(kernel.entries())
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for a in 0..n {
            for b in a..n {
                let dot: T = (0..n).map(|i| self.component(i, a) * self.component(i, b)).sum();
                let target = if a == b { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eigendecompose<T: Scalar>(kernel: &KernelMatrix<T>) -> Result<EigenSystem<T>> {
    let n = kernel.dim();
    let mut a = kernel.entries().to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let frob = a.iter().map(|x| *x * *x).sum::<T>().sqrt();
    let tol = T::epsilon() * frob;
    let two = T::lit(2.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<T>()
            .sqrt();
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenFailure { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the input order among equal eigenvalues
    order.sort_by(|&x, &y| a[y * n + y].partial_cmp(&a[x * n + x]).expect("finite"));
    let values = order.iter().map(|&j| a[j * n + j]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (col, &j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + col] = v[i * n + j];
        }
    }
    Ok(EigenSystem {
        dim: n,
        values,
        vectors,
    })
}
