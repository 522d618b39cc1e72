use super::KernelMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pivots below `SINGULAR_PIVOT_RATIO · max diagonal` mark a singular submatrix.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

/// Row-by-row Cholesky factor of a growing principal submatrix.
///
/// Pushing an index appends one row of the lower-triangular factor in
/// `O(k²)`; popping discards it. The accumulated log-determinant is the sum of
/// `ln(pivot)` over rows, where `pivot = L[d][d]²`.
#[derive(Debug, Clone)]
pub struct CholeskyRows<'a, T> {
    kernel: &'a KernelMatrix<T>,
    capacity: usize,
    indices: Vec<usize>,
    // row d occupies factor[d * capacity .. d * capacity + d + 1]
    factor: Vec<T>,
    log_det: Vec<T>,
    min_pivot: Vec<T>,
    max_diag: Vec<T>,
}

impl<'a, T: Scalar> CholeskyRows<'a, T> {
    pub fn new(kernel: &'a KernelMatrix<T>, capacity: usize) -> Self {
        Self {
            kernel,
            capacity,
            indices: Vec::with_capacity(capacity),
            factor: vec![T::zero(); capacity * capacity],
            log_det: Vec::with_capacity(capacity),
            min_pivot: Vec::with_capacity(capacity),
            max_diag: Vec::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Appends `index` and returns the new pivot. A pivot that is not strictly
    /// positive leaves the factor unchanged and is returned as-is.
    pub fn push(&mut self, index: usize) -> T {
        let d = self.indices.len();
        assert!(d < self.capacity, "CholeskyRows capacity exceeded");
        let cap = self.capacity;
        let k = self.kernel;
        let mut pivot = k.get(index, index);
        for j in 0..d {
            let mut s = k.get(index, self.indices[j]);
            for m in 0..j {
                s -= self.factor[d * cap + m] * self.factor[j * cap + m];
            }
            let l = s / self.factor[j * cap + j];
            self.factor[d * cap + j] = l;
            pivot -= l * l;
        }
        if !(pivot > T::zero()) || !pivot.is_finite() {
            return pivot;
        }
        self.factor[d * cap + d] = pivot.sqrt();
        let prev = self.log_det.last().copied().unwrap_or_else(T::zero);
        self.log_det.push(prev + pivot.ln());
        let prev_min = self.min_pivot.last().copied().unwrap_or_else(T::infinity);
        self.min_pivot.push(prev_min.min(pivot));
        let prev_max = self.max_diag.last().copied().unwrap_or_else(T::zero);
        self.max_diag.push(prev_max.max(k.get(index, index)));
        self.indices.push(index);
        pivot
    }

    pub fn pop(&mut self) -> Option<usize> {
        self.log_det.pop();
        self.min_pivot.pop();
        self.max_diag.pop();
        self.indices.pop()
    }

    /// Log-determinant of the current submatrix (0 when empty).
    pub fn log_det(&self) -> T {
        self.log_det.last().copied().unwrap_or_else(T::zero)
    }

    /// True when every pivot clears the singularity threshold.
    pub fn is_well_conditioned(&self) -> bool {
        match (self.min_pivot.last(), self.max_diag.last()) {
            (Some(&p), Some(&m)) => p >= T::lit(SINGULAR_PIVOT_RATIO) * m,
            _ => true,
        }
    }

    fn singular_error(&self) -> Error {
        Error::SingularSubmatrix {
            position: self.indices.len(),
            pivot: self.min_pivot.last().map_or(0.0, |p| p.to_f64_lossy()),
        }
    }
}

/// Natural log of `det(K[S])` via a Cholesky factorization of the principal
/// submatrix taken in the order given.
pub fn log_det_submatrix<T: Scalar>(kernel: &KernelMatrix<T>, indices: &[usize]) -> Result<T> {
    kernel.check_subset(indices)?;
    let mut chol = CholeskyRows::new(kernel, indices.len());
    for (position, &i) in indices.iter().enumerate() {
        let pivot = chol.push(i);
        if chol.len() != position + 1 {
            return Err(Error::SingularSubmatrix {
                position,
                pivot: pivot.to_f64_lossy(),
            });
        }
    }
    if !chol.is_well_conditioned() {
        return Err(chol.singular_error());
    }
    Ok(chol.log_det())
}

/// `det(K[S])` by Gaussian elimination with partial pivoting. Unlike
/// [`log_det_submatrix`] this accepts singular and indefinite submatrices.
pub fn det_submatrix<T: Scalar>(kernel: &KernelMatrix<T>, indices: &[usize]) -> Result<T> {
    kernel.check_subset(indices)?;
    let k = indices.len();
    let mut a: Vec<T> = Vec::with_capacity(k * k);
    for &i in indices {
        for &j in indices {
            a.push(kernel.get(i, j));
        }
    }
    let mut det = T::one();
    for col in 0..k {
        let (piv, max) = (col..k)
            .map(|r| (r, a[r * k + col].abs()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if max == T::zero() {
            return Ok(T::zero());
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for r in (col + 1)..k {
            let f = a[r * k + col] / p;
            for c in col..k {
                let v = a[col * k + c];
                a[r * k + c] -= f * v;
            }
        }
    }
    Ok(det)
}
