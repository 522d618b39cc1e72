use rand::Rng;

use super::KernelMatrix;
use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::scalar::Scalar;

/// Parameters of the exponential-covariance synthetic kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n: usize,
    pub lengthscale: f64,
    pub nugget: f64,
    pub seed: u64,
}

/// Draws `n` sites uniformly in the unit square and returns
/// `K[i][j] = exp(-‖xᵢ − xⱼ‖ / lengthscale) + nugget · [i = j]`.
pub fn synth_kernel<T: Scalar>(params: SynthParams) -> Result<KernelMatrix<T>> {
    let SynthParams {
        n,
        lengthscale,
        nugget,
        seed,
    } = params;
    if n == 0 {
        return Err(Error::invalid("synthetic kernel size must be >= 1"));
    }
    if !(lengthscale > 0.0 && lengthscale.is_finite()) {
        return Err(Error::invalid("lengthscale must be positive"));
    }
    if !(nugget >= 0.0 && nugget.is_finite()) {
        return Err(Error::invalid("nugget must be nonnegative"));
    }
    let mut rng = seeded_rng(seed);
    let sites: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut entries = Vec::with_capacity(n * n);
    for (i, a) in sites.iter().enumerate() {
        for (j, b) in sites.iter().enumerate() {
            let d = (a.0 - b.0).hypot(a.1 - b.1);
            let mut v = (-d / lengthscale).exp();
            if i == j {
                v += nugget;
            }
            entries.push(T::lit(v));
        }
    }
    KernelMatrix::from_row_major(n, entries)
}
