use std::sync::Arc;

use crate::distribution::UnivariateModel;
use crate::stats::{sorted, Kde};

/// Empirical cdf of a sample; the density is a Gaussian kernel estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    sorted: Arc<[f64]>,
    kde: Arc<Kde>,
}

impl Empirical {
    pub fn new(sample: &[f64]) -> Self {
        assert!(!sample.is_empty(), "empirical distribution of an empty sample");
        let sorted: Arc<[f64]> = sorted(sample).into();
        let kde = Arc::new(Kde::silverman(&sorted));
        Self { sorted, kde }
    }

    pub fn sorted_sample(&self) -> &[f64] {
        &self.sorted
    }

    pub fn kde(&self) -> &Kde {
        &self.kde
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

impl UnivariateModel for Empirical {
    fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    fn pdf(&self, x: f64) -> f64 {
        self.kde.pdf(x)
    }

    /// Left-continuous inverse: the smallest `x_(i)` with `i/m >= p`.
    fn quantile(&self, p: f64) -> f64 {
        let m = self.sorted.len();
        let i = ((p * m as f64).ceil() as usize).clamp(1, m);
        self.sorted[i - 1]
    }
}
