//! Univariate continuous distributions shared by the record and tail code.

/// A continuous distribution on the real line.
pub trait UnivariateModel {
    fn cdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64;

    /// Inverse cdf for `p` in `[0, 1]`.
    fn quantile(&self, p: f64) -> f64;

    /// Survival function `1 - F(x)`; override when a direct form avoids
    /// cancellation in the upper tail.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
}

impl<M: UnivariateModel + ?Sized> UnivariateModel for &M {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn quantile(&self, p: f64) -> f64 {
        (**self).quantile(p)
    }
    fn sf(&self, x: f64) -> f64 {
        (**self).sf(x)
    }
}

/// Exponential distribution with the given rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl Exponential {
    pub const STANDARD: Self = Self { rate: 1.0 };
}

impl UnivariateModel for Exponential {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        -(-p).ln_1p() / self.rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_basics() {
        let e = Exponential::STANDARD;
        assert_eq!(e.cdf(-1.0), 0.0);
        assert!((e.sf(10.0) - (-10.0_f64).exp()).abs() < 1e-20);
        assert!((e.quantile(e.cdf(2.5)) - 2.5).abs() < 1e-12);
        assert!((e.pdf(1.0) - (-1.0_f64).exp()).abs() < 1e-15);
    }
}
