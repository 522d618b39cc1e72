use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use super::positive_shift;
use crate::distribution::UnivariateModel;
use crate::error::{Error, Result};
use crate::stats::{normal_cdf, sorted, variance};

/// Log-normal on `x - shift`: `ln(x - shift) ~ Normal(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormal {
    pub mu: f64,
    pub sigma: f64,
    pub shift: f64,
}

impl LogNormal {
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let y = x - self.shift;
        if y <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = (y.ln() - self.mu) / self.sigma;
        -0.5 * z * z - y.ln() - self.sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }
}

impl UnivariateModel for LogNormal {
    fn cdf(&self, x: f64) -> f64 {
        let y = x - self.shift;
        if y <= 0.0 {
            0.0
        } else {
            normal_cdf((y.ln() - self.mu) / self.sigma)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        let y = x - self.shift;
        if y <= 0.0 {
            1.0
        } else {
            normal_cdf(-(y.ln() - self.mu) / self.sigma)
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn quantile(&self, p: f64) -> f64 {
        let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
        self.shift + (self.mu + self.sigma * z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub shift: f64,
    pub n: usize,
    pub loglik: f64,
}

impl LogNormalFit {
    pub fn lognormal(&self) -> LogNormal {
        LogNormal {
            mu: self.mu,
            sigma: self.sigma,
            shift: self.shift,
        }
    }
}

/// Closed-form maximum-likelihood fit on the logs.
pub fn fit_lognormal(values: &[f64]) -> Result<LogNormalFit> {
    if values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let s = sorted(values);
    let var = variance(&s);
    if var < 1e-12 {
        return Err(Error::DegenerateSample { variance: var });
    }
    let shift = positive_shift(&s);
    if s[0] - shift <= 0.0 {
        return Err(Error::NonPositiveSupport(s[0]));
    }
    let logs: Vec<f64> = s.iter().map(|&x| (x - shift).ln()).collect();
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let sigma = (logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / n).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::DegenerateSample { variance: var });
    }
    let d = LogNormal { mu, sigma, shift };
    let loglik = s.iter().map(|&x| d.ln_pdf(x)).sum();
    Ok(LogNormalFit {
        mu,
        sigma,
        shift,
        n: values.len(),
        loglik,
    })
}
