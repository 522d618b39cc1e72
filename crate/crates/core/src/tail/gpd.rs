use serde::{Deserialize, Serialize};

use super::optimize::NelderMead;
use crate::distribution::UnivariateModel;
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sorted};

/// Shape values this close to zero use the exponential limit.
pub const XI_ZERO: f64 = 1e-6;

/// Fewest exceedances accepted by a peaks-over-threshold fit.
pub const MIN_EXCEEDANCES: usize = 30;

/// Generalized Pareto distribution `H(y) = 1 - (1 + xi (y - mu) / sigma)_+^(-1/xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gpd {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl Gpd {
    /// Upper end of the support (`+inf` unless `xi < 0`).
    pub fn upper_endpoint(&self) -> f64 {
        if self.xi < -XI_ZERO {
            self.mu - self.sigma / self.xi
        } else {
            f64::INFINITY
        }
    }

    /// `ln(1 - H(y))` for `y >= mu`.
    pub fn ln_sf(&self, y: f64) -> f64 {
        let z = ((y - self.mu) / self.sigma).max(0.0);
        if self.xi.abs() < XI_ZERO {
            return -z;
        }
        let t = 1.0 + self.xi * z;
        if t <= 0.0 {
            f64::NEG_INFINITY
        } else {
            -(self.xi * z).ln_1p() / self.xi
        }
    }

    /// Log-density at `y`; `-inf` outside the support.
    pub fn ln_pdf(&self, y: f64) -> f64 {
        if y < self.mu {
            return f64::NEG_INFINITY;
        }
        let z = (y - self.mu) / self.sigma;
        if self.xi.abs() < XI_ZERO {
            return -self.sigma.ln() - z;
        }
        let t = self.xi * z;
        if t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -self.sigma.ln() - (1.0 + 1.0 / self.xi) * t.ln_1p()
    }

    pub fn log_likelihood(&self, exceedances: &[f64]) -> f64 {
        if !(self.sigma > 0.0) {
            return f64::NEG_INFINITY;
        }
        exceedances.iter().map(|&y| self.ln_pdf(y)).sum()
    }
}

impl UnivariateModel for Gpd {
    fn cdf(&self, y: f64) -> f64 {
        if y <= self.mu {
            0.0
        } else {
            -self.ln_sf(y).exp_m1()
        }
    }

    fn sf(&self, y: f64) -> f64 {
        if y <= self.mu {
            1.0
        } else {
            self.ln_sf(y).exp()
        }
    }

    fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    fn quantile(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return self.upper_endpoint();
        }
        let l = -(-p).ln_1p();
        if self.xi.abs() < XI_ZERO {
            self.mu + self.sigma * l
        } else {
            self.mu + self.sigma * (self.xi * l).exp_m1() / self.xi
        }
    }
}

/// Maximum-likelihood GPD fit to threshold exceedances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
    pub n_exceed: usize,
    /// Sample size the threshold was taken from.
    pub n_total: usize,
    pub loglik: f64,
}

impl GpdFit {
    pub fn gpd(&self) -> Gpd {
        Gpd {
            mu: self.mu,
            sigma: self.sigma,
            xi: self.xi,
        }
    }

    /// Fraction of the sample above the threshold.
    pub fn tail_fraction(&self) -> f64 {
        self.n_exceed as f64 / self.n_total as f64
    }
}

/// Probability-weighted-moment estimates `(sigma, xi)` from excesses over
/// the threshold.
pub fn pwm_estimates(excesses: &[f64]) -> (f64, f64) {
    let s = sorted(excesses);
    let m = s.len() as f64;
    let a0 = s.iter().sum::<f64>() / m;
    let a1 = s
        .iter()
        .enumerate()
        .map(|(i, &x)| (m - 1.0 - i as f64) / (m - 1.0) * x)
        .sum::<f64>()
        / m;
    let d = a0 - 2.0 * a1;
    if d <= 0.0 {
        return (a0.max(f64::MIN_POSITIVE), 0.0);
    }
    (2.0 * a0 * a1 / d, 2.0 - a0 / d)
}

/// Fits a GPD with location `mu` to observations `y > mu`.
pub fn fit_gpd_exceedances(exceedances: &[f64], mu: f64) -> Result<GpdFit> {
    if exceedances.len() < MIN_EXCEEDANCES {
        return Err(Error::TooFewExceedances {
            found: exceedances.len(),
            required: MIN_EXCEEDANCES,
        });
    }
    if let Some(&bad) = exceedances.iter().find(|&&y| !(y > mu) || !y.is_finite()) {
        return Err(Error::invalid(format!("exceedance {bad} is not above threshold {mu}")));
    }
    let excess: Vec<f64> = exceedances.iter().map(|&y| y - mu).collect();
    if excess.iter().all(|&e| e == excess[0]) {
        return Err(Error::DegenerateSample { variance: 0.0 });
    }
    let max_excess = excess.iter().copied().fold(0.0, f64::max);
    let (sigma0, xi0) = pwm_estimates(&excess);
    let xi0 = xi0.clamp(-0.9, 2.0);
    // PWM can land outside the support when xi < 0.
    let sigma0 = if xi0 < 0.0 { sigma0.max(-xi0 * max_excess * 1.05) } else { sigma0 };

    let nll = |p: &[f64]| {
        let xi = p[1];
        if xi <= -1.0 {
            return f64::INFINITY;
        }
        let g = Gpd { mu: 0.0, sigma: p[0].exp(), xi };
        -g.log_likelihood(&excess)
    };
    let nm = NelderMead::default();
    let first = nm.minimize(nll, &[sigma0.ln(), xi0], &[0.1, 0.1]);
    let second = nm.minimize(nll, &first.x, &[0.05, 0.05]);
    let best = if second.value <= first.value { &second } else { &first };
    if !(first.converged || second.converged) || !best.value.is_finite() {
        return Err(Error::NonConvergence {
            evaluations: first.evaluations + second.evaluations,
        });
    }
    Ok(GpdFit {
        mu,
        sigma: best.x[0].exp(),
        xi: best.x[1],
        n_exceed: exceedances.len(),
        n_total: exceedances.len(),
        loglik: -best.value,
    })
}

/// Peaks-over-threshold: the threshold is the `threshold_quantile` sample
/// quantile and the GPD is fitted to the strictly larger values.
pub fn fit_gpd_pot(values: &[f64], threshold_quantile: f64) -> Result<GpdFit> {
    if !(0.0..1.0).contains(&threshold_quantile) {
        return Err(Error::invalid(format!(
            "threshold quantile {threshold_quantile} must be in [0, 1)"
        )));
    }
    if values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let s = sorted(values);
    let mu = quantile_sorted(&s, threshold_quantile);
    let exceed: Vec<f64> = s.iter().copied().filter(|&v| v > mu).collect();
    let mut fit = fit_gpd_exceedances(&exceed, mu)?;
    fit.n_total = values.len();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn gpd_sample(sigma: f64, xi: f64, n: usize, seed: u64) -> Vec<f64> {
        let g = Gpd { mu: 0.0, sigma, xi };
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| g.quantile(rng.random::<f64>())).collect()
    }

    #[test]
    fn cdf_endpoints_and_exponential_limit() {
        let g = Gpd { mu: 2.0, sigma: 1.5, xi: 0.3 };
        assert_eq!(g.cdf(2.0), 0.0);
        assert!(g.cdf(1e12) > 1.0 - 1e-3);
        let e = Gpd { mu: 2.0, sigma: 1.5, xi: 0.0 };
        for y in [2.5, 4.0, 10.0] {
            let want = 1.0 - (-(y - 2.0) / 1.5_f64).exp();
            assert!((e.cdf(y) - want).abs() < 1e-15);
        }
        let near = Gpd { mu: 2.0, sigma: 1.5, xi: 1e-5 };
        assert!((near.cdf(5.0) - e.cdf(5.0)).abs() < 1e-4);
    }

    #[test]
    fn negative_shape_has_finite_endpoint() {
        let g = Gpd { mu: 0.0, sigma: 1.0, xi: -0.5 };
        assert_eq!(g.upper_endpoint(), 2.0);
        assert_eq!(g.cdf(2.0), 1.0);
        assert_eq!(g.pdf(2.5), 0.0);
        assert_eq!(g.quantile(1.0), 2.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for xi in [-0.3, 0.0, 0.4] {
            let g = Gpd { mu: 1.0, sigma: 2.0, xi };
            for p in [0.01, 0.3, 0.9, 0.999] {
                assert!((g.cdf(g.quantile(p)) - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        for xi in [-0.4, 0.0, 0.2] {
            let g = Gpd { mu: 0.0, sigma: 1.0, xi };
            let top = if xi < 0.0 { g.upper_endpoint() } else { 400.0 };
            let f = |y: f64| g.pdf(y);
            let mut breaks: Vec<f64> = vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 400.0];
            breaks.retain(|&b| b < top);
            breaks.push(top);
            let mass = crate::quadrature::simpson_panels(&f, &breaks, 1e-10);
            let missing = g.sf(top);
            assert!((mass + missing - 1.0).abs() < 1e-4, "xi={xi}: {mass}");
        }
    }

    #[test]
    fn pwm_on_exponential_is_near_zero_shape() {
        let (s, x) = pwm_estimates(&gpd_sample(1.0, 0.0, 20_000, 3));
        assert!((s - 1.0).abs() < 0.05 && x.abs() < 0.05);
    }

    #[test]
    fn mle_recovers_parameters() {
        for (xi, seed) in [(-0.2, 1u64), (0.0, 2), (0.2, 3)] {
            let fit = fit_gpd_exceedances(&gpd_sample(1.0, xi, 10_000, seed), 0.0).unwrap();
            assert!((fit.xi - xi).abs() < 0.05, "xi={xi}: {fit:?}");
            assert!((fit.sigma - 1.0).abs() < 0.05, "xi={xi}: {fit:?}");
            if fit.xi < 0.0 {
                let end = fit.gpd().upper_endpoint();
                assert!(gpd_sample(1.0, xi, 10_000, seed).iter().all(|&y| y < end));
            }
        }
    }

    #[test]
    fn mle_is_a_local_maximum() {
        let y = gpd_sample(1.0, 0.2, 2_000, 9);
        let fit = fit_gpd_exceedances(&y, 0.0).unwrap();
        for (ds, dx) in [(1.01, 0.0), (0.99, 0.0), (1.0, 0.01), (1.0, -0.01)] {
            let g = Gpd { mu: 0.0, sigma: fit.sigma * ds, xi: fit.xi + dx };
            assert!(g.log_likelihood(&y) <= fit.loglik + 1e-9);
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let y = gpd_sample(1.0, 0.1, 3_000, 5);
        assert_eq!(fit_gpd_exceedances(&y, 0.0).unwrap(), fit_gpd_exceedances(&y, 0.0).unwrap());
    }

    #[test]
    fn pot_threshold_and_counts() {
        let values: Vec<f64> = (1..=1000).map(f64::from).collect();
        let fit = fit_gpd_pot(&values, 0.9).unwrap();
        assert!((fit.mu - 900.1).abs() < 1e-9);
        assert_eq!(fit.n_exceed, 100);
        assert_eq!(fit.n_total, 1000);
        assert!((fit.tail_fraction() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn too_few_exceedances() {
        let values: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(matches!(
            fit_gpd_pot(&values, 0.9),
            Err(Error::TooFewExceedances { found: 2, required: 30 })
        ));
        assert!(fit_gpd_pot(&values, 1.0).is_err());
    }
}
