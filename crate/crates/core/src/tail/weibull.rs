use serde::{Deserialize, Serialize};

use super::optimize::NelderMead;
use super::{positive_shift, MIN_UNCENSORED};
use crate::distribution::UnivariateModel;
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sorted, variance};

/// Two-parameter Weibull on `x - shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weibull {
    pub shape: f64,
    pub scale: f64,
    pub shift: f64,
}

impl Weibull {
    fn z(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if z <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape.ln() - self.scale.ln() + (self.shape - 1.0) * z.ln() - z.powf(self.shape)
    }

    /// `ln F(x)`, accurate in the lower tail.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if z <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (-(-z.powf(self.shape)).exp_m1()).ln()
    }
}

impl UnivariateModel for Weibull {
    fn cdf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if z <= 0.0 {
            0.0
        } else {
            -(-z.powf(self.shape)).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        let z = self.z(x);
        if z <= 0.0 {
            1.0
        } else {
            (-z.powf(self.shape)).exp()
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn quantile(&self, p: f64) -> f64 {
        self.shift + self.scale * (-(-p).ln_1p()).powf(1.0 / self.shape)
    }
}

/// Weibull fit with the part of the sample below `threshold` treated as
/// left-censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensWeibullFit {
    pub shape: f64,
    pub scale: f64,
    /// Subtracted from the data before fitting.
    pub shift: f64,
    /// Censoring point in data units.
    pub threshold: f64,
    pub n_noncensored: usize,
    pub n_censored: usize,
    pub loglik: f64,
}

impl CensWeibullFit {
    pub fn weibull(&self) -> Weibull {
        Weibull {
            shape: self.shape,
            scale: self.scale,
            shift: self.shift,
        }
    }
}

/// Uncensored Weibull maximum-likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit {
    pub shape: f64,
    pub scale: f64,
    pub shift: f64,
    pub n: usize,
    pub loglik: f64,
}

impl WeibullFit {
    pub fn weibull(&self) -> Weibull {
        Weibull {
            shape: self.shape,
            scale: self.scale,
            shift: self.shift,
        }
    }
}

fn censored_loglik(w: &Weibull, uncensored: &[f64], n_censored: usize, threshold: f64) -> f64 {
    let mut ll: f64 = uncensored.iter().map(|&x| w.ln_pdf(x)).sum();
    if n_censored > 0 {
        ll += n_censored as f64 * w.ln_cdf(threshold);
    }
    ll
}

/// Least-squares line through the Weibull plot `ln(-ln(1 - p_i))` against
/// `ln x_(i)` over the uncensored order statistics, with plotting positions
/// `(i - 0.5)/m` from the full sample.
fn weibull_plot_start(sorted_shifted: &[f64], first_uncensored: usize) -> (f64, f64) {
    let m = sorted_shifted.len() as f64;
    let pts: Vec<(f64, f64)> = sorted_shifted
        .iter()
        .enumerate()
        .skip(first_uncensored)
        .map(|(i, &x)| {
            let p = (i as f64 + 0.5) / m;
            (x.ln(), (-(-p).ln_1p()).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let shape = if sxx > 0.0 && sxy > 0.0 { sxy / sxx } else { 1.0 };
    let scale = (mx - my / shape).exp();
    (shape, scale)
}

/// Maximizes `prod f(x_i) * prod F(threshold)` with the threshold at the
/// `threshold_quantile` sample quantile; values strictly below it are
/// censored.
pub fn fit_censored_weibull(values: &[f64], threshold_quantile: f64) -> Result<CensWeibullFit> {
    if !(0.0..=1.0).contains(&threshold_quantile) {
        return Err(Error::invalid(format!(
            "threshold quantile {threshold_quantile} must be in [0, 1]"
        )));
    }
    if values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let s = sorted(values);
    let shift = positive_shift(&s);
    let shifted: Vec<f64> = s.iter().map(|&x| x - shift).collect();
    if shifted[0] <= 0.0 || !shifted[shifted.len() - 1].is_finite() {
        return Err(Error::NonPositiveSupport(s[0]));
    }
    let threshold = quantile_sorted(&shifted, threshold_quantile);
    let first_uncensored = shifted.partition_point(|&x| x < threshold);
    let uncensored = &shifted[first_uncensored..];
    if uncensored.len() < MIN_UNCENSORED {
        return Err(Error::TooFewExceedances {
            found: uncensored.len(),
            required: MIN_UNCENSORED,
        });
    }
    if variance(uncensored) == 0.0 {
        return Err(Error::DegenerateSample { variance: 0.0 });
    }
    let (k0, l0) = weibull_plot_start(&shifted, first_uncensored);
    let nll = |p: &[f64]| {
        let w = Weibull {
            shape: p[0].exp(),
            scale: p[1].exp(),
            shift: 0.0,
        };
        -censored_loglik(&w, uncensored, first_uncensored, threshold)
    };
    let nm = NelderMead::default();
    let first = nm.minimize(nll, &[k0.ln(), l0.ln()], &[0.1, 0.1]);
    let second = nm.minimize(nll, &first.x, &[0.02, 0.02]);
    let best = if second.value <= first.value { &second } else { &first };
    if !(first.converged || second.converged) || !best.value.is_finite() {
        return Err(Error::NonConvergence {
            evaluations: first.evaluations + second.evaluations,
        });
    }
    Ok(CensWeibullFit {
        shape: best.x[0].exp(),
        scale: best.x[1].exp(),
        shift,
        threshold: threshold + shift,
        n_noncensored: uncensored.len(),
        n_censored: first_uncensored,
        loglik: -best.value,
    })
}

/// Uncensored Weibull MLE by solving the profile score equation for the
/// shape, `sum x^k ln x / sum x^k - 1/k - mean(ln x) = 0`.
pub fn fit_weibull(values: &[f64]) -> Result<WeibullFit> {
    if values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let s = sorted(values);
    let shift = positive_shift(&s);
    let x: Vec<f64> = s.iter().map(|&v| v - shift).collect();
    if x[0] <= 0.0 {
        return Err(Error::NonPositiveSupport(s[0]));
    }
    let var = variance(&x);
    if var < 1e-12 {
        return Err(Error::DegenerateSample { variance: var });
    }
    // Normalize by the maximum so x^k cannot overflow.
    let top = x[x.len() - 1];
    let logs: Vec<f64> = x.iter().map(|&v| (v / top).ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / logs.len() as f64;
    let score = |k: f64| {
        let (mut a, mut b) = (0.0, 0.0);
        for &l in &logs {
            let w = (k * l).exp();
            a += w * l;
            b += w;
        }
        a / b - 1.0 / k - mean_log
    };
    // The score increases in k; bracket the root and bisect.
    let (mut lo, mut hi) = (1e-3, 1.0);
    while score(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonConvergence { evaluations: 0 });
        }
    }
    while score(lo) > 0.0 {
        hi = lo;
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::NonConvergence { evaluations: 0 });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let shape = 0.5 * (lo + hi);
    let mean_pow = logs.iter().map(|&l| (shape * l).exp()).sum::<f64>() / logs.len() as f64;
    let scale = top * mean_pow.powf(1.0 / shape);
    let w = Weibull { shape, scale, shift };
    let loglik = s.iter().map(|&v| w.ln_pdf(v)).sum();
    Ok(WeibullFit {
        shape,
        scale,
        shift,
        n: values.len(),
        loglik,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;
    use rand_distr::{Distribution, Weibull as WeibullDist};

    fn sample(shape: f64, scale: f64, n: usize, seed: u64) -> Vec<f64> {
        let d = WeibullDist::new(scale, shape).unwrap();
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn censored_fit_recovers_parameters() {
        let x = sample(2.0, 1.0, 10_000, 1);
        let fit = fit_censored_weibull(&x, 0.9).unwrap();
        assert!((fit.shape - 2.0).abs() < 0.1, "{fit:?}");
        assert!((fit.scale - 1.0).abs() < 0.05, "{fit:?}");
        assert_eq!(fit.n_censored + fit.n_noncensored, 10_000);
        assert_eq!(fit.shift, 0.0);
    }

    #[test]
    fn no_censoring_matches_plain_mle() {
        let x = sample(1.7, 3.0, 5_000, 2);
        let c = fit_censored_weibull(&x, 0.0).unwrap();
        let p = fit_weibull(&x).unwrap();
        assert_eq!(c.n_censored, 0);
        assert!((c.shape - p.shape).abs() < 1e-6, "{c:?} {p:?}");
        assert!((c.scale - p.scale).abs() < 1e-6, "{c:?} {p:?}");
        assert!((c.loglik - p.loglik).abs() < 1e-6);
    }

    #[test]
    fn all_censored_is_an_error() {
        let x = sample(2.0, 1.0, 100, 3);
        assert!(matches!(
            fit_censored_weibull(&x, 1.0),
            Err(Error::TooFewExceedances { .. })
        ));
    }

    #[test]
    fn censored_optimum_beats_perturbations() {
        let x = sample(2.0, 1.0, 3_000, 4);
        let fit = fit_censored_weibull(&x, 0.9).unwrap();
        let s = sorted(&x);
        let cut = s.partition_point(|&v| v < fit.threshold);
        let mut rng = seeded_rng(5);
        for _ in 0..100 {
            let w = Weibull {
                shape: fit.shape * (1.0 + rng.random_range(-0.1..0.1)),
                scale: fit.scale * (1.0 + rng.random_range(-0.1..0.1)),
                shift: 0.0,
            };
            assert!(censored_loglik(&w, &s[cut..], cut, fit.threshold) <= fit.loglik + 1e-9);
        }
    }

    #[test]
    fn shifted_support() {
        let x: Vec<f64> = sample(2.0, 1.0, 2_000, 6).iter().map(|v| v - 5.0).collect();
        let fit = fit_censored_weibull(&x, 0.5).unwrap();
        let min = x.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((fit.shift - (min - 1e-6)).abs() < 1e-12);
        let w = fit.weibull();
        assert_eq!(w.cdf(min - 1e-3), 0.0);
        assert!(w.cdf(fit.threshold) > 0.0);
    }

    #[test]
    fn exponential_is_shape_one() {
        let x = sample(1.0, 2.0, 10_000, 7);
        let fit = fit_weibull(&x).unwrap();
        assert!((fit.shape - 1.0).abs() < 0.05 && (fit.scale - 2.0).abs() < 0.1);
    }

    #[test]
    fn weibull_quantile_and_mass() {
        let w = Weibull { shape: 2.0, scale: 1.5, shift: 0.5 };
        for p in [0.1, 0.5, 0.99] {
            assert!((w.cdf(w.quantile(p)) - p).abs() < 1e-12);
        }
        let f = |x: f64| w.pdf(x);
        let mass = crate::quadrature::simpson_panels(&f, &[0.5, 1.0, 2.0, 4.0, 12.0], 1e-10);
        assert!((mass - 1.0).abs() < 1e-4);
    }
}
