//! Parametric models for the upper tail of the objective distribution.
//!
//! Two tail models are fitted: a Generalized Pareto distribution over a
//! high sample quantile (peaks over threshold), and a Weibull whose
//! likelihood treats everything below the threshold as left-censored. Plain
//! Weibull and Log-Normal fits to the whole sample serve as comparators.

mod empirical;
mod gpd;
mod lognormal;
mod optimize;
mod weibull;

pub use crate::distribution::{Exponential, UnivariateModel};
pub use empirical::Empirical;
pub use gpd::{fit_gpd_exceedances, fit_gpd_pot, pwm_estimates, Gpd, GpdFit, MIN_EXCEEDANCES, XI_ZERO};
pub use lognormal::{fit_lognormal, LogNormal, LogNormalFit};
pub use optimize::{Minimum, NelderMead};
pub use weibull::{fit_censored_weibull, fit_weibull, CensWeibullFit, Weibull, WeibullFit};

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::format_round_trip;
use crate::stats::{sorted, variance, Kde};

/// Default threshold quantile for both tail models.
pub const DEFAULT_THRESHOLD_QUANTILE: f64 = 0.9;

/// Fewest uncensored points accepted by the censored Weibull fit.
pub const MIN_UNCENSORED: usize = 30;

pub const POSITIVE_SHIFT_MARGIN: f64 = 1e-6;

/// Grid size for density-overlay exports.
pub const DENSITY_GRID: usize = 512;

pub const QQ_HEADER: &str = "theoretical,empirical";
pub const DENSITY_HEADER: &str = "x,empirical_density,fitted_density";

/// Offset making a sorted sample strictly positive: `min - 1e-6` when the
/// minimum is not already positive, zero otherwise.
pub(crate) fn positive_shift(sorted: &[f64]) -> f64 {
    if sorted[0] <= 0.0 {
        sorted[0] - POSITIVE_SHIFT_MARGIN
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "gpd")]
    Gpd,
    #[serde(rename = "cens_weibull")]
    CensWeibull,
    #[serde(rename = "weibull")]
    Weibull,
    #[serde(rename = "lognormal")]
    LogNormal,
    #[serde(rename = "empirical")]
    Empirical,
    #[serde(rename = "exponential")]
    Exponential,
}

impl Family {
    pub const ALL_FITTED: [Family; 4] = [Family::Gpd, Family::CensWeibull, Family::Weibull, Family::LogNormal];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Gpd => "gpd",
            Family::CensWeibull => "cens_weibull",
            Family::Weibull => "weibull",
            Family::LogNormal => "lognormal",
            Family::Empirical => "empirical",
            Family::Exponential => "exponential",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "gpd" => Family::Gpd,
            "cens_weibull" | "censored_weibull" => Family::CensWeibull,
            "weibull" => Family::Weibull,
            "lognormal" | "log_normal" => Family::LogNormal,
            "empirical" => Family::Empirical,
            "exponential" => Family::Exponential,
            other => return Err(Error::invalid(format!("unknown family {other:?}"))),
        })
    }
}

/// GPD above the threshold spliced onto the empirical distribution below it:
/// `F(r) = (1 - p) + p H(r)` for `r > mu`, where `p` is the exceedance
/// fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct GpdComposite {
    pub fit: GpdFit,
    body: Empirical,
    /// Kernel-density mass below the threshold, used to renormalize the
    /// body density.
    body_mass: f64,
}

impl GpdComposite {
    pub fn new(fit: GpdFit, sample: &[f64]) -> Result<Self> {
        if sample.len() != fit.n_total {
            return Err(Error::invalid(format!(
                "GPD fit was made on {} values, got {}",
                fit.n_total,
                sample.len()
            )));
        }
        let body = Empirical::new(sample);
        let body_mass = body.kde().cdf(fit.mu);
        Ok(Self { fit, body, body_mass })
    }

    pub fn tail_fraction(&self) -> f64 {
        self.fit.tail_fraction()
    }
}

impl UnivariateModel for GpdComposite {
    fn cdf(&self, r: f64) -> f64 {
        if r <= self.fit.mu {
            self.body.cdf(r)
        } else {
            let p = self.tail_fraction();
            (1.0 - p) + p * self.fit.gpd().cdf(r)
        }
    }

    fn sf(&self, r: f64) -> f64 {
        if r <= self.fit.mu {
            1.0 - self.body.cdf(r)
        } else {
            self.tail_fraction() * self.fit.gpd().sf(r)
        }
    }

    fn pdf(&self, r: f64) -> f64 {
        let p = self.tail_fraction();
        if r <= self.fit.mu {
            if self.body_mass > 0.0 {
                (1.0 - p) * self.body.kde().pdf(r) / self.body_mass
            } else {
                0.0
            }
        } else {
            p * self.fit.gpd().pdf(r)
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        let p = self.tail_fraction();
        if q <= 1.0 - p {
            self.body.quantile(q)
        } else {
            self.fit.gpd().quantile((q - (1.0 - p)) / p)
        }
    }
}

/// A fitted (or reference) distribution for the objective values.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedCdf {
    Gpd(Arc<GpdComposite>),
    CensWeibull(CensWeibullFit),
    Weibull(WeibullFit),
    LogNormal(LogNormalFit),
    Empirical(Empirical),
    Exponential(Exponential),
}

impl FittedCdf {
    pub fn family(&self) -> Family {
        match self {
            FittedCdf::Gpd(_) => Family::Gpd,
            FittedCdf::CensWeibull(_) => Family::CensWeibull,
            FittedCdf::Weibull(_) => Family::Weibull,
            FittedCdf::LogNormal(_) => Family::LogNormal,
            FittedCdf::Empirical(_) => Family::Empirical,
            FittedCdf::Exponential(_) => Family::Exponential,
        }
    }

    /// Tail threshold in data units, for the two tail models.
    pub fn threshold(&self) -> Option<f64> {
        match self {
            FittedCdf::Gpd(g) => Some(g.fit.mu),
            FittedCdf::CensWeibull(w) => Some(w.threshold),
            _ => None,
        }
    }

    fn model(&self) -> &dyn UnivariateModel {
        match self {
            FittedCdf::Gpd(g) => g.as_ref(),
            FittedCdf::CensWeibull(w) => w,
            FittedCdf::Weibull(w) => w,
            FittedCdf::LogNormal(l) => l,
            FittedCdf::Empirical(e) => e,
            FittedCdf::Exponential(e) => e,
        }
    }

    /// Summary for serialization.
    pub fn report(&self, threshold_quantile: Option<f64>) -> FitReport {
        let mut parameters = BTreeMap::new();
        let (shift, loglik, n_used, n_total) = match self {
            FittedCdf::Gpd(g) => {
                parameters.insert("mu".into(), g.fit.mu);
                parameters.insert("sigma".into(), g.fit.sigma);
                parameters.insert("xi".into(), g.fit.xi);
                (0.0, Some(g.fit.loglik), g.fit.n_exceed, g.fit.n_total)
            }
            FittedCdf::CensWeibull(w) => {
                parameters.insert("shape".into(), w.shape);
                parameters.insert("scale".into(), w.scale);
                let n = w.n_noncensored + w.n_censored;
                (w.shift, Some(w.loglik), w.n_noncensored, n)
            }
            FittedCdf::Weibull(w) => {
                parameters.insert("shape".into(), w.shape);
                parameters.insert("scale".into(), w.scale);
                (w.shift, Some(w.loglik), w.n, w.n)
            }
            FittedCdf::LogNormal(l) => {
                parameters.insert("mu".into(), l.mu);
                parameters.insert("sigma".into(), l.sigma);
                (l.shift, Some(l.loglik), l.n, l.n)
            }
            FittedCdf::Empirical(e) => (0.0, None, e.len(), e.len()),
            FittedCdf::Exponential(e) => {
                parameters.insert("rate".into(), e.rate);
                (0.0, None, 0, 0)
            }
        };
        FitReport {
            family: self.family(),
            parameters,
            threshold: self.threshold(),
            threshold_quantile: threshold_quantile.filter(|_| self.threshold().is_some()),
            shift,
            loglik,
            n_used,
            n_total,
            jitter_sigma: None,
            jitter_seed: None,
            run_id: None,
        }
    }

    /// Rebuilds a fit from its report. `sample` is needed by the families
    /// that carry the data (GPD body, empirical).
    pub fn from_report(report: &FitReport, sample: &[f64]) -> Result<Self> {
        let p = |name: &str| {
            report
                .parameters
                .get(name)
                .copied()
                .ok_or_else(|| Error::invalid(format!("{} report lacks parameter {name}", report.family)))
        };
        let loglik = report.loglik.unwrap_or(f64::NAN);
        let threshold = || {
            report
                .threshold
                .ok_or_else(|| Error::invalid(format!("{} report lacks a threshold", report.family)))
        };
        Ok(match report.family {
            Family::Gpd => {
                let fit = GpdFit {
                    mu: p("mu")?,
                    sigma: p("sigma")?,
                    xi: p("xi")?,
                    n_exceed: report.n_used,
                    n_total: report.n_total,
                    loglik,
                };
                FittedCdf::Gpd(Arc::new(GpdComposite::new(fit, sample)?))
            }
            Family::CensWeibull => FittedCdf::CensWeibull(CensWeibullFit {
                shape: p("shape")?,
                scale: p("scale")?,
                shift: report.shift,
                threshold: threshold()?,
                n_noncensored: report.n_used,
                n_censored: report.n_total - report.n_used,
                loglik,
            }),
            Family::Weibull => FittedCdf::Weibull(WeibullFit {
                shape: p("shape")?,
                scale: p("scale")?,
                shift: report.shift,
                n: report.n_used,
                loglik,
            }),
            Family::LogNormal => FittedCdf::LogNormal(LogNormalFit {
                mu: p("mu")?,
                sigma: p("sigma")?,
                shift: report.shift,
                n: report.n_used,
                loglik,
            }),
            Family::Empirical => {
                if sample.is_empty() {
                    return Err(Error::EmptyTrace);
                }
                FittedCdf::Empirical(Empirical::new(sample))
            }
            Family::Exponential => FittedCdf::Exponential(Exponential { rate: p("rate")? }),
        })
    }
}

impl UnivariateModel for CensWeibullFit {
    fn cdf(&self, x: f64) -> f64 {
        self.weibull().cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.weibull().sf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.weibull().pdf(x)
    }
    fn quantile(&self, p: f64) -> f64 {
        self.weibull().quantile(p)
    }
}

impl UnivariateModel for WeibullFit {
    fn cdf(&self, x: f64) -> f64 {
        self.weibull().cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.weibull().sf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.weibull().pdf(x)
    }
    fn quantile(&self, p: f64) -> f64 {
        self.weibull().quantile(p)
    }
}

impl UnivariateModel for LogNormalFit {
    fn cdf(&self, x: f64) -> f64 {
        self.lognormal().cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.lognormal().sf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.lognormal().pdf(x)
    }
    fn quantile(&self, p: f64) -> f64 {
        self.lognormal().quantile(p)
    }
}

impl UnivariateModel for FittedCdf {
    fn cdf(&self, x: f64) -> f64 {
        self.model().cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.model().sf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.model().pdf(x)
    }
    fn quantile(&self, p: f64) -> f64 {
        self.model().quantile(p)
    }
}

/// `F(r)` of a fitted model.
pub fn tail_cdf(fit: &FittedCdf, r: f64) -> f64 {
    fit.cdf(r)
}

/// Serializable summary of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub parameters: BTreeMap<String, f64>,
    pub threshold: Option<f64>,
    pub threshold_quantile: Option<f64>,
    /// Subtracted from the data before fitting.
    pub shift: f64,
    pub loglik: Option<f64>,
    pub n_used: usize,
    pub n_total: usize,
    pub jitter_sigma: Option<f64>,
    pub jitter_seed: Option<u64>,
    pub run_id: Option<String>,
}

/// Fits one family. Tail families use `threshold_quantile`.
pub fn fit_family(family: Family, values: &[f64], threshold_quantile: f64) -> Result<FittedCdf> {
    if values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(match family {
        Family::Gpd => {
            let fit = fit_gpd_pot(values, threshold_quantile)?;
            FittedCdf::Gpd(Arc::new(GpdComposite::new(fit, values)?))
        }
        Family::CensWeibull => FittedCdf::CensWeibull(fit_censored_weibull(values, threshold_quantile)?),
        Family::Weibull => FittedCdf::Weibull(fit_weibull(values)?),
        Family::LogNormal => FittedCdf::LogNormal(fit_lognormal(values)?),
        Family::Empirical => FittedCdf::Empirical(Empirical::new(values)),
        Family::Exponential => {
            return Err(Error::invalid("the exponential family is a fixed reference model, not fitted"))
        }
    })
}

/// Uncensored Weibull and Log-Normal fits to the whole sample.
pub fn fit_comparators(values: &[f64]) -> Result<Vec<FittedCdf>> {
    if values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let var = variance(values);
    if var < 1e-12 {
        return Err(Error::DegenerateSample { variance: var });
    }
    Ok(vec![
        FittedCdf::Weibull(fit_weibull(values)?),
        FittedCdf::LogNormal(fit_lognormal(values)?),
    ])
}

/// `(F^-1((i - 0.5)/m), x_(i))` pairs. With `upper_tail_only`, only pairs
/// whose sample value exceeds the fit threshold are kept.
pub fn qq_points(fit: &FittedCdf, values: &[f64], upper_tail_only: bool) -> Vec<(f64, f64)> {
    let s = sorted(values);
    let m = s.len() as f64;
    let cut = match (upper_tail_only, fit.threshold()) {
        (true, Some(t)) => s.partition_point(|&x| x <= t),
        _ => 0,
    };
    s.iter()
        .enumerate()
        .skip(cut)
        .map(|(i, &x)| (fit.quantile((i as f64 + 0.5) / m), x))
        .collect()
}

/// Kernel density of the sample next to the fitted density on an evenly
/// spaced grid over the sample range.
pub fn density_overlay(fit: &FittedCdf, values: &[f64], points: usize) -> Vec<(f64, f64, f64)> {
    if values.is_empty() || points == 0 {
        return Vec::new();
    }
    let kde = Kde::silverman(values);
    let s = sorted(values);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
    (0..points)
        .map(|i| {
            let x = if i + 1 == points { hi } else { lo + step * i as f64 };
            (x, kde.pdf(x), fit.pdf(x))
        })
        .collect()
}

pub fn write_qq_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from(QQ_HEADER);
    out.push('\n');
    for &(t, e) in points {
        let _ = writeln!(out, "{},{}", format_round_trip(t), format_round_trip(e));
    }
    out
}

pub fn write_density_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from(DENSITY_HEADER);
    out.push('\n');
    for &(x, e, f) in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_round_trip(x),
            format_round_trip(e),
            format_round_trip(f)
        );
    }
    out
}
