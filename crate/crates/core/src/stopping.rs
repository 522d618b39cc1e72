//! Record-based conditional probabilities and stopping rules.
//!
//! Given the current record `r_d` and a fitted cdf `F` of the objective, the
//! next record exceeds `r` with probability `(1 - F(r)) / (1 - F(r_d))`, and
//! the wait for it is geometric with mean `1 / (1 - F(r_d))`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::distribution::UnivariateModel;
use crate::error::{Error, Result};
use crate::records::{extract_records, jitter_trace, JitterConfig, RecordSequence};
use crate::scalar::{format_round_trip, Scalar};
use crate::search::{SampleTrace, StopRule, TraceEntry};
use crate::stats::{iqr_sorted, sorted};
use crate::tail::{fit_family, Family, FittedCdf};

pub const DEFAULT_EPSILONS: [f64; 3] = [1e-4, 5e-4, 1e-3];

/// A conditional probability, flagged when the conditioning value lies at or
/// beyond the upper end of the fitted support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditional {
    pub value: f64,
    pub beyond_support: bool,
}

/// How "a record larger by `epsilon`" is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncrementRule {
    /// `(1 + epsilon) r_d`; meaningful for positive records.
    Relative,
    /// `r_d + epsilon |scale|`.
    Additive { scale: f64 },
}

impl IncrementRule {
    /// The relative rule, falling back to additive steps of `scale` for
    /// non-positive records.
    pub fn for_record(r_d: f64, scale: f64) -> Self {
        if r_d > 0.0 {
            IncrementRule::Relative
        } else {
            IncrementRule::Additive { scale }
        }
    }

    pub fn target(self, r_d: f64, epsilon: f64) -> f64 {
        match self {
            IncrementRule::Relative => (1.0 + epsilon) * r_d,
            IncrementRule::Additive { scale } => r_d + epsilon * scale.abs(),
        }
    }
}

fn survival_ratio<M: UnivariateModel + ?Sized>(f: &M, r_d: f64, r: f64) -> Conditional {
    let base = f.sf(r_d);
    if !(base > 0.0) {
        return Conditional {
            value: 0.0,
            beyond_support: true,
        };
    }
    if r == r_d {
        return Conditional {
            value: 1.0,
            beyond_support: false,
        };
    }
    Conditional {
        value: (f.sf(r) / base).clamp(0.0, 1.0),
        beyond_support: false,
    }
}

/// `P(R_{d+1} > (1 + epsilon) r_d | R_d = r_d)`.
pub fn record_increment_prob<M: UnivariateModel + ?Sized>(f: &M, r_d: f64, epsilon: f64) -> Conditional {
    record_increment_prob_with(f, r_d, epsilon, IncrementRule::Relative)
}

/// `P(R_{d+1} > target | R_d = r_d)` with the target set by `rule`.
pub fn record_increment_prob_with<M: UnivariateModel + ?Sized>(
    f: &M,
    r_d: f64,
    epsilon: f64,
    rule: IncrementRule,
) -> Conditional {
    survival_ratio(f, r_d, rule.target(r_d, epsilon))
}

/// Chance that the next record beats a reference value `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BeatReference {
    Prob(f64),
    /// The current record already exceeds the reference.
    AlreadyBeaten,
    /// `F(r_d) = 1` under the fitted model.
    BeyondSupport,
}

/// `(1 - F(m)) / (1 - F(r_d))` for `m >= r_d`.
pub fn beat_reference_prob<M: UnivariateModel + ?Sized>(f: &M, r_d: f64, m: f64) -> BeatReference {
    if r_d > m {
        return BeatReference::AlreadyBeaten;
    }
    let c = survival_ratio(f, r_d, m);
    if c.beyond_support {
        BeatReference::BeyondSupport
    } else {
        BeatReference::Prob(c.value)
    }
}

/// Mean of the geometric wait for the next record, `1 / (1 - F(r_d))`;
/// `+inf` when `F(r_d) = 1`.
pub fn expected_wait_next_record<M: UnivariateModel + ?Sized>(f: &M, r_d: f64) -> f64 {
    let s = f.sf(r_d);
    if s > 0.0 {
        1.0 / s
    } else {
        f64::INFINITY
    }
}

/// `P(Δ > j | R = r_d) = F(r_d)^j`.
pub fn wait_tail_prob<M: UnivariateModel + ?Sized>(f: &M, r_d: f64, j: u64) -> f64 {
    let p = f.cdf(r_d).clamp(0.0, 1.0);
    if j == 0 {
        return 1.0;
    }
    match i32::try_from(j) {
        Ok(e) => p.powi(e),
        Err(_) => p.powf(j as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingRow {
    /// Iteration at which the record was set.
    pub n_sims: u64,
    pub record: f64,
    /// One entry per configured epsilon.
    pub increment_probs: Vec<Conditional>,
    pub rule: IncrementRule,
    /// `None` when no reference value was given.
    pub beat_reference: Option<BeatReference>,
    pub expected_wait: f64,
}

impl StoppingRow {
    pub fn additive(&self) -> bool {
        matches!(self.rule, IncrementRule::Additive { .. })
    }
}

/// Which cdf a GPD fit contributes to a stopping report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TailConvention {
    /// Empirical body below the threshold, `(1 - p) + p H` above it.
    #[default]
    Composite,
    /// The exceedance law `H` alone, so `F = 0` below the threshold and
    /// waits are counted in exceedances rather than draws.
    TailOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingReport {
    pub family: Family,
    pub convention: TailConvention,
    pub epsilons: Vec<f64>,
    pub reference: Option<f64>,
    /// Scale of additive increments, the interquartile range of the trace.
    pub additive_scale: f64,
    pub rows: Vec<StoppingRow>,
}

impl StoppingReport {
    /// Whether any row used the additive fallback.
    pub fn used_additive(&self) -> bool {
        self.rows.iter().any(StoppingRow::additive)
    }

    /// Column `i` of the increment probabilities.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.increment_probs[i].value).collect()
    }
}

/// Per-record statistics under one fitted model.
pub fn stopping_row<M: UnivariateModel + ?Sized>(
    f: &M,
    n_sims: u64,
    record: f64,
    epsilons: &[f64],
    reference: Option<f64>,
    additive_scale: f64,
) -> StoppingRow {
    let rule = IncrementRule::for_record(record, additive_scale);
    StoppingRow {
        n_sims,
        record,
        increment_probs: epsilons
            .iter()
            .map(|&e| record_increment_prob_with(f, record, e, rule))
            .collect(),
        rule,
        beat_reference: reference.map(|m| beat_reference_prob(f, record, m)),
        expected_wait: expected_wait_next_record(f, record),
    }
}

fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::invalid("at least one epsilon is required"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return Err(Error::invalid(format!("epsilon {e} must be finite and non-negative")));
    }
    Ok(())
}

/// One report per fitted model, one row per record, GPD fits evaluated
/// as composites.
pub fn build_stopping_report(
    records: &RecordSequence,
    fits: &[FittedCdf],
    epsilons: &[f64],
    reference: Option<f64>,
    additive_scale: f64,
) -> Result<Vec<StoppingReport>> {
    build_stopping_report_with(records, fits, epsilons, reference, additive_scale, TailConvention::Composite)
}

pub fn build_stopping_report_with(
    records: &RecordSequence,
    fits: &[FittedCdf],
    epsilons: &[f64],
    reference: Option<f64>,
    additive_scale: f64,
    convention: TailConvention,
) -> Result<Vec<StoppingReport>> {
    check_epsilons(epsilons)?;
    if records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(fits
        .iter()
        .map(|fit| {
            let tail;
            let model: &dyn UnivariateModel = match (convention, fit) {
                (TailConvention::TailOnly, FittedCdf::Gpd(g)) => {
                    tail = g.fit.gpd();
                    &tail
                }
                _ => fit,
            };
            StoppingReport {
                family: fit.family(),
                convention,
                epsilons: epsilons.to_vec(),
                reference,
                additive_scale,
                rows: records
                    .records()
                    .iter()
                    .map(|r| stopping_row(model, r.time, r.value, epsilons, reference, additive_scale))
                    .collect(),
            }
        })
        .collect())
}

/// Header `n_sims,record,p_eps_1,...,p_eps_m,beat_reference,expected_wait`.
pub fn stopping_header(m: usize) -> String {
    let mut h = String::from("n_sims,record");
    for i in 1..=m {
        let _ = write!(h, ",p_eps_{i}");
    }
    h.push_str(",beat_reference,expected_wait");
    h
}

/// CSV in the column order of [`stopping_header`]. The reference column
/// holds `>1` once the record beats the reference and `n/a` without one;
/// an unbounded wait prints as `inf`.
pub fn write_stopping_csv(report: &StoppingReport) -> String {
    let mut out = stopping_header(report.epsilons.len());
    out.push('\n');
    for row in &report.rows {
        let _ = write!(out, "{},{}", row.n_sims, format_round_trip(row.record));
        for p in &row.increment_probs {
            let _ = write!(out, ",{}", format_round_trip(p.value));
        }
        let beat = match row.beat_reference {
            None => "n/a".to_string(),
            Some(BeatReference::AlreadyBeaten) => ">1".to_string(),
            Some(BeatReference::BeyondSupport) => format_round_trip(0.0),
            Some(BeatReference::Prob(p)) => format_round_trip(p),
        };
        let wait = if row.expected_wait.is_infinite() {
            "inf".to_string()
        } else {
            format_round_trip(row.expected_wait)
        };
        let _ = writeln!(out, ",{beat},{wait}");
    }
    out
}

/// Which of the two conditions must hold to stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StopCriterion {
    /// Small increment probability and a long expected wait.
    #[default]
    Both,
    IncrementOnly,
    WaitOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingPolicy {
    pub epsilon: f64,
    pub delta: f64,
    pub max_expected_wait: f64,
    pub check_every: usize,
    pub criterion: StopCriterion,
}

impl Default for StoppingPolicy {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            delta: 0.01,
            max_expected_wait: 1e6,
            check_every: 1000,
            criterion: StopCriterion::Both,
        }
    }
}

impl StoppingPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("stopping epsilon must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("stopping delta must be in (0, 1)"));
        }
        if !(self.max_expected_wait > 0.0) {
            return Err(Error::invalid("max expected wait must be positive"));
        }
        if self.check_every == 0 {
            return Err(Error::invalid("check_every must be positive"));
        }
        Ok(())
    }
}

/// The two quantities a stopping decision looks at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatestRecordStats {
    pub increment_prob: f64,
    pub expected_wait: f64,
}

pub fn should_stop(policy: &StoppingPolicy, stats: &LatestRecordStats) -> bool {
    let small_gain = stats.increment_prob < policy.delta;
    let long_wait = stats.expected_wait > policy.max_expected_wait;
    match policy.criterion {
        StopCriterion::Both => small_gain && long_wait,
        StopCriterion::IncrementOnly => small_gain,
        StopCriterion::WaitOnly => long_wait,
    }
}

/// Online rule for the k-DPP search: every `check_every` iterations the
/// trace is jittered, a tail model fitted, and the policy applied to the
/// latest record.
#[derive(Debug, Clone)]
pub struct RecordStoppingRule {
    pub policy: StoppingPolicy,
    pub family: Family,
    pub threshold_quantile: f64,
    pub jitter: JitterConfig,
    /// Set by the most recent successful check.
    pub last: Option<LatestRecordStats>,
}

impl RecordStoppingRule {
    pub fn new(policy: StoppingPolicy, family: Family, threshold_quantile: f64, jitter: JitterConfig) -> Result<Self> {
        policy.validate()?;
        jitter.validate()?;
        if !matches!(family, Family::Gpd | Family::CensWeibull) {
            return Err(Error::invalid(format!("stopping rule needs a tail family, got {family}")));
        }
        Ok(Self {
            policy,
            family,
            threshold_quantile,
            jitter,
            last: None,
        })
    }

    /// Latest-record statistics for a trace, or `None` while the tail fit
    /// is not yet possible.
    pub fn evaluate(&self, trace: &SampleTrace<f64>) -> Option<LatestRecordStats> {
        let jittered = jitter_trace(trace, &self.jitter).ok()?;
        let values = jittered.trace.values();
        let fit = fit_family(self.family, &values, self.threshold_quantile).ok()?;
        let records = extract_records(&jittered.trace).ok()?;
        let r_d = records.last().value;
        let rule = IncrementRule::for_record(r_d, iqr_sorted(&sorted(&values)));
        Some(LatestRecordStats {
            increment_prob: record_increment_prob_with(&fit, r_d, self.policy.epsilon, rule).value,
            expected_wait: expected_wait_next_record(&fit, r_d),
        })
    }
}

impl<T: Scalar> StopRule<T> for RecordStoppingRule {
    fn check_every(&self) -> usize {
        self.policy.check_every
    }

    fn should_stop(&mut self, trace: &SampleTrace<T>) -> bool {
        let entries: Vec<TraceEntry<f64>> = trace
            .entries()
            .iter()
            .map(|e| TraceEntry {
                iteration: e.iteration,
                log_det: e.log_det.to_f64_lossy(),
                subset: Vec::new(),
            })
            .collect();
        let Ok(trace) = SampleTrace::from_entries(entries) else {
            return false;
        };
        self.last = self.evaluate(&trace);
        self.last.is_some_and(|s| should_stop(&self.policy, &s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Exponential;
    use crate::tail::Gpd;

    /// A model with `F(r) = p` at every `r`.
    struct Flat(f64);

    impl UnivariateModel for Flat {
        fn cdf(&self, _: f64) -> f64 {
            self.0
        }
        fn pdf(&self, _: f64) -> f64 {
            0.0
        }
        fn quantile(&self, _: f64) -> f64 {
            0.0
        }
    }

    const E: Exponential = Exponential::STANDARD;

    #[test]
    fn increment_probabilities() {
        assert_eq!(record_increment_prob(&E, 10.0, 0.0).value, 1.0);
        let p = record_increment_prob(&E, 10.0, 0.1).value;
        assert!((p - (-1.0_f64).exp()).abs() < 1e-12);
        let g = Gpd { mu: 0.0, sigma: 1.0, xi: -0.5 };
        let c = record_increment_prob(&g, 2.5, 0.001);
        assert!(c.beyond_support && c.value == 0.0);
    }

    #[test]
    fn increment_non_increasing_in_epsilon() {
        let g = Gpd { mu: 1.0, sigma: 0.7, xi: 0.2 };
        for r in [1.5, 3.0, 10.0] {
            let mut prev = 1.0;
            for i in 0..200 {
                let p = record_increment_prob(&g, r, f64::from(i) * 0.01).value;
                assert!(p <= prev);
                prev = p;
            }
        }
    }

    #[test]
    fn increment_decreasing_across_exponential_records() {
        for eps in DEFAULT_EPSILONS {
            let probs: Vec<f64> = (1..50).map(|r| record_increment_prob(&E, f64::from(r) * 0.5, eps).value).collect();
            assert!(probs.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn additive_fallback_for_non_positive_records() {
        let rule = IncrementRule::for_record(-3.0, 2.0);
        assert_eq!(rule, IncrementRule::Additive { scale: 2.0 });
        assert_eq!(rule.target(-3.0, 0.5), -2.0);
        assert_eq!(IncrementRule::for_record(3.0, 2.0), IncrementRule::Relative);
        let shifted = Exponential { rate: 1.0 };
        let c = record_increment_prob_with(&shifted, -1.0, 0.5, rule);
        assert_eq!(c.value, 1.0);
    }

    #[test]
    fn reference_probabilities() {
        assert_eq!(beat_reference_prob(&E, 1.0, 1.0), BeatReference::Prob(1.0));
        assert_eq!(beat_reference_prob(&E, 3.0, 2.0), BeatReference::AlreadyBeaten);
        let BeatReference::Prob(p) = beat_reference_prob(&E, 1.0, 2.0) else { panic!() };
        assert!((p - (-1.0_f64).exp()).abs() < 1e-12);
        let g = Gpd { mu: 0.0, sigma: 1.0, xi: -1.0 / 3.0 };
        assert_eq!(beat_reference_prob(&g, 3.0, 4.0), BeatReference::BeyondSupport);
    }

    #[test]
    fn waiting_times() {
        assert_eq!(expected_wait_next_record(&Flat(0.5), 0.0), 2.0);
        assert_eq!(expected_wait_next_record(&Flat(0.0), 0.0), 1.0);
        assert!((expected_wait_next_record(&Flat(0.99), 0.0) - 100.0).abs() < 1e-9);
        assert_eq!(expected_wait_next_record(&Flat(1.0), 0.0), f64::INFINITY);
        assert_eq!(wait_tail_prob(&Flat(0.5), 0.0, 0), 1.0);
        assert_eq!(wait_tail_prob(&Flat(0.5), 0.0, 2), 0.25);
        assert!((wait_tail_prob(&Flat(0.9), 0.0, 10) - 0.348_678_440_1).abs() < 1e-10);
    }

    #[test]
    fn geometric_identity() {
        for r in [0.1, 1.0, 3.0, 6.9] {
            assert!(E.cdf(r) <= 0.999);
            let mut total = 0.0;
            let mut j = 0;
            loop {
                let t = wait_tail_prob(&E, r, j);
                total += t;
                if t < 1e-18 {
                    break;
                }
                j += 1;
            }
            let want = expected_wait_next_record(&E, r);
            assert!((total - want).abs() < 1e-8 * want.max(1.0), "r={r}: {total} vs {want}");
        }
    }

    #[test]
    fn conjunction_truth_table() {
        let p = StoppingPolicy {
            max_expected_wait: 10_000.0,
            ..StoppingPolicy::default()
        };
        let s = |increment_prob, expected_wait| LatestRecordStats {
            increment_prob,
            expected_wait,
        };
        assert!(should_stop(&p, &s(0.0, f64::INFINITY)));
        assert!(!should_stop(&p, &s(0.9, 2.0)));
        assert!(!should_stop(&p, &s(0.001, 5_000.0)));
        assert!(!should_stop(&p, &s(0.5, 1e9)));
        let inc = StoppingPolicy { criterion: StopCriterion::IncrementOnly, ..p };
        assert!(should_stop(&inc, &s(0.001, 5_000.0)));
        let wait = StoppingPolicy { criterion: StopCriterion::WaitOnly, ..p };
        assert!(should_stop(&wait, &s(0.5, 1e9)));
        assert_eq!(should_stop(&p, &s(0.0, 1e5)), should_stop(&p, &s(0.0, 1e5)));
    }

    #[test]
    fn policy_validation() {
        assert!(StoppingPolicy::default().validate().is_ok());
        assert!(StoppingPolicy { delta: 1.0, ..Default::default() }.validate().is_err());
        assert!(StoppingPolicy { check_every: 0, ..Default::default() }.validate().is_err());
    }

    fn exp_fit() -> FittedCdf {
        FittedCdf::Exponential(E)
    }

    #[test]
    fn single_record_report() {
        let seq = RecordSequence::from_values(&[2.0, 1.0, 0.5]).unwrap();
        let reports = build_stopping_report(&seq, &[exp_fit()], &DEFAULT_EPSILONS, None, 1.0).unwrap();
        let r = &reports[0];
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].n_sims, 1);
        assert!((r.rows[0].expected_wait - 2.0_f64.exp()).abs() < 1e-9);
        for (i, &e) in DEFAULT_EPSILONS.iter().enumerate() {
            assert!((r.rows[0].increment_probs[i].value - (-2.0 * e).exp()).abs() < 1e-12);
        }
        let csv = write_stopping_csv(r);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n_sims,record,p_eps_1,p_eps_2,p_eps_3,beat_reference,expected_wait");
        assert!(lines.next().unwrap().contains(",n/a,"));
    }

    #[test]
    fn report_matches_hand_formulas() {
        let g = Gpd { mu: 0.0, sigma: 1.3, xi: 0.15 };
        let values = [0.2, 0.1, 0.9, 0.4, 1.7, 1.6, 2.2, 5.0, 4.0];
        let seq = RecordSequence::from_values(&values).unwrap();
        let fit = FittedCdf::Exponential(E);
        let reports = build_stopping_report(&seq, &[fit], &[0.01, 0.1], Some(3.0), 1.0).unwrap();
        for row in &reports[0].rows {
            let r = row.record;
            for (k, &e) in [0.01, 0.1].iter().enumerate() {
                let want = (-(e * r)).exp();
                assert!((row.increment_probs[k].value - want).abs() < 1e-10);
            }
            match row.beat_reference.unwrap() {
                BeatReference::Prob(p) => assert!((p - (-(3.0 - r)).exp()).abs() < 1e-10),
                BeatReference::AlreadyBeaten => assert!(r > 3.0),
                BeatReference::BeyondSupport => panic!(),
            }
        }
        let last = reports[0].rows.last().unwrap();
        assert_eq!(last.beat_reference, Some(BeatReference::AlreadyBeaten));
        assert!(write_stopping_csv(&reports[0]).lines().last().unwrap().contains(",>1,"));
        let gpd_row = stopping_row(&g, 1, 2.0, &[0.1], None, 1.0);
        let sf = |y: f64| (1.0 + 0.15 * y / 1.3_f64).powf(-1.0 / 0.15);
        assert!((gpd_row.increment_probs[0].value - sf(2.2) / sf(2.0)).abs() < 1e-10);
        assert!((gpd_row.expected_wait - 1.0 / sf(2.0)).abs() < 1e-8);
    }

    #[test]
    fn tail_only_convention() {
        let mut rng = crate::rng::seeded_rng(5);
        let values: Vec<f64> = (0..2_000)
            .map(|_| {
                let u: f64 = rand::Rng::random(&mut rng);
                -(1.0 - u).ln()
            })
            .collect();
        let fit = crate::tail::fit_family(Family::Gpd, &values, 0.9).unwrap();
        let FittedCdf::Gpd(g) = &fit else { panic!() };
        let (mu, p) = (g.fit.mu, g.tail_fraction());
        let seq = RecordSequence::from_values(&values).unwrap();
        let fits = [fit.clone()];
        let comp = build_stopping_report(&seq, &fits, &[0.01], None, 1.0).unwrap();
        let tail = build_stopping_report_with(&seq, &fits, &[0.01], None, 1.0, TailConvention::TailOnly).unwrap();
        assert_eq!(tail[0].convention, TailConvention::TailOnly);
        for (c, t) in comp[0].rows.iter().zip(&tail[0].rows) {
            if c.record > mu {
                assert!((c.increment_probs[0].value - t.increment_probs[0].value).abs() < 1e-12);
                assert!((c.expected_wait * p - t.expected_wait).abs() < 1e-9 * t.expected_wait);
            } else {
                assert_eq!(t.expected_wait, 1.0);
            }
        }
        let col = tail[0].column(0);
        assert!(col.windows(2).all(|w| w[1] <= w[0]) || g.fit.xi > 0.0);
    }

    #[test]
    fn infinite_wait_sentinel() {
        let g = FittedCdf::Exponential(Exponential { rate: 1e6 });
        let seq = RecordSequence::from_values(&[1.0]).unwrap();
        let reports = build_stopping_report(&seq, &[g], &[0.1], None, 1.0).unwrap();
        assert!(reports[0].rows[0].expected_wait.is_infinite());
        assert!(write_stopping_csv(&reports[0]).trim_end().ends_with(",inf"));
    }

    #[test]
    fn online_rule_stops_on_a_plateau() {
        let mut trace = SampleTrace::<f64>::new();
        for i in 0..5_000u32 {
            let v = f64::from(i % 97) * 0.01;
            trace.push_next(v.min(0.9), vec![]);
        }
        let jitter = JitterConfig::new(1e-8, 1).unwrap();
        let policy = StoppingPolicy::default();
        let mut rule = RecordStoppingRule::new(policy, Family::Gpd, 0.9, jitter).unwrap();
        let stop = StopRule::<f64>::should_stop(&mut rule, &trace);
        let stats = rule.last.unwrap();
        assert_eq!(stop, stats.increment_prob < 0.01 && stats.expected_wait > 1e6);
        let mut short = SampleTrace::<f64>::new();
        for i in 0..20 {
            short.push_next(f64::from(i), vec![]);
        }
        assert!(!StopRule::<f64>::should_stop(&mut rule, &short));
        assert!(rule.last.is_none());
    }
}
