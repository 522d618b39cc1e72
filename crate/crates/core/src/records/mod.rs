//! Records of an observation sequence and the classical record-model laws.
//!
//! Objective values from repeated sampling are treated as an i.i.d. sequence.
//! Discrete support produces ties, so traces are jittered with tiny Gaussian
//! noise before strict running maxima are extracted.

mod laws;

pub use laws::{
    expected_record_count, inter_record_time_pmf, inter_record_time_pmf_exact,
    inter_record_time_tail, inter_record_time_tail_exact, record_count_distribution,
    record_count_pmf, record_count_pmf_asymptotic, record_count_pmf_exact,
    record_count_transition, record_time_pmf, record_time_pmf_exact, record_time_transition,
    record_value_cdf, record_value_pdf, record_value_sf, record_value_transition_pdf,
    stirling_first_row, EXACT_GAP_LIMIT, STIRLING_LIMIT,
};

use std::fmt::Write as _;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::scalar::format_round_trip;
use crate::search::{SampleTrace, TraceEntry};

pub const RECORDS_HEADER: &str = "d,record_value,record_time,gap,increment,subset";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterConfig {
    /// Standard deviation of the additive noise.
    pub sigma: f64,
    pub seed: u64,
}

impl JitterConfig {
    pub const DEFAULT_SIGMA: f64 = 1e-8;

    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let cfg = Self { sigma, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("jitter sigma {} must be positive", self.sigma)));
        }
        Ok(())
    }
}

impl Default for JitterConfig {
    fn default() -> Self {
        Self {
            sigma: Self::DEFAULT_SIGMA,
            seed: 0,
        }
    }
}

/// A jittered trace together with the raw objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct JitteredTrace {
    pub trace: SampleTrace<f64>,
    pub original: Vec<f64>,
}

/// Adds i.i.d. `Normal(0, sigma^2)` noise to every value.
///
/// Floating-point rounding can still map two noisy values to the same double
/// (at magnitude 80 the spacing is ~1.4e-14, so a 1e-8 jitter over 1e5 draws
/// collides thousands of times). Colliding entries other than the earliest get
/// fresh noise until all values are distinct.
pub fn jitter_trace(trace: &SampleTrace<f64>, cfg: &JitterConfig) -> Result<JitteredTrace> {
    const MAX_REDRAWS: usize = 64;
    cfg.validate()?;
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let normal = Normal::new(0.0, cfg.sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = seeded_rng(cfg.seed);
    let original = trace.values();
    let mut values: Vec<f64> = original.iter().map(|&x| x + normal.sample(&mut rng)).collect();
    let mut rounds = 0;
    loop {
        let repeats = later_duplicates(&values);
        if repeats.is_empty() {
            break;
        }
        rounds += 1;
        if rounds > MAX_REDRAWS {
            return Err(Error::invalid(format!(
                "jitter sigma {} is too small to separate values of this magnitude",
                cfg.sigma
            )));
        }
        for i in repeats {
            values[i] = original[i] + normal.sample(&mut rng);
        }
    }
    let entries = trace
        .entries()
        .iter()
        .zip(values)
        .map(|(e, v)| TraceEntry {
            iteration: e.iteration,
            log_det: v,
            subset: e.subset.clone(),
        })
        .collect();
    Ok(JitteredTrace {
        trace: SampleTrace::from_entries(entries)?,
        original,
    })
}

/// Positions of values equal to some earlier value, in increasing order.
fn later_duplicates(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out: Vec<usize> = order
        .windows(2)
        .filter(|w| values[w[0]] == values[w[1]])
        .map(|w| w[1])
        .collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub value: f64,
    /// Iteration at which the record was set.
    pub time: u64,
    pub subset: Vec<usize>,
}

/// Upper records `R_0 < R_1 < ...` of a sequence, with their times.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSequence {
    records: Vec<Record>,
    total_observations: u64,
}

impl RecordSequence {
    /// Records of a plain value sequence, with times `1..=len`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mut trace = SampleTrace::new();
        for &v in values {
            trace.push_next(v, Vec::new());
        }
        extract_records(&trace)
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Number of records, including the trivial one.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_observations(&self) -> u64 {
        self.total_observations
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }

    pub fn times(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.time).collect()
    }

    /// `Δ_d = T_d - T_{d-1}` for `d >= 1`.
    pub fn gaps(&self) -> Vec<u64> {
        self.records.windows(2).map(|w| w[1].time - w[0].time).collect()
    }

    /// `J_0 = R_0` followed by `J_d = R_d - R_{d-1}`.
    pub fn increments(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.records.len());
        let mut prev = None;
        for r in &self.records {
            out.push(match prev {
                None => r.value,
                Some(p) => r.value - p,
            });
            prev = Some(r.value);
        }
        out
    }

    /// `N_n`: records among the first `n` observations.
    pub fn count_up_to(&self, n: u64) -> usize {
        self.records.partition_point(|r| r.time <= n)
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("record sequences are nonempty")
    }
}

/// Strict running maxima of the trace.
///
/// Any two equal values are rejected, since ties make the record times
/// ill-defined; jitter the trace first.
pub fn extract_records(trace: &SampleTrace<f64>) -> Result<RecordSequence> {
    let entries = trace.entries();
    if entries.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if let Some(e) = entries.iter().find(|e| e.log_det.is_nan()) {
        return Err(Error::invalid(format!("NaN value at iteration {}", e.iteration)));
    }
    let values: Vec<f64> = entries.iter().map(|e| e.log_det).collect();
    if let Some(&second) = later_duplicates(&values).first() {
        let first = values.iter().position(|&v| v == values[second]).expect("duplicate has a match");
        return Err(Error::UnjitteredTie {
            first: entries[first].iteration,
            second: entries[second].iteration,
        });
    }
    let mut records: Vec<Record> = Vec::new();
    for e in entries {
        if records.last().is_none_or(|r| e.log_det > r.value) {
            records.push(Record {
                value: e.log_det,
                time: e.iteration,
                subset: e.subset.clone(),
            });
        }
    }
    Ok(RecordSequence {
        records,
        total_observations: entries.last().map_or(0, |e| e.iteration),
    })
}

/// CSV with header [`RECORDS_HEADER`]. The trivial record has an empty gap.
pub fn write_records_csv(seq: &RecordSequence) -> String {
    let mut out = String::new();
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    let gaps = seq.gaps();
    for (d, (r, inc)) in seq.records.iter().zip(seq.increments()).enumerate() {
        let gap = if d == 0 { String::new() } else { gaps[d - 1].to_string() };
        let subset: Vec<String> = r.subset.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "{d},{},{},{gap},{},{}",
            format_round_trip(r.value),
            r.time,
            format_round_trip(inc),
            subset.join(";")
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn hand_trace() {
        let seq = RecordSequence::from_values(&[1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(seq.values(), vec![1.0, 3.0, 5.0]);
        assert_eq!(seq.times(), vec![1, 2, 4]);
        assert_eq!(seq.gaps(), vec![1, 2]);
        assert_eq!(seq.increments(), vec![1.0, 2.0, 2.0]);
        assert_eq!(seq.count_up_to(1), 1);
        assert_eq!(seq.count_up_to(3), 2);
        assert_eq!(seq.count_up_to(4), 3);
        assert_eq!(seq.total_observations(), 4);
    }

    #[test]
    fn monotone_sequences() {
        let dec: Vec<f64> = (0..20).map(|i| -f64::from(i)).collect();
        assert_eq!(RecordSequence::from_values(&dec).unwrap().len(), 1);
        let inc: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(RecordSequence::from_values(&inc).unwrap().len(), 20);
    }

    #[test]
    fn ties_are_rejected() {
        let err = RecordSequence::from_values(&[1.0, 0.5, 2.0, 0.5]).unwrap_err();
        assert!(matches!(err, Error::UnjitteredTie { first: 2, second: 4 }));
        assert!(matches!(
            RecordSequence::from_values(&[]).unwrap_err(),
            Error::EmptyTrace
        ));
    }

    fn trace_of(values: &[f64]) -> SampleTrace<f64> {
        let mut t = SampleTrace::new();
        for &v in values {
            t.push_next(v, vec![0]);
        }
        t
    }

    #[test]
    fn jitter_single_value() {
        let j = jitter_trace(&trace_of(&[4.0]), &JitterConfig::default()).unwrap();
        assert_eq!(j.original, vec![4.0]);
        assert_ne!(j.trace.values()[0], 4.0);
        assert_eq!(extract_records(&j.trace).unwrap().len(), 1);
    }

    #[test]
    fn jitter_is_deterministic() {
        let t = trace_of(&[1.0, 2.0, 2.0, 3.0]);
        let cfg = JitterConfig::new(1e-6, 17).unwrap();
        assert_eq!(jitter_trace(&t, &cfg).unwrap(), jitter_trace(&t, &cfg).unwrap());
        let other = JitterConfig::new(1e-6, 18).unwrap();
        assert_ne!(jitter_trace(&t, &cfg).unwrap(), jitter_trace(&t, &other).unwrap());
    }

    #[test]
    fn jitter_breaks_every_tie() {
        let t = trace_of(&vec![80.0; 10_000]);
        let j = jitter_trace(&t, &JitterConfig::new(1e-8, 3).unwrap()).unwrap();
        let mut v = j.trace.values();
        v.sort_by(f64::total_cmp);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(extract_records(&j.trace).is_ok());
    }

    #[test]
    fn jitter_separates_large_magnitude_ties() {
        let t = trace_of(&vec![80.0; 100_000]);
        let j = jitter_trace(&t, &JitterConfig::new(1e-8, 4).unwrap()).unwrap();
        assert!(later_duplicates(&j.trace.values()).is_empty());
        let spread = j.trace.values().iter().map(|v| (v - 80.0).abs()).fold(0.0, f64::max);
        assert!(spread < 1e-7);
    }

    #[test]
    fn jitter_below_resolution_is_an_error() {
        let t = trace_of(&[1e10, 1e10]);
        assert!(jitter_trace(&t, &JitterConfig::new(1e-12, 1).unwrap()).is_err());
    }

    #[test]
    fn jitter_rejects_bad_sigma() {
        assert!(JitterConfig::new(0.0, 1).is_err());
        assert!(JitterConfig::new(f64::NAN, 1).is_err());
    }

    #[test]
    fn records_csv_layout() {
        let mut t = SampleTrace::new();
        t.push_next(1.0, vec![0, 2]);
        t.push_next(0.5, vec![1, 2]);
        t.push_next(2.0, vec![0, 1]);
        let csv = write_records_csv(&extract_records(&t).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], RECORDS_HEADER);
        assert!(lines[1].starts_with("0,") && lines[1].ends_with(",1,,1.0000000000000000e0,0;2"));
        assert!(lines[2].starts_with("1,") && lines[2].ends_with(",3,2,1.0000000000000000e0,0;1"));
    }

    /// Empirical `P(I_n = 1)` against `1/n`.
    #[test]
    fn record_indicator_law() {
        let reps = 10_000;
        let len = 50;
        let mut rng = seeded_rng(11);
        let mut hits = vec![0u32; len + 1];
        for _ in 0..reps {
            let mut best = f64::NEG_INFINITY;
            for n in 1..=len {
                let x: f64 = rng.random();
                if x > best {
                    best = x;
                    hits[n] += 1;
                }
            }
        }
        for n in [2usize, 5, 10, 50] {
            let p = 1.0 / n as f64;
            let se = (p * (1.0 - p) / f64::from(reps)).sqrt();
            let emp = f64::from(hits[n]) / f64::from(reps);
            assert!((emp - p).abs() < 3.0 * se, "n={n}: {emp} vs {p}");
        }
    }

    #[test]
    fn record_count_mean_matches_harmonic_sum() {
        let reps = 10_000u32;
        let mut rng = seeded_rng(12);
        let mut total = 0usize;
        for _ in 0..reps {
            let values: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
            total += RecordSequence::from_values(&values).unwrap().len();
        }
        let (mean, var) = expected_record_count(1000).unwrap();
        let emp = total as f64 / f64::from(reps);
        assert!((emp - mean).abs() < 3.0 * (var / f64::from(reps)).sqrt());
    }

    /// First record increment of exponential data is again standard
    /// exponential (Kolmogorov-Smirnov at the 1% level).
    #[test]
    fn exponential_increments_are_memoryless() {
        use rand_distr::Exp1;
        let mut rng = seeded_rng(13);
        let mut incs = Vec::new();
        while incs.len() < 10_000 {
            let mut values = Vec::with_capacity(10_000);
            for _ in 0..10_000 {
                let x: f64 = Exp1.sample(&mut rng);
                values.push(x);
            }
            let seq = RecordSequence::from_values(&values).unwrap();
            if seq.len() >= 2 {
                incs.push(seq.increments()[1]);
            }
        }
        incs.sort_by(f64::total_cmp);
        let m = incs.len() as f64;
        let ks = incs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = -(-x).exp_m1();
                (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.628 / m.sqrt(), "KS statistic {ks}");
    }

    proptest! {
        #[test]
        fn record_sequence_invariants(values in prop::collection::vec(-1e3..1e3f64, 1..200)) {
            let mut vs = values.clone();
            vs.sort_by(f64::total_cmp);
            vs.dedup();
            prop_assume!(vs.len() == values.len());
            let seq = RecordSequence::from_values(&values).unwrap();
            let v = seq.values();
            let t = seq.times();
            prop_assert_eq!(t[0], 1);
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
            for (d, j) in seq.increments().iter().enumerate().skip(1) {
                prop_assert!(*j > 0.0);
                prop_assert_eq!(*j, v[d] - v[d - 1]);
            }
            for (i, &x) in values.iter().enumerate() {
                let is_record = values[..i].iter().all(|&y| x > y);
                prop_assert_eq!(is_record, t.contains(&(i as u64 + 1)));
            }
        }

        /// Tiny jitter leaves record times alone when raw gaps exceed 1e-6.
        #[test]
        fn small_jitter_keeps_record_times(
            raw in prop::collection::vec(0u32..100_000, 1..300),
            seed in any::<u64>(),
        ) {
            let mut seen = std::collections::HashSet::new();
            let values: Vec<f64> = raw
                .iter()
                .filter(|r| seen.insert(**r))
                .map(|&r| 80.0 + f64::from(r) * 1e-5)
                .collect();
            let strict = RecordSequence::from_values(&values).unwrap();
            let j = jitter_trace(&trace_of(&values), &JitterConfig::new(1e-8, seed).unwrap()).unwrap();
            prop_assert_eq!(extract_records(&j.trace).unwrap().times(), strict.times());
        }
    }
}
