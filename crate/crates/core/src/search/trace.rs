use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{format_round_trip, Scalar};

pub const TRACE_HEADER: &str = "iteration,log_det,is_record,subset";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<T> {
    pub iteration: u64,
    pub log_det: T,
    pub subset: Vec<usize>,
}

/// Objective values in evaluation order with their running maxima.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleTrace<T> {
    entries: Vec<TraceEntry<T>>,
    best_so_far: Vec<T>,
}

impl<T: Scalar> SampleTrace<T> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            best_so_far: Vec::new(),
        }
    }

    /// Validates that iterations start at 1 and strictly increase.
    pub fn from_entries(entries: Vec<TraceEntry<T>>) -> Result<Self> {
        let mut trace = Self::new();
        for e in entries {
            trace.push(e)?;
        }
        Ok(trace)
    }

    pub fn push(&mut self, entry: TraceEntry<T>) -> Result<()> {
        let ok = match self.entries.last() {
            None => entry.iteration == 1,
            Some(last) => entry.iteration > last.iteration,
        };
        if !ok {
            return Err(Error::invalid(format!(
                "trace iteration {} out of order",
                entry.iteration
            )));
        }
        let best = match self.best_so_far.last() {
            Some(&b) if !(entry.log_det > b) => b,
            _ => entry.log_det,
        };
        self.best_so_far.push(best);
        self.entries.push(entry);
        Ok(())
    }

    /// Appends with iteration number `len + 1`.
    pub fn push_next(&mut self, log_det: T, subset: Vec<usize>) {
        let iteration = self.entries.len() as u64 + 1;
        self.push(TraceEntry {
            iteration,
            log_det,
            subset,
        })
        .expect("sequential iteration");
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TraceEntry<T>] {
        &self.entries
    }

    pub fn best_so_far(&self) -> &[T] {
        &self.best_so_far
    }

    pub fn values(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.log_det).collect()
    }

    /// Earliest entry attaining the maximum.
    pub fn best(&self) -> Option<&TraceEntry<T>> {
        let top = *self.best_so_far.last()?;
        self.entries.iter().find(|e| e.log_det == top)
    }

    /// `is_record[i]`: entry `i` strictly exceeds all earlier entries.
    pub fn record_flags(&self) -> Vec<bool> {
        self.best_so_far
            .iter()
            .enumerate()
            .map(|(i, &b)| i == 0 || b > self.best_so_far[i - 1])
            .collect()
    }
}

/// CSV with header [`TRACE_HEADER`]; subsets are `;`-joined indices.
pub fn write_trace_csv<T: Scalar>(trace: &SampleTrace<T>) -> String {
    let mut out = String::with_capacity(trace.len() * 48);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (entry, is_record) in trace.entries().iter().zip(trace.record_flags()) {
        let subset: Vec<String> = entry.subset.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            entry.iteration,
            format_round_trip(entry.log_det),
            u8::from(is_record),
            subset.join(";")
        );
    }
    out
}

pub fn parse_trace_csv<T: Scalar>(text: &str, source: &Path) -> Result<SampleTrace<T>> {
    let bad = |line: usize, message: String| Error::Format {
        path: source.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        Some((_, h)) => return Err(bad(1, format!("unexpected header {h:?}"))),
        None => return Err(Error::EmptyTrace),
    }
    let mut trace = SampleTrace::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad(i + 1, format!("expected 4 columns, found {}", cols.len())));
        }
        let iteration = cols[0]
            .parse::<u64>()
            .map_err(|e| bad(i + 1, format!("iteration: {e}")))?;
        let log_det = cols[1]
            .parse::<f64>()
            .map(T::lit)
            .map_err(|e| bad(i + 1, format!("log_det: {e}")))?;
        let subset = if cols[3].is_empty() {
            Vec::new()
        } else {
            cols[3]
                .split(';')
                .map(|s| s.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(i + 1, format!("subset: {e}")))?
        };
        trace
            .push(TraceEntry {
                iteration,
                log_det,
                subset,
            })
            .map_err(|e| bad(i + 1, e.to_string()))?;
    }
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(trace)
}

pub fn read_trace_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<SampleTrace<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace_csv(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn running_max_and_flags() {
        let mut t = SampleTrace::new();
        for v in [1.0, 3.0, 2.0, 3.0, 5.0] {
            t.push_next(v, vec![0]);
        }
        assert_eq!(t.best_so_far(), &[1.0, 3.0, 3.0, 3.0, 5.0]);
        assert_eq!(t.record_flags(), vec![true, true, false, false, true]);
        assert_eq!(t.best().unwrap().iteration, 5);
    }

    #[test]
    fn iterations_must_start_at_one_and_increase() {
        let e = |iteration| TraceEntry {
            iteration,
            log_det: 0.0,
            subset: vec![],
        };
        assert!(SampleTrace::from_entries(vec![e(2)]).is_err());
        assert!(SampleTrace::from_entries(vec![e(1), e(1)]).is_err());
        assert!(SampleTrace::from_entries(vec![e(1), e(3)]).is_ok());
    }

    #[test]
    fn header_only_is_empty() {
        let err = parse_trace_csv::<f64>(&format!("{TRACE_HEADER}\n"), Path::new("t.csv")).unwrap_err();
        assert!(matches!(err, Error::EmptyTrace));
    }

    proptest! {
        #[test]
        fn csv_round_trip(values in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let mut t = SampleTrace::new();
            for (i, v) in values.iter().enumerate() {
                t.push_next(*v, vec![i % 7, 7 + i % 3]);
            }
            let back: SampleTrace<f64> = parse_trace_csv(&write_trace_csv(&t), Path::new("mem")).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
