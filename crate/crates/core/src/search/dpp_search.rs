use rayon::prelude::*;

use super::{validate_k, DesignSubset, SampleTrace, StopRule, TraceEntry};
use crate::dpp::KDppSampler;
use crate::error::{Error, Result};
use crate::kernel::{eigendecompose, log_det_submatrix, EigenSystem, KernelMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DppSearchConfig {
    pub max_iters: u64,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct DppSearchOutcome<T> {
    pub trace: SampleTrace<T>,
    pub best: DesignSubset<T>,
    /// Iteration count at which the stop rule fired, if it did.
    pub stopped_at: Option<u64>,
}

/// Repeated k-DPP sampling, keeping the best subset seen.
///
/// Iteration `i` (1-based) draws from random stream `i`, so the trace depends
/// only on the seed, never on `workers`.
pub fn dpp_search<T: Scalar>(
    kernel: &KernelMatrix<T>,
    k: usize,
    cfg: &DppSearchConfig,
    stop: Option<&mut dyn StopRule<T>>,
) -> Result<DppSearchOutcome<T>> {
    let eig = eigendecompose(kernel)?;
    dpp_search_with_eigen(kernel, &eig, k, cfg, stop)
}

pub fn dpp_search_with_eigen<T: Scalar>(
    kernel: &KernelMatrix<T>,
    eig: &EigenSystem<T>,
    k: usize,
    cfg: &DppSearchConfig,
    mut stop: Option<&mut dyn StopRule<T>>,
) -> Result<DppSearchOutcome<T>> {
    validate_k(kernel, k)?;
    if cfg.max_iters == 0 {
        return Err(Error::invalid("max_iters must be >= 1"));
    }
    if eig.dim() != kernel.dim() {
        return Err(Error::invalid("eigensystem does not match kernel"));
    }
    let sampler = KDppSampler::new(eig, k)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;

    let block = match stop.as_ref() {
        Some(rule) => rule.check_every().max(1) as u64,
        None => cfg.max_iters,
    };
    let mut trace = SampleTrace::new();
    let mut stopped_at = None;
    let mut done = 0u64;
    while done < cfg.max_iters {
        let end = (done + block).min(cfg.max_iters);
        let entries: Vec<TraceEntry<T>> = pool.install(|| {
            ((done + 1)..=end)
                .into_par_iter()
                .map(|iteration| {
                    let subset = sampler.sample_stream(cfg.seed, iteration).indices;
                    let log_det = log_det_submatrix(kernel, &subset)?;
                    Ok(TraceEntry {
                        iteration,
                        log_det,
                        subset,
                    })
                })
                .collect::<Result<_>>()
        })?;
        for e in entries {
            trace.push(e)?;
        }
        done = end;
        if let Some(rule) = stop.as_mut() {
            if done < cfg.max_iters && rule.should_stop(&trace) {
                stopped_at = Some(done);
                break;
            }
        }
    }
    let top = trace.best().expect("max_iters >= 1");
    let best = DesignSubset::from_parts(top.subset.clone(), top.log_det);
    Ok(DppSearchOutcome {
        trace,
        best,
        stopped_at,
    })
}
