use super::{try_log_det, validate_k, DesignSubset};
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::scalar::Scalar;

fn no_candidate(position: usize) -> Error {
    Error::SingularSubmatrix {
        position,
        pivot: 0.0,
    }
}

fn with_added(base: &[usize], extra: usize) -> Vec<usize> {
    let mut s = base.to_vec();
    let pos = s.partition_point(|&x| x < extra);
    s.insert(pos, extra);
    s
}

/// Grows `S` one site at a time, each time adding the site that maximizes
/// `det K[S ∪ {s}]`. Ties go to the lowest index.
pub fn greedy_forward<T: Scalar>(kernel: &KernelMatrix<T>, k: usize) -> Result<DesignSubset<T>> {
    validate_k(kernel, k)?;
    let n = kernel.dim();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut value = T::zero();
    for step in 0..k {
        let mut best: Option<(T, usize)> = None;
        for c in (0..n).filter(|c| chosen.binary_search(c).is_err()) {
            if let Some(v) = try_log_det(kernel, &with_added(&chosen, c))? {
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, c));
                }
            }
        }
        let (v, c) = best.ok_or_else(|| no_candidate(step))?;
        chosen = with_added(&chosen, c);
        value = v;
    }
    Ok(DesignSubset::from_parts(chosen, value))
}

/// Starts from the full set and repeatedly deletes the site whose removal
/// leaves the largest determinant. On ties the highest index is removed, so
/// low indices are removed last.
pub fn greedy_backward<T: Scalar>(kernel: &KernelMatrix<T>, k: usize) -> Result<DesignSubset<T>> {
    validate_k(kernel, k)?;
    let n = kernel.dim();
    let mut current: Vec<usize> = (0..n).collect();
    if k == n {
        return DesignSubset::new(kernel, current);
    }
    let mut value = T::zero();
    while current.len() > k {
        let mut best: Option<(T, usize)> = None;
        for pos in 0..current.len() {
            let mut cand = current.clone();
            cand.remove(pos);
            if let Some(v) = try_log_det(kernel, &cand)? {
                if best.is_none_or(|(b, _)| v >= b) {
                    best = Some((v, pos));
                }
            }
        }
        let (v, pos) = best.ok_or_else(|| no_candidate(current.len()))?;
        current.remove(pos);
        value = v;
    }
    Ok(DesignSubset::from_parts(current, value))
}

/// Best-improvement 1-swap local search: while some `l ∈ S`, `c ∉ S` gives
/// `det K[S ∪ {c} \ {l}] > det K[S]`, apply the best such swap.
///
/// Every accepted swap strictly increases the objective, so the loop
/// terminates at a 1-swap local optimum.
pub fn exchange_refine<T: Scalar>(kernel: &KernelMatrix<T>, start: &DesignSubset<T>) -> Result<DesignSubset<T>> {
    let n = kernel.dim();
    let mut current = DesignSubset::new(kernel, start.indices().to_vec())?;
    loop {
        let outside: Vec<usize> = (0..n)
            .filter(|c| current.indices().binary_search(c).is_err())
            .collect();
        let mut best: Option<(T, Vec<usize>)> = None;
        for pos in 0..current.k() {
            let mut base = current.indices().to_vec();
            base.remove(pos);
            for &c in &outside {
                let cand = with_added(&base, c);
                if let Some(v) = try_log_det(kernel, &cand)? {
                    let bar = best.as_ref().map_or(current.log_det(), |b| b.0);
                    if v > bar {
                        best = Some((v, cand));
                    }
                }
            }
        }
        match best {
            Some((v, indices)) => {
                debug_assert!(v > current.log_det());
                current = DesignSubset::from_parts(indices, v);
            }
            None => return Ok(current),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::log_det_submatrix;
    use proptest::prelude::*;

    fn diag531() -> KernelMatrix<f64> {
        KernelMatrix::from_diagonal(&[5.0, 3.0, 1.0]).unwrap()
    }

    fn random_pd(n: usize, raw: &[f64]) -> KernelMatrix<f64> {
        let r = raw.len() / n;
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = (0..r).map(|m| raw[i * r + m] * raw[j * r + m]).sum::<f64>()
                    + if i == j { 0.1 } else { 0.0 };
            }
        }
        KernelMatrix::from_row_major(n, e).unwrap()
    }

    /// Independent restatement of forward greedy: evaluate every candidate
    /// set from scratch, keep the first maximum.
    fn brute_greedy(k: &KernelMatrix<f64>, size: usize) -> Vec<usize> {
        let mut s: Vec<usize> = Vec::new();
        for _ in 0..size {
            let scores: Vec<(usize, f64)> = (0..k.dim())
                .filter(|c| !s.contains(c))
                .map(|c| {
                    let mut t = s.clone();
                    t.push(c);
                    t.sort();
                    (c, log_det_submatrix(k, &t).unwrap())
                })
                .collect();
            let max = scores.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            s.push(scores.iter().find(|x| x.1 == max).unwrap().0);
        }
        s.sort();
        s
    }

    #[test]
    fn forward_on_diagonal() {
        let g = greedy_forward(&diag531(), 2).unwrap();
        assert_eq!(g.indices(), &[0, 1]);
        assert!((g.log_det() - 15f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn forward_ties_take_lowest_index() {
        let k = KernelMatrix::<f64>::identity(5).unwrap();
        let g = greedy_forward(&k, 3).unwrap();
        assert_eq!(g.indices(), &[0, 1, 2]);
        assert_eq!(g.log_det(), 0.0);
    }

    #[test]
    fn forward_matches_brute_force_restatement() {
        let raw: Vec<f64> = (0..40).map(|i| (((i * 37 + 11) % 29) as f64 / 14.0) - 1.0).collect();
        let k = random_pd(10, &raw);
        assert_eq!(greedy_forward(&k, 3).unwrap().indices(), brute_greedy(&k, 3).as_slice());
    }

    #[test]
    fn backward_cases() {
        assert_eq!(greedy_backward(&diag531(), 2).unwrap().indices(), &[0, 1]);
        let full = greedy_backward(&diag531(), 3).unwrap();
        assert_eq!(full.indices(), &[0, 1, 2]);
        assert!((full.log_det() - 15f64.ln()).abs() < 1e-14);
        let k = KernelMatrix::<f64>::identity(4).unwrap();
        assert_eq!(greedy_backward(&k, 2).unwrap().indices(), &[0, 1]);
    }

    #[test]
    fn exchange_cases() {
        let k = diag531();
        let g = greedy_forward(&k, 2).unwrap();
        assert_eq!(exchange_refine(&k, &g).unwrap(), g);
        let s0 = DesignSubset::new(&k, vec![1, 2]).unwrap();
        let r = exchange_refine(&k, &s0).unwrap();
        assert_eq!(r.indices(), &[0, 1]);
        let all = DesignSubset::new(&k, vec![0, 1, 2]).unwrap();
        assert_eq!(exchange_refine(&k, &all).unwrap(), all);
    }

    #[test]
    fn invalid_k() {
        assert!(greedy_forward(&diag531(), 0).is_err());
        assert!(greedy_backward(&diag531(), 4).is_err());
    }

    proptest! {
        #[test]
        fn exchange_reaches_one_swap_optimum(raw in prop::collection::vec(-1.0f64..1.0, 24), start in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle()) {
            let k = random_pd(8, &raw);
            let s0 = DesignSubset::new(&k, start[..3].to_vec()).unwrap();
            let r = exchange_refine(&k, &s0).unwrap();
            prop_assert!(r.log_det() >= s0.log_det());
            for &l in r.indices() {
                for c in (0..8).filter(|c| !r.indices().contains(c)) {
                    let mut t: Vec<usize> = r.indices().iter().copied().filter(|&x| x != l).collect();
                    t.push(c);
                    t.sort();
                    prop_assert!(log_det_submatrix(&k, &t).unwrap() <= r.log_det());
                }
            }
        }
    }
}
