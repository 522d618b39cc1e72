//! Distribution-free laws of record counts and record times, plus the
//! distribution of record values for a given parent cdf.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::factorial::ln_factorial;

use crate::distribution::UnivariateModel;
use crate::error::{Error, Result};
use crate::quadrature::simpson_panels;

/// Largest `n` for which count and time laws come from exact Stirling numbers.
pub const STIRLING_LIMIT: usize = 170;

/// Largest gap `j` for which inter-record laws use exact rational sums.
pub const EXACT_GAP_LIMIT: u64 = 64;

/// Mean and variance of the record count `N_n`.
pub fn expected_record_count(n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("record count needs n >= 1"));
    }
    let (mut mean, mut var) = (0.0, 0.0);
    for i in (1..=n).rev() {
        let p = 1.0 / i as f64;
        mean += p;
        var += p * (1.0 - p);
    }
    Ok((mean, var))
}

/// Unsigned Stirling numbers of the first kind `[S_n^(0), ..., S_n^(n)]`.
pub fn stirling_first_row(n: usize) -> Vec<BigUint> {
    stirling_truncated(n, n)
}

/// `S_n^(c)` for `c in 0..=max_col`.
fn stirling_truncated(n: usize, max_col: usize) -> Vec<BigUint> {
    let width = max_col.min(n) + 1;
    let mut row = vec![BigUint::zero(); width];
    row[0] = BigUint::one();
    for m in 0..n {
        // S_{m+1}^(c) = m S_m^(c) + S_m^(c-1)
        for c in (0..width).rev() {
            let carried = if c > 0 { row[c - 1].clone() } else { BigUint::zero() };
            row[c] = &row[c] * BigUint::from(m) + carried;
        }
    }
    row
}

fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn check_count_args(n: usize, j: usize) -> Result<()> {
    if n == 0 || j == 0 || j > n {
        return Err(Error::invalid(format!("record count law needs 1 <= j <= n, got n={n}, j={j}")));
    }
    Ok(())
}

/// Exact `P(N_n = j) = S_n^(j) / n!`.
pub fn record_count_pmf_exact(n: usize, j: usize) -> Result<BigRational> {
    check_count_args(n, j)?;
    let s = stirling_truncated(n, j).swap_remove(j);
    Ok(ratio(s, factorial(n)))
}

/// `P(N_n = j)` for every `j in 0..=n`.
///
/// Exact Stirling ratios up to [`STIRLING_LIMIT`]; above that the law is
/// propagated through the independent record indicators, which involves only
/// sums of positive terms.
pub fn record_count_distribution(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("record count needs n >= 1"));
    }
    if n <= STIRLING_LIMIT {
        let nf = factorial(n);
        return Ok(stirling_first_row(n)
            .into_iter()
            .map(|s| to_f64(&ratio(s, nf.clone())))
            .collect());
    }
    Ok(indicator_dp(n, n))
}

/// Law of `N_n` truncated to columns `0..=max_col` by the Bernoulli(1/i)
/// recursion.
fn indicator_dp(n: usize, max_col: usize) -> Vec<f64> {
    let width = max_col.min(n) + 1;
    let mut p = vec![0.0; width];
    p[0] = 1.0;
    for i in 1..=n {
        let hit = 1.0 / i as f64;
        for c in (0..width).rev() {
            let from_below = if c > 0 { p[c - 1] } else { 0.0 };
            p[c] = p[c] * (1.0 - hit) + from_below * hit;
        }
    }
    p
}

/// `P(N_n = j)`.
pub fn record_count_pmf(n: usize, j: usize) -> Result<f64> {
    check_count_args(n, j)?;
    if n <= STIRLING_LIMIT {
        return Ok(to_f64(&record_count_pmf_exact(n, j)?));
    }
    if j == 1 {
        return Ok(1.0 / n as f64);
    }
    Ok(indicator_dp(n, j)[j])
}

/// Large-`n` approximation `ln(n)^(j-1) / ((j-1)! n)`.
pub fn record_count_pmf_asymptotic(n: usize, j: usize) -> Result<f64> {
    check_count_args(n, j)?;
    let ln_n = (n as f64).ln();
    let e = (j - 1) as f64;
    Ok((e * ln_n.ln() - ln_factorial((j - 1) as u64) - ln_n).exp())
}

fn check_time_args(k: usize, n: usize) -> Result<()> {
    if k == 0 || n < k + 1 {
        return Err(Error::invalid(format!("record time law needs n >= k + 1 >= 2, got k={k}, n={n}")));
    }
    Ok(())
}

/// Exact `P(T_k = n) = S_{n-1}^(k) / n!`.
pub fn record_time_pmf_exact(k: usize, n: usize) -> Result<BigRational> {
    check_time_args(k, n)?;
    if k == 1 {
        let n = BigInt::from(n);
        let den = &n * (&n - 1);
        return Ok(BigRational::new(BigInt::one(), den));
    }
    let s = stirling_truncated(n - 1, k).swap_remove(k);
    Ok(ratio(s, factorial(n)))
}

/// `P(T_k = n)`, the law of the `k`-th non-trivial record time.
pub fn record_time_pmf(k: usize, n: usize) -> Result<f64> {
    check_time_args(k, n)?;
    if k == 1 {
        let n = n as f64;
        return Ok(1.0 / (n * (n - 1.0)));
    }
    Ok(record_count_pmf(n - 1, k)? / n as f64)
}

/// `sum_{m=0}^{j} C(j, m) (-1)^m / (offset + m)^k` in exact arithmetic.
fn alternating_sum(j: u64, offset: u64, k: u32) -> BigRational {
    let mut acc = BigRational::zero();
    let mut binom = BigInt::one();
    for m in 0..=j {
        let den = BigInt::from(offset + m).pow(k);
        let term = BigRational::new(binom.clone(), den);
        if m % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        binom = binom * BigInt::from(j - m) / BigInt::from(m + 1);
    }
    acc
}

fn check_gap_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("inter-record law needs k >= 1"));
    }
    Ok(())
}

/// Exact `P(Δ_k > j)`.
pub fn inter_record_time_tail_exact(k: u32, j: u64) -> Result<BigRational> {
    check_gap_k(k)?;
    Ok(alternating_sum(j, 1, k))
}

/// Exact `P(Δ_k = j)`; zero for `j = 0`.
pub fn inter_record_time_pmf_exact(k: u32, j: u64) -> Result<BigRational> {
    check_gap_k(k)?;
    if j == 0 {
        return Ok(BigRational::zero());
    }
    Ok(alternating_sum(j - 1, 2, k))
}

/// `∫_0^∞ x^(k-1)/Γ(k) e^(-a x) (1 - e^(-x))^p dx`, i.e. the gap laws
/// conditioned on the previous standard-exponential record value.
fn gap_integral(k: u32, a: f64, p: u64) -> f64 {
    let km1 = f64::from(k - 1);
    let ln_gamma_k = ln_factorial(u64::from(k - 1));
    let pf = p as f64;
    let f = |x: f64| {
        if x <= 0.0 {
            return if p == 0 && k == 1 { 1.0 } else { 0.0 };
        }
        let ln_power = if km1 == 0.0 { 0.0 } else { km1 * x.ln() };
        let ln_survive = match p {
            0 => 0.0,
            _ if x > std::f64::consts::LN_2 => pf * (-(-x).exp()).ln_1p(),
            _ => pf * (-(-x).exp_m1()).ln(),
        };
        (ln_power - a * x + ln_survive - ln_gamma_k).exp()
    };
    let upper = f64::from(k).max((pf + 1.0).ln()) + 60.0 + 12.0 * f64::from(k).sqrt();
    let mut breaks = vec![0.0];
    let mut b = 0.25;
    while b < upper {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(upper);
    let coarse = simpson_panels(&f, &breaks, 1e-6);
    simpson_panels(&f, &breaks, 1e-11 * coarse.abs().max(f64::MIN_POSITIVE))
}

/// `P(Δ_k > j)`: exact up to [`EXACT_GAP_LIMIT`], quadrature beyond.
pub fn inter_record_time_tail(k: u32, j: u64) -> Result<f64> {
    check_gap_k(k)?;
    if j <= EXACT_GAP_LIMIT {
        return Ok(to_f64(&inter_record_time_tail_exact(k, j)?));
    }
    Ok(gap_integral(k, 1.0, j).clamp(0.0, 1.0))
}

/// `P(Δ_k = j)`: exact up to [`EXACT_GAP_LIMIT`], quadrature beyond.
pub fn inter_record_time_pmf(k: u32, j: u64) -> Result<f64> {
    check_gap_k(k)?;
    if j <= EXACT_GAP_LIMIT {
        return Ok(to_f64(&inter_record_time_pmf_exact(k, j)?));
    }
    Ok(gap_integral(k, 2.0, j - 1).clamp(0.0, 1.0))
}

/// `P(N_n = j | N_{n-1} = i)`.
pub fn record_count_transition(n: u64, i: u64, j: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    if j == i {
        (n - 1.0) / n
    } else if j == i + 1 {
        1.0 / n
    } else {
        0.0
    }
}

/// `P(T_d = j | T_{d-1} = i) = i / (j (j - 1))` for `j > i`.
pub fn record_time_transition(i: u64, j: u64) -> f64 {
    if j <= i || i == 0 {
        return 0.0;
    }
    let (i, j) = (i as f64, j as f64);
    i / (j * (j - 1.0))
}

/// Density of `R_d` at `r` given `R_{d-1} = prev`.
pub fn record_value_transition_pdf<M: UnivariateModel>(dist: &M, prev: f64, r: f64) -> f64 {
    if r <= prev {
        return 0.0;
    }
    let s = dist.sf(prev);
    if s <= 0.0 {
        0.0
    } else {
        dist.pdf(r) / s
    }
}

/// Density of the `d`-th record value, `f(r) (-ln(1 - F(r)))^d / d!`.
pub fn record_value_pdf<M: UnivariateModel>(dist: &M, d: u32, r: f64) -> f64 {
    let f = dist.pdf(r);
    if f <= 0.0 {
        return 0.0;
    }
    if d == 0 {
        return f;
    }
    let s = dist.sf(r);
    if s <= 0.0 {
        return 0.0;
    }
    let h = -s.ln();
    if h <= 0.0 {
        return 0.0;
    }
    (f.ln() + f64::from(d) * h.ln() - ln_factorial(u64::from(d))).exp()
}

/// `P(R_d > r) = (1 - F(r)) sum_{i=0}^{d} (-ln(1 - F(r)))^i / i!`.
pub fn record_value_sf<M: UnivariateModel>(dist: &M, d: u32, r: f64) -> f64 {
    let s = dist.sf(r);
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let h = -s.ln();
    let mut term = s;
    let mut total = s;
    for i in 1..=d {
        term *= h / f64::from(i);
        total += term;
    }
    total.clamp(0.0, 1.0)
}

pub fn record_value_cdf<M: UnivariateModel>(dist: &M, d: u32, r: f64) -> f64 {
    1.0 - record_value_sf(dist, d, r)
}
