//! Sample summaries used by the fitting and stopping code.


pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance (divisor `n`).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of a sorted sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn iqr_sorted(sorted: &[f64]) -> f64 {
    quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)
}

/// Silverman's rule-of-thumb bandwidth for a Gaussian kernel.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let sd = variance(sorted).sqrt() * (n / (n - 1.0).max(1.0)).sqrt();
    let spread = match iqr_sorted(sorted) / 1.34 {
        r if r > 0.0 => sd.min(r),
        _ => sd,
    };
    let h = 0.9 * spread * n.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        1e-12_f64.max(sorted[0].abs() * 1e-12)
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Gaussian kernel density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    sample: Vec<f64>,
    bandwidth: f64,
}

impl Kde {
    pub fn silverman(sample: &[f64]) -> Self {
        let sample = sorted(sample);
        let bandwidth = silverman_bandwidth(&sample);
        Self { sample, bandwidth }
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        // Kernels beyond 40 bandwidths contribute nothing at double precision.
        let lo = self.sample.partition_point(|&v| v < x - 40.0 * h);
        let hi = self.sample.partition_point(|&v| v <= x + 40.0 * h);
        let s: f64 = self.sample[lo..hi].iter().map(|&v| normal_pdf((x - v) / h)).sum();
        s / (self.sample.len() as f64 * h)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let s: f64 = self.sample.iter().map(|&v| normal_cdf((x - v) / h)).sum();
        s / self.sample.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&x, 0.0), 1.0);
        assert_eq!(quantile_sorted(&x, 1.0), 5.0);
        assert_eq!(quantile_sorted(&x, 0.5), 3.0);
        assert!((quantile_sorted(&x, 0.9) - 4.6).abs() < 1e-12);
        assert_eq!(iqr_sorted(&x), 2.0);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn moments() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert_eq!(variance(&x), 1.25);
    }

    #[test]
    fn normal_helpers() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((normal_pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn kde_integrates_to_one() {
        let sample: Vec<f64> = (0..200).map(|i| (f64::from(i) * 0.37).sin() * 3.0).collect();
        let kde = Kde::silverman(&sample);
        let f = |x: f64| kde.pdf(x);
        let mass = crate::quadrature::simpson_panels(&f, &[-8.0, -3.0, 0.0, 3.0, 8.0], 1e-9);
        assert!((mass - 1.0).abs() < 1e-6);
        assert!((kde.cdf(20.0) - 1.0).abs() < 1e-12);
    }
}
