//! Nelder-Mead simplex minimization.

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Whether the simplex diameter fell below the tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub diameter_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            diameter_tol: 1e-9,
            max_evaluations: 10_000,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `start`, with initial simplex edges `step`.
    /// Non-finite values of `f` are treated as `+inf`.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, start: &[f64], step: &[f64]) -> Minimum {
        let dim = start.len();
        let evaluations = std::cell::Cell::new(0usize);
        let mut eval = |x: &[f64]| {
            evaluations.set(evaluations.get() + 1);
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((start.to_vec(), eval(start)));
        for i in 0..dim {
            let mut x = start.to_vec();
            x[i] += step[i];
            let v = eval(&x);
            simplex.push((x, v));
        }
        let mut converged = false;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            if evaluations.get() >= self.max_evaluations {
                break;
            }
            let worst = simplex[dim].clone();
            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
                .collect();
            let toward = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let reflected = toward(-1.0);
            let fr = eval(&reflected);
            if fr < simplex[0].1 {
                let expanded = toward(-2.0);
                let fe = eval(&expanded);
                simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < worst.1 {
                let c = toward(-0.5);
                let v = eval(&c);
                (c, v)
            } else {
                let c = toward(0.5);
                let v = eval(&c);
                (c, v)
            };
            if fc < worst.1.min(fr) {
                simplex[dim] = (contracted, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                let v = eval(&x);
                *vertex = (x, v);
            }
        }
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            evaluations: evaluations.get(),
            converged,
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let dist = a.0.iter().zip(&b.0).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}
