//! Genetic algorithm over `k`-subsets.
//!
//! One generation: tournament-select `p_cross · N₀` parents and pair them at
//! random for crossover; copy `p_mutprop · N₀` uniformly chosen individuals
//! and mutate each site with probability `p_mut`; pool parents and offspring;
//! keep the top `elite_fraction` directly and fill the rest of the next
//! population by tournament selection from the pool.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;

use super::{try_log_det, validate_k, DesignSubset, SampleTrace};
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub p_cross: f64,
    pub p_mutprop: f64,
    pub p_mut: f64,
    pub elite_fraction: f64,
    pub tournament_size: usize,
    pub generations: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            p_cross: 0.75,
            p_mutprop: 0.2,
            p_mut: 0.05,
            elite_fraction: 0.1,
            tournament_size: 4,
            generations: 1000,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_cross", self.p_cross),
            ("p_mutprop", self.p_mutprop),
            ("p_mut", self.p_mut),
            ("elite_fraction", self.elite_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} not in [0, 1]")));
            }
        }
        if self.population < 2 {
            return Err(Error::invalid("population must be >= 2"));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population {
            return Err(Error::invalid("tournament size must be in 1..=population"));
        }
        if self.generations == 0 {
            return Err(Error::invalid("generations must be >= 1"));
        }
        Ok(())
    }

    fn elites(&self) -> usize {
        ((self.elite_fraction * self.population as f64).ceil() as usize).min(self.population)
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome<T> {
    /// Best individual of each generation (iteration = generation number).
    pub trace: SampleTrace<T>,
    pub best: DesignSubset<T>,
}

#[derive(Debug, Clone, PartialEq)]
struct Individual<T> {
    genes: Vec<usize>,
    fitness: T,
}

fn evaluate<T: Scalar>(kernel: &KernelMatrix<T>, genomes: Vec<Vec<usize>>) -> Result<Vec<Individual<T>>> {
    genomes
        .into_par_iter()
        .map(|mut genes| {
            genes.sort_unstable();
            let fitness = try_log_det(kernel, &genes)?.unwrap_or_else(T::neg_infinity);
            Ok(Individual { genes, fitness })
        })
        .collect()
}

fn tournament<'p, T: Scalar, R: Rng + ?Sized>(pool: &'p [Individual<T>], size: usize, rng: &mut R) -> &'p Individual<T> {
    let mut best = &pool[rng.random_range(0..pool.len())];
    for _ in 1..size {
        let c = &pool[rng.random_range(0..pool.len())];
        if c.fitness > best.fitness {
            best = c;
        }
    }
    best
}

/// Uniform exchange of the non-shared sites, then repair to `k` sites by
/// random removal of non-shared sites or random fill from the parents' union.
fn crossover<R: Rng + ?Sized>(a: &[usize], b: &[usize], k: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let shared: Vec<usize> = a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect();
    let mut union: Vec<usize> = a.iter().chain(b).copied().collect();
    union.sort_unstable();
    union.dedup();
    let mut c1 = shared.clone();
    let mut c2 = shared.clone();
    for &x in union.iter().filter(|x| shared.binary_search(x).is_err()) {
        if rng.random_bool(0.5) {
            c1.push(x);
        } else {
            c2.push(x);
        }
    }
    let shared_len = shared.len();
    (repair(c1, shared_len, &union, k, rng), repair(c2, shared_len, &union, k, rng))
}

fn repair<R: Rng + ?Sized>(mut child: Vec<usize>, fixed: usize, union: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    while child.len() > k {
        let pos = rng.random_range(fixed..child.len());
        child.swap_remove(pos);
    }
    if child.len() < k {
        let mut missing: Vec<usize> = union.iter().copied().filter(|x| !child.contains(x)).collect();
        missing.shuffle(rng);
        child.extend(missing.into_iter().take(k - child.len()));
    }
    child.sort_unstable();
    child
}

/// Each site is swapped with probability `p_mut` for a uniformly chosen site
/// outside the current subset.
fn mutate<R: Rng + ?Sized>(genes: &[usize], n: usize, p_mut: f64, rng: &mut R) -> Vec<usize> {
    let mut out = genes.to_vec();
    if out.len() == n {
        return out;
    }
    for pos in 0..out.len() {
        if rng.random_bool(p_mut) {
            let outside: Vec<usize> = (0..n).filter(|x| !out.contains(x)).collect();
            out[pos] = outside[rng.random_range(0..outside.len())];
        }
    }
    out.sort_unstable();
    out
}

pub fn genetic_search<T: Scalar, R: Rng + ?Sized>(
    kernel: &KernelMatrix<T>,
    k: usize,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<GaOutcome<T>> {
    validate_k(kernel, k)?;
    cfg.validate()?;
    let n = kernel.dim();
    let initial = (0..cfg.population)
        .map(|_| index::sample(rng, n, k).into_vec())
        .collect();
    genetic_search_from(kernel, k, cfg, initial, rng)
}

/// Runs the GA from a caller-supplied initial population.
pub fn genetic_search_from<T: Scalar, R: Rng + ?Sized>(
    kernel: &KernelMatrix<T>,
    k: usize,
    cfg: &GaConfig,
    initial: Vec<Vec<usize>>,
    rng: &mut R,
) -> Result<GaOutcome<T>> {
    validate_k(kernel, k)?;
    cfg.validate()?;
    let n = kernel.dim();
    if initial.len() != cfg.population {
        return Err(Error::invalid("initial population size mismatch"));
    }
    for g in &initial {
        kernel.check_subset(g)?;
        if g.len() != k {
            return Err(Error::invalid("initial individual has the wrong size"));
        }
    }
    let mut population = evaluate(kernel, initial)?;
    let mut trace = SampleTrace::new();
    let n_elite = cfg.elites();

    for _ in 0..cfg.generations {
        let n_parents = ((cfg.p_cross * cfg.population as f64).round() as usize) & !1;
        let mut parents: Vec<Vec<usize>> = (0..n_parents)
            .map(|_| tournament(&population, cfg.tournament_size, rng).genes.clone())
            .collect();
        parents.shuffle(rng);
        let mut offspring: Vec<Vec<usize>> = Vec::new();
        for pair in parents.chunks_exact(2) {
            let (c1, c2) = crossover(&pair[0], &pair[1], k, rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        let n_mut = (cfg.p_mutprop * cfg.population as f64).round() as usize;
        for i in index::sample(rng, population.len(), n_mut.min(population.len())) {
            offspring.push(mutate(&population[i].genes, n, cfg.p_mut, rng));
        }

        let mut pool = population;
        pool.extend(evaluate(kernel, offspring)?);
        pool.sort_by(|a, b| {
            b.fitness
                .partial_cmp(&a.fitness)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.genes.cmp(&b.genes))
        });
        let mut next: Vec<Individual<T>> = pool[..n_elite].to_vec();
        while next.len() < cfg.population {
            next.push(tournament(&pool, cfg.tournament_size, rng).clone());
        }
        population = next;

        let best = population
            .iter()
            .fold(&population[0], |b, c| if c.fitness > b.fitness { c } else { b });
        trace.push_next(best.fitness, best.genes.clone());
    }

    let top = trace.best().expect("at least one generation");
    if !top.log_det.is_finite() {
        return Err(Error::SingularSubmatrix {
            position: 0,
            pivot: 0.0,
        });
    }
    let best = DesignSubset::from_parts(top.subset.clone(), top.log_det);
    Ok(GaOutcome { trace, best })
}
