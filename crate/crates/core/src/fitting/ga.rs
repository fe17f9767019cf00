//! Real-coded genetic algorithm.
//!
//! Genome is `[p, q, beta, m]`. Pinned genes have equal bounds. All random
//! draws come from one ChaCha stream on the calling thread, in a fixed order;
//! only fitness evaluation runs in parallel, so a seed fixes the trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{fit_r_squared, objective, FitConfig, FitResult, MMode, ObservationSeries};
use crate::diffusion::BassParams;
use crate::error::{Error, Result};
use crate::trajectory::PremiumSeries;

const TOURNAMENT: usize = 3;
const BLEND_ALPHA: f64 = 0.5;
const MUTATION_SCALE: f64 = 0.1;

type Genome = [f64; 4];

fn decode(g: &Genome) -> BassParams {
    BassParams {
        p: g[0],
        q: g[1],
        beta: g[2],
        m: g[3],
    }
}

fn gene_bounds(cfg: &FitConfig) -> Result<[(f64, f64); 4]> {
    let m = match cfg.m_mode {
        MMode::Fixed(v) => (v, v),
        MMode::Free(lo, hi) => (lo, hi),
    };
    let b = [cfg.bounds.p, cfg.bounds.q, cfg.bounds.beta, m];
    let names = ["p", "q", "beta", "m"];
    for (&(lo, hi), name) in b.iter().zip(names) {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::invalid(name, format!("infeasible bounds [{lo}, {hi}]")));
        }
    }
    if b[0].0 <= 0.0 {
        return Err(Error::invalid("p", "lower bound must be > 0"));
    }
    if b[1].0 < 0.0 {
        return Err(Error::invalid("q", "lower bound must be >= 0"));
    }
    if b[3].0 <= 0.0 {
        return Err(Error::invalid("m", "lower bound must be > 0"));
    }
    Ok(b)
}

fn clamp(g: &mut Genome, bounds: &[(f64, f64); 4]) {
    for (v, &(lo, hi)) in g.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn tournament(rng: &mut ChaCha8Rng, fitness: &[f64]) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..TOURNAMENT {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

/// Extended line blend: each child lies on the line through both parents,
/// up to `BLEND_ALPHA` of their distance beyond either end. One draw per
/// child moves all genes together, which follows correlated ridges.
fn blend(rng: &mut ChaCha8Rng, a: &Genome, b: &Genome) -> (Genome, Genome) {
    let mut child = || {
        let t = -BLEND_ALPHA + rng.random::<f64>() * (1.0 + 2.0 * BLEND_ALPHA);
        let mut c = *a;
        for i in 0..4 {
            c[i] = a[i] + t * (b[i] - a[i]);
        }
        c
    };
    let c1 = child();
    let c2 = child();
    (c1, c2)
}

fn mutate(rng: &mut ChaCha8Rng, g: &mut Genome, bounds: &[(f64, f64); 4], prob: f64) {
    for (v, &(lo, hi)) in g.iter_mut().zip(bounds) {
        let hit = rng.random_bool(prob);
        let width = hi - lo;
        if hit && width > 0.0 {
            let noise = Normal::new(0.0, MUTATION_SCALE * width).expect("positive finite sigma");
            *v += noise.sample(rng);
        }
    }
}

fn check_inputs(obs: &ObservationSeries, premiums: Option<&PremiumSeries>, cfg: &FitConfig) -> Result<()> {
    cfg.validate()?;
    if obs.len() < 4 {
        return Err(Error::Degenerate(format!(
            "need at least 4 observations, got {}",
            obs.len()
        )));
    }
    if obs.points().iter().all(|(_, v)| *v == 0.0) {
        return Err(Error::Degenerate("all observations are zero".into()));
    }
    if cfg.fits_beta() {
        let series = premiums.ok_or_else(|| Error::Config("fitting beta needs a premium series".into()))?;
        for (year, _) in obs.points() {
            series.lifecycle(*year)?;
        }
        let (first, last) = (
            obs.first_year().unwrap_or_default(),
            obs.last_year().unwrap_or_default(),
        );
        for year in first..=last {
            series.lifecycle(year)?;
        }
    }
    Ok(())
}

/// Minimizes [`objective`] over the configured bounds.
pub fn ga_fit(obs: &ObservationSeries, premiums: Option<&PremiumSeries>, cfg: &FitConfig) -> Result<FitResult> {
    let bounds = gene_bounds(cfg)?;
    check_inputs(obs, premiums, cfg)?;
    let premiums = premiums.filter(|_| cfg.fits_beta());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let score = |g: &Genome| -> f64 {
        match objective(&decode(g), obs, premiums, cfg) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    };

    let mut population: Vec<Genome> = (0..cfg.population_size)
        .map(|_| {
            let mut g = [0.0; 4];
            for (v, &(lo, hi)) in g.iter_mut().zip(&bounds) {
                let u: f64 = rng.random();
                *v = lo + u * (hi - lo);
            }
            g
        })
        .collect();
    let mut fitness: Vec<f64> = population.par_iter().map(score).collect();

    let mut history = Vec::with_capacity(cfg.max_generations);
    let mut best_seen = f64::INFINITY;
    let mut stale = 0;
    let mut converged = false;

    for _ in 0..cfg.max_generations {
        let elite = argmin(&fitness);
        let mut next = Vec::with_capacity(cfg.population_size);
        next.push(population[elite]);
        while next.len() < cfg.population_size {
            let a = population[tournament(&mut rng, &fitness)];
            let b = population[tournament(&mut rng, &fitness)];
            let (mut c1, mut c2) = if rng.random_bool(cfg.crossover_prob) {
                blend(&mut rng, &a, &b)
            } else {
                (a, b)
            };
            for child in [&mut c1, &mut c2] {
                mutate(&mut rng, child, &bounds, cfg.mutation_prob);
                clamp(child, &bounds);
            }
            next.push(c1);
            if next.len() < cfg.population_size {
                next.push(c2);
            }
        }
        population = next;
        fitness = population.par_iter().map(score).collect();

        let best = fitness[argmin(&fitness)];
        history.push(best);
        if best_seen - best > cfg.stagnation_tolerance {
            stale = 0;
        } else {
            stale += 1;
        }
        best_seen = best_seen.min(best);
        if cfg.stagnation_generations.is_some_and(|limit| stale >= limit) {
            converged = true;
            break;
        }
    }

    let best = argmin(&fitness);
    let params = decode(&population[best]);
    if !fitness[best].is_finite() {
        return Err(Error::Degenerate("no individual produced a finite objective".into()));
    }
    Ok(FitResult {
        params,
        objective: fitness[best],
        r_squared: fit_r_squared(&params, obs, premiums)?,
        generations_run: history.len(),
        converged,
        history,
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, &v)| if v < best.1 { (i, v) } else { best },
        )
        .0
}
