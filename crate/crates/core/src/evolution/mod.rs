//! Generational search with tournament selection, elitism, a per-run
//! fitness cache, budgeted evaluation and stall-based early stopping.
//!
//! Every slot of every generation draws from its own random stream derived
//! from `(master_seed, generation, slot)`, and evaluations only depend on the
//! phenotype, so a run is reproducible for any worker count.

mod budget;
mod config;

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsge::{crossover, map, mutate, random_genotype, Genotype, MapError, Phenotype};
use crate::grammar::Grammar;

pub use budget::{evaluate_with_budget, EvalFailure, EvalStatus, Evaluator, WORST_FITNESS};
pub use config::{ConfigError, EvolutionConfig};

/// Fitness changes at or below this size do not count as improvement.
pub const IMPROVEMENT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genotype: Genotype,
    pub phenotype: Phenotype,
    pub fitness: f64,
    pub status: EvalStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StatusCounts {
    pub ok: usize,
    pub timeout: usize,
    pub resource_failure: usize,
    pub compile_failure: usize,
    pub depth_failure: usize,
}

impl StatusCounts {
    fn add(&mut self, status: EvalStatus) {
        match status {
            EvalStatus::Ok => self.ok += 1,
            EvalStatus::Timeout => self.timeout += 1,
            EvalStatus::ResourceFailure => self.resource_failure += 1,
            EvalStatus::CompileFailure => self.compile_failure += 1,
            EvalStatus::DepthFailure => self.depth_failure += 1,
        }
    }

    pub fn get(&self, status: EvalStatus) -> usize {
        match status {
            EvalStatus::Ok => self.ok,
            EvalStatus::Timeout => self.timeout,
            EvalStatus::ResourceFailure => self.resource_failure,
            EvalStatus::CompileFailure => self.compile_failure,
            EvalStatus::DepthFailure => self.depth_failure,
        }
    }
}

/// Summary of one evaluated generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    /// Mean over successfully evaluated individuals; `None` if there were none.
    pub mean: Option<f64>,
    pub worst: f64,
    pub best_ever: f64,
    pub status_counts: StatusCounts,
    /// Distinct phenotypes evaluated this generation (cache misses).
    pub new_evaluations: usize,
    /// Fitness of every individual, in slot order.
    pub fitnesses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stalled,
    MaxGenerations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub generations: Vec<GenerationStats>,
    /// Best individual seen in any generation (earliest on ties).
    pub best: Individual,
    pub final_population: Vec<Individual>,
    pub total_evaluations: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot initialise population: {0}")]
    Init(#[from] MapError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

type Observer<'a> = Box<dyn FnMut(&GenerationStats, &[Individual]) + 'a>;

/// Builder and driver for one evolutionary run.
pub struct Evolution<'a, E: Evaluator + ?Sized> {
    grammar: &'a Grammar,
    config: EvolutionConfig,
    evaluator: &'a E,
    workers: usize,
    observer: Option<Observer<'a>>,
}

/// The random stream for one slot of one generation.
pub fn slot_rng(master_seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

impl<'a, E: Evaluator + ?Sized> Evolution<'a, E> {
    pub fn new(grammar: &'a Grammar, config: EvolutionConfig, evaluator: &'a E) -> Self {
        Self { grammar, config, evaluator, workers: 1, observer: None }
    }

    /// Number of concurrent evaluations (at least 1).
    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    /// Called after each generation is evaluated, with the population in slot
    /// order.
    pub fn observe(mut self, observer: impl FnMut(&GenerationStats, &[Individual]) + 'a) -> Self {
        self.observer = Some(Box::new(observer));
        self
    }

    pub fn run(mut self) -> Result<EvolutionResult, EvolutionError> {
        let cfg = self.config.clone();
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| EvolutionError::Pool(e.to_string()))?;

        let mut population = Vec::with_capacity(cfg.population_size);
        for slot in 0..cfg.population_size {
            let mut rng = slot_rng(cfg.master_seed, 0, slot);
            let genotype = random_genotype(self.grammar, &mut rng, cfg.max_depth)?;
            let (phenotype, genotype) = map(self.grammar, &genotype, cfg.max_depth, &mut rng)?;
            population.push(Pending::Mapped { genotype, phenotype });
        }

        let mut cache: HashMap<String, (f64, EvalStatus)> = HashMap::new();
        let mut generations = Vec::new();
        let mut best: Option<Individual> = None;
        let mut best_ever = f64::NEG_INFINITY;
        let mut stall = 0;
        let mut total_evaluations = 0;
        let mut stop_reason = StopReason::MaxGenerations;
        let mut evaluated = Vec::new();

        for generation in 0..cfg.max_generations {
            let (individuals, new_evaluations) = self.evaluate(&pool, population, &mut cache);
            total_evaluations += new_evaluations;
            evaluated = individuals;

            let gen_best = evaluated.iter().enumerate().fold(
                0,
                |b, (i, ind)| {
                    if ind.fitness > evaluated[b].fitness {
                        i
                    } else {
                        b
                    }
                },
            );
            let best_fitness = evaluated[gen_best].fitness;
            if generation == 0 || best_fitness > best_ever + IMPROVEMENT_EPSILON {
                best_ever = best_fitness;
                best = Some(evaluated[gen_best].clone());
                stall = 0;
            } else {
                stall += 1;
            }

            let mut counts = StatusCounts::default();
            let mut ok_sum = 0.0;
            for ind in &evaluated {
                counts.add(ind.status);
                if ind.status == EvalStatus::Ok {
                    ok_sum += ind.fitness;
                }
            }
            let stats = GenerationStats {
                generation,
                best: best_fitness,
                mean: (counts.ok > 0).then(|| ok_sum / counts.ok as f64),
                worst: evaluated.iter().map(|i| i.fitness).fold(f64::INFINITY, f64::min),
                best_ever,
                status_counts: counts,
                new_evaluations,
                fitnesses: evaluated.iter().map(|i| i.fitness).collect(),
            };
            if let Some(observer) = self.observer.as_mut() {
                observer(&stats, &evaluated);
            }
            generations.push(stats);

            if stall >= cfg.stall_generations {
                stop_reason = StopReason::Stalled;
                break;
            }
            if generation + 1 == cfg.max_generations {
                break;
            }
            population = self.breed(&evaluated, generation + 1);
        }

        Ok(EvolutionResult {
            generations,
            best: best.expect("at least one generation ran"),
            final_population: evaluated,
            total_evaluations,
            stop_reason,
        })
    }

    /// Scores every pending individual; distinct uncached phenotypes are
    /// evaluated in parallel.
    fn evaluate(
        &self,
        pool: &rayon::ThreadPool,
        population: Vec<Pending>,
        cache: &mut HashMap<String, (f64, EvalStatus)>,
    ) -> (Vec<Individual>, usize) {
        let mut todo: Vec<(String, Phenotype)> = Vec::new();
        for p in &population {
            if let Pending::Mapped { phenotype, .. } = p {
                let key = phenotype.text();
                if !cache.contains_key(&key) && !todo.iter().any(|(k, _)| *k == key) {
                    todo.push((key, phenotype.clone()));
                }
            }
        }
        let budget = self.config.eval_time_budget;
        let evaluator = self.evaluator;
        let results: Vec<(f64, EvalStatus)> =
            pool.install(|| todo.par_iter().map(|(_, ph)| evaluate_with_budget(evaluator, ph, budget)).collect());
        let new_evaluations = todo.len();
        for ((key, _), result) in todo.into_iter().zip(results) {
            cache.insert(key, result);
        }
        let individuals = population
            .into_iter()
            .map(|p| match p {
                Pending::Done(ind) => ind,
                Pending::Mapped { genotype, phenotype } => {
                    let (fitness, status) = cache[&phenotype.text()];
                    Individual { genotype, phenotype, fitness, status }
                }
                Pending::Failed { genotype } => Individual {
                    genotype,
                    phenotype: Phenotype::default(),
                    fitness: WORST_FITNESS,
                    status: EvalStatus::DepthFailure,
                },
            })
            .collect();
        (individuals, new_evaluations)
    }

    fn breed(&self, parents: &[Individual], generation: usize) -> Vec<Pending> {
        let cfg = &self.config;
        let mut order: Vec<usize> = (0..parents.len()).collect();
        // stable sort keeps lower slots first among equal fitness
        order.sort_by(|&a, &b| parents[b].fitness.total_cmp(&parents[a].fitness));
        let mut next: Vec<Pending> =
            order[..cfg.elite_count].iter().map(|&i| Pending::Done(parents[i].clone())).collect();
        for slot in cfg.elite_count..cfg.population_size {
            let mut rng = slot_rng(cfg.master_seed, generation, slot);
            let first = tournament(parents, cfg.tournament_size, &mut rng);
            let child = if rng.random_bool(cfg.crossover_rate) {
                let second = tournament(parents, cfg.tournament_size, &mut rng);
                crossover(self.grammar, &first.genotype, &second.genotype, &mut rng, cfg.max_depth).map(|(c, _)| c)
            } else {
                Ok(first.genotype.clone())
            };
            let child = child
                .and_then(|c| mutate(self.grammar, &c, &mut rng, cfg.mutation_rate, cfg.max_depth))
                .and_then(|c| map(self.grammar, &c, cfg.max_depth, &mut rng));
            next.push(match child {
                Ok((phenotype, genotype)) => Pending::Mapped { genotype, phenotype },
                Err(_) => Pending::Failed { genotype: first.genotype.clone() },
            });
        }
        next
    }
}

enum Pending {
    Done(Individual),
    Mapped { genotype: Genotype, phenotype: Phenotype },
    Failed { genotype: Genotype },
}

/// Best of `size` uniform draws with replacement; ties are broken uniformly.
fn tournament<'p, R: Rng + ?Sized>(population: &'p [Individual], size: usize, rng: &mut R) -> &'p Individual {
    let picks: Vec<usize> = (0..size).map(|_| rng.random_range(0..population.len())).collect();
    let top = picks.iter().map(|&i| population[i].fitness).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = picks.into_iter().filter(|&i| population[i].fitness == top).collect();
    &population[*tied.choose(rng).expect("tournament is non-empty")]
}
