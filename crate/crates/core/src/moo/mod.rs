//! NSGA-II search over refactoring sequences.
//!
//! Each generation breeds as many offspring as there are parents (binary
//! tournament, single-point crossover, single-position mutation), sorts the
//! union of parents and offspring into non-dominated fronts and keeps the
//! best half, breaking ties inside the last admitted front by crowding
//! distance.
//!
//! Randomness is drawn from ChaCha streams derived from the seed and the
//! index of the individual being produced, and evaluations are pure and
//! cached, so a run is reproducible regardless of how evaluations are
//! scheduled.

mod evaluate;
mod operators;
mod pareto;

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::antipattern::DetectionConfig;
use crate::lqn::SolverOptions;
use crate::model::ArchitectureModel;
use crate::refactoring::{BrfTable, RefactoringAction, RefactoringError};

pub use evaluate::{evaluate, EvalError, EvalSettings, Evaluator, ObjectiveVector};
pub use operators::{crossover, cut_and_swap, mutate, random_sequence, tournament, MAX_RETRIES};
pub use pareto::{
    crowding_distance, dominates, hypervolume, nondominated_sort, nondominated_unique,
};

/// Attempts at drawing a feasible random sequence for one slot.
const SEQUENCE_ATTEMPTS: usize = 1000;
/// Rounds of resampling individuals whose evaluation failed.
const EVALUATION_ROUNDS: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum OptimizerError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Refactoring(#[from] RefactoringError),
    #[error("could not fill the population with evaluable sequences")]
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub population_size: usize,
    pub sequence_length: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub generations: usize,
    pub runs: usize,
    pub seed: u64,
    pub fuzziness_threshold: f64,
    pub enable_pas_objective: bool,
    pub brf: BrfTable,
    pub solver: SolverOptions,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            population_size: 16,
            sequence_length: 4,
            p_crossover: 0.8,
            p_mutation: 0.2,
            generations: 100,
            runs: 1,
            seed: 0,
            fuzziness_threshold: 0.95,
            enable_pas_objective: true,
            brf: BrfTable::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn check(&self) -> Result<(), OptimizerError> {
        let bad = |msg: String| Err(OptimizerError::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.p_crossover) {
            return bad(format!("p_crossover {} outside [0, 1]", self.p_crossover));
        }
        if !(0.0..=1.0).contains(&self.p_mutation) {
            return bad(format!("p_mutation {} outside [0, 1]", self.p_mutation));
        }
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return bad(format!(
                "population_size {} must be even and at least 4",
                self.population_size
            ));
        }
        if self.sequence_length == 0 {
            return bad("sequence_length must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.fuzziness_threshold) {
            return bad(format!(
                "fuzziness_threshold {} outside [0, 1]",
                self.fuzziness_threshold
            ));
        }
        Ok(())
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            detection: DetectionConfig::with_threshold(self.fuzziness_threshold),
            enable_pas_objective: self.enable_pas_objective,
            brf: self.brf,
            solver: self.solver,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub sequence: Vec<RefactoringAction>,
    pub objectives: ObjectiveVector,
}

/// An evaluated member of the population.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub sequence: Vec<RefactoringAction>,
    pub objectives: ObjectiveVector,
    pub rank: usize,
    pub crowding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub mean: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        Some(Summary {
            min: v[0],
            max: v[n - 1],
            median,
            mean: v.iter().sum::<f64>() / n as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Per objective, in [`ObjectiveVector::NAMES`] order, over the population.
    pub objectives: [Summary; 4],
    pub population_size: usize,
    pub front_size: usize,
    /// Hypervolume of the first front against the run's reference point.
    pub hypervolume: f64,
    pub evaluations: usize,
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// First front of the final population, one entry per distinct sequence.
    pub front: Vec<Solution>,
    pub stats: Vec<GenerationStats>,
    /// Model alternatives evaluated, failures included.
    pub evaluations: usize,
    /// Infeasible children and failed evaluations thrown away.
    pub discarded: usize,
    pub detector_calls: usize,
    /// Minimization-image point the hypervolume is measured against.
    pub hv_reference: Vec<f64>,
    /// Set when the run was stopped before its last generation.
    pub interrupted: bool,
}

/// Runs NSGA-II on `model` with `config`.
pub fn run(
    config: &OptimizerConfig,
    model: &ArchitectureModel,
) -> Result<RunResult, OptimizerError> {
    config.check()?;
    let evaluator = Evaluator::new(model, config.eval_settings())?;
    run_with(config, &evaluator, None)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

type Cache = HashMap<Vec<RefactoringAction>, Option<ObjectiveVector>>;

struct Search<'e, 'm> {
    config: &'e OptimizerConfig,
    evaluator: &'e Evaluator<'m>,
    cache: Cache,
    discarded: usize,
}

impl Search<'_, '_> {
    /// Evaluates every sequence not yet in the cache. Distinct sequences are
    /// evaluated once, possibly in parallel.
    fn fill_cache(&mut self, sequences: &[Vec<RefactoringAction>]) {
        let mut todo: Vec<&Vec<RefactoringAction>> = Vec::new();
        for s in sequences {
            if !self.cache.contains_key(s) && !todo.contains(&s) {
                todo.push(s);
            }
        }
        let evaluator = self.evaluator;
        #[cfg(feature = "parallel")]
        let results: Vec<Option<ObjectiveVector>> = {
            use rayon::prelude::*;
            todo.par_iter()
                .map(|s| evaluator.evaluate(s).ok())
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Option<ObjectiveVector>> =
            todo.iter().map(|s| evaluator.evaluate(s).ok()).collect();
        for (s, r) in todo.into_iter().zip(results) {
            self.cache.insert(s.clone(), r);
        }
    }

    /// Evaluates `candidates`, redrawing the ones that fail with the
    /// per-slot generators in `rngs` until all have objectives.
    fn evaluate_all(
        &mut self,
        mut candidates: Vec<Vec<RefactoringAction>>,
        rngs: &mut [ChaCha8Rng],
    ) -> Result<Vec<(Vec<RefactoringAction>, ObjectiveVector)>, OptimizerError> {
        for _ in 0..EVALUATION_ROUNDS {
            self.fill_cache(&candidates);
            let mut all_ok = true;
            for (i, c) in candidates.iter_mut().enumerate() {
                if self.cache[c].is_none() {
                    all_ok = false;
                    self.discarded += 1;
                    *c = random_sequence(
                        self.evaluator.initial(),
                        self.config.sequence_length,
                        &mut rngs[i],
                        SEQUENCE_ATTEMPTS,
                    )?;
                }
            }
            if all_ok {
                return Ok(candidates
                    .into_iter()
                    .map(|c| {
                        let o = self.cache[&c].expect("checked");
                        (c, o)
                    })
                    .collect());
            }
        }
        Err(OptimizerError::Exhausted)
    }

    /// Two children of tournament-selected parents. Crossover is retried
    /// with fresh parents while a child is infeasible.
    fn breed(
        &mut self,
        population: &[Individual],
        rng: &mut ChaCha8Rng,
    ) -> (Vec<RefactoringAction>, Vec<RefactoringAction>) {
        let rank: Vec<usize> = population.iter().map(|i| i.rank).collect();
        let crowding: Vec<f64> = population.iter().map(|i| i.crowding).collect();
        let initial = self.evaluator.initial();
        let mut children = None;
        for _ in 0..MAX_RETRIES {
            let a = &population[tournament(&rank, &crowding, rng)].sequence;
            let b = &population[tournament(&rank, &crowding, rng)].sequence;
            let (c1, c2) = crossover(a, b, self.config.p_crossover, rng);
            let ok1 = crate::refactoring::feasible(&c1, initial);
            let ok2 = crate::refactoring::feasible(&c2, initial);
            if ok1 && ok2 {
                children = Some((c1, c2));
                break;
            }
            self.discarded += usize::from(!ok1) + usize::from(!ok2);
        }
        let (c1, c2) = children.unwrap_or_else(|| {
            let a = &population[tournament(&rank, &crowding, rng)].sequence;
            let b = &population[tournament(&rank, &crowding, rng)].sequence;
            (a.clone(), b.clone())
        });
        (
            mutate(&c1, self.config.p_mutation, initial, rng),
            mutate(&c2, self.config.p_mutation, initial, rng),
        )
    }
}

/// Assigns ranks and crowding distances and returns the fronts.
fn rank_population(population: &mut [Individual]) -> Vec<Vec<usize>> {
    let points: Vec<Vec<f64>> = population
        .iter()
        .map(|i| i.objectives.minimization())
        .collect();
    let fronts = nondominated_sort(&points);
    for (r, front) in fronts.iter().enumerate() {
        let d = crowding_distance(&points, front);
        for (&i, &c) in front.iter().zip(&d) {
            population[i].rank = r;
            population[i].crowding = c;
        }
    }
    fronts
}

/// Keeps the best `n` of `union`. Whole fronts are admitted in rank order;
/// the front that does not fit is thinned by repeatedly dropping the member
/// with the smallest crowding distance, recomputed after each removal.
/// Repeated objective vectors only fill slots nothing else can.
fn select(mut union: Vec<Individual>, n: usize) -> Vec<Individual> {
    let fronts = rank_population(&mut union);
    let points: Vec<Vec<f64>> = union.iter().map(|i| i.objectives.minimization()).collect();
    let mut keep: Vec<usize> = Vec::with_capacity(n);
    let mut repeats: Vec<usize> = Vec::new();
    for front in fronts {
        let mut distinct: Vec<usize> = Vec::new();
        for i in front {
            if distinct
                .iter()
                .chain(&keep)
                .any(|&j| points[j] == points[i])
            {
                repeats.push(i);
            } else {
                distinct.push(i);
            }
        }
        if keep.len() + distinct.len() <= n {
            keep.extend(distinct);
        } else {
            while keep.len() + distinct.len() > n {
                let d = crowding_distance(&points, &distinct);
                let worst = (0..distinct.len())
                    .min_by(|&a, &b| d[a].total_cmp(&d[b]).then(distinct[b].cmp(&distinct[a])))
                    .expect("non-empty");
                distinct.remove(worst);
            }
            keep.extend(distinct);
        }
        if keep.len() == n {
            break;
        }
    }
    keep.extend(repeats.into_iter().take(n - keep.len()));
    keep.sort_unstable();
    let mut slots: Vec<Option<Individual>> = union.into_iter().map(Some).collect();
    let mut out: Vec<Individual> = keep
        .into_iter()
        .map(|i| slots[i].take().expect("unique index"))
        .collect();
    rank_population(&mut out);
    out
}

fn first_front(population: &[Individual]) -> Vec<Solution> {
    let mut out: Vec<Solution> = Vec::new();
    for ind in population.iter().filter(|i| i.rank == 0) {
        if !out.iter().any(|s| s.sequence == ind.sequence) {
            out.push(Solution {
                sequence: ind.sequence.clone(),
                objectives: ind.objectives,
            });
        }
    }
    out
}

/// Reference point for hypervolume: past the worst reachable perfQ (every
/// term lies in [-1.2, 1.2]), zero reliability, twice the worst antipattern
/// count of the initial population plus two, and the largest possible
/// architectural distance.
fn hv_reference(population: &[Individual], config: &OptimizerConfig) -> Vec<f64> {
    let pas = population
        .iter()
        .map(|i| i.objectives.n_pas)
        .fold(0.0, f64::max);
    let brf = crate::refactoring::RefactoringKind::ALL
        .iter()
        .map(|&k| config.brf.get(k))
        .fold(0.0, f64::max);
    vec![
        1.2,
        0.0,
        2.0 * pas + 2.0,
        2.0 * brf * config.sequence_length as f64,
    ]
}

fn generation_stats(
    generation: usize,
    population: &[Individual],
    reference: &[f64],
    evaluations: usize,
    discarded: usize,
) -> GenerationStats {
    let column = |k: usize| -> Summary {
        let v: Vec<f64> = population
            .iter()
            .map(|i| i.objectives.values()[k])
            .collect();
        Summary::of(&v).expect("non-empty population")
    };
    let front: Vec<Vec<f64>> = population
        .iter()
        .filter(|i| i.rank == 0)
        .map(|i| i.objectives.minimization())
        .collect();
    GenerationStats {
        generation,
        objectives: [column(0), column(1), column(2), column(3)],
        population_size: population.len(),
        front_size: front.len(),
        hypervolume: hypervolume(&front, reference),
        evaluations,
        discarded,
    }
}

/// Runs NSGA-II with a prepared evaluator. When `stop` becomes true the run
/// ends after the current generation with `interrupted` set.
pub fn run_with(
    config: &OptimizerConfig,
    evaluator: &Evaluator<'_>,
    stop: Option<&AtomicBool>,
) -> Result<RunResult, OptimizerError> {
    config.check()?;
    let n = config.population_size;
    let evaluations_before = evaluator.evaluations();
    let detector_before = evaluator.detector_calls();
    let mut search = Search {
        config,
        evaluator,
        cache: HashMap::new(),
        discarded: 0,
    };

    let mut rngs: Vec<ChaCha8Rng> = (0..n as u64).map(|i| stream_rng(config.seed, i)).collect();
    let mut initial = Vec::with_capacity(n);
    for rng in rngs.iter_mut() {
        initial.push(random_sequence(
            evaluator.initial(),
            config.sequence_length,
            rng,
            SEQUENCE_ATTEMPTS,
        )?);
    }
    let evaluated = search.evaluate_all(initial, &mut rngs)?;
    let mut population: Vec<Individual> = evaluated
        .into_iter()
        .map(|(sequence, objectives)| Individual {
            sequence,
            objectives,
            rank: 0,
            crowding: 0.0,
        })
        .collect();
    rank_population(&mut population);
    let reference = hv_reference(&population, config);
    let mut stats = vec![generation_stats(
        0,
        &population,
        &reference,
        evaluator.evaluations() - evaluations_before,
        search.discarded,
    )];

    let mut interrupted = false;
    for g in 1..=config.generations {
        if stop.is_some_and(|s| s.load(Ordering::Relaxed)) {
            interrupted = true;
            break;
        }
        let mut offspring = Vec::with_capacity(n);
        for k in 0..n / 2 {
            let mut rng = stream_rng(config.seed, ((g as u64) << 32) | k as u64);
            let (c1, c2) = search.breed(&population, &mut rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        // Separate streams for redrawing children whose evaluation fails.
        let mut child_rngs: Vec<ChaCha8Rng> = (0..n as u64)
            .map(|i| stream_rng(config.seed, ((g as u64) << 32) | (1 << 31) | i))
            .collect();
        let evaluated = search.evaluate_all(offspring, &mut child_rngs)?;
        let mut union = population;
        union.extend(
            evaluated
                .into_iter()
                .map(|(sequence, objectives)| Individual {
                    sequence,
                    objectives,
                    rank: 0,
                    crowding: 0.0,
                }),
        );
        population = select(union, n);
        stats.push(generation_stats(
            g,
            &population,
            &reference,
            evaluator.evaluations() - evaluations_before,
            search.discarded,
        ));
    }

    Ok(RunResult {
        front: first_front(&population),
        stats,
        evaluations: evaluator.evaluations() - evaluations_before,
        discarded: search.discarded,
        detector_calls: evaluator.detector_calls() - detector_before,
        hv_reference: reference,
        interrupted,
    })
}

/// Non-dominated members of the union of several fronts, with identical
/// objective vectors collapsed onto their first occurrence.
pub fn reference_front(fronts: &[Vec<Solution>]) -> Vec<Solution> {
    let all: Vec<&Solution> = fronts.iter().flatten().collect();
    let points: Vec<Vec<f64>> = all.iter().map(|s| s.objectives.minimization()).collect();
    nondominated_unique(&points)
        .into_iter()
        .map(|i| all[i].clone())
        .collect()
}
