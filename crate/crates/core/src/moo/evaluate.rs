use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::antipattern::{detect, pas_objective, DetectionConfig};
use crate::lqn::{perfq, solve, transform, LqnError, PerformanceResults, SolverOptions};
use crate::model::{ArchitectureModel, ModelError};
use crate::refactoring::{
    apply_sequence, arch_dist, BrfTable, RefactoringAction, RefactoringError,
};
use crate::reliability::evaluate_reliability;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Refactoring(#[from] RefactoringError),
    #[error(transparent)]
    Lqn(#[from] LqnError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Objective values of one candidate. `perfq` and `reliability` are
/// maximized, `n_pas` and `arch_dist` minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub perfq: f64,
    pub reliability: f64,
    /// Antipattern objective: a count under the default aggregation.
    pub n_pas: f64,
    pub arch_dist: f64,
}

impl ObjectiveVector {
    /// Image in which every objective is minimized.
    pub fn minimization(&self) -> Vec<f64> {
        vec![-self.perfq, -self.reliability, self.n_pas, self.arch_dist]
    }

    pub fn values(&self) -> [f64; 4] {
        [self.perfq, self.reliability, self.n_pas, self.arch_dist]
    }

    pub const NAMES: [&'static str; 4] = ["perfq", "reliability", "n_pas", "arch_dist"];
}

/// What evaluation needs besides the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub detection: DetectionConfig,
    /// When false the antipattern objective is fixed at 0 and the detector
    /// never runs.
    pub enable_pas_objective: bool,
    pub brf: BrfTable,
    pub solver: SolverOptions,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            detection: DetectionConfig::default(),
            enable_pas_objective: true,
            brf: BrfTable::default(),
            solver: SolverOptions::default(),
        }
    }
}

/// Scores sequences against a fixed initial model. Safe to share between
/// threads.
pub struct Evaluator<'a> {
    initial: &'a ArchitectureModel,
    initial_results: PerformanceResults,
    settings: EvalSettings,
    detector_calls: AtomicUsize,
    evaluations: AtomicUsize,
}

impl<'a> Evaluator<'a> {
    /// Solves the initial model once.
    pub fn new(initial: &'a ArchitectureModel, settings: EvalSettings) -> Result<Self, EvalError> {
        let initial_results = solve(&transform(initial)?, &settings.solver)?;
        Ok(Evaluator {
            initial,
            initial_results,
            settings,
            detector_calls: AtomicUsize::new(0),
            evaluations: AtomicUsize::new(0),
        })
    }

    pub fn initial(&self) -> &ArchitectureModel {
        self.initial
    }

    pub fn initial_results(&self) -> &PerformanceResults {
        &self.initial_results
    }

    pub fn settings(&self) -> &EvalSettings {
        &self.settings
    }

    /// Number of times the antipattern detector has run.
    pub fn detector_calls(&self) -> usize {
        self.detector_calls.load(Ordering::Relaxed)
    }

    /// Number of model alternatives evaluated, failures included.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn evaluate(&self, sequence: &[RefactoringAction]) -> Result<ObjectiveVector, EvalError> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let variant = apply_sequence(sequence, self.initial)?;
        let results = solve(&transform(&variant)?, &self.settings.solver)?;
        let perfq = perfq(&self.initial_results, &results)?;
        let reliability = evaluate_reliability(&variant)?.reliability;
        let n_pas = if self.settings.enable_pas_objective {
            self.detector_calls.fetch_add(1, Ordering::Relaxed);
            pas_objective(
                &detect(&variant, &results, &self.settings.detection),
                &self.settings.detection,
            )
        } else {
            0.0
        };
        let arch_dist = arch_dist(sequence, self.initial, &self.settings.brf)?;
        Ok(ObjectiveVector {
            perfq,
            reliability,
            n_pas,
            arch_dist,
        })
    }
}

/// One-shot evaluation of a sequence.
pub fn evaluate(
    sequence: &[RefactoringAction],
    initial: &ArchitectureModel,
    settings: &EvalSettings,
) -> Result<ObjectiveVector, EvalError> {
    Evaluator::new(initial, *settings)?.evaluate(sequence)
}
