use serde::{Deserialize, Serialize};

use super::{LqnError, PerformanceResults};

/// Per-server utilization above which the correction factor kicks in.
pub const UTILIZATION_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Throughput,
    ResponseTime,
    Utilization,
}

/// One performance index compared between the initial and refactored model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexTerm {
    pub kind: IndexKind,
    /// Reference task id for chain indices, processor id for utilizations.
    pub element: String,
    pub initial: f64,
    pub variant: f64,
    /// Signed relative change, including the correction for utilizations.
    pub term: f64,
}

/// Penalty added to a utilization term when a refactoring pushes a
/// processor past, or keeps it above, the threshold.
pub fn utilization_correction(initial: f64, variant: f64) -> f64 {
    let t = UTILIZATION_THRESHOLD;
    match (variant > t, initial > t) {
        (true, true) => -2.0 * relative_change(initial, variant),
        (true, false) => t - variant,
        (false, true) => initial - t,
        (false, false) => 0.0,
    }
}

fn relative_change(initial: f64, variant: f64) -> f64 {
    let sum = variant + initial;
    if sum == 0.0 {
        0.0
    } else {
        (variant - initial) / sum
    }
}

/// Every index term entering perfQ. Chains are matched by reference task
/// and processors by id; indices present in only one of the results are
/// left out.
pub fn perfq_terms(initial: &PerformanceResults, variant: &PerformanceResults) -> Vec<IndexTerm> {
    let mut terms = Vec::new();
    for a in &initial.chains {
        let Some(b) = variant.chain(&a.task) else {
            continue;
        };
        terms.push(IndexTerm {
            kind: IndexKind::Throughput,
            element: a.task.clone(),
            initial: a.throughput,
            variant: b.throughput,
            term: relative_change(a.throughput, b.throughput),
        });
        terms.push(IndexTerm {
            kind: IndexKind::ResponseTime,
            element: a.task.clone(),
            initial: a.response_time,
            variant: b.response_time,
            term: -relative_change(a.response_time, b.response_time),
        });
    }
    for a in &initial.processors {
        let Some(b) = variant.processor(&a.id) else {
            continue;
        };
        let (i, f) = (a.normalized_utilization(), b.normalized_utilization());
        terms.push(IndexTerm {
            kind: IndexKind::Utilization,
            element: a.id.clone(),
            initial: i,
            variant: f,
            term: relative_change(i, f) + utilization_correction(i, f),
        });
    }
    terms
}

/// Mean signed relative change of the performance indices between the
/// initial model and a variant. Positive values mean improvement.
pub fn perfq(initial: &PerformanceResults, variant: &PerformanceResults) -> Result<f64, LqnError> {
    let terms = perfq_terms(initial, variant);
    if terms.is_empty() {
        return Err(LqnError::EmptyIndexSet);
    }
    Ok(terms.iter().map(|t| t.term).sum::<f64>() / terms.len() as f64)
}
