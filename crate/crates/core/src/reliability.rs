//! Scenario-based reliability of a component architecture.
//!
//! The system fails on demand when any invoked component or any traversed
//! link fails. Each scenario `j` contributes with its probability `p_j`
//! times the probability that every component survives its `InvNr_ij`
//! invocations and every link survives the `MsgSize(l, j)` KB routed over
//! it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{connections_of, ArchitectureModel, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReliability {
    pub scenario: String,
    pub probability: f64,
    pub component_survival: f64,
    pub link_survival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    /// Mean failure probability of the system.
    pub theta_s: f64,
    pub reliability: f64,
    pub scenarios: Vec<ScenarioReliability>,
    /// `inv_counts[component][scenario]`.
    pub inv_counts: BTreeMap<String, BTreeMap<String, u64>>,
    /// `msg_sizes[link][scenario]` in KB.
    pub msg_sizes: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Invocations of every component in one scenario: the sum of the
/// (rounded) repetitions of the messages its operations receive. Components
/// that are never invoked map to 0.
pub fn inv_counts(
    model: &ArchitectureModel,
    scenario: &str,
) -> Result<BTreeMap<String, u64>, ModelError> {
    let s = model
        .scenario(scenario)
        .ok_or_else(|| ModelError::UnknownScenario(scenario.to_string()))?;
    let owners = model.owner_map();
    let mut counts: BTreeMap<String, u64> =
        model.components.iter().map(|c| (c.id.clone(), 0)).collect();
    for m in &s.messages {
        if let Some(owner) = owners.get(m.receiver_op.as_str()) {
            *counts.get_mut(*owner).expect("owner is a component") += m.rep.round() as u64;
        }
    }
    Ok(counts)
}

/// KB routed over every link in one scenario (`msg_size × rep` per message).
/// Co-located messages load no link.
pub fn msg_sizes(
    model: &ArchitectureModel,
    scenario: &str,
) -> Result<BTreeMap<String, f64>, ModelError> {
    let routes = connections_of(model, scenario)?;
    let s = model.scenario(scenario).expect("checked by connections_of");
    let mut sizes: BTreeMap<String, f64> =
        model.links.iter().map(|l| (l.id.clone(), 0.0)).collect();
    for (m, link) in s.messages.iter().zip(routes) {
        if let Some(link) = link {
            *sizes.get_mut(&link).expect("route is a model link") += m.msg_size_kb * m.rep;
        }
    }
    Ok(sizes)
}

pub fn evaluate_reliability(model: &ArchitectureModel) -> Result<ReliabilityReport, ModelError> {
    let mut inv: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut sizes: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut scenarios = Vec::with_capacity(model.scenarios.len());
    let mut success = 0.0;
    for s in &model.scenarios {
        let counts = inv_counts(model, &s.id)?;
        let traffic = msg_sizes(model, &s.id)?;
        let mut component_survival = 1.0;
        for c in &model.components {
            let n = counts[&c.id];
            if n > 0 {
                component_survival *= (1.0 - c.failure_prob).powi(n as i32);
            }
        }
        let mut link_survival = 1.0;
        for l in &model.links {
            let kb = traffic[&l.id];
            if kb > 0.0 {
                link_survival *= (1.0 - l.failure_prob).powf(kb);
            }
        }
        success += s.probability * component_survival * link_survival;
        scenarios.push(ScenarioReliability {
            scenario: s.id.clone(),
            probability: s.probability,
            component_survival,
            link_survival,
        });
        for (c, n) in counts {
            inv.entry(c).or_default().insert(s.id.clone(), n);
        }
        for (l, kb) in traffic {
            sizes.entry(l).or_default().insert(s.id.clone(), kb);
        }
    }
    let reliability = success.clamp(0.0, 1.0);
    Ok(ReliabilityReport {
        theta_s: 1.0 - reliability,
        reliability,
        scenarios,
        inv_counts: inv,
        msg_sizes: sizes,
    })
}
