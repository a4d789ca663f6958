//! Fuzzy detection of performance antipatterns.
//!
//! Every antipattern is a conjunction of literals computed on the model and
//! its solved performance indices. A literal is turned into a probability by
//! linear interpolation between the smallest and largest value the same
//! literal takes anywhere in the system; the conjunction takes the minimum.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::lqn::{reference_task_id, PerformanceResults};
use crate::model::{call_parents, connections_of, ArchitectureModel, Sender};

/// Fuzziness thresholds explored by default.
pub const DEFAULT_FUZZINESS: [f64; 3] = [0.55, 0.80, 0.95];

const DETERMINISTIC_THRESHOLD: f64 = 1.0 - 1e-9;
const BOUNDS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AntipatternKind {
    PipeAndFilter,
    Blob,
    ConcurrentProcessingSystem,
    ExtensiveProcessing,
    EmptySemiTruck,
    TowerOfBabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    #[default]
    Fuzzy,
    Deterministic,
}

/// How instances are folded into the antipattern objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PasAggregation {
    /// Number of instances whose probability clears the threshold.
    #[default]
    Count,
    /// Experimental: sum of all instance probabilities.
    ProbabilitySum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub fuzziness_threshold: f64,
    #[serde(default)]
    pub mode: DetectionMode,
    #[serde(default)]
    pub aggregation: PasAggregation,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            fuzziness_threshold: 0.95,
            mode: DetectionMode::Fuzzy,
            aggregation: PasAggregation::Count,
        }
    }
}

impl DetectionConfig {
    pub fn with_threshold(fuzziness_threshold: f64) -> Self {
        Self {
            fuzziness_threshold,
            ..Self::default()
        }
    }

    pub fn effective_threshold(&self) -> f64 {
        match self.mode {
            DetectionMode::Fuzzy => self.fuzziness_threshold,
            DetectionMode::Deterministic => DETERMINISTIC_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectionError {
    #[error("literal {literal} outside bounds [{lb}, {ub}]")]
    OutOfBounds { literal: f64, lb: f64, ub: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Literal {
    pub value: f64,
    pub lb: f64,
    pub ub: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntipatternInstance {
    pub kind: AntipatternKind,
    /// Component, processor, scenario or link ids depending on the kind;
    /// Tower of Babel targets the ordered pair `[sender, receiver]`.
    pub targets: Vec<String>,
    pub probability: f64,
    pub literal_values: BTreeMap<String, Literal>,
}

/// `1 - (ub - literal) / (ub - lb)`: 0 at the lower bound, 1 at the upper
/// bound, linear in between; 0 when the bounds coincide.
pub fn fuzzy_probability(literal: f64, lb: f64, ub: f64) -> Result<f64, DetectionError> {
    let slack = BOUNDS_SLACK * (1.0 + lb.abs().max(ub.abs()));
    if !(literal >= lb - slack && literal <= ub + slack) || lb > ub {
        return Err(DetectionError::OutOfBounds { literal, lb, ub });
    }
    if ub == lb {
        return Ok(0.0);
    }
    Ok((1.0 - (ub - literal) / (ub - lb)).clamp(0.0, 1.0))
}

fn literal(value: f64, lb: f64, ub: f64) -> Literal {
    let probability = fuzzy_probability(value, lb, ub).unwrap_or(0.0);
    Literal {
        value,
        lb,
        ub,
        probability,
    }
}

/// Fuzzy literals of one quantity over a set of candidates, with bounds
/// taken over the same set.
fn spread_literals(values: &[f64]) -> Vec<Literal> {
    let lb = values.iter().copied().fold(f64::INFINITY, f64::min);
    let ub = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|&v| literal(v, lb, ub)).collect()
}

fn conjunction(
    targets: Vec<String>,
    kind: AntipatternKind,
    literals: Vec<(&str, Literal)>,
) -> AntipatternInstance {
    let probability = literals
        .iter()
        .map(|(_, l)| l.probability)
        .fold(1.0, f64::min);
    AntipatternInstance {
        kind,
        targets,
        probability,
        literal_values: literals
            .into_iter()
            .map(|(k, l)| (k.to_string(), l))
            .collect(),
    }
}

/// Detects every antipattern occurrence with non-zero probability.
///
/// `results` must come from solving the LQN of this same model.
pub fn detect(
    model: &ArchitectureModel,
    results: &PerformanceResults,
    _config: &DetectionConfig,
) -> Vec<AntipatternInstance> {
    let facts = Facts::gather(model, results);
    let mut out = Vec::new();
    pipe_and_filter(model, results, &facts, &mut out);
    blob(&facts, &mut out);
    concurrent_processing(results, &mut out);
    extensive_processing(&facts, &mut out);
    empty_semi_truck(model, &mut out);
    tower_of_babel(model, &facts, &mut out);
    out.retain(|i| i.probability > 0.0);
    out
}

/// Number of instances whose probability reaches the effective threshold.
pub fn count_pas(instances: &[AntipatternInstance], config: &DetectionConfig) -> usize {
    let threshold = config.effective_threshold();
    instances
        .iter()
        .filter(|i| i.probability >= threshold)
        .count()
}

/// Antipattern objective value under the configured aggregation.
pub fn pas_objective(instances: &[AntipatternInstance], config: &DetectionConfig) -> f64 {
    match config.aggregation {
        PasAggregation::Count => count_pas(instances, config) as f64,
        PasAggregation::ProbabilitySum => instances.iter().map(|i| i.probability).sum(),
    }
}

/// Per-component quantities shared by several detectors.
struct Facts {
    /// Interacting components in model order.
    components: Vec<String>,
    messages: Vec<f64>,
    utilization: Vec<f64>,
    max_exec: Vec<f64>,
    owners: HashMap<String, String>,
    parents: Vec<Vec<Option<usize>>>,
}

impl Facts {
    fn gather(model: &ArchitectureModel, results: &PerformanceResults) -> Self {
        let owners: HashMap<String, String> = model
            .owner_map()
            .into_iter()
            .map(|(o, c)| (o.to_string(), c.to_string()))
            .collect();
        let interacting = model.interacting_components();
        let components: Vec<String> = model
            .components
            .iter()
            .filter(|c| interacting.contains(&c.id))
            .map(|c| c.id.clone())
            .collect();
        let index: HashMap<&str, usize> = components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let mut messages = vec![0.0; components.len()];
        let mut max_exec = vec![0.0f64; components.len()];
        let mut parents = Vec::new();
        for s in &model.scenarios {
            for m in &s.messages {
                if let Some(&i) = m.sender.component().and_then(|c| index.get(c)) {
                    messages[i] += 1.0;
                }
                if let Some(&i) = owners
                    .get(&m.receiver_op)
                    .and_then(|c| index.get(c.as_str()))
                {
                    messages[i] += 1.0;
                    max_exec[i] = max_exec[i].max(m.exec_time_s);
                }
            }
            parents.push(call_parents(model, s).unwrap_or_else(|_| vec![None; s.messages.len()]));
        }
        let utilization = components
            .iter()
            .map(|c| {
                results
                    .task(c)
                    .and_then(|t| t.processor.as_deref())
                    .and_then(|p| results.processor(p))
                    .map_or(0.0, |p| p.normalized_utilization())
            })
            .collect();
        Self {
            components,
            messages,
            utilization,
            max_exec,
            owners,
            parents,
        }
    }
}

fn blob(facts: &Facts, out: &mut Vec<AntipatternInstance>) {
    let traffic = spread_literals(&facts.messages);
    let util = spread_literals(&facts.utilization);
    for (i, c) in facts.components.iter().enumerate() {
        out.push(conjunction(
            vec![c.clone()],
            AntipatternKind::Blob,
            vec![("message_count", traffic[i]), ("host_utilization", util[i])],
        ));
    }
}

fn concurrent_processing(results: &PerformanceResults, out: &mut Vec<AntipatternInstance>) {
    let Some(hottest) = results.processors.iter().max_by(|a, b| {
        a.normalized_utilization()
            .total_cmp(&b.normalized_utilization())
            .then(b.id.cmp(&a.id))
    }) else {
        return;
    };
    let max_u = hottest.normalized_utilization();
    let min_u = results
        .processors
        .iter()
        .map(|p| p.normalized_utilization())
        .fold(f64::INFINITY, f64::min);
    out.push(conjunction(
        vec![hottest.id.clone()],
        AntipatternKind::ConcurrentProcessingSystem,
        vec![
            ("max_utilization", literal(max_u.min(1.0), 0.0, 1.0)),
            ("utilization_spread", literal(max_u - min_u, 0.0, max_u)),
        ],
    ));
}

fn extensive_processing(facts: &Facts, out: &mut Vec<AntipatternInstance>) {
    let exec = spread_literals(&facts.max_exec);
    let util = spread_literals(&facts.utilization);
    for (i, c) in facts.components.iter().enumerate() {
        out.push(conjunction(
            vec![c.clone()],
            AntipatternKind::ExtensiveProcessing,
            vec![("max_exec_time", exec[i]), ("host_utilization", util[i])],
        ));
    }
}

fn pipe_and_filter(
    model: &ArchitectureModel,
    results: &PerformanceResults,
    facts: &Facts,
    out: &mut Vec<AntipatternInstance>,
) {
    let speed: HashMap<&str, f64> = model
        .components
        .iter()
        .map(|c| {
            let s = model
                .nodes_of(&c.id)
                .first()
                .and_then(|n| model.node(n))
                .map_or(1.0, |n| n.speed_factor);
            (c.id.as_str(), s)
        })
        .collect();
    let mut slowest = Vec::new();
    let mut throughput = Vec::new();
    for s in &model.scenarios {
        let mut per_component: BTreeMap<&str, f64> = BTreeMap::new();
        for m in &s.messages {
            if let Some(c) = facts.owners.get(&m.receiver_op) {
                *per_component.entry(c.as_str()).or_default() +=
                    m.exec_time_s * m.rep / speed[c.as_str()];
            }
        }
        slowest.push(per_component.values().copied().fold(0.0, f64::max));
        throughput.push(
            results
                .chain(&reference_task_id(&s.id))
                .map_or(0.0, |c| c.throughput),
        );
    }
    let max_x = throughput.iter().copied().fold(0.0, f64::max);
    let deficit: Vec<f64> = throughput
        .iter()
        .map(|&x| if max_x > 0.0 { 1.0 - x / max_x } else { 0.0 })
        .collect();
    let demand = spread_literals(&slowest);
    let deficit = spread_literals(&deficit);
    for (i, s) in model.scenarios.iter().enumerate() {
        out.push(conjunction(
            vec![s.id.clone()],
            AntipatternKind::PipeAndFilter,
            vec![
                ("slowest_filter_demand", demand[i]),
                ("throughput_deficit", deficit[i]),
            ],
        ));
    }
}

fn empty_semi_truck(model: &ArchitectureModel, out: &mut Vec<AntipatternInstance>) {
    let mut requests: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for s in &model.scenarios {
        let Ok(routes) = connections_of(model, &s.id) else {
            continue;
        };
        for (m, link) in s.messages.iter().zip(routes) {
            if let Some(l) = link {
                let id = model.link(&l).expect("route is a model link").id.as_str();
                let e = requests.entry(id).or_default();
                e.0 += m.rep;
                e.1 += m.rep * m.msg_size_kb;
            }
        }
    }
    let links: Vec<&str> = model
        .links
        .iter()
        .map(|l| l.id.as_str())
        .filter(|l| requests.get(l).is_some_and(|r| r.0 > 0.0))
        .collect();
    if links.is_empty() {
        return;
    }
    let counts: Vec<f64> = links.iter().map(|l| requests[l].0).collect();
    let mean_size: Vec<f64> = links
        .iter()
        .map(|l| requests[l].1 / requests[l].0)
        .collect();
    let largest = mean_size.iter().copied().fold(0.0, f64::max);
    let small: Vec<f64> = mean_size
        .iter()
        .map(|&s| {
            if largest > 0.0 {
                1.0 - s / largest
            } else {
                0.0
            }
        })
        .collect();
    let counts = spread_literals(&counts);
    let small = spread_literals(&small);
    for (i, l) in links.iter().enumerate() {
        out.push(conjunction(
            vec![l.to_string()],
            AntipatternKind::EmptySemiTruck,
            vec![("request_count", counts[i]), ("small_messages", small[i])],
        ));
    }
}

/// A message needs conversion when its format differs from the format of
/// the message that activated its sender.
fn tower_of_babel(model: &ArchitectureModel, facts: &Facts, out: &mut Vec<AntipatternInstance>) {
    let annotated = model
        .scenarios
        .iter()
        .any(|s| s.messages.iter().any(|m| m.format.is_some()));
    if !annotated {
        return;
    }
    let mut pairs: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (s, parents) in model.scenarios.iter().zip(&facts.parents) {
        for (i, m) in s.messages.iter().enumerate() {
            let Sender::Component(sender) = &m.sender else {
                continue;
            };
            let Some(receiver) = facts.owners.get(&m.receiver_op) else {
                continue;
            };
            let cost = pairs.entry((sender.clone(), receiver.clone())).or_default();
            let upstream = parents[i].and_then(|p| s.messages[p].format.as_ref());
            if let (Some(a), Some(b)) = (upstream, m.format.as_ref()) {
                if a != b {
                    *cost += m.exec_time_s * m.rep;
                }
            }
        }
    }
    let keys: Vec<(String, String)> = pairs.keys().cloned().collect();
    let values: Vec<f64> = pairs.values().copied().collect();
    let lits = spread_literals(&values);
    for ((a, b), l) in keys.into_iter().zip(lits) {
        out.push(conjunction(
            vec![a, b],
            AntipatternKind::TowerOfBabel,
            vec![("conversion_time", l)],
        ));
    }
}
