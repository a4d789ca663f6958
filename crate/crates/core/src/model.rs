//! Annotated architecture model: static view (components and their
//! operations), dynamic view (scenarios made of messages) and deployment
//! view (nodes and communication links).
//!
//! Models are plain values. Every refactoring produces a new model and the
//! original is left untouched, so a loaded model can be shared freely
//! between concurrent evaluations.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Wire name of the scenario actor in the `sender` field of a message.
pub const ACTOR: &str = "$actor";

/// Tolerance on the scenario probability sum.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid model: {0}")]
    Validation(ValidationReport),
    #[error("unknown element {0}")]
    UnknownElement(ElementRef),
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error("message {message} in scenario {scenario}: no link between nodes of {sender} and {receiver}")]
    MissingLink {
        scenario: String,
        message: String,
        sender: String,
        receiver: String,
    },
    #[error(
        "message {message} in scenario {scenario}: sender {sender} is not active at that point"
    )]
    UnresolvableBehavior {
        scenario: String,
        message: String,
        sender: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureModel {
    pub name: String,
    pub components: Vec<Component>,
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub links: Vec<CommLink>,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub id: String,
    #[serde(default)]
    pub operations: Vec<Operation>,
    /// Per-invocation failure probability.
    #[serde(default)]
    pub failure_prob: f64,
}

/// An operation realized by the component that lists it. Ownership is
/// structural: the owner is the enclosing component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operation {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    /// Service-rate multiplier applied to every demand executed here.
    #[serde(default = "one")]
    pub speed_factor: f64,
    /// Ids of the components deployed on this node.
    #[serde(default)]
    pub deployed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommLink {
    pub id: String,
    pub endpoints: [String; 2],
    /// Failure probability per KB transferred.
    #[serde(default)]
    pub failure_prob: f64,
}

impl CommLink {
    pub fn connects(&self, a: &str, b: &str) -> bool {
        (self.endpoints[0] == a && self.endpoints[1] == b)
            || (self.endpoints[0] == b && self.endpoints[1] == a)
    }

    pub fn touches(&self, node: &str) -> bool {
        self.endpoints[0] == node || self.endpoints[1] == node
    }

    pub fn other_end(&self, node: &str) -> Option<&str> {
        if self.endpoints[0] == node {
            Some(&self.endpoints[1])
        } else if self.endpoints[1] == node {
            Some(&self.endpoints[0])
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub probability: f64,
    pub workload: Workload,
    pub messages: Vec<Message>,
}

/// Closed workload: a fixed population of users cycling between think time
/// and one execution of the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub population: u32,
    #[serde(default)]
    pub think_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Sender {
    Actor,
    Component(String),
}

impl From<String> for Sender {
    fn from(s: String) -> Self {
        if s == ACTOR {
            Sender::Actor
        } else {
            Sender::Component(s)
        }
    }
}

impl From<Sender> for String {
    fn from(s: Sender) -> Self {
        match s {
            Sender::Actor => ACTOR.to_string(),
            Sender::Component(id) => id,
        }
    }
}

impl Sender {
    pub fn component(&self) -> Option<&str> {
        match self {
            Sender::Actor => None,
            Sender::Component(id) => Some(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Message {
    pub id: String,
    pub sender: Sender,
    pub receiver_op: String,
    /// Service demand of the invoked behavior, in seconds.
    pub exec_time_s: f64,
    #[serde(default = "one")]
    pub rep: f64,
    #[serde(default)]
    pub msg_size_kb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

fn one() -> f64 {
    1.0
}

/// Reference to a model element of a given category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "category", content = "id", rename_all = "snake_case")]
pub enum ElementRef {
    Component(String),
    Node(String),
    Operation(String),
}

impl ElementRef {
    pub fn id(&self) -> &str {
        match self {
            ElementRef::Component(id) | ElementRef::Node(id) | ElementRef::Operation(id) => id,
        }
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Component(id) => write!(f, "component '{id}'"),
            ElementRef::Node(id) => write!(f, "node '{id}'"),
            ElementRef::Operation(id) => write!(f, "operation '{id}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub element: String,
    pub rule: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, element: impl Into<String>, rule: &str, detail: impl Into<String>) {
        self.violations.push(Violation {
            element: element.into(),
            rule: rule.to_string(),
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} [{}]: {}", v.element, v.rule, v.detail)?;
        }
        Ok(())
    }
}

pub fn parse_model(text: &str) -> Result<ArchitectureModel, ModelError> {
    let model: ArchitectureModel = serde_json::from_str(text)?;
    let report = validate(&model);
    if report.is_valid() {
        Ok(model)
    } else {
        Err(ModelError::Validation(report))
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ArchitectureModel, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text)
}

pub fn to_json(model: &ArchitectureModel) -> String {
    serde_json::to_string_pretty(model).expect("model serialization is infallible")
}

pub fn save_model(model: &ArchitectureModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    std::fs::write(path, to_json(model) + "\n").map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn check_unique<'a>(
    report: &mut ValidationReport,
    category: &str,
    ids: impl Iterator<Item = &'a str>,
) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            report.push(
                id,
                "duplicate-id",
                format!("{category} id '{id}' is not unique"),
            );
        }
    }
}

fn check_probability(report: &mut ValidationReport, element: &str, value: f64) {
    if !(0.0..=1.0).contains(&value) {
        report.push(
            element,
            "probability-range",
            format!("probability {value} outside [0, 1]"),
        );
    }
}

/// Checks every structural and semantic invariant. Violations are data; the
/// function never fails.
pub fn validate(model: &ArchitectureModel) -> ValidationReport {
    let mut report = ValidationReport::default();

    check_unique(
        &mut report,
        "component",
        model.components.iter().map(|c| c.id.as_str()),
    );
    check_unique(
        &mut report,
        "operation",
        model
            .components
            .iter()
            .flat_map(|c| c.operations.iter().map(|o| o.id.as_str())),
    );
    check_unique(
        &mut report,
        "node",
        model.nodes.iter().map(|n| n.id.as_str()),
    );
    check_unique(
        &mut report,
        "link",
        model.links.iter().map(|l| l.id.as_str()),
    );
    check_unique(
        &mut report,
        "scenario",
        model.scenarios.iter().map(|s| s.id.as_str()),
    );

    let components: HashSet<&str> = model.components.iter().map(|c| c.id.as_str()).collect();
    let nodes: HashSet<&str> = model.nodes.iter().map(|n| n.id.as_str()).collect();
    let operations: HashSet<&str> = model
        .components
        .iter()
        .flat_map(|c| c.operations.iter().map(|o| o.id.as_str()))
        .collect();

    for c in &model.components {
        if c.id.starts_with('$') {
            report.push(&c.id, "reserved-id", "component ids may not start with '$'");
        }
        check_probability(&mut report, &c.id, c.failure_prob);
    }

    let mut deployments: HashMap<&str, usize> = HashMap::new();
    for n in &model.nodes {
        if !(n.speed_factor > 0.0 && n.speed_factor.is_finite()) {
            report.push(
                &n.id,
                "speed-factor",
                format!("speed factor {} must be > 0", n.speed_factor),
            );
        }
        let mut local = HashSet::new();
        for c in &n.deployed {
            if !components.contains(c.as_str()) {
                report.push(
                    &n.id,
                    "dangling-component-ref",
                    format!("deploys unknown component '{c}'"),
                );
            } else if !local.insert(c.as_str()) {
                report.push(
                    &n.id,
                    "duplicate-deployment",
                    format!("deploys '{c}' twice"),
                );
            } else {
                *deployments.entry(c.as_str()).or_default() += 1;
            }
        }
    }
    for c in &model.components {
        if !deployments.contains_key(c.id.as_str()) {
            report.push(
                &c.id,
                "undeployed-component",
                "component is not deployed on any node",
            );
        }
    }

    for l in &model.links {
        for end in &l.endpoints {
            if !nodes.contains(end.as_str()) {
                report.push(
                    &l.id,
                    "dangling-node-ref",
                    format!("endpoint '{end}' is not a node"),
                );
            }
        }
        if l.endpoints[0] == l.endpoints[1] {
            report.push(&l.id, "link-self-loop", "link endpoints must be distinct");
        }
        check_probability(&mut report, &l.id, l.failure_prob);
    }

    if model.scenarios.is_empty() {
        report.push(&model.name, "no-scenarios", "model declares no scenario");
    }
    let mut total = 0.0;
    for s in &model.scenarios {
        check_probability(&mut report, &s.id, s.probability);
        total += s.probability;
        if s.workload.population == 0 {
            report.push(&s.id, "workload", "population must be positive");
        }
        if !(s.workload.think_time_s >= 0.0 && s.workload.think_time_s.is_finite()) {
            report.push(
                &s.id,
                "workload",
                "think time must be a non-negative number",
            );
        }
        if s.messages.is_empty() {
            report.push(&s.id, "empty-scenario", "scenario has no messages");
            continue;
        }
        check_unique(
            &mut report,
            "message",
            s.messages.iter().map(|m| m.id.as_str()),
        );
        if s.messages[0].sender != Sender::Actor {
            report.push(
                format!("{}/{}", s.id, s.messages[0].id),
                "actor-first",
                "first message must be sent by the actor",
            );
        }
        for m in &s.messages {
            let element = format!("{}/{}", s.id, m.id);
            if let Sender::Component(c) = &m.sender {
                if !components.contains(c.as_str()) {
                    report.push(&element, "dangling-sender", format!("unknown sender '{c}'"));
                }
            }
            if !operations.contains(m.receiver_op.as_str()) {
                report.push(
                    &element,
                    "dangling-operation-ref",
                    format!("unknown receiver operation '{}'", m.receiver_op),
                );
            }
            if !(m.exec_time_s >= 0.0 && m.exec_time_s.is_finite()) {
                report.push(&element, "message-attribute", "exec_time_s must be >= 0");
            }
            if !(m.rep >= 1.0 && m.rep.is_finite()) {
                report.push(&element, "message-attribute", "rep must be >= 1");
            }
            if !(m.msg_size_kb >= 0.0 && m.msg_size_kb.is_finite()) {
                report.push(&element, "message-attribute", "msg_size_kb must be >= 0");
            }
        }
    }
    if !model.scenarios.is_empty() && (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        report.push(
            &model.name,
            "scenario-probability-sum",
            format!("scenario probabilities must sum to 1 (got {total})"),
        );
    }

    report
}

impl ArchitectureModel {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn link(&self, id: &str) -> Option<&CommLink> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn scenario(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn has_operation(&self, op: &str) -> bool {
        self.owner_of(op).is_some()
    }

    /// Component realizing `op`.
    pub fn owner_of(&self, op: &str) -> Option<&str> {
        self.components
            .iter()
            .find(|c| c.operations.iter().any(|o| o.id == op))
            .map(|c| c.id.as_str())
    }

    /// Map from operation id to owning component id.
    pub fn owner_map(&self) -> HashMap<&str, &str> {
        self.components
            .iter()
            .flat_map(|c| {
                c.operations
                    .iter()
                    .map(move |o| (o.id.as_str(), c.id.as_str()))
            })
            .collect()
    }

    /// Nodes deploying `component`, in model order. More than one node means
    /// the component is replicated.
    pub fn nodes_of(&self, component: &str) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.deployed.iter().any(|c| c == component))
            .map(|n| n.id.as_str())
            .collect()
    }

    pub fn contains(&self, element: &ElementRef) -> bool {
        match element {
            ElementRef::Component(id) => self.component(id).is_some(),
            ElementRef::Node(id) => self.node(id).is_some(),
            ElementRef::Operation(id) => self.has_operation(id),
        }
    }

    /// Components that receive or send at least one message.
    pub fn interacting_components(&self) -> BTreeSet<String> {
        let owners = self.owner_map();
        let mut out = BTreeSet::new();
        for s in &self.scenarios {
            for m in &s.messages {
                if let Some(c) = m.sender.component() {
                    out.insert(c.to_string());
                }
                if let Some(c) = owners.get(m.receiver_op.as_str()) {
                    out.insert(c.to_string());
                }
            }
        }
        out
    }
}

/// Connectivity degree of an element; see [`architectural_weight`].
pub fn degree(model: &ArchitectureModel, element: &ElementRef) -> Result<usize, ModelError> {
    if !model.contains(element) {
        return Err(ModelError::UnknownElement(element.clone()));
    }
    Ok(degrees(model, category_of(element))[element.id()])
}

fn category_of(element: &ElementRef) -> u8 {
    match element {
        ElementRef::Component(_) => 0,
        ElementRef::Node(_) => 1,
        ElementRef::Operation(_) => 2,
    }
}

fn degrees(model: &ArchitectureModel, category: u8) -> HashMap<&str, usize> {
    let mut out: HashMap<&str, usize> = HashMap::new();
    match category {
        0 => {
            for c in &model.components {
                out.insert(&c.id, c.operations.len());
            }
            for n in &model.nodes {
                for c in &n.deployed {
                    if let Some(d) = out.get_mut(c.as_str()) {
                        *d += 1;
                    }
                }
            }
            let owners = model.owner_map();
            for s in &model.scenarios {
                for m in &s.messages {
                    if let Some(d) = m.sender.component().and_then(|c| out.get_mut(c)) {
                        *d += 1;
                    }
                    if let Some(d) = owners
                        .get(m.receiver_op.as_str())
                        .and_then(|c| out.get_mut(c))
                    {
                        *d += 1;
                    }
                }
            }
        }
        1 => {
            for n in &model.nodes {
                out.insert(&n.id, n.deployed.len());
            }
            for l in &model.links {
                for end in &l.endpoints {
                    if let Some(d) = out.get_mut(end.as_str()) {
                        *d += 1;
                    }
                }
            }
        }
        _ => {
            for c in &model.components {
                for o in &c.operations {
                    out.insert(&o.id, 1);
                }
            }
            for s in &model.scenarios {
                for m in &s.messages {
                    if let Some(d) = out.get_mut(m.receiver_op.as_str()) {
                        *d += 1;
                    }
                }
            }
        }
    }
    out
}

/// Architectural weight `1 + degree / max_degree` of an element, where the
/// maximum is taken over elements of the same category. Always in `[1, 2]`.
///
/// Degrees count, for a node, its incident links and deployed components;
/// for a component, its operations, every message it sends or receives and
/// its deployment edges; for an operation, the messages targeting it plus
/// the edge to its owner.
pub fn architectural_weight(
    model: &ArchitectureModel,
    element: &ElementRef,
) -> Result<f64, ModelError> {
    if !model.contains(element) {
        return Err(ModelError::UnknownElement(element.clone()));
    }
    let table = degrees(model, category_of(element));
    let max = table.values().copied().max().unwrap_or(0);
    if max == 0 {
        return Ok(1.0);
    }
    Ok(1.0 + table[element.id()] as f64 / max as f64)
}

/// For every message of `scenario`, the index of the message whose
/// execution issued it (`None` for actor messages).
///
/// Messages are nested like a sequence diagram: a component message is
/// issued by the most recent still-active message received by the sender.
pub fn call_parents(
    model: &ArchitectureModel,
    scenario: &Scenario,
) -> Result<Vec<Option<usize>>, ModelError> {
    let owners = model.owner_map();
    let mut stack: Vec<usize> = Vec::new();
    let mut parents = Vec::with_capacity(scenario.messages.len());
    for (i, m) in scenario.messages.iter().enumerate() {
        match &m.sender {
            Sender::Actor => {
                stack.clear();
                parents.push(None);
            }
            Sender::Component(sender) => {
                while let Some(&top) = stack.last() {
                    let receiver = owners.get(scenario.messages[top].receiver_op.as_str());
                    if receiver == Some(&sender.as_str()) {
                        break;
                    }
                    stack.pop();
                }
                match stack.last() {
                    Some(&top) => parents.push(Some(top)),
                    None => {
                        return Err(ModelError::UnresolvableBehavior {
                            scenario: scenario.id.clone(),
                            message: m.id.clone(),
                            sender: sender.clone(),
                        })
                    }
                }
            }
        }
        stack.push(i);
    }
    Ok(parents)
}

/// Resolves the communication link used by each message of a scenario.
/// `None` marks co-located endpoints (or actor messages, which are not
/// deployed anywhere).
///
/// With replicated components the endpoints are co-located when their node
/// sets intersect; otherwise the first link (in model order) joining the
/// two node sets carries the message.
pub fn connections_of(
    model: &ArchitectureModel,
    scenario_id: &str,
) -> Result<Vec<Option<String>>, ModelError> {
    let scenario = model
        .scenario(scenario_id)
        .ok_or_else(|| ModelError::UnknownScenario(scenario_id.to_string()))?;
    let owners = model.owner_map();
    let mut placement: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for n in &model.nodes {
        for c in &n.deployed {
            placement.entry(c.as_str()).or_default().push(n.id.as_str());
        }
    }
    let empty = Vec::new();
    let mut out = Vec::with_capacity(scenario.messages.len());
    for m in &scenario.messages {
        let Some(sender) = m.sender.component() else {
            out.push(None);
            continue;
        };
        let receiver = owners.get(m.receiver_op.as_str()).ok_or_else(|| {
            ModelError::UnknownElement(ElementRef::Operation(m.receiver_op.clone()))
        })?;
        let from = placement.get(sender).unwrap_or(&empty);
        let to = placement.get(receiver).unwrap_or(&empty);
        if from.iter().any(|n| to.contains(n)) {
            out.push(None);
            continue;
        }
        let link = model.links.iter().find(|l| {
            (from.contains(&l.endpoints[0].as_str()) && to.contains(&l.endpoints[1].as_str()))
                || (from.contains(&l.endpoints[1].as_str())
                    && to.contains(&l.endpoints[0].as_str()))
        });
        match link {
            Some(l) => out.push(Some(l.id.clone())),
            None => {
                return Err(ModelError::MissingLink {
                    scenario: scenario.id.clone(),
                    message: m.id.clone(),
                    sender: sender.to_string(),
                    receiver: receiver.to_string(),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn minimal() -> ArchitectureModel {
        parse_model(include_str!("../models/minimal.json")).unwrap()
    }

    fn chain() -> ArchitectureModel {
        let mut m = minimal();
        m.nodes = ["A", "B", "C"]
            .iter()
            .map(|id| Node {
                id: id.to_string(),
                speed_factor: 1.0,
                deployed: vec![],
            })
            .collect();
        m.links = vec![
            CommLink {
                id: "ab".into(),
                endpoints: ["A".into(), "B".into()],
                failure_prob: 0.0,
            },
            CommLink {
                id: "bc".into(),
                endpoints: ["B".into(), "C".into()],
                failure_prob: 0.0,
            },
        ];
        m
    }

    #[test]
    fn minimal_model_loads() {
        let m = minimal();
        assert_eq!(
            (m.scenarios.len(), m.components.len(), m.links.len()),
            (1, 1, 0)
        );
        assert!(validate(&m).is_valid());
    }

    #[test]
    fn defaults_are_filled() {
        let m = minimal();
        assert_eq!(m.nodes[0].speed_factor, 1.0);
        assert_eq!(m.scenarios[0].messages[0].rep, 1.0);
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let text = include_str!("../models/minimal.json")
            .replace("\"probability\": 1.0", "\"probability\": 0.5");
        let mut m: ArchitectureModel = serde_json::from_str(&text).unwrap();
        let mut second = m.scenarios[0].clone();
        second.id = "s2".into();
        second.probability = 0.4;
        m.scenarios.push(second);
        let err = parse_model(&serde_json::to_string(&m).unwrap()).unwrap_err();
        assert!(
            err.to_string().contains("probabilities must sum to 1"),
            "{err}"
        );
    }

    #[test]
    fn undeployed_component_is_reported() {
        let mut m = minimal();
        m.nodes[0].deployed.clear();
        assert!(validate(&m).has_rule("undeployed-component"));
    }

    #[test]
    fn dangling_operation_is_reported() {
        let mut m = minimal();
        m.scenarios[0].messages[0].receiver_op = "nope".into();
        assert!(validate(&m).has_rule("dangling-operation-ref"));
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(
            parse_model("{\"name\": 3}"),
            Err(ModelError::Parse(_))
        ));
        assert!(matches!(parse_model("not json"), Err(ModelError::Parse(_))));
    }

    #[test]
    fn chain_weights() {
        let m = chain();
        assert_eq!(
            architectural_weight(&m, &ElementRef::Node("B".into())).unwrap(),
            2.0
        );
        assert_eq!(
            architectural_weight(&m, &ElementRef::Node("A".into())).unwrap(),
            1.5
        );
        assert_eq!(
            architectural_weight(&m, &ElementRef::Node("C".into())).unwrap(),
            1.5
        );
        let err = architectural_weight(&m, &ElementRef::Node("Z".into())).unwrap_err();
        assert!(matches!(err, ModelError::UnknownElement(_)));
    }

    #[test]
    fn isolated_and_maximal_weights() {
        let mut m = chain();
        m.nodes.push(Node {
            id: "lonely".into(),
            speed_factor: 1.0,
            deployed: vec![],
        });
        assert_eq!(
            architectural_weight(&m, &ElementRef::Node("lonely".into())).unwrap(),
            1.0
        );
        assert_eq!(
            architectural_weight(&m, &ElementRef::Operation("op1".into())).unwrap(),
            2.0
        );
    }

    #[test]
    fn co_located_message_has_no_link() {
        let m = minimal();
        let mut m2 = m.clone();
        m2.scenarios[0].messages.push(Message {
            id: "self".into(),
            sender: Sender::Component("C1".into()),
            receiver_op: "op1".into(),
            exec_time_s: 0.0,
            rep: 1.0,
            msg_size_kb: 1.0,
            format: None,
        });
        assert_eq!(connections_of(&m2, "s1").unwrap(), vec![None, None]);
    }

    #[test]
    fn actor_first_rule() {
        let mut m = minimal();
        m.scenarios[0].messages[0].sender = Sender::Component("C1".into());
        assert!(validate(&m).has_rule("actor-first"));
    }

    #[test]
    fn sender_wire_format() {
        assert_eq!(serde_json::to_string(&Sender::Actor).unwrap(), "\"$actor\"");
        let s: Sender = serde_json::from_str("\"C7\"").unwrap();
        assert_eq!(s, Sender::Component("C7".into()));
    }
}
