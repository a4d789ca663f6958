//! The four refactoring actions, sequence feasibility and the architectural
//! distance objective.
//!
//! Actions never modify their input: [`apply`] returns a new model. Element
//! names created by an action are derived from the target id with the
//! smallest free numeric suffix, so replaying a sequence always yields the
//! same ids.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    architectural_weight, call_parents, connections_of, ArchitectureModel, CommLink, Component,
    ElementRef, ModelError, Node, Operation, Sender,
};

/// Resampling budget of [`random_action`].
pub const RANDOM_ACTION_ATTEMPTS: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum RefactoringError {
    #[error("precondition of {action} does not hold")]
    PreconditionViolated { action: RefactoringAction },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no eligible target found after {0} attempts")]
    NoEligibleTarget(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RefactoringKind {
    CloneNode,
    MoveOpNewCompNewNode,
    MoveOpToComp,
    DeployCompNewNode,
}

impl RefactoringKind {
    pub const ALL: [RefactoringKind; 4] = [
        RefactoringKind::CloneNode,
        RefactoringKind::MoveOpNewCompNewNode,
        RefactoringKind::MoveOpToComp,
        RefactoringKind::DeployCompNewNode,
    ];
}

impl fmt::Display for RefactoringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Baseline refactoring factor per action kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrfTable {
    pub clone_node: f64,
    pub move_op_new_comp_new_node: f64,
    pub move_op_to_comp: f64,
    pub deploy_comp_new_node: f64,
}

impl Default for BrfTable {
    fn default() -> Self {
        BrfTable {
            clone_node: 1.23,
            move_op_new_comp_new_node: 1.80,
            move_op_to_comp: 1.64,
            deploy_comp_new_node: 1.45,
        }
    }
}

impl BrfTable {
    pub fn get(&self, kind: RefactoringKind) -> f64 {
        match kind {
            RefactoringKind::CloneNode => self.clone_node,
            RefactoringKind::MoveOpNewCompNewNode => self.move_op_new_comp_new_node,
            RefactoringKind::MoveOpToComp => self.move_op_to_comp,
            RefactoringKind::DeployCompNewNode => self.deploy_comp_new_node,
        }
    }
}

/// One refactoring action. `target` is a node for `CloneNode`, an operation
/// for the two moves and a component for `DeployCompNewNode`; `aux_target`
/// is the destination component of `MoveOpToComp`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RefactoringAction {
    pub kind: RefactoringKind,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_target: Option<String>,
}

impl RefactoringAction {
    pub fn clone_node(node: impl Into<String>) -> Self {
        RefactoringAction {
            kind: RefactoringKind::CloneNode,
            target: node.into(),
            aux_target: None,
        }
    }

    pub fn move_op_new_comp_new_node(op: impl Into<String>) -> Self {
        RefactoringAction {
            kind: RefactoringKind::MoveOpNewCompNewNode,
            target: op.into(),
            aux_target: None,
        }
    }

    pub fn move_op_to_comp(op: impl Into<String>, dest: impl Into<String>) -> Self {
        RefactoringAction {
            kind: RefactoringKind::MoveOpToComp,
            target: op.into(),
            aux_target: Some(dest.into()),
        }
    }

    pub fn deploy_comp_new_node(component: impl Into<String>) -> Self {
        RefactoringAction {
            kind: RefactoringKind::DeployCompNewNode,
            target: component.into(),
            aux_target: None,
        }
    }

    /// The model element whose architectural weight prices this action.
    pub fn element(&self) -> ElementRef {
        match self.kind {
            RefactoringKind::CloneNode => ElementRef::Node(self.target.clone()),
            RefactoringKind::MoveOpNewCompNewNode | RefactoringKind::MoveOpToComp => {
                ElementRef::Operation(self.target.clone())
            }
            RefactoringKind::DeployCompNewNode => ElementRef::Component(self.target.clone()),
        }
    }
}

impl fmt::Display for RefactoringAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.aux_target {
            Some(aux) => write!(f, "{}({} -> {})", self.kind, self.target, aux),
            None => write!(f, "{}({})", self.kind, self.target),
        }
    }
}

pub type RefactoringSequence = Vec<RefactoringAction>;

/// Compact textual form of a sequence, e.g. `CloneNode(n1);MoveOpToComp(op -> C2)`.
pub fn sequence_label(sequence: &[RefactoringAction]) -> String {
    sequence
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Whether `action` may be applied to `model`. Never fails.
///
/// Besides the existence checks, a `MoveOpToComp` must leave every message
/// routable: the destination has to reach the components it exchanges
/// messages with through existing links.
pub fn precondition(action: &RefactoringAction, model: &ArchitectureModel) -> bool {
    match action.kind {
        RefactoringKind::CloneNode => {
            model.node(&action.target).is_some() && action.aux_target.is_none()
        }
        RefactoringKind::MoveOpNewCompNewNode => {
            model.has_operation(&action.target) && action.aux_target.is_none()
        }
        RefactoringKind::DeployCompNewNode => {
            model.component(&action.target).is_some() && action.aux_target.is_none()
        }
        RefactoringKind::MoveOpToComp => {
            let Some(dest) = action.aux_target.as_deref() else {
                return false;
            };
            let Some(owner) = model.owner_of(&action.target) else {
                return false;
            };
            if owner == dest || model.component(dest).is_none() || model.nodes_of(dest).is_empty() {
                return false;
            }
            let moved = move_operation(model, &action.target, dest);
            moved
                .scenarios
                .iter()
                .all(|s| connections_of(&moved, &s.id).is_ok())
        }
    }
}

/// Applies one action and returns the refactored model.
pub fn apply(
    action: &RefactoringAction,
    model: &ArchitectureModel,
) -> Result<ArchitectureModel, RefactoringError> {
    if !precondition(action, model) {
        return Err(RefactoringError::PreconditionViolated {
            action: action.clone(),
        });
    }
    Ok(match action.kind {
        RefactoringKind::CloneNode => clone_node(model, &action.target),
        RefactoringKind::MoveOpNewCompNewNode => move_op_new_comp_new_node(model, &action.target),
        RefactoringKind::MoveOpToComp => move_operation(
            model,
            &action.target,
            action
                .aux_target
                .as_deref()
                .expect("checked by precondition"),
        ),
        RefactoringKind::DeployCompNewNode => deploy_comp_new_node(model, &action.target),
    })
}

/// Applies a sequence left to right.
pub fn apply_sequence(
    sequence: &[RefactoringAction],
    model: &ArchitectureModel,
) -> Result<ArchitectureModel, RefactoringError> {
    let mut current = model.clone();
    for action in sequence {
        current = apply(action, &current)?;
    }
    Ok(current)
}

/// A sequence is feasible when every action's precondition holds on the
/// model produced by the actions before it.
pub fn feasible(sequence: &[RefactoringAction], model: &ArchitectureModel) -> bool {
    apply_sequence(sequence, model).is_ok()
}

/// `Σ brf × weight` over `(brf, weight)` pairs.
pub fn weighted_distance(terms: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    terms.into_iter().map(|(brf, aw)| brf * aw).sum()
}

/// Architectural distance of a sequence. Every target is weighted on the
/// initial model.
pub fn arch_dist(
    sequence: &[RefactoringAction],
    initial: &ArchitectureModel,
    brf: &BrfTable,
) -> Result<f64, RefactoringError> {
    let mut terms = Vec::with_capacity(sequence.len());
    for action in sequence {
        terms.push((
            brf.get(action.kind),
            architectural_weight(initial, &action.element())?,
        ));
    }
    Ok(weighted_distance(terms))
}

/// Draws a random action that is applicable to `model`: the kind uniformly
/// among the four, then a uniform eligible target of that kind. Targets are
/// rejection-sampled within the kind; a kind is dropped from the draw only
/// after `RANDOM_ACTION_ATTEMPTS` failed targets.
pub fn random_action(
    model: &ArchitectureModel,
    rng: &mut impl Rng,
) -> Result<RefactoringAction, RefactoringError> {
    let operations: Vec<&str> = model
        .components
        .iter()
        .flat_map(|c| c.operations.iter().map(|o| o.id.as_str()))
        .collect();
    let deployed: Vec<&str> = model
        .components
        .iter()
        .filter(|c| !model.nodes_of(&c.id).is_empty())
        .map(|c| c.id.as_str())
        .collect();
    let mut kinds = RefactoringKind::ALL.to_vec();
    while !kinds.is_empty() {
        let k = rng.gen_range(0..kinds.len());
        let kind = kinds[k];
        for _ in 0..RANDOM_ACTION_ATTEMPTS {
            let action = match kind {
                RefactoringKind::CloneNode => match model.nodes.choose(rng) {
                    Some(n) => RefactoringAction::clone_node(&n.id),
                    None => break,
                },
                RefactoringKind::MoveOpNewCompNewNode => match operations.choose(rng) {
                    Some(op) => RefactoringAction::move_op_new_comp_new_node(*op),
                    None => break,
                },
                RefactoringKind::MoveOpToComp => {
                    let Some(op) = operations.choose(rng) else {
                        break;
                    };
                    let owner = model.owner_of(op).expect("listed operation");
                    let others: Vec<&&str> = deployed.iter().filter(|c| **c != owner).collect();
                    match others.choose(rng) {
                        Some(dest) => RefactoringAction::move_op_to_comp(*op, **dest),
                        None => continue,
                    }
                }
                RefactoringKind::DeployCompNewNode => match model.components.choose(rng) {
                    Some(c) => RefactoringAction::deploy_comp_new_node(&c.id),
                    None => break,
                },
            };
            if precondition(&action, model) {
                return Ok(action);
            }
        }
        kinds.swap_remove(k);
    }
    Err(RefactoringError::NoEligibleTarget(RANDOM_ACTION_ATTEMPTS))
}

fn fresh_id(taken: &BTreeSet<String>, base: &str, suffix: &str) -> String {
    (1..)
        .map(|k| format!("{base}_{suffix}{k}"))
        .find(|id| !taken.contains(id))
        .expect("unbounded suffixes")
}

fn node_ids(model: &ArchitectureModel) -> BTreeSet<String> {
    model.nodes.iter().map(|n| n.id.clone()).collect()
}

fn link_ids(model: &ArchitectureModel) -> BTreeSet<String> {
    model.links.iter().map(|l| l.id.clone()).collect()
}

fn add_link(model: &mut ArchitectureModel, a: &str, b: &str, failure_prob: f64) {
    if a == b || model.links.iter().any(|l| l.connects(a, b)) {
        return;
    }
    let id = fresh_id(&link_ids(model), &format!("{a}-{b}"), "link");
    model.links.push(CommLink {
        id,
        endpoints: [a.to_string(), b.to_string()],
        failure_prob,
    });
}

/// Failure probability given to a link that has no counterpart to copy:
/// the highest one among the links of `node`, or 0.
fn default_link_failure(model: &ArchitectureModel, node: &str) -> f64 {
    model
        .links
        .iter()
        .filter(|l| l.touches(node))
        .map(|l| l.failure_prob)
        .fold(0.0, f64::max)
}

/// Replica of a node with the same components, speed and links.
fn clone_node(model: &ArchitectureModel, node: &str) -> ArchitectureModel {
    let mut out = model.clone();
    let original = model.node(node).expect("checked by precondition");
    let id = fresh_id(&node_ids(model), node, "clone");
    out.nodes.push(Node {
        id: id.clone(),
        speed_factor: original.speed_factor,
        deployed: original.deployed.clone(),
    });
    let mut taken = link_ids(model);
    for l in &model.links {
        if let Some(other) = l.other_end(node) {
            let link_id = fresh_id(&taken, &l.id, "clone");
            taken.insert(link_id.clone());
            out.links.push(CommLink {
                id: link_id,
                endpoints: [id.clone(), other.to_string()],
                failure_prob: l.failure_prob,
            });
        }
    }
    let fp = default_link_failure(model, node);
    add_link(&mut out, node, &id, fp);
    out
}

/// Rehomes `op` onto `dest`. Messages received by `op` now reach `dest`, and
/// the messages issued while serving them are now sent by `dest`.
fn move_operation(model: &ArchitectureModel, op: &str, dest: &str) -> ArchitectureModel {
    let mut out = model.clone();
    let owner = model.owner_of(op).expect("checked by caller").to_string();
    for c in &mut out.components {
        if c.id == owner {
            c.operations.retain(|o| o.id != op);
        }
    }
    out.components
        .iter_mut()
        .find(|c| c.id == dest)
        .expect("checked by caller")
        .operations
        .push(Operation { id: op.to_string() });
    for (s, scenario) in out.scenarios.iter_mut().enumerate() {
        let Ok(parents) = call_parents(model, &model.scenarios[s]) else {
            continue;
        };
        for (m, parent) in parents.iter().enumerate() {
            if let Some(p) = parent {
                if model.scenarios[s].messages[*p].receiver_op == op {
                    scenario.messages[m].sender = Sender::Component(dest.to_string());
                }
            }
        }
    }
    out
}

/// Components exchanging messages with `op`: the senders of the messages it
/// receives and the receivers of the messages it issues.
fn partners(model: &ArchitectureModel, op: &str) -> BTreeSet<String> {
    let owners = model.owner_map();
    let mut out = BTreeSet::new();
    for s in &model.scenarios {
        let Ok(parents) = call_parents(model, s) else {
            continue;
        };
        for (m, msg) in s.messages.iter().enumerate() {
            if msg.receiver_op == op {
                if let Some(c) = msg.sender.component() {
                    out.insert(c.to_string());
                }
            }
            if let Some(p) = parents[m] {
                if s.messages[p].receiver_op == op {
                    if let Some(c) = owners.get(msg.receiver_op.as_str()) {
                        out.insert(c.to_string());
                    }
                }
            }
        }
    }
    out
}

/// Moves `op` into a new component deployed alone on a new node. The new
/// node is linked to the owner's node and to one node of every partner
/// component, copying the failure probability of the owner's link to it.
fn move_op_new_comp_new_node(model: &ArchitectureModel, op: &str) -> ArchitectureModel {
    let owner = model
        .owner_of(op)
        .expect("checked by precondition")
        .to_string();
    let owner_comp = model.component(&owner).expect("owner exists");
    let owner_nodes: Vec<String> = model
        .nodes_of(&owner)
        .into_iter()
        .map(String::from)
        .collect();
    let home = owner_nodes.first().cloned();
    let speed = home
        .as_deref()
        .and_then(|n| model.node(n))
        .map_or(1.0, |n| n.speed_factor);

    let taken: BTreeSet<String> = model.components.iter().map(|c| c.id.clone()).collect();
    let comp = fresh_id(&taken, &owner, "comp");
    let node = fresh_id(&node_ids(model), home.as_deref().unwrap_or(&owner), "node");

    let mut out = model.clone();
    out.components.push(Component {
        id: comp.clone(),
        operations: vec![],
        failure_prob: owner_comp.failure_prob,
    });
    out.nodes.push(Node {
        id: node.clone(),
        speed_factor: speed,
        deployed: vec![comp.clone()],
    });
    let mut out = move_operation(&out, op, &comp);

    if let Some(home) = &home {
        let fp = default_link_failure(model, home);
        add_link(&mut out, &node, home, fp);
    }
    for partner in partners(model, op) {
        let partner_nodes = model.nodes_of(&partner);
        if partner_nodes
            .iter()
            .any(|n| out.links.iter().any(|l| l.connects(&node, n)))
        {
            continue;
        }
        let Some(target) = partner_nodes.first() else {
            continue;
        };
        let fp = home
            .as_deref()
            .and_then(|h| model.links.iter().find(|l| l.connects(h, target)))
            .map(|l| l.failure_prob)
            .unwrap_or_else(|| {
                home.as_deref()
                    .map_or(0.0, |h| default_link_failure(model, h))
            });
        add_link(&mut out, &node, target, fp);
    }
    out
}

/// Redeploys a component on a new node connected to its original node and
/// to every node directly linked to it, copying link failure probabilities.
fn deploy_comp_new_node(model: &ArchitectureModel, component: &str) -> ArchitectureModel {
    let original: Vec<String> = model
        .nodes_of(component)
        .into_iter()
        .map(String::from)
        .collect();
    let home = original.first().cloned();
    let speed = home
        .as_deref()
        .and_then(|n| model.node(n))
        .map_or(1.0, |n| n.speed_factor);
    let node = fresh_id(&node_ids(model), component, "node");

    let mut out = model.clone();
    for n in &mut out.nodes {
        n.deployed.retain(|c| c != component);
    }
    out.nodes.push(Node {
        id: node.clone(),
        speed_factor: speed,
        deployed: vec![component.to_string()],
    });
    if let Some(home) = &home {
        for l in &model.links {
            if let Some(other) = l.other_end(home) {
                add_link(&mut out, &node, other, l.failure_prob);
            }
        }
        let fp = default_link_failure(model, home);
        add_link(&mut out, &node, home, fp);
    }
    out
}
