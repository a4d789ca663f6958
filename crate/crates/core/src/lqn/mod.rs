//! Layered queueing networks: model types, the architecture-to-LQN
//! transformation, a layered approximate-MVA solver and the perfQ indicator.

mod dump;
pub mod mva;
mod perfq;
mod solve;
mod transform;

use serde::{Deserialize, Serialize};

use crate::model::ModelError;

pub use dump::{dump_lqn, write_dump};
pub use perfq::{
    perfq, perfq_terms, utilization_correction, IndexKind, IndexTerm, UTILIZATION_THRESHOLD,
};
pub use solve::{solve, SolverOptions};
pub use transform::{reference_task_id, transform};

#[derive(Debug, thiserror::Error)]
pub enum LqnError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid LQN model: {0}")]
    InvalidModel(String),
    #[error("no common performance index between the two results")]
    EmptyIndexSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqnModel {
    pub name: String,
    pub processors: Vec<Processor>,
    pub tasks: Vec<Task>,
    pub entries: Vec<Entry>,
    pub activities: Vec<Activity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Processor {
    pub id: String,
    pub multiplicity: u32,
    pub speed_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskKind {
    /// Closed workload source; `multiplicity` is the customer population.
    Reference {
        think_time: f64,
    },
    Server,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    /// Hosting processor. Reference tasks usually have none.
    pub processor: Option<String>,
    pub multiplicity: u32,
    pub kind: TaskKind,
}

impl Task {
    pub fn is_reference(&self) -> bool {
        matches!(self.kind, TaskKind::Reference { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub task: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: String,
    pub entry: String,
    /// Processor demand in seconds, already scaled by the processor speed.
    pub host_demand: f64,
    pub calls: Vec<SynchCall>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynchCall {
    pub target: String,
    pub mean_calls: f64,
}

impl LqnModel {
    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn processor(&self, id: &str) -> Option<&Processor> {
        self.processors.iter().find(|p| p.id == id)
    }

    pub fn entries_of<'a>(&'a self, task: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.task == task)
    }

    pub fn activities_of<'a>(&'a self, entry: &'a str) -> impl Iterator<Item = &'a Activity> + 'a {
        self.activities.iter().filter(move |a| a.entry == entry)
    }

    pub fn server_tasks(&self) -> impl Iterator<Item = &Task> {
        self.tasks.iter().filter(|t| !t.is_reference())
    }

    pub fn reference_tasks(&self) -> impl Iterator<Item = &Task> {
        self.tasks.iter().filter(|t| t.is_reference())
    }

    /// Total host demand of an entry over all its activities.
    pub fn entry_demand(&self, entry: &str) -> f64 {
        self.activities_of(entry).map(|a| a.host_demand).sum()
    }
}

/// Solved performance indices of an LQN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceResults {
    /// One chain per reference task.
    pub chains: Vec<ChainResult>,
    pub processors: Vec<ProcessorResult>,
    pub tasks: Vec<TaskResult>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    /// Reference task id.
    pub task: String,
    /// Cycles completed per second.
    pub throughput: f64,
    /// Time per cycle spent outside think time, in seconds.
    pub response_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessorResult {
    pub id: String,
    pub multiplicity: u32,
    /// Mean number of busy servers, in `[0, multiplicity]`.
    pub utilization: f64,
}

impl ProcessorResult {
    /// Per-server utilization in `[0, 1]`.
    pub fn normalized_utilization(&self) -> f64 {
        self.utilization / self.multiplicity.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub id: String,
    pub processor: Option<String>,
    pub throughput: f64,
    /// Mean number of busy threads.
    pub utilization: f64,
}

impl PerformanceResults {
    pub fn chain(&self, task: &str) -> Option<&ChainResult> {
        self.chains.iter().find(|c| c.task == task)
    }

    pub fn processor(&self, id: &str) -> Option<&ProcessorResult> {
        self.processors.iter().find(|p| p.id == id)
    }

    pub fn task(&self, id: &str) -> Option<&TaskResult> {
        self.tasks.iter().find(|t| t.id == id)
    }
}
