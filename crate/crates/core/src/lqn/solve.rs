//! Layered solution of an LQN by decomposition into closed queueing
//! submodels, one per software layer plus one for the processors, iterated
//! to a fixed point.
//!
//! Customer classes are concurrency groups. Every reference chain is a
//! group, and so is every thread-limited task (fewer threads than callers
//! that can reach it), whose threads are its customers. Work done by a task
//! that never makes callers wait for a thread is attributed to the group of
//! its caller, so each customer is counted once per submodel.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::mva::{solve_closed, ClosedNetwork, Station};
use super::{
    ChainResult, LqnError, LqnModel, PerformanceResults, ProcessorResult, TaskKind, TaskResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence bound on the largest per-server utilization change.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Weight of the new estimate when updating propagated waiting times.
    pub relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iters: 100,
            relaxation: 0.5,
        }
    }
}

struct CTask {
    processor: Option<usize>,
    multiplicity: f64,
    think: Option<f64>,
    entries: Vec<usize>,
}

struct CEntry {
    task: usize,
    demand: f64,
    calls: Vec<(usize, f64)>,
}

/// Index-based view of an LQN with its layering precomputed.
struct Compiled {
    tasks: Vec<CTask>,
    entries: Vec<CEntry>,
    processors: Vec<u32>,
    /// Tasks in topological order, callers before callees.
    order: Vec<usize>,
    depth: Vec<usize>,
    references: Vec<usize>,
    /// Visits to each entry per cycle of each chain.
    visits: Vec<Vec<f64>>,
    groups: Vec<Group>,
    /// Group rooted at each thread-limited task.
    group_of: Vec<Option<usize>>,
    /// Visits to every entry per visit to entry `e` without crossing into
    /// another group: `unit[e][e']`.
    unit: Vec<Vec<f64>>,
    /// Upper bound on the customers that can be inside each task at once.
    bound: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Group {
    Chain(usize),
    Limited(usize),
}

fn invalid(msg: impl Into<String>) -> LqnError {
    LqnError::InvalidModel(msg.into())
}

fn compile(lqn: &LqnModel) -> Result<Compiled, LqnError> {
    let proc_index: HashMap<&str, usize> = lqn
        .processors
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id.as_str(), i))
        .collect();
    let task_index: HashMap<&str, usize> = lqn
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();
    let entry_index: HashMap<&str, usize> = lqn
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();
    if proc_index.len() != lqn.processors.len()
        || task_index.len() != lqn.tasks.len()
        || entry_index.len() != lqn.entries.len()
    {
        return Err(invalid("duplicate processor, task or entry id"));
    }
    for p in &lqn.processors {
        if p.multiplicity == 0 {
            return Err(invalid(format!("processor {} has multiplicity 0", p.id)));
        }
    }

    let mut tasks = Vec::with_capacity(lqn.tasks.len());
    for t in &lqn.tasks {
        let processor = match &t.processor {
            Some(p) => Some(
                *proc_index
                    .get(p.as_str())
                    .ok_or_else(|| invalid(format!("task {} on unknown processor {p}", t.id)))?,
            ),
            None => None,
        };
        let think = match t.kind {
            TaskKind::Reference { think_time } => {
                if !(think_time >= 0.0 && think_time.is_finite()) {
                    return Err(invalid(format!("task {} has invalid think time", t.id)));
                }
                Some(think_time)
            }
            TaskKind::Server => {
                if t.multiplicity == 0 {
                    return Err(invalid(format!("task {} has multiplicity 0", t.id)));
                }
                None
            }
        };
        tasks.push(CTask {
            processor,
            multiplicity: t.multiplicity as f64,
            think,
            entries: Vec::new(),
        });
    }

    let mut entries = Vec::with_capacity(lqn.entries.len());
    for (i, e) in lqn.entries.iter().enumerate() {
        let task = *task_index
            .get(e.task.as_str())
            .ok_or_else(|| invalid(format!("entry {} on unknown task {}", e.id, e.task)))?;
        tasks[task].entries.push(i);
        entries.push(CEntry {
            task,
            demand: 0.0,
            calls: Vec::new(),
        });
    }
    let mut has_activity = vec![false; entries.len()];
    for a in &lqn.activities {
        let e = *entry_index
            .get(a.entry.as_str())
            .ok_or_else(|| invalid(format!("activity {} of unknown entry {}", a.id, a.entry)))?;
        if !(a.host_demand >= 0.0 && a.host_demand.is_finite()) {
            return Err(invalid(format!(
                "activity {} has invalid host demand",
                a.id
            )));
        }
        has_activity[e] = true;
        entries[e].demand += a.host_demand;
        for c in &a.calls {
            let target = *entry_index.get(c.target.as_str()).ok_or_else(|| {
                invalid(format!(
                    "activity {} calls unknown entry {}",
                    a.id, c.target
                ))
            })?;
            if !(c.mean_calls > 0.0 && c.mean_calls.is_finite()) {
                return Err(invalid(format!("activity {} has invalid mean calls", a.id)));
            }
            entries[e].calls.push((target, c.mean_calls));
        }
    }
    if let Some(i) = has_activity.iter().position(|h| !h) {
        return Err(invalid(format!(
            "entry {} has no activity",
            lqn.entries[i].id
        )));
    }
    for (i, t) in tasks.iter().enumerate() {
        if t.think.is_some() && t.entries.is_empty() {
            return Err(invalid(format!(
                "reference task {} has no entry",
                lqn.tasks[i].id
            )));
        }
    }

    // Task-level call graph, layering and cycle detection.
    let n = tasks.len();
    let mut callees: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut callers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &entries {
        for &(target, _) in &e.calls {
            let (from, to) = (e.task, entries[target].task);
            if tasks[to].think.is_some() {
                return Err(invalid(format!(
                    "reference task {} is called",
                    lqn.tasks[to].id
                )));
            }
            if !callees[from].contains(&to) {
                callees[from].push(to);
                callers[to].push(from);
            }
        }
    }
    let mut indegree: Vec<usize> = callers.iter().map(Vec::len).collect();
    let mut order: Vec<usize> = (0..n).filter(|&t| indegree[t] == 0).collect();
    let mut head = 0;
    while head < order.len() {
        let t = order[head];
        head += 1;
        for &c in &callees[t] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                order.push(c);
            }
        }
    }
    if order.len() != n {
        let stuck: Vec<&str> = (0..n)
            .filter(|&t| indegree[t] > 0)
            .map(|t| lqn.tasks[t].id.as_str())
            .collect();
        return Err(invalid(format!(
            "cyclic call graph among tasks {}",
            stuck.join(", ")
        )));
    }
    let mut depth = vec![0usize; n];
    for &t in &order {
        for &c in &callees[t] {
            depth[c] = depth[c].max(depth[t] + 1);
        }
    }

    let references: Vec<usize> = (0..n).filter(|&t| tasks[t].think.is_some()).collect();
    let mut visits = Vec::with_capacity(references.len());
    for &r in &references {
        let mut v = vec![0.0; entries.len()];
        for &e in &tasks[r].entries {
            v[e] = 1.0;
        }
        for &t in &order {
            for &e in &tasks[t].entries {
                if v[e] == 0.0 {
                    continue;
                }
                for &(target, y) in &entries[e].calls {
                    v[target] += v[e] * y;
                }
            }
        }
        visits.push(v);
    }

    // Concurrency bounds and thread-limited tasks.
    let mut bound = vec![0.0; n];
    let mut limited = vec![false; n];
    for &t in &order {
        if tasks[t].think.is_some() {
            bound[t] = tasks[t].multiplicity;
        } else {
            let upstream: f64 = callers[t].iter().map(|&c| bound[c]).sum();
            limited[t] = tasks[t].multiplicity < upstream;
            bound[t] = upstream.min(tasks[t].multiplicity);
        }
    }
    let mut groups: Vec<Group> = (0..references.len()).map(Group::Chain).collect();
    let mut group_of = vec![None; n];
    for &t in &order {
        if limited[t] {
            group_of[t] = Some(groups.len());
            groups.push(Group::Limited(t));
        }
    }
    let mut unit = vec![vec![0.0; entries.len()]; entries.len()];
    for &t in order.iter().rev() {
        for &e in &tasks[t].entries {
            let mut row = vec![0.0; entries.len()];
            row[e] = 1.0;
            for &(target, y) in &entries[e].calls {
                if !limited[entries[target].task] {
                    for (r, u) in row.iter_mut().zip(&unit[target]) {
                        *r += y * u;
                    }
                }
            }
            unit[e] = row;
        }
    }

    Ok(Compiled {
        tasks,
        entries,
        processors: lqn.processors.iter().map(|p| p.multiplicity).collect(),
        order,
        depth,
        references,
        visits,
        groups,
        group_of,
        unit,
        bound,
    })
}

/// Per-iteration state of the fixed point, indexed by group.
struct State {
    /// Waiting time for a thread per call: `wait[group][task]`.
    wait: Vec<Vec<f64>>,
    /// Processor residence over demand: `stretch[group][processor]`.
    stretch: Vec<Vec<f64>>,
}

struct Flows {
    /// Time from accepting to completing one request when made from within
    /// a group: `service[group][entry]`.
    service: Vec<Vec<f64>>,
    /// Visits to each entry per group cycle.
    group_visits: Vec<Vec<f64>>,
    group_throughput: Vec<f64>,
    group_cycle: Vec<f64>,
    group_population: Vec<f64>,
    /// Calls per group cycle to each thread-limited task with their mean
    /// service: `calls[group][task] = (calls, service)`.
    calls: Vec<Vec<(f64, f64)>>,
    /// `ancestry[i][j]`: expected customers of group `j` blocked waiting,
    /// directly or transitively, for a busy customer of group `i`.
    ancestry: Vec<Vec<f64>>,
    chain_response: Vec<f64>,
    entry_throughput: Vec<f64>,
    task_throughput: Vec<f64>,
}

impl Compiled {
    fn limited_target(&self, target: usize) -> Option<usize> {
        self.group_of[self.entries[target].task]
    }
}

fn flows(net: &Compiled, state: &State) -> Result<Flows, LqnError> {
    let g_count = net.groups.len();
    let mut service = vec![vec![0.0; net.entries.len()]; g_count];
    for &t in net.order.iter().rev() {
        for &e in &net.tasks[t].entries {
            let entry = &net.entries[e];
            for g in 0..g_count {
                let stretch = net.tasks[t].processor.map_or(1.0, |p| state.stretch[g][p]);
                let mut v = entry.demand * stretch;
                for &(target, y) in &entry.calls {
                    v += y * match net.limited_target(target) {
                        Some(h) => state.wait[g][net.entries[target].task] + service[h][target],
                        None => service[g][target],
                    };
                }
                service[g][e] = v;
            }
        }
    }

    let chains = net.references.len();
    let mut chain_response = Vec::with_capacity(chains);
    let mut chain_throughput = Vec::with_capacity(chains);
    for (c, &r) in net.references.iter().enumerate() {
        let response: f64 = net.tasks[r].entries.iter().map(|&e| service[c][e]).sum();
        let cycle = net.tasks[r].think.unwrap_or(0.0) + response;
        let population = net.tasks[r].multiplicity;
        let throughput = if population == 0.0 {
            0.0
        } else if cycle > 0.0 {
            population / cycle
        } else {
            return Err(invalid(
                "reference task with zero think time and zero demand",
            ));
        };
        chain_response.push(response);
        chain_throughput.push(throughput);
    }
    let mut entry_throughput = vec![0.0; net.entries.len()];
    for (c, v) in net.visits.iter().enumerate() {
        for (e, visits) in v.iter().enumerate() {
            entry_throughput[e] += chain_throughput[c] * visits;
        }
    }
    let task_throughput: Vec<f64> = net
        .tasks
        .iter()
        .map(|t| t.entries.iter().map(|&e| entry_throughput[e]).sum())
        .collect();

    let mut group_visits = vec![vec![0.0; net.entries.len()]; g_count];
    let mut group_throughput = vec![0.0; g_count];
    let mut group_cycle = vec![0.0; g_count];
    let mut group_population = vec![0.0; g_count];
    for (g, group) in net.groups.iter().enumerate() {
        let (task, throughput) = match *group {
            Group::Chain(c) => (net.references[c], chain_throughput[c]),
            Group::Limited(t) => (t, task_throughput[t]),
        };
        group_throughput[g] = throughput;
        group_population[g] = net.tasks[task].multiplicity;
        if throughput <= 0.0 {
            continue;
        }
        for &e in &net.tasks[task].entries {
            let weight = match *group {
                Group::Chain(_) => 1.0,
                Group::Limited(_) => entry_throughput[e] / throughput,
            };
            for (v, u) in group_visits[g].iter_mut().zip(&net.unit[e]) {
                *v += weight * u;
            }
        }
        group_cycle[g] = match *group {
            Group::Chain(c) => net.tasks[task].think.unwrap_or(0.0) + chain_response[c],
            Group::Limited(_) => group_population[g] / throughput,
        };
    }
    let calls: Vec<Vec<(f64, f64)>> = (0..g_count)
        .map(|g| group_calls(net, &service, &group_visits[g]))
        .collect();
    let mut ancestry = vec![vec![0.0; g_count]; g_count];
    for (i, group) in net.groups.iter().enumerate() {
        let Group::Limited(t) = *group else { continue };
        let total: f64 = (0..g_count)
            .map(|g| group_throughput[g] * calls[g][t].0)
            .sum();
        if total <= 0.0 {
            continue;
        }
        // Groups are ordered callers first, so caller rows are final.
        let mut row = vec![0.0; g_count];
        for g in 0..g_count {
            let share = group_throughput[g] * calls[g][t].0 / total;
            if share > 0.0 {
                row[g] += share;
                for (r, a) in row.iter_mut().zip(&ancestry[g]) {
                    *r += share * a;
                }
            }
        }
        ancestry[i] = row;
    }
    Ok(Flows {
        service,
        group_visits,
        group_throughput,
        group_cycle,
        group_population,
        calls,
        ancestry,
        chain_response,
        entry_throughput,
        task_throughput,
    })
}

fn utilizations(net: &Compiled, flows: &Flows) -> (Vec<f64>, Vec<f64>) {
    let mut processors = vec![0.0; net.processors.len()];
    let mut tasks = vec![0.0; net.tasks.len()];
    for (t, task) in net.tasks.iter().enumerate() {
        if let Some(p) = task.processor {
            processors[p] += task
                .entries
                .iter()
                .map(|&e| flows.entry_throughput[e] * net.entries[e].demand)
                .sum::<f64>();
        }
        if task.think.is_none() {
            for g in 0..net.groups.len() {
                let x = flows.group_throughput[g];
                tasks[t] += task
                    .entries
                    .iter()
                    .map(|&e| x * flows.group_visits[g][e] * flows.service[g][e])
                    .sum::<f64>();
            }
        }
    }
    (processors, tasks)
}

fn station_kind(servers: f64, customers: f64) -> Station {
    if servers >= customers {
        Station::Delay
    } else {
        Station::Queue {
            servers: servers as u32,
        }
    }
}

/// Calls per group cycle to each thread-limited task, with the mean time
/// such a call spends being served: `(calls, service)` per task.
fn group_calls(net: &Compiled, service: &[Vec<f64>], visits: &[f64]) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); net.tasks.len()];
    for (e, &v) in visits.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for &(target, y) in &net.entries[e].calls {
            if let Some(h) = net.limited_target(target) {
                let slot = &mut out[net.entries[target].task];
                slot.0 += v * y;
                slot.1 += v * y * service[h][target];
            }
        }
    }
    for slot in &mut out {
        if slot.0 > 0.0 {
            slot.1 /= slot.0;
        }
    }
    out
}

fn interlock_among(flows: &Flows, classes: &[usize], enabled: bool) -> Vec<Vec<f64>> {
    if !enabled {
        return Vec::new();
    }
    classes
        .iter()
        .map(|&i| classes.iter().map(|&j| flows.ancestry[i][j]).collect())
        .collect()
}

/// Solves one submodel per software layer and returns new thread waits.
fn software_layers(net: &Compiled, flows: &Flows, state: &State, lock: bool) -> Vec<Vec<f64>> {
    let mut wait = state.wait.clone();
    let calls = &flows.calls;
    let max_depth = net.depth.iter().copied().max().unwrap_or(0);
    for layer in 1..=max_depth {
        let stations: Vec<usize> = (0..net.tasks.len())
            .filter(|&t| {
                net.depth[t] == layer && net.group_of[t].is_some() && flows.task_throughput[t] > 0.0
            })
            .collect();
        if stations.is_empty() {
            continue;
        }
        let classes: Vec<usize> = (0..net.groups.len())
            .filter(|&g| {
                flows.group_throughput[g] > 0.0 && stations.iter().any(|&t| calls[g][t].0 > 0.0)
            })
            .collect();
        let mut population = Vec::new();
        let mut think_time = Vec::new();
        let mut demand = Vec::new();
        for &g in &classes {
            let inside: f64 = stations
                .iter()
                .map(|&t| calls[g][t].0 * (state.wait[g][t] + calls[g][t].1))
                .sum();
            population.push(flows.group_population[g]);
            think_time.push((flows.group_cycle[g] - inside).max(0.0));
            demand.push(
                stations
                    .iter()
                    .map(|&t| calls[g][t].0 * calls[g][t].1)
                    .collect(),
            );
        }
        let kinds = stations
            .iter()
            .map(
                |&t| match station_kind(net.tasks[t].multiplicity, net.bound[t] + 1.0) {
                    Station::Queue { servers } => Station::Fcfs { servers },
                    other => other,
                },
            )
            .collect();
        let visits = classes
            .iter()
            .map(|&g| stations.iter().map(|&t| calls[g][t].0).collect())
            .collect();
        let interlock = interlock_among(flows, &classes, lock);
        let sol = solve_closed(&ClosedNetwork {
            population,
            think_time,
            stations: kinds,
            demand,
            visits,
            interlock,
        });
        for (i, &g) in classes.iter().enumerate() {
            for (k, &t) in stations.iter().enumerate() {
                let (v, s) = calls[g][t];
                if v > 0.0 {
                    wait[g][t] = (sol.residence[i][k] / v - s).max(0.0);
                }
            }
        }
    }
    wait
}

/// Solves the processor submodel and returns new processor stretches.
fn processor_layer(net: &Compiled, flows: &Flows, state: &State, lock: bool) -> Vec<Vec<f64>> {
    let procs = net.processors.len();
    let g_count = net.groups.len();
    let mut stretch = vec![vec![1.0; procs]; g_count];
    let mut classes = Vec::new();
    let mut demand = Vec::new();
    for g in 0..g_count {
        if flows.group_throughput[g] <= 0.0 {
            continue;
        }
        let mut row = vec![0.0; procs];
        for (e, &v) in flows.group_visits[g].iter().enumerate() {
            if let Some(p) = net.tasks[net.entries[e].task].processor {
                row[p] += v * net.entries[e].demand;
            }
        }
        if row.iter().any(|&d| d > 0.0) {
            classes.push(g);
            demand.push(row);
        }
    }
    if classes.is_empty() {
        return stretch;
    }
    let mut customers = vec![0.0; procs];
    let mut population = Vec::new();
    let mut think_time = Vec::new();
    for (i, &g) in classes.iter().enumerate() {
        let mut inside = 0.0;
        for p in 0..procs {
            if demand[i][p] > 0.0 {
                customers[p] += flows.group_population[g];
                inside += demand[i][p] * state.stretch[g][p];
            }
        }
        population.push(flows.group_population[g]);
        think_time.push((flows.group_cycle[g] - inside).max(0.0));
    }
    let stations = net
        .processors
        .iter()
        .zip(&customers)
        .map(|(&m, &n)| station_kind(m as f64, n))
        .collect();
    let interlock = interlock_among(flows, &classes, lock);
    let sol = solve_closed(&ClosedNetwork {
        population,
        think_time,
        stations,
        demand: demand.clone(),
        visits: Vec::new(),
        interlock,
    });
    for (i, &g) in classes.iter().enumerate() {
        for p in 0..procs {
            if demand[i][p] > 0.0 {
                stretch[g][p] = (sol.residence[i][p] / demand[i][p]).max(1.0);
            }
        }
    }
    stretch
}

fn relax(old: &mut [Vec<f64>], new: Vec<Vec<f64>>, omega: f64) {
    for (o, n) in old.iter_mut().zip(new) {
        for (a, b) in o.iter_mut().zip(n) {
            *a += omega * (b - *a);
        }
    }
}

/// Solves an LQN by layered decomposition.
///
/// Each outer iteration solves one closed submodel per software layer (the
/// layer's thread-limited tasks as multi-server stations, serving the
/// groups that call them) and one submodel for the processors, with exact
/// MVA when the population lattice is small and Schweitzer MVA otherwise.
/// A group's think time in a submodel is its cycle time minus the time it
/// spends at that submodel's stations; thread waits and processor
/// residences found in the submodels feed back into the service times. The
/// loop stops when no per-server utilization moves by more than
/// `opts.tolerance`, or after `opts.max_iters` iterations with
/// `converged = false`.
///
/// Blocked callers are excluded from the queues their own servers see. If
/// that correction ever pushes a processor past its capacity the model is
/// solved again without it.
///
/// Reported processor utilizations are capped at the server count: near
/// saturation the fixed point is only consistent to `opts.tolerance`.
pub fn solve(lqn: &LqnModel, opts: &SolverOptions) -> Result<PerformanceResults, LqnError> {
    let net = compile(lqn)?;
    let mut results = iterate(lqn, &net, opts, true)?;
    let over = results
        .processors
        .iter()
        .any(|p| p.utilization > p.multiplicity as f64 + 1e-9);
    if over {
        results = iterate(lqn, &net, opts, false)?;
    }
    for p in &mut results.processors {
        p.utilization = p.utilization.min(p.multiplicity as f64);
    }
    Ok(results)
}

fn iterate(
    lqn: &LqnModel,
    net: &Compiled,
    opts: &SolverOptions,
    lock: bool,
) -> Result<PerformanceResults, LqnError> {
    let g_count = net.groups.len();
    let mut state = State {
        wait: vec![vec![0.0; net.tasks.len()]; g_count],
        stretch: vec![vec![1.0; net.processors.len()]; g_count],
    };
    let omega = opts.relaxation.clamp(0.0, 1.0);
    let mut flows_now = flows(net, &state)?;
    let (mut prev_proc, mut prev_task) = utilizations(net, &flows_now);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let wait = software_layers(net, &flows_now, &state, lock);
        let stretch = processor_layer(net, &flows_now, &state, lock);
        relax(&mut state.wait, wait, omega);
        relax(&mut state.stretch, stretch, omega);
        flows_now = flows(net, &state)?;
        let (proc_u, task_u) = utilizations(net, &flows_now);
        let mut delta: f64 = 0.0;
        for (p, m) in net.processors.iter().enumerate() {
            delta = delta.max((proc_u[p] - prev_proc[p]).abs() / *m as f64);
        }
        for (t, task) in net.tasks.iter().enumerate() {
            delta = delta.max((task_u[t] - prev_task[t]).abs() / task.multiplicity.max(1.0));
        }
        prev_proc = proc_u;
        prev_task = task_u;
        if delta < opts.tolerance {
            converged = true;
            break;
        }
    }
    // One undamped step so the reported indices sit on the submodel
    // solutions rather than on the relaxed trajectory approaching them.
    if iterations > 0 {
        state.wait = software_layers(net, &flows_now, &state, lock);
        state.stretch = processor_layer(net, &flows_now, &state, lock);
        flows_now = flows(net, &state)?;
        (prev_proc, prev_task) = utilizations(net, &flows_now);
    }

    let chains = net
        .references
        .iter()
        .enumerate()
        .map(|(i, &r)| ChainResult {
            task: lqn.tasks[r].id.clone(),
            throughput: flows_now.group_throughput[i],
            response_time: flows_now.chain_response[i],
        })
        .collect();
    let processors = lqn
        .processors
        .iter()
        .zip(&prev_proc)
        .map(|(p, &u)| ProcessorResult {
            id: p.id.clone(),
            multiplicity: p.multiplicity,
            utilization: u,
        })
        .collect();
    let tasks = lqn
        .tasks
        .iter()
        .enumerate()
        .map(|(t, task)| TaskResult {
            id: task.id.clone(),
            processor: task.processor.clone(),
            throughput: flows_now.task_throughput[t],
            utilization: prev_task[t],
        })
        .collect();
    Ok(PerformanceResults {
        chains,
        processors,
        tasks,
        iterations,
        converged,
    })
}
