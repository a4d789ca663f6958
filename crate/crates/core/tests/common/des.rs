//! Event-driven simulator of a layered queueing network, used only as an
//! accuracy oracle for the analytic solver.
//!
//! Processors are processor-sharing with `m` servers, task threads are FCFS
//! with `m` servers and activity demands are exponential. The number of
//! synchronous calls per invocation is either exactly `mean_calls` (which
//! must then be an integer) or geometric on {0, 1, ...} with that mean, the
//! usual stochastic-phase semantics of layered queueing networks.

use std::collections::{BinaryHeap, HashMap, VecDeque};

use archopt_core::lqn::{LqnModel, TaskKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallCounts {
    Deterministic,
    Geometric,
}

#[derive(Debug, Clone)]
pub struct SimResults {
    /// Per reference task id: cycles per second.
    pub throughput: HashMap<String, f64>,
    /// Per processor id: mean busy servers.
    pub utilization: HashMap<String, f64>,
}

struct Task {
    processor: Option<usize>,
    threads: usize,
    busy: usize,
    queue: VecDeque<(usize, usize)>,
    think: Option<f64>,
    entries: Vec<usize>,
}

struct Entry {
    task: usize,
    demand: f64,
    calls: Vec<(usize, f64)>,
}

struct Frame {
    entry: usize,
    call: usize,
    done: u32,
    /// Calls still to make to the current target.
    todo: u32,
}

struct Customer {
    reference: usize,
    next_ref_entry: usize,
    stack: Vec<Frame>,
}

#[derive(PartialEq)]
struct Wake(f64, usize);
impl Eq for Wake {}
impl PartialOrd for Wake {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Wake {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

struct Sim {
    rng: ChaCha8Rng,
    now: f64,
    tasks: Vec<Task>,
    entries: Vec<Entry>,
    proc_servers: Vec<usize>,
    /// Jobs on each processor: (customer, remaining work).
    proc_jobs: Vec<Vec<(usize, f64)>>,
    customers: Vec<Customer>,
    thinking: BinaryHeap<Wake>,
    completions: Vec<u64>,
    busy_area: Vec<f64>,
    measuring: bool,
    counts: CallCounts,
}

impl Sim {
    fn call_count(&mut self, mean: f64) -> u32 {
        match self.counts {
            CallCounts::Deterministic => mean.round() as u32,
            CallCounts::Geometric => {
                let q = mean / (1.0 + mean);
                let mut k = 0;
                while self.rng.gen::<f64>() < q {
                    k += 1;
                }
                k
            }
        }
    }

    fn exp(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        let u: f64 = self.rng.gen_range(f64::EPSILON..1.0);
        -mean * u.ln()
    }

    fn start_entry(&mut self, c: usize, entry: usize) {
        let todo = match self.entries[entry].calls.first() {
            Some(&(_, y)) => self.call_count(y),
            None => 0,
        };
        self.customers[c].stack.push(Frame {
            entry,
            call: 0,
            done: 0,
            todo,
        });
        let e = &self.entries[entry];
        let processor = self.tasks[e.task].processor;
        let demand = e.demand;
        match processor {
            Some(p) if demand > 0.0 => {
                let work = self.exp(demand);
                self.proc_jobs[p].push((c, work));
            }
            _ => self.continue_calls(c),
        }
    }

    fn continue_calls(&mut self, c: usize) {
        loop {
            let Some(top) = self.customers[c].stack.last() else {
                return;
            };
            let e = top.entry;
            while {
                let f = self.customers[c].stack.last().expect("frame");
                f.call < self.entries[e].calls.len() && f.done >= f.todo
            } {
                let next = self.customers[c].stack.last().expect("frame").call + 1;
                let todo = match self.entries[e].calls.get(next) {
                    Some(&(_, y)) => self.call_count(y),
                    None => 0,
                };
                let f = self.customers[c].stack.last_mut().expect("frame");
                f.call = next;
                f.done = 0;
                f.todo = todo;
            }
            let frame = self.customers[c].stack.last_mut().expect("frame");
            let entry = &self.entries[frame.entry];
            if frame.call < entry.calls.len() {
                let target = entry.calls[frame.call].0;
                frame.done += 1;
                let t = self.entries[target].task;
                if self.tasks[t].busy < self.tasks[t].threads {
                    self.tasks[t].busy += 1;
                    self.start_entry(c, target);
                } else {
                    self.tasks[t].queue.push_back((c, target));
                }
                return;
            }
            // Entry finished: release the thread and hand it over.
            let finished = self.customers[c].stack.pop().expect("frame");
            let t = self.entries[finished.entry].task;
            if self.tasks[t].think.is_none() {
                if let Some((next, target)) = self.tasks[t].queue.pop_front() {
                    self.start_entry(next, target);
                } else {
                    self.tasks[t].busy -= 1;
                }
            }
            if self.customers[c].stack.is_empty() {
                let r = self.customers[c].reference;
                let idx = self.customers[c].next_ref_entry + 1;
                if idx < self.tasks[r].entries.len() {
                    self.customers[c].next_ref_entry = idx;
                    let e = self.tasks[r].entries[idx];
                    self.start_entry(c, e);
                } else {
                    self.customers[c].next_ref_entry = 0;
                    if self.measuring {
                        self.completions[r] += 1;
                    }
                    let think = self.tasks[r].think.unwrap_or(0.0);
                    let delay = self.exp(think);
                    self.thinking.push(Wake(self.now + delay, c));
                }
                return;
            }
        }
    }

    fn advance(&mut self, dt: f64) {
        for p in 0..self.proc_jobs.len() {
            let n = self.proc_jobs[p].len();
            if n == 0 {
                continue;
            }
            let m = self.proc_servers[p];
            let rate = (m as f64 / n as f64).min(1.0);
            for job in &mut self.proc_jobs[p] {
                job.1 -= dt * rate;
            }
            if self.measuring {
                self.busy_area[p] += dt * n.min(m) as f64;
            }
        }
        self.now += dt;
    }
}

pub fn simulate(
    lqn: &LqnModel,
    counts: CallCounts,
    seed: u64,
    warmup: f64,
    horizon: f64,
) -> SimResults {
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

    let mut tasks: Vec<Task> = lqn
        .tasks
        .iter()
        .map(|t| Task {
            processor: t.processor.as_deref().map(|p| proc_index[p]),
            threads: t.multiplicity as usize,
            busy: 0,
            queue: VecDeque::new(),
            think: match t.kind {
                TaskKind::Reference { think_time } => Some(think_time),
                TaskKind::Server => None,
            },
            entries: Vec::new(),
        })
        .collect();
    let mut entries: Vec<Entry> = lqn
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let task = task_index[e.task.as_str()];
            tasks[task].entries.push(i);
            Entry {
                task,
                demand: 0.0,
                calls: Vec::new(),
            }
        })
        .collect();
    for a in &lqn.activities {
        let e = entry_index[a.entry.as_str()];
        entries[e].demand += a.host_demand;
        for c in &a.calls {
            if counts == CallCounts::Deterministic {
                assert!(
                    (c.mean_calls.round() - c.mean_calls).abs() < 1e-9,
                    "deterministic calls need integer counts"
                );
            }
            entries[e]
                .calls
                .push((entry_index[c.target.as_str()], c.mean_calls));
        }
    }

    let mut customers = Vec::new();
    for (r, t) in tasks.iter().enumerate() {
        if t.think.is_some() {
            for _ in 0..t.threads {
                customers.push(Customer {
                    reference: r,
                    next_ref_entry: 0,
                    stack: Vec::new(),
                });
            }
        }
    }
    let n_tasks = tasks.len();
    let mut sim = Sim {
        rng: ChaCha8Rng::seed_from_u64(seed),
        now: 0.0,
        tasks,
        entries,
        proc_servers: lqn
            .processors
            .iter()
            .map(|p| p.multiplicity as usize)
            .collect(),
        proc_jobs: vec![Vec::new(); lqn.processors.len()],
        customers,
        thinking: BinaryHeap::new(),
        completions: vec![0; n_tasks],
        busy_area: vec![0.0; lqn.processors.len()],
        measuring: false,
        counts,
    };
    for c in 0..sim.customers.len() {
        let r = sim.customers[c].reference;
        let think = sim.tasks[r].think.unwrap_or(0.0);
        let delay = sim.exp(think);
        sim.thinking.push(Wake(delay, c));
    }

    let end = warmup + horizon;
    loop {
        // Next processor completion.
        let mut next_proc: Option<(f64, usize, usize)> = None;
        for (p, jobs) in sim.proc_jobs.iter().enumerate() {
            if jobs.is_empty() {
                continue;
            }
            let rate = (sim.proc_servers[p] as f64 / jobs.len() as f64).min(1.0);
            let (j, rem) = jobs
                .iter()
                .enumerate()
                .map(|(j, job)| (j, job.1))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            let dt = rem.max(0.0) / rate;
            if next_proc.is_none_or(|(best, _, _)| dt < best) {
                next_proc = Some((dt, p, j));
            }
        }
        let next_think = sim.thinking.peek().map(|w| w.0 - sim.now);
        let (dt, is_proc) = match (next_proc, next_think) {
            (Some((a, _, _)), Some(b)) if a <= b => (a, true),
            (Some((a, _, _)), None) => (a, true),
            (_, Some(b)) => (b.max(0.0), false),
            (None, None) => break,
        };
        if !sim.measuring && sim.now + dt >= warmup {
            let pre = warmup - sim.now;
            sim.advance(pre);
            sim.measuring = true;
            continue;
        }
        if sim.now + dt >= end {
            sim.advance(end - sim.now);
            break;
        }
        sim.advance(dt);
        if is_proc {
            let (_, p, j) = next_proc.expect("processor event");
            let (c, _) = sim.proc_jobs[p].swap_remove(j);
            sim.continue_calls(c);
        } else {
            let Wake(_, c) = sim.thinking.pop().expect("think event");
            let r = sim.customers[c].reference;
            let e = sim.tasks[r].entries[0];
            sim.start_entry(c, e);
        }
    }

    let mut throughput = HashMap::new();
    for (r, t) in lqn.tasks.iter().enumerate() {
        if t.is_reference() {
            throughput.insert(t.id.clone(), sim.completions[r] as f64 / horizon);
        }
    }
    let utilization = lqn
        .processors
        .iter()
        .enumerate()
        .map(|(p, proc_)| (proc_.id.clone(), sim.busy_area[p] / horizon))
        .collect();
    SimResults {
        throughput,
        utilization,
    }
}
