use std::collections::{BTreeMap, HashMap};

use super::{Activity, Entry, LqnError, LqnModel, Processor, SynchCall, Task, TaskKind};
use crate::model::{call_parents, ArchitectureModel, Scenario};

/// Id of the reference task generated for a scenario actor.
pub fn reference_task_id(scenario: &str) -> String {
    format!("$actor:{scenario}")
}

fn entry_id(scenario: &str, message: &str) -> String {
    format!("{scenario}/{message}")
}

/// Maps an annotated architecture model onto an LQN.
///
/// * every node deploying an interacting component becomes a processor;
///   nodes sharing a replicated component collapse into one processor whose
///   multiplicity is the number of nodes;
/// * every interacting component becomes a server task with one thread per
///   replica;
/// * every scenario actor becomes a reference task with the workload
///   population and think time;
/// * every message reception becomes an entry with a single activity whose
///   demand is the message execution time over the processor speed, and
///   whose synchronous calls are the messages it issues (`rep` calls each).
///
/// A message a component sends to itself is inlined into the caller's
/// activity, since a task cannot queue behind its own busy thread.
pub fn transform(model: &ArchitectureModel) -> Result<LqnModel, LqnError> {
    let owners = model.owner_map();
    let interacting = model.interacting_components();

    // Union nodes that share an interacting component.
    let node_index: HashMap<&str, usize> = model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let mut parent: Vec<usize> = (0..model.nodes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in &interacting {
        let nodes = model.nodes_of(c);
        for pair in nodes.windows(2) {
            let a = find(&mut parent, node_index[pair[0]]);
            let b = find(&mut parent, node_index[pair[1]]);
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, n) in model.nodes.iter().enumerate() {
        if n.deployed.iter().any(|c| interacting.contains(c)) {
            let root = find(&mut parent, i);
            classes.entry(root).or_default().push(i);
        }
    }
    let mut processors = Vec::new();
    let mut processor_of_node: HashMap<usize, usize> = HashMap::new();
    for members in classes.values() {
        let speed = members
            .iter()
            .map(|&i| model.nodes[i].speed_factor)
            .sum::<f64>()
            / members.len() as f64;
        for &i in members {
            processor_of_node.insert(i, processors.len());
        }
        processors.push(Processor {
            id: model.nodes[members[0]].id.clone(),
            multiplicity: members.len() as u32,
            speed_factor: speed,
        });
    }

    let mut tasks = Vec::new();
    let mut speed_of: HashMap<&str, f64> = HashMap::new();
    for c in &model.components {
        if !interacting.contains(&c.id) {
            continue;
        }
        let nodes = model.nodes_of(&c.id);
        let processor = nodes
            .first()
            .map(|n| &processors[processor_of_node[&node_index[n]]]);
        speed_of.insert(&c.id, processor.map_or(1.0, |p| p.speed_factor));
        tasks.push(Task {
            id: c.id.clone(),
            processor: processor.map(|p| p.id.clone()),
            multiplicity: nodes.len().max(1) as u32,
            kind: TaskKind::Server,
        });
    }

    let mut entries = Vec::new();
    let mut activities = Vec::new();
    for s in &model.scenarios {
        let parents = call_parents(model, s)?;
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); s.messages.len()];
        let mut roots = Vec::new();
        for (i, p) in parents.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }
        let receiver = |i: usize| owners[s.messages[i].receiver_op.as_str()];

        let ref_task = reference_task_id(&s.id);
        tasks.push(Task {
            id: ref_task.clone(),
            processor: None,
            multiplicity: s.workload.population,
            kind: TaskKind::Reference {
                think_time: s.workload.think_time_s,
            },
        });
        let ref_entry = format!("$actor:{}", s.id);
        entries.push(Entry {
            id: ref_entry.clone(),
            task: ref_task,
        });
        activities.push(Activity {
            id: format!("{ref_entry}.a"),
            entry: ref_entry,
            host_demand: 0.0,
            calls: roots
                .iter()
                .map(|&r| SynchCall {
                    target: entry_id(&s.id, &s.messages[r].id),
                    mean_calls: s.messages[r].rep,
                })
                .collect(),
        });

        for i in 0..s.messages.len() {
            if parents[i].is_some_and(|p| receiver(p) == receiver(i)) {
                continue;
            }
            let entry = entry_id(&s.id, &s.messages[i].id);
            let mut activity = Activity {
                id: format!("{entry}.a"),
                entry: entry.clone(),
                host_demand: 0.0,
                calls: Vec::new(),
            };
            absorb(s, &children, &receiver, &speed_of, i, 1.0, &mut activity);
            entries.push(Entry {
                id: entry,
                task: receiver(i).to_string(),
            });
            activities.push(activity);
        }
    }

    Ok(LqnModel {
        name: model.name.clone(),
        processors,
        tasks,
        entries,
        activities,
    })
}

fn absorb<'a>(
    s: &Scenario,
    children: &[Vec<usize>],
    receiver: &impl Fn(usize) -> &'a str,
    speed_of: &HashMap<&str, f64>,
    i: usize,
    factor: f64,
    activity: &mut Activity,
) {
    let m = &s.messages[i];
    let speed = speed_of.get(receiver(i)).copied().unwrap_or(1.0);
    activity.host_demand += factor * m.exec_time_s / speed;
    for &c in &children[i] {
        let rep = s.messages[c].rep;
        if receiver(c) == receiver(i) {
            absorb(s, children, receiver, speed_of, c, factor * rep, activity);
        } else {
            activity.calls.push(SynchCall {
                target: entry_id(&s.id, &s.messages[c].id),
                mean_calls: factor * rep,
            });
        }
    }
}
