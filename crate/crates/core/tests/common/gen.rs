//! Random model generators.

use archopt_core::lqn::{Activity, Entry, LqnModel, Processor, SynchCall, Task, TaskKind};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random layered model: 1-2 reference tasks over `layers` server layers,
/// integer call counts, tasks spread over a few processors.
pub fn random_lqn<R: Rng>(rng: &mut R, layers: usize) -> LqnModel {
    let n_proc = rng.gen_range(1..=3);
    let processors: Vec<Processor> = (0..n_proc)
        .map(|p| Processor {
            id: format!("P{p}"),
            multiplicity: rng.gen_range(1..=2),
            speed_factor: 1.0,
        })
        .collect();
    let mut tasks = Vec::new();
    let mut entries = Vec::new();
    let mut activities = Vec::new();
    // entries per layer, layer 0 being the reference tasks
    let mut layer_entries: Vec<Vec<String>> = vec![Vec::new(); layers + 1];
    for layer in (1..=layers).rev() {
        for t in 0..rng.gen_range(1..=2) {
            let id = format!("T{layer}_{t}");
            let multiplicity = *[1u32, 1, 2, 3, 50].choose(rng).unwrap();
            tasks.push(Task {
                id: id.clone(),
                processor: Some(processors[rng.gen_range(0..n_proc)].id.clone()),
                multiplicity,
                kind: TaskKind::Server,
            });
            for e in 0..rng.gen_range(1..=2) {
                let eid = format!("{id}/e{e}");
                entries.push(Entry {
                    id: eid.clone(),
                    task: id.clone(),
                });
                let calls = random_calls(rng, &layer_entries[layer + 1..]);
                activities.push(Activity {
                    id: format!("{eid}/a"),
                    entry: eid.clone(),
                    host_demand: rng.gen_range(0.01..0.15),
                    calls,
                });
                layer_entries[layer].push(eid);
            }
        }
    }
    for r in 0..rng.gen_range(1..=2) {
        let id = format!("R{r}");
        tasks.push(Task {
            id: id.clone(),
            processor: None,
            multiplicity: rng.gen_range(1..=6),
            kind: TaskKind::Reference {
                think_time: rng.gen_range(0.5..2.0),
            },
        });
        let eid = format!("{id}/e");
        entries.push(Entry {
            id: eid.clone(),
            task: id.clone(),
        });
        let mut calls = random_calls(rng, &layer_entries[1..2]);
        if calls.is_empty() {
            calls.push(SynchCall {
                target: layer_entries[1][0].clone(),
                mean_calls: 1.0,
            });
        }
        activities.push(Activity {
            id: format!("{eid}/a"),
            entry: eid,
            host_demand: 0.0,
            calls,
        });
    }
    LqnModel {
        name: "random".into(),
        processors,
        tasks,
        entries,
        activities,
    }
}

fn random_calls<R: Rng>(rng: &mut R, below: &[Vec<String>]) -> Vec<SynchCall> {
    let pool: Vec<&String> = below.iter().flatten().collect();
    if pool.is_empty() {
        return Vec::new();
    }
    let k = rng.gen_range(1..=2.min(pool.len()));
    let mut targets: Vec<&String> = pool.choose_multiple(rng, k).copied().collect();
    targets.sort();
    targets
        .into_iter()
        .map(|t| SynchCall {
            target: t.clone(),
            mean_calls: rng.gen_range(1..=2) as f64,
        })
        .collect()
}

/// A reference task calling `k` infinite-server tasks, each alone on its
/// own processor: equivalent to a single-class product-form network.
pub fn single_layer(population: u32, think: f64, demands: &[f64], calls: &[f64]) -> LqnModel {
    let mut m = LqnModel {
        name: "flat".into(),
        processors: vec![],
        tasks: vec![Task {
            id: "R".into(),
            processor: None,
            multiplicity: population,
            kind: TaskKind::Reference { think_time: think },
        }],
        entries: vec![Entry {
            id: "R/e".into(),
            task: "R".into(),
        }],
        activities: vec![],
    };
    let mut root_calls = Vec::new();
    for (k, (&d, &y)) in demands.iter().zip(calls).enumerate() {
        m.processors.push(Processor {
            id: format!("P{k}"),
            multiplicity: 1,
            speed_factor: 1.0,
        });
        m.tasks.push(Task {
            id: format!("T{k}"),
            processor: Some(format!("P{k}")),
            multiplicity: 10_000,
            kind: TaskKind::Server,
        });
        m.entries.push(Entry {
            id: format!("T{k}/e"),
            task: format!("T{k}"),
        });
        m.activities.push(Activity {
            id: format!("T{k}/a"),
            entry: format!("T{k}/e"),
            host_demand: d,
            calls: vec![],
        });
        root_calls.push(SynchCall {
            target: format!("T{k}/e"),
            mean_calls: y,
        });
    }
    m.activities.push(Activity {
        id: "R/a".into(),
        entry: "R/e".into(),
        host_demand: 0.0,
        calls: root_calls,
    });
    m
}
