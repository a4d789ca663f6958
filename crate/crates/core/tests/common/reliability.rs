//! Reliability model generator and Monte-Carlo failure-sampling oracle.

use archopt_core::model::{
    ArchitectureModel, CommLink, Component, Message, Node, Operation, Scenario, Sender, Workload,
};
use rand::Rng;

/// Monte-Carlo estimate: draw a scenario, then let every component
/// invocation and every KB sent over a link fail independently.
pub fn monte_carlo(model: &ArchitectureModel, trials: usize, rng: &mut impl Rng) -> f64 {
    let owner = |op: &str| {
        model
            .components
            .iter()
            .find(|c| c.operations.iter().any(|o| o.id == op))
            .map(|c| c.id.as_str())
            .unwrap()
    };
    let node_of = |c: &str| {
        model
            .nodes
            .iter()
            .find(|n| n.deployed.iter().any(|d| d == c))
            .unwrap()
            .id
            .as_str()
    };
    let mut ok = 0usize;
    for _ in 0..trials {
        let mut u: f64 = rng.gen();
        let scenario = model
            .scenarios
            .iter()
            .find(|s| {
                u -= s.probability;
                u < 0.0
            })
            .unwrap_or(model.scenarios.last().unwrap());
        let mut alive = true;
        'msgs: for m in &scenario.messages {
            let receiver = owner(&m.receiver_op);
            let p = model.component(receiver).unwrap().failure_prob;
            for _ in 0..m.rep.round() as u64 {
                if rng.gen::<f64>() < p {
                    alive = false;
                    break 'msgs;
                }
            }
            let Some(sender) = m.sender.component() else {
                continue;
            };
            let (a, b) = (node_of(sender), node_of(receiver));
            if a == b {
                continue;
            }
            let link = model.links.iter().find(|l| l.connects(a, b)).unwrap();
            let kb = (m.msg_size_kb * m.rep).round() as u64;
            for _ in 0..kb {
                if rng.gen::<f64>() < link.failure_prob {
                    alive = false;
                    break 'msgs;
                }
            }
        }
        ok += alive as usize;
    }
    ok as f64 / trials as f64
}

/// At most 4 components on at most 3 fully meshed nodes (so at most 3 links)
/// and 1 to 3 scenarios, each a call chain from the actor. Message sizes and
/// repetitions are integers.
pub fn random_model(rng: &mut impl Rng) -> ArchitectureModel {
    let k = rng.gen_range(2..=4);
    let nodes = rng.gen_range(1..=k.min(3));
    let components: Vec<Component> = (0..k)
        .map(|i| Component {
            id: format!("C{i}"),
            operations: (0..2)
                .map(|j| Operation {
                    id: format!("op{i}_{j}"),
                })
                .collect(),
            failure_prob: rng.gen_range(0.0..0.05),
        })
        .collect();
    let mut node_list: Vec<Node> = (0..nodes)
        .map(|i| Node {
            id: format!("n{i}"),
            speed_factor: 1.0,
            deployed: vec![],
        })
        .collect();
    for i in 0..k {
        let n = if i < nodes {
            i
        } else {
            rng.gen_range(0..nodes)
        };
        node_list[n].deployed.push(format!("C{i}"));
    }
    let mut links = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            links.push(CommLink {
                id: format!("l{a}{b}"),
                endpoints: [format!("n{a}"), format!("n{b}")],
                failure_prob: rng.gen_range(0.0..0.01),
            });
        }
    }
    let n_scen = rng.gen_range(1..4);
    let mut weights: Vec<f64> = (0..n_scen).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let scenarios = weights
        .iter()
        .enumerate()
        .map(|(s, &p)| {
            // A chain C_a -> C_b -> ... starting from the actor.
            let len = rng.gen_range(1..=k);
            let mut order: Vec<usize> = (0..k).collect();
            for i in (1..k).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            let messages = (0..len)
                .map(|i| Message {
                    id: format!("m{i}"),
                    sender: if i == 0 {
                        Sender::Actor
                    } else {
                        Sender::Component(format!("C{}", order[i - 1]))
                    },
                    receiver_op: format!("op{}_{}", order[i], rng.gen_range(0..2)),
                    exec_time_s: rng.gen_range(0.005..0.2),
                    rep: rng.gen_range(1..4) as f64,
                    msg_size_kb: rng.gen_range(0..6) as f64,
                    format: None,
                })
                .collect();
            Scenario {
                id: format!("s{s}"),
                probability: p,
                workload: Workload {
                    population: 1,
                    think_time_s: 1.0,
                },
                messages,
            }
        })
        .collect();
    ArchitectureModel {
        name: "mc".into(),
        components,
        nodes: node_list,
        links,
        scenarios,
    }
}
