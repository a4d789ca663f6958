//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

pub mod des;
pub mod gen;
pub mod reliability;

/// Exact single-class MVA for a closed network of single-server FCFS queues
/// and one think-time delay. Returns (throughput, queue utilizations).
pub fn exact_mva(population: u32, think: f64, demands: &[f64]) -> (f64, Vec<f64>) {
    let mut queue = vec![0.0; demands.len()];
    let mut x = 0.0;
    for n in 1..=population {
        let residence: Vec<f64> = demands
            .iter()
            .zip(&queue)
            .map(|(d, q)| d * (1.0 + q))
            .collect();
        let r: f64 = residence.iter().sum();
        x = n as f64 / (think + r);
        for (q, r) in queue.iter_mut().zip(&residence) {
            *q = x * r;
        }
    }
    (x, demands.iter().map(|d| x * d).collect())
}

pub fn rel_err(approx: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        approx.abs()
    } else {
        (approx - exact).abs() / exact.abs()
    }
}
