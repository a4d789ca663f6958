//! Mean Value Analysis for closed multi-class queueing networks with delay,
//! processor-sharing and FCFS stations, each with one or more servers.
//!
//! [`exact`] runs the recursion over all population vectors, with
//! load-dependent marginal probabilities for multi-server stations.
//! [`schweitzer`] is the Bard–Schweitzer fixed point; there multi-server
//! stations use Seidmann's decomposition (an `m`-server station with demand
//! `D` behaves like a single server with demand `D/m` in series with a pure
//! delay of `D (m-1)/m`). [`solve_closed`] picks between the two.
//!
//! At an FCFS station every queued customer delays an arrival by its own
//! class's mean service time rather than by the arriving class's one.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Station {
    Delay,
    /// Processor sharing.
    Queue {
        servers: u32,
    },
    Fcfs {
        servers: u32,
    },
}

impl Station {
    fn servers(self) -> usize {
        match self {
            Station::Delay => 0,
            Station::Queue { servers } | Station::Fcfs { servers } => servers.max(1) as usize,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ClosedNetwork {
    /// Customer population per class (may be fractional).
    pub population: Vec<f64>,
    /// Think time per class, in seconds.
    pub think_time: Vec<f64>,
    pub stations: Vec<Station>,
    /// Service demand per class and station: `demand[class][station]`.
    pub demand: Vec<Vec<f64>>,
    /// Visits per cycle, `visits[class][station]`, used to split demands
    /// into per-visit service times at FCFS stations. Empty means one visit.
    pub visits: Vec<Vec<f64>>,
    /// `interlock[i][j]`: expected number of class-`j` customers that are
    /// blocked elsewhere, and so absent from every station, whenever a
    /// class-`i` customer arrives. Empty when classes are independent.
    pub interlock: Vec<Vec<f64>>,
}

impl ClosedNetwork {
    fn interlock(&self, i: usize, j: usize) -> f64 {
        self.interlock
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    fn visits(&self, c: usize, k: usize) -> f64 {
        match self.visits.get(c).and_then(|row| row.get(k)) {
            Some(&v) if v > 0.0 => v,
            _ => 1.0,
        }
    }

    fn service(&self, c: usize, k: usize) -> f64 {
        self.demand[c][k] / self.visits(c, k)
    }

    /// Residence of class `c` at station `k` given the per-class numbers of
    /// customers it finds there and, for multi-server stations, the mean
    /// number of customers it finds beyond `m - 1` divided by `m`.
    fn residence(&self, c: usize, k: usize, seen: &[f64], excess: Option<f64>) -> f64 {
        let d = self.demand[c][k];
        match self.stations[k] {
            Station::Delay => d,
            Station::Queue { .. } => match excess {
                Some(x) => d * (1.0 + x),
                None => d * (1.0 + seen.iter().sum::<f64>()),
            },
            Station::Fcfs { .. } => {
                let work: f64 = seen
                    .iter()
                    .enumerate()
                    .map(|(j, q)| q * self.service(j, k))
                    .sum();
                match excess {
                    Some(x) => {
                        let found: f64 = seen.iter().sum();
                        let mean = if found > 0.0 {
                            work / found
                        } else {
                            self.service(c, k)
                        };
                        d + self.visits(c, k) * mean * x
                    }
                    None => d + self.visits(c, k) * work,
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MvaSolution {
    pub throughput: Vec<f64>,
    /// Residence time per cycle: `residence[class][station]`.
    pub residence: Vec<Vec<f64>>,
    /// Mean queue length: `queue[class][station]`.
    pub queue: Vec<Vec<f64>>,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 20_000;
const TOLERANCE: f64 = 1e-10;

/// Largest number of population vectors for which [`solve_closed`] runs the
/// exact recursion.
pub const EXACT_STATE_LIMIT: usize = 4096;

/// Exact MVA when every population is integral and the population lattice
/// is small enough, Schweitzer otherwise.
pub fn solve_closed(net: &ClosedNetwork) -> MvaSolution {
    let mut states: usize = 1;
    for &n in &net.population {
        if n < 0.0 || n.fract() != 0.0 {
            return schweitzer(net);
        }
        states = states.saturating_mul(n as usize + 1);
    }
    if states <= EXACT_STATE_LIMIT {
        exact(net)
    } else {
        schweitzer(net)
    }
}

/// MVA recursion over every population vector. Populations are rounded to
/// integers. The result is exact for product-form networks (single class
/// per FCFS station, no interlock).
///
/// With a non-empty `interlock`, an arriving class-`c` customer sees the
/// network without its blocked ancestors (one customer of class `j` removed
/// with weight `interlock[c][j]`) and without the customers busy on behalf
/// of itself (class `i` queue reduced by `interlock[i][c] / n_c`).
pub fn exact(net: &ClosedNetwork) -> MvaSolution {
    let classes = net.population.len();
    let stations = net.stations.len();
    let pop: Vec<usize> = net
        .population
        .iter()
        .map(|&n| n.max(0.0).round() as usize)
        .collect();
    let total: usize = pop.iter().sum();
    let mut stride = vec![1usize; classes];
    for c in 1..classes {
        stride[c] = stride[c - 1] * (pop[c - 1] + 1);
    }
    let states = if classes == 0 {
        1
    } else {
        stride[classes - 1] * (pop[classes - 1] + 1)
    };
    let servers: Vec<usize> = net.stations.iter().map(|s| s.servers()).collect();
    let width = total + 1;
    let interlocked = !net.interlock.is_empty();

    // Per-class queue lengths: `cq[(state * classes + c) * stations + k]`.
    let mut cq = vec![0.0; states * classes * stations];
    let at = |state: usize, c: usize, k: usize| (state * classes + c) * stations + k;
    // Marginal probabilities, tracked for multi-server stations only.
    let mut marginal = vec![0.0; states * stations * width];
    for k in 0..stations {
        if servers[k] > 1 {
            marginal[k * width] = 1.0;
        }
    }

    let mut n = vec![0usize; classes];
    let mut throughput = vec![0.0; classes];
    let mut residence = vec![vec![0.0; stations]; classes];
    let mut seen = vec![0.0; classes];
    let mut dist = vec![0.0; width];
    for idx in 1..states {
        // Advance the mixed-radix population vector.
        for c in 0..classes {
            if n[c] < pop[c] {
                n[c] += 1;
                break;
            }
            n[c] = 0;
        }
        let size: usize = n.iter().sum();
        for c in 0..classes {
            throughput[c] = 0.0;
            if n[c] == 0 {
                residence[c].iter_mut().for_each(|r| *r = 0.0);
                continue;
            }
            let prev = idx - stride[c];
            let left = |j: usize| if j == c { n[j] - 1 } else { n[j] };
            // Blocked ancestors: states with one customer of class j fewer.
            let mut ancestors: Vec<(usize, f64)> = Vec::new();
            // Customers busy on behalf of this one: share of class i.
            let mut helpers: Vec<(usize, f64)> = Vec::new();
            if interlocked {
                for j in 0..classes {
                    let f = net.interlock(c, j);
                    if f > 0.0 && left(j) > 0 {
                        ancestors.push((prev - stride[j], f.min(1.0)));
                    }
                    let g = net.interlock(j, c) / n[c] as f64;
                    if g > 0.0 && left(j) > 0 {
                        helpers.push((j, g.min(1.0)));
                    }
                }
            }
            let mut cycle = net.think_time[c];
            for k in 0..stations {
                if net.demand[c][k] == 0.0 {
                    residence[c][k] = 0.0;
                    continue;
                }
                if servers[k] == 0 {
                    residence[c][k] = net.demand[c][k];
                    cycle += residence[c][k];
                    continue;
                }
                for j in 0..classes {
                    let q = cq[at(prev, j, k)];
                    let mut v = q;
                    for &(other, f) in &ancestors {
                        v -= f * (q - cq[at(other, j, k)]);
                    }
                    seen[j] = v;
                }
                for &(i, g) in &helpers {
                    seen[i] -= g * cq[at(prev, i, k)];
                }
                seen.iter_mut().for_each(|q| *q = q.max(0.0));

                let m = servers[k];
                let excess = if m > 1 {
                    let base = (prev * stations + k) * width;
                    let own = &marginal[base..base + size];
                    dist[..size].copy_from_slice(own);
                    if interlocked {
                        // Mix in states with one customer removed so the
                        // mean drops by the interlocked amount.
                        let q: f64 = (0..classes).map(|j| cq[at(prev, j, k)]).sum();
                        let mut mix = ancestors.clone();
                        for &(i, g) in &helpers {
                            let other = prev - stride[i];
                            let drop = q - (0..classes).map(|j| cq[at(other, j, k)]).sum::<f64>();
                            if drop > 0.0 {
                                mix.push((other, (g * cq[at(prev, i, k)] / drop).min(1.0)));
                            }
                        }
                        for (j, p) in dist[..size].iter_mut().enumerate() {
                            for &(other, w) in &mix {
                                *p -= w * (own[j] - marginal[(other * stations + k) * width + j]);
                            }
                            *p = p.max(0.0);
                        }
                        let norm: f64 = dist[..size].iter().sum();
                        if norm > 0.0 {
                            dist[..size].iter_mut().for_each(|p| *p /= norm);
                        }
                    }
                    // Customers found beyond m - 1, per server.
                    let x: f64 =
                        (m..size).map(|j| (j + 1 - m) as f64 * dist[j]).sum::<f64>() / m as f64;
                    Some(x)
                } else {
                    None
                };
                residence[c][k] = net.residence(c, k, &seen, excess);
                cycle += residence[c][k];
            }
            throughput[c] = if cycle > 0.0 {
                n[c] as f64 / cycle
            } else {
                0.0
            };
        }
        for k in 0..stations {
            for c in 0..classes {
                cq[at(idx, c, k)] = throughput[c] * residence[c][k];
            }
            let m = servers[k];
            if m > 1 {
                let base = (idx * stations + k) * width;
                let mut busy = 0.0;
                for j in 1..=size {
                    let mut p = 0.0;
                    for c in 0..classes {
                        if n[c] > 0 {
                            let prev = ((idx - stride[c]) * stations + k) * width;
                            p += net.demand[c][k] * throughput[c] * marginal[prev + j - 1];
                        }
                    }
                    p /= j.min(m) as f64;
                    marginal[base + j] = p;
                    busy += p;
                }
                marginal[base] = (1.0 - busy).max(0.0);
            }
        }
    }

    let queue = (0..classes)
        .map(|c| {
            (0..stations)
                .map(|k| throughput[c] * residence[c][k])
                .collect()
        })
        .collect();
    MvaSolution {
        throughput,
        residence,
        queue,
        iterations: states,
    }
}

/// Solves a closed multi-class network with the Schweitzer fixed point.
pub fn schweitzer(net: &ClosedNetwork) -> MvaSolution {
    let classes = net.population.len();
    let stations = net.stations.len();
    debug_assert_eq!(net.think_time.len(), classes);
    debug_assert_eq!(net.demand.len(), classes);

    // Seidmann: the queueing part is a single server `m` times faster.
    let fast = ClosedNetwork {
        population: net.population.clone(),
        think_time: net.think_time.clone(),
        stations: net
            .stations
            .iter()
            .map(|s| match *s {
                Station::Delay => Station::Delay,
                Station::Queue { .. } => Station::Queue { servers: 1 },
                Station::Fcfs { .. } => Station::Fcfs { servers: 1 },
            })
            .collect(),
        demand: (0..classes)
            .map(|c| {
                (0..stations)
                    .map(|k| net.demand[c][k] / net.stations[k].servers().max(1) as f64)
                    .collect()
            })
            .collect(),
        visits: net.visits.clone(),
        interlock: Vec::new(),
    };
    let delay_demand: Vec<Vec<f64>> = (0..classes)
        .map(|c| {
            (0..stations)
                .map(|k| match net.stations[k].servers() {
                    0 => 0.0,
                    m => net.demand[c][k] * (m as f64 - 1.0) / m as f64,
                })
                .collect()
        })
        .collect();

    let mut queue = vec![vec![0.0; stations]; classes];
    for c in 0..classes {
        let visited = (0..stations)
            .filter(|&k| net.stations[k] != Station::Delay && net.demand[c][k] > 0.0)
            .count();
        for k in 0..stations {
            if visited > 0 && net.stations[k] != Station::Delay && net.demand[c][k] > 0.0 {
                queue[c][k] = net.population[c] / visited as f64;
            }
        }
    }

    let mut throughput = vec![0.0; classes];
    let mut residence = vec![vec![0.0; stations]; classes];
    let mut seen = vec![0.0; classes];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for c in 0..classes {
            let n = net.population[c];
            if n <= 0.0 {
                throughput[c] = 0.0;
                residence[c].iter_mut().for_each(|r| *r = 0.0);
                continue;
            }
            let mut cycle = net.think_time[c];
            for k in 0..stations {
                if net.demand[c][k] == 0.0 {
                    residence[c][k] = 0.0;
                    continue;
                }
                for j in 0..classes {
                    let nj = net.population[j];
                    let mut keep = 1.0;
                    if j == c {
                        keep -= 1.0 / n;
                    }
                    let f = net.interlock(c, j);
                    if f > 0.0 && nj > 0.0 {
                        keep -= f.min(1.0) / nj;
                    }
                    keep -= (net.interlock(j, c) / n).min(1.0);
                    seen[j] = queue[j][k] * keep.max(0.0);
                }
                residence[c][k] = fast.residence(c, k, &seen, None) + delay_demand[c][k];
                cycle += residence[c][k];
            }
            throughput[c] = if cycle > 0.0 { n / cycle } else { 0.0 };
        }
        for c in 0..classes {
            for k in 0..stations {
                let queued = if net.stations[k] == Station::Delay {
                    0.0
                } else {
                    throughput[c] * (residence[c][k] - delay_demand[c][k])
                };
                delta = delta.max((queued - queue[c][k]).abs() / net.population[c].max(1.0));
                queue[c][k] = queued;
            }
        }
        if delta < TOLERANCE || iterations >= MAX_ITERATIONS {
            break;
        }
    }

    // Report full queue lengths, including customers in the delay parts.
    let queue = (0..classes)
        .map(|c| {
            (0..stations)
                .map(|k| throughput[c] * residence[c][k])
                .collect()
        })
        .collect();
    MvaSolution {
        throughput,
        residence,
        queue,
        iterations,
    }
}
