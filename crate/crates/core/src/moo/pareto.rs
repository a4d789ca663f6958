//! Dominance, non-dominated sorting, crowding distance, reference fronts and
//! hypervolume. All functions work on minimization vectors.

use std::cmp::Ordering;

/// `a` dominates `b`: no worse anywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            better = true;
        }
    }
    better
}

/// Partitions `points` into fronts of indices; front 0 is non-dominated.
/// Indices within a front are ascending.
pub fn nondominated_sort(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of every member of `front` (indices into `points`),
/// returned in the order of `front`. Per objective the extreme members get
/// infinity and interior ones the gap between their neighbours divided by
/// the objective's range on the front; an objective with zero range adds
/// nothing.
pub fn crowding_distance(points: &[Vec<f64>], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let dims = points[front[0]].len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..dims {
        order.sort_by(|&a, &b| {
            points[front[a]][k]
                .total_cmp(&points[front[b]][k])
                .then(a.cmp(&b))
        });
        let lo = points[front[order[0]]][k];
        let hi = points[front[order[n - 1]]][k];
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        for w in 1..n - 1 {
            let gap = points[front[order[w + 1]]][k] - points[front[order[w - 1]]][k];
            distance[order[w]] += gap / range;
        }
    }
    distance
}

/// Indices of the non-dominated members of `points`, dropping later
/// duplicates of an identical vector. Order is preserved.
pub fn nondominated_unique(points: &[Vec<f64>]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if points.iter().any(|q| dominates(q, p)) {
            continue;
        }
        if out.iter().any(|&j| points[j] == *p) {
            continue;
        }
        out.push(i);
    }
    out
}

/// Volume dominated by `points` and bounded by `reference`. Points that are
/// not strictly better than the reference in every coordinate add nothing
/// and are dropped.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let clipped: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .cloned()
        .collect();
    slice_volume(clipped, reference)
}

fn slice_volume(mut points: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let d = reference.len();
    if points.is_empty() {
        return 0.0;
    }
    if d == 1 {
        let best = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return reference[0] - best;
    }
    let last = d - 1;
    points.sort_by(|a, b| a[last].partial_cmp(&b[last]).unwrap_or(Ordering::Equal));
    let mut volume = 0.0;
    let mut i = 0;
    while i < points.len() {
        let level = points[i][last];
        while i < points.len() && points[i][last] == level {
            i += 1;
        }
        let upper = if i < points.len() {
            points[i][last]
        } else {
            reference[last]
        };
        let projected: Vec<Vec<f64>> = points[..i].iter().map(|p| p[..last].to_vec()).collect();
        volume += slice_volume(projected, &reference[..last]) * (upper - level);
    }
    volume
}
