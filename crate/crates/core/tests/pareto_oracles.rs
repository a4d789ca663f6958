use archopt_core::moo::{
    crowding_distance, dominates, hypervolume, nondominated_sort, reference_front, ObjectiveVector,
    Solution,
};
use proptest::prelude::*;

/// Fronts by repeated peeling: a point belongs to the current front when no
/// remaining point dominates it.
fn peel_fronts(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Crowding without sorting: per objective, the nearest strictly smaller and
/// strictly larger values. Only valid when values within the front are
/// distinct per objective.
fn crowding_by_neighbours(points: &[Vec<f64>], front: &[usize]) -> Vec<f64> {
    if front.len() <= 2 {
        return vec![f64::INFINITY; front.len()];
    }
    let dims = points[front[0]].len();
    let mut out = vec![0.0; front.len()];
    for m in 0..dims {
        let values: Vec<f64> = front.iter().map(|&i| points[i][m]).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi == lo {
            continue;
        }
        for (k, &v) in values.iter().enumerate() {
            let below = values
                .iter()
                .copied()
                .filter(|&w| w < v)
                .fold(f64::NEG_INFINITY, f64::max);
            let above = values
                .iter()
                .copied()
                .filter(|&w| w > v)
                .fold(f64::INFINITY, f64::min);
            if below.is_infinite() || above.is_infinite() {
                out[k] = f64::INFINITY;
            } else {
                out[k] += (above - below) / (hi - lo);
            }
        }
    }
    out
}

/// Exact volume for integer points by counting the unit cells of the box
/// [0, reference) that some point weakly dominates.
fn grid_volume(points: &[Vec<i32>], reference: &[i32]) -> f64 {
    let d = reference.len();
    let total: usize = reference.iter().map(|&r| r as usize).product();
    let mut count = 0;
    let mut cell = vec![0i32; d];
    for idx in 0..total {
        let mut rest = idx;
        for (k, c) in cell.iter_mut().enumerate() {
            *c = (rest % reference[k] as usize) as i32;
            rest /= reference[k] as usize;
        }
        if points
            .iter()
            .any(|p| p.iter().zip(&cell).all(|(x, c)| x <= c))
        {
            count += 1;
        }
    }
    count as f64
}

fn as_sets(fronts: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fronts
        .iter()
        .map(|f| {
            let mut f = f.clone();
            f.sort_unstable();
            f
        })
        .collect()
}

fn solution(v: &[f64]) -> Solution {
    Solution {
        sequence: Vec::new(),
        objectives: ObjectiveVector {
            perfq: -v[0],
            reliability: -v[1],
            n_pas: v[2],
            arch_dist: v[3],
        },
    }
}

fn points(dims: usize, max: usize, grid: i32) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec((0..grid).prop_map(f64::from), dims),
        1..max,
    )
}

fn distinct_points(dims: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    // Distinct per coordinate: a random permutation of 0..n per objective.
    (3..max).prop_flat_map(move |n| {
        prop::collection::vec(
            Just((0..n).map(|i| i as f64).collect::<Vec<_>>()).prop_shuffle(),
            dims,
        )
        .prop_map(move |cols: Vec<Vec<f64>>| {
            (0..n)
                .map(|i| cols.iter().map(|c| c[i]).collect())
                .collect::<Vec<Vec<f64>>>()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sort_matches_peeling(pts in points(4, 40, 5)) {
        prop_assert_eq!(as_sets(&nondominated_sort(&pts)), as_sets(&peel_fronts(&pts)));
    }

    #[test]
    fn sort_partitions_indices(pts in points(3, 40, 4)) {
        let mut all: Vec<usize> = nondominated_sort(&pts).concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..pts.len()).collect::<Vec<_>>());
    }

    #[test]
    fn crowding_matches_neighbour_search(pts in distinct_points(4, 25)) {
        let front: Vec<usize> = (0..pts.len()).collect();
        let fast = crowding_distance(&pts, &front);
        let slow = crowding_by_neighbours(&pts, &front);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!(a == b || (a - b).abs() < 1e-9, "{fast:?} vs {slow:?}");
        }
    }

    #[test]
    fn hypervolume_matches_cell_count(
        raw in prop::collection::vec(prop::collection::vec(0i32..6, 3), 1..12),
    ) {
        let reference = vec![6, 6, 6];
        let pts: Vec<Vec<f64>> = raw.iter().map(|p| p.iter().map(|&x| f64::from(x)).collect()).collect();
        let reff: Vec<f64> = reference.iter().map(|&x| f64::from(x)).collect();
        prop_assert_eq!(hypervolume(&pts, &reff), grid_volume(&raw, &reference));
    }

    #[test]
    fn hypervolume_matches_cell_count_in_four_dimensions(
        raw in prop::collection::vec(prop::collection::vec(0i32..5, 4), 1..10),
    ) {
        let reference = vec![5, 5, 5, 5];
        let pts: Vec<Vec<f64>> = raw.iter().map(|p| p.iter().map(|&x| f64::from(x)).collect()).collect();
        let reff: Vec<f64> = reference.iter().map(|&x| f64::from(x)).collect();
        prop_assert_eq!(hypervolume(&pts, &reff), grid_volume(&raw, &reference));
    }

    #[test]
    fn adding_a_point_never_shrinks_hypervolume(pts in points(4, 15, 6), extra in prop::collection::vec(0i32..6, 4)) {
        let reference = vec![6.0; 4];
        let before = hypervolume(&pts, &reference);
        let mut more = pts.clone();
        more.push(extra.iter().map(|&x| f64::from(x)).collect());
        prop_assert!(hypervolume(&more, &reference) >= before);
    }

    #[test]
    fn reference_front_matches_brute_force(
        fronts in prop::collection::vec(points(4, 12, 4), 1..5),
    ) {
        let solutions: Vec<Vec<Solution>> =
            fronts.iter().map(|f| f.iter().map(|v| solution(v)).collect()).collect();
        let rpf = reference_front(&solutions);
        let all: Vec<Vec<f64>> = fronts.concat();
        let mut expected: Vec<Vec<f64>> = all
            .iter()
            .filter(|p| !all.iter().any(|q| dominates(q, p)))
            .cloned()
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        expected.dedup();
        let mut got: Vec<Vec<f64>> = rpf.iter().map(|s| s.objectives.minimization()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(got, expected);
    }
}
