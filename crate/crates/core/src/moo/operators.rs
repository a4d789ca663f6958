//! Variation and selection operators on refactoring sequences.

use rand::Rng;

use crate::model::ArchitectureModel;
use crate::refactoring::{feasible, random_action, RefactoringAction, RefactoringError};

/// Retry budget for producing feasible children.
pub const MAX_RETRIES: usize = 20;

/// Single-point crossover. With probability `p` a cut is drawn uniformly in
/// `1..len` and the tails are swapped; otherwise the children are copies.
pub fn crossover(
    a: &[RefactoringAction],
    b: &[RefactoringAction],
    p: f64,
    rng: &mut impl Rng,
) -> (Vec<RefactoringAction>, Vec<RefactoringAction>) {
    let len = a.len().min(b.len());
    if len < 2 || !rng.gen_bool(p.clamp(0.0, 1.0)) {
        return (a.to_vec(), b.to_vec());
    }
    let cut = rng.gen_range(1..len);
    cut_and_swap(a, b, cut)
}

pub fn cut_and_swap(
    a: &[RefactoringAction],
    b: &[RefactoringAction],
    cut: usize,
) -> (Vec<RefactoringAction>, Vec<RefactoringAction>) {
    let mut c1 = a[..cut].to_vec();
    c1.extend_from_slice(&b[cut..]);
    let mut c2 = b[..cut].to_vec();
    c2.extend_from_slice(&a[cut..]);
    (c1, c2)
}

/// With probability `p`, replaces one uniformly chosen position with a new
/// random action that differs from the old one and keeps the sequence
/// feasible. Falls back to the unchanged sequence when no such action is
/// found within the retry budget.
pub fn mutate(
    sequence: &[RefactoringAction],
    p: f64,
    initial: &ArchitectureModel,
    rng: &mut impl Rng,
) -> Vec<RefactoringAction> {
    if sequence.is_empty() || !rng.gen_bool(p.clamp(0.0, 1.0)) {
        return sequence.to_vec();
    }
    let pos = rng.gen_range(0..sequence.len());
    for _ in 0..MAX_RETRIES {
        let Ok(action) = random_action(initial, rng) else {
            break;
        };
        if action == sequence[pos] {
            continue;
        }
        let mut out = sequence.to_vec();
        out[pos] = action;
        if feasible(&out, initial) {
            return out;
        }
    }
    sequence.to_vec()
}

/// A feasible random sequence of `len` actions drawn on `initial`.
pub fn random_sequence(
    initial: &ArchitectureModel,
    len: usize,
    rng: &mut impl Rng,
    max_attempts: usize,
) -> Result<Vec<RefactoringAction>, RefactoringError> {
    for _ in 0..max_attempts {
        let seq = (0..len)
            .map(|_| random_action(initial, rng))
            .collect::<Result<Vec<_>, _>>()?;
        if feasible(&seq, initial) {
            return Ok(seq);
        }
    }
    Err(RefactoringError::NoEligibleTarget(max_attempts))
}

/// Binary tournament: lower rank wins, then larger crowding distance, then
/// the first drawn.
pub fn tournament(rank: &[usize], crowding: &[f64], rng: &mut impl Rng) -> usize {
    let a = rng.gen_range(0..rank.len());
    let b = rng.gen_range(0..rank.len());
    if rank[b] < rank[a] || (rank[b] == rank[a] && crowding[b] > crowding[a]) {
        b
    } else {
        a
    }
}
