//! Brute-force packing oracle: plain enumeration of independent sets.

use hardcore::{Quotient, Site, SublatticeBasis};

/// `(optimum, number of optimal sets)` by exhaustive search.
pub fn brute_force(q: &Quotient, d2: i64) -> (usize, u128) {
    let reps: Vec<Site> = q.representatives().collect();
    let n = reps.len();
    let conflict: Vec<u64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && q.min_image_sq_distance(reps[i], reps[j]) < d2)
                .fold(0u64, |m, j| m | 1 << j)
        })
        .collect();
    let mut best = (0usize, 0u128);
    fn go(i: usize, n: usize, conflict: &[u64], chosen: u64, size: usize, best: &mut (usize, u128)) {
        if i == n {
            if size > best.0 {
                *best = (size, 1);
            } else if size == best.0 {
                best.1 += 1;
            }
            return;
        }
        if size + (n - i) < best.0 {
            return;
        }
        if conflict[i] & chosen == 0 {
            go(i + 1, n, conflict, chosen | 1 << i, size + 1, best);
        }
        go(i + 1, n, conflict, chosen, size, best);
    }
    go(0, n, &conflict, 0, 0, &mut best);
    best
}

/// Every lower-triangular HNF of index at most `max_index`.
pub fn all_hnfs(max_index: i64) -> Vec<SublatticeBasis> {
    let mut out = Vec::new();
    for d1 in 1..=max_index {
        for d2 in 1..=max_index / d1 {
            for d3 in 1..=max_index / (d1 * d2) {
                for a in 0..d1 {
                    for b in 0..d1 {
                        for c in 0..d2 {
                            out.push(
                                SublatticeBasis::from_rows([[d1, 0, 0], [a, d2, 0], [b, c, d3]]).expect("positive diagonal"),
                            );
                        }
                    }
                }
            }
        }
    }
    out
}
