use serde::Serialize;

use super::one_d::{pow_abs, root};
use crate::error::{Error, Result};
use crate::frame::{FrameMeasure, Point};

/// Optimal matching between two equal-size uniform measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    /// `permutation[i]` is the target atom matched to source atom `i`.
    pub permutation: Vec<usize>,
    /// ((1/n) Σ d(x_i, y_σ(i))^p)^(1/p)
    pub cost: f64,
}

/// Minimum-cost perfect matching on a dense `n × n` row-major cost matrix
/// (shortest augmenting paths with row/column potentials, O(n³)).
///
/// Among equally cheap augmenting steps the smallest column index wins, so
/// the result is a deterministic function of the matrix.
pub fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n × n");
    let c = |i: usize, j: usize| cost[(i - 1) * n + (j - 1)];

    // 1-based: index 0 is the virtual column used to start each augmentation.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[row_of_col[j] - 1] = j - 1;
    }
    perm
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Exact W_p between two frames' uniform measures by optimal matching.
pub fn wasserstein_assignment(mu: &FrameMeasure, nu: &FrameMeasure, p: u32) -> Result<Assignment> {
    let n = mu.len();
    if nu.len() != n {
        return Err(Error::AtomCountMismatch {
            left: n,
            right: nu.len(),
        });
    }
    let cost: Vec<f64> = mu
        .atoms()
        .iter()
        .flat_map(|&x| nu.atoms().iter().map(move |&y| pow_abs(dist(x, y), p)))
        .collect();
    let permutation = solve_assignment(&cost, n);
    let total: f64 = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    Ok(Assignment {
        permutation,
        cost: root(total / n as f64, p),
    })
}
