//! Exact solver for the discrete transportation problem.
//!
//! Primal network simplex on the complete bipartite graph between source and
//! target atoms. The basis is a spanning tree of m + n - 1 cells (degenerate
//! zero-flow cells included); each pivot prices every non-basic cell against
//! the tree potentials, pushes flow around the unique cycle closed by the
//! entering cell and drops the blocking cell. At termination the potentials
//! are a dual certificate: u_i + v_j <= c_ij everywhere, with equality on the
//! basis (hence on the support of the plan).

use serde::Serialize;

use super::one_d::{pow_abs, root};
use crate::error::{Error, Result};
use crate::frame::{DiscreteMeasure, WEIGHT_SUM_TOL};

/// A coupling between two discrete measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols` flows.
    pub flows: Vec<f64>,
    /// Σ P_ij c_ij, i.e. W_p^p for a cost c = d^p.
    pub cost: f64,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.flows[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.flows
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }
}

/// Optimal plan plus the dual potentials certifying it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportSolution {
    pub plan: TransportPlan,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
    pub pivots: usize,
}

impl TransportSolution {
    /// Largest violation of u_i + v_j <= c_ij over all cells, and of
    /// equality over cells carrying more than `support_tol` mass.
    pub fn certificate_violation(&self, cost: &[f64], support_tol: f64) -> f64 {
        let n = self.plan.cols;
        let mut worst: f64 = 0.0;
        for (i, u) in self.row_potentials.iter().enumerate() {
            for (j, v) in self.col_potentials.iter().enumerate() {
                let slack = cost[i * n + j] - u - v;
                worst = worst.max(-slack);
                if self.plan.get(i, j) > support_tol {
                    worst = worst.max(slack.abs());
                }
            }
        }
        worst
    }
}

/// Distance-level result of [`wasserstein_discrete`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WassersteinResult {
    /// (Σ P_ij d_ij^p)^(1/p)
    pub distance: f64,
    pub solution: TransportSolution,
}

struct Tree {
    parent: Vec<usize>,
    parent_cell: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
}

const NONE: usize = usize::MAX;

/// Solves min Σ P_ij c_ij subject to row sums `supply` and column sums
/// `demand`. `cost` is row-major `supply.len() × demand.len()`.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return Err(Error::InvalidMeasure("empty marginal".into()));
    }
    if cost.len() != m * n {
        return Err(Error::ShapeMismatch {
            left: (m, n),
            right: (cost.len(), 1),
        });
    }
    let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ts - td).abs() > WEIGHT_SUM_TOL {
        return Err(Error::WeightSumMismatch {
            left: ts,
            right: td,
        });
    }

    let mut flow = vec![0.0; m * n];
    let mut basic = vec![false; m * n];
    let mut basis = Vec::with_capacity(m + n - 1);

    // North-west corner start: a staircase spanning tree.
    {
        let mut rs = supply.to_vec();
        let mut rd = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = rs[i].min(rd[j]).max(0.0);
            rs[i] -= x;
            rd[j] -= x;
            let cell = i * n + j;
            flow[cell] = x;
            basic[cell] = true;
            basis.push(cell);
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || rs[i] <= rd[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);

    let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let eps = 1e-12 * scale;
    let max_pivots = 50 * m * n + 1000;
    let mut degenerate_run = 0usize;
    let mut pivots = 0usize;

    loop {
        let tree = build_tree(m, n, cost, &basis);

        let bland = degenerate_run > 2 * (m + n);
        let mut entering = NONE;
        let mut best = -eps;
        'price: for i in 0..m {
            let u = tree.potential[i];
            for j in 0..n {
                let cell = i * n + j;
                if basic[cell] {
                    continue;
                }
                let r = cost[cell] - u - tree.potential[m + j];
                if r < best {
                    best = r;
                    entering = cell;
                    if bland {
                        break 'price;
                    }
                }
            }
        }
        if entering == NONE {
            let (u, v) = tree.potential.split_at(m);
            let plan_cost = flow.iter().zip(cost).map(|(f, c)| f * c).sum();
            return Ok(TransportSolution {
                plan: TransportPlan {
                    rows: m,
                    cols: n,
                    flows: flow,
                    cost: plan_cost,
                },
                row_potentials: u.to_vec(),
                col_potentials: v.to_vec(),
                pivots,
            });
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::SolverStalled(pivots));
        }

        // Cycle: entering (i, j), then the tree path from column j to row i.
        let (ei, ej) = (entering / n, entering % n);
        let mut a = m + ej;
        let mut b = ei;
        let mut from_col = Vec::new();
        let mut from_row = Vec::new();
        while tree.depth[a] > tree.depth[b] {
            from_col.push(tree.parent_cell[a]);
            a = tree.parent[a];
        }
        while tree.depth[b] > tree.depth[a] {
            from_row.push(tree.parent_cell[b]);
            b = tree.parent[b];
        }
        while a != b {
            from_col.push(tree.parent_cell[a]);
            a = tree.parent[a];
            from_row.push(tree.parent_cell[b]);
            b = tree.parent[b];
        }
        let path: Vec<usize> = from_col
            .into_iter()
            .chain(from_row.into_iter().rev())
            .collect();

        // Even positions along the path lose flow.
        let mut theta = f64::INFINITY;
        let mut leaving = NONE;
        for &cell in path.iter().step_by(2) {
            if flow[cell] < theta || (flow[cell] == theta && cell < leaving) {
                theta = flow[cell];
                leaving = cell;
            }
        }
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[cell] -= theta;
            } else {
                flow[cell] += theta;
            }
        }
        flow[entering] = theta;
        flow[leaving] = 0.0;
        basic[leaving] = false;
        basic[entering] = true;
        let pos = basis
            .iter()
            .position(|&c| c == leaving)
            .expect("leaving cell is basic");
        basis[pos] = entering;

        if theta <= 1e-15 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
    }
}

fn build_tree(m: usize, n: usize, cost: &[f64], basis: &[usize]) -> Tree {
    let nodes = m + n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    for &cell in basis {
        let (i, j) = (cell / n, cell % n);
        adj[i].push((m + j, cell));
        adj[m + j].push((i, cell));
    }
    let mut tree = Tree {
        parent: vec![NONE; nodes],
        parent_cell: vec![NONE; nodes],
        depth: vec![0; nodes],
        potential: vec![0.0; nodes],
    };
    let mut seen = vec![false; nodes];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(node) = stack.pop() {
        for &(next, cell) in &adj[node] {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            tree.parent[next] = node;
            tree.parent_cell[next] = cell;
            tree.depth[next] = tree.depth[node] + 1;
            tree.potential[next] = cost[cell] - tree.potential[node];
            stack.push(next);
        }
    }
    debug_assert!(seen.iter().all(|&s| s), "basis must span all nodes");
    tree
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Row-major matrix of d(x_i, y_j)^p under the Euclidean metric.
pub fn ground_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: u32) -> Result<Vec<f64>> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    Ok(mu
        .atoms()
        .iter()
        .flat_map(|x| nu.atoms().iter().map(move |y| pow_abs(euclidean(x, y), p)))
        .collect())
}

/// Exact W_p between two discrete measures with Euclidean ground metric.
pub fn wasserstein_discrete(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: u32,
) -> Result<WassersteinResult> {
    let cost = ground_cost(mu, nu, p)?;
    let solution = solve_transport(mu.weights(), nu.weights(), &cost)?;
    Ok(WassersteinResult {
        distance: root(solution.plan.cost.max(0.0), p),
        solution,
    })
}
