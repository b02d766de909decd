//! Exact discrete optimal transport.

mod assignment;
pub(crate) mod one_d;
mod sliced;
mod transport;

use rayon::prelude::*;

pub use assignment::{solve_assignment, wasserstein_assignment, Assignment};
pub use one_d::wasserstein_1d;
pub use sliced::sliced_wasserstein;
pub use transport::{
    ground_cost, solve_transport, wasserstein_discrete, TransportPlan, TransportSolution,
    WassersteinResult,
};

/// Symmetric pairwise matrix (row-major, zero diagonal) of `dist` over all
/// unordered pairs, evaluated in parallel. Each entry is computed once, so
/// the result does not depend on the thread schedule.
pub fn pairwise_matrix<T, F, E>(items: &[T], dist: F) -> Result<Vec<f64>, E>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64, E> + Sync,
    E: Send,
{
    let n = items.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| dist(&items[i], &items[j]))
        .collect::<Result<Vec<f64>, E>>()?;
    let mut out = vec![0.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        out[i * n + j] = v;
        out[j * n + i] = v;
    }
    Ok(out)
}
