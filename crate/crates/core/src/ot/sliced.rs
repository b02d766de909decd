use super::one_d::{root, sorted_wasserstein_pow};
use crate::embed::ProjectionGrid;
use crate::error::{Error, Result};
use crate::frame::FrameMeasure;

fn sorted_projection(mu: &FrameMeasure, dir: [f64; 2]) -> Vec<f64> {
    let mut v: Vec<f64> = mu
        .atoms()
        .iter()
        .map(|a| dir[0] * a[0] + dir[1] * a[1])
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Grid sliced-Wasserstein: ((1/L) Σ_l W_p^p(θ_l#μ, θ_l#ν))^(1/p), each
/// one-dimensional term from order statistics.
pub fn sliced_wasserstein(
    mu: &FrameMeasure,
    nu: &FrameMeasure,
    grid: &ProjectionGrid,
    p: u32,
) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::AtomCountMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    let total: f64 = grid
        .directions()
        .iter()
        .map(|&d| sorted_wasserstein_pow(&sorted_projection(mu, d), &sorted_projection(nu, d), p))
        .sum();
    Ok(root(total / grid.len() as f64, p))
}
