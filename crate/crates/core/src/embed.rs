//! Sorted-projection embedding of frames.
//!
//! A frame of n players is projected onto L fixed directions spread over a
//! quarter turn; each projection is sorted, giving an n × L matrix. With
//! L >= n + 1 pairwise non-collinear directions the map is injective on
//! uniform n-atom measures, and the scaled L^p distance between two
//! embeddings is exactly the grid sliced-Wasserstein distance between the
//! frames.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, Point};
use crate::ot::one_d::{pow_abs, root};

/// Unit directions θ_l = (cos a_l, sin a_l), a_l = π(l−1)/(2L), l = 1..L.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionGrid {
    directions: Vec<Point>,
}

impl ProjectionGrid {
    pub fn new(projections: usize) -> Result<Self> {
        if projections < 2 {
            return Err(Error::LTooSmall(projections));
        }
        let l = projections as f64;
        let directions = (0..projections)
            .map(|k| {
                let a = PI * k as f64 / (2.0 * l);
                [a.cos(), a.sin()]
            })
            .collect();
        Ok(Self { directions })
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Θ = Σ_l θ_l θ_lᵀ, by direct summation, as [[a, b], [b, c]].
    pub fn theta_matrix(&self) -> [[f64; 2]; 2] {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for d in &self.directions {
            a += d[0] * d[0];
            b += d[0] * d[1];
            c += d[1] * d[1];
        }
        [[a, b], [b, c]]
    }
}

pub fn make_grid(projections: usize) -> Result<ProjectionGrid> {
    ProjectionGrid::new(projections)
}

/// n × L matrix of sorted projections, stored row-major by (i, l): entry
/// (i, l) is the i-th smallest projection onto θ_l.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedFrame {
    n: usize,
    projections: usize,
    values: Vec<f64>,
}

impl EmbeddedFrame {
    pub fn from_values(n: usize, projections: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * projections {
            return Err(Error::DimensionMismatch {
                expected: n * projections,
                found: values.len(),
            });
        }
        Ok(Self {
            n,
            projections,
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.projections)
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.values[i * self.projections + l]
    }

    pub fn column(&self, l: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, l)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for EmbeddedFrame {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Sorted projections of an arbitrary point set onto each direction.
pub fn embed_points(points: &[Point], grid: &ProjectionGrid) -> EmbeddedFrame {
    let n = points.len();
    let l_count = grid.len();
    let mut values = vec![0.0; n * l_count];
    let mut column = vec![0.0; n];
    for (l, d) in grid.directions().iter().enumerate() {
        for (c, p) in column.iter_mut().zip(points) {
            *c = d[0] * p[0] + d[1] * p[1];
        }
        column.sort_by(f64::total_cmp);
        for (i, c) in column.iter().enumerate() {
            values[i * l_count + l] = *c;
        }
    }
    EmbeddedFrame {
        n,
        projections: l_count,
        values,
    }
}

pub fn embed_frame(f: &Frame, grid: &ProjectionGrid) -> EmbeddedFrame {
    embed_points(f.positions(), grid)
}

/// Embeds every frame, optionally centering each one first.
pub fn embed_frames(frames: &[Frame], grid: &ProjectionGrid, centered: bool) -> Vec<EmbeddedFrame> {
    frames
        .par_iter()
        .map(|f| {
            if centered {
                embed_frame(&f.centered(), grid)
            } else {
                embed_frame(f, grid)
            }
        })
        .collect()
}

/// (1/(nL))^(1/p) · ‖a − b‖_p
pub fn embedding_distance(a: &EmbeddedFrame, b: &EmbeddedFrame, p: u32) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| pow_abs(x - y, p))
        .sum();
    Ok(root(sum / a.values.len() as f64, p))
}

/// Squared p = 2 embedding distance on raw vectors: ‖a − b‖² / dim.
#[inline]
pub fn sq_embedding_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    s / a.len() as f64
}

/// Coefficients (lower, upper) with
/// lower · W₂ <= SW₂ (when one measure is a single point) and SW₂ <= upper · W₂
/// for the grid of size L:
/// sqrt((1 ∓ 1/(L sin(π/2L))) / 2).
pub fn sw_bound_coefficients(projections: usize) -> (f64, f64) {
    let l = projections as f64;
    let r = 1.0 / (l * (PI / (2.0 * l)).sin());
    (((1.0 - r) / 2.0).sqrt(), ((1.0 + r) / 2.0).sqrt())
}

/// Closed-form extreme eigenvalues (smallest, largest) of Θ for the grid of
/// size L: L/2 · (1 ∓ 1/(L sin(π/2L))).
pub fn theta_eigenvalues(projections: usize) -> (f64, f64) {
    let l = projections as f64;
    let r = 1.0 / (l * (PI / (2.0 * l)).sin());
    (l / 2.0 * (1.0 - r), l / 2.0 * (1.0 + r))
}

/// Writes embeddings as CSV: one row per frame, n·L columns ordered by
/// (i, l) row-major, header `e_<i>_<l>`.
pub fn write_embedding_csv<W: Write>(out: W, embeddings: &[EmbeddedFrame]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = embeddings.first() {
        let (n, l) = first.shape();
        let header: Vec<String> = (0..n)
            .flat_map(|i| (0..l).map(move |k| format!("e_{i}_{k}")))
            .collect();
        w.write_record(&header)?;
    }
    for e in embeddings {
        w.write_record(e.values.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}
