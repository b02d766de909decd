//! k-means++ seeding and Lloyd iterations in embedding space.
//!
//! Points are flat vectors (embedded frames, n·L values). Distances follow
//! the embedding convention: the squared distance between two points is
//! ‖a − b‖² divided by the dimension, so a quantization error reads in
//! squared meters.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{embed_frames, sq_embedding_distance, ProjectionGrid};
use crate::error::{Error, Result};
use crate::frame::{Frame, Possession};
use crate::ingest::TeamCollection;
use crate::rng::{self, ChaCha8Rng};

/// K centroids with cluster-size weights summarizing a point collection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedCollection {
    pub centroids: Vec<Vec<f64>>,
    /// Share of points per centroid; sums to one.
    pub weights: Vec<f64>,
    /// Centroid index of each input point.
    pub assignments: Vec<usize>,
    /// Mean squared embedding distance from each point to its centroid.
    pub quantization_error: f64,
    pub iterations: usize,
    /// Error after every assignment step, then after the final update.
    pub error_history: Vec<f64>,
}

impl QuantizedCollection {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k()];
        for &a in &self.assignments {
            c[a] += 1;
        }
        c
    }

    /// Writes `frame_index,cluster_id` rows.
    pub fn write_assignments_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["frame_index", "cluster_id"])?;
        for (i, a) in self.assignments.iter().enumerate() {
            w.write_record([i.to_string(), a.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sq_norm_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding with an explicit generator.
pub fn kmeanspp_init_with<P: AsRef<[f64]> + Sync>(
    points: &[P],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, points: n });
    }
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].as_ref().to_vec()];
    let mut d2: Vec<f64> = points
        .par_iter()
        .map(|p| sq_embedding_distance(p.as_ref(), &centroids[0]))
        .collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total has a positive entry")
        } else {
            // Every point coincides with a centroid: draw among unused indices.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        let c = points[pick].as_ref().to_vec();
        d2.par_iter_mut().zip(points.par_iter()).for_each(|(d, p)| {
            let nd = sq_embedding_distance(p.as_ref(), &c);
            if nd < *d {
                *d = nd;
            }
        });
        centroids.push(c);
    }
    Ok(centroids)
}

/// k-means++ seeding: the first centroid uniform over the points, each next
/// one drawn with probability proportional to the squared distance to the
/// nearest centroid chosen so far.
pub fn kmeanspp_init<P: AsRef<[f64]> + Sync>(
    points: &[P],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    kmeanspp_init_with(points, k, &mut rng::stream(seed, rng::tag::QUANT))
}

/// Nearest and second-nearest centroid (Euclidean, unscaled); ties go to the
/// lowest index.
fn nearest_two(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64, f64) {
    let mut best = (0, f64::INFINITY);
    let mut second = f64::INFINITY;
    for (k, c) in centroids.iter().enumerate() {
        let d = sq_norm_dist(p, c);
        if d < best.1 {
            second = best.1;
            best = (k, d);
        } else if d < second {
            second = d;
        }
    }
    (best.0, best.1.sqrt(), second.sqrt())
}

fn mean_error<P: AsRef<[f64]> + Sync>(
    points: &[P],
    centroids: &[Vec<f64>],
    assign: &[usize],
) -> f64 {
    let per_point: Vec<f64> = points
        .par_iter()
        .zip(assign.par_iter())
        .map(|(p, &a)| sq_embedding_distance(p.as_ref(), &centroids[a]))
        .collect();
    per_point.iter().sum::<f64>() / points.len() as f64
}

/// Cluster means in index order; empty clusters keep their centroid.
fn update_centroids<P: AsRef<[f64]>>(points: &[P], centroids: &mut [Vec<f64>], assign: &[usize]) {
    let dim = centroids[0].len();
    let k = centroids.len();
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assign) {
        counts[a] += 1;
        for (s, x) in sums[a * dim..(a + 1) * dim].iter_mut().zip(p.as_ref()) {
            *s += x;
        }
    }
    for (c, (sum, &count)) in centroids.iter_mut().zip(sums.chunks(dim).zip(&counts)) {
        if count > 0 {
            let inv = 1.0 / count as f64;
            for (ci, s) in c.iter_mut().zip(sum) {
                *ci = s * inv;
            }
        }
    }
}

/// Lloyd's algorithm from the given centroids.
///
/// Alternates nearest-centroid assignment (ties to the lowest index) with
/// mean updates until the assignment is stable, the relative error decrease
/// drops below `tol`, or `max_iters` updates have run; a final update leaves
/// every centroid at the mean of its cluster. The assignment step skips
/// points whose nearest centroid is certified by Hamerly's distance bounds,
/// which changes the cost but not the result. Empty clusters are removed.
pub fn lloyd<P: AsRef<[f64]> + Sync>(
    points: &[P],
    initial_centroids: Vec<Vec<f64>>,
    max_iters: usize,
    tol: f64,
) -> QuantizedCollection {
    assert!(!points.is_empty() && !initial_centroids.is_empty());
    let mut centroids = initial_centroids;
    let k = centroids.len();

    // (assignment, upper bound to own centroid, lower bound to any other)
    let mut state: Vec<(usize, f64, f64)> = points
        .par_iter()
        .map(|p| nearest_two(p.as_ref(), &centroids))
        .collect();
    let mut assign: Vec<usize> = state.iter().map(|s| s.0).collect();
    let mut history = vec![mean_error(points, &centroids, &assign)];
    let mut iterations = 0;

    while iterations < max_iters {
        let prev_err = *history.last().unwrap();
        if prev_err == 0.0 {
            break;
        }
        let old = centroids.clone();
        update_centroids(points, &mut centroids, &assign);
        iterations += 1;

        let moved: Vec<f64> = old
            .iter()
            .zip(&centroids)
            .map(|(a, b)| sq_norm_dist(a, b).sqrt())
            .collect();
        let (mut max1, mut max1_k, mut max2) = (0.0f64, 0usize, 0.0f64);
        for (k, &m) in moved.iter().enumerate() {
            if m > max1 {
                max2 = max1;
                max1 = m;
                max1_k = k;
            } else if m > max2 {
                max2 = m;
            }
        }
        let half_gap: Vec<f64> = (0..k)
            .map(|a| {
                (0..k)
                    .filter(|&b| b != a)
                    .map(|b| sq_norm_dist(&centroids[a], &centroids[b]).sqrt())
                    .fold(f64::INFINITY, f64::min)
                    / 2.0
            })
            .collect();

        let changed: usize = state
            .par_iter_mut()
            .zip(points.par_iter())
            .map(|(s, p)| {
                let (a, mut upper, mut lower) = *s;
                let other_move = if a == max1_k { max2 } else { max1 };
                upper += moved[a] + 1e-12 * (upper + moved[a]);
                lower -= other_move + 1e-12 * (lower.abs() + other_move);
                let bound = half_gap[a].max(lower);
                if upper < bound {
                    *s = (a, upper, lower);
                    return 0;
                }
                upper = sq_norm_dist(p.as_ref(), &centroids[a]).sqrt();
                if upper < bound {
                    *s = (a, upper, lower);
                    return 0;
                }
                let next = nearest_two(p.as_ref(), &centroids);
                *s = next;
                usize::from(next.0 != a)
            })
            .sum();
        for (a, s) in assign.iter_mut().zip(&state) {
            *a = s.0;
        }
        let err = mean_error(points, &centroids, &assign);
        history.push(err);
        if changed == 0 || (prev_err - err) <= tol * prev_err {
            break;
        }
    }

    // Leave centroids at their cluster means.
    update_centroids(points, &mut centroids, &assign);
    let final_err = mean_error(points, &centroids, &assign);
    history.push(final_err);

    let mut counts = vec![0usize; k];
    for &a in &assign {
        counts[a] += 1;
    }
    let mut remap = vec![usize::MAX; k];
    let mut kept = Vec::new();
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            remap[c] = kept.len();
            kept.push(c);
        }
    }
    let total = points.len() as f64;
    QuantizedCollection {
        weights: kept.iter().map(|&c| counts[c] as f64 / total).collect(),
        centroids: kept.iter().map(|&c| centroids[c].clone()).collect(),
        assignments: assign.iter().map(|&a| remap[a]).collect(),
        quantization_error: final_err,
        iterations,
        error_history: history,
    }
}

/// Settings for [`quantize_points`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantOptions {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl QuantOptions {
    pub fn from_config(cfg: &crate::PipelineConfig) -> Self {
        Self {
            k: cfg.k_quant,
            seed: cfg.rng_seed,
            restarts: cfg.quant_restarts,
            max_iters: cfg.lloyd_max_iters,
            tol: cfg.lloyd_tol,
        }
    }
}

/// Best of `restarts` k-means++/Lloyd runs; restart `r` draws from its own
/// sub-stream of the seed. Ties keep the earliest restart.
pub fn quantize_points<P: AsRef<[f64]> + Sync>(
    points: &[P],
    opts: &QuantOptions,
) -> Result<QuantizedCollection> {
    if opts.k == 0 || opts.k > points.len() {
        return Err(Error::KTooLarge {
            k: opts.k,
            points: points.len(),
        });
    }
    let mut best: Option<QuantizedCollection> = None;
    for r in 0..opts.restarts.max(1) {
        let mut g = rng::stream(opts.seed, rng::substream(rng::tag::QUANT, r as u64));
        let init = kmeanspp_init_with(points, opts.k, &mut g)?;
        let q = lloyd(points, init, opts.max_iters, opts.tol);
        if best
            .as_ref()
            .is_none_or(|b| q.quantization_error < b.quantization_error)
        {
            best = Some(q);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Embeds a team's frames (optionally centered) and quantizes them.
pub fn quantize_collection(
    collection: &TeamCollection,
    grid: &ProjectionGrid,
    opts: &QuantOptions,
    centered: bool,
) -> Result<QuantizedCollection> {
    let points = embed_frames(&collection.frames, grid, centered);
    quantize_points(&points, opts)
}

/// Per-cluster summary of a quantized frame collection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub frames: usize,
    pub percentage: f64,
    /// Share of in-possession frames among frames with a possession label.
    pub average_possession: Option<f64>,
    /// Frame closest to the centroid (ties to the lowest index).
    pub nearest_frame: usize,
    /// A seeded uniform draw among the cluster's frames.
    pub random_frame: usize,
}

pub fn cluster_report<P: AsRef<[f64]>>(
    q: &QuantizedCollection,
    frames: &[Frame],
    points: &[P],
    seed: u64,
) -> Vec<ClusterSummary> {
    assert_eq!(q.assignments.len(), frames.len());
    assert_eq!(points.len(), frames.len());
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); q.k()];
    for (i, &a) in q.assignments.iter().enumerate() {
        members[a].push(i);
    }
    let mut g = rng::stream(seed, rng::tag::REPORT);
    let total = frames.len() as f64;
    members
        .iter()
        .enumerate()
        .map(|(c, idx)| {
            let (us, them) =
                idx.iter()
                    .fold((0usize, 0usize), |(u, t), &i| match frames[i].possession {
                        Possession::Us => (u + 1, t),
                        Possession::Them => (u, t + 1),
                        Possession::Unassigned => (u, t),
                    });
            let nearest_frame = idx
                .iter()
                .map(|&i| {
                    (
                        i,
                        sq_embedding_distance(points[i].as_ref(), &q.centroids[c]),
                    )
                })
                .fold((usize::MAX, f64::INFINITY), |best, cur| {
                    if cur.1 < best.1 {
                        cur
                    } else {
                        best
                    }
                })
                .0;
            ClusterSummary {
                cluster: c,
                frames: idx.len(),
                percentage: 100.0 * idx.len() as f64 / total,
                average_possession: (us + them > 0).then(|| us as f64 / (us + them) as f64),
                nearest_frame,
                random_frame: idx[g.random_range(0..idx.len())],
            }
        })
        .collect()
}
