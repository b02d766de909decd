//! Spherical Gaussian mixtures fitted by EM.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quant::kmeanspp_init_with;
use crate::rng::{self, tag};

pub const VARIANCE_FLOOR: f64 = 1e-6;

/// K isotropic components: N(mean_k, variance_k · I) with weight π_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalGmm {
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
    pub weights: Vec<f64>,
    /// Log-likelihood after each E-step of the fit.
    #[serde(default)]
    pub log_likelihood_history: Vec<f64>,
}

impl SphericalGmm {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// log π_k + log N(x; m_k, σ²_k I) for every component.
    fn component_log_densities(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len() as f64;
        for (k, o) in out.iter_mut().enumerate() {
            let var = self.variances[k];
            let sq: f64 = x
                .iter()
                .zip(&self.means[k])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            *o = self.weights[k].ln()
                - 0.5 * d * (2.0 * std::f64::consts::PI * var).ln()
                - sq / (2.0 * var);
        }
    }

    /// log p(x), stable under large distances.
    pub fn point_log_likelihood(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.k()];
        self.component_log_densities(x, &mut buf);
        log_sum_exp(&buf)
    }
}

pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn check_dims<P: AsRef<[f64]>>(model: &SphericalGmm, points: &[P]) -> Result<()> {
    match points.iter().find(|p| p.as_ref().len() != model.dim()) {
        Some(p) => Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: p.as_ref().len(),
        }),
        None => Ok(()),
    }
}

/// Per-point log-likelihoods, in input order.
pub fn point_log_likelihoods<P: AsRef<[f64]> + Sync>(
    model: &SphericalGmm,
    points: &[P],
) -> Result<Vec<f64>> {
    check_dims(model, points)?;
    Ok(points
        .par_iter()
        .map(|p| model.point_log_likelihood(p.as_ref()))
        .collect())
}

/// Σ_i log Σ_k π_k N(x_i; m_k, σ²_k I); frames are independent.
pub fn gmm_log_likelihood<P: AsRef<[f64]> + Sync>(
    model: &SphericalGmm,
    points: &[P],
) -> Result<f64> {
    Ok(point_log_likelihoods(model, points)?.iter().sum())
}

/// Gradient of [`gmm_log_likelihood`] with respect to each component mean:
/// Σ_i r_ik (x_i − m_k) / σ²_k.
pub fn gmm_mean_gradient<P: AsRef<[f64]> + Sync>(
    model: &SphericalGmm,
    points: &[P],
) -> Result<Vec<Vec<f64>>> {
    check_dims(model, points)?;
    let resp = responsibilities(model, points).0;
    Ok((0..model.k())
        .map(|k| {
            let mut g = vec![0.0; model.dim()];
            for (p, r) in points.iter().zip(&resp) {
                for ((gj, x), m) in g.iter_mut().zip(p.as_ref()).zip(&model.means[k]) {
                    *gj += r[k] * (x - m) / model.variances[k];
                }
            }
            g
        })
        .collect())
}

/// (responsibilities, total log-likelihood)
fn responsibilities<P: AsRef<[f64]> + Sync>(
    model: &SphericalGmm,
    points: &[P],
) -> (Vec<Vec<f64>>, f64) {
    let rows: Vec<(Vec<f64>, f64)> = points
        .par_iter()
        .map(|p| {
            let mut r = vec![0.0; model.k()];
            model.component_log_densities(p.as_ref(), &mut r);
            let lse = log_sum_exp(&r);
            for v in r.iter_mut() {
                *v = (*v - lse).exp();
            }
            (r, lse)
        })
        .collect();
    let ll = rows.iter().map(|(_, l)| l).sum();
    (rows.into_iter().map(|(r, _)| r).collect(), ll)
}

/// Means, variances and weights maximizing the expected log-likelihood for
/// the given responsibilities. Components with no mass keep their mean.
fn m_step<P: AsRef<[f64]> + Sync>(model: &mut SphericalGmm, points: &[P], resp: &[Vec<f64>]) {
    let dim = model.dim();
    let total = points.len() as f64;
    let updated: Vec<(Vec<f64>, f64, f64)> = (0..model.k())
        .into_par_iter()
        .map(|k| {
            let mass: f64 = resp.iter().map(|r| r[k]).sum();
            if mass <= 0.0 {
                return (model.means[k].clone(), VARIANCE_FLOOR, 0.0);
            }
            let mut mean = vec![0.0; dim];
            for (p, r) in points.iter().zip(resp) {
                for (m, x) in mean.iter_mut().zip(p.as_ref()) {
                    *m += r[k] * x;
                }
            }
            for m in mean.iter_mut() {
                *m /= mass;
            }
            let sq: f64 = points
                .iter()
                .zip(resp)
                .map(|(p, r)| {
                    r[k] * p
                        .as_ref()
                        .iter()
                        .zip(&mean)
                        .map(|(x, m)| (x - m) * (x - m))
                        .sum::<f64>()
                })
                .sum();
            let var = (sq / (mass * dim as f64)).max(VARIANCE_FLOOR);
            (mean, var, mass / total)
        })
        .collect();
    for (k, (mean, var, w)) in updated.into_iter().enumerate() {
        model.means[k] = mean;
        model.variances[k] = var;
        model.weights[k] = w;
    }
    let s: f64 = model.weights.iter().sum();
    for w in model.weights.iter_mut() {
        *w /= s;
    }
}

/// EM from k-means++ means, equal weights and the pooled variance. Stops
/// when the relative change of the log-likelihood drops below `tol` or
/// after `max_iters` M-steps.
pub fn fit_spherical_gmm<P: AsRef<[f64]> + Sync>(
    points: &[P],
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<SphericalGmm> {
    let mut g = rng::stream(seed, tag::GMM);
    let means = kmeanspp_init_with(points, k, &mut g)?;
    let dim = means[0].len();
    let n = points.len() as f64;
    let mut center = vec![0.0; dim];
    for p in points {
        for (c, x) in center.iter_mut().zip(p.as_ref()) {
            *c += x / n;
        }
    }
    let pooled: f64 = points
        .iter()
        .map(|p| {
            p.as_ref()
                .iter()
                .zip(&center)
                .map(|(x, c)| (x - c) * (x - c))
                .sum::<f64>()
        })
        .sum::<f64>()
        / (n * dim as f64);
    let mut model = SphericalGmm {
        means,
        variances: vec![pooled.max(VARIANCE_FLOOR); k],
        weights: vec![1.0 / k as f64; k],
        log_likelihood_history: Vec::new(),
    };
    let mut history = Vec::new();
    let mut iter = 0;
    loop {
        let (resp, ll) = responsibilities(&model, points);
        if let Some(&prev) = history.last() {
            let prev: f64 = prev;
            if (ll - prev).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE) {
                history.push(ll);
                break;
            }
        }
        history.push(ll);
        if iter == max_iters {
            break;
        }
        m_step(&mut model, points, &resp);
        iter += 1;
    }
    model.log_likelihood_history = history;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn blobs(centers: &[[f64; 3]], per: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng::stream(seed, 99);
        centers
            .iter()
            .flat_map(|c| {
                (0..per)
                    .map(|_| {
                        c.iter()
                            .map(|v| {
                                let z: f64 = StandardNormal.sample(&mut r);
                                v + scale * z
                            })
                            .collect::<Vec<f64>>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn single_component_is_closed_form() {
        let pts = blobs(&[[1.0, -2.0, 3.0]], 200, 1.5, 1);
        let m = fit_spherical_gmm(&pts, 1, 0, 50, 1e-10).unwrap();
        let n = pts.len() as f64;
        let mean: Vec<f64> = (0..3)
            .map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / n)
            .collect();
        let var = pts
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / (n * 3.0);
        for (a, b) in m.means[0].iter().zip(&mean) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((m.variances[0] - var).abs() < 1e-9);
        assert_eq!(m.weights, vec![1.0]);
    }

    #[test]
    fn two_blobs_recovered() {
        let pts = blobs(&[[0.0, 0.0, 0.0], [50.0, 0.0, 0.0]], 300, 2.0, 2);
        let m = fit_spherical_gmm(&pts, 2, 3, 200, 1e-8).unwrap();
        let mut xs: Vec<f64> = m.means.iter().map(|c| c[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!(xs[0].abs() < 1.0 && (xs[1] - 50.0).abs() < 1.0, "{xs:?}");
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_likelihood_never_decreases() {
        for seed in 0..5 {
            let pts = blobs(
                &[[0.0, 0.0, 0.0], [4.0, 1.0, 0.0], [1.0, 5.0, 2.0]],
                80,
                1.5,
                seed,
            );
            let m = fit_spherical_gmm(&pts, 4, seed, 100, 0.0).unwrap();
            for w in m.log_likelihood_history.windows(2) {
                assert!(w[1] >= w[0] - 1e-8, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn likelihood_closed_forms() {
        let m = SphericalGmm {
            means: vec![vec![1.0, 2.0]],
            variances: vec![0.5],
            weights: vec![1.0],
            log_likelihood_history: vec![],
        };
        let none: Vec<Vec<f64>> = vec![];
        assert_eq!(gmm_log_likelihood(&m, &none).unwrap(), 0.0);
        let at_mean = gmm_log_likelihood(&m, &[vec![1.0, 2.0]]).unwrap();
        assert!((at_mean + (2.0 * std::f64::consts::PI * 0.5).ln()).abs() < 1e-12);
        let pts = vec![vec![0.3, 1.0], vec![-2.0, 4.0]];
        let twice: Vec<Vec<f64>> = pts.iter().chain(&pts).cloned().collect();
        assert_eq!(
            gmm_log_likelihood(&m, &twice).unwrap(),
            2.0 * gmm_log_likelihood(&m, &pts).unwrap()
        );
        assert!(matches!(
            gmm_log_likelihood(&m, &[vec![0.0; 3]]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn mean_gradient_matches_finite_differences() {
        let mut r = rng::stream(5, 77);
        for trial in 0..10 {
            let d = 1 + trial % 6;
            let k = 1 + trial % 3;
            let rand_vec = |r: &mut crate::rng::ChaCha8Rng| -> Vec<f64> {
                (0..d).map(|_| r.random_range(-2.0..2.0)).collect()
            };
            let points: Vec<Vec<f64>> = (0..12).map(|_| rand_vec(&mut r)).collect();
            let mut w: Vec<f64> = (0..k).map(|_| r.random_range(0.2..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            let model = SphericalGmm {
                means: (0..k).map(|_| rand_vec(&mut r)).collect(),
                variances: (0..k).map(|_| r.random_range(0.5..2.0)).collect(),
                weights: w,
                log_likelihood_history: vec![],
            };
            let grad = gmm_mean_gradient(&model, &points).unwrap();
            let h = 1e-5;
            for c in 0..k {
                for j in 0..d {
                    let mut up = model.clone();
                    up.means[c][j] += h;
                    let mut dn = model.clone();
                    dn.means[c][j] -= h;
                    let fd = (gmm_log_likelihood(&up, &points).unwrap()
                        - gmm_log_likelihood(&dn, &points).unwrap())
                        / (2.0 * h);
                    let g = grad[c][j];
                    assert!((fd - g).abs() <= 1e-4 * g.abs().max(1.0), "{fd} vs {g}");
                }
            }
        }
    }

    #[test]
    fn too_many_components() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            fit_spherical_gmm(&pts, 3, 0, 10, 1e-6),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn stable_far_from_every_component() {
        let m = SphericalGmm {
            means: vec![vec![0.0], vec![1.0]],
            variances: vec![1e-6, 1e-6],
            weights: vec![0.5, 0.5],
            log_likelihood_history: vec![],
        };
        assert!(m.point_log_likelihood(&[1e4]).is_finite());
    }
}
