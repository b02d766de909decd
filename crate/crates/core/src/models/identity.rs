//! Team identification from frame samples with per-team mixtures.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gmm::{fit_spherical_gmm, gmm_log_likelihood, point_log_likelihoods, SphericalGmm};
use crate::config::PipelineConfig;
use crate::embed::{embed_frames, make_grid, EmbeddedFrame};
use crate::error::{Error, Result};
use crate::ingest::TeamCollection;
use crate::rng::{self, tag};

/// Teams ranked by the log-likelihood of `sample`, best first. The prior
/// over teams is uniform; equal scores keep team-id order.
pub fn classify_team<P: AsRef<[f64]> + Sync>(
    sample: &[P],
    models: &BTreeMap<String, SphericalGmm>,
) -> Result<Vec<(String, f64)>> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if models.len() < 2 {
        return Err(Error::InsufficientData(
            "at least 2 team models are needed".into(),
        ));
    }
    let scored = models
        .iter()
        .map(|(t, m)| Ok((t.clone(), gmm_log_likelihood(m, sample)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank(scored))
}

fn rank(mut scored: Vec<(String, f64)>) -> Vec<(String, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

/// Fold `f` of `len` items: [f·len/folds, (f+1)·len/folds).
pub fn fold_range(len: usize, folds: usize, f: usize) -> std::ops::Range<usize> {
    f * len / folds..(f + 1) * len / folds
}

/// Per-frame log-likelihoods of every held-out fold under every team model
/// trained without that fold.
#[derive(Debug, Clone)]
pub struct IdentityTable {
    pub teams: Vec<String>,
    pub folds: usize,
    /// [fold][true team][model team] → per-frame log-likelihoods of the
    /// true team's held-out frames.
    frame_scores: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub teams: Vec<String>,
    pub folds: usize,
    pub top1: f64,
    pub top2: f64,
    /// confusion[true][predicted], one count per (team, fold).
    pub confusion: Vec<Vec<usize>>,
}

impl IdentityReport {
    pub fn write_confusion_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::from("true_team")];
        header.extend(self.teams.iter().cloned());
        w.write_record(&header)?;
        for (t, row) in self.teams.iter().zip(&self.confusion) {
            let mut rec = vec![t.clone()];
            rec.extend(row.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizePoint {
    pub size: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

pub fn write_curve_csv<W: Write>(out: W, curve: &[SampleSizePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "mean_accuracy", "std_accuracy"])?;
    for p in curve {
        w.write_record([
            p.size.to_string(),
            format!("{:?}", p.mean_accuracy),
            format!("{:?}", p.std_accuracy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

impl IdentityTable {
    /// Embeds each team, splits it into `folds` consecutive chronological
    /// folds and fits one mixture per (team, fold) on the other folds.
    pub fn build(
        league: &BTreeMap<String, TeamCollection>,
        cfg: &PipelineConfig,
        folds: usize,
    ) -> Result<Self> {
        if folds < 2 {
            return Err(Error::InvalidConfig("at least 2 folds are needed".into()));
        }
        if league.len() < 2 {
            return Err(Error::InsufficientData(
                "at least 2 teams are needed".into(),
            ));
        }
        let needed = folds * cfg.k_gmm;
        for (t, c) in league {
            if c.len() < needed {
                return Err(Error::InsufficientFrames {
                    team_id: t.clone(),
                    found: c.len(),
                    needed,
                });
            }
        }
        let grid = make_grid(cfg.projections)?;
        let teams: Vec<String> = league.keys().cloned().collect();
        let embedded: Vec<Vec<EmbeddedFrame>> = league
            .values()
            .map(|c| embed_frames(&c.frames, &grid, false))
            .collect();

        let jobs: Vec<(usize, usize)> = (0..teams.len())
            .flat_map(|t| (0..folds).map(move |f| (t, f)))
            .collect();
        let models = jobs
            .par_iter()
            .map(|&(t, f)| {
                let pts = &embedded[t];
                let held = fold_range(pts.len(), folds, f);
                let train: Vec<&EmbeddedFrame> =
                    pts[..held.start].iter().chain(&pts[held.end..]).collect();
                let seed = rng::substream(rng::substream(cfg.rng_seed, t as u64), f as u64);
                fit_spherical_gmm(&train, cfg.k_gmm, seed, cfg.em_max_iters, cfg.em_tol)
            })
            .collect::<Result<Vec<SphericalGmm>>>()?;
        let model = |t: usize, f: usize| &models[t * folds + f];

        let frame_scores = (0..folds)
            .into_par_iter()
            .map(|f| {
                (0..teams.len())
                    .map(|s| {
                        let pts = &embedded[s];
                        let held = &pts[fold_range(pts.len(), folds, f)];
                        (0..teams.len())
                            .map(|t| point_log_likelihoods(model(t, f), held))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            teams,
            folds,
            frame_scores,
        })
    }

    pub fn fold_len(&self, f: usize, team: usize) -> usize {
        self.frame_scores[f][team][0].len()
    }

    /// Ranking for the given subset of a held-out fold.
    fn ranking(&self, f: usize, s: usize, subset: Option<&[usize]>) -> Vec<(String, f64)> {
        let scored = self.frame_scores[f][s]
            .iter()
            .enumerate()
            .map(|(t, ll)| {
                let total = match subset {
                    Some(idx) => idx.iter().map(|&i| ll[i]).sum(),
                    None => ll.iter().sum(),
                };
                (self.teams[t].clone(), total)
            })
            .collect();
        rank(scored)
    }

    pub fn report(&self) -> IdentityReport {
        let n = self.teams.len();
        let mut confusion = vec![vec![0; n]; n];
        let (mut top1, mut top2) = (0usize, 0usize);
        for f in 0..self.folds {
            for s in 0..n {
                let r = self.ranking(f, s, None);
                let pred = self
                    .teams
                    .iter()
                    .position(|t| *t == r[0].0)
                    .expect("ranked team exists");
                confusion[s][pred] += 1;
                top1 += usize::from(r[0].0 == self.teams[s]);
                top2 += usize::from(r.iter().take(2).any(|(t, _)| *t == self.teams[s]));
            }
        }
        let trials = (self.folds * n) as f64;
        IdentityReport {
            teams: self.teams.clone(),
            folds: self.folds,
            top1: top1 as f64 / trials,
            top2: top2 as f64 / trials,
            confusion,
        }
    }

    /// For each size, `repeats` rounds of classifying a uniform subsample of
    /// every held-out fold; mean and population standard deviation of the
    /// per-round Top-1 accuracy.
    pub fn sample_size_curve(
        &self,
        sizes: &[usize],
        repeats: usize,
        seed: u64,
    ) -> Result<Vec<SampleSizePoint>> {
        let n = self.teams.len();
        let smallest = (0..self.folds)
            .flat_map(|f| (0..n).map(move |s| (f, s)))
            .map(|(f, s)| self.fold_len(f, s))
            .min()
            .unwrap_or(0);
        if let Some(&size) = sizes.iter().find(|&&k| k == 0 || k > smallest) {
            return Err(Error::SizeTooLarge {
                size,
                fold: smallest,
            });
        }
        sizes
            .par_iter()
            .map(|&size| {
                let mut g = rng::stream(seed, rng::substream(tag::SUBSAMPLE, size as u64));
                let accs: Vec<f64> = (0..repeats.max(1))
                    .map(|_| {
                        let mut correct = 0usize;
                        for f in 0..self.folds {
                            for s in 0..n {
                                let mut idx = sample(&mut g, self.fold_len(f, s), size).into_vec();
                                idx.sort_unstable();
                                let r = self.ranking(f, s, Some(&idx));
                                correct += usize::from(r[0].0 == self.teams[s]);
                            }
                        }
                        correct as f64 / (self.folds * n) as f64
                    })
                    .collect();
                let m = accs.len() as f64;
                let mean = accs.iter().sum::<f64>() / m;
                let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / m;
                Ok(SampleSizePoint {
                    size,
                    mean_accuracy: mean,
                    std_accuracy: var.sqrt(),
                })
            })
            .collect()
    }
}

/// Top-1/Top-2 accuracy and confusion counts with consecutive folds.
pub fn kfold_team_identity(
    league: &BTreeMap<String, TeamCollection>,
    cfg: &PipelineConfig,
    folds: usize,
) -> Result<IdentityReport> {
    Ok(IdentityTable::build(league, cfg, folds)?.report())
}

pub fn accuracy_vs_sample_size(
    league: &BTreeMap<String, TeamCollection>,
    cfg: &PipelineConfig,
    folds: usize,
    sizes: &[usize],
    repeats: usize,
) -> Result<Vec<SampleSizePoint>> {
    IdentityTable::build(league, cfg, folds)?.sample_size_curve(sizes, repeats, cfg.rng_seed)
}
