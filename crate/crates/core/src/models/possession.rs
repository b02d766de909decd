//! Possession prediction benchmark across frame representations.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{build_features, FeatureKind};
use super::logistic::{fit_logistic, LogisticOptions};
use crate::config::Pitch;
use crate::embed::ProjectionGrid;
use crate::error::{Error, Result};
use crate::frame::{Frame, Possession};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub representation: String,
    pub accuracy: f64,
}

/// Fold id per sample: each class is shuffled with the seed and dealt
/// round-robin over the folds, so every fold keeps the class ratio.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut g = rng::stream(seed, tag::FOLDS);
    let mut out = vec![0; labels.len()];
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut g);
        for (pos, i) in idx.into_iter().enumerate() {
            out[i] = pos % folds;
        }
    }
    out
}

pub fn accuracy(predictions: &[bool], labels: &[bool]) -> Result<f64> {
    if predictions.len() != labels.len() || labels.is_empty() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| p == y)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Frames with a possession label and their labels (true = in possession).
pub fn labeled_frames(frames: &[Frame]) -> (Vec<&Frame>, Vec<bool>) {
    frames
        .iter()
        .filter(|f| f.possession != Possession::Unassigned)
        .map(|f| (f, f.possession == Possession::Us))
        .unzip()
}

/// Out-of-fold predictions of a logistic model for one representation.
pub fn cross_val_predictions(
    features: &[Vec<f64>],
    labels: &[bool],
    fold_of: &[usize],
    folds: usize,
    opts: &LogisticOptions,
) -> Result<Vec<bool>> {
    let mut pred = vec![false; labels.len()];
    for f in 0..folds {
        let (train_x, train_y): (Vec<Vec<f64>>, Vec<bool>) = (0..labels.len())
            .filter(|&i| fold_of[i] != f)
            .map(|i| (features[i].clone(), labels[i]))
            .unzip();
        let model = fit_logistic(&train_x, &train_y, opts)?;
        for i in (0..labels.len()).filter(|&i| fold_of[i] == f) {
            pred[i] = model.predict(&features[i]);
        }
    }
    Ok(pred)
}

/// Stratified k-fold logistic-regression accuracy for every representation.
/// Unassigned frames are dropped first.
pub fn possession_benchmark(
    frames: &[Frame],
    grid: &ProjectionGrid,
    pitch: Pitch,
    folds: usize,
    seed: u64,
    opts: &LogisticOptions,
) -> Result<Vec<BenchmarkRow>> {
    let (kept, labels) = labeled_frames(frames);
    if folds < 2 || kept.len() < folds {
        return Err(Error::InsufficientData(format!(
            "{} labeled frames cannot fill {folds} folds",
            kept.len()
        )));
    }
    let fold_of = stratified_folds(&labels, folds, seed);
    FeatureKind::ALL
        .par_iter()
        .map(|&kind| {
            let x: Vec<Vec<f64>> = kept
                .iter()
                .map(|f| build_features(f, kind, grid, pitch).values)
                .collect();
            let pred = cross_val_predictions(&x, &labels, &fold_of, folds, opts)?;
            Ok(BenchmarkRow {
                representation: kind.name().to_string(),
                accuracy: accuracy(&pred, &labels)?,
            })
        })
        .collect()
}

/// Adds a row for predictions produced outside this crate, scored against
/// the same labels (in the order of [`labeled_frames`]).
pub fn add_external_predictions(
    table: &mut Vec<BenchmarkRow>,
    name: &str,
    predictions: &[bool],
    labels: &[bool],
) -> Result<()> {
    table.push(BenchmarkRow {
        representation: name.to_string(),
        accuracy: accuracy(predictions, labels)?,
    });
    Ok(())
}
