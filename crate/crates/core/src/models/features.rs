//! Frame representations for the possession benchmark.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Pitch;
use crate::embed::{embed_frame, ProjectionGrid};
use crate::frame::Frame;

pub const GRID_CELLS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    RawTracking,
    Embedding,
    ImageGrid,
    AveragePosition,
    CenteredEmbedding,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::RawTracking,
        FeatureKind::Embedding,
        FeatureKind::ImageGrid,
        FeatureKind::AveragePosition,
        FeatureKind::CenteredEmbedding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::RawTracking => "raw_tracking",
            FeatureKind::Embedding => "embedding",
            FeatureKind::ImageGrid => "image_grid",
            FeatureKind::AveragePosition => "average_position",
            FeatureKind::CenteredEmbedding => "centered_embedding",
        }
    }

    pub fn dim(self, n: usize, projections: usize) -> usize {
        match self {
            FeatureKind::RawTracking => 2 * n,
            FeatureKind::Embedding | FeatureKind::CenteredEmbedding => n * projections,
            FeatureKind::ImageGrid => GRID_CELLS * GRID_CELLS,
            FeatureKind::AveragePosition => 2,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown feature kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

/// Cell index along one axis; points on a boundary go to the lower cell.
fn cell(v: f64, half: f64) -> usize {
    let t = (v + half) / (2.0 * half) * GRID_CELLS as f64;
    (t.ceil() as i64 - 1).clamp(0, GRID_CELLS as i64 - 1) as usize
}

pub fn build_features(
    frame: &Frame,
    kind: FeatureKind,
    grid: &ProjectionGrid,
    pitch: Pitch,
) -> FeatureVector {
    let values = match kind {
        FeatureKind::RawTracking => {
            let mut pts = frame.positions().to_vec();
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            pts.into_iter().flatten().collect()
        }
        FeatureKind::Embedding => embed_frame(frame, grid).into_values(),
        FeatureKind::CenteredEmbedding => embed_frame(&frame.centered(), grid).into_values(),
        FeatureKind::ImageGrid => {
            let mut counts = vec![0.0; GRID_CELLS * GRID_CELLS];
            for p in frame.positions() {
                let row = cell(p[1], pitch.half_width);
                let col = cell(p[0], pitch.half_length);
                counts[row * GRID_CELLS + col] += 1.0;
            }
            counts
        }
        FeatureKind::AveragePosition => frame.mean_position().to_vec(),
    };
    FeatureVector { kind, values }
}
