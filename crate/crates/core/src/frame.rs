//! Frames and the discrete measures built from them.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Which team holds the ball, from the point of view of the frame's team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Possession {
    Us,
    Them,
    Unassigned,
}

/// One timestamp's player positions for one team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    positions: Vec<Point>,
    pub team_id: String,
    pub game_id: String,
    pub period: u32,
    pub frame_id: u64,
    pub timestamp_ms: i64,
    pub possession: Possession,
}

impl Frame {
    /// Builds a frame, enforcing exactly `n` finite positions. The player
    /// order is kept as given.
    pub fn new(
        positions: Vec<Point>,
        team_id: impl Into<String>,
        timestamp_ms: i64,
        possession: Possession,
        n: usize,
    ) -> Result<Self> {
        if positions.len() != n {
            return Err(Error::WrongPlayerCount {
                expected: n,
                found: positions.len(),
            });
        }
        if let Some(player) = positions
            .iter()
            .position(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(Error::NonFiniteCoordinate { player });
        }
        Ok(Self {
            positions,
            team_id: team_id.into(),
            game_id: String::new(),
            period: 1,
            frame_id: 0,
            timestamp_ms,
            possession,
        })
    }

    pub fn with_game(mut self, game_id: impl Into<String>, period: u32, frame_id: u64) -> Self {
        self.game_id = game_id.into();
        self.period = period;
        self.frame_id = frame_id;
        self
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn mean_position(&self) -> Point {
        let n = self.positions.len() as f64;
        let (sx, sy) = self
            .positions
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    /// Applies `f` to every position, keeping all metadata.
    pub fn map_positions(&self, f: impl Fn(Point) -> Point) -> Self {
        Self {
            positions: self.positions.iter().map(|&p| f(p)).collect(),
            ..self.clone()
        }
    }

    pub fn translated(&self, t: Point) -> Self {
        self.map_positions(|p| [p[0] + t[0], p[1] + t[1]])
    }

    /// Subtracts the mean player location from every position.
    pub fn centered(&self) -> Self {
        // Two passes: the residual mean of a single pass can be a few ulps
        // away from zero for large offsets.
        let once = {
            let m = self.mean_position();
            self.translated([-m[0], -m[1]])
        };
        let m = once.mean_position();
        once.translated([-m[0], -m[1]])
    }

    pub fn to_measure(&self) -> FrameMeasure {
        FrameMeasure {
            atoms: self.positions.clone(),
        }
    }
}

/// Free-function form of [`Frame::new`].
pub fn make_frame(
    positions: Vec<Point>,
    team_id: impl Into<String>,
    timestamp_ms: i64,
    possession: Possession,
    n: usize,
) -> Result<Frame> {
    Frame::new(positions, team_id, timestamp_ms, possession, n)
}

pub fn center_frame(f: &Frame) -> Frame {
    f.centered()
}

pub fn to_measure(f: &Frame) -> FrameMeasure {
    f.to_measure()
}

fn cmp_points(a: &Point, b: &Point) -> Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

/// Uniform measure over a frame's positions (weight 1/n per atom).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMeasure {
    atoms: Vec<Point>,
}

impl FrameMeasure {
    pub fn from_atoms(atoms: Vec<Point>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    pub fn sorted_atoms(&self) -> Vec<Point> {
        let mut a = self.atoms.clone();
        a.sort_by(cmp_points);
        a
    }

    /// Multiset equality: atoms compared in sorted lexicographic order,
    /// coordinates within `tol`.
    pub fn multiset_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .sorted_atoms()
                .iter()
                .zip(other.sorted_atoms().iter())
                .all(|(a, b)| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol)
    }

    pub fn to_discrete(&self) -> DiscreteMeasure {
        let w = self.weight();
        DiscreteMeasure {
            atoms: self.atoms.iter().map(|p| p.to_vec()).collect(),
            weights: vec![w; self.atoms.len()],
        }
    }
}

/// Weighted atoms in R^d. Weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

pub const WEIGHT_SUM_TOL: f64 = 1e-9;

impl DiscreteMeasure {
    /// Zero-weight atoms are dropped; negative or non-finite weights, ragged
    /// atoms and total mass away from one are rejected.
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: atoms.len(),
                right: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMeasure(
                "weights must be finite and non-negative".into(),
            ));
        }
        let (atoms, weights): (Vec<_>, Vec<_>) = atoms
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .unzip();
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure(
                "no atoms with positive weight".into(),
            ));
        }
        let d = atoms[0].len();
        if atoms.iter().any(|a| a.len() != d) {
            return Err(Error::InvalidMeasure(
                "atoms have differing dimensions".into(),
            ));
        }
        if atoms.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite atom coordinate".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms, weights })
    }

    /// Uniform weights over the given atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / atoms.len().max(1) as f64;
        let weights = vec![w; atoms.len()];
        Self::new(atoms, weights)
    }

    pub fn dirac(atom: Vec<f64>) -> Result<Self> {
        Self::new(vec![atom], vec![1.0])
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}
