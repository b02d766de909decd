//! Pipeline-wide configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sport whose conventions (player count, pitch, orientation rule) apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sport {
    #[default]
    Football,
    Basketball,
}

/// Axis-aligned playing surface centred on the origin, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pitch {
    pub half_length: f64,
    pub half_width: f64,
}

impl Pitch {
    pub const FOOTBALL: Pitch = Pitch {
        half_length: 52.5,
        half_width: 34.0,
    };
    pub const BASKETBALL: Pitch = Pitch {
        half_length: 14.3,
        half_width: 7.6,
    };

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0].abs() <= self.half_length && p[1].abs() <= self.half_width
    }

    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        [
            p[0].clamp(-self.half_length, self.half_length),
            p[1].clamp(-self.half_width, self.half_width),
        ]
    }
}

impl Sport {
    pub fn players(self) -> usize {
        match self {
            Sport::Football => 11,
            Sport::Basketball => 5,
        }
    }

    pub fn pitch(self) -> Pitch {
        match self {
            Sport::Football => Pitch::FOOTBALL,
            Sport::Basketball => Pitch::BASKETBALL,
        }
    }
}

/// Parameters shared by every stage of the pipeline.
///
/// Serialized field names are the ones accepted in CLI config files; every
/// field has a default so partial files are valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sport: Sport,
    /// Players per frame.
    pub n: usize,
    /// Number of projection directions.
    pub projections: usize,
    /// Transport order.
    pub p: u32,
    pub k_quant: usize,
    pub k_gmm: usize,
    pub subsample_stride: usize,
    pub rng_seed: u64,
    /// Independent k-means++/Lloyd restarts; the lowest-error run is kept.
    pub quant_restarts: usize,
    pub lloyd_max_iters: usize,
    pub lloyd_tol: f64,
    pub em_max_iters: usize,
    pub em_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::football()
    }
}

impl PipelineConfig {
    pub fn football() -> Self {
        Self {
            sport: Sport::Football,
            n: 11,
            projections: 12,
            p: 2,
            k_quant: 100,
            k_gmm: 50,
            subsample_stride: 1,
            rng_seed: 0,
            quant_restarts: 10,
            lloyd_max_iters: 300,
            lloyd_tol: 1e-6,
            em_max_iters: 200,
            em_tol: 1e-6,
        }
    }

    /// n = 5, L = 6, keeping one frame in 25.
    pub fn basketball() -> Self {
        Self {
            sport: Sport::Basketball,
            n: 5,
            projections: 6,
            subsample_stride: 25,
            ..Self::football()
        }
    }

    pub fn pitch(&self) -> Pitch {
        self.sport.pitch()
    }

    /// Dimension of the embedding space, n·L.
    pub fn embedding_dim(&self) -> usize {
        self.n * self.projections
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.projections < self.n + 1 {
            return bad(format!(
                "projections (L={}) must be at least n+1={}",
                self.projections,
                self.n + 1
            ));
        }
        if self.p == 0 {
            return bad("transport order p must be at least 1".into());
        }
        if self.k_quant == 0 || self.k_gmm == 0 {
            return bad("k_quant and k_gmm must be at least 1".into());
        }
        if self.subsample_stride == 0 {
            return bad("subsample_stride must be at least 1".into());
        }
        if self.quant_restarts == 0 {
            return bad("quant_restarts must be at least 1".into());
        }
        if !(self.lloyd_tol >= 0.0 && self.em_tol >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        PipelineConfig::football().validate().unwrap();
        PipelineConfig::basketball().validate().unwrap();
        assert_eq!(PipelineConfig::basketball().embedding_dim(), 30);
    }

    #[test]
    fn rejects_too_few_projections() {
        let cfg = PipelineConfig {
            projections: 11,
            ..PipelineConfig::football()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"k_quant": 7}"#).unwrap();
        assert_eq!(cfg.k_quant, 7);
        assert_eq!(cfg.projections, 12);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
