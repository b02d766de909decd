//! Optimal-transport tools for spatial tracking data.
//!
//! Frames of player positions are treated as uniform discrete measures,
//! embedded through sorted projections on a fixed direction grid, quantized
//! with k-means++/Lloyd and compared with exact Wasserstein distances. The
//! crate also carries the downstream models: spherical Gaussian mixtures for
//! team identification and logistic regression for possession prediction.

pub mod config;
pub mod embed;
pub mod error;
pub mod frame;
pub mod ingest;
pub mod models;
pub mod ot;
pub mod quant;
pub mod rng;
pub mod style;
pub mod synth;

pub use config::{PipelineConfig, Pitch, Sport};
pub use error::{Error, Result};
pub use frame::{DiscreteMeasure, Frame, FrameMeasure, Point, Possession};
