//! Synthetic seasons with controllable team styles.
//!
//! A team's frame is a formation of `line_count` horizontal lines centred on
//! `mean_block` (moved by `phase_shift` when the team is out of possession),
//! with isotropic Gaussian jitter of scale `compactness` on every player.
//! Frames are generated already oriented so the team attacks towards +x.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, Pitch};
use crate::error::{Error, Result};
use crate::frame::{Frame, Point, Possession};
use crate::ingest::{TeamCollection, TrackingRecord};
use crate::rng::{self, tag, ChaCha8Rng};

pub const FRAMES_PER_GAME: usize = 1000;
pub const FRAME_INTERVAL_MS: i64 = 40;
const LINE_SPACING: f64 = 0.12;
const LINE_WIDTH: f64 = 0.6;
const MAX_REJECTIONS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleParams {
    pub mean_block: Point,
    pub compactness: f64,
    pub line_count: usize,
    pub possession_bias: f64,
    pub phase_shift: Point,
}

impl Default for StyleParams {
    fn default() -> Self {
        Self {
            mean_block: [0.0, 0.0],
            compactness: 2.0,
            line_count: 3,
            possession_bias: 0.5,
            phase_shift: [0.0, 0.0],
        }
    }
}

impl StyleParams {
    pub fn validate(&self) -> Result<()> {
        let finite = self
            .mean_block
            .iter()
            .chain(&self.phase_shift)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig(
                "style coordinates must be finite".into(),
            ));
        }
        if !(self.compactness > 0.0 && self.compactness.is_finite()) {
            return Err(Error::InvalidConfig("compactness must be positive".into()));
        }
        if !(2..=4).contains(&self.line_count) {
            return Err(Error::InvalidConfig(format!(
                "line_count must be 2, 3 or 4, got {}",
                self.line_count
            )));
        }
        if !(0.0..=1.0).contains(&self.possession_bias) {
            return Err(Error::InvalidConfig(
                "possession_bias must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn shifted(&self, t: Point) -> Self {
        Self {
            mean_block: [self.mean_block[0] + t[0], self.mean_block[1] + t[1]],
            ..self.clone()
        }
    }
}

/// Noise-free player positions around `center`. Players fill the lines
/// front to back, earlier lines taking the remainder.
pub fn formation(center: Point, line_count: usize, n: usize, pitch: Pitch) -> Vec<Point> {
    let spacing = LINE_SPACING * 2.0 * pitch.half_length;
    let width = LINE_WIDTH * 2.0 * pitch.half_width;
    let lines = line_count.max(1);
    let mut out = Vec::with_capacity(n);
    for j in 0..lines {
        let players = n / lines + usize::from(j < n % lines);
        let x = center[0] + (j as f64 - (lines - 1) as f64 / 2.0) * spacing;
        let gap = if players > 1 {
            width / (players - 1) as f64
        } else {
            0.0
        };
        for i in 0..players {
            let y = center[1] + (i as f64 - (players - 1) as f64 / 2.0) * gap;
            out.push([x, y]);
        }
    }
    out
}

fn jitter(target: Point, noise: &Normal<f64>, pitch: Pitch, rng: &mut ChaCha8Rng) -> Point {
    let mut p = target;
    for _ in 0..MAX_REJECTIONS {
        p = [target[0] + noise.sample(rng), target[1] + noise.sample(rng)];
        if pitch.contains(p) {
            return p;
        }
    }
    pitch.clamp(p)
}

fn generate_with(
    team_id: &str,
    params: &StyleParams,
    frame_count: usize,
    cfg: &PipelineConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TeamCollection> {
    params.validate()?;
    if frame_count == 0 {
        return Err(Error::InvalidConfig(
            "frame_count must be at least 1".into(),
        ));
    }
    let pitch = cfg.pitch();
    let noise =
        Normal::new(0.0, params.compactness).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let in_possession = formation(params.mean_block, params.line_count, cfg.n, pitch);
    let out_of_possession = formation(
        [
            params.mean_block[0] + params.phase_shift[0],
            params.mean_block[1] + params.phase_shift[1],
        ],
        params.line_count,
        cfg.n,
        pitch,
    );
    let mut frames = Vec::with_capacity(frame_count);
    for idx in 0..frame_count {
        let ours = rng.random::<f64>() < params.possession_bias;
        let base = if ours {
            &in_possession
        } else {
            &out_of_possession
        };
        let positions = base
            .iter()
            .map(|t| jitter(*t, &noise, pitch, rng))
            .collect();
        let game = idx / FRAMES_PER_GAME;
        let within = idx % FRAMES_PER_GAME;
        let period = if within < FRAMES_PER_GAME / 2 { 1 } else { 2 };
        let possession = if ours {
            Possession::Us
        } else {
            Possession::Them
        };
        let frame = Frame::new(
            positions,
            team_id,
            within as i64 * FRAME_INTERVAL_MS,
            possession,
            cfg.n,
        )?
        .with_game(format!("{team_id}-g{game}"), period, idx as u64);
        frames.push(frame);
    }
    Ok(TeamCollection::new(team_id, frames))
}

/// Deterministic in (params, frame_count, seed, cfg).
pub fn generate_team(
    team_id: &str,
    params: &StyleParams,
    frame_count: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<TeamCollection> {
    generate_with(
        team_id,
        params,
        frame_count,
        cfg,
        &mut rng::stream(seed, tag::SYNTH),
    )
}

pub fn team_name(index: usize) -> String {
    format!("team{:02}", index + 1)
}

/// Team `i` is named `team{i+1:02}` and draws from its own stream of the
/// master seed.
pub fn generate_league(
    params: &[StyleParams],
    frames_per_team: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<BTreeMap<String, TeamCollection>> {
    if params.len() < 2 {
        return Err(Error::InvalidConfig(
            "a league needs at least 2 teams".into(),
        ));
    }
    let named: Vec<(String, StyleParams)> = params
        .iter()
        .enumerate()
        .map(|(i, p)| (team_name(i), p.clone()))
        .collect();
    generate_named_league(&named, frames_per_team, seed, cfg)
}

pub fn generate_named_league(
    teams: &[(String, StyleParams)],
    frames_per_team: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<BTreeMap<String, TeamCollection>> {
    use rayon::prelude::*;
    let out: Vec<TeamCollection> = teams
        .par_iter()
        .enumerate()
        .map(|(i, (id, p))| {
            let mut r = rng::stream(seed, rng::substream(tag::SYNTH, i as u64));
            generate_with(id, p, frames_per_team, cfg, &mut r)
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().map(|c| (c.team_id.clone(), c)).collect())
}

/// A team whose in- and out-of-possession frames follow two different
/// styles. The possession label is drawn from `in_possession.possession_bias`.
pub fn generate_two_phase_team(
    team_id: &str,
    in_possession: &StyleParams,
    out_of_possession: &StyleParams,
    frame_count: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<TeamCollection> {
    let mut r = rng::stream(seed, tag::SYNTH);
    let ours = generate_with(
        team_id,
        &StyleParams {
            possession_bias: 1.0,
            ..in_possession.clone()
        },
        frame_count,
        cfg,
        &mut r,
    )?;
    let theirs = generate_with(
        team_id,
        &StyleParams {
            possession_bias: 0.0,
            ..out_of_possession.clone()
        },
        frame_count,
        cfg,
        &mut r,
    )?;
    let frames = ours
        .frames
        .into_iter()
        .zip(theirs.frames)
        .map(|(a, b)| {
            if r.random::<f64>() < in_possession.possession_bias {
                a
            } else {
                b
            }
        })
        .collect();
    Ok(TeamCollection::new(team_id, frames))
}

/// Tracking rows for a two-team game. Each team's frames are drawn in its
/// own attacking-right orientation; `home` attacks right in odd periods and
/// the away team's frames are rotated by 180° in those periods (and the
/// reverse in even periods). Possession is shared so exactly one team has
/// the ball in each frame.
pub fn generate_match(
    game_id: &str,
    home: (&str, &StyleParams),
    away: (&str, &StyleParams),
    frame_count: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<Vec<TrackingRecord>> {
    let mut r = rng::stream(seed, tag::SYNTH);
    let h = generate_with(home.0, home.1, frame_count, cfg, &mut r)?;
    let a = generate_with(away.0, away.1, frame_count, cfg, &mut r)?;
    let mut out = Vec::with_capacity(2 * frame_count * cfg.n);
    for (idx, (hf, af)) in h.frames.iter().zip(&a.frames).enumerate() {
        let period = 1 + (idx * 2 / frame_count) as u32;
        let timestamp_ms = idx as i64 * FRAME_INTERVAL_MS;
        let holder = if hf.possession == Possession::Us {
            home.0
        } else {
            away.0
        };
        for (team, f, right) in [(home.0, hf, period % 2 == 1), (away.0, af, period % 2 == 0)] {
            for p in f.positions() {
                let [x, y] = if right { *p } else { [-p[0], -p[1]] };
                out.push(TrackingRecord {
                    game_id: game_id.to_string(),
                    frame_id: idx as u64,
                    timestamp_ms,
                    period,
                    team_id: team.to_string(),
                    x,
                    y,
                    possession_team_id: Some(holder.to_string()),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{embed_frame, embed_points, embedding_distance, make_grid};

    fn cfg() -> PipelineConfig {
        PipelineConfig::football()
    }

    #[test]
    fn same_seed_same_collection() {
        let p = StyleParams::default();
        let a = generate_team("A", &p, 300, 9, &cfg()).unwrap();
        let b = generate_team("A", &p, 300, 9, &cfg()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_team("A", &p, 300, 10, &cfg()).unwrap());
    }

    #[test]
    fn full_bias_is_all_us() {
        let p = StyleParams {
            possession_bias: 1.0,
            ..Default::default()
        };
        let c = generate_team("A", &p, 200, 1, &cfg()).unwrap();
        assert!(c.frames.iter().all(|f| f.possession == Possession::Us));
        let p = StyleParams {
            possession_bias: 0.0,
            ..Default::default()
        };
        let c = generate_team("A", &p, 200, 1, &cfg()).unwrap();
        assert!(c.frames.iter().all(|f| f.possession == Possession::Them));
    }

    #[test]
    fn tight_frames_stay_near_formation() {
        let p = StyleParams {
            compactness: 0.001,
            mean_block: [-4.0, 3.0],
            ..Default::default()
        };
        let c = generate_team("A", &p, 500, 3, &cfg()).unwrap();
        let g = make_grid(12).unwrap();
        let mean = embed_points(&formation(p.mean_block, 3, 11, Pitch::FOOTBALL), &g);
        for f in &c.frames {
            assert!(embedding_distance(&embed_frame(f, &g), &mean, 2).unwrap() < 0.1);
        }
    }

    #[test]
    fn frames_are_valid_and_on_pitch() {
        let p = StyleParams {
            mean_block: [50.0, 30.0],
            compactness: 6.0,
            line_count: 4,
            ..Default::default()
        };
        for cfg in [PipelineConfig::football(), PipelineConfig::basketball()] {
            let c = generate_team("A", &p, 400, 2, &cfg).unwrap();
            for f in &c.frames {
                assert_eq!(f.n(), cfg.n);
                assert!(f.positions().iter().all(|q| cfg.pitch().contains(*q)));
            }
        }
    }

    #[test]
    fn formation_line_structure() {
        let pts = formation([0.0, 0.0], 4, 11, Pitch::FOOTBALL);
        assert_eq!(pts.len(), 11);
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        xs.dedup();
        assert_eq!(xs.len(), 4);
        let mean: f64 = pts.iter().map(|p| p[1]).sum::<f64>() / 11.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn invalid_params() {
        let bad = [
            StyleParams {
                compactness: 0.0,
                ..Default::default()
            },
            StyleParams {
                line_count: 5,
                ..Default::default()
            },
            StyleParams {
                possession_bias: 1.5,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(matches!(
                generate_team("A", &p, 10, 0, &cfg()),
                Err(Error::InvalidConfig(_))
            ));
        }
        assert!(generate_team("A", &StyleParams::default(), 0, 0, &cfg()).is_err());
    }

    #[test]
    fn game_layout() {
        let c = generate_team("A", &StyleParams::default(), 2500, 0, &cfg()).unwrap();
        assert_eq!(c.games, vec!["A-g0", "A-g1", "A-g2"]);
        let f = &c.frames[1499];
        assert_eq!(
            (f.game_id.as_str(), f.period, f.timestamp_ms),
            ("A-g1", 1, 499 * 40)
        );
        let f = &c.frames[1500];
        assert_eq!(
            (f.game_id.as_str(), f.period, f.timestamp_ms),
            ("A-g1", 2, 500 * 40)
        );
    }

    #[test]
    fn league_streams() {
        let p = vec![StyleParams::default(); 3];
        let a = generate_league(&p, 50, 4, &cfg()).unwrap();
        assert_eq!(a, generate_league(&p, 50, 4, &cfg()).unwrap());
        assert_eq!(
            a.keys().cloned().collect::<Vec<_>>(),
            vec!["team01", "team02", "team03"]
        );
        assert_ne!(
            a["team01"].frames[0].positions(),
            a["team02"].frames[0].positions()
        );
        assert!(generate_league(&p[..1], 50, 4, &cfg()).is_err());
    }

    #[test]
    fn match_orientation_round_trip() {
        use crate::config::Sport;
        use crate::ingest::{assemble_frames, infer_orientation, normalize_attack_direction};
        let home = StyleParams {
            mean_block: [-8.0, 0.0],
            ..Default::default()
        };
        let away = StyleParams {
            mean_block: [-3.0, 2.0],
            ..Default::default()
        };
        let recs = generate_match("m", ("H", &home), ("V", &away), 400, 5, &cfg()).unwrap();
        let t = infer_orientation(&recs, Sport::Football, 11).unwrap();
        assert_eq!(t.attacking_right[&("m".to_string(), 1)], "H");
        assert_eq!(t.attacking_right[&("m".to_string(), 2)], "V");
        let (teams, _) = assemble_frames(&recs, 11);
        let v = normalize_attack_direction(&teams["V"], &t).unwrap();
        let mean_x: f64 =
            v.frames.iter().map(|f| f.mean_position()[0]).sum::<f64>() / v.len() as f64;
        let shape = formation(away.mean_block, 3, 11, Pitch::FOOTBALL);
        let want = shape.iter().map(|p| p[0]).sum::<f64>() / 11.0;
        assert!((mean_x - want).abs() < 0.5, "{mean_x} vs {want}");
    }
}
