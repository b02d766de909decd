//! Team-style similarity between quantized frame collections.
//!
//! similarity(c₁, c₂) = √2 · W₂(q₁, q₂), where q is a team's k-means
//! quantizer in embedding space and the ground metric is the embedding
//! distance. The √2 factor lives here only; the transport solvers return
//! plain Wasserstein distances.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::embed::{make_grid, sq_embedding_distance};
use crate::error::{Error, Result};
use crate::ingest::{split_by_possession, TeamCollection};
use crate::ot::{pairwise_matrix, solve_transport};
use crate::quant::{quantize_collection, QuantOptions, QuantizedCollection};

/// √2 · W₂ between two quantizers (centroids with weights).
pub fn quantizer_similarity(a: &QuantizedCollection, b: &QuantizedCollection) -> Result<f64> {
    let dim = |q: &QuantizedCollection| q.centroids.first().map_or(0, Vec::len);
    if dim(a) != dim(b) {
        return Err(Error::DimensionMismatch {
            expected: dim(a),
            found: dim(b),
        });
    }
    let cost: Vec<f64> = a
        .centroids
        .iter()
        .flat_map(|x| b.centroids.iter().map(move |y| sq_embedding_distance(x, y)))
        .collect();
    let sol = solve_transport(&a.weights, &b.weights, &cost)?;
    Ok(std::f64::consts::SQRT_2 * sol.plan.cost.max(0.0).sqrt())
}

pub fn quantize_team(
    c: &TeamCollection,
    cfg: &PipelineConfig,
    centered: bool,
) -> Result<QuantizedCollection> {
    let grid = make_grid(cfg.projections)?;
    quantize_collection(c, &grid, &QuantOptions::from_config(cfg), centered)
}

pub fn team_similarity(
    c1: &TeamCollection,
    c2: &TeamCollection,
    cfg: &PipelineConfig,
    centered: bool,
) -> Result<f64> {
    let (q1, q2) = rayon::join(
        || quantize_team(c1, cfg, centered),
        || quantize_team(c2, cfg, centered),
    );
    quantizer_similarity(&q1?, &q2?)
}

/// Symmetric team × team matrix in meters, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub team_ids: Vec<String>,
    pub values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.team_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.team_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn index_of(&self, team: &str) -> Option<usize> {
        self.team_ids.iter().position(|t| t == team)
    }

    /// Rows and columns reordered by ascending `key` (ties by team id).
    /// Teams missing from `key` go last.
    pub fn sorted_by(&self, key: &BTreeMap<String, f64>) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            let ka = key.get(&self.team_ids[a]).copied().unwrap_or(f64::INFINITY);
            let kb = key.get(&self.team_ids[b]).copied().unwrap_or(f64::INFINITY);
            ka.total_cmp(&kb)
                .then_with(|| self.team_ids[a].cmp(&self.team_ids[b]))
        });
        let n = self.len();
        let mut values = Vec::with_capacity(n * n);
        for &i in &order {
            for &j in &order {
                values.push(self.get(i, j));
            }
        }
        Self {
            team_ids: order.iter().map(|&i| self.team_ids[i].clone()).collect(),
            values,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::from("team_id")];
        header.extend(self.team_ids.iter().cloned());
        w.write_record(&header)?;
        for (i, team) in self.team_ids.iter().enumerate() {
            let mut row = vec![team.clone()];
            row.extend((0..self.len()).map(|j| format!("{:?}", self.get(i, j))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Heatmap with a blue-white-red scale centred on half the largest
    /// value, each cell annotated with its value. `comment` is embedded
    /// verbatim as an XML comment when given.
    pub fn to_svg(&self, comment: Option<&str>) -> String {
        const CELL: usize = 48;
        const MARGIN: usize = 110;
        let n = self.len();
        let size = MARGIN + n * CELL + 10;
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="11">"#
        );
        if let Some(c) = comment {
            let _ = writeln!(s, "<!-- {} -->", c.replace("--", "- -"));
        }
        for (i, team) in self.team_ids.iter().enumerate() {
            let off = MARGIN + i * CELL + CELL / 2;
            let name = xml_escape(team);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{off}" text-anchor="end" dominant-baseline="middle">{name}</text>"#,
                MARGIN - 6
            );
            let _ = writeln!(
                s,
                r#"<text x="{off}" y="{}" text-anchor="start" transform="rotate(-60 {off} {})">{name}</text>"#,
                MARGIN - 6,
                MARGIN - 6
            );
        }
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                let t = if max > 0.0 { v / max } else { 0.0 };
                let (x, y) = (MARGIN + j * CELL, MARGIN + i * CELL);
                let _ = writeln!(
                    s,
                    r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                    diverging_color(t)
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle">{v:.2}</text>"#,
                    x + CELL / 2,
                    y + CELL / 2
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// t in [0, 1]: blue at 0, white at 0.5, red at 1.
fn diverging_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (blue, red) = ([33.0, 102.0, 172.0], [178.0, 24.0, 43.0]);
    let (from, to, u) = if t < 0.5 {
        (blue, [247.0; 3], t * 2.0)
    } else {
        ([247.0; 3], red, (t - 0.5) * 2.0)
    };
    let c: Vec<u8> = (0..3)
        .map(|k| (from[k] + (to[k] - from[k]) * u).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Quantizes every team once, then fills all pairs.
pub fn similarity_matrix(
    league: &BTreeMap<String, TeamCollection>,
    cfg: &PipelineConfig,
    centered: bool,
) -> Result<SimilarityMatrix> {
    if league.len() < 2 {
        return Err(Error::InsufficientData(
            "a similarity matrix needs at least 2 teams".into(),
        ));
    }
    let teams: Vec<&TeamCollection> = league.values().collect();
    let quantizers = teams
        .par_iter()
        .map(|c| quantize_team(c, cfg, centered))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityMatrix {
        team_ids: league.keys().cloned().collect(),
        values: pairwise_matrix(&quantizers, quantizer_similarity)?,
    })
}

/// Row sums, largest first (ties by team id).
pub fn sum_of_distances(m: &SimilarityMatrix) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = m
        .team_ids
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), (0..m.len()).map(|j| m.get(i, j)).sum()))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Similarity between a team's in-possession and out-of-possession frames.
pub fn possession_phase_distance(
    team: &TeamCollection,
    cfg: &PipelineConfig,
    centered: bool,
) -> Result<f64> {
    let (us, them) = split_by_possession(team);
    for (phase, c) in [("in_possession", &us), ("out_of_possession", &them)] {
        if c.len() < cfg.k_quant {
            return Err(Error::InsufficientPhaseFrames {
                phase,
                found: c.len(),
                needed: cfg.k_quant,
            });
        }
    }
    team_similarity(&us, &them, cfg, centered)
}

/// Similarity for each K in `ks`, all other settings (including the seed)
/// shared.
pub fn k_convergence_probe(
    c1: &TeamCollection,
    c2: &TeamCollection,
    cfg: &PipelineConfig,
    ks: &[usize],
    centered: bool,
) -> Result<Vec<(usize, f64)>> {
    ks.iter()
        .map(|&k| {
            let cfg = PipelineConfig {
                k_quant: k,
                ..cfg.clone()
            };
            Ok((k, team_similarity(c1, c2, &cfg, centered)?))
        })
        .collect()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation between upper-triangle similarities and absolute
/// possession gaps.
pub fn possession_correlation(
    m: &SimilarityMatrix,
    possession: &BTreeMap<String, f64>,
) -> Result<f64> {
    let share = m
        .team_ids
        .iter()
        .map(|t| {
            possession
                .get(t)
                .copied()
                .ok_or_else(|| Error::InsufficientData(format!("no possession value for {t}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mut sims, mut gaps) = (Vec::new(), Vec::new());
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            sims.push(m.get(i, j));
            gaps.push((share[i] - share[j]).abs());
        }
    }
    pearson(&sims, &gaps)
}

/// Frame-share possession percentage per team.
pub fn frame_share_possession(league: &BTreeMap<String, TeamCollection>) -> BTreeMap<String, f64> {
    league
        .iter()
        .filter_map(|(t, c)| c.possession_share().map(|s| (t.clone(), s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_team, StyleParams};

    fn small_cfg() -> PipelineConfig {
        PipelineConfig {
            k_quant: 20,
            quant_restarts: 2,
            ..PipelineConfig::football()
        }
    }

    fn matrix(ids: &[&str], v: Vec<f64>) -> SimilarityMatrix {
        SimilarityMatrix {
            team_ids: ids.iter().map(|s| s.to_string()).collect(),
            values: v,
        }
    }

    #[test]
    fn identical_collections() {
        let c = generate_team("A", &StyleParams::default(), 300, 1, &small_cfg()).unwrap();
        assert!(team_similarity(&c, &c, &small_cfg(), false).unwrap() < 1e-6);
    }

    #[test]
    fn symmetric_exactly() {
        let cfg = small_cfg();
        let a = generate_team("A", &StyleParams::default(), 300, 1, &cfg).unwrap();
        let b = generate_team(
            "B",
            &StyleParams {
                line_count: 4,
                ..Default::default()
            },
            300,
            2,
            &cfg,
        )
        .unwrap();
        assert_eq!(
            team_similarity(&a, &b, &cfg, false).unwrap(),
            team_similarity(&b, &a, &cfg, false).unwrap()
        );
    }

    #[test]
    fn k_too_large() {
        let cfg = small_cfg();
        let c = generate_team("A", &StyleParams::default(), 10, 1, &cfg).unwrap();
        assert!(matches!(
            team_similarity(&c, &c, &cfg, false),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn single_centroid_is_barycenter_distance() {
        let cfg = PipelineConfig {
            k_quant: 1,
            ..small_cfg()
        };
        let a = generate_team("A", &StyleParams::default(), 200, 1, &cfg).unwrap();
        let b = generate_team(
            "B",
            &StyleParams {
                mean_block: [5.0, -2.0],
                ..Default::default()
            },
            200,
            2,
            &cfg,
        )
        .unwrap();
        let grid = make_grid(12).unwrap();
        let bary = |c: &TeamCollection| {
            let e = crate::embed::embed_frames(&c.frames, &grid, false);
            let mut m = vec![0.0; 132];
            for v in &e {
                for (s, x) in m.iter_mut().zip(v.values()) {
                    *s += x / e.len() as f64;
                }
            }
            m
        };
        let want = std::f64::consts::SQRT_2 * sq_embedding_distance(&bary(&a), &bary(&b)).sqrt();
        assert!((team_similarity(&a, &b, &cfg, false).unwrap() - want).abs() < 1e-6);
    }

    #[test]
    fn sums_ranked() {
        let m = matrix(
            &["a", "b", "c"],
            vec![0.0, 1.0, 5.0, 1.0, 0.0, 2.0, 5.0, 2.0, 0.0],
        );
        let s = sum_of_distances(&m);
        assert_eq!(
            s,
            vec![("c".into(), 7.0), ("a".into(), 6.0), ("b".into(), 3.0)]
        );
        let z = matrix(&["a", "b"], vec![0.0; 4]);
        assert!(sum_of_distances(&z).iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn correlation_cases() {
        let m = matrix(
            &["a", "b", "c"],
            vec![0.0, 2.0, 6.0, 2.0, 0.0, 4.0, 6.0, 4.0, 0.0],
        );
        let poss: BTreeMap<String, f64> = [("a", 40.0), ("b", 41.0), ("c", 43.0)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        assert!((possession_correlation(&m, &poss).unwrap() - 1.0).abs() < 1e-12);
        let flat = matrix(
            &["a", "b", "c"],
            vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0],
        );
        assert!(matches!(
            possession_correlation(&flat, &poss),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn sorting_permutes_rows_and_columns() {
        let m = matrix(
            &["a", "b", "c"],
            vec![0.0, 1.0, 5.0, 1.0, 0.0, 2.0, 5.0, 2.0, 0.0],
        );
        let key: BTreeMap<String, f64> = [("a", 3.0), ("b", 1.0), ("c", 2.0)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let s = m.sorted_by(&key);
        assert_eq!(s.team_ids, vec!["b", "c", "a"]);
        assert_eq!(s.get(0, 1), 2.0);
        assert_eq!(s.get(2, 1), 5.0);
    }

    #[test]
    fn csv_and_svg_output() {
        let m = matrix(&["a", "b"], vec![0.0, 1.5, 1.5, 0.0]);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "team_id,a,b\na,0.0,1.5\nb,1.5,0.0\n"
        );
        let svg = m.to_svg(None);
        assert!(svg.starts_with("<svg") && svg.contains(">1.50<") && !svg.contains("<!--"));
        assert!(m.to_svg(Some("generated")).contains("<!-- generated -->"));
        assert_eq!(diverging_color(0.5), "#f7f7f7");
    }

    #[test]
    fn phase_distance_needs_frames() {
        let cfg = small_cfg();
        let c = generate_team(
            "A",
            &StyleParams {
                possession_bias: 1.0,
                ..Default::default()
            },
            100,
            1,
            &cfg,
        )
        .unwrap();
        assert!(matches!(
            possession_phase_distance(&c, &cfg, false),
            Err(Error::InsufficientPhaseFrames {
                phase: "out_of_possession",
                found: 0,
                ..
            })
        ));
    }

    #[test]
    fn phase_shift_reads_as_translation() {
        let cfg = small_cfg();
        let c = generate_team(
            "A",
            &StyleParams {
                phase_shift: [15.0, 0.0],
                ..Default::default()
            },
            4000,
            2,
            &cfg,
        )
        .unwrap();
        // √2·|t|·sqrt(Σcos²θ_l / L) with Σcos²θ_l = (L+1)/2 for this grid.
        let want = 15.0 * (13.0f64 / 12.0).sqrt();
        let got = possession_phase_distance(&c, &cfg, false).unwrap();
        assert!((got - want).abs() <= 0.05 * want, "{got} vs {want}");
    }
}
