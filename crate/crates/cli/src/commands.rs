use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use frameot::embed::{embed_frames, make_grid, write_embedding_csv};
use frameot::ingest::{
    assemble_frames, frame_records, infer_orientations, normalize_attack_direction,
    parse_tracking_csv, parse_tracking_csv_lenient, subsample, write_tracking_csv, ExclusionReport,
    OrientationTable, TeamCollection,
};
use frameot::models::identity::{write_curve_csv, IdentityTable};
use frameot::models::possession::{labeled_frames, possession_benchmark};
use frameot::models::LogisticOptions;
use frameot::quant::{cluster_report, quantize_points, QuantOptions};
use frameot::style::{
    frame_share_possession, possession_correlation, possession_phase_distance, similarity_matrix,
    sum_of_distances,
};
use frameot::synth::{generate_named_league, team_name};
use frameot::{Error, PipelineConfig};
use serde_json::json;

use crate::config::ConfigFile;
use crate::manifest::Recorder;
use crate::{CliError, Common, Input};

struct Loaded {
    league: BTreeMap<String, TeamCollection>,
    report: ExclusionReport,
    orientation: Option<OrientationTable>,
}

fn load(input: &Input, cfg: &mut PipelineConfig, rec: &mut Recorder) -> Result<Loaded, CliError> {
    if let Some(s) = input.stride {
        cfg.subsample_stride = s;
    }
    cfg.validate()?;
    let path = &input.tracking_csv;
    rec.input(path)?;
    let (records, malformed) = rec.stage("parse", || {
        if input.strict {
            parse_tracking_csv(path).map(|r| (r, 0))
        } else {
            parse_tracking_csv_lenient(path).map(|(r, m)| (r, m.len()))
        }
    })?;
    let (mut league, mut report) = rec.stage("assemble", || assemble_frames(&records, cfg.n));
    report.malformed_rows = malformed;
    let orientation = if input.orient {
        let table = rec.stage("orient", || infer_orientations(&records, cfg.sport, cfg.n))?;
        for c in league.values_mut() {
            *c = normalize_attack_direction(c, &table)?;
        }
        Some(table)
    } else {
        None
    };
    let stride = cfg.subsample_stride;
    for c in league.values_mut() {
        *c = subsample(c, stride);
    }
    Ok(Loaded {
        league,
        report,
        orientation,
    })
}

fn team<'a>(
    league: &'a BTreeMap<String, TeamCollection>,
    id: &str,
) -> Result<&'a TeamCollection, CliError> {
    league.get(id).ok_or_else(|| {
        let known: Vec<&str> = league.keys().map(String::as_str).collect();
        CliError::usage(format!(
            "team `{id}` not in input (teams: {})",
            known.join(", ")
        ))
    })
}

fn input_options(input: &Input) -> serde_json::Value {
    json!({ "strict": input.strict, "orient": input.orient })
}

pub fn synth(c: &Common, file: &ConfigFile, cfg: PipelineConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let section = file
        .synth
        .as_ref()
        .ok_or_else(|| CliError::usage("config has no `synth` section"))?;
    if section.teams.is_empty() {
        return Err(CliError::usage("`synth.teams` is empty"));
    }
    let mut rec = Recorder::new("synth", &c.out, c.deterministic)?;
    if let Some(p) = &c.config {
        rec.input(p)?;
    }
    let teams: Vec<_> = section
        .teams
        .iter()
        .enumerate()
        .map(|(i, t)| {
            (
                t.team_id.clone().unwrap_or_else(|| team_name(i)),
                t.style.clone(),
            )
        })
        .collect();
    let league = rec.stage("generate", || {
        generate_named_league(&teams, section.frames_per_team, cfg.rng_seed, &cfg)
    })?;
    if league.len() != teams.len() {
        return Err(CliError::usage("synth team ids must be distinct"));
    }
    let records: Vec<_> = league
        .values()
        .flat_map(|t| t.frames.iter().flat_map(frame_records))
        .collect();
    rec.output("tracking.csv", |w| write_tracking_csv(w, &records))?;
    rec.finish(&cfg, serde_json::to_value(section).expect("serializable"))
}

pub fn ingest(c: &Common, input: &Input, mut cfg: PipelineConfig) -> Result<(), CliError> {
    let mut rec = Recorder::new("ingest", &c.out, c.deterministic)?;
    let loaded = load(input, &mut cfg, &mut rec)?;
    rec.json("exclusion_report.json", &loaded.report)?;
    let teams: Vec<_> = loaded
        .league
        .values()
        .map(|t| {
            json!({
                "team_id": t.team_id,
                "frames": t.len(),
                "games": t.games,
                "possession_share": t.possession_share(),
            })
        })
        .collect();
    rec.json("teams.json", &teams)?;
    if let Some(table) = &loaded.orientation {
        let periods: Vec<_> = table
            .attacking_right
            .iter()
            .map(|((g, p), t)| json!({ "game_id": g, "period": p, "attacking_right": t }))
            .collect();
        let reference: Vec<_> = table
            .reference_frames
            .iter()
            .map(|(g, f)| json!({ "game_id": g, "frame_id": f }))
            .collect();
        rec.json(
            "orientation.json",
            &json!({ "periods": periods, "reference_frames": reference }),
        )?;
    }
    rec.finish(&cfg, input_options(input))
}

pub fn embed(
    c: &Common,
    input: &Input,
    mut cfg: PipelineConfig,
    team_id: &str,
    centered: bool,
) -> Result<(), CliError> {
    let mut rec = Recorder::new("embed", &c.out, c.deterministic)?;
    let loaded = load(input, &mut cfg, &mut rec)?;
    let t = team(&loaded.league, team_id)?;
    let grid = make_grid(cfg.projections)?;
    let e = rec.stage("embed", || embed_frames(&t.frames, &grid, centered));
    rec.output("embeddings.csv", |w| write_embedding_csv(w, &e))?;
    let mut opts = input_options(input);
    opts["team"] = json!(team_id);
    opts["centered"] = json!(centered);
    rec.finish(&cfg, opts)
}

pub fn cluster(
    c: &Common,
    input: &Input,
    mut cfg: PipelineConfig,
    team_id: &str,
    k: Option<usize>,
    centered: bool,
) -> Result<(), CliError> {
    if let Some(k) = k {
        cfg.k_quant = k;
    }
    let mut rec = Recorder::new("cluster", &c.out, c.deterministic)?;
    let loaded = load(input, &mut cfg, &mut rec)?;
    let t = team(&loaded.league, team_id)?;
    let grid = make_grid(cfg.projections)?;
    let points = rec.stage("embed", || embed_frames(&t.frames, &grid, centered));
    let q = rec.stage("quantize", || {
        quantize_points(&points, &QuantOptions::from_config(&cfg))
    })?;
    let clusters = cluster_report(&q, &t.frames, &points, cfg.rng_seed);
    let frame_ref = |i: usize| {
        let f = &t.frames[i];
        json!({ "index": i, "game_id": f.game_id, "frame_id": f.frame_id })
    };
    let summary: Vec<_> = clusters
        .iter()
        .map(|s| {
            json!({
                "cluster": s.cluster,
                "frames": s.frames,
                "percentage": s.percentage,
                "average_possession": s.average_possession,
                "nearest_frame": frame_ref(s.nearest_frame),
                "random_frame": frame_ref(s.random_frame),
            })
        })
        .collect();
    rec.json(
        "clusters.json",
        &json!({
            "team_id": team_id,
            "k": q.k(),
            "quantization_error": q.quantization_error,
            "iterations": q.iterations,
            "clusters": summary,
        }),
    )?;
    rec.output("assignments.csv", |w| q.write_assignments_csv(w))?;
    let mut opts = input_options(input);
    opts["team"] = json!(team_id);
    opts["centered"] = json!(centered);
    rec.finish(&cfg, opts)
}

pub struct SimilarityOptions {
    pub k: Option<usize>,
    pub centered: bool,
    pub sort_by: Option<PathBuf>,
    pub sort_by_frame_share: bool,
    pub phases: bool,
}

fn read_scalars(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let bad = |e: String| CliError::usage(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut out = BTreeMap::new();
    for row in r.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let (Some(team), Some(v)) = (row.get(0), row.get(1)) else {
            return Err(bad("expected rows `team_id,value`".into()));
        };
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad value {v:?}")))?;
        out.insert(team.trim().to_string(), v);
    }
    Ok(out)
}

pub fn similarity(
    c: &Common,
    input: &Input,
    mut cfg: PipelineConfig,
    o: SimilarityOptions,
) -> Result<(), CliError> {
    if let Some(k) = o.k {
        cfg.k_quant = k;
    }
    let mut rec = Recorder::new("similarity", &c.out, c.deterministic)?;
    let key = match &o.sort_by {
        Some(p) => {
            rec.input(p)?;
            Some(read_scalars(p)?)
        }
        None => None,
    };
    let loaded = load(input, &mut cfg, &mut rec)?;
    let key = key.or_else(|| {
        o.sort_by_frame_share
            .then(|| frame_share_possession(&loaded.league))
    });
    let mut m = rec.stage("similarity", || {
        similarity_matrix(&loaded.league, &cfg, o.centered)
    })?;
    let mut correlation = None;
    if let Some(key) = &key {
        m = m.sorted_by(key);
        correlation = match possession_correlation(&m, key) {
            Ok(r) => Some(r),
            Err(Error::ZeroVariance | Error::InsufficientData(_)) => None,
            Err(e) => return Err(e.into()),
        };
    }
    rec.output("similarity.csv", |w| m.write_csv(w))?;
    let stamp = (!rec.deterministic()).then(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        format!("generated at unix time {secs}")
    });
    rec.text("similarity.svg", &m.to_svg(stamp.as_deref()))?;
    let sums = sum_of_distances(&m);
    rec.output("sum_of_distances.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["team_id", "total"])?;
        for (t, v) in &sums {
            w.write_record([t.clone(), format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    if o.phases {
        let phases = rec.stage("phases", || {
            loaded
                .league
                .values()
                .map(|t| {
                    Ok((
                        t.team_id.clone(),
                        possession_phase_distance(t, &cfg, o.centered)?,
                    ))
                })
                .collect::<frameot::Result<Vec<_>>>()
        })?;
        rec.output("phase_distances.csv", |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["team_id", "distance"])?;
            for (t, v) in &phases {
                w.write_record([t.clone(), format!("{v:?}")])?;
            }
            w.flush()?;
            Ok(())
        })?;
    }
    if let Some(r) = correlation {
        rec.json("possession_correlation.json", &json!({ "pearson": r }))?;
    }
    let mut opts = input_options(input);
    opts["centered"] = json!(o.centered);
    opts["sort"] = json!(match (&o.sort_by, o.sort_by_frame_share) {
        (Some(_), _) => "file",
        (None, true) => "frame_share",
        _ => "team_id",
    });
    rec.finish(&cfg, opts)
}

pub fn identity(
    c: &Common,
    input: &Input,
    mut cfg: PipelineConfig,
    folds: usize,
    gmm_k: Option<usize>,
    sizes: &[usize],
    repeats: usize,
) -> Result<(), CliError> {
    if let Some(k) = gmm_k {
        cfg.k_gmm = k;
    }
    if folds < 2 {
        return Err(CliError::usage("--folds must be at least 2"));
    }
    let mut rec = Recorder::new("identity", &c.out, c.deterministic)?;
    let loaded = load(input, &mut cfg, &mut rec)?;
    let table = rec.stage("fit", || IdentityTable::build(&loaded.league, &cfg, folds))?;
    let report = table.report();
    let curve = rec.stage("sample_sizes", || {
        table.sample_size_curve(sizes, repeats, cfg.rng_seed)
    })?;
    rec.json(
        "identity.json",
        &json!({
            "teams": report.teams,
            "folds": report.folds,
            "top1": report.top1,
            "top2": report.top2,
        }),
    )?;
    rec.output("confusion.csv", |w| report.write_confusion_csv(w))?;
    rec.output("size_curve.csv", |w| write_curve_csv(w, &curve))?;
    let mut opts = input_options(input);
    opts["folds"] = json!(folds);
    opts["sizes"] = json!(sizes);
    opts["repeats"] = json!(repeats);
    rec.finish(&cfg, opts)
}

pub fn possession(
    c: &Common,
    input: &Input,
    mut cfg: PipelineConfig,
    folds: usize,
    l2: f64,
) -> Result<(), CliError> {
    if input.stride.is_none() {
        cfg.subsample_stride = 10;
    }
    if folds < 2 {
        return Err(CliError::usage("--folds must be at least 2"));
    }
    let mut rec = Recorder::new("possession", &c.out, c.deterministic)?;
    let loaded = load(input, &mut cfg, &mut rec)?;
    let frames: Vec<_> = loaded
        .league
        .values()
        .flat_map(|t| t.frames.iter().cloned())
        .collect();
    let (kept, _) = labeled_frames(&frames);
    let labeled = kept.len();
    let grid = make_grid(cfg.projections)?;
    let opts = LogisticOptions {
        l2_penalty: l2,
        ..LogisticOptions::default()
    };
    let table = rec.stage("benchmark", || {
        possession_benchmark(&frames, &grid, cfg.pitch(), folds, cfg.rng_seed, &opts)
    })?;
    rec.output("possession.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["representation", "accuracy"])?;
        for r in &table {
            w.write_record([r.representation.clone(), format!("{:?}", r.accuracy)])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let mut o = input_options(input);
    o["folds"] = json!(folds);
    o["l2"] = json!(l2);
    o["frames"] = json!(frames.len());
    o["labeled_frames"] = json!(labeled);
    o["unassigned_excluded"] = json!(frames.len() - labeled);
    rec.finish(&cfg, o)
}
