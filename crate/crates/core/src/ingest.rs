//! Tracking CSV ingestion and frame-collection preprocessing.
//!
//! The input format is one row per player per frame:
//!
//! ```text
//! game_id,frame_id,timestamp_ms,period,team_id,x,y,possession_team_id
//! ```
//!
//! Coordinates are meters with the origin at the pitch centre. An empty
//! `possession_team_id` means possession is unassigned.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Sport;
use crate::error::{Error, Result};
use crate::frame::{Frame, Point, Possession};

pub const TRACKING_HEADER: [&str; 8] = [
    "game_id",
    "frame_id",
    "timestamp_ms",
    "period",
    "team_id",
    "x",
    "y",
    "possession_team_id",
];

/// One player's position at one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRecord {
    pub game_id: String,
    pub frame_id: u64,
    pub timestamp_ms: i64,
    pub period: u32,
    pub team_id: String,
    pub x: f64,
    pub y: f64,
    pub possession_team_id: Option<String>,
}

/// A team's frames, sorted by (game, timestamp).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamCollection {
    pub team_id: String,
    pub frames: Vec<Frame>,
    pub games: Vec<String>,
}

impl TeamCollection {
    /// Sorts the frames and derives the game list.
    pub fn new(team_id: impl Into<String>, mut frames: Vec<Frame>) -> Self {
        frames.sort_by(|a, b| {
            (a.game_id.as_str(), a.timestamp_ms, a.frame_id).cmp(&(
                b.game_id.as_str(),
                b.timestamp_ms,
                b.frame_id,
            ))
        });
        let games: Vec<String> = frames
            .iter()
            .map(|f| f.game_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self {
            team_id: team_id.into(),
            frames,
            games,
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn map_frames(&self, f: impl Fn(&Frame) -> Frame) -> Self {
        Self {
            team_id: self.team_id.clone(),
            frames: self.frames.iter().map(f).collect(),
            games: self.games.clone(),
        }
    }

    /// Share of in-possession frames among frames with a possession label,
    /// in percent.
    pub fn possession_share(&self) -> Option<f64> {
        let (us, them) = self
            .frames
            .iter()
            .fold((0, 0), |(u, t), f| match f.possession {
                Possession::Us => (u + 1, t),
                Possession::Them => (u, t + 1),
                Possession::Unassigned => (u, t),
            });
        (us + them > 0).then(|| 100.0 * us as f64 / (us + them) as f64)
    }
}

/// A data row that could not be parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct MalformedRow {
    pub line: u64,
    pub reason: String,
}

fn column_indices(headers: &csv::StringRecord) -> Result<[usize; 8]> {
    let mut idx = [0; 8];
    for (slot, name) in idx.iter_mut().zip(TRACKING_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    Ok(idx)
}

fn parse_row(
    row: &csv::StringRecord,
    idx: &[usize; 8],
) -> std::result::Result<TrackingRecord, String> {
    let field = |k: usize| -> std::result::Result<&str, String> {
        row.get(idx[k])
            .map(str::trim)
            .ok_or_else(|| format!("missing field `{}`", TRACKING_HEADER[k]))
    };
    fn num<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
        s.parse()
            .map_err(|_| format!("`{name}` is not a number: {s:?}"))
    }
    let coord = |k: usize| -> std::result::Result<f64, String> {
        let v: f64 = num(field(k)?, TRACKING_HEADER[k])?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{}` is not finite", TRACKING_HEADER[k]))
        }
    };
    let game_id = field(0)?.to_string();
    let team_id = field(4)?.to_string();
    if game_id.is_empty() || team_id.is_empty() {
        return Err("empty game_id or team_id".into());
    }
    let possession = field(7)?;
    Ok(TrackingRecord {
        game_id,
        frame_id: num(field(1)?, "frame_id")?,
        timestamp_ms: num(field(2)?, "timestamp_ms")?,
        period: num(field(3)?, "period")?,
        team_id,
        x: coord(5)?,
        y: coord(6)?,
        possession_team_id: (!possession.is_empty()).then(|| possession.to_string()),
    })
}

/// Reads every row, returning parsed records and the rows that failed.
/// Structural problems (missing column, no data) are still errors.
pub fn read_tracking_lenient<R: Read>(
    reader: R,
) -> Result<(Vec<TrackingRecord>, Vec<MalformedRow>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let idx = column_indices(rdr.headers()?)?;
    let mut records = Vec::new();
    let mut malformed = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, &idx) {
            Ok(r) => records.push(r),
            Err(reason) => malformed.push(MalformedRow { line, reason }),
        }
    }
    Ok((records, malformed))
}

/// Strict reader: the first malformed row is an error carrying its line
/// number (the header is line 1).
pub fn read_tracking<R: Read>(reader: R) -> Result<Vec<TrackingRecord>> {
    let (records, malformed) = read_tracking_lenient(reader)?;
    if let Some(m) = malformed.into_iter().next() {
        return Err(Error::MalformedRow {
            line: m.line,
            reason: m.reason,
        });
    }
    Ok(records)
}

fn check_nonempty<T>(path: &Path, rows: usize, value: T) -> Result<T> {
    if rows == 0 {
        Err(Error::EmptyFile(path.to_path_buf()))
    } else {
        Ok(value)
    }
}

pub fn parse_tracking_csv(path: impl AsRef<Path>) -> Result<Vec<TrackingRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::EmptyFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let records = read_tracking(file).map_err(|e| empty_as(e, path))?;
    let rows = records.len();
    check_nonempty(path, rows, records)
}

pub fn parse_tracking_csv_lenient(
    path: impl AsRef<Path>,
) -> Result<(Vec<TrackingRecord>, Vec<MalformedRow>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let (records, malformed) = read_tracking_lenient(file).map_err(|e| empty_as(e, path))?;
    let rows = records.len() + malformed.len();
    check_nonempty(path, rows, (records, malformed))
}

// A zero-byte file has no header either; report it as empty, not as a
// missing column.
fn empty_as(e: Error, path: &Path) -> Error {
    match (&e, std::fs::metadata(path)) {
        (Error::MissingColumn(_), Ok(m)) if m.len() == 0 => Error::EmptyFile(path.to_path_buf()),
        _ => e,
    }
}

pub fn write_tracking_csv<W: Write>(out: W, records: &[TrackingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACKING_HEADER)?;
    for r in records {
        w.write_record([
            r.game_id.clone(),
            r.frame_id.to_string(),
            r.timestamp_ms.to_string(),
            r.period.to_string(),
            r.team_id.clone(),
            format!("{:?}", r.x),
            format!("{:?}", r.y),
            r.possession_team_id.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows emitted for one frame.
pub fn frame_records(f: &Frame) -> Vec<TrackingRecord> {
    let possession = match f.possession {
        Possession::Us => Some(f.team_id.clone()),
        Possession::Them => Some(format!("{}-opponent", f.team_id)),
        Possession::Unassigned => None,
    };
    f.positions()
        .iter()
        .map(|p| TrackingRecord {
            game_id: f.game_id.clone(),
            frame_id: f.frame_id,
            timestamp_ms: f.timestamp_ms,
            period: f.period,
            team_id: f.team_id.clone(),
            x: p[0],
            y: p[1],
            possession_team_id: possession.clone(),
        })
        .collect()
}

/// Counts from ingestion, serialized as the exclusion report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub wrong_player_count: usize,
    pub malformed_rows: usize,
    pub frames_kept: usize,
}

/// Groups records into frames keyed by (game, frame, team). Groups that do
/// not hold exactly `n` players are dropped and counted.
pub fn assemble_frames(
    records: &[TrackingRecord],
    n: usize,
) -> (BTreeMap<String, TeamCollection>, ExclusionReport) {
    let mut groups: BTreeMap<(&str, u64, &str), Vec<&TrackingRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.game_id.as_str(), r.frame_id, r.team_id.as_str()))
            .or_default()
            .push(r);
    }
    let mut report = ExclusionReport::default();
    let mut by_team: BTreeMap<String, Vec<Frame>> = BTreeMap::new();
    for ((game, frame_id, team), rows) in groups {
        if rows.len() != n {
            report.wrong_player_count += 1;
            continue;
        }
        let first = rows[0];
        let possession = match rows.iter().find_map(|r| r.possession_team_id.as_deref()) {
            None => Possession::Unassigned,
            Some(p) if p == team => Possession::Us,
            Some(_) => Possession::Them,
        };
        let positions: Vec<Point> = rows.iter().map(|r| [r.x, r.y]).collect();
        let frame = Frame::new(positions, team, first.timestamp_ms, possession, n)
            .expect("group size and finiteness checked")
            .with_game(game, first.period, frame_id);
        by_team.entry(team.to_string()).or_default().push(frame);
        report.frames_kept += 1;
    }
    let teams = by_team
        .into_iter()
        .map(|(team, frames)| (team.clone(), TeamCollection::new(team, frames)))
        .collect();
    (teams, report)
}

/// Which team attacks towards +x in each (game, period).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OrientationTable {
    pub attacking_right: BTreeMap<(String, u32), String>,
    /// Per game, the frame the football rule was read from.
    pub reference_frames: BTreeMap<String, u64>,
}

impl OrientationTable {
    pub fn merge(&mut self, other: OrientationTable) {
        self.attacking_right.extend(other.attacking_right);
        self.reference_frames.extend(other.reference_frames);
    }

    pub fn attacks_right(&self, game_id: &str, period: u32, team_id: &str) -> Result<bool> {
        self.attacking_right
            .get(&(game_id.to_string(), period))
            .map(|t| t == team_id)
            .ok_or_else(|| Error::UnknownOrientation {
                game_id: game_id.to_string(),
                period,
            })
    }
}

fn mean_x<'a>(rows: impl Iterator<Item = &'a TrackingRecord>) -> f64 {
    let (s, c) = rows.fold((0.0, 0usize), |(s, c), r| (s + r.x, c + 1));
    s / c as f64
}

/// Infers attack directions for a single game.
///
/// Football: at the first frame where both teams have `n` players, the team
/// with the smaller mean x attacks right in that period; sides swap every
/// period. Basketball: in each period, the team with the smaller mean x over
/// the whole period attacks right.
pub fn infer_orientation(
    records: &[TrackingRecord],
    sport: Sport,
    n: usize,
) -> Result<OrientationTable> {
    let game = records
        .first()
        .map(|r| r.game_id.clone())
        .ok_or_else(|| Error::InsufficientData("no records".into()))?;
    if records.iter().any(|r| r.game_id != game) {
        return Err(Error::InsufficientData(
            "records span more than one game".into(),
        ));
    }
    let teams: BTreeSet<&str> = records.iter().map(|r| r.team_id.as_str()).collect();
    if teams.len() != 2 {
        return Err(Error::InsufficientData(format!(
            "game {game} has {} teams, expected 2",
            teams.len()
        )));
    }
    let teams: Vec<&str> = teams.into_iter().collect();
    let periods: BTreeSet<u32> = records.iter().map(|r| r.period).collect();
    let mut table = OrientationTable::default();

    match sport {
        Sport::Football => {
            let mut frames: BTreeMap<u64, Vec<&TrackingRecord>> = BTreeMap::new();
            for r in records {
                frames.entry(r.frame_id).or_default().push(r);
            }
            let complete = frames
                .iter()
                .filter(|(_, rows)| {
                    teams
                        .iter()
                        .all(|t| rows.iter().filter(|r| r.team_id == *t).count() == n)
                })
                .min_by_key(|(id, rows)| (rows[0].timestamp_ms, **id))
                .ok_or_else(|| {
                    Error::InsufficientData(format!("game {game} has no complete frame"))
                })?;
            let (frame_id, rows) = complete;
            let ref_period = rows[0].period;
            let xs: Vec<f64> = teams
                .iter()
                .map(|t| mean_x(rows.iter().copied().filter(|r| r.team_id == *t)))
                .collect();
            let right_at_ref = if xs[0] <= xs[1] { 0 } else { 1 };
            for &p in &periods {
                let swapped = (p + ref_period) % 2 == 1;
                let team = if swapped {
                    1 - right_at_ref
                } else {
                    right_at_ref
                };
                table
                    .attacking_right
                    .insert((game.clone(), p), teams[team].to_string());
            }
            table.reference_frames.insert(game, *frame_id);
        }
        Sport::Basketball => {
            for &p in &periods {
                let xs: Vec<Option<f64>> = teams
                    .iter()
                    .map(|t| {
                        let mut it = records
                            .iter()
                            .filter(|r| r.period == p && r.team_id == *t)
                            .peekable();
                        it.peek().is_some().then(|| mean_x(it))
                    })
                    .collect();
                let (Some(a), Some(b)) = (xs[0], xs[1]) else {
                    return Err(Error::InsufficientData(format!(
                        "game {game} period {p} lacks one team"
                    )));
                };
                let team = if a <= b { teams[0] } else { teams[1] };
                table
                    .attacking_right
                    .insert((game.clone(), p), team.to_string());
            }
        }
    }
    Ok(table)
}

/// Runs [`infer_orientation`] on every game in `records`.
pub fn infer_orientations(
    records: &[TrackingRecord],
    sport: Sport,
    n: usize,
) -> Result<OrientationTable> {
    let mut by_game: BTreeMap<&str, Vec<TrackingRecord>> = BTreeMap::new();
    for r in records {
        by_game
            .entry(r.game_id.as_str())
            .or_default()
            .push(r.clone());
    }
    let mut table = OrientationTable::default();
    for rows in by_game.values() {
        table.merge(infer_orientation(rows, sport, n)?);
    }
    Ok(table)
}

/// Rotates the pitch by 180° ((x, y) → (−x, −y)) for frames in which the
/// team attacks left, so the team always attacks towards +x.
pub fn normalize_attack_direction(
    collection: &TeamCollection,
    orientation: &OrientationTable,
) -> Result<TeamCollection> {
    let frames = collection
        .frames
        .iter()
        .map(|f| {
            Ok(
                if orientation.attacks_right(&f.game_id, f.period, &f.team_id)? {
                    f.clone()
                } else {
                    f.map_positions(|p| [-p[0], -p[1]])
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TeamCollection {
        team_id: collection.team_id.clone(),
        frames,
        games: collection.games.clone(),
    })
}

/// Keeps frames whose index within their game is a multiple of `stride`.
pub fn subsample(collection: &TeamCollection, stride: usize) -> TeamCollection {
    let stride = stride.max(1);
    let mut frames = Vec::with_capacity(collection.len() / stride + 1);
    let mut index_in_game = 0usize;
    let mut current_game: Option<&str> = None;
    for f in &collection.frames {
        if current_game != Some(f.game_id.as_str()) {
            current_game = Some(f.game_id.as_str());
            index_in_game = 0;
        }
        if index_in_game.is_multiple_of(stride) {
            frames.push(f.clone());
        }
        index_in_game += 1;
    }
    TeamCollection {
        team_id: collection.team_id.clone(),
        frames,
        games: collection.games.clone(),
    }
}

/// (in possession, out of possession); unassigned frames go to neither.
pub fn split_by_possession(collection: &TeamCollection) -> (TeamCollection, TeamCollection) {
    let pick = |want: Possession| TeamCollection {
        team_id: collection.team_id.clone(),
        frames: collection
            .frames
            .iter()
            .filter(|f| f.possession == want)
            .cloned()
            .collect(),
        games: collection.games.clone(),
    };
    (pick(Possession::Us), pick(Possession::Them))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "game_id,frame_id,timestamp_ms,period,team_id,x,y,possession_team_id\n";

    fn rec(
        game: &str,
        frame: u64,
        period: u32,
        team: &str,
        x: f64,
        poss: Option<&str>,
    ) -> TrackingRecord {
        TrackingRecord {
            game_id: game.into(),
            frame_id: frame,
            timestamp_ms: frame as i64 * 40,
            period,
            team_id: team.into(),
            x,
            y: 0.5 * x,
            possession_team_id: poss.map(str::to_string),
        }
    }

    #[test]
    fn three_rows() {
        let data = format!("{HEADER}g,1,40,1,A,1.5,2.0,A\ng,1,40,1,A,-3,4,\ng,2,80,1,B,0,0,A\n");
        let recs = read_tracking(data.as_bytes()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].possession_team_id, None);
        assert_eq!(recs[0].x, 1.5);
    }

    #[test]
    fn missing_y_column() {
        let data =
            "game_id,frame_id,timestamp_ms,period,team_id,x,possession_team_id\ng,1,0,1,A,0,\n";
        assert!(matches!(read_tracking(data.as_bytes()), Err(Error::MissingColumn(c)) if c == "y"));
    }

    #[test]
    fn malformed_row_reports_line() {
        let data = format!("{HEADER}g,1,40,1,A,1,2,A\ng,1,40,1,A,abc,2,A\n");
        assert!(matches!(
            read_tracking(data.as_bytes()),
            Err(Error::MalformedRow { line: 3, .. })
        ));
        let (ok, bad) = read_tracking_lenient(data.as_bytes()).unwrap();
        assert_eq!((ok.len(), bad.len()), (1, 1));
    }

    #[test]
    fn empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, HEADER).unwrap();
        assert!(matches!(parse_tracking_csv(&p), Err(Error::EmptyFile(_))));
        std::fs::write(&p, "").unwrap();
        assert!(matches!(parse_tracking_csv(&p), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn grouping_and_exclusion() {
        let mut recs: Vec<_> = (0..11)
            .map(|i| rec("g", 1, 1, "A", i as f64, Some("A")))
            .collect();
        recs.extend((0..10).map(|i| rec("g", 2, 1, "A", i as f64, Some("B"))));
        recs.extend((0..11).map(|i| rec("g", 3, 1, "A", i as f64, Some("B"))));
        let (teams, report) = assemble_frames(&recs, 11);
        let a = &teams["A"];
        assert_eq!(a.len(), 2);
        assert_eq!(report.wrong_player_count, 1);
        assert_eq!(report.frames_kept, 2);
        assert_eq!(a.frames[0].possession, Possession::Us);
        assert_eq!(a.frames[1].possession, Possession::Them);
        assert!(a.frames.iter().all(|f| f.n() == 11));
    }

    #[test]
    fn report_json_shape() {
        let r = ExclusionReport {
            wrong_player_count: 2,
            malformed_rows: 1,
            frames_kept: 9,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"wrong_player_count":2,"malformed_rows":1,"frames_kept":9}"#
        );
    }

    fn game_with_sides(a_x: f64, b_x: f64) -> Vec<TrackingRecord> {
        let mut v = Vec::new();
        for frame in 0..2u64 {
            for period in [1u32, 2] {
                let sign = if period == 1 { 1.0 } else { -1.0 };
                let id = frame + 100 * period as u64;
                v.extend((0..3).map(|_| rec("g", id, period, "A", sign * a_x, None)));
                v.extend((0..3).map(|_| rec("g", id, period, "B", sign * b_x, None)));
            }
        }
        v
    }

    #[test]
    fn football_first_frame_rule() {
        let t = infer_orientation(&game_with_sides(-20.0, 20.0), Sport::Football, 3).unwrap();
        assert_eq!(t.attacking_right[&("g".to_string(), 1)], "A");
        assert_eq!(t.attacking_right[&("g".to_string(), 2)], "B");
        assert_eq!(t.reference_frames["g"], 100);
    }

    #[test]
    fn football_skips_incomplete_first_frame() {
        let mut recs = game_with_sides(-20.0, 20.0);
        // An earlier frame where B is short a player and sides look reversed.
        recs.extend((0..3).map(|_| TrackingRecord {
            timestamp_ms: -40,
            ..rec("g", 7, 1, "A", 30.0, None)
        }));
        recs.extend((0..2).map(|_| TrackingRecord {
            timestamp_ms: -40,
            ..rec("g", 7, 1, "B", -30.0, None)
        }));
        let t = infer_orientation(&recs, Sport::Football, 3).unwrap();
        assert_eq!(t.attacking_right[&("g".to_string(), 1)], "A");
    }

    #[test]
    fn basketball_period_average() {
        let t = infer_orientation(&game_with_sides(5.0, -5.0), Sport::Basketball, 3).unwrap();
        assert_eq!(t.attacking_right[&("g".to_string(), 1)], "B");
        assert_eq!(t.attacking_right[&("g".to_string(), 2)], "A");
    }

    #[test]
    fn one_team_is_insufficient() {
        let recs: Vec<_> = (0..3).map(|_| rec("g", 1, 1, "A", 0.0, None)).collect();
        assert!(matches!(
            infer_orientation(&recs, Sport::Football, 3),
            Err(Error::InsufficientData(_))
        ));
    }

    fn collection(frames: usize, games: usize) -> TeamCollection {
        let frames = (0..frames)
            .map(|i| {
                Frame::new(vec![[i as f64, 1.0]], "A", i as i64 * 40, Possession::Us, 1)
                    .unwrap()
                    .with_game(format!("g{}", i % games), 1 + (i % 2) as u32, i as u64)
            })
            .collect();
        TeamCollection::new("A", frames)
    }

    #[test]
    fn reflection_by_orientation() {
        let c = collection(4, 1);
        let mut t = OrientationTable::default();
        t.attacking_right.insert(("g0".into(), 1), "A".into());
        t.attacking_right.insert(("g0".into(), 2), "B".into());
        let out = normalize_attack_direction(&c, &t).unwrap();
        for (a, b) in c.frames.iter().zip(&out.frames) {
            let p = a.positions()[0];
            let q = b.positions()[0];
            if a.period == 1 {
                assert_eq!(p, q);
            } else {
                assert_eq!(q, [-p[0], -p[1]]);
            }
        }
        let twice = normalize_attack_direction(&out, &t).unwrap();
        assert_eq!(twice, c);
        t.attacking_right.remove(&("g0".to_string(), 2));
        assert!(matches!(
            normalize_attack_direction(&c, &t),
            Err(Error::UnknownOrientation { period: 2, .. })
        ));
    }

    #[test]
    fn subsample_strides() {
        let c = collection(100, 1);
        assert_eq!(subsample(&c, 1), c);
        assert_eq!(subsample(&c, 10).len(), 10);
        let s = subsample(&collection(26, 1), 25);
        let ids: Vec<u64> = s.frames.iter().map(|f| f.frame_id).collect();
        assert_eq!(ids, vec![0, 25]);
    }

    #[test]
    fn subsample_composes_per_game() {
        let c = collection(97, 3);
        assert_eq!(subsample(&subsample(&c, 2), 3), subsample(&c, 6));
    }

    #[test]
    fn possession_split() {
        let c = collection(5, 1);
        let (us, them) = split_by_possession(&c);
        assert_eq!((us.len(), them.len()), (5, 0));
        let mixed = c.map_frames(|f| {
            let mut g = f.clone();
            g.possession = match f.frame_id % 3 {
                0 => Possession::Us,
                1 => Possession::Them,
                _ => Possession::Unassigned,
            };
            g
        });
        let (us, them) = split_by_possession(&mixed);
        assert_eq!(us.len() + them.len(), 4);
    }

    #[test]
    fn csv_round_trip() {
        let c = collection(3, 1);
        let recs: Vec<_> = c.frames.iter().flat_map(frame_records).collect();
        let mut buf = Vec::new();
        write_tracking_csv(&mut buf, &recs).unwrap();
        assert_eq!(read_tracking(&buf[..]).unwrap(), recs);
    }
}
