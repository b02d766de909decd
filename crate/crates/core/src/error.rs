use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("frame has {found} players, expected {expected}")]
    WrongPlayerCount { expected: usize, found: usize },
    #[error("non-finite coordinate for player {player}")]
    NonFiniteCoordinate { player: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("tracking file is missing column `{0}`")]
    MissingColumn(String),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("tracking file {0} has no data rows")]
    EmptyFile(PathBuf),
    #[error("no orientation known for game {game_id}, period {period}")]
    UnknownOrientation { game_id: String, period: u32 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("atom count mismatch: {left} vs {right}")]
    AtomCountMismatch { left: usize, right: usize },
    #[error("total masses differ: {left} vs {right}")]
    WeightSumMismatch { left: f64, right: f64 },
    #[error("transport solver failed to converge after {0} pivots")]
    SolverStalled(usize),

    #[error("projection count L={0} is too small (need L >= 2)")]
    LTooSmall(usize),
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("K={k} exceeds the number of points ({points})")]
    KTooLarge { k: usize, points: usize },

    #[error("phase `{phase}` has {found} frames, need at least {needed}")]
    InsufficientPhaseFrames {
        phase: &'static str,
        found: usize,
        needed: usize,
    },
    #[error("zero variance in correlation input")]
    ZeroVariance,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("team {team_id} has {found} frames, need at least {needed}")]
    InsufficientFrames {
        team_id: String,
        found: usize,
        needed: usize,
    },
    #[error("sample size {size} exceeds the smallest fold ({fold})")]
    SizeTooLarge { size: usize, fold: usize },
    #[error("training labels contain a single class")]
    SingleClass,

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's configuration or arguments,
    /// as opposed to failures while processing valid input.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::KTooLarge { .. }
                | Error::LTooSmall(_)
                | Error::SizeTooLarge { .. }
                | Error::MissingColumn(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
