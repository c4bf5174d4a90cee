use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field angle {angle:.6} rad exceeds the model limit {max:.6} rad")]
    FieldAngleExceeded { angle: f64, max: f64 },
    #[error("point coincides with the camera center")]
    DegeneratePoint,
    #[error("field angle {0:.6} rad has no real image radius under this division model")]
    Unrepresentable(f64),
    #[error("division-model fit diverged: {0}")]
    FitDiverged(String),
    #[error("invalid camera model: {0}")]
    InvalidModel(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("polygon vertex ({x}, {y}) lies outside the {width}x{height} grid")]
    OutOfBounds { x: f64, y: f64, width: usize, height: usize },
    #[error("mask dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("both masks are empty")]
    BothEmpty,
    #[error("polygon is not convex")]
    NonConvexInput,
    #[error("contour centroid lies outside the contour")]
    CentroidOutside,
    #[error("object center ({x}, {y}) lies outside the image")]
    CenterOutOfImage { x: f64, y: f64 },
    #[error("objects compete for every anchor of cell (row {row}, col {col})")]
    SlotConflict { row: usize, col: usize },
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),
    #[error("angle {0} deg outside [-90, 90)")]
    AngleOutOfRange(f64),
    #[error("could not place object {index} after {attempts} attempts")]
    PlacementFailed { index: usize, attempts: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid contour for image '{image_id}' object {object}: {reason}")]
    InvalidContour { image_id: String, object: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numeric procedure, as opposed to bad data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::FitDiverged(_)
                | Error::Unrepresentable(_)
                | Error::NonFiniteInput(_)
                | Error::FieldAngleExceeded { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
