use thiserror::Error;

/// Errors raised by the library. Variants map onto the failure classes
/// the CLI distinguishes (configuration, condition violation, numerics).
#[derive(Debug, Error)]
pub enum Error {
    #[error("sizing error: {0}")]
    Sizing(String),
    #[error("cusp detected at parameter s = {s}: |z'| = {speed:e}")]
    Cusp { s: f64, speed: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point {point} is outside the domain of the map: {reason}")]
    Domain { point: String, reason: String },
    #[error("evaluation at the pole z = 0 of the interior map")]
    Pole,
    #[error("branch point: sample {index} is zero")]
    BranchPoint { index: usize },
    #[error("branch resolution: argument gap {gap:.3} rad between samples {index} and {next} is too large; refine the path")]
    BranchResolution { index: usize, next: usize, gap: f64 },
    #[error("unsupported curve: {0}")]
    UnsupportedCurve(String),
    #[error("accuracy: {what} residual {residual:e} exceeds {tolerance:e}")]
    Accuracy {
        what: String,
        residual: f64,
        tolerance: f64,
    },
    #[error("weight singularity at s = {s} (exponent {alpha})")]
    Singularity { s: f64, alpha: f64 },
    #[error("invalid data: {0}")]
    Data(String),
    #[error("point {point} lies within {distance:e} of the curve (grid spacing {spacing:e}); use boundary traces instead")]
    NearBoundary {
        point: String,
        distance: f64,
        spacing: f64,
    },
    #[error("coefficient extraction failed: {0}")]
    Extraction(String),
    #[error("coefficient condition violated: {0}")]
    Coefficient(String),
    #[error("canonical trace Z+ vanishes at node {index} (|Z+| = {modulus:e})")]
    CanonicalTrace { index: usize, modulus: f64 },
    #[error("function is not a trace of the required side: {0}")]
    NotATrace(String),
    #[error("function does not vanish at infinity: |g(0)| = {0:e}")]
    NonvanishingAtInfinity(f64),
    #[error("truncation ({m1}, {m2}) outside stored range ({max1}, {max2})")]
    Truncation {
        m1: usize,
        m2: usize,
        max1: usize,
        max2: usize,
    },
    #[error("admissibility violated: {}", .0.join("; "))]
    Admissibility(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Sizing(_)
                | Error::Parameter(_)
                | Error::UnsupportedCurve(_)
                | Error::Truncation { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Data(_)
        )
    }

    pub fn is_condition_violation(&self) -> bool {
        matches!(self, Error::Admissibility(_) | Error::Coefficient(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
