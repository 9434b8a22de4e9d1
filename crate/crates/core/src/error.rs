use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spline configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// |c'| fell below the immersion tolerance.
    #[error("degenerate curve at {}theta = {theta:.6} (|c'| = {speed:.3e}, tolerance {tol:.3e})", .t.map(|t| format!("t = {t:.6}, ")).unwrap_or_default())]
    DegenerateCurve {
        t: Option<f64>,
        theta: f64,
        speed: f64,
        tol: f64,
    },

    #[error("rank-deficient collocation matrix (condition estimate {condition:.3e}, {distinct} distinct parameters for {unknowns} unknowns)")]
    RankDeficient {
        condition: f64,
        distinct: usize,
        unknowns: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
