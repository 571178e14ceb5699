use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("spectral differentiation requires a periodic grid")]
    SpectralNeedsPeriodic,
    #[error("missing field: {0}")]
    MissingField(&'static str),
    #[error("L^{p} norm diverges: fitted tail exponent {exponent:.3} is not integrable")]
    DivergentTail { p: f64, exponent: f64 },
    #[error("outer quadrature diverges: {0}")]
    DivergentOuter(String),
    #[error("vorticity direction undefined at {point:?}: |Omega| = {magnitude:e} below threshold {threshold:e}")]
    DirectionUndefined { point: [f64; 3], magnitude: f64, threshold: f64 },
    #[error("zero vorticity profile")]
    ZeroVorticity,
    #[error("velocity does not decay: {0}")]
    NonDecaying(String),
    #[error("decay envelope violated: {0}")]
    EnvelopeViolated(String),
    #[error("maximum attained on the grid boundary (domain too small)")]
    MaxOnBoundary,
    #[error("cutoff radius {0} exceeds the grid extent")]
    CutoffTooLarge(f64),
    #[error("order 0: |Omega(y*)| = {0:e} is not a vanishing point")]
    NotVanishing(f64),
    #[error("certification radius reaches another nodal point at distance {0:e}; shrink requested")]
    ShrinkRequested(f64),
    #[error("trajectory hits the axis")]
    HitsAxis,
    #[error("polygon touches the axis")]
    PolygonTouchesAxis,
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("time series: {0}")]
    TimeSeries(String),
    #[error("malformed profile file: field `{field}`: {reason}")]
    Format { field: String, reason: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("report: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
