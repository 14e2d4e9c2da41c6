use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} is not a power of two of at least 8")]
    GridSize(usize),
    #[error("grid half-width must be positive and finite, got {0}")]
    GridWidth(f64),
    #[error("semiclassical parameter must lie in (0, 1), got {0}")]
    BadH(f64),
    #[error("samples contain NaN or infinity")]
    NonFinite,
    #[error("sample count {got} does not match the grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operands live on different grids, parameters or domains")]
    Mismatch,
    #[error("grid spacing {spacing:e} does not resolve frequency {xi}: need at most {limit:e}")]
    UnresolvedPhase { spacing: f64, xi: f64, limit: f64 },
    #[error("center {0} lies outside the grid interior")]
    CenterOutsideGrid(f64),
    #[error("phase has negative imaginary part {value:e} at x = {x}")]
    NegativeImaginaryPhase { x: f64, value: f64 },
    #[error("phase has zero imaginary part at x = {x} but a complex gradient (imaginary part {imag:e})")]
    ComplexGradient { x: f64, imag: f64 },
    #[error("{what} needs {needed} points, above the budget of {budget}")]
    Budget { what: &'static str, needed: usize, budget: usize },
    #[error("the window's Fourier profile is not compactly supported")]
    NonCompactWindow,
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("symbol vanishes identically on the ball of radius {0}")]
    ZeroSup(f64),
    #[error("no finite decay exponent for radius {0}")]
    InfiniteAlpha(f64),
    #[error("lower bound fails at {failed} of {total} ladder points")]
    LowerBound { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
