use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("wavefunctions live on different grids ({0} vs {1})")]
    GridMismatch(String, String),

    #[error("non-finite value {value} at x = {x}")]
    NonFiniteSample { x: f64, value: String },

    #[error("time {t} is outside the trajectory domain [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("guide {index} is centred at x = {center} at t = {t}, closer than {margin} to the grid edge [{x_min}, {x_max})")]
    GuideNearBoundary {
        index: usize,
        center: f64,
        t: f64,
        margin: f64,
        x_min: f64,
        x_max: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure at t = {t}: {reason}")]
    Numerical { t: f64, reason: String },
}

impl Error {
    /// True for errors caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}
