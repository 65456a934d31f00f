use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("regulator must be positive, got {0}")]
    NonPositiveRegulator(f64),
    #[error("nome must lie in [0, 1), got {0}")]
    NomeOutOfRange(f64),
    #[error("winding {0} is not an integer and the loop is not tagged as anyonic")]
    NonIntegerWinding(f64),
    #[error("statistics parameter {nu} is not an integer multiple of {nu0}")]
    NotMultipleOfUnit { nu: f64, nu0: f64 },
    #[error("loop must have zero winding, got {0}")]
    NonzeroWinding(f64),
    #[error("winding sector {0} outside the truncation range [{1}, {2}]")]
    SectorOutOfRange(i64, i64, i64),
    #[error("momentum index {0} outside the window")]
    OutsideWindow(i64),
    #[error("window too small: needs {needed}, has {have}")]
    WindowTooSmall { needed: i64, have: i64 },
    #[error("singular evaluation at coincident points (r = {0})")]
    Singular(f64),
    #[error("series order {got} too low, need at least {need}")]
    OrderTooLow { need: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("calibration failed: residual {0:e}")]
    Calibration(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
