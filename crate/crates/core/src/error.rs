use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("field is identically zero")]
    ZeroField,

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("support overflow: {0}")]
    SupportOverflow(String),

    #[error("no interior minimum of the fiber energy in [{t_min}, {t_max}]; J[u] < V_inf*a/2 fails on this grid")]
    NoInteriorMinimum { t_min: f64, t_max: f64 },

    #[error("tridiagonal solve broke down at row {row} (pivot {pivot:e}); dt too large for this potential")]
    Breakdown { row: usize, pivot: f64 },

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("mass-critical exponent p = {p}: no unique lambda for a given mass")]
    MassCritical { p: f64 },

    #[error("iteration stagnated after {0} steps")]
    Stagnation(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("csv error: {0}")]
    Csv(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
