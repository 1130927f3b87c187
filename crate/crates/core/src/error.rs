use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("path is not closed: ends at vertex {end}, started at {start}")]
    OpenPath { start: usize, end: usize },

    #[error("invalid sector: {0}")]
    Sector(String),

    #[error("flux targets are inconsistent: {0}")]
    InconsistentFlux(String),

    #[error("number-conserving solver needs an empty intralayer flip set (got {0} flipped edges); use the parity solver")]
    Mode(usize),

    #[error("matrix has odd dimension {0}")]
    OddDimension(usize),

    #[error("matrix is not antisymmetric (max |M + M^T| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("eigenvalue {value} has no partner -z within {tol:e} (nearest miss {miss:e})")]
    Unpaired { value: String, tol: f64, miss: f64 },

    #[error("fermion number {n} is not admissible: must be {parity}")]
    Inadmissible { n: usize, parity: &'static str },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {inner}")]
    InFile { path: std::path::PathBuf, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
