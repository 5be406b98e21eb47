use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stream integrity: {0}")]
    StreamIntegrity(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: u64, max: u64 },
    #[error("point is infeasible: row {row} has slack {slack}")]
    Infeasible { row: usize, slack: f64 },
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("preconditioner is numerically singular")]
    SingularPreconditioner,
    #[error("solver diverged: {0}")]
    SolverDivergence(String),
    #[error("linear system has no solution: {0}")]
    NoSolution(String),
    #[error("coordinate {coord} = {value} is not within 1/3 of an integer")]
    ExtractionAmbiguity { coord: usize, value: f64 },
    #[error("rounded point violates row {row}")]
    RoundedInfeasible { row: usize },
    #[error("iterate norm exceeded 2^{log2_bound}; LP looks unbounded")]
    Unbounded { log2_bound: u64 },
}

impl Error {
    pub fn at_iteration(self, iteration: usize) -> Error {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    /// Strips iteration context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            e => e,
        }
    }
}
