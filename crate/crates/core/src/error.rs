use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("empty sample")]
    EmptySample,

    #[error("point {0} is not a support point of the table")]
    UnknownPoint(f64),

    #[error("zero count at point {0}; drop zero-count rows first")]
    ZeroCount(f64),

    #[error("all counts are zero")]
    AllZero,

    #[error("point sets differ")]
    PointMismatch,

    #[error("model density vanishes at point {point}")]
    SupportMismatch { point: f64 },

    #[error("{family} has no one-parameter exponential form in parameter `{param}`")]
    UnsupportedForm {
        family: &'static str,
        param: &'static str,
    },

    #[error("need at least {needed} positive-count points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("objective is infeasible everywhere in the search bounds")]
    AllInfeasible,

    #[error("no root of the moment equation in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("resampling cap exceeded: {attempts} attempts for {replicates} replicates")]
    ResampleCap { attempts: usize, replicates: usize },

    #[error("{0}")]
    Experiment(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidTable(_) | Error::Csv(_) | Error::Json(_) => 2,
            Error::InvalidModel(_)
            | Error::UnknownPoint(_)
            | Error::ZeroCount(_)
            | Error::AllZero
            | Error::PointMismatch
            | Error::SupportMismatch { .. }
            | Error::UnsupportedForm { .. }
            | Error::TooFewPoints { .. }
            | Error::EmptySample => 3,
            Error::InvalidConfig(_)
            | Error::AllInfeasible
            | Error::NoRoot { .. }
            | Error::ResampleCap { .. } => 4,
            Error::Experiment(_) | Error::UnknownFixture(_) | Error::Io(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
