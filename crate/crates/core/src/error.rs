use thiserror::Error;

use crate::distributions::{Family, Param};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be {requirement}, got {value}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("parameter `{param}` is required by the {family} family")]
    MissingParameter { family: Family, param: Param },

    #[error("parameter `{param}` is not used by the {family} family")]
    UnexpectedParameter { family: Family, param: Param },

    #[error("sampling is not implemented for the {0} family")]
    UnsupportedFamily(Family),

    #[error("sample is empty")]
    EmptySample,

    #[error("sample contains a non-finite value at index {0}")]
    NonFiniteObservation(usize),

    #[error("bin edges must be strictly increasing with at least two entries")]
    InvalidEdges,

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid estimator: {0}")]
    InvalidEstimator(String),

    #[error("unknown {what} `{name}`")]
    UnknownName { what: &'static str, name: String },

    #[error("quadrature did not converge: estimate {estimate} with error bound {error_bound}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("objective infeasible at every evaluated point (best point {best_point:?})")]
    AllInfeasible { best_point: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(what: &'static str, requirement: &'static str, value: f64) -> Result<T> {
    Err(Error::Domain {
        what,
        requirement,
        value,
    })
}
