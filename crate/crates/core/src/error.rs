use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ImsError {
    #[error("point {re}+{im}i lies outside the open unit disk")]
    Domain { re: f64, im: f64 },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("primitive quadrature did not reach rtol {rtol:e} (last relative change {last:e})")]
    Quadrature { rtol: f64, last: f64 },

    #[error("mean integral at r={r} did not converge: est_rel_err {est:e} with n_max={n_max}")]
    NonConvergence { r: f64, est: f64, n_max: usize },

    #[error("window {window} exceeds ladder length {rungs}")]
    LadderTooShort { window: usize, rungs: usize },

    #[error("no divergence/convergence change in alpha bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("parameter {value} outside valid range {range} for {family}")]
    Range {
        family: String,
        value: f64,
        range: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at column {pos}: {message}")]
    Parse { pos: usize, message: String },

    #[error("cache i/o: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, ImsError>;

impl ImsError {
    pub(crate) fn domain(z: num_complex::Complex64) -> Self {
        ImsError::Domain { re: z.re, im: z.im }
    }
}
