use thiserror::Error;

/// Errors produced anywhere in the factorization and verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no real factorization scale: {0}")]
    Infeasible(String),

    #[error("inconsistent factorization: {0}")]
    Inconsistent(String),

    #[error("no real kink: {0}")]
    NoRealKink(String),

    #[error("integration left the invariant interval at xi = {xi}: u = {value}")]
    Instability { xi: f64, value: f64 },

    #[error("front reached the boundary at t = {time}")]
    TruncatedRun { time: f64 },

    #[error("time step {dt} violates the stability bound dx^2/2 = {bound}")]
    Cfl { dt: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
