//! Exact congruence counting and certified gap construction for diagonal forms
//! `F(x) = a_1 x_1^s + ... + a_s x_s^s` with `s` in `{3, 4}`.
//!
//! The library is organized bottom-up:
//!
//! * [`arith`] — deterministic integer primitives (primality, CRT, exact roots);
//! * [`cyclotomic`] — exact arithmetic in Z[ζ₃] and Z[i], power residue
//!   characters, Jacobi and Gauss sums;
//! * [`counting`] — exact solution counts r_F(m, p) by brute force and by
//!   closed formula, extended multiplicatively to squarefree moduli;
//! * [`exceptional`] — classification of exceptional biquadratic forms;
//! * [`equidist`] — prime scans and empirical equidistribution statistics;
//! * [`gapcraft`] — construction and verification of certified gap witnesses;
//! * [`sieve`] — ground truth about the value set S_F and explicit gap search;
//! * [`cli`] — the batch command-line front end.

pub mod arith;
pub mod cli;
pub mod counting;
pub mod cyclotomic;
pub mod equidist;
pub mod exceptional;
pub mod gapcraft;
pub mod sieve;

/// Unified error type for the whole crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The input is outside the operation's domain (wrong residue class,
    /// malformed form, precondition violated, ...). CLI exit code 1.
    #[error("domain error: {0}")]
    Domain(String),
    /// A certificate failed verification: stored and recomputed data disagree.
    /// Never silent; CLI exit code 2.
    #[error("certificate error: {0}")]
    Certificate(String),
    /// The requested computation exceeds a configured work or memory budget.
    #[error("budget error: {0}")]
    Budget(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn certificate(msg: impl Into<String>) -> Self {
        Error::Certificate(msg.into())
    }
    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}
