use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Standing hypotheses on each factor `f_j` of a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    /// `f_j(0) != 0`.
    H1,
    /// `f_j` is not constant.
    H2,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::H1 => f.write_str("H1 (f_j(0) != 0)"),
            Hypothesis::H2 => f.write_str("H2 (f_j non-constant)"),
        }
    }
}

/// Errors raised by the library. Factor indices are 1-based in messages and
/// payloads, matching the `f_1, ..., f_m` labelling of a system.
#[derive(Debug, Error)]
pub enum Error {
    #[error("factor f_{factor} violates {hypothesis}")]
    ConstraintViolation { factor: usize, hypothesis: Hypothesis },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("direction uses norm {found} but {expected} is required")]
    NormMismatch { expected: String, found: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("f_{factor} vanishes at z = {z}")]
    Pole { factor: usize, z: Complex64 },

    #[error("f_{factor} vanishes on the contour near theta = {theta}")]
    PoleOnContour { factor: usize, theta: f64 },

    #[error("no critical point: {0}")]
    NoSolution(String),

    #[error("root finding did not converge after {} iterations (last z = {:?})", .trace.len(), .trace.last().map(|s| s.0))]
    NonConvergence { trace: Vec<(f64, f64)> },

    #[error("critical point z = {z} is not strictly minimal (margin {margin:e})")]
    NotStrictlyMinimal { z: f64, margin: f64 },

    #[error("Re F(±{epsilon}) = {re_f:e} is not positive")]
    BadEpsilon { epsilon: f64, re_f: f64 },

    #[error("no admissible epsilon: {0}")]
    NoValidEpsilon(String),

    #[error("coalescing saddle (c2 = {c2:e}, cubic correction {cubic_correction:e}); use quadrature")]
    Coalescence { c2: f64, cubic_correction: f64 },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
