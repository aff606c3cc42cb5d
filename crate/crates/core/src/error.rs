use thiserror::Error;

/// Errors raised by lattice, zeta, energy and certification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent s = {s} is not in the convergent range (s > {min})")]
    DivergentExponent { s: f64, min: f64 },

    #[error("invalid exponent pair (alpha = {alpha}, beta = {beta}): need alpha > beta > 2")]
    InvalidExponents { alpha: f64, beta: f64 },

    #[error("degenerate basis: determinant is zero")]
    DegenerateBasis,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quotient indeterminate near the triangular lattice at ({x}, {y}): denominator enclosure contains 0")]
    NearTriangular { x: f64, y: f64 },

    #[error("tolerance {tol:e} is unreachable in double precision (best radius {achieved:e})")]
    ToleranceUnreachable { tol: f64, achieved: f64 },

    #[error("invalid grid configuration: {0}")]
    InvalidGrid(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
