use thiserror::Error;

/// Errors raised by the symbolic engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("unknown coordinate: {0}")]
    UnknownCoordinate(String),
    #[error("jet order overflow at {coordinate} (max order {max})")]
    OrderOverflow { coordinate: String, max: usize },
    #[error("not fiber-scalable: {0}")]
    NotFiberScalable(String),
    #[error("homotopy integrand not polynomial in t")]
    NonPolynomialT,
    #[error("zero section outside symbol domain: {0}")]
    ZeroSectionDomain(String),
    #[error("fundamental form requires first order (got order {0})")]
    FundamentalOrder(usize),
    #[error("hdα ≠ λ − λ′: residual {0}")]
    InvalidSplit(String),
    #[error("missing assignment for {0}")]
    MissingAssignment(String),
    #[error("degenerate input to {symbol}: {reason}")]
    Degenerate { symbol: String, reason: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
