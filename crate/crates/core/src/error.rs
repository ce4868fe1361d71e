//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by parsing, evaluation, and the numerical procedures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {op} of {arg}")]
    Domain { op: &'static str, arg: f64 },

    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },

    #[error("evaluation produced a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("jets are undefined at piecewise breakpoint x = {x}")]
    Breakpoint { x: f64 },

    #[error("first derivative vanishes at x = {x}")]
    VanishingDerivative { x: f64 },

    #[error("point {x} lies outside the interval ({lo}, {hi})")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("interval bounds are invalid: lo = {lo}, hi = {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("function is not strictly monotone: f({x1}) and f({x2}) violate the declared direction")]
    NotMonotone { x1: f64, x2: f64 },

    #[error("value {y} lies outside the range hull ({lo}, {hi})")]
    OutsideRange { y: f64, lo: f64, hi: f64 },

    #[error("bisection failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("weight {index} is not positive at x = {x} (value {value})")]
    WeightNotPositive { index: usize, x: f64, value: f64 },

    #[error("arity mismatch: expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("domains differ: ({0}, {1}) vs ({2}, {3})", .lhs.0, .lhs.1, .rhs.0, .rhs.1)]
    DomainMismatch { lhs: (f64, f64), rhs: (f64, f64) },

    #[error("index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },

    #[error("indices must be distinct: {0:?}", .indices)]
    IndicesNotDistinct { indices: Vec<usize> },

    #[error("generator has a breakpoint at {breakpoint} inside the bracket [{lo}, {hi}]")]
    BreakpointInBracket { breakpoint: f64, lo: f64, hi: f64 },

    #[error("generator has a breakpoint at {breakpoint} within 10 steps of the stencil around {x}")]
    BreakpointNearStencil { breakpoint: f64, x: f64 },

    #[error("Mobius parameters are degenerate: |ad - bc| = {det} is too small")]
    DegenerateMobius { det: f64 },

    #[error("c*f + d is not positive on the domain (value {value} at x = {x})")]
    DenominatorNotPositive { x: f64, value: f64 },

    #[error("sample points give a rank-deficient system after {attempts} attempts")]
    RankDeficient { attempts: usize },

    #[error("Mobius validation failed: residual {residual} at x = {x}")]
    MobiusValidation { x: f64, residual: f64 },

    #[error("polynomial is not positive on the interval (value {value} at t = {t})")]
    PolyNotPositive { t: f64, value: f64 },

    #[error("range mismatch: alpha*F(f(I)) + beta leaves the domain of the inverse (value {value})")]
    RangeMismatch { value: f64 },

    #[error("denominator below tolerance at y = {y} (value {value})")]
    SmallDenominator { y: f64, value: f64 },

    #[error("construction verification failed: residual {residual} exceeds tolerance {tol}")]
    VerificationFailed { residual: f64, tol: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
