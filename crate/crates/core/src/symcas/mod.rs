//! Symbolic algebra for the Euler-Lagrange pipeline.
//!
//! Expressions are differentiated statically (partial derivatives are gone
//! before anything runs), simplified with a small local rule set, and turned
//! into equations of motion `M(q, q̇) q̈ + c(q, q̇) = 0` that can be solved
//! numerically or emitted as explicit model source.

mod diff;
mod eval;
mod expr;
mod lagrange;
mod simplify;
mod spec;


use thiserror::Error;

use crate::numlin::NumError;

pub use diff::{partial, time_derivative};
pub use eval::{evaluate, Tape};
pub use expr::{Func, Node, SymExpr};
pub use lagrange::{
    acceleration_name, accelerations, dot3, emit_explicit_source, euler_lagrange, explicit_accelerations,
    is_identifier, velocity_name, CompiledEom, ImplicitEOM, LagrangianSystem, SymVec3,
};
pub use simplify::simplify;
pub use spec::{from_lang_expr, parse_lagrangian};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("math error: {0}")]
    Math(String),
    #[error("equation for `{coord}` is not affine in the accelerations")]
    NonlinearInAccel { coord: String },
    #[error("mass matrix is singular at this state")]
    SingularMass,
    #[error("explicit emission supports at most 3 coordinates, got {0}")]
    TooManyCoords(usize),
    #[error("mass matrix determinant is identically zero")]
    SingularSymbolicDet,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error(transparent)]
    Numeric(#[from] NumError),
}
