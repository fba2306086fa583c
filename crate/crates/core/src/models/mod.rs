//! The worked case studies as library objects.
//!
//! * the Newtonian quadcopter: [`quad_derivatives`] and the runnable
//!   `QuadCopter` class from [`builtin_source`];
//! * the single and double pendulum, both as model source and as
//!   [`LagrangianSystem`](crate::symcas::LagrangianSystem)s;
//! * the three-axis wrist gimbal, as a [`LagrangianSystem`](crate::symcas::LagrangianSystem).

mod lagrangian;
mod quad;
mod sources;


use thiserror::Error;

use crate::symcas::SymError;

pub use lagrangian::{double_pendulum_lagrangian, gimbal_lagrangian, pendulum_lagrangian, GimbalParams};
pub use quad::{quad_derivatives, QuadAccel, QuadParams, QuadState};
pub use sources::{builtin_source, quad_scenario_source, BUILTIN_MODELS, QUAD_SCENARIO_CLASS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },
    #[error("gimbal lock: cos(theta) vanishes at theta = {theta}")]
    GimbalLock { theta: f64 },
    #[error("unknown built-in model `{0}` (known: pendulum, double_pendulum, quadcopter)")]
    UnknownModel(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Rejects values that are not strictly positive (NaN included).
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonPositiveParam { name, value })
    }
}
