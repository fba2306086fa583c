//! Fixed-step interpreter for instantiated object trees.
//!
//! Each step runs three phases: a discrete phase (guards and `:=`), a
//! continuous phase (`=` equations), and an integration phase that advances
//! every variable with a continuous equation on one of its derivatives.

mod eval;
mod instance;
mod step;
mod trace;
mod value;


use thiserror::Error;

use crate::lang::{Model, Pos};

pub use eval::{eval, eval_constant, Fault};
pub use instance::{instantiate, ObjectInstance, VarKey};
pub use step::Simulation;
pub use trace::{read_csv, Trace, TraceError, TraceFormat, DEFAULT_PRECISION};
pub use value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("class `{class}` expects {expected} argument(s), got {found}")]
    ArityMismatch { class: String, expected: usize, found: usize },
    #[error("{pos}: while initializing `{class}`: {message}")]
    Init { class: String, pos: Pos, message: String },
    #[error("{pos}: at t={time}: {message}")]
    Eval { time: f64, pos: Pos, message: String },
    #[error("{pos}: at t={time}: math error: {message}")]
    Math { time: f64, pos: Pos, message: String },
    #[error("{pos}: unsupported construct: {what}")]
    Unsupported { pos: Pos, what: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step {step}: {source}")]
    AtStep {
        step: u64,
        #[source]
        source: Box<SimError>,
    },
}

impl SimError {
    /// Source position of the offending statement, if known.
    pub fn pos(&self) -> Option<Pos> {
        match self {
            SimError::Init { pos, .. }
            | SimError::Eval { pos, .. }
            | SimError::Math { pos, .. }
            | SimError::Unsupported { pos, .. } => Some(*pos),
            SimError::AtStep { source, .. } => source.pos(),
            _ => None,
        }
    }

    /// True for errors raised while the model was running (as opposed to setup).
    pub fn is_runtime(&self) -> bool {
        match self {
            SimError::Eval { .. } | SimError::Math { .. } | SimError::Unsupported { .. } => true,
            SimError::AtStep { source, .. } => source.is_runtime(),
            _ => false,
        }
    }
}

/// How the integration phase advances derivative chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// `x^(k) += x^(k+1) * dt` from the highest order down, each update
    /// reading the already advanced higher derivative (symplectic Euler).
    #[default]
    SemiImplicitEuler,
    /// Same order, but every update reads the values from before the phase.
    ExplicitEuler,
}

/// How continuous equations that read each other's targets are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoopResolution {
    /// Solve the equation set simultaneously: if a second sweep changes any
    /// target, Newton iteration finds the values that satisfy every equation.
    #[default]
    Simultaneous,
    /// One sweep in textual order; each read sees the most recently written value.
    SinglePass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub end_time: f64,
    /// Variable paths to record (`theta`, `theta'`, `quad.P`); `None` records
    /// every real and vector variable of the root object.
    pub recorded: Option<Vec<String>>,
    pub integrator: Integrator,
    pub loops: LoopResolution,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.001,
            end_time: 10.0,
            recorded: None,
            integrator: Integrator::default(),
            loops: LoopResolution::default(),
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, end_time: f64) -> Self {
        SimConfig { dt, end_time, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.end_time.is_finite() && self.end_time >= 0.0) {
            return Err(SimError::Config(format!("end time must be non-negative, got {}", self.end_time)));
        }
        Ok(())
    }

    /// Number of steps needed to reach `end_time`: `ceil(end/dt)`, treating
    /// ratios within rounding noise of an integer as that integer.
    pub fn step_count(&self) -> u64 {
        let ratio = self.end_time / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as u64
        } else {
            ratio.ceil() as u64
        }
    }
}

/// Instantiates `entry` and runs it for `config.step_count()` steps,
/// recording a row at t = 0 and after every step.
pub fn simulate(model: &Model, entry: &str, args: Vec<Value>, config: &SimConfig) -> Result<Trace, SimError> {
    config.validate()?;
    let root = instantiate(model, entry, args)?;
    let mut sim = Simulation::new(root, config.clone())?;
    let mut trace = Trace::new(sim.columns().to_vec());
    trace.push(0.0, sim.sample());
    for k in 1..=config.step_count() {
        sim.step().map_err(|e| SimError::AtStep { step: k, source: Box::new(e) })?;
        trace.push(k as f64 * config.dt, sim.sample());
    }
    Ok(trace)
}
