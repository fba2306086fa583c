//! Model source for the built-in examples.

use std::fmt::Write;

use super::ModelError;

const PENDULUM: &str = include_str!("../../listings/pendulum.acm");
const DOUBLE_PENDULUM: &str = include_str!("../../listings/double_pendulum.acm");
const QUADCOPTER: &str = include_str!("../../listings/quadcopter.acm");

/// Names accepted by [`builtin_source`].
pub const BUILTIN_MODELS: [&str; 3] = ["pendulum", "double_pendulum", "quadcopter"];

/// Entry class of [`quad_scenario_source`].
pub const QUAD_SCENARIO_CLASS: &str = "quad_scenario";

/// Source of a built-in model: `pendulum (l)`,
/// `double_pendulum (m_1, m_2, L_1, L_2)` or `QuadCopter (P, phi, theta, psi)`.
pub fn builtin_source(name: &str) -> Result<&'static str, ModelError> {
    match name {
        "pendulum" => Ok(PENDULUM),
        "double_pendulum" => Ok(DOUBLE_PENDULUM),
        "quadcopter" => Ok(QUADCOPTER),
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}

/// The quadcopter plus a driver class that holds the rotors at the hover
/// speed plus a constant per-rotor `offsets` (rad/s), starting level at the
/// origin. The driver's entry class is [`QUAD_SCENARIO_CLASS`]; it takes no
/// arguments and exposes the airframe as the child `quad`.
pub fn quad_scenario_source(offsets: [f64; 4]) -> String {
    let mut out = String::from(QUADCOPTER);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    let _ = writeln!(out, "class {QUAD_SCENARIO_CLASS} ()");
    out.push_str("private\n");
    out.push_str("  quad := create QuadCopter([0,0,0], 0, 0, 0);\n");
    out.push_str("  hover := sqrt(quad.m*quad.g/(4*quad.k));\n");
    for (i, d) in offsets.iter().enumerate() {
        let _ = writeln!(out, "  d{} := {d};", i + 1);
    }
    out.push_str("end\n");
    for i in 1..=4 {
        let _ = writeln!(out, "  quad.w{i} = hover + d{i};");
    }
    out.push_str("end\n");
    out
}
