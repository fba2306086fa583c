//! Energy formulations of the pendulum, double pendulum and wrist gimbal.

use super::{positive, ModelError};
use crate::symcas::{dot3, LagrangianSystem, SymExpr, SymVec3};

fn sym(name: &str) -> SymExpr {
    SymExpr::sym(name)
}

fn finite(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonPositiveParam { name, value })
    }
}

/// Single pendulum with the angle measured from the horizontal:
/// `T = ½ m l² θ̇²`, `V = −m g l sin θ`, so that `θ̈ = (g/l) cos θ`.
pub fn pendulum_lagrangian(m: f64, l: f64, g: f64) -> Result<LagrangianSystem, ModelError> {
    let params =
        vec![("m".into(), positive("m", m)?), ("l".into(), positive("l", l)?), ("g".into(), positive("g", g)?)];
    let (m, l, g) = (sym("m"), sym("l"), sym("g"));
    let theta = sym("theta");
    let kinetic = SymExpr::constant(0.5) * m.clone() * l.clone().powf(2.0) * sym("theta'").powf(2.0);
    let potential = -(m * g * l * theta.sin());
    Ok(LagrangianSystem::new(vec!["theta".into()], params, kinetic, potential)?)
}

/// Double pendulum in the coordinates and parameter names of the shipped
/// `double_pendulum` class (`t_1`, `t_2`, `m_1`, `m_2`, `L_1`, `L_2`, `g`).
///
/// `m2` may be zero: the second coordinate then decouples (its mass-matrix
/// row vanishes) and the first reduces to a single pendulum.
pub fn double_pendulum_lagrangian(m1: f64, m2: f64, l1: f64, l2: f64, g: f64) -> Result<LagrangianSystem, ModelError> {
    if !(m2 >= 0.0 && m2.is_finite()) {
        return Err(ModelError::NonPositiveParam { name: "m_2", value: m2 });
    }
    let params = vec![
        ("m_1".into(), positive("m_1", m1)?),
        ("m_2".into(), m2),
        ("L_1".into(), positive("L_1", l1)?),
        ("L_2".into(), positive("L_2", l2)?),
        ("g".into(), positive("g", g)?),
    ];
    let (t1, t2, w1, w2) = (sym("t_1"), sym("t_2"), sym("t_1'"), sym("t_2'"));
    let (m1, m2, l1, l2, g) = (sym("m_1"), sym("m_2"), sym("L_1"), sym("L_2"), sym("g"));
    let half = SymExpr::constant(0.5);
    let kinetic = half.clone() * m1.clone() * (l1.clone() * w1.clone()).powf(2.0)
        + half
            * m2.clone()
            * (l1.clone().powf(2.0) * w1.clone().powf(2.0)
                + l2.clone().powf(2.0) * w2.clone().powf(2.0)
                + SymExpr::constant(2.0) * l1.clone() * l2.clone() * w1 * w2 * (t2.clone() - t1.clone()).cos());
    let potential =
        m1 * g.clone() * l1.clone() * t1.sin() + m2.clone() * g.clone() * l2 * t2.sin() + m2 * g * l1 * t1.sin();
    Ok(LagrangianSystem::new(vec!["t_1".into(), "t_2".into()], params, kinetic, potential)?)
}

/// Physical parameters of the three-axis wrist gimbal.
///
/// No measured values are published for this mechanism; the defaults are
/// unit SI values with standard gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GimbalParams {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub m1: f64,
    pub m3: f64,
    pub l2: f64,
    pub l3: f64,
    pub g: f64,
}

impl Default for GimbalParams {
    fn default() -> Self {
        GimbalParams { i1: 1.0, i2: 1.0, i3: 1.0, m1: 1.0, m3: 1.0, l2: 1.0, l3: 1.0, g: 9.81 }
    }
}

/// The gimbal with coordinates `theta_1..theta_3`; each link's angular
/// velocity is expressed in its own frame before squaring.
pub fn gimbal_lagrangian(p: &GimbalParams) -> Result<LagrangianSystem, ModelError> {
    let params = vec![
        ("I_1".into(), positive("I_1", p.i1)?),
        ("I_2".into(), positive("I_2", p.i2)?),
        ("I_3".into(), positive("I_3", p.i3)?),
        ("m_1".into(), finite("m_1", p.m1)?),
        ("m_3".into(), finite("m_3", p.m3)?),
        ("l_2".into(), finite("l_2", p.l2)?),
        ("l_3".into(), finite("l_3", p.l3)?),
        ("g".into(), finite("g", p.g)?),
    ];
    let (t1, t2, t3) = (sym("theta_1"), sym("theta_2"), sym("theta_3"));
    let (d1, d2, d3) = (sym("theta_1'"), sym("theta_2'"), sym("theta_3'"));
    let (c2, s2, c3, s3) = (t2.cos(), t2.sin(), t3.cos(), t3.sin());

    let w1 = SymVec3::unit_x().scale(&d1);
    let w2 = SymVec3::new(c2.clone(), -s2.clone(), 0.0).scale(&d1).add(&SymVec3::unit_z().scale(&d2));
    let w3 = SymVec3::new(
        d1.clone() * c2.clone() * c3.clone() - d2.clone() * s3.clone(),
        -(d1.clone() * s2) + d3,
        -(d1 * s3.clone() * c2) - d2 * c3,
    );

    let kinetic = SymExpr::constant(0.5)
        * (sym("I_1") * dot3(&w1, &w1) + sym("I_2") * dot3(&w2, &w2) + sym("I_3") * dot3(&w3, &w3));
    let potential =
        -(sym("m_1") * sym("g") * sym("l_2") * t1.cos()) + sym("m_3") * sym("g") * sym("l_3") * t1.sin() * s3;
    Ok(LagrangianSystem::new(vec!["theta_1".into(), "theta_2".into(), "theta_3".into()], params, kinetic, potential)?)
}
