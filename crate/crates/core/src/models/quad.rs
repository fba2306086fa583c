//! Quadcopter rigid-body dynamics in Euler-angle form.
//!
//! The formulas mirror the `QuadCopter` class statement by statement, so the
//! native evaluation and the interpreted model agree to rounding.

use super::{positive, ModelError};

/// Physical constants of the airframe; defaults are the shipped listing's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    pub g: f64,
    pub m: f64,
    /// Arm length.
    pub l: f64,
    /// Thrust coefficient.
    pub k: f64,
    /// Drag-torque coefficient.
    pub b: f64,
    /// Rotor inertia.
    pub im: f64,
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            g: 9.81,
            m: 0.468,
            l: 0.225,
            k: 2.98e-6,
            b: 1.140e-7,
            im: 3.357e-5,
            ixx: 4.856e-3,
            iyy: 4.856e-3,
            izz: 8.801e-3,
            ax: 0.25,
            ay: 0.25,
            az: 0.25,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("g", self.g),
            ("m", self.m),
            ("l", self.l),
            ("k", self.k),
            ("b", self.b),
            ("IM", self.im),
            ("Ixx", self.ixx),
            ("Iyy", self.iyy),
            ("Izz", self.izz),
            ("Ax", self.ax),
            ("Ay", self.ay),
            ("Az", self.az),
        ];
        for (name, value) in fields {
            positive(name, value)?;
        }
        Ok(())
    }

    /// Common rotor speed at which total thrust balances gravity.
    pub fn hover_speed(&self) -> f64 {
        (self.m * self.g / (4.0 * self.k)).sqrt()
    }
}

/// Kinematic state plus rotor speeds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadState {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Roll.
    pub phi: f64,
    /// Pitch.
    pub theta: f64,
    /// Yaw.
    pub psi: f64,
    pub phi_dot: f64,
    pub theta_dot: f64,
    pub psi_dot: f64,
    /// Body angular rates.
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Rotor speeds ω₁..ω₄.
    pub rotors: [f64; 4],
}

impl QuadState {
    /// At rest at the origin with all rotors at `speed`.
    pub fn hovering(speed: f64) -> Self {
        QuadState { rotors: [speed; 4], ..QuadState::default() }
    }
}

/// Second derivatives of position and Euler angles, and body-rate derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadAccel {
    pub acceleration: [f64; 3],
    pub phi_ddot: f64,
    pub theta_ddot: f64,
    pub psi_ddot: f64,
    pub p_dot: f64,
    pub q_dot: f64,
    pub r_dot: f64,
}

impl QuadAccel {
    /// All nine components, in declaration order.
    pub fn components(&self) -> [f64; 9] {
        let [x, y, z] = self.acceleration;
        [x, y, z, self.phi_ddot, self.theta_ddot, self.psi_ddot, self.p_dot, self.q_dot, self.r_dot]
    }
}

/// Evaluates the quadcopter's equations of motion at `s`.
pub fn quad_derivatives(s: &QuadState, c: &QuadParams) -> Result<QuadAccel, ModelError> {
    c.validate()?;
    let [w1, w2, w3, w4] = s.rotors;
    let thrust = c.k * (w1.powi(2) + w2.powi(2) + w3.powi(2) + w4.powi(2));
    let wt = w1 - w2 + w3 - w4;

    let (ch, sh) = (s.phi.cos(), s.phi.sin());
    let (sp, cp) = (s.psi.sin(), s.psi.cos());
    let (st, ct) = (s.theta.sin(), s.theta.cos());
    if ct.abs() < 1e-9 {
        return Err(ModelError::GimbalLock { theta: s.theta });
    }
    let tt = s.theta.tan();

    let heading = [cp * st * ch + sp * sh, sp * st * ch - cp * sh, ct * ch];
    let gravity = [-c.g * 0.0, -c.g * 0.0, -c.g * 1.0];
    let drag = [c.ax * s.velocity[0], c.ay * s.velocity[1], c.az * s.velocity[2]];
    let mut acceleration = [0.0; 3];
    for i in 0..3 {
        acceleration[i] = gravity[i] + thrust / c.m * heading[i] - 1.0 / c.m * drag[i];
    }

    let (p, q, r) = (s.p, s.q, s.r);
    let p_dot = (c.iyy - c.izz) * q * r / c.ixx - c.im * q / c.ixx * wt + c.l * c.k * (w4.powi(2) - w2.powi(2)) / c.ixx;
    let q_dot =
        (c.izz - c.ixx) * p * r / c.iyy - c.im * (-p) / c.iyy * wt + c.l * c.k * (w3.powi(2) - w1.powi(2)) / c.iyy;
    let r_dot = (c.ixx - c.iyy) * p * q / c.izz + c.b * (w1.powi(2) + w2.powi(2) - w3.powi(2) - w4.powi(2)) / c.izz;

    let (dphi, dtheta) = (s.phi_dot, s.theta_dot);
    let phi_ddot = (dphi * ch * tt + dtheta * sh / ct.powi(2)) * q
        + (-dphi * sh * ct + dtheta * ch / ct.powi(2)) * r
        + (p_dot + q_dot * sh * tt + r_dot * ch * tt);
    let theta_ddot = (-dphi * sh) * q + (-dphi * ch) * r + (q_dot * ch + r_dot * (-sh));
    let psi_ddot = (dphi * ch / ct + dphi * sh * tt / ct) * q
        + (-dphi * sh / ct + dtheta * ch * tt / ct) * r
        + (q_dot * sh / ct + r_dot * ch / ct);

    Ok(QuadAccel { acceleration, phi_ddot, theta_ddot, psi_ddot, p_dot, q_dot, r_dot })
}
