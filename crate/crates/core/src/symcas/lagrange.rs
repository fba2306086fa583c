//! Euler-Lagrange equations of motion from kinetic and potential energy.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::diff::{partial, time_derivative};
use super::eval::{evaluate, Tape};
use super::expr::SymExpr;
use super::simplify::{add, div, mul, simplify, sub};
use super::SymError;
use crate::numlin::{gaussian_solve, NumError, NumMat, NumVec};

/// Name of the velocity symbol paired with coordinate `q`.
pub fn velocity_name(q: &str) -> String {
    format!("{q}'")
}

/// Name of the acceleration symbol paired with coordinate `q`.
pub fn acceleration_name(q: &str) -> String {
    format!("{q}''")
}

const RESERVED: &[&str] = &[
    "class",
    "private",
    "end",
    "if",
    "else",
    "switch",
    "case",
    "create",
    "terminate",
    "true",
    "True",
    "false",
    "False",
    "sin",
    "cos",
    "tan",
    "asin",
    "acos",
    "sqrt",
    "dot",
    "cross",
    "norm",
];

/// Whether `name` can be used as a variable in model source.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name)
}

/// Three-component symbolic vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SymVec3 {
    pub x: SymExpr,
    pub y: SymExpr,
    pub z: SymExpr,
}

impl SymVec3 {
    pub fn new(x: impl Into<SymExpr>, y: impl Into<SymExpr>, z: impl Into<SymExpr>) -> Self {
        SymVec3 { x: x.into(), y: y.into(), z: z.into() }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn unit_x() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn unit_y() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub fn unit_z() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn scale(&self, s: &SymExpr) -> Self {
        SymVec3 {
            x: mul(s.clone(), self.x.clone()),
            y: mul(s.clone(), self.y.clone()),
            z: mul(s.clone(), self.z.clone()),
        }
    }

    pub fn add(&self, o: &SymVec3) -> Self {
        SymVec3 {
            x: add(self.x.clone(), o.x.clone()),
            y: add(self.y.clone(), o.y.clone()),
            z: add(self.z.clone(), o.z.clone()),
        }
    }
}

/// a·b, simplified.
pub fn dot3(a: &SymVec3, b: &SymVec3) -> SymExpr {
    simplify(&add(add(mul(a.x.clone(), b.x.clone()), mul(a.y.clone(), b.y.clone())), mul(a.z.clone(), b.z.clone())))
}

/// A mechanical system in generalized coordinates.
#[derive(Debug, Clone)]
pub struct LagrangianSystem {
    coords: Vec<String>,
    params: Vec<(String, f64)>,
    kinetic: SymExpr,
    potential: SymExpr,
    forces: Vec<SymExpr>,
    initial: BTreeMap<String, f64>,
}

impl LagrangianSystem {
    /// Validates names and that the energies only mention coordinates,
    /// velocities and parameters (the potential: no velocities).
    pub fn new(
        coords: Vec<String>,
        params: Vec<(String, f64)>,
        kinetic: SymExpr,
        potential: SymExpr,
    ) -> Result<Self, SymError> {
        let invalid = |m: String| Err(SymError::InvalidSystem(m));
        if coords.is_empty() {
            return invalid("at least one coordinate is required".into());
        }
        let mut names = BTreeSet::new();
        for n in coords.iter().chain(params.iter().map(|(n, _)| n)) {
            if !is_identifier(n) {
                return invalid(format!("`{n}` is not a valid name"));
            }
            if !names.insert(n.clone()) {
                return invalid(format!("`{n}` is declared twice"));
            }
        }
        for (n, v) in &params {
            if !v.is_finite() {
                return invalid(format!("parameter `{n}` must be finite"));
            }
        }
        let n = coords.len();
        let sys = LagrangianSystem {
            coords,
            params,
            kinetic,
            potential,
            forces: vec![SymExpr::zero(); n],
            initial: BTreeMap::new(),
        };
        sys.check_symbols("T", &sys.kinetic, true)?;
        sys.check_symbols("V", &sys.potential, false)?;
        Ok(sys)
    }

    fn check_symbols(&self, what: &str, e: &SymExpr, velocities: bool) -> Result<(), SymError> {
        for s in e.symbols() {
            let ok = self.coords.contains(&s)
                || self.params.iter().any(|(p, _)| *p == s)
                || (velocities && self.coords.iter().any(|q| velocity_name(q) == s));
            if !ok {
                return Err(SymError::InvalidSystem(format!("{what} mentions `{s}`, which is not allowed there")));
            }
        }
        Ok(())
    }

    /// Generalized external forces, one per coordinate.
    pub fn with_forces(mut self, forces: Vec<SymExpr>) -> Result<Self, SymError> {
        if forces.len() != self.coords.len() {
            return Err(SymError::InvalidSystem(format!(
                "{} generalized forces given for {} coordinates",
                forces.len(),
                self.coords.len()
            )));
        }
        for q in &forces {
            self.check_symbols("Q", q, true)?;
        }
        self.forces = forces;
        Ok(self)
    }

    /// Initial value for a coordinate (`q`) or velocity (`q'`), used by
    /// emitted model source. Unset values start at 0.
    pub fn with_initial(mut self, name: &str, value: f64) -> Result<Self, SymError> {
        let known = self.coords.iter().any(|q| q == name || velocity_name(q) == name);
        if !known {
            return Err(SymError::InvalidSystem(format!("`{name}` is neither a coordinate nor a velocity")));
        }
        self.initial.insert(name.to_string(), value);
        Ok(self)
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn kinetic(&self) -> &SymExpr {
        &self.kinetic
    }

    pub fn potential(&self) -> &SymExpr {
        &self.potential
    }

    pub fn forces(&self) -> &[SymExpr] {
        &self.forces
    }

    pub fn initial(&self, name: &str) -> f64 {
        self.initial.get(name).copied().unwrap_or(0.0)
    }

    pub fn velocities(&self) -> Vec<String> {
        self.coords.iter().map(|q| velocity_name(q)).collect()
    }

    pub fn accelerations(&self) -> Vec<String> {
        self.coords.iter().map(|q| acceleration_name(q)).collect()
    }

    /// L = T − V.
    pub fn lagrangian(&self) -> SymExpr {
        sub(self.kinetic.clone(), self.potential.clone())
    }

    /// Total mechanical energy T + V.
    pub fn energy(&self) -> SymExpr {
        simplify(&add(self.kinetic.clone(), self.potential.clone()))
    }

    pub fn param_bindings(&self) -> HashMap<String, f64> {
        self.params.iter().cloned().collect()
    }

    /// Coordinate → velocity and velocity → acceleration.
    pub fn flow(&self) -> BTreeMap<String, String> {
        let mut flow = BTreeMap::new();
        for q in &self.coords {
            flow.insert(q.clone(), velocity_name(q));
            flow.insert(velocity_name(q), acceleration_name(q));
        }
        flow
    }
}

/// Equations of motion in implicit form, `M(q, q̇)·q̈ + c(q, q̇) = 0`.
#[derive(Debug, Clone)]
pub struct ImplicitEOM {
    pub coords: Vec<String>,
    pub params: Vec<(String, f64)>,
    /// rᵢ = d/dt(∂L/∂q̇ᵢ) − ∂L/∂qᵢ − Qᵢ
    pub residuals: Vec<SymExpr>,
    /// Mᵢⱼ = ∂rᵢ/∂q̈ⱼ
    pub mass: Vec<Vec<SymExpr>>,
    /// c = r with q̈ = 0
    pub bias: Vec<SymExpr>,
}

impl ImplicitEOM {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn bindings(&self, state: &HashMap<String, f64>) -> HashMap<String, f64> {
        let mut b: HashMap<String, f64> = self.params.iter().cloned().collect();
        b.extend(state.iter().map(|(k, v)| (k.clone(), *v)));
        b
    }

    pub fn eval_mass(&self, state: &HashMap<String, f64>) -> Result<NumMat, SymError> {
        let b = self.bindings(state);
        let rows = self
            .mass
            .iter()
            .map(|row| row.iter().map(|e| evaluate(e, &b)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NumMat::from_rows(rows)?)
    }

    pub fn eval_bias(&self, state: &HashMap<String, f64>) -> Result<Vec<f64>, SymError> {
        let b = self.bindings(state);
        self.bias.iter().map(|e| evaluate(e, &b)).collect()
    }

    /// Residuals at a state that also binds the accelerations.
    pub fn eval_residuals(&self, state: &HashMap<String, f64>) -> Result<Vec<f64>, SymError> {
        let b = self.bindings(state);
        self.residuals.iter().map(|e| evaluate(e, &b)).collect()
    }
}

fn contains_any(e: &SymExpr, names: &[String]) -> bool {
    let syms = e.symbols();
    names.iter().any(|n| syms.contains(n))
}

/// Builds the residuals and extracts the mass matrix and bias, verifying
/// that the residuals are affine in the accelerations.
pub fn euler_lagrange(sys: &LagrangianSystem) -> Result<ImplicitEOM, SymError> {
    let lagrangian = sys.lagrangian();
    let flow = sys.flow();
    let accels = sys.accelerations();
    let zero_accel: HashMap<String, SymExpr> = accels.iter().map(|a| (a.clone(), SymExpr::zero())).collect();

    let mut residuals = Vec::new();
    for (i, q) in sys.coords.iter().enumerate() {
        let momentum = partial(&lagrangian, &velocity_name(q));
        let r = sub(sub(time_derivative(&momentum, &flow), partial(&lagrangian, q)), sys.forces[i].clone());
        residuals.push(simplify(&r));
    }
    let mass: Vec<Vec<SymExpr>> =
        residuals.iter().map(|r| accels.iter().map(|a| simplify(&partial(r, a))).collect()).collect();
    let bias: Vec<SymExpr> = residuals.iter().map(|r| simplify(&r.substitute(&zero_accel))).collect();
    let eom = ImplicitEOM { coords: sys.coords.clone(), params: sys.params.clone(), residuals, mass, bias };

    // symbolically: no entry of M mentions an acceleration
    let symbolic = eom
        .mass
        .iter()
        .flatten()
        .all(|m| !contains_any(m, &accels) || accels.iter().all(|a| simplify(&partial(m, a)).is_const(0.0)));
    if !symbolic {
        check_affine_numerically(&eom)?;
    }
    Ok(eom)
}

/// Compares r(q̈) against M·q̈ + c at seeded random states.
pub(crate) fn check_affine_numerically(eom: &ImplicitEOM) -> Result<(), SymError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let n = eom.dim();
    let mut checked = 0;
    for _ in 0..10 {
        let mut state = HashMap::new();
        for q in &eom.coords {
            state.insert(q.clone(), rng.gen_range(-3.0..3.0));
            state.insert(velocity_name(q), rng.gen_range(-2.0..2.0));
        }
        let qdd: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (Ok(m), Ok(c)) = (eom.eval_mass(&state), eom.eval_bias(&state)) else { continue };
        for (q, v) in eom.coords.iter().zip(&qdd) {
            state.insert(acceleration_name(q), *v);
        }
        let Ok(r) = eom.eval_residuals(&state) else { continue };
        for i in 0..n {
            let terms: Vec<f64> = (0..n).map(|j| m.get(i, j) * qdd[j]).collect();
            let affine = c[i] + terms.iter().sum::<f64>();
            let scale = 1.0 + r[i].abs() + c[i].abs() + terms.iter().map(|t| t.abs()).sum::<f64>();
            if (r[i] - affine).abs() > 1e-8 * scale {
                return Err(SymError::NonlinearInAccel { coord: eom.coords[i].clone() });
            }
        }
        checked += 1;
    }
    if checked == 0 {
        return Err(SymError::NonlinearInAccel { coord: eom.coords[0].clone() });
    }
    Ok(())
}

fn singular(e: NumError) -> SymError {
    match e {
        NumError::Singular { .. } => SymError::SingularMass,
        other => SymError::Numeric(other),
    }
}

/// Solves `M q̈ = −c` at a state binding coordinates and velocities
/// (parameters default to the system's values).
pub fn accelerations(eom: &ImplicitEOM, state: &HashMap<String, f64>) -> Result<Vec<f64>, SymError> {
    let m = eom.eval_mass(state)?;
    let c = eom.eval_bias(state)?;
    let rhs = NumVec::new(c.iter().map(|v| -v).collect())?;
    Ok(gaussian_solve(&m, &rhs).map_err(singular)?.into_vec())
}

/// Mass matrix, bias and energy compiled to tapes, for fast repeated
/// evaluation (oracle integrations).
#[derive(Debug, Clone)]
pub struct CompiledEom {
    n: usize,
    dynamics: Tape,
    energy: Tape,
    params: Vec<f64>,
    inputs: Vec<f64>,
    scratch: Vec<f64>,
    out: Vec<f64>,
}

impl CompiledEom {
    pub fn new(sys: &LagrangianSystem, eom: &ImplicitEOM) -> Result<Self, SymError> {
        let n = sys.coords.len();
        let mut names: Vec<String> = sys.coords.clone();
        names.extend(sys.velocities());
        names.extend(sys.params.iter().map(|(p, _)| p.clone()));
        let mut outputs: Vec<SymExpr> = eom.mass.iter().flatten().cloned().collect();
        outputs.extend(eom.bias.iter().cloned());
        let dynamics = Tape::compile(&outputs, &names)?;
        let energy = Tape::compile(&[sys.energy()], &names)?;
        Ok(CompiledEom {
            n,
            dynamics,
            energy,
            params: sys.params.iter().map(|(_, v)| *v).collect(),
            inputs: vec![0.0; names.len()],
            scratch: Vec::new(),
            out: vec![0.0; n * n + n],
        })
    }

    fn load(&mut self, q: &[f64], qd: &[f64]) {
        let n = self.n;
        self.inputs[..n].copy_from_slice(q);
        self.inputs[n..2 * n].copy_from_slice(qd);
        self.inputs[2 * n..].copy_from_slice(&self.params);
    }

    pub fn accelerations(&mut self, q: &[f64], qd: &[f64]) -> Result<Vec<f64>, SymError> {
        let n = self.n;
        self.load(q, qd);
        self.dynamics.eval_into(&self.inputs, &mut self.scratch, &mut self.out)?;
        let m = NumMat::from_rows(self.out[..n * n].chunks(n).map(<[f64]>::to_vec).collect())?;
        let rhs = NumVec::new(self.out[n * n..].iter().map(|v| -v).collect())?;
        Ok(gaussian_solve(&m, &rhs).map_err(singular)?.into_vec())
    }

    pub fn mass(&mut self, q: &[f64], qd: &[f64]) -> Result<Vec<Vec<f64>>, SymError> {
        let n = self.n;
        self.load(q, qd);
        self.dynamics.eval_into(&self.inputs, &mut self.scratch, &mut self.out)?;
        Ok(self.out[..n * n].chunks(n).map(<[f64]>::to_vec).collect())
    }

    pub fn energy(&mut self, q: &[f64], qd: &[f64]) -> Result<f64, SymError> {
        self.load(q, qd);
        let mut e = [0.0];
        self.energy.eval_into(&self.inputs, &mut self.scratch, &mut e)?;
        Ok(e[0])
    }

    /// One classical Runge-Kutta step of the first-order system (q, q̇).
    pub fn rk4_step(&mut self, q: &mut [f64], qd: &mut [f64], dt: f64) -> Result<(), SymError> {
        let n = self.n;
        let shifted =
            |base: &[f64], k: &[f64], h: f64| -> Vec<f64> { base.iter().zip(k).map(|(b, k)| b + h * k).collect() };
        let k1v = qd.to_vec();
        let k1a = self.accelerations(q, qd)?;
        let (q2, v2) = (shifted(q, &k1v, dt / 2.0), shifted(qd, &k1a, dt / 2.0));
        let k2a = self.accelerations(&q2, &v2)?;
        let (q3, v3) = (shifted(q, &v2, dt / 2.0), shifted(qd, &k2a, dt / 2.0));
        let k3a = self.accelerations(&q3, &v3)?;
        let (q4, v4) = (shifted(q, &v3, dt), shifted(qd, &k3a, dt));
        let k4a = self.accelerations(&q4, &v4)?;
        for i in 0..n {
            q[i] += dt / 6.0 * (k1v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
            qd[i] += dt / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
        }
        Ok(())
    }
}

fn det(m: &[Vec<SymExpr>]) -> SymExpr {
    let e = |i: usize, j: usize| m[i][j].clone();
    match m.len() {
        1 => e(0, 0),
        2 => sub(mul(e(0, 0), e(1, 1)), mul(e(0, 1), e(1, 0))),
        _ => {
            let minor = |a: usize, b: usize, c: usize, d: usize| sub(mul(e(1, a), e(2, b)), mul(e(1, c), e(2, d)));
            add(sub(mul(e(0, 0), minor(1, 2, 2, 1)), mul(e(0, 1), minor(0, 2, 2, 0))), mul(e(0, 2), minor(0, 1, 1, 0)))
        }
    }
}

/// Closed-form accelerations q̈ = M⁻¹(−c) by Cramer's rule (n ≤ 3).
pub fn explicit_accelerations(eom: &ImplicitEOM) -> Result<Vec<SymExpr>, SymError> {
    let n = eom.dim();
    if n > 3 {
        return Err(SymError::TooManyCoords(n));
    }
    let d = simplify(&det(&eom.mass));
    if d.is_const(0.0) {
        return Err(SymError::SingularSymbolicDet);
    }
    let neg_c: Vec<SymExpr> = eom.bias.iter().map(|c| simplify(&super::simplify::neg(c.clone()))).collect();
    Ok((0..n)
        .map(|i| {
            let replaced: Vec<Vec<SymExpr>> = eom
                .mass
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    row.iter().enumerate().map(|(c, m)| if c == i { neg_c[r].clone() } else { m.clone() }).collect()
                })
                .collect();
            simplify(&div(det(&replaced), d.clone()))
        })
        .collect())
}

/// Model source for a class that integrates the explicit equations of motion.
pub fn emit_explicit_source(sys: &LagrangianSystem, class_name: &str) -> Result<String, SymError> {
    if !is_identifier(class_name) {
        return Err(SymError::InvalidSystem(format!("`{class_name}` is not a valid class name")));
    }
    let n = sys.coords.len();
    if n > 3 {
        return Err(SymError::TooManyCoords(n));
    }
    let eom = euler_lagrange(sys)?;
    let qdd = explicit_accelerations(&eom)?;

    let mut out = String::new();
    let _ = writeln!(out, "// explicit equations of motion derived from T and V");
    let _ = writeln!(out, "class {class_name} ()");
    let _ = writeln!(out, "private");
    for q in &sys.coords {
        let _ = writeln!(out, "  {q} := {}; {}' := {}; {q}'' := 0;", sys.initial(q), q, sys.initial(&velocity_name(q)));
    }
    for (p, v) in &sys.params {
        let _ = writeln!(out, "  {p} := {v};");
    }
    let _ = writeln!(out, "end");
    for (q, e) in sys.coords.iter().zip(&qdd) {
        let _ = writeln!(out, "  {q}'' = {e};");
    }
    let _ = writeln!(out, "end");
    Ok(out)
}
