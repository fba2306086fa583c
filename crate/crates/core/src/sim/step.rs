//! The three-phase step.

use std::sync::Arc;

use super::eval::{eval, label_matches, Fault};
use super::instance::{ObjectInstance, VarKey};
use super::{Integrator, LoopResolution, SimConfig, SimError, Value};
use crate::lang::{parse_expression, ClassDef, Expr, Pos, Stmt, StmtKind, VarRef};
use crate::numlin::{gaussian_solve, NumMat, NumVec};

const NEWTON_MAX_ITERATIONS: usize = 20;
const NEWTON_TOLERANCE: f64 = 1e-12;

/// A running simulation: the object tree plus the step clock.
#[derive(Debug, Clone)]
pub struct Simulation {
    root: ObjectInstance,
    config: SimConfig,
    /// Every object in traversal order (parent before child), with its class.
    objects: Vec<(Vec<usize>, Arc<ClassDef>)>,
    columns: Vec<String>,
    recorded: Vec<(Vec<usize>, VarKey)>,
    steps: u64,
}

/// A continuous equation selected for this step.
struct Equation<'a> {
    obj: &'a [usize],
    lhs: &'a VarRef,
    rhs: &'a Expr,
    pos: Pos,
}

fn annotate(time: f64, pos: Pos) -> impl Fn(Fault) -> SimError {
    move |f| match f {
        Fault::Eval(message) => SimError::Eval { time, pos, message },
        Fault::Math(message) => SimError::Math { time, pos, message },
    }
}

impl Simulation {
    pub fn new(root: ObjectInstance, config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mut objects = Vec::new();
        collect_objects(&root, &mut Vec::new(), &mut objects);

        let mut columns = Vec::new();
        let mut recorded = Vec::new();
        match &config.recorded {
            Some(paths) => {
                for path in paths {
                    let var = match parse_expression(path) {
                        Ok(Expr::Var(v)) => v,
                        _ => return Err(SimError::Config(format!("`{path}` is not a variable path"))),
                    };
                    let (idx, key) =
                        root.resolve(&var).map_err(|f| SimError::Config(format!("cannot record `{path}`: {f}")))?;
                    if root.descend(&idx).store().get(&key).is_none() {
                        return Err(SimError::Config(format!("cannot record `{path}`: no such variable")));
                    }
                    columns.push(var.to_string());
                    recorded.push((idx, key));
                }
            }
            None => {
                for (key, value) in root.store() {
                    if matches!(value, Value::Real(_) | Value::Vector(_)) {
                        columns.push(key.to_string());
                        recorded.push((Vec::new(), key.clone()));
                    }
                }
            }
        }

        Ok(Simulation { root, config, objects, columns, recorded, steps: 0 })
    }

    pub fn root(&self) -> &ObjectInstance {
        &self.root
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Simulated time, computed as `steps * dt` so it does not drift.
    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// Current values of the recorded variables, in column order.
    pub fn sample(&self) -> Vec<Value> {
        self.recorded.iter().map(|(idx, key)| self.root.descend(idx).store()[key].clone()).collect()
    }

    /// Advances the state by one step of `config.dt`.
    pub fn step(&mut self) -> Result<(), SimError> {
        let time = self.time();
        let dt = self.config.dt;

        let mut equations = Vec::new();
        for (path, class) in &self.objects {
            discrete_phase(&class.body, path, &mut self.root, time, &mut equations)?;
        }

        match self.config.loops {
            LoopResolution::SinglePass => sweep(&mut self.root, &equations, time)?,
            LoopResolution::Simultaneous => solve_simultaneous(&mut self.root, &equations, time)?,
        }

        for (path, class) in &self.objects {
            integrate(self.root.descend_mut(path), self.config.integrator, dt).map_err(annotate(time, class.pos))?;
        }

        self.steps += 1;
        Ok(())
    }
}

fn collect_objects(obj: &ObjectInstance, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Arc<ClassDef>)>) {
    out.push((path.clone(), obj.class.clone()));
    for (i, (_, child)) in obj.children().enumerate() {
        path.push(i);
        collect_objects(child, path, out);
        path.pop();
    }
}

/// Runs guards and discrete assignments in textual order and collects the
/// continuous equations of the branches taken.
fn discrete_phase<'a>(
    stmts: &'a [Stmt],
    path: &'a [usize],
    root: &mut ObjectInstance,
    time: f64,
    equations: &mut Vec<Equation<'a>>,
) -> Result<(), SimError> {
    for s in stmts {
        let fail = annotate(time, s.pos);
        match &s.kind {
            StmtKind::Continuous { lhs, rhs } => equations.push(Equation { obj: path, lhs, rhs, pos: s.pos }),
            StmtKind::Discrete { lhs, rhs } => {
                let obj = root.descend_mut(path);
                let v = eval(rhs, obj).map_err(&fail)?;
                obj.assign(lhs, v).map_err(&fail)?;
            }
            StmtKind::If { cond, then_branch, else_branch } => match eval(cond, root.descend(path)).map_err(&fail)? {
                Value::Bool(true) => discrete_phase(then_branch, path, root, time, equations)?,
                Value::Bool(false) => {
                    if let Some(e) = else_branch {
                        discrete_phase(e, path, root, time, equations)?;
                    }
                }
                other => {
                    return Err(fail(Fault::Eval(format!("`if` condition must be bool, got {}", other.type_name()))))
                }
            },
            StmtKind::Switch { subject, cases } => {
                let v = eval(subject, root.descend(path)).map_err(&fail)?;
                if let Some((_, branch)) = cases.iter().find(|(label, _)| label_matches(&v, label)) {
                    discrete_phase(branch, path, root, time, equations)?;
                }
            }
            StmtKind::Create { .. } => {
                return Err(SimError::Unsupported { pos: s.pos, what: "`create` outside `private`".into() })
            }
            StmtKind::Terminate { .. } => return Err(SimError::Unsupported { pos: s.pos, what: "`terminate`".into() }),
        }
    }
    Ok(())
}

/// Evaluates every equation once, in order; reads see the latest writes.
fn sweep(root: &mut ObjectInstance, equations: &[Equation<'_>], time: f64) -> Result<(), SimError> {
    for eq in equations {
        let obj = root.descend_mut(eq.obj);
        let fail = annotate(time, eq.pos);
        let v = eval(eq.rhs, obj).map_err(&fail)?;
        obj.assign(eq.lhs, v).map_err(&fail)?;
    }
    Ok(())
}

/// Distinct absolute target locations, and for each the first equation writing it.
fn targets(root: &ObjectInstance, equations: &[Equation<'_>]) -> Vec<(Vec<usize>, VarKey, Pos)> {
    let mut out: Vec<(Vec<usize>, VarKey, Pos)> = Vec::new();
    for eq in equations {
        // a bad path fails later with a positioned error from the sweep
        let Ok((rel, key)) = root.descend(eq.obj).resolve(eq.lhs) else { continue };
        let mut abs = eq.obj.to_vec();
        abs.extend(rel);
        if !out.iter().any(|(p, k, _)| *p == abs && *k == key) {
            out.push((abs, key, eq.pos));
        }
    }
    out
}

fn read(root: &ObjectInstance, targets: &[(Vec<usize>, VarKey, Pos)]) -> Vec<Value> {
    targets.iter().map(|(p, k, _)| root.descend(p).store()[k].clone()).collect()
}

/// Resolves equations that read targets written later (or by themselves).
///
/// Two sweeps that agree bit for bit mean every read already saw its final
/// value. Otherwise the targets are the unknowns of `F(x) = x`, where `F` is
/// one sweep, and Newton iteration with a finite-difference Jacobian solves it.
fn solve_simultaneous(root: &mut ObjectInstance, equations: &[Equation<'_>], time: f64) -> Result<(), SimError> {
    sweep(root, equations, time)?;
    let targets = targets(root, equations);
    let first = read(root, &targets);
    sweep(root, equations, time)?;
    let second = read(root, &targets);
    let Some(changed) = first.iter().zip(&second).position(|(a, b)| !a.same_bits(b)) else {
        return Ok(());
    };
    let fail = |message: String| SimError::Eval { time, pos: targets[changed].2, message };

    let layout: Vec<usize> = second.iter().map(|v| v.components().len()).collect();
    let flatten = |values: &[Value]| -> Result<Vec<f64>, SimError> {
        let mut out = Vec::new();
        for (i, (v, (&n, t))) in values.iter().zip(layout.iter().zip(&second)).enumerate() {
            let c = v.components();
            if c.len() != n || v.type_name() != t.type_name() {
                return Err(fail(format!("equation target `{}` changes shape between evaluations", targets[i].1)));
            }
            out.extend(c);
        }
        Ok(out)
    };
    let apply = |root: &mut ObjectInstance, x: &[f64]| -> Result<Vec<f64>, SimError> {
        let mut offset = 0;
        for ((path, key, _), (template, &n)) in targets.iter().zip(second.iter().zip(&layout)) {
            if n > 0 {
                let v = template.with_components(&x[offset..offset + n]);
                root.descend_mut(path).store_mut().insert(key.clone(), v);
                offset += n;
            }
        }
        sweep(root, equations, time)?;
        flatten(&read(root, &targets))
    };

    let mut x = flatten(&second)?;
    let n = x.len();
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let fx = apply(root, &x)?;
        let g: Vec<f64> = fx.iter().zip(&x).map(|(f, x)| f - x).collect();
        if g.iter().zip(&x).all(|(g, x)| g.abs() <= NEWTON_TOLERANCE * (1.0 + x.abs())) {
            // the last sweep left F(x) in the store; non-numeric targets must agree too
            let settled = read(root, &targets);
            if let Some(i) = settled.iter().zip(&second).position(|(a, b)| a.components().is_empty() && a != b) {
                return Err(fail(format!("non-numeric target `{}` does not settle", targets[i].1)));
            }
            return Ok(());
        }
        let mut jac = NumMat::from_rows(vec![vec![0.0; n]; n]).map_err(|e| fail(e.to_string()))?;
        for j in 0..n {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let fp = apply(root, &xp)?;
            for i in 0..n {
                let gp = fp[i] - xp[i];
                jac.set(i, j, (gp - g[i]) / h);
            }
        }
        let rhs = NumVec::new(g.iter().map(|v| -v).collect()).map_err(|e| fail(e.to_string()))?;
        let dx = gaussian_solve(&jac, &rhs)
            .map_err(|e| fail(format!("continuous equations form a loop with no unique solution ({e})")))?;
        for (xi, d) in x.iter_mut().zip(dx.as_slice()) {
            *xi += d;
        }
    }
    Err(fail(format!("continuous equations form a loop that did not converge in {NEWTON_MAX_ITERATIONS} iterations")))
}

fn advance(lo: &Value, hi: &Value, dt: f64) -> Result<Value, Fault> {
    let (a, b) = (lo.components(), hi.components());
    if a.is_empty() || a.len() != b.len() || lo.type_name() != hi.type_name() {
        return Err(Fault::Eval(format!("cannot integrate {} by a {} derivative", lo.type_name(), hi.type_name())));
    }
    let out: Vec<f64> = a.iter().zip(&b).map(|(x, d)| x + d * dt).collect();
    Ok(lo.with_components(&out))
}

fn integrate(obj: &mut ObjectInstance, integrator: Integrator, dt: f64) -> Result<(), Fault> {
    for (name, n) in obj.integrated_variables() {
        let key = |k: u32| VarKey::new(name.as_str(), k);
        match integrator {
            Integrator::SemiImplicitEuler => {
                for k in (0..n).rev() {
                    let next = advance(&obj.store()[&key(k)], &obj.store()[&key(k + 1)], dt)?;
                    obj.store_mut().insert(key(k), next);
                }
            }
            Integrator::ExplicitEuler => {
                let before: Vec<Value> = (0..=n).map(|k| obj.store()[&key(k)].clone()).collect();
                for k in (0..n).rev() {
                    let next = advance(&before[k as usize], &before[k as usize + 1], dt)?;
                    obj.store_mut().insert(key(k), next);
                }
            }
        }
    }
    Ok(())
}
