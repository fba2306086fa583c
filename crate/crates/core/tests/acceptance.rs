//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs without the libtest harness so that every line is printed even when
//! output is captured. The process fails if any criterion fails, except for
//! those listed in [`KNOWN_FAILURES`]; a known failure that starts passing is
//! reported as well, so the list cannot go stale.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hybridlang::lang::parse_model;
use hybridlang::models::{
    builtin_source, double_pendulum_lagrangian, gimbal_lagrangian, quad_derivatives, quad_scenario_source,
    GimbalParams, QuadParams, QuadState, QUAD_SCENARIO_CLASS,
};
use hybridlang::numlin::{gaussian_solve, NumError, NumMat, NumVec};
use hybridlang::sim::{
    instantiate, simulate, Integrator, LoopResolution, ObjectInstance, SimConfig, Simulation, Trace, Value,
};
use hybridlang::symcas::{
    accelerations, emit_explicit_source, euler_lagrange, evaluate, partial, simplify, CompiledEom, SymExpr,
};

/// Criteria that fail against the shipped model, with the reason.
///
/// The quadcopter's yaw row is `r' = b(ω₁² + ω₂² − ω₃² − ω₄²)/Izz`; the
/// antisymmetric ω₁/ω₃ perturbation leaves `ω₁² − ω₃² = 4·hover·δ`
/// unbalanced, so `r'` cannot be zero.
const KNOWN_FAILURES: &[(u32, &str)] = &[(5, "yaw torque row is unbalanced by an ω₁/ω₃ perturbation")];

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "listing fidelity", budget: Duration::from_secs(5), check: listing_fidelity },
        Criterion {
            id: 2,
            title: "pendulum correctness",
            budget: Duration::from_secs(10),
            check: pendulum_correctness,
        },
        Criterion {
            id: 3,
            title: "Euler-Lagrange pipeline",
            budget: Duration::from_secs(5),
            check: euler_lagrange_pipeline,
        },
        Criterion {
            id: 4,
            title: "emission equivalence",
            budget: Duration::from_secs(30),
            check: emission_equivalence,
        },
        Criterion {
            id: 5,
            title: "quadcopter equilibrium",
            budget: Duration::from_secs(10),
            check: quadcopter_equilibrium,
        },
        Criterion { id: 6, title: "gimbal derivation", budget: Duration::from_secs(60), check: gimbal_derivation },
        Criterion { id: 7, title: "CAS soundness", budget: Duration::from_secs(30), check: cas_soundness },
        Criterion { id: 8, title: "linear kernel", budget: Duration::from_secs(5), check: linear_kernel },
    ];

    let mut unexpected = Vec::new();
    let mut passed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => {
                Err(format!("{detail}; runtime {:.2}s exceeds {}s", elapsed.as_secs_f64(), c.budget.as_secs()))
            }
            other => other,
        };
        let known = KNOWN_FAILURES.iter().find(|(id, _)| *id == c.id).map(|(_, why)| *why);
        match (&outcome, known) {
            (Ok(detail), None) => {
                passed += 1;
                println!("criterion {} PASS  {} — {detail} [{:.2}s]", c.id, c.title, elapsed.as_secs_f64());
            }
            (Ok(detail), Some(_)) => {
                passed += 1;
                unexpected.push(c.id);
                println!(
                    "criterion {} PASS  {} — {detail} [{:.2}s] (listed as a known failure)",
                    c.id,
                    c.title,
                    elapsed.as_secs_f64()
                );
            }
            (Err(detail), known) => {
                if known.is_none() {
                    unexpected.push(c.id);
                }
                let note = known.map(|why| format!(" (known failure: {why})")).unwrap_or_default();
                println!("criterion {} FAIL  {} — {detail} [{:.2}s]{note}", c.id, c.title, elapsed.as_secs_f64());
            }
        }
    }
    println!("{passed}/{} criteria passed", criteria.len());
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reals(v: &[f64]) -> Vec<Value> {
    v.iter().map(|&x| Value::Real(x)).collect()
}

fn all_finite(trace: &Trace) -> bool {
    trace.rows().iter().all(|(_, row)| row.iter().all(|v| v.components().iter().all(|x| x.is_finite())))
}

// 1 ---------------------------------------------------------------------------

fn listing_fidelity() -> Outcome {
    let cases: [(&str, &str, Vec<Value>); 3] = [
        (
            "quadcopter",
            "QuadCopter",
            vec![Value::from(vec![0.0, 0.0, 0.0]), Value::Real(0.0), Value::Real(0.0), Value::Real(0.0)],
        ),
        ("pendulum", "pendulum", reals(&[1.0])),
        ("double_pendulum", "double_pendulum", reals(&[1.0, 1.0, 1.0, 1.0])),
    ];
    let config = SimConfig::new(1e-3, 5.0);
    let mut rows = 0;
    for (name, entry, args) in cases {
        let model = parse_model(builtin_source(name).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        instantiate(&model, entry, args.clone()).map_err(|e| format!("{name}: {e}"))?;
        let trace = simulate(&model, entry, args, &config).map_err(|e| format!("{name}: {e}"))?;
        check(trace.len() == 5001, || format!("{name}: {} rows", trace.len()))?;
        check(all_finite(&trace), || format!("{name}: non-finite values"))?;
        rows += trace.len();
    }
    Ok(format!("3 listings parsed, loaded and simulated for 5 s ({rows} rows)"))
}

// 2 ---------------------------------------------------------------------------

/// Samples of θ on a 1 ms grid from an RK4 integration of θ'' = (g/l)cos θ.
fn pendulum_rk4(l: f64, dt: f64, end: f64) -> Vec<f64> {
    let g = 9.81;
    let f = |th: f64, w: f64| (w, g / l * th.cos());
    let (mut th, mut w) = (0.0f64, 0.0f64);
    let stride = (1e-3 / dt).round() as usize;
    let mut out = vec![th];
    for i in 1..=(end / dt).round() as usize {
        let (a1, b1) = f(th, w);
        let (a2, b2) = f(th + 0.5 * dt * a1, w + 0.5 * dt * b1);
        let (a3, b3) = f(th + 0.5 * dt * a2, w + 0.5 * dt * b2);
        let (a4, b4) = f(th + dt * a3, w + dt * b3);
        th += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        w += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        if i % stride == 0 {
            out.push(th);
        }
    }
    out
}

fn pendulum_error(dt: f64, integrator: Integrator, oracle: &[f64]) -> Result<f64, String> {
    let model = parse_model(builtin_source("pendulum").unwrap()).map_err(|e| e.to_string())?;
    let config = SimConfig { recorded: Some(vec!["theta".into()]), integrator, ..SimConfig::new(dt, 5.0) };
    let trace = simulate(&model, "pendulum", reals(&[1.0]), &config).map_err(|e| e.to_string())?;
    let theta = trace.reals("theta").ok_or("no theta column")?;
    let stride = (1e-3 / dt).round() as usize;
    let sampled: Vec<f64> = theta.iter().step_by(stride).copied().collect();
    check(sampled.len() == oracle.len(), || format!("{} samples vs {}", sampled.len(), oracle.len()))?;
    Ok(sampled.iter().zip(oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn pendulum_correctness() -> Outcome {
    let oracle = pendulum_rk4(1.0, 1e-5, 5.0);
    let coarse = pendulum_error(1e-3, Integrator::default(), &oracle)?;
    let fine = pendulum_error(5e-4, Integrator::default(), &oracle)?;
    let ratio = coarse / fine;
    // reported for reference only: the pre-update (explicit) Euler variant
    let explicit = pendulum_error(1e-3, Integrator::ExplicitEuler, &oracle)?;
    let detail = format!(
        "max error {coarse:.3e} at dt=1e-3, {fine:.3e} at dt=5e-4, ratio {ratio:.3} \
         (explicit Euler: {explicit:.3e})"
    );
    check(coarse <= 5e-3, || format!("{detail}; error above 5e-3"))?;
    check((1.6..=2.4).contains(&ratio), || format!("{detail}; ratio outside [1.6, 2.4]"))?;
    Ok(detail)
}

// 3 ---------------------------------------------------------------------------

fn bind(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn euler_lagrange_pipeline() -> Outcome {
    let g = 9.81;
    let sys = double_pendulum_lagrangian(1.0, 1.0, 1.0, 1.0, g).map_err(|e| e.to_string())?;
    let eom = euler_lagrange(&sys).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0003);

    // affinity: r(q̈) − r(0) must equal M q̈ for arbitrary accelerations
    let mut affine_err: f64 = 0.0;
    for _ in 0..100 {
        let mut st = HashMap::new();
        for q in ["t_1", "t_2"] {
            st.insert(q.to_string(), rng.gen_range(-PI..PI));
            st.insert(format!("{q}'"), rng.gen_range(-3.0..3.0));
        }
        let m = eom.eval_mass(&st).map_err(|e| e.to_string())?;
        let c = eom.eval_bias(&st).map_err(|e| e.to_string())?;
        let a = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        st.insert("t_1''".into(), a[0]);
        st.insert("t_2''".into(), a[1]);
        let r = eom.eval_residuals(&st).map_err(|e| e.to_string())?;
        for i in 0..2 {
            let lin = m.get(i, 0) * a[0] + m.get(i, 1) * a[1] + c[i];
            affine_err = affine_err.max((r[i] - lin).abs() / (1.0 + lin.abs()));
        }
    }
    check(affine_err <= 1e-12, || format!("residuals not affine in q̈ (deviation {affine_err:.2e})"))?;

    // rest state: [[2,1],[1,1]] q̈ = −[2g, g], solved by Cramer's rule
    let rest = bind(&[("t_1", 0.0), ("t_2", 0.0), ("t_1'", 0.0), ("t_2'", 0.0)]);
    let a = accelerations(&eom, &rest).map_err(|e| e.to_string())?;
    let det = 2.0 * 1.0 - 1.0 * 1.0;
    let hand = [((-2.0 * g) * 1.0 - 1.0 * (-g)) / det, (2.0 * (-g) - (-2.0 * g) * 1.0) / det];
    let rest_err = (a[0] - hand[0]).abs().max((a[1] - hand[1]).abs());
    check(rest_err <= 1e-9, || format!("rest accelerations {a:?}, expected {hand:?}"))?;

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut st = HashMap::new();
        for q in ["t_1", "t_2"] {
            st.insert(q.to_string(), rng.gen_range(-PI..PI));
            st.insert(format!("{q}'"), rng.gen_range(-3.0..3.0));
        }
        let c = eom.eval_bias(&st).map_err(|e| e.to_string())?;
        let qdd = accelerations(&eom, &st).map_err(|e| e.to_string())?;
        st.insert("t_1''".into(), qdd[0]);
        st.insert("t_2''".into(), qdd[1]);
        let r = eom.eval_residuals(&st).map_err(|e| e.to_string())?;
        let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale);
    }
    check(worst <= 1e-9, || format!("back-substituted residual {worst:.2e}·(1+‖c‖∞)"))?;
    Ok(format!(
        "affine (dev {affine_err:.1e}), rest q̈ = ({:.6}, {:.1e}), worst scaled residual {worst:.1e}",
        a[0], a[1]
    ))
}

// 4 ---------------------------------------------------------------------------

fn emission_equivalence() -> Outcome {
    let sys = double_pendulum_lagrangian(1.0, 1.0, 1.0, 1.0, 9.81).map_err(|e| e.to_string())?;
    let emitted = emit_explicit_source(&sys, "derived").map_err(|e| e.to_string())?;
    let derived = parse_model(&emitted).map_err(|e| e.to_string())?;
    let listing = parse_model(builtin_source("double_pendulum").unwrap()).map_err(|e| e.to_string())?;
    let vars: Vec<String> = ["t_1", "t_2", "t_1'", "t_2'"].iter().map(|s| s.to_string()).collect();
    let config = SimConfig { recorded: Some(vars.clone()), ..SimConfig::new(1e-4, 2.0) };
    let a = simulate(&derived, "derived", vec![], &config).map_err(|e| e.to_string())?;
    let b = simulate(&listing, "double_pendulum", reals(&[1.0, 1.0, 1.0, 1.0]), &config).map_err(|e| e.to_string())?;
    check(a.len() == b.len() && a.len() == 20_001, || format!("{} vs {} rows", a.len(), b.len()))?;
    let mut worst: f64 = 0.0;
    for v in &vars {
        let (x, y) = (a.reals(v).unwrap(), b.reals(v).unwrap());
        worst = worst.max(x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
    }
    check(worst <= 1e-6, || format!("max componentwise difference {worst:.3e}"))?;
    // reported for reference only: the listing under read-most-recent resolution
    let single = SimConfig { loops: LoopResolution::SinglePass, ..config };
    let c = simulate(&listing, "double_pendulum", reals(&[1.0, 1.0, 1.0, 1.0]), &single).map_err(|e| e.to_string())?;
    let lag = vars
        .iter()
        .map(|v| a.reals(v).unwrap().iter().zip(&c.reals(v).unwrap()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    Ok(format!("20001 rows, max componentwise difference {worst:.3e} (single-pass listing: {lag:.3e})"))
}

// 5 ---------------------------------------------------------------------------

fn quad_accelerations(quad: &ObjectInstance) -> Vec<f64> {
    let mut out = quad.get("P", 2).and_then(Value::as_vector).map(|v| v.to_vec()).unwrap_or_default();
    for (name, order) in [("phi", 2), ("theta", 2), ("psi", 2), ("p", 1), ("q", 1), ("r", 1)] {
        out.push(quad.get(name, order).and_then(Value::as_real).unwrap_or(f64::NAN));
    }
    out
}

fn quadcopter_equilibrium() -> Outcome {
    let params = QuadParams::default();
    let hover = params.hover_speed();

    let model = parse_model(&quad_scenario_source([0.0; 4])).map_err(|e| e.to_string())?;
    let root = instantiate(&model, QUAD_SCENARIO_CLASS, vec![]).map_err(|e| e.to_string())?;
    let mut sim = Simulation::new(root, SimConfig::new(1e-3, 10.0)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..sim.config().step_count() {
        sim.step().map_err(|e| e.to_string())?;
        let quad = sim.root().child("quad").ok_or("no quad child")?;
        worst = quad_accelerations(quad).iter().fold(worst, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
    }
    check(worst <= 1e-9, || format!("hover accelerations reach {worst:.3e}"))?;
    let hover_detail = format!("hover ω = {hover:.2} rad/s, max |acceleration| over 10 s {worst:.1e}");

    // antisymmetric ω₁/ω₃ perturbation, both natively and in the interpreter
    let delta = 10.0;
    let mut state = QuadState::hovering(hover);
    state.rotors[0] += delta;
    state.rotors[2] -= delta;
    let native = quad_derivatives(&state, &params).map_err(|e| e.to_string())?;
    let model = parse_model(&quad_scenario_source([delta, 0.0, -delta, 0.0])).map_err(|e| e.to_string())?;
    let root = instantiate(&model, QUAD_SCENARIO_CLASS, vec![]).map_err(|e| e.to_string())?;
    let mut sim = Simulation::new(root, SimConfig::new(1e-3, 1e-3)).map_err(|e| e.to_string())?;
    sim.step().map_err(|e| e.to_string())?;
    let interpreted = quad_accelerations(sim.root().child("quad").ok_or("no quad child")?);
    let (p_dot, q_dot, r_dot) = (interpreted[6], interpreted[7], interpreted[8]);
    // sign forced by the torque row l·k·(ω₃² − ω₁²)
    let expected_q_sign = ((hover - delta).powi(2) - (hover + delta).powi(2)).signum();

    let detail = format!(
        "{hover_detail}; perturbed: p' = {p_dot:e}, q' = {q_dot:.4e}, r' = {r_dot:.4e} (native r' = {:.4e})",
        native.r_dot
    );
    check(native.p_dot == 0.0 && p_dot == 0.0, || format!("{detail}; p' ≠ 0"))?;
    check(q_dot.signum() == expected_q_sign && native.q_dot.signum() == expected_q_sign, || {
        format!("{detail}; q' has the wrong sign")
    })?;
    check(native.r_dot == 0.0 && r_dot == 0.0, || format!("{detail}; r' ≠ 0"))?;
    Ok(detail)
}

// 6 ---------------------------------------------------------------------------

fn cholesky(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

/// Total energy written out by hand from the gimbal's link velocities.
fn gimbal_energy(p: &GimbalParams, q: &[f64], w: &[f64]) -> f64 {
    let s2 = q[1].sin();
    let t = 0.5
        * ((p.i1 + p.i2 + p.i3) * w[0] * w[0] + (p.i2 + p.i3) * w[1] * w[1] + p.i3 * w[2] * w[2]
            - 2.0 * p.i3 * s2 * w[0] * w[2]);
    let v = -p.m1 * p.g * p.l2 * q[0].cos() + p.m3 * p.g * p.l3 * q[0].sin() * q[2].sin();
    t + v
}

fn gimbal_derivation() -> Outcome {
    let params = GimbalParams::default();
    let sys = gimbal_lagrangian(&params).map_err(|e| e.to_string())?;
    let eom = euler_lagrange(&sys).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0006);
    let mut accepted = 0;
    while accepted < 100 {
        let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
        if q[1].cos().abs() < 0.05 {
            continue;
        }
        let mut st = HashMap::new();
        for (i, v) in q.iter().enumerate() {
            st.insert(format!("theta_{}", i + 1), *v);
            st.insert(format!("theta_{}'", i + 1), rng.gen_range(-3.0..3.0));
        }
        let m = eom.eval_mass(&st).map_err(|e| e.to_string())?.to_rows();
        let symmetric = (0..3).all(|i| (0..3).all(|j| (m[i][j] - m[j][i]).abs() <= 1e-14 * (1.0 + m[i][j].abs())));
        check(symmetric && cholesky(&m), || format!("mass matrix not SPD at {q:?}: {m:?}"))?;
        accepted += 1;
    }

    let mut c = CompiledEom::new(&sys, &eom).map_err(|e| e.to_string())?;
    let (mut q, mut w) = (vec![0.3, 0.4, 0.2], vec![0.5, -0.3, 0.4]);
    let e0 = gimbal_energy(&params, &q, &w);
    let dt = 1e-5;
    let mut drift: f64 = 0.0;
    let mut f = |q: &[f64], w: &[f64]| c.accelerations(q, w).map_err(|e| e.to_string());
    let axpy = |x: &[f64], h: f64, d: &[f64]| -> Vec<f64> { x.iter().zip(d).map(|(a, b)| a + h * b).collect() };
    for _ in 0..500_000 {
        let (k1q, k1w) = (w.clone(), f(&q, &w)?);
        let (q2, w2) = (axpy(&q, 0.5 * dt, &k1q), axpy(&w, 0.5 * dt, &k1w));
        let (k2q, k2w) = (w2.clone(), f(&q2, &w2)?);
        let (q3, w3) = (axpy(&q, 0.5 * dt, &k2q), axpy(&w, 0.5 * dt, &k2w));
        let (k3q, k3w) = (w3.clone(), f(&q3, &w3)?);
        let (q4, w4) = (axpy(&q, dt, &k3q), axpy(&w, dt, &k3w));
        let (k4q, k4w) = (w4.clone(), f(&q4, &w4)?);
        for i in 0..3 {
            q[i] += dt / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
            w[i] += dt / 6.0 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]);
        }
        drift = drift.max((gimbal_energy(&params, &q, &w) - e0).abs() / e0.abs());
    }
    check(drift <= 1e-6, || format!("relative energy drift {drift:.3e}"))?;
    Ok(format!("100 SPD mass matrices; relative energy drift {drift:.2e} over 5 s (E₀ = {e0:.4})"))
}

// 7 ---------------------------------------------------------------------------

const VARS: [&str; 3] = ["x", "y", "z"];

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> SymExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) {
            SymExpr::sym(VARS[rng.gen_range(0..3)])
        } else {
            SymExpr::constant((rng.gen_range(-3.0f64..3.0) * 100.0).round() / 100.0)
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => a + random_expr(rng, depth - 1),
        1 => a - random_expr(rng, depth - 1),
        2 | 3 => a * random_expr(rng, depth - 1),
        4 => a / random_expr(rng, depth - 1),
        5 => a.powf([2.0, 3.0, -1.0, -2.0, 0.5, 1.5][rng.gen_range(0..6)]),
        6 => a.sin(),
        7 => a.cos(),
        8 => a.tan(),
        9 => a.sqrt(),
        _ => a.asin(),
    }
}

fn eval_at(e: &SymExpr, point: &[f64; 3]) -> Option<f64> {
    let b: HashMap<String, f64> = VARS.iter().map(|v| v.to_string()).zip(point.iter().copied()).collect();
    evaluate(e, &b).ok().filter(|v| v.is_finite())
}

/// Central differences at shrinking steps, extrapolated to zero step
/// (Ridders' method), started from several initial steps; the estimate with
/// the smallest error bound wins. `None` if no step stays in the domain.
fn ridders(f: impl Fn(f64) -> Option<f64>, x: f64) -> Option<f64> {
    const CON: f64 = 1.4;
    const NTAB: usize = 10;
    let central = |h: f64| match (f(x + h), f(x - h)) {
        (Some(a), Some(b)) => (a - b) / (2.0 * h),
        _ => f64::NAN,
    };
    let mut best: Option<(f64, f64)> = None;
    for k in 2..=7 {
        let mut h = 10f64.powi(-k) * x.abs().max(1.0);
        let mut table = vec![vec![f64::NAN; NTAB]; NTAB];
        table[0][0] = central(h);
        if !table[0][0].is_finite() {
            continue;
        }
        let mut err = f64::INFINITY;
        let mut estimate = table[0][0];
        for i in 1..NTAB {
            h /= CON;
            table[0][i] = central(h);
            let mut fac = CON * CON;
            for j in 1..=i {
                table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
                fac *= CON * CON;
                let e = (table[j][i] - table[j - 1][i]).abs().max((table[j][i] - table[j - 1][i - 1]).abs());
                if e <= err {
                    err = e;
                    estimate = table[j][i];
                }
            }
            if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
                break;
            }
        }
        if estimate.is_finite() && best.is_none_or(|(_, e)| err < e) {
            best = Some((estimate, err));
        }
    }
    best.map(|(d, _)| d)
}

/// Sum over variables of how far `e` moves from `v` when that variable is
/// perturbed by a relative 1e-12 either way.
fn input_sensitivity(e: &SymExpr, p: &[f64; 3], v: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        let mut worst: f64 = 0.0;
        for sign in [-1.0, 1.0] {
            let mut q = *p;
            q[i] *= 1.0 + sign * 1e-12;
            worst = worst.max(eval_at(e, &q).map_or(f64::INFINITY, |u| (u - v).abs()));
        }
        total += worst;
    }
    total
}

fn cas_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0007);
    let (mut tested, mut skipped, mut worst_fd) = (0, 0, 0.0f64);
    let mut points_checked = 0u64;
    let mut worst_simplify = 0.0f64;
    let mut undetermined = 0u64;
    while tested < 1000 {
        let e = random_expr(&mut rng, 5);
        let var = rng.gen_range(0..3);
        let point: [f64; 3] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let d = simplify(&partial(&e, VARS[var]));

        let Some(f0) = eval_at(&e, &point) else {
            skipped += 1;
            continue;
        };
        let Some(sym) = eval_at(&d, &point) else {
            skipped += 1;
            continue;
        };
        let Some(fd) = ridders(
            |x| {
                let mut p = point;
                p[var] = x;
                eval_at(&e, &p)
            },
            point[var],
        ) else {
            skipped += 1;
            continue;
        };
        let err = (fd - sym).abs() / 1f64.max(sym.abs()).max(f0.abs());
        check(err <= 1e-6, || {
            format!("∂/∂{} of {e} at {point:?}: fd {fd:e} vs symbolic {sym:e} (rel {err:.2e})", VARS[var])
        })?;
        worst_fd = worst_fd.max(err);

        let s = simplify(&e);
        for _ in 0..1000 {
            let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let Some(v) = eval_at(&e, &p) else { continue };
            let w = eval_at(&s, &p)
                .ok_or_else(|| format!("simplify({e}) = {s} fails at {p:?} where the original is {v}"))?;
            let rel = (v - w).abs() / v.abs().max(1.0);
            if rel > 1e-9 {
                // Rewrites change rounding. A mismatch is only excused where the
                // original is not determined in double precision at all: a
                // 1e-12 relative nudge of the inputs already moves it by more
                // than 1e-6 (e.g. the cosine of a number near 1e16).
                let spread = input_sensitivity(&e, &p, v);
                check(spread > 1e-6 * v.abs().max(1.0), || {
                    format!("simplify({e}) = {s} at {p:?}: {v} vs {w} (input sensitivity {spread:e})")
                })?;
                undetermined += 1;
                continue;
            }
            worst_simplify = worst_simplify.max(rel);
            points_checked += 1;
        }
        tested += 1;
    }
    Ok(format!(
        "1000 expressions ({skipped} draws outside the domain skipped), worst derivative error {worst_fd:.2e}; \
         simplify checked at {points_checked} points, worst deviation {worst_simplify:.1e} \
         ({undetermined} numerically undetermined points excluded)"
    ))
}

// 8 ---------------------------------------------------------------------------

fn linear_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] += n as f64;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let a = NumMat::from_rows(rows.clone()).map_err(|e| e.to_string())?;
        let x = gaussian_solve(&a, &NumVec::new(b.clone()).unwrap()).map_err(|e| e.to_string())?;
        let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (row, bi) in rows.iter().zip(&b) {
            let ax: f64 = row.iter().zip(x.as_slice()).map(|(p, q)| p * q).sum();
            worst = worst.max((ax - bi).abs() / (1.0 + bnorm));
        }
    }
    check(worst <= 1e-10, || format!("scaled residual {worst:.3e}"))?;
    let zero = NumMat::from_rows(vec![vec![0.0; 3]; 3]).unwrap();
    let singular = gaussian_solve(&zero, &NumVec::new(vec![1.0, 2.0, 3.0]).unwrap());
    check(matches!(singular, Err(NumError::Singular { .. })), || format!("zero matrix gave {singular:?}"))?;
    Ok(format!("1000 systems up to 6×6, worst scaled residual {worst:.2e}; zero matrix rejected as singular"))
}
