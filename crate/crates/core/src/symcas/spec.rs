//! Reader for Lagrangian description files.
//!
//! ```text
//! // simple pendulum
//! coords theta
//! param m = 1
//! param l = 1
//! param g = 9.81
//! T = 0.5*m*(l*theta')^2
//! V = -m*g*l*sin(theta)
//! init theta = 0.1
//! ```
//!
//! One statement per line; `//` starts a comment. Expressions use the
//! modeling language's expression syntax; `q'` is the velocity of `q`.

use super::expr::{Func, SymExpr};
use super::lagrange::{velocity_name, LagrangianSystem};
use super::simplify::{add, div, mul, neg, pow, simplify, sub};
use super::SymError;
use crate::lang::{parse_expression, BinaryOp, Builtin, Expr, UnaryOp};

/// Converts a scalar language expression to a symbolic one.
pub fn from_lang_expr(e: &Expr) -> Result<SymExpr, String> {
    Ok(match e {
        Expr::Num(v) => SymExpr::constant(*v),
        Expr::Var(v) => {
            if v.path.len() != 1 {
                return Err(format!("`{v}`: object paths are not allowed here"));
            }
            match v.order {
                0 => SymExpr::sym(v.name()),
                1 => SymExpr::sym(velocity_name(v.name())),
                _ => return Err(format!("`{v}`: only first derivatives (velocities) may appear")),
            }
        }
        Expr::Unary(UnaryOp::Neg, x) => neg(from_lang_expr(x)?),
        Expr::Binary(op, a, b) => {
            let (x, y) = (from_lang_expr(a)?, from_lang_expr(b)?);
            match op {
                BinaryOp::Add => add(x, y),
                BinaryOp::Sub => sub(x, y),
                BinaryOp::Mul => mul(x, y),
                BinaryOp::Div => div(x, y),
                BinaryOp::Pow => match simplify(&y).as_const() {
                    Some(k) => pow(x, k),
                    None => return Err(format!("exponent `{b}` must be a constant")),
                },
                _ => return Err(format!("operator `{}` is not allowed in energy expressions", op.symbol())),
            }
        }
        Expr::Call(f, args) => {
            let func = match f {
                Builtin::Sin => Func::Sin,
                Builtin::Cos => Func::Cos,
                Builtin::Tan => Func::Tan,
                Builtin::Sqrt => Func::Sqrt,
                Builtin::Asin => Func::Asin,
                other => return Err(format!("function `{}` is not supported here", other.name())),
            };
            from_lang_expr(&args[0])?.apply(func)
        }
        other => return Err(format!("`{other}` is not a scalar expression")),
    })
}

fn constant(src: &str) -> Result<f64, String> {
    let e = parse_expression(src).map_err(|e| e.to_string())?;
    simplify(&from_lang_expr(&e)?).as_const().ok_or_else(|| format!("`{src}` is not a constant"))
}

fn symbolic(src: &str) -> Result<SymExpr, String> {
    let e = parse_expression(src).map_err(|e| e.to_string())?;
    from_lang_expr(&e)
}

/// Parses a Lagrangian description.
pub fn parse_lagrangian(source: &str) -> Result<LagrangianSystem, SymError> {
    let mut coords: Option<(usize, Vec<String>)> = None;
    let mut params: Vec<(String, f64)> = Vec::new();
    let mut kinetic: Option<SymExpr> = None;
    let mut potential: Option<SymExpr> = None;
    let mut forces: Option<(usize, Vec<SymExpr>)> = None;
    let mut inits: Vec<(usize, String, f64)> = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| SymError::Spec { line, message };
        let text = raw.split("//").next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        let rest = rest.trim();
        let assignment = |s: &str| -> Result<(String, String), SymError> {
            let (name, value) = s.split_once('=').ok_or_else(|| err("expected `NAME = VALUE`".into()))?;
            Ok((name.trim().to_string(), value.trim().to_string()))
        };
        match head {
            "coords" => {
                if coords.is_some() {
                    return Err(err("`coords` given twice".into()));
                }
                let names: Vec<String> = rest
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
                if names.is_empty() {
                    return Err(err("`coords` needs at least one name".into()));
                }
                coords = Some((line, names));
            }
            "param" => {
                let (name, value) = assignment(rest)?;
                params.push((name, constant(&value).map_err(err)?));
            }
            "init" => {
                let (name, value) = assignment(rest)?;
                inits.push((line, name, constant(&value).map_err(err)?));
            }
            _ => {
                let (name, value) = assignment(text)?;
                match name.as_str() {
                    "T" | "V" => {
                        let slot = if name == "T" { &mut kinetic } else { &mut potential };
                        if slot.is_some() {
                            return Err(err(format!("`{name}` given twice")));
                        }
                        *slot = Some(symbolic(&value).map_err(err)?);
                    }
                    "Q" => {
                        let e = parse_expression(&value).map_err(|e| err(e.to_string()))?;
                        let Expr::Vector(items) = e else {
                            return Err(err("`Q` must be a list `[EXPR, ...]`".into()));
                        };
                        let q = items.iter().map(from_lang_expr).collect::<Result<Vec<_>, _>>().map_err(err)?;
                        forces = Some((line, q));
                    }
                    _ => return Err(err(format!("unknown statement `{head}`"))),
                }
            }
        }
    }

    let missing = |what: &str| SymError::Spec { line: 0, message: format!("missing `{what}`") };
    let (coords_line, coords) = coords.ok_or_else(|| missing("coords"))?;
    let kinetic = kinetic.ok_or_else(|| missing("T"))?;
    let potential = potential.ok_or_else(|| missing("V"))?;
    let at = |line: usize| move |e: SymError| SymError::Spec { line, message: e.to_string() };
    let mut sys = LagrangianSystem::new(coords, params, kinetic, potential).map_err(at(coords_line))?;
    if let Some((line, q)) = forces {
        sys = sys.with_forces(q).map_err(at(line))?;
    }
    for (line, name, value) in inits {
        sys = sys.with_initial(&name, value).map_err(at(line))?;
    }
    Ok(sys)
}
