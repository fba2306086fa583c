//! Expression evaluation against an object's store.

use thiserror::Error;

use super::instance::ObjectInstance;
use super::Value;
use crate::lang::{BinaryOp, Builtin, CaseLabel, Expr, UnaryOp};
use crate::numlin::{apply_builtin, NumError, VecOp};

/// Evaluation failure, before it is annotated with time and statement.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Fault {
    #[error("{0}")]
    Eval(String),
    #[error("{0}")]
    Math(String),
}

impl From<NumError> for Fault {
    fn from(e: NumError) -> Self {
        Fault::Eval(e.to_string())
    }
}

fn type_fault(op: &str, a: &Value, b: &Value) -> Fault {
    Fault::Eval(format!("type mismatch: {} {op} {}", a.type_name(), b.type_name()))
}

/// Evaluates an expression that refers to no variables, such as a
/// constructor argument given on the command line.
pub fn eval_constant(e: &Expr) -> Result<Value, Fault> {
    eval(e, &ObjectInstance::empty())
}

pub fn eval(e: &Expr, obj: &ObjectInstance) -> Result<Value, Fault> {
    match e {
        Expr::Num(v) => Ok(Value::Real(*v)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Str(s) => Ok(Value::Text(s.clone())),
        Expr::Vector(items) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match eval(item, obj)? {
                    Value::Real(v) => out.push(v),
                    other => {
                        return Err(Fault::Eval(format!("vector elements must be real, got {}", other.type_name())))
                    }
                }
            }
            Ok(Value::Vector(out))
        }
        Expr::Matrix(rows) => {
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                let mut r = Vec::with_capacity(row.len());
                for item in row {
                    match eval(item, obj)? {
                        Value::Real(v) => r.push(v),
                        other => {
                            return Err(Fault::Eval(format!("matrix elements must be real, got {}", other.type_name())))
                        }
                    }
                }
                out.push(r);
            }
            Ok(Value::Matrix(out))
        }
        Expr::Var(v) => obj.lookup(v).cloned(),
        Expr::Unary(op, inner) => {
            let v = eval(inner, obj)?;
            match (op, v) {
                (UnaryOp::Neg, Value::Real(x)) => Ok(Value::Real(-x)),
                (UnaryOp::Neg, Value::Vector(x)) => Ok(Value::Vector(x.iter().map(|a| -a).collect())),
                (UnaryOp::Neg, Value::Matrix(m)) => {
                    Ok(Value::Matrix(m.iter().map(|r| r.iter().map(|a| -a).collect()).collect()))
                }
                (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (op, v) => Err(Fault::Eval(format!("cannot apply {op:?} to {}", v.type_name()))),
            }
        }
        Expr::Binary(BinaryOp::And, l, r) => match eval(l, obj)? {
            Value::Bool(false) => Ok(Value::Bool(false)),
            Value::Bool(true) => expect_bool("&&", eval(r, obj)?),
            other => Err(Fault::Eval(format!("`&&` expects bool, got {}", other.type_name()))),
        },
        Expr::Binary(BinaryOp::Or, l, r) => match eval(l, obj)? {
            Value::Bool(true) => Ok(Value::Bool(true)),
            Value::Bool(false) => expect_bool("||", eval(r, obj)?),
            other => Err(Fault::Eval(format!("`||` expects bool, got {}", other.type_name()))),
        },
        Expr::Binary(op, l, r) => binary(*op, eval(l, obj)?, eval(r, obj)?),
        Expr::Call(b, args) => {
            let vals = args.iter().map(|a| eval(a, obj)).collect::<Result<Vec<_>, _>>()?;
            call(*b, vals)
        }
    }
}

fn expect_bool(op: &str, v: Value) -> Result<Value, Fault> {
    match v {
        Value::Bool(_) => Ok(v),
        other => Err(Fault::Eval(format!("`{op}` expects bool, got {}", other.type_name()))),
    }
}

fn binary(op: BinaryOp, a: Value, b: Value) -> Result<Value, Fault> {
    use Value::*;
    match op {
        BinaryOp::Add | BinaryOp::Sub => match (&a, &b) {
            (Real(x), Real(y)) => Ok(Real(if op == BinaryOp::Add { x + y } else { x - y })),
            (Vector(_), Vector(_)) | (Matrix(_), Matrix(_)) => {
                let vop = if op == BinaryOp::Add { VecOp::Add } else { VecOp::Sub };
                Ok(apply_builtin(vop, &[a, b])?)
            }
            _ => Err(type_fault(op.symbol(), &a, &b)),
        },
        BinaryOp::Mul => match (&a, &b) {
            (Real(x), Real(y)) => Ok(Real(x * y)),
            (Real(_), Vector(_) | Matrix(_)) | (Vector(_) | Matrix(_), Real(_)) => {
                Ok(apply_builtin(VecOp::Scale, &[a, b])?)
            }
            (Matrix(_), Vector(_)) => Ok(apply_builtin(VecOp::MatVec, &[a, b])?),
            (Matrix(_), Matrix(_)) => Ok(apply_builtin(VecOp::MatMul, &[a, b])?),
            _ => Err(type_fault("*", &a, &b)),
        },
        BinaryOp::Div => {
            let Real(d) = b else { return Err(type_fault("/", &a, &b)) };
            if d == 0.0 {
                return Err(Fault::Math("division by zero".into()));
            }
            match a {
                Real(x) => Ok(Real(x / d)),
                Vector(v) => Ok(Vector(v.iter().map(|x| x / d).collect())),
                Matrix(m) => Ok(Matrix(m.iter().map(|r| r.iter().map(|x| x / d).collect()).collect())),
                _ => Err(type_fault("/", &a, &Real(d))),
            }
        }
        BinaryOp::Pow => match (&a, &b) {
            (Real(x), Real(y)) => {
                let v = if y.fract() == 0.0 && y.abs() <= i32::MAX as f64 { x.powi(*y as i32) } else { x.powf(*y) };
                if v.is_nan() && !x.is_nan() && !y.is_nan() {
                    return Err(Fault::Math(format!("{x}^{y} is undefined")));
                }
                Ok(Real(v))
            }
            _ => Err(type_fault("^", &a, &b)),
        },
        BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge => match (&a, &b) {
            (Real(x), Real(y)) => Ok(Bool(match op {
                BinaryOp::Lt => x < y,
                BinaryOp::Gt => x > y,
                BinaryOp::Le => x <= y,
                _ => x >= y,
            })),
            _ => Err(type_fault(op.symbol(), &a, &b)),
        },
        BinaryOp::Eq => {
            if a.type_name() != b.type_name() {
                return Err(type_fault("==", &a, &b));
            }
            Ok(Bool(a == b))
        }
        BinaryOp::And | BinaryOp::Or => unreachable!("short-circuit operators are handled in eval"),
    }
}

fn call(b: Builtin, mut args: Vec<Value>) -> Result<Value, Fault> {
    let real = |v: &Value| {
        v.as_real().ok_or_else(|| Fault::Eval(format!("`{}` expects a real argument, got {}", b.name(), v.type_name())))
    };
    match b {
        Builtin::Sin => Ok(Value::Real(real(&args[0])?.sin())),
        Builtin::Cos => Ok(Value::Real(real(&args[0])?.cos())),
        Builtin::Tan => Ok(Value::Real(real(&args[0])?.tan())),
        Builtin::Asin | Builtin::Acos => {
            let x = real(&args[0])?;
            if !(-1.0..=1.0).contains(&x) {
                return Err(Fault::Math(format!("{}({x}) is outside the domain [-1, 1]", b.name())));
            }
            Ok(Value::Real(if b == Builtin::Asin { x.asin() } else { x.acos() }))
        }
        Builtin::Sqrt => {
            let x = real(&args[0])?;
            if x < 0.0 {
                return Err(Fault::Math(format!("sqrt({x}) of a negative number")));
            }
            Ok(Value::Real(x.sqrt()))
        }
        Builtin::Dot => Ok(apply_builtin(VecOp::Dot, &args)?),
        Builtin::Cross => Ok(apply_builtin(VecOp::Cross, &args)?),
        Builtin::Norm => Ok(apply_builtin(VecOp::Norm, &std::mem::take(&mut args))?),
    }
}

/// Whether a `switch` subject matches a case label.
pub(crate) fn label_matches(subject: &Value, label: &CaseLabel) -> bool {
    match (subject, label) {
        (Value::Real(x), CaseLabel::Num(y)) => x == y,
        (Value::Bool(x), CaseLabel::Bool(y)) => x == y,
        (Value::Text(x), CaseLabel::Str(y)) => x == y,
        _ => false,
    }
}
