//! Small dense linear algebra: the vector/matrix builtins of the language and
//! Gaussian elimination with partial pivoting.

use std::fmt;

use thiserror::Error;

use crate::sim::Value;

/// Relative pivot cutoff: a pivot below this fraction of `max|A|` is singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("dimension mismatch in `{op}`: {left} vs {right}")]
    DimensionMismatch { op: &'static str, left: String, right: String },
    #[error("matrix is singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("`{op}` expects numeric vector/matrix operands, got {got}")]
    Type { op: &'static str, got: String },
    #[error("vectors and matrices must be non-empty and rectangular")]
    Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumVec(Vec<f64>);

impl NumVec {
    pub fn new(components: Vec<f64>) -> Result<Self, NumError> {
        if components.is_empty() {
            return Err(NumError::Shape);
        }
        Ok(NumVec(components))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NumMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl NumMat {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, NumError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(NumError::Shape);
        }
        Ok(NumMat { rows: n, cols: m, data: rows.into_iter().flatten().collect() })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        NumMat { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, NumError> {
        if x.len() != self.cols {
            return Err(NumError::DimensionMismatch {
                op: "matvec",
                left: self.shape(),
                right: format!("{}", x.len()),
            });
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn mul_mat(&self, other: &NumMat) -> Result<NumMat, NumError> {
        if self.cols != other.rows {
            return Err(NumError::DimensionMismatch { op: "matmul", left: self.shape(), right: other.shape() });
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(NumMat { rows: self.rows, cols: other.cols, data })
    }

    fn shape(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }
}

impl fmt::Display for NumMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gaussian_solve(a: &NumMat, b: &NumVec) -> Result<NumVec, NumError> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(NumError::DimensionMismatch {
            op: "gaussian_solve",
            left: a.shape(),
            right: format!("{}", b.len()),
        });
    }
    let cutoff = PIVOT_TOLERANCE * a.max_abs();
    let mut m = a.data.clone();
    let mut rhs = b.0.clone();

    for col in 0..n {
        let (pivot_row, pivot) =
            (col..n)
                .map(|r| (r, m[r * n + col].abs()))
                .fold((col, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
        if pivot <= cutoff {
            return Err(NumError::Singular { column: col, pivot });
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            rhs.swap(col, pivot_row);
        }
        let diag = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            m[r * n + col] = 0.0;
            for j in col + 1..n {
                m[r * n + j] -= factor * m[col * n + j];
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / m[i * n + i];
    }
    Ok(NumVec(x))
}

pub fn dot(a: &[f64], b: &[f64]) -> Result<f64, NumError> {
    if a.len() != b.len() {
        return Err(mismatch("dot", a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

pub fn cross(a: &[f64], b: &[f64]) -> Result<Vec<f64>, NumError> {
    if a.len() != 3 || b.len() != 3 {
        return Err(mismatch("cross", a.len(), b.len()));
    }
    Ok(vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn mismatch(op: &'static str, l: usize, r: usize) -> NumError {
    NumError::DimensionMismatch { op, left: l.to_string(), right: r.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecOp {
    Dot,
    Cross,
    Norm,
    Add,
    Sub,
    /// Scalar times vector or matrix (either argument order).
    Scale,
    MatVec,
    MatMul,
}

impl VecOp {
    fn name(self) -> &'static str {
        match self {
            VecOp::Dot => "dot",
            VecOp::Cross => "cross",
            VecOp::Norm => "norm",
            VecOp::Add => "add",
            VecOp::Sub => "sub",
            VecOp::Scale => "scale",
            VecOp::MatVec => "matvec",
            VecOp::MatMul => "matmul",
        }
    }
}

fn zip_with(op: VecOp, a: &Value, b: &Value, f: impl Fn(f64, f64) -> f64) -> Result<Value, NumError> {
    match (a, b) {
        (Value::Vector(x), Value::Vector(y)) => {
            if x.len() != y.len() {
                return Err(mismatch(op.name(), x.len(), y.len()));
            }
            Ok(Value::Vector(x.iter().zip(y).map(|(p, q)| f(*p, *q)).collect()))
        }
        (Value::Matrix(x), Value::Matrix(y)) => {
            if x.len() != y.len() || x[0].len() != y[0].len() {
                return Err(NumError::DimensionMismatch {
                    op: op.name(),
                    left: format!("{}x{}", x.len(), x[0].len()),
                    right: format!("{}x{}", y.len(), y[0].len()),
                });
            }
            Ok(Value::Matrix(x.iter().zip(y).map(|(r, s)| r.iter().zip(s).map(|(p, q)| f(*p, *q)).collect()).collect()))
        }
        _ => Err(type_error(op, a, b)),
    }
}

fn type_error(op: VecOp, a: &Value, b: &Value) -> NumError {
    NumError::Type { op: op.name(), got: format!("{} and {}", a.type_name(), b.type_name()) }
}

/// Applies a vector/matrix operation to interpreter values.
pub fn apply_builtin(op: VecOp, args: &[Value]) -> Result<Value, NumError> {
    let arity = if op == VecOp::Norm { 1 } else { 2 };
    if args.len() != arity {
        return Err(mismatch(op.name(), arity, args.len()));
    }
    match op {
        VecOp::Norm => match &args[0] {
            Value::Vector(v) => Ok(Value::Real(norm(v))),
            other => Err(NumError::Type { op: op.name(), got: other.type_name().into() }),
        },
        VecOp::Dot | VecOp::Cross => match (&args[0], &args[1]) {
            (Value::Vector(a), Value::Vector(b)) if op == VecOp::Dot => Ok(Value::Real(dot(a, b)?)),
            (Value::Vector(a), Value::Vector(b)) => Ok(Value::Vector(cross(a, b)?)),
            (a, b) => Err(type_error(op, a, b)),
        },
        VecOp::Add => zip_with(op, &args[0], &args[1], |x, y| x + y),
        VecOp::Sub => zip_with(op, &args[0], &args[1], |x, y| x - y),
        VecOp::Scale => match (&args[0], &args[1]) {
            (Value::Real(s), Value::Vector(v)) | (Value::Vector(v), Value::Real(s)) => {
                Ok(Value::Vector(v.iter().map(|x| s * x).collect()))
            }
            (Value::Real(s), Value::Matrix(m)) | (Value::Matrix(m), Value::Real(s)) => {
                Ok(Value::Matrix(m.iter().map(|r| r.iter().map(|x| s * x).collect()).collect()))
            }
            (a, b) => Err(type_error(op, a, b)),
        },
        VecOp::MatVec => match (&args[0], &args[1]) {
            (Value::Matrix(m), Value::Vector(v)) => Ok(Value::Vector(NumMat::from_rows(m.clone())?.mul_vec(v)?)),
            (a, b) => Err(type_error(op, a, b)),
        },
        VecOp::MatMul => match (&args[0], &args[1]) {
            (Value::Matrix(a), Value::Matrix(b)) => {
                Ok(Value::Matrix(NumMat::from_rows(a.clone())?.mul_mat(&NumMat::from_rows(b.clone())?)?.to_rows()))
            }
            (a, b) => Err(type_error(op, a, b)),
        },
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn mat(rows: &[&[f64]]) -> NumMat {
        NumMat::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn vec_of(v: &[f64]) -> NumVec {
        NumVec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn builtin_examples() {
        let a = Value::Vector(vec![1.0, 2.0, 3.0]);
        let b = Value::Vector(vec![4.0, 5.0, 6.0]);
        assert_eq!(apply_builtin(VecOp::Dot, &[a, b]).unwrap(), Value::Real(32.0));
        let x = Value::Vector(vec![1.0, 0.0, 0.0]);
        let y = Value::Vector(vec![0.0, 1.0, 0.0]);
        assert_eq!(apply_builtin(VecOp::Cross, &[x, y]).unwrap(), Value::Vector(vec![0.0, 0.0, 1.0]));
        assert_eq!(apply_builtin(VecOp::Norm, &[Value::Vector(vec![3.0, 4.0])]).unwrap(), Value::Real(5.0));
    }

    #[test]
    fn builtin_shape_errors() {
        let short = Value::Vector(vec![1.0, 2.0]);
        let long = Value::Vector(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            apply_builtin(VecOp::Dot, &[short.clone(), long.clone()]),
            Err(NumError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            apply_builtin(VecOp::Cross, &[short.clone(), short]),
            Err(NumError::DimensionMismatch { .. })
        ));
        assert!(matches!(apply_builtin(VecOp::Norm, &[Value::Real(1.0)]), Err(NumError::Type { .. })));
    }

    #[test]
    fn matrix_builtins() {
        let m = Value::Matrix(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let v = Value::Vector(vec![1.0, 1.0]);
        assert_eq!(apply_builtin(VecOp::MatVec, &[m.clone(), v]).unwrap(), Value::Vector(vec![3.0, 7.0]));
        assert_eq!(
            apply_builtin(VecOp::MatMul, &[m.clone(), m.clone()]).unwrap(),
            Value::Matrix(vec![vec![7.0, 10.0], vec![15.0, 22.0]])
        );
        assert_eq!(
            apply_builtin(VecOp::Scale, &[Value::Real(2.0), m]).unwrap(),
            Value::Matrix(vec![vec![2.0, 4.0], vec![6.0, 8.0]])
        );
    }

    #[test]
    fn solve_diagonal() {
        let x = gaussian_solve(&mat(&[&[2.0, 0.0], &[0.0, 4.0]]), &vec_of(&[2.0, 8.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn solve_double_pendulum_rest_system() {
        // 2a + b = -19.62, a + b = -9.81  =>  a = -9.81, b = 0
        let x = gaussian_solve(&mat(&[&[2.0, 1.0], &[1.0, 1.0]]), &vec_of(&[-19.62, -9.81])).unwrap();
        assert!((x.as_slice()[0] + 9.81).abs() < 1e-14);
        assert!(x.as_slice()[1].abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_is_singular() {
        let r = gaussian_solve(&mat(&[&[0.0, 0.0], &[0.0, 0.0]]), &vec_of(&[1.0, 2.0]));
        assert!(matches!(r, Err(NumError::Singular { .. })));
        let r = gaussian_solve(&mat(&[&[1.0, 2.0], &[2.0, 4.0]]), &vec_of(&[1.0, 2.0]));
        assert!(matches!(r, Err(NumError::Singular { .. })));
    }

    #[test]
    fn needs_pivoting() {
        let x = gaussian_solve(&mat(&[&[0.0, 1.0], &[1.0, 0.0]]), &vec_of(&[3.0, 5.0])).unwrap();
        assert_eq!(x.as_slice(), &[5.0, 3.0]);
    }

    #[test]
    fn identity_returns_rhs_exactly() {
        let b = vec_of(&[1.25, -3.5, 1e-300, 7.0]);
        assert_eq!(gaussian_solve(&NumMat::identity(4), &b).unwrap(), b);
    }

    fn arb_system() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        (1usize..=6).prop_flat_map(|n| {
            (prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), n), prop::collection::vec(-10.0f64..10.0, n))
        })
    }

    proptest! {
        #[test]
        fn residual_bound((mut rows, b) in arb_system()) {
            let n = rows.len();
            for (i, r) in rows.iter_mut().enumerate() {
                r[i] += n as f64;
            }
            let a = NumMat::from_rows(rows).unwrap();
            let b = NumVec::new(b).unwrap();
            let x = gaussian_solve(&a, &b).unwrap();
            let ax = a.mul_vec(x.as_slice()).unwrap();
            let res = ax.iter().zip(b.as_slice()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            prop_assert!(res <= 1e-10 * (1.0 + b.norm_inf()));
        }

        #[test]
        fn row_swaps_do_not_change_solution((mut rows, mut b) in arb_system(), i in 0usize..6, j in 0usize..6) {
            let n = rows.len();
            for (k, r) in rows.iter_mut().enumerate() {
                r[k] += n as f64;
            }
            let x = gaussian_solve(&NumMat::from_rows(rows.clone()).unwrap(), &NumVec::new(b.clone()).unwrap()).unwrap();
            let (i, j) = (i % n, j % n);
            rows.swap(i, j);
            b.swap(i, j);
            let y = gaussian_solve(&NumMat::from_rows(rows).unwrap(), &NumVec::new(b).unwrap()).unwrap();
            for (p, q) in x.as_slice().iter().zip(y.as_slice()) {
                prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }
    }
}
