use std::fmt;

/// Runtime value of a model variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Bool(bool),
    Text(String),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Real(_) => "real",
            Value::Bool(_) => "bool",
            Value::Text(_) => "text",
            Value::Vector(_) => "vector",
            Value::Matrix(_) => "matrix",
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Value::Vector(v) => Some(v),
            _ => None,
        }
    }

    /// A zero of the same shape (`Real(0)` for non-numeric values).
    pub fn zero_like(&self) -> Value {
        match self {
            Value::Vector(v) => Value::Vector(vec![0.0; v.len()]),
            Value::Matrix(m) => Value::Matrix(vec![vec![0.0; m[0].len()]; m.len()]),
            _ => Value::Real(0.0),
        }
    }

    /// Numeric components in row-major order; empty for bool/text.
    pub fn components(&self) -> Vec<f64> {
        match self {
            Value::Real(v) => vec![*v],
            Value::Vector(v) => v.clone(),
            Value::Matrix(m) => m.iter().flatten().copied().collect(),
            Value::Bool(_) | Value::Text(_) => Vec::new(),
        }
    }

    /// Rebuilds a value of this shape from row-major components.
    pub fn with_components(&self, comps: &[f64]) -> Value {
        match self {
            Value::Real(_) => Value::Real(comps[0]),
            Value::Vector(_) => Value::Vector(comps.to_vec()),
            Value::Matrix(m) => {
                let w = m[0].len();
                Value::Matrix(comps.chunks(w).map(<[f64]>::to_vec).collect())
            }
            other => other.clone(),
        }
    }

    /// Bitwise equality, so NaN compares equal to itself.
    pub fn same_bits(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Vector(a), Value::Vector(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Value::Matrix(a), Value::Matrix(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(r, s)| r.len() == s.len() && r.iter().zip(s).all(|(x, y)| x.to_bits() == y.to_bits()))
            }
            (a, b) => a == b,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Vector(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "\"{s}\""),
            Value::Vector(v) => {
                let items: Vec<String> = v.iter().map(f64::to_string).collect();
                write!(f, "[{}]", items.join(", "))
            }
            Value::Matrix(m) => {
                let rows: Vec<String> = m
                    .iter()
                    .map(|r| format!("[{}]", r.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")))
                    .collect();
                write!(f, "[{}]", rows.join(", "))
            }
        }
    }
}
