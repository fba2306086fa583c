//! Symbolic expression trees.
//!
//! Nodes are reference counted, so derivatives and substitutions share
//! subtrees instead of copying them; traversals memoize on node identity.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops;
use std::sync::Arc;

use super::SymError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Asin,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Asin => "asin",
        }
    }

    /// Applies the function, reporting domain violations.
    pub fn apply(self, x: f64) -> Result<f64, SymError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Tan => Ok(x.tan()),
            Func::Sqrt if x < 0.0 => Err(SymError::Math(format!("sqrt({x}) of a negative number"))),
            Func::Sqrt => Ok(x.sqrt()),
            Func::Asin if !(-1.0..=1.0).contains(&x) => {
                Err(SymError::Math(format!("asin({x}) is outside the domain [-1, 1]")))
            }
            Func::Asin => Ok(x.asin()),
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Sym(String),
    Add(SymExpr, SymExpr),
    Sub(SymExpr, SymExpr),
    Mul(SymExpr, SymExpr),
    Div(SymExpr, SymExpr),
    /// Power with a constant exponent.
    Pow(SymExpr, f64),
    Fun(Func, SymExpr),
}

/// An immutable, cheaply clonable symbolic expression.
#[derive(Clone)]
pub struct SymExpr(Arc<Node>);

impl SymExpr {
    /// A constant; negative zero is normalized to zero.
    pub fn constant(v: f64) -> Self {
        SymExpr(Arc::new(Node::Const(if v == 0.0 { 0.0 } else { v })))
    }

    pub fn sym(name: impl Into<String>) -> Self {
        SymExpr(Arc::new(Node::Sym(name.into())))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// Builds a node without any rewriting.
    pub fn from_node(node: Node) -> Self {
        SymExpr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }

    pub fn powf(&self, exponent: f64) -> Self {
        Self::from_node(Node::Pow(self.clone(), exponent))
    }

    pub fn apply(&self, f: Func) -> Self {
        Self::from_node(Node::Fun(f, self.clone()))
    }

    pub fn sin(&self) -> Self {
        self.apply(Func::Sin)
    }

    pub fn cos(&self) -> Self {
        self.apply(Func::Cos)
    }

    pub fn tan(&self) -> Self {
        self.apply(Func::Tan)
    }

    pub fn sqrt(&self) -> Self {
        self.apply(Func::Sqrt)
    }

    pub fn asin(&self) -> Self {
        self.apply(Func::Asin)
    }

    /// Every symbol name appearing in the expression.
    pub fn symbols(&self) -> BTreeSet<String> {
        fn go(e: &SymExpr, seen: &mut std::collections::HashSet<usize>, out: &mut BTreeSet<String>) {
            if !seen.insert(e.id()) {
                return;
            }
            match e.node() {
                Node::Const(_) => {}
                Node::Sym(s) => {
                    out.insert(s.clone());
                }
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    go(a, seen, out);
                    go(b, seen, out);
                }
                Node::Pow(a, _) | Node::Fun(_, a) => go(a, seen, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Default::default(), &mut out);
        out
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols().contains(name)
    }

    /// Number of nodes when the expression is viewed as a tree (shared
    /// subtrees counted each time they occur), saturating.
    pub fn tree_size(&self) -> u64 {
        fn go(e: &SymExpr, memo: &mut HashMap<usize, u64>) -> u64 {
            if let Some(&n) = memo.get(&e.id()) {
                return n;
            }
            let n = match e.node() {
                Node::Const(_) | Node::Sym(_) => 1,
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    go(a, memo).saturating_add(go(b, memo)).saturating_add(1)
                }
                Node::Pow(a, _) | Node::Fun(_, a) => go(a, memo).saturating_add(1),
            };
            memo.insert(e.id(), n);
            n
        }
        go(self, &mut HashMap::new())
    }

    /// Replaces symbols by expressions.
    pub fn substitute(&self, map: &HashMap<String, SymExpr>) -> SymExpr {
        fn go(e: &SymExpr, map: &HashMap<String, SymExpr>, memo: &mut HashMap<usize, SymExpr>) -> SymExpr {
            if let Some(r) = memo.get(&e.id()) {
                return r.clone();
            }
            let r = match e.node() {
                Node::Const(_) => e.clone(),
                Node::Sym(s) => map.get(s).cloned().unwrap_or_else(|| e.clone()),
                Node::Add(a, b) => SymExpr::from_node(Node::Add(go(a, map, memo), go(b, map, memo))),
                Node::Sub(a, b) => SymExpr::from_node(Node::Sub(go(a, map, memo), go(b, map, memo))),
                Node::Mul(a, b) => SymExpr::from_node(Node::Mul(go(a, map, memo), go(b, map, memo))),
                Node::Div(a, b) => SymExpr::from_node(Node::Div(go(a, map, memo), go(b, map, memo))),
                Node::Pow(a, k) => SymExpr::from_node(Node::Pow(go(a, map, memo), *k)),
                Node::Fun(f, a) => SymExpr::from_node(Node::Fun(*f, go(a, map, memo))),
            };
            memo.insert(e.id(), r.clone());
            r
        }
        go(self, map, &mut HashMap::new())
    }
}

/// Structural equality; constants compare by bit pattern.
impl PartialEq for SymExpr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Sym(a), Node::Sym(b)) => a == b,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b), Node::Div(c, d)) => a == c && b == d,
            (Node::Pow(a, k), Node::Pow(b, j)) => k.to_bits() == j.to_bits() && a == b,
            (Node::Fun(f, a), Node::Fun(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Eq for SymExpr {}

impl From<f64> for SymExpr {
    fn from(v: f64) -> Self {
        SymExpr::constant(v)
    }
}

impl From<&str> for SymExpr {
    fn from(name: &str) -> Self {
        SymExpr::sym(name)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait<SymExpr> for SymExpr {
            type Output = SymExpr;
            fn $method(self, rhs: SymExpr) -> SymExpr {
                SymExpr::from_node(Node::$variant(self, rhs))
            }
        }
        impl ops::$trait<&SymExpr> for &SymExpr {
            type Output = SymExpr;
            fn $method(self, rhs: &SymExpr) -> SymExpr {
                SymExpr::from_node(Node::$variant(self.clone(), rhs.clone()))
            }
        }
        impl ops::$trait<f64> for SymExpr {
            type Output = SymExpr;
            fn $method(self, rhs: f64) -> SymExpr {
                SymExpr::from_node(Node::$variant(self, SymExpr::constant(rhs)))
            }
        }
        impl ops::$trait<SymExpr> for f64 {
            type Output = SymExpr;
            fn $method(self, rhs: SymExpr) -> SymExpr {
                SymExpr::from_node(Node::$variant(SymExpr::constant(self), rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl ops::Neg for SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        SymExpr::constant(-1.0) * self
    }
}

impl ops::Neg for &SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        SymExpr::constant(-1.0) * self.clone()
    }
}

// Printing uses the modeling language's expression syntax, so emitted
// equations can be pasted into model source.

fn prec(e: &SymExpr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 3,
        Node::Mul(..) | Node::Div(..) => 4,
        Node::Pow(..) => 6,
        Node::Const(v) if v.is_sign_negative() => 0,
        _ => 7,
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.is_sign_negative() {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &SymExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &SymExpr, op: &str, b: &SymExpr, p: u8| {
            // left-associative: the right operand needs parentheses at equal precedence
            write_operand(f, a, prec(a) < p && prec(a) != 0)?;
            write!(f, " {op} ")?;
            write_operand(f, b, prec(b) <= p && prec(b) != 0)
        };
        match self.node() {
            Node::Const(v) => write_number(f, *v),
            Node::Sym(s) => f.write_str(s),
            Node::Add(a, b) => binary(f, a, "+", b, 3),
            Node::Sub(a, b) => binary(f, a, "-", b, 3),
            Node::Mul(a, b) => binary(f, a, "*", b, 4),
            Node::Div(a, b) => binary(f, a, "/", b, 4),
            Node::Pow(a, k) => {
                write_operand(f, a, prec(a) <= 6 && prec(a) != 0)?;
                f.write_str("^")?;
                write_number(f, *k)
            }
            Node::Fun(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Debug for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymExpr({self})")
    }
}
