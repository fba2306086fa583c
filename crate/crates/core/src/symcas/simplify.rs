//! Local rewriting rules, applied through smart constructors.
//!
//! Each constructor assumes its operands are already simplified and returns a
//! simplified node, so a single bottom-up rebuild reaches the fixpoint.
//! Constants are kept at the left of products and sums, which is what lets
//! nested constants meet and fold.

use std::collections::HashMap;

use super::expr::{Func, Node, SymExpr};

fn folded(v: f64) -> Option<SymExpr> {
    v.is_finite().then(|| SymExpr::constant(v))
}

/// `(c, x)` when `e` is `c * x` with a constant `c`.
fn scaled(e: &SymExpr) -> Option<(f64, &SymExpr)> {
    match e.node() {
        Node::Mul(a, b) => a.as_const().map(|c| (c, b)),
        _ => None,
    }
}

/// `(c, x)` when `e` is `c + x` with a constant `c`.
fn offset(e: &SymExpr) -> Option<(f64, &SymExpr)> {
    match e.node() {
        Node::Add(a, b) => a.as_const().map(|c| (c, b)),
        _ => None,
    }
}

fn negated(e: &SymExpr) -> Option<&SymExpr> {
    scaled(e).and_then(|(c, x)| (c == -1.0).then_some(x))
}

pub fn add(a: SymExpr, b: SymExpr) -> SymExpr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => {
            if let Some(c) = folded(x + y) {
                return c;
            }
        }
        (Some(0.0), None) => return b,
        (None, Some(0.0)) => return a,
        (None, Some(_)) => return add(b, a),
        (Some(x), None) => {
            if let Some((y, rest)) = offset(&b) {
                if let Some(c) = folded(x + y) {
                    return add(c, rest.clone());
                }
            }
        }
        (None, None) => {
            if let Some((c, rest)) = offset(&a) {
                return add(SymExpr::constant(c), add(rest.clone(), b));
            }
            if let Some((c, rest)) = offset(&b) {
                return add(SymExpr::constant(c), add(a, rest.clone()));
            }
        }
    }
    if let Some(y) = negated(&b) {
        return sub(a, y.clone());
    }
    if let Some(x) = negated(&a) {
        return sub(b, x.clone());
    }
    SymExpr::from_node(Node::Add(a, b))
}

pub fn sub(a: SymExpr, b: SymExpr) -> SymExpr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => {
            if let Some(c) = folded(x - y) {
                return c;
            }
        }
        (_, Some(0.0)) => return a,
        (Some(0.0), _) => return mul(SymExpr::constant(-1.0), b),
        (None, Some(y)) => return add(SymExpr::constant(-y), a),
        _ => {}
    }
    if a == b {
        return SymExpr::zero();
    }
    if let Some(y) = negated(&b) {
        return add(a, y.clone());
    }
    SymExpr::from_node(Node::Sub(a, b))
}

pub fn mul(a: SymExpr, b: SymExpr) -> SymExpr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => {
            if let Some(c) = folded(x * y) {
                return c;
            }
        }
        (Some(x), _) | (_, Some(x)) if x == 0.0 => return SymExpr::zero(),
        (Some(1.0), None) => return b,
        (None, Some(1.0)) => return a,
        (None, Some(_)) => return mul(b, a),
        (Some(x), None) => {
            if let Some((y, rest)) = scaled(&b) {
                if let Some(c) = folded(x * y) {
                    return mul(c, rest.clone());
                }
            }
        }
        (None, None) => {
            if let Some((c, rest)) = scaled(&a) {
                return mul(SymExpr::constant(c), mul(rest.clone(), b));
            }
            if let Some((c, rest)) = scaled(&b) {
                return mul(SymExpr::constant(c), mul(a, rest.clone()));
            }
            if a == b {
                return pow(a, 2.0);
            }
        }
    }
    SymExpr::from_node(Node::Mul(a, b))
}

pub fn div(a: SymExpr, b: SymExpr) -> SymExpr {
    match (a.as_const(), b.as_const()) {
        (_, Some(1.0)) => return a,
        (Some(x), Some(y)) if y != 0.0 => {
            if let Some(c) = folded(x / y) {
                return c;
            }
        }
        (Some(x), _) if x == 0.0 && !b.is_const(0.0) => return SymExpr::zero(),
        _ => {}
    }
    SymExpr::from_node(Node::Div(a, b))
}

pub fn pow(a: SymExpr, k: f64) -> SymExpr {
    if k == 1.0 {
        return a;
    }
    if k == 0.0 {
        return SymExpr::one();
    }
    if let Some(x) = a.as_const() {
        if let Some(c) = folded(x.powf(k)) {
            return c;
        }
    }
    if let Node::Pow(base, j) = a.node() {
        if j.fract() == 0.0 && k.fract() == 0.0 {
            return pow(base.clone(), j * k);
        }
    }
    SymExpr::from_node(Node::Pow(a, k))
}

pub fn fun(f: Func, a: SymExpr) -> SymExpr {
    if let Some(x) = a.as_const() {
        if let Some(c) = f.apply(x).ok().and_then(folded) {
            return c;
        }
    }
    SymExpr::from_node(Node::Fun(f, a))
}

pub fn neg(a: SymExpr) -> SymExpr {
    mul(SymExpr::constant(-1.0), a)
}

/// Rewrites `e` bottom-up with the local rule set. The result evaluates to the
/// same value as `e` wherever `e` is defined (up to rounding).
pub fn simplify(e: &SymExpr) -> SymExpr {
    fn go(e: &SymExpr, memo: &mut HashMap<usize, SymExpr>) -> SymExpr {
        if let Some(r) = memo.get(&e.id()) {
            return r.clone();
        }
        let r = match e.node() {
            Node::Const(_) | Node::Sym(_) => e.clone(),
            Node::Add(a, b) => add(go(a, memo), go(b, memo)),
            Node::Sub(a, b) => sub(go(a, memo), go(b, memo)),
            Node::Mul(a, b) => mul(go(a, memo), go(b, memo)),
            Node::Div(a, b) => div(go(a, memo), go(b, memo)),
            Node::Pow(a, k) => pow(go(a, memo), *k),
            Node::Fun(f, a) => fun(*f, go(a, memo)),
        };
        memo.insert(e.id(), r.clone());
        r
    }
    go(e, &mut HashMap::new())
}
