//! Static partial derivatives and total time derivatives.

use std::collections::{BTreeMap, HashMap};

use super::expr::{Func, Node, SymExpr};
use super::simplify::{add, div, fun, mul, neg, pow, simplify, sub};

struct Differentiator<'a> {
    var: &'a str,
    depends: HashMap<usize, bool>,
    memo: HashMap<usize, SymExpr>,
}

impl Differentiator<'_> {
    fn depends(&mut self, e: &SymExpr) -> bool {
        if let Some(&d) = self.depends.get(&e.id()) {
            return d;
        }
        let d = match e.node() {
            Node::Const(_) => false,
            Node::Sym(s) => s == self.var,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                // evaluate both so the cache is filled for the derivative pass
                let da = self.depends(a);
                let db = self.depends(b);
                da || db
            }
            Node::Pow(a, _) | Node::Fun(_, a) => self.depends(a),
        };
        self.depends.insert(e.id(), d);
        d
    }

    fn d(&mut self, e: &SymExpr) -> SymExpr {
        if !self.depends(e) {
            return SymExpr::zero();
        }
        if let Some(r) = self.memo.get(&e.id()) {
            return r.clone();
        }
        let r = match e.node() {
            Node::Const(_) => SymExpr::zero(),
            Node::Sym(_) => SymExpr::one(),
            Node::Add(a, b) => add(self.d(a), self.d(b)),
            Node::Sub(a, b) => sub(self.d(a), self.d(b)),
            Node::Mul(a, b) => {
                let (da, db) = (self.d(a), self.d(b));
                add(mul(da, b.clone()), mul(a.clone(), db))
            }
            Node::Div(a, b) => {
                let da = self.d(a);
                if self.depends(b) {
                    let db = self.d(b);
                    // a'/b - a b'/b^2
                    sub(div(da, b.clone()), div(mul(a.clone(), db), pow(b.clone(), 2.0)))
                } else {
                    div(da, b.clone())
                }
            }
            Node::Pow(a, k) => {
                let da = self.d(a);
                mul(mul(SymExpr::constant(*k), pow(a.clone(), k - 1.0)), da)
            }
            Node::Fun(f, a) => {
                let da = self.d(a);
                let outer = match f {
                    Func::Sin => fun(Func::Cos, a.clone()),
                    Func::Cos => neg(fun(Func::Sin, a.clone())),
                    Func::Tan => pow(fun(Func::Cos, a.clone()), -2.0),
                    Func::Sqrt => div(SymExpr::constant(0.5), fun(Func::Sqrt, a.clone())),
                    Func::Asin => pow(sub(SymExpr::one(), pow(a.clone(), 2.0)), -0.5),
                };
                mul(outer, da)
            }
        };
        self.memo.insert(e.id(), r.clone());
        r
    }
}

/// ∂e/∂var, treating every other symbol as a constant.
pub fn partial(e: &SymExpr, var: &str) -> SymExpr {
    let mut d = Differentiator { var, depends: HashMap::new(), memo: HashMap::new() };
    d.d(e)
}

/// Total time derivative Σ ∂e/∂s · flow(s) over the symbols `s` with a flow
/// entry (coordinates map to velocities, velocities to accelerations);
/// symbols without an entry are constant in time.
pub fn time_derivative(e: &SymExpr, flow: &BTreeMap<String, String>) -> SymExpr {
    let mut total = SymExpr::zero();
    for s in e.symbols() {
        if let Some(rate) = flow.get(&s) {
            total = add(total, mul(partial(e, &s), SymExpr::sym(rate.as_str())));
        }
    }
    simplify(&total)
}
