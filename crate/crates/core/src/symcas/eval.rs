//! Numeric evaluation: a direct tree walk, and a compiled tape for hot loops.

use std::collections::HashMap;

use super::expr::{Func, Node, SymExpr};
use super::SymError;

fn power(x: f64, k: f64) -> Result<f64, SymError> {
    let v = if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 { x.powi(k as i32) } else { x.powf(k) };
    if v.is_nan() && !x.is_nan() {
        return Err(SymError::Math(format!("{x}^{k} is undefined")));
    }
    Ok(v)
}

fn quotient(a: f64, b: f64) -> Result<f64, SymError> {
    if b == 0.0 {
        return Err(SymError::Math("division by zero".into()));
    }
    Ok(a / b)
}

/// Evaluates `e` with IEEE double arithmetic.
pub fn evaluate(e: &SymExpr, bindings: &HashMap<String, f64>) -> Result<f64, SymError> {
    fn go(e: &SymExpr, b: &HashMap<String, f64>, memo: &mut HashMap<usize, f64>) -> Result<f64, SymError> {
        if let Some(&v) = memo.get(&e.id()) {
            return Ok(v);
        }
        let v = match e.node() {
            Node::Const(v) => *v,
            Node::Sym(s) => *b.get(s).ok_or_else(|| SymError::UnboundSymbol(s.clone()))?,
            Node::Add(x, y) => go(x, b, memo)? + go(y, b, memo)?,
            Node::Sub(x, y) => go(x, b, memo)? - go(y, b, memo)?,
            Node::Mul(x, y) => go(x, b, memo)? * go(y, b, memo)?,
            Node::Div(x, y) => quotient(go(x, b, memo)?, go(y, b, memo)?)?,
            Node::Pow(x, k) => power(go(x, b, memo)?, *k)?,
            Node::Fun(f, x) => f.apply(go(x, b, memo)?)?,
        };
        memo.insert(e.id(), v);
        Ok(v)
    }
    go(e, bindings, &mut HashMap::new())
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Input(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, f64),
    Fun(Func, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Input(usize),
    Bin(u8, usize, usize),
    Pow(usize, u64),
    Fun(Func, usize),
}

/// A straight-line program computing several expressions at once, with
/// common subexpressions shared.
#[derive(Debug, Clone)]
pub struct Tape {
    inputs: Vec<String>,
    ops: Vec<Op>,
    outputs: Vec<usize>,
}

struct Compiler<'a> {
    inputs: &'a HashMap<&'a str, usize>,
    ops: Vec<Op>,
    by_key: HashMap<Key, usize>,
    by_node: HashMap<usize, usize>,
}

impl Compiler<'_> {
    fn intern(&mut self, key: Key, op: Op) -> usize {
        *self.by_key.entry(key).or_insert_with(|| {
            self.ops.push(op);
            self.ops.len() - 1
        })
    }

    fn emit(&mut self, e: &SymExpr) -> Result<usize, SymError> {
        if let Some(&slot) = self.by_node.get(&e.id()) {
            return Ok(slot);
        }
        let slot = match e.node() {
            Node::Const(v) => self.intern(Key::Const(v.to_bits()), Op::Const(*v)),
            Node::Sym(s) => {
                let i = *self.inputs.get(s.as_str()).ok_or_else(|| SymError::UnboundSymbol(s.clone()))?;
                self.intern(Key::Input(i), Op::Input(i))
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let (x, y) = (self.emit(a)?, self.emit(b)?);
                let (tag, op) = match e.node() {
                    Node::Add(..) => (0, Op::Add(x, y)),
                    Node::Sub(..) => (1, Op::Sub(x, y)),
                    Node::Mul(..) => (2, Op::Mul(x, y)),
                    _ => (3, Op::Div(x, y)),
                };
                self.intern(Key::Bin(tag, x, y), op)
            }
            Node::Pow(a, k) => {
                let x = self.emit(a)?;
                self.intern(Key::Pow(x, k.to_bits()), Op::Pow(x, *k))
            }
            Node::Fun(f, a) => {
                let x = self.emit(a)?;
                self.intern(Key::Fun(*f, x), Op::Fun(*f, x))
            }
        };
        self.by_node.insert(e.id(), slot);
        Ok(slot)
    }
}

impl Tape {
    /// Compiles `outputs`, reading symbols from `inputs` (by position).
    pub fn compile(outputs: &[SymExpr], inputs: &[String]) -> Result<Tape, SymError> {
        let index: HashMap<&str, usize> = inputs.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut c = Compiler { inputs: &index, ops: Vec::new(), by_key: HashMap::new(), by_node: HashMap::new() };
        let outs = outputs.iter().map(|e| c.emit(e)).collect::<Result<Vec<_>, _>>()?;
        Ok(Tape { inputs: inputs.to_vec(), ops: c.ops, outputs: outs })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    /// Number of distinct operations after sharing.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluates into `out`, using `scratch` as working storage.
    pub fn eval_into(&self, inputs: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<(), SymError> {
        assert_eq!(inputs.len(), self.inputs.len(), "tape input count");
        assert_eq!(out.len(), self.outputs.len(), "tape output count");
        scratch.clear();
        scratch.reserve(self.ops.len());
        for op in &self.ops {
            let s = &scratch[..];
            let v = match *op {
                Op::Const(v) => v,
                Op::Input(i) => inputs[i],
                Op::Add(a, b) => s[a] + s[b],
                Op::Sub(a, b) => s[a] - s[b],
                Op::Mul(a, b) => s[a] * s[b],
                Op::Div(a, b) => quotient(s[a], s[b])?,
                Op::Pow(a, k) => power(s[a], k)?,
                Op::Fun(f, a) => f.apply(s[a])?,
            };
            scratch.push(v);
        }
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[slot];
        }
        Ok(())
    }

    pub fn eval(&self, inputs: &[f64]) -> Result<Vec<f64>, SymError> {
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(inputs, &mut Vec::new(), &mut out)?;
        Ok(out)
    }
}
