//! Object instances and their construction from class definitions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::eval::{eval, Fault};
use super::{SimError, Value};
use crate::lang::{ClassDef, Model, Pos, StmtKind, VarRef};

/// Store key: variable name plus derivative order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarKey {
    pub name: String,
    pub order: u32,
}

impl VarKey {
    pub fn new(name: impl Into<String>, order: u32) -> Self {
        VarKey { name: name.into(), order }
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, "'".repeat(self.order as usize))
    }
}

#[derive(Debug, Clone)]
pub struct ObjectInstance {
    pub(crate) class: Arc<ClassDef>,
    store: BTreeMap<VarKey, Value>,
    children: Vec<(String, ObjectInstance)>,
    /// Highest derivative order with a continuous equation, per variable.
    highest_order: BTreeMap<String, u32>,
}

impl ObjectInstance {
    /// An object of an anonymous, empty class; every variable lookup fails.
    pub(crate) fn empty() -> Self {
        let class = ClassDef {
            name: String::new(),
            params: Vec::new(),
            private_inits: Vec::new(),
            body: Vec::new(),
            pos: Pos::default(),
        };
        ObjectInstance {
            class: Arc::new(class),
            store: BTreeMap::new(),
            children: Vec::new(),
            highest_order: BTreeMap::new(),
        }
    }

    pub fn class_name(&self) -> &str {
        &self.class.name
    }

    pub fn store(&self) -> &BTreeMap<VarKey, Value> {
        &self.store
    }

    pub fn get(&self, name: &str, order: u32) -> Option<&Value> {
        self.store.get(&VarKey::new(name, order))
    }

    pub fn set(&mut self, name: &str, order: u32, value: Value) {
        self.store.insert(VarKey::new(name, order), value);
    }

    pub fn highest_order(&self, name: &str) -> Option<u32> {
        self.highest_order.get(name).copied()
    }

    pub fn children(&self) -> impl Iterator<Item = (&str, &ObjectInstance)> {
        self.children.iter().map(|(n, c)| (n.as_str(), c))
    }

    pub fn child(&self, name: &str) -> Option<&ObjectInstance> {
        self.children.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    fn child_index(&self, name: &str) -> Option<usize> {
        self.children.iter().position(|(n, _)| n == name)
    }

    pub(crate) fn child_at_mut(&mut self, idx: usize) -> &mut ObjectInstance {
        &mut self.children[idx].1
    }

    /// Follows child indices from this object.
    pub(crate) fn descend(&self, path: &[usize]) -> &ObjectInstance {
        path.iter().fold(self, |obj, &i| &obj.children[i].1)
    }

    /// Follows child indices from this object.
    pub(crate) fn descend_mut(&mut self, path: &[usize]) -> &mut ObjectInstance {
        path.iter().fold(self, |obj, &i| obj.child_at_mut(i))
    }

    /// Reads a variable through a (possibly dotted) reference.
    pub fn lookup(&self, var: &VarRef) -> Result<&Value, Fault> {
        let (last, parents) = var.path.split_last().expect("non-empty path");
        let mut obj = self;
        for name in parents {
            obj = obj
                .child(name)
                .ok_or_else(|| Fault::Eval(format!("no child object `{name}` in `{}`", obj.class.name)))?;
        }
        obj.store
            .get(&VarKey::new(last.as_str(), var.order))
            .ok_or_else(|| Fault::Eval(format!("undefined variable `{var}`")))
    }

    /// Writes a variable through a (possibly dotted) reference, creating the slot if needed.
    pub fn assign(&mut self, var: &VarRef, value: Value) -> Result<(), Fault> {
        let (last, parents) = var.path.split_last().expect("non-empty path");
        let mut obj = self;
        for name in parents {
            let idx = obj
                .child_index(name)
                .ok_or_else(|| Fault::Eval(format!("no child object `{name}` in `{}`", obj.class.name)))?;
            obj = obj.child_at_mut(idx);
        }
        obj.store.insert(VarKey::new(last.as_str(), var.order), value);
        Ok(())
    }

    /// Resolves a dotted reference to (child index path, key), relative to this object.
    pub(crate) fn resolve(&self, var: &VarRef) -> Result<(Vec<usize>, VarKey), Fault> {
        let (last, parents) = var.path.split_last().expect("non-empty path");
        let mut obj = self;
        let mut idx_path = Vec::with_capacity(parents.len());
        for name in parents {
            let idx = obj
                .child_index(name)
                .ok_or_else(|| Fault::Eval(format!("no child object `{name}` in `{}`", obj.class.name)))?;
            idx_path.push(idx);
            obj = &obj.children[idx].1;
        }
        Ok((idx_path, VarKey::new(last.as_str(), var.order)))
    }

    pub(crate) fn store_mut(&mut self) -> &mut BTreeMap<VarKey, Value> {
        &mut self.store
    }

    pub(crate) fn integrated_variables(&self) -> Vec<(String, u32)> {
        self.highest_order.iter().filter(|(_, n)| **n >= 1).map(|(k, n)| (k.clone(), *n)).collect()
    }
}

/// Creates an instance of `class_name`: binds parameters, runs the private
/// initializers in order (recursively creating children), and materializes
/// every derivative slot up to the highest continuously assigned order.
pub fn instantiate(model: &Model, class_name: &str, args: Vec<Value>) -> Result<ObjectInstance, SimError> {
    let mut root = build(model, class_name, args, 0)?;
    bump_child_targets(&mut root);
    materialize(&mut root);
    Ok(root)
}

const MAX_DEPTH: usize = 64;

fn build(model: &Model, class_name: &str, args: Vec<Value>, depth: usize) -> Result<ObjectInstance, SimError> {
    let class = model.class(class_name).ok_or_else(|| SimError::UnknownClass(class_name.to_string()))?;
    if depth > MAX_DEPTH {
        return Err(SimError::Init {
            class: class_name.to_string(),
            pos: class.pos,
            message: "object nesting too deep".into(),
        });
    }
    if class.params.len() != args.len() {
        return Err(SimError::ArityMismatch {
            class: class_name.to_string(),
            expected: class.params.len(),
            found: args.len(),
        });
    }

    let mut obj = ObjectInstance {
        class: Arc::new(class.clone()),
        store: BTreeMap::new(),
        children: Vec::new(),
        highest_order: BTreeMap::new(),
    };
    for (p, v) in class.params.iter().zip(args) {
        obj.set(p, 0, v);
    }

    let init_err =
        |pos, fault: Fault| SimError::Init { class: class_name.to_string(), pos, message: fault.to_string() };
    for init in &class.private_inits {
        match &init.kind {
            StmtKind::Discrete { lhs, rhs } => {
                let v = eval(rhs, &obj).map_err(|f| init_err(init.pos, f))?;
                obj.assign(lhs, v).map_err(|f| init_err(init.pos, f))?;
            }
            StmtKind::Create { target, class: child_class, args } => {
                let values = args
                    .iter()
                    .map(|a| eval(a, &obj))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|f| init_err(init.pos, f))?;
                let child = build(model, child_class, values, depth + 1)?;
                match obj.child_index(target) {
                    Some(i) => obj.children[i].1 = child,
                    None => obj.children.push((target.clone(), child)),
                }
            }
            _ => return Err(init_err(init.pos, Fault::Eval("only `:=` and `create` may appear in `private`".into()))),
        }
    }

    let class = obj.class.clone();
    class.walk_body(|s| {
        if let StmtKind::Continuous { lhs, .. } = &s.kind {
            if lhs.is_local() {
                let e = obj.highest_order.entry(lhs.name().to_string()).or_insert(lhs.order);
                *e = (*e).max(lhs.order);
            }
        }
    });
    Ok(obj)
}

/// Continuous equations written by a parent into a child (`b.x'' = ...`)
/// make that child variable integrated too.
fn bump_child_targets(obj: &mut ObjectInstance) {
    let class = obj.class.clone();
    class.walk_body(|s| {
        if let StmtKind::Continuous { lhs, .. } = &s.kind {
            if !lhs.is_local() {
                let (parents, _) = lhs.path.split_at(lhs.path.len() - 1);
                let mut target: Option<&mut ObjectInstance> = Some(&mut *obj);
                for name in parents {
                    target = target.and_then(|o| {
                        let i = o.child_index(name)?;
                        Some(o.child_at_mut(i))
                    });
                }
                if let Some(t) = target {
                    let e = t.highest_order.entry(lhs.name().to_string()).or_insert(lhs.order);
                    *e = (*e).max(lhs.order);
                }
            }
        }
    });
    for (_, c) in &mut obj.children {
        bump_child_targets(c);
    }
}

fn materialize(obj: &mut ObjectInstance) {
    for (name, &n) in &obj.highest_order {
        let template = obj
            .store
            .range(VarKey::new(name.as_str(), 0)..=VarKey::new(name.as_str(), u32::MAX))
            .map(|(_, v)| v.zero_like())
            .next()
            .unwrap_or(Value::Real(0.0));
        for k in 0..=n {
            obj.store.entry(VarKey::new(name.as_str(), k)).or_insert_with(|| template.clone());
        }
    }
    for (_, c) in &mut obj.children {
        materialize(c);
    }
}
