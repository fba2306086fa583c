//! Load-time checks run after parsing: class table, `create` graph, and
//! variable scoping.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::ast::*;

/// Returns one message per violation; empty means the model is well formed.
pub(crate) fn check_model(model: &Model) -> Vec<String> {
    let mut problems = Vec::new();

    let mut by_name: HashMap<&str, &ClassDef> = HashMap::new();
    for class in &model.classes {
        if by_name.insert(&class.name, class).is_some() {
            problems.push(format!("{}: duplicate class name `{}`", class.pos, class.name));
        }
    }

    for class in &model.classes {
        check_class(class, &by_name, &mut problems);
    }

    check_create_cycles(model, &by_name, &mut problems);
    problems
}

struct Scope<'a> {
    /// Base names of params and private variables.
    vars: HashSet<&'a str>,
    /// Child object name to its class name.
    children: HashMap<&'a str, &'a str>,
}

impl<'a> Scope<'a> {
    fn of(class: &'a ClassDef) -> Self {
        let mut vars: HashSet<&str> = class.params.iter().map(String::as_str).collect();
        let mut children = HashMap::new();
        for init in &class.private_inits {
            match &init.kind {
                StmtKind::Discrete { lhs, .. } if lhs.is_local() => {
                    vars.insert(lhs.name());
                }
                StmtKind::Create { target, class, .. } => {
                    children.insert(target.as_str(), class.as_str());
                }
                _ => {}
            }
        }
        Scope { vars, children }
    }
}

/// Resolves `path` starting in `class`; `Err` carries a description of the failure.
fn resolve(path: &[String], class: &ClassDef, classes: &HashMap<&str, &ClassDef>, depth: usize) -> Result<(), String> {
    let scope = Scope::of(class);
    let head = path[0].as_str();
    if path.len() == 1 {
        if scope.vars.contains(head) {
            return Ok(());
        }
        if scope.children.contains_key(head) {
            return Err(format!("`{head}` is an object, not a variable"));
        }
        return Err(format!("undefined variable `{head}`"));
    }
    let Some(child_class) = scope.children.get(head) else {
        return Err(format!("`{head}` is not a child object"));
    };
    // cyclic create chains are reported separately
    if depth > 64 {
        return Err("object nesting too deep".into());
    }
    match classes.get(child_class) {
        Some(def) => resolve(&path[1..], def, classes, depth + 1),
        None => Err(format!("undefined class `{child_class}`")),
    }
}

fn check_class(class: &ClassDef, classes: &HashMap<&str, &ClassDef>, problems: &mut Vec<String>) {
    let mut seen_params = HashSet::new();
    for p in &class.params {
        if !seen_params.insert(p.as_str()) {
            problems.push(format!("{}: duplicate parameter `{p}` in class `{}`", class.pos, class.name));
        }
    }

    let mut children = HashSet::new();
    for init in &class.private_inits {
        match &init.kind {
            StmtKind::Discrete { lhs, .. } => {
                if lhs.is_local() && lhs.order == 0 && seen_params.contains(lhs.name()) {
                    problems.push(format!(
                        "{}: `{}` is both a parameter and a private variable of class `{}`",
                        init.pos, lhs, class.name
                    ));
                }
            }
            StmtKind::Create { target, class: target_class, args } => {
                if seen_params.contains(target.as_str()) || !children.insert(target.as_str()) {
                    problems.push(format!(
                        "{}: object name `{target}` clashes with another name in class `{}`",
                        init.pos, class.name
                    ));
                }
                match classes.get(target_class.as_str()) {
                    None => problems.push(format!("{}: `create` of undefined class `{target_class}`", init.pos)),
                    Some(def) if def.params.len() != args.len() => problems.push(format!(
                        "{}: class `{target_class}` takes {} argument(s), {} given",
                        init.pos,
                        def.params.len(),
                        args.len()
                    )),
                    Some(_) => {}
                }
            }
            _ => problems.push(format!("{}: only `:=` and `create` are allowed in `private`", init.pos)),
        }
    }

    // continuous targets: full path -> orders assigned
    let mut continuous_orders: BTreeMap<String, (Vec<u32>, super::Pos)> = BTreeMap::new();
    let check_ref = |v: &VarRef, pos: super::Pos, problems: &mut Vec<String>| {
        if let Err(msg) = resolve(&v.path, class, classes, 0) {
            problems.push(format!("{pos}: {msg} in class `{}`", class.name));
        }
    };

    class.walk_body(|stmt| {
        let mut reads = Vec::new();
        match &stmt.kind {
            StmtKind::Continuous { lhs, rhs } => {
                check_ref(lhs, stmt.pos, problems);
                let entry = continuous_orders.entry(lhs.path.join(".")).or_insert_with(|| (Vec::new(), stmt.pos));
                if !entry.0.contains(&lhs.order) {
                    entry.0.push(lhs.order);
                }
                rhs.for_each_var(&mut |v| reads.push(v.clone()));
            }
            StmtKind::Discrete { lhs, rhs } => {
                check_ref(lhs, stmt.pos, problems);
                rhs.for_each_var(&mut |v| reads.push(v.clone()));
            }
            StmtKind::If { cond, .. } => cond.for_each_var(&mut |v| reads.push(v.clone())),
            StmtKind::Switch { subject, .. } => subject.for_each_var(&mut |v| reads.push(v.clone())),
            StmtKind::Terminate { target } => check_ref(target, stmt.pos, problems),
            StmtKind::Create { .. } => problems.push(format!("{}: `create` outside the private section", stmt.pos)),
        }
        for v in &reads {
            check_ref(v, stmt.pos, problems);
        }
    });

    for (name, (orders, pos)) in continuous_orders {
        if orders.len() > 1 {
            problems.push(format!(
                "{pos}: `{name}` is assigned continuously at several derivative orders {orders:?} in class `{}`",
                class.name
            ));
        }
    }
}

fn check_create_cycles(model: &Model, classes: &HashMap<&str, &ClassDef>, problems: &mut Vec<String>) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        name: &'a str,
        classes: &HashMap<&'a str, &'a ClassDef>,
        marks: &mut HashMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
        problems: &mut Vec<String>,
    ) {
        match marks.get(name) {
            Some(Mark::Done) => return,
            Some(Mark::Active) => {
                let start = stack.iter().position(|n| *n == name).unwrap_or(0);
                let mut cycle: Vec<&str> = stack[start..].to_vec();
                cycle.push(name);
                problems.push(format!("cyclic `create` chain: {}", cycle.join(" -> ")));
                return;
            }
            None => {}
        }
        let Some(class) = classes.get(name) else { return };
        marks.insert(name, Mark::Active);
        stack.push(name);
        for init in &class.private_inits {
            if let StmtKind::Create { class: child, .. } = &init.kind {
                visit(child, classes, marks, stack, problems);
            }
        }
        stack.pop();
        marks.insert(name, Mark::Done);
    }

    let mut marks = HashMap::new();
    for class in &model.classes {
        visit(&class.name, classes, &mut marks, &mut Vec::new(), problems);
    }
}
