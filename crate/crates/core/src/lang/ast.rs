//! Abstract syntax of the modeling language.

use std::fmt;

use super::token::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    And,
    Or,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
        }
    }

    /// Binding strength; larger binds tighter. Unary negation sits at 5.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 0,
            BinaryOp::And => 1,
            BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge | BinaryOp::Eq => 2,
            BinaryOp::Add | BinaryOp::Sub => 3,
            BinaryOp::Mul | BinaryOp::Div => 4,
            BinaryOp::Pow => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Sqrt,
    Dot,
    Cross,
    Norm,
}

impl Builtin {
    pub const ALL: [Builtin; 9] = [
        Builtin::Sin,
        Builtin::Cos,
        Builtin::Tan,
        Builtin::Asin,
        Builtin::Acos,
        Builtin::Sqrt,
        Builtin::Dot,
        Builtin::Cross,
        Builtin::Norm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Tan => "tan",
            Builtin::Asin => "asin",
            Builtin::Acos => "acos",
            Builtin::Sqrt => "sqrt",
            Builtin::Dot => "dot",
            Builtin::Cross => "cross",
            Builtin::Norm => "norm",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Dot | Builtin::Cross => 2,
            _ => 1,
        }
    }
}

/// Reference to a variable, possibly through child objects (`s.p'`).
#[derive(Debug, Clone, PartialEq)]
pub struct VarRef {
    pub path: Vec<String>,
    pub order: u32,
}

impl VarRef {
    pub fn new(name: impl Into<String>, order: u32) -> Self {
        VarRef { path: vec![name.into()], order }
    }

    /// The variable's own name (last path component).
    pub fn name(&self) -> &str {
        self.path.last().expect("VarRef path is never empty")
    }

    pub fn is_local(&self) -> bool {
        self.path.len() == 1
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.path.join("."), "'".repeat(self.order as usize))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Bool(bool),
    Str(String),
    Vector(Vec<Expr>),
    Matrix(Vec<Vec<Expr>>),
    Var(VarRef),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Visits every variable reference in evaluation order.
    pub fn for_each_var(&self, f: &mut impl FnMut(&VarRef)) {
        match self {
            Expr::Num(_) | Expr::Bool(_) | Expr::Str(_) => {}
            Expr::Vector(items) | Expr::Call(_, items) => items.iter().for_each(|e| e.for_each_var(f)),
            Expr::Matrix(rows) => rows.iter().flatten().for_each(|e| e.for_each_var(f)),
            Expr::Var(v) => f(v),
            Expr::Unary(_, e) => e.for_each_var(f),
            Expr::Binary(_, l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
        }
    }
}

/// Literal used as a `switch` case label.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseLabel {
    Num(f64),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Continuous { lhs: VarRef, rhs: Expr },
    Discrete { lhs: VarRef, rhs: Expr },
    If { cond: Expr, then_branch: Vec<Stmt>, else_branch: Option<Vec<Stmt>> },
    Switch { subject: Expr, cases: Vec<(CaseLabel, Vec<Stmt>)> },
    Create { target: String, class: String, args: Vec<Expr> },
    Terminate { target: VarRef },
}

impl Stmt {
    /// Depth-first walk over this statement and every nested statement.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.iter().for_each(|s| s.walk(f));
                if let Some(e) = else_branch {
                    e.iter().for_each(|s| s.walk(f));
                }
            }
            StmtKind::Switch { cases, .. } => {
                cases.iter().flat_map(|(_, b)| b).for_each(|s| s.walk(f));
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub name: String,
    pub params: Vec<String>,
    /// Discrete assignments and `create` statements, executed once at instantiation.
    pub private_inits: Vec<Stmt>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

impl ClassDef {
    /// Visits every statement of the body, including nested branches.
    pub fn walk_body<'a>(&'a self, mut f: impl FnMut(&'a Stmt)) {
        self.body.iter().for_each(|s| s.walk(&mut f));
    }

    pub fn continuous_count(&self) -> usize {
        let mut n = 0;
        self.walk_body(|s| {
            if matches!(s.kind, StmtKind::Continuous { .. }) {
                n += 1
            }
        });
        n
    }

    pub fn discrete_count(&self) -> usize {
        let mut n = 0;
        self.walk_body(|s| {
            if matches!(s.kind, StmtKind::Discrete { .. }) {
                n += 1
            }
        });
        n
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub classes: Vec<ClassDef>,
}

impl Model {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Resets every source position to the default, so that two models can be
    /// compared structurally regardless of layout.
    pub fn strip_positions(&mut self) {
        fn strip(stmts: &mut [Stmt]) {
            for s in stmts {
                s.pos = Pos::default();
                match &mut s.kind {
                    StmtKind::If { then_branch, else_branch, .. } => {
                        strip(then_branch);
                        if let Some(e) = else_branch {
                            strip(e);
                        }
                    }
                    StmtKind::Switch { cases, .. } => {
                        for (_, b) in cases {
                            strip(b);
                        }
                    }
                    _ => {}
                }
            }
        }
        for c in &mut self.classes {
            c.pos = Pos::default();
            strip(&mut c.private_inits);
            strip(&mut c.body);
        }
    }
}
