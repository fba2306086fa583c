//! Source rendering of the AST. The output reparses to the same tree.

use std::fmt::{self, Write};

use super::ast::*;

const UNARY_PREC: u8 = 5;
const ATOM_PREC: u8 = 7;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(..) => UNARY_PREC,
        Expr::Num(v) if v.is_sign_negative() => UNARY_PREC,
        _ => ATOM_PREC,
    }
}

pub(crate) fn write_number(out: &mut impl Write, v: f64) -> fmt::Result {
    if v.is_sign_negative() {
        write!(out, "-{}", -v)
    } else {
        write!(out, "{v}")
    }
}

fn write_wrapped(out: &mut impl Write, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        out.write_char('(')?;
        write_expr(out, e)?;
        out.write_char(')')
    } else {
        write_expr(out, e)
    }
}

pub(crate) fn write_expr(out: &mut impl Write, e: &Expr) -> fmt::Result {
    match e {
        Expr::Num(v) => write_number(out, *v),
        Expr::Bool(b) => out.write_str(if *b { "true" } else { "false" }),
        Expr::Str(s) => write!(out, "\"{s}\""),
        Expr::Vector(items) => {
            out.write_char('[')?;
            write_list(out, items)?;
            out.write_char(']')
        }
        Expr::Matrix(rows) => {
            out.write_char('[')?;
            for (i, row) in rows.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                out.write_char('[')?;
                write_list(out, row)?;
                out.write_char(']')?;
            }
            out.write_char(']')
        }
        Expr::Var(v) => write!(out, "{v}"),
        Expr::Unary(op, inner) => {
            out.write_char(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Not => '!',
            })?;
            write_wrapped(out, inner, expr_prec(inner) < UNARY_PREC)
        }
        Expr::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            if *op == BinaryOp::Pow {
                // base must be an atom; exponent may be any unary-level operand
                write_wrapped(out, lhs, expr_prec(lhs) < ATOM_PREC)?;
                out.write_char('^')?;
                write_wrapped(out, rhs, expr_prec(rhs) < UNARY_PREC)
            } else {
                write_wrapped(out, lhs, expr_prec(lhs) < p)?;
                write!(out, " {} ", op.symbol())?;
                write_wrapped(out, rhs, expr_prec(rhs) <= p)
            }
        }
        Expr::Call(b, args) => {
            write!(out, "{}(", b.name())?;
            write_list(out, args)?;
            out.write_char(')')
        }
    }
}

fn write_list(out: &mut impl Write, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            out.write_str(", ")?;
        }
        write_expr(out, e)?;
    }
    Ok(())
}

fn indent(out: &mut impl Write, depth: usize) -> fmt::Result {
    for _ in 0..depth {
        out.write_str("  ")?;
    }
    Ok(())
}

fn write_label(out: &mut impl Write, label: &CaseLabel) -> fmt::Result {
    match label {
        CaseLabel::Num(v) => write_number(out, *v),
        CaseLabel::Bool(b) => out.write_str(if *b { "true" } else { "false" }),
        CaseLabel::Str(s) => write!(out, "\"{s}\""),
    }
}

fn write_stmts(out: &mut impl Write, stmts: &[Stmt], depth: usize) -> fmt::Result {
    for s in stmts {
        indent(out, depth)?;
        write_stmt(out, s, depth)?;
        out.write_str(";\n")?;
    }
    Ok(())
}

fn write_stmt(out: &mut impl Write, s: &Stmt, depth: usize) -> fmt::Result {
    match &s.kind {
        StmtKind::Continuous { lhs, rhs } => {
            write!(out, "{lhs} = ")?;
            write_expr(out, rhs)
        }
        StmtKind::Discrete { lhs, rhs } => {
            write!(out, "{lhs} := ")?;
            write_expr(out, rhs)
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            out.write_str("if ")?;
            write_expr(out, cond)?;
            out.write_char('\n')?;
            write_stmts(out, then_branch, depth + 1)?;
            if let Some(e) = else_branch {
                indent(out, depth)?;
                out.write_str("else\n")?;
                write_stmts(out, e, depth + 1)?;
            }
            indent(out, depth)?;
            out.write_str("end")
        }
        StmtKind::Switch { subject, cases } => {
            out.write_str("switch ")?;
            write_expr(out, subject)?;
            out.write_char('\n')?;
            for (label, body) in cases {
                indent(out, depth)?;
                out.write_str("case ")?;
                write_label(out, label)?;
                out.write_char('\n')?;
                write_stmts(out, body, depth + 1)?;
            }
            indent(out, depth)?;
            out.write_str("end")
        }
        StmtKind::Create { target, class, args } => {
            write!(out, "{target} := create {class}(")?;
            write_list(out, args)?;
            out.write_char(')')
        }
        StmtKind::Terminate { target } => write!(out, "terminate {target}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

impl fmt::Display for ClassDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class {} ({})", self.name, self.params.join(", "))?;
        writeln!(f, "private")?;
        write_stmts(f, &self.private_inits, 1)?;
        writeln!(f, "end")?;
        write_stmts(f, &self.body, 1)?;
        writeln!(f, "end")
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.classes.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
