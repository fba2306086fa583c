//! Recursive-descent parser.
//!
//! Precedence, loosest first: `||`, `&&`, comparisons, `+ -`, `* /`, unary
//! `- !`, and `^` (right-associative). A unary minus therefore applies to a
//! whole power: `-x^2` is `-(x^2)`.

use super::ast::*;
use super::token::{tokenize, Pos, Token, TokenKind};
use super::LangError;

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: Pos,
}

type PResult<T> = Result<T, LangError>;

impl Parser {
    pub(crate) fn new(source: &str) -> PResult<Self> {
        let tokens = tokenize(source)?;
        let eof = eof_pos(source);
        Ok(Parser { tokens, pos: 0, eof })
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn here(&self) -> Pos {
        self.tokens.get(self.pos).map_or(self.eof, |t| t.pos)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn check(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.check(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn error(&self, expected: impl Into<String>) -> LangError {
        LangError::Parse {
            pos: self.here(),
            expected: expected.into(),
            found: self.peek().map_or_else(|| "end of input".to_string(), |k| k.to_string()),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(kind.to_string()))
        }
    }

    fn expect_plain_ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(TokenKind::Ident(name, 0)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error("identifier")),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn parse_model(&mut self) -> PResult<Model> {
        let mut classes = Vec::new();
        while !self.at_end() {
            classes.push(self.parse_class()?);
        }
        Ok(Model { classes })
    }

    fn parse_class(&mut self) -> PResult<ClassDef> {
        let pos = self.here();
        self.expect(TokenKind::Class)?;
        let name = self.expect_plain_ident()?;
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.check(&TokenKind::RParen) {
            loop {
                params.push(self.expect_plain_ident()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Private)?;
        let private_inits = self.parse_inits()?;
        self.expect(TokenKind::End)?;
        let body = self.parse_block(false)?;
        self.expect(TokenKind::End)?;
        Ok(ClassDef { name, params, private_inits, body, pos })
    }

    fn parse_inits(&mut self) -> PResult<Vec<Stmt>> {
        let mut inits = Vec::new();
        loop {
            while self.eat(&TokenKind::Semi) {}
            if self.check(&TokenKind::End) || self.at_end() {
                return Ok(inits);
            }
            let pos = self.here();
            let lhs = self.parse_var_ref()?;
            if !self.eat(&TokenKind::ColonEq) {
                return Err(self.error("`:=` in private section"));
            }
            let kind = if self.eat(&TokenKind::Create) {
                if !lhs.is_local() || lhs.order != 0 {
                    return Err(LangError::Parse {
                        pos,
                        expected: "plain variable name as create target".into(),
                        found: format!("`{lhs}`"),
                    });
                }
                let class = self.expect_plain_ident()?;
                let args = self.parse_args()?;
                StmtKind::Create { target: lhs.path[0].clone(), class, args }
            } else {
                StmtKind::Discrete { lhs, rhs: self.parse_expr()? }
            };
            inits.push(Stmt { kind, pos });
            if !self.check(&TokenKind::Semi) && !self.check(&TokenKind::End) {
                return Err(self.error("`;` or `end`"));
            }
        }
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if !self.check(&TokenKind::RParen) {
            loop {
                args.push(self.parse_expr()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(args)
    }

    /// Statements up to (not including) `end`, `else`, or `case`.
    ///
    /// `;` separates statements and may also trail the last one. A block
    /// statement (`if`/`switch`) closed by `end` needs no separator.
    fn parse_block(&mut self, in_case: bool) -> PResult<Vec<Stmt>> {
        let mut stmts = Vec::new();
        loop {
            while self.eat(&TokenKind::Semi) {}
            match self.peek() {
                None | Some(TokenKind::End) | Some(TokenKind::Else) => return Ok(stmts),
                Some(TokenKind::Case) if in_case => return Ok(stmts),
                _ => {}
            }
            let stmt = self.parse_stmt()?;
            let is_block = matches!(stmt.kind, StmtKind::If { .. } | StmtKind::Switch { .. });
            stmts.push(stmt);
            match self.peek() {
                Some(TokenKind::Semi) | None | Some(TokenKind::End) | Some(TokenKind::Else) => {}
                Some(TokenKind::Case) if in_case => {}
                _ if is_block => {}
                _ => return Err(self.error("`;` or `end`")),
            }
        }
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        let pos = self.here();
        let kind = match self.peek() {
            Some(TokenKind::If) => {
                self.advance();
                let cond = self.parse_expr()?;
                let then_branch = self.parse_block(false)?;
                let else_branch = if self.eat(&TokenKind::Else) { Some(self.parse_block(false)?) } else { None };
                self.expect(TokenKind::End)?;
                StmtKind::If { cond, then_branch, else_branch }
            }
            Some(TokenKind::Switch) => {
                self.advance();
                let subject = self.parse_expr()?;
                let mut cases = Vec::new();
                while self.eat(&TokenKind::Case) {
                    let label = self.parse_case_label()?;
                    cases.push((label, self.parse_block(true)?));
                }
                self.expect(TokenKind::End)?;
                StmtKind::Switch { subject, cases }
            }
            Some(TokenKind::Terminate) => {
                self.advance();
                StmtKind::Terminate { target: self.parse_var_ref()? }
            }
            Some(TokenKind::Ident(..)) => {
                let lhs = self.parse_var_ref()?;
                if self.eat(&TokenKind::Eq) {
                    StmtKind::Continuous { lhs, rhs: self.parse_expr()? }
                } else if self.eat(&TokenKind::ColonEq) {
                    if self.check(&TokenKind::Create) {
                        return Err(LangError::Parse {
                            pos: self.here(),
                            expected: "expression (`create` is only allowed in the private section)".into(),
                            found: TokenKind::Create.to_string(),
                        });
                    }
                    StmtKind::Discrete { lhs, rhs: self.parse_expr()? }
                } else {
                    return Err(self.error("`=` or `:=`"));
                }
            }
            _ => return Err(self.error("statement")),
        };
        Ok(Stmt { kind, pos })
    }

    fn parse_case_label(&mut self) -> PResult<CaseLabel> {
        let negative = self.eat(&TokenKind::Minus);
        let label = match self.peek() {
            Some(TokenKind::Num(v)) => CaseLabel::Num(if negative { -*v } else { *v }),
            Some(TokenKind::Str(s)) if !negative => CaseLabel::Str(s.clone()),
            Some(TokenKind::True) if !negative => CaseLabel::Bool(true),
            Some(TokenKind::False) if !negative => CaseLabel::Bool(false),
            _ => return Err(self.error("literal case label")),
        };
        self.advance();
        Ok(label)
    }

    fn parse_var_ref(&mut self) -> PResult<VarRef> {
        let mut path = Vec::new();
        loop {
            let pos = self.here();
            match self.peek() {
                Some(TokenKind::Ident(name, order)) => {
                    let (name, order) = (name.clone(), *order);
                    self.advance();
                    path.push(name);
                    if self.check(&TokenKind::Dot) {
                        if order != 0 {
                            return Err(LangError::Parse {
                                pos,
                                expected: "child object name without derivative marks".into(),
                                found: format!("`{}{}`", path.join("."), "'".repeat(order as usize)),
                            });
                        }
                        self.advance();
                        continue;
                    }
                    return Ok(VarRef { path, order });
                }
                _ => return Err(self.error("variable name")),
            }
        }
    }

    pub(crate) fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_binary_level(0)
    }

    /// Left-associative binary levels 0..=4; level 5 hands off to unary.
    fn parse_binary_level(&mut self, level: u8) -> PResult<Expr> {
        if level > 4 {
            return self.parse_unary();
        }
        let mut lhs = self.parse_binary_level(level + 1)?;
        while let Some(op) = self.peek().and_then(binary_op) {
            if op.precedence() != level {
                break;
            }
            self.advance();
            let rhs = self.parse_binary_level(level + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        if self.eat(&TokenKind::Minus) {
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.parse_unary()?)));
        }
        if self.eat(&TokenKind::Bang) {
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(self.parse_unary()?)));
        }
        let base = self.parse_primary()?;
        if self.eat(&TokenKind::Caret) {
            let exponent = self.parse_unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let pos = self.here();
        match self.peek() {
            Some(TokenKind::Num(v)) => {
                let v = *v;
                self.advance();
                Ok(Expr::Num(v))
            }
            Some(TokenKind::Str(s)) => {
                let s = s.clone();
                self.advance();
                Ok(Expr::Str(s))
            }
            Some(TokenKind::True) => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            Some(TokenKind::False) => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            Some(TokenKind::LParen) => {
                self.advance();
                let e = self.parse_expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            Some(TokenKind::LBracket) => self.parse_bracket(),
            Some(TokenKind::Ident(name, 0)) if self.peek_at(1) == Some(&TokenKind::LParen) => {
                let name = name.clone();
                let Some(builtin) = Builtin::from_name(&name) else {
                    return Err(LangError::Parse {
                        pos,
                        expected: "builtin function".into(),
                        found: format!("`{name}`"),
                    });
                };
                self.advance();
                let args = self.parse_args()?;
                if args.len() != builtin.arity() {
                    return Err(LangError::Parse {
                        pos,
                        expected: format!("{} argument(s) to `{name}`", builtin.arity()),
                        found: format!("{} argument(s)", args.len()),
                    });
                }
                Ok(Expr::Call(builtin, args))
            }
            Some(TokenKind::Ident(..)) => Ok(Expr::Var(self.parse_var_ref()?)),
            _ => Err(self.error("expression")),
        }
    }

    fn parse_bracket(&mut self) -> PResult<Expr> {
        let pos = self.here();
        self.expect(TokenKind::LBracket)?;
        if self.check(&TokenKind::RBracket) {
            return Err(self.error("at least one element"));
        }
        let mut items = Vec::new();
        loop {
            items.push(self.parse_expr()?);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RBracket)?;
        if items.iter().all(|e| matches!(e, Expr::Vector(_))) {
            let rows: Vec<Vec<Expr>> = items
                .into_iter()
                .map(|e| match e {
                    Expr::Vector(r) => r,
                    _ => unreachable!(),
                })
                .collect();
            let width = rows[0].len();
            if let Some(bad) = rows.iter().find(|r| r.len() != width) {
                return Err(LangError::Parse {
                    pos,
                    expected: format!("matrix rows of length {width}"),
                    found: format!("row of length {}", bad.len()),
                });
            }
            return Ok(Expr::Matrix(rows));
        }
        Ok(Expr::Vector(items))
    }
}

fn binary_op(kind: &TokenKind) -> Option<BinaryOp> {
    Some(match kind {
        TokenKind::OrOr => BinaryOp::Or,
        TokenKind::AndAnd => BinaryOp::And,
        TokenKind::Lt => BinaryOp::Lt,
        TokenKind::Gt => BinaryOp::Gt,
        TokenKind::Le => BinaryOp::Le,
        TokenKind::Ge => BinaryOp::Ge,
        TokenKind::EqEq => BinaryOp::Eq,
        TokenKind::Plus => BinaryOp::Add,
        TokenKind::Minus => BinaryOp::Sub,
        TokenKind::Star => BinaryOp::Mul,
        TokenKind::Slash => BinaryOp::Div,
        _ => return None,
    })
}

fn eof_pos(source: &str) -> Pos {
    let mut pos = Pos { line: 1, col: 1 };
    for c in source.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    }
    pos
}
