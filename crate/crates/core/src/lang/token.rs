//! Tokenizer for model source text.

use std::fmt;

use super::LangError;

/// A line/column position in source text (both 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Identifier with the number of trailing `'` marks folded in.
    Ident(String, u32),
    Num(f64),
    Str(String),
    // keywords
    Class,
    Private,
    End,
    If,
    Else,
    Switch,
    Case,
    Create,
    Terminate,
    True,
    False,
    // punctuation
    Eq,
    ColonEq,
    EqEq,
    Lt,
    Gt,
    Le,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        match self {
            Ident(name, order) => write!(f, "identifier `{}{}`", name, "'".repeat(*order as usize)),
            Num(v) => write!(f, "number `{v}`"),
            Str(s) => write!(f, "string \"{s}\""),
            Class => f.write_str("`class`"),
            Private => f.write_str("`private`"),
            End => f.write_str("`end`"),
            If => f.write_str("`if`"),
            Else => f.write_str("`else`"),
            Switch => f.write_str("`switch`"),
            Case => f.write_str("`case`"),
            Create => f.write_str("`create`"),
            Terminate => f.write_str("`terminate`"),
            True => f.write_str("`true`"),
            False => f.write_str("`false`"),
            Eq => f.write_str("`=`"),
            ColonEq => f.write_str("`:=`"),
            EqEq => f.write_str("`==`"),
            Lt => f.write_str("`<`"),
            Gt => f.write_str("`>`"),
            Le => f.write_str("`<=`"),
            Ge => f.write_str("`>=`"),
            AndAnd => f.write_str("`&&`"),
            OrOr => f.write_str("`||`"),
            Bang => f.write_str("`!`"),
            Plus => f.write_str("`+`"),
            Minus => f.write_str("`-`"),
            Star => f.write_str("`*`"),
            Slash => f.write_str("`/`"),
            Caret => f.write_str("`^`"),
            LParen => f.write_str("`(`"),
            RParen => f.write_str("`)`"),
            LBracket => f.write_str("`[`"),
            RBracket => f.write_str("`]`"),
            Comma => f.write_str("`,`"),
            Semi => f.write_str("`;`"),
            Dot => f.write_str("`.`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "class" => TokenKind::Class,
        "private" => TokenKind::Private,
        "end" => TokenKind::End,
        "if" => TokenKind::If,
        "else" => TokenKind::Else,
        "switch" => TokenKind::Switch,
        "case" => TokenKind::Case,
        "create" => TokenKind::Create,
        "terminate" => TokenKind::Terminate,
        "true" | "True" => TokenKind::True,
        "false" | "False" => TokenKind::False,
        _ => return None,
    })
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

/// Splits source text into tokens. Whitespace and `//` comments are dropped.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LangError> {
    let mut cur = Cursor { chars: source.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();

    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            match keyword(&word) {
                Some(kw) => kw,
                None => {
                    let mut order = 0;
                    while cur.eat('\'') {
                        order += 1;
                    }
                    TokenKind::Ident(word, order)
                }
            }
        } else if c.is_ascii_digit() || c == '.' && starts_fraction(&cur) {
            lex_number(&mut cur, pos)?
        } else {
            cur.bump();
            match c {
                '/' if cur.eat('/') => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                    continue;
                }
                '"' => {
                    let mut s = String::new();
                    loop {
                        match cur.bump() {
                            Some('"') => break,
                            Some(c) => s.push(c),
                            None => return Err(LangError::Lex { pos, message: "unterminated string literal".into() }),
                        }
                    }
                    TokenKind::Str(s)
                }
                ':' if cur.eat('=') => TokenKind::ColonEq,
                '=' if cur.eat('=') => TokenKind::EqEq,
                '=' => TokenKind::Eq,
                '<' if cur.eat('=') => TokenKind::Le,
                '<' => TokenKind::Lt,
                '>' if cur.eat('=') => TokenKind::Ge,
                '>' => TokenKind::Gt,
                '&' if cur.eat('&') => TokenKind::AndAnd,
                '|' if cur.eat('|') => TokenKind::OrOr,
                '!' => TokenKind::Bang,
                '+' => TokenKind::Plus,
                '-' => TokenKind::Minus,
                '*' => TokenKind::Star,
                '/' => TokenKind::Slash,
                '^' => TokenKind::Caret,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '[' => TokenKind::LBracket,
                ']' => TokenKind::RBracket,
                ',' => TokenKind::Comma,
                ';' => TokenKind::Semi,
                '.' => TokenKind::Dot,
                other => return Err(LangError::Lex { pos, message: format!("illegal character {other:?}") }),
            }
        };
        out.push(Token { kind, pos });
    }
    Ok(out)
}

fn starts_fraction(cur: &Cursor<'_>) -> bool {
    let mut it = cur.chars.clone();
    it.next();
    matches!(it.next(), Some(d) if d.is_ascii_digit())
}

fn lex_number(cur: &mut Cursor<'_>, pos: Pos) -> Result<TokenKind, LangError> {
    let mut text = String::new();
    let digits = |cur: &mut Cursor<'_>, text: &mut String| {
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                cur.bump();
            } else {
                break;
            }
        }
    };
    digits(cur, &mut text);
    // a `.` only continues the number when a digit follows (`s.p` stays a path)
    if cur.peek() == Some('.') && starts_fraction(cur) {
        text.push('.');
        cur.bump();
        digits(cur, &mut text);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let mut look = cur.chars.clone();
        look.next();
        let next = look.next();
        let next2 = look.next();
        let is_exp = match next {
            Some(d) if d.is_ascii_digit() => true,
            Some('+' | '-') => matches!(next2, Some(d) if d.is_ascii_digit()),
            _ => false,
        };
        if is_exp {
            text.push('e');
            cur.bump();
            if let Some(sign @ ('+' | '-')) = cur.peek() {
                text.push(sign);
                cur.bump();
            }
            digits(cur, &mut text);
        }
    }
    text.parse::<f64>()
        .map(TokenKind::Num)
        .map_err(|_| LangError::Lex { pos, message: format!("malformed number `{text}`") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn id(name: &str, order: u32) -> TokenKind {
        Ident(name.to_string(), order)
    }

    #[test]
    fn pendulum_equation() {
        assert_eq!(
            kinds("theta'' = g/l*cos(theta);"),
            vec![
                id("theta", 2),
                Eq,
                id("g", 0),
                Slash,
                id("l", 0),
                Star,
                id("cos", 0),
                LParen,
                id("theta", 0),
                RParen,
                Semi
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(kinds("").is_empty());
    }

    #[test]
    fn discrete_vector() {
        assert_eq!(
            kinds("x := [1,2];"),
            vec![id("x", 0), ColonEq, LBracket, Num(1.0), Comma, Num(2.0), RBracket, Semi]
        );
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("// header\n  x = 1.5e-3 // trailing\n").unwrap();
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(toks[2].kind, Num(1.5e-3));
    }

    #[test]
    fn child_path_and_fraction() {
        assert_eq!(kinds("s.p .5"), vec![id("s", 0), Dot, id("p", 0), Num(0.5)]);
        assert_eq!(kinds("_3D"), vec![id("_3D", 0)]);
    }

    #[test]
    fn illegal_character_is_positioned() {
        match tokenize("x = 1;\n  y = #") {
            Err(LangError::Lex { pos, .. }) => assert_eq!(pos, Pos { line: 2, col: 7 }),
            other => panic!("unexpected {other:?}"),
        }
    }
}
