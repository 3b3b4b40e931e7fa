//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' uint)?
//! base   := number | ident | '(' expr ')' | func '(' expr ')' | '-' base
//! func   := 'ln' | 'sin' | 'cos'
//! ident  := 'x' | 'r' | 'theta'      ('pi' is a predefined constant)
//! ```
//!
//! Unary minus is a `base`, so it binds tighter than `^`: `-x^2` is `(-x)^2`.

use std::fmt;

use super::{Expr, Var, VarSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnknownIdentifier(String),
    VariableNotAllowed(String),
    InvalidExponent(String),
    InvalidNumber(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken { found, expected } => write!(f, "expected {expected}, found '{found}'"),
            ParseErrorKind::UnexpectedEnd { expected } => write!(f, "expected {expected}, found end of input"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::VariableNotAllowed(name) => write!(f, "variable '{name}' is not allowed here"),
            ParseErrorKind::InvalidExponent(text) => write!(f, "exponent must be a non-negative integer, found '{text}'"),
            ParseErrorKind::InvalidNumber(text) => write!(f, "invalid number '{text}'"),
        }
    }
}

/// A parse failure. `position` is a 0-based character offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let col = self.position + 1;
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}' at column {col}"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected} at column {col}, found '{found}'")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "expected {expected} at column {col}, found end of input")
            }
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier '{name}' at column {col}")
            }
            ParseErrorKind::VariableNotAllowed(name) => {
                write!(f, "variable '{name}' is not allowed here (column {col})")
            }
            ParseErrorKind::InvalidExponent(text) => {
                write!(f, "exponent must be a non-negative integer, found '{text}' at column {col}")
            }
            ParseErrorKind::InvalidNumber(text) => write!(f, "invalid number '{text}' at column {col}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Number(s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push((Tok::Number(chars[start..i].iter().collect()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), start));
                continue;
            }
            other => {
                return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(other), position: i })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vars: VarSet,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn fail<T>(&self, expected: &'static str) -> Result<T, ParseError> {
        let kind = match self.peek() {
            Some(t) => ParseErrorKind::UnexpectedToken { found: t.text(), expected },
            None => ParseErrorKind::UnexpectedEnd { expected },
        };
        Err(ParseError { kind, position: self.here() })
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(expected)
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc = acc / self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        match self.next() {
            Some((Tok::Number(text), at)) => {
                let n: u32 = text.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::InvalidExponent(text.clone()),
                    position: at,
                })?;
                Ok(base.powi(n))
            }
            Some((tok, at)) => Err(ParseError {
                kind: ParseErrorKind::InvalidExponent(tok.text()),
                position: at,
            }),
            None => Err(ParseError {
                kind: ParseErrorKind::UnexpectedEnd { expected: "exponent" },
                position: self.end,
            }),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let Some((tok, at)) = self.next() else {
            return Err(ParseError {
                kind: ParseErrorKind::UnexpectedEnd { expected: "operand" },
                position: self.end,
            });
        };
        match tok {
            Tok::Number(text) => {
                let valid = text.chars().filter(|&c| c == '.').count() <= 1
                    && text.chars().any(|c| c.is_ascii_digit());
                match text.parse::<f64>() {
                    Ok(v) if valid => Ok(Expr::constant(v)),
                    _ => Err(ParseError { kind: ParseErrorKind::InvalidNumber(text), position: at }),
                }
            }
            Tok::Minus => Ok(-self.base()?),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(name, at),
            other => {
                self.pos -= 1;
                let _ = other;
                self.fail("operand")
            }
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        let func: Option<fn(&Expr) -> Expr> = match name.as_str() {
            "ln" => Some(Expr::ln),
            "sin" => Some(Expr::sin),
            "cos" => Some(Expr::cos),
            _ => None,
        };
        if let Some(apply) = func {
            self.expect(Tok::LParen, "'(' after function name")?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(apply(&arg));
        }
        let var = match name.as_str() {
            "pi" => return Ok(Expr::constant(std::f64::consts::PI)),
            "x" => Var::X,
            "r" => Var::R,
            "theta" => Var::Theta,
            _ => {
                return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), position: at })
            }
        };
        if !self.vars.contains(var) {
            return Err(ParseError { kind: ParseErrorKind::VariableNotAllowed(name), position: at });
        }
        Ok(Expr::var(var))
    }
}

/// Parses `text` into an expression over the variables in `vars`.
pub fn parse_expr(text: &str, vars: VarSet) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::Empty, position: 0 });
    }
    let end = text.chars().count();
    let mut parser = Parser { toks, pos: 0, end, vars };
    let e = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return parser.fail("operator or end of input");
    }
    Ok(e)
}
