//! Recursive-descent parser for the potential grammar.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          exponent must fold to an integer literal
//! atom    := number | 'x' index | func '(' sum ')' | '(' sum ')'
//! ```

use super::ast::{Expr, Func};
use super::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(ch) = self.src[self.pos..].chars().next() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the token and the byte offset where it starts.
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(ch) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if ch.is_ascii_digit() || ch == '.' {
            let bytes = rest.as_bytes();
            let mut end = 0;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &rest[..end];
            let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            self.pos += end;
            return Ok((Tok::Num(value), start));
        }
        if ch.is_ascii_alphabetic() {
            let end = rest
                .find(|c: char| !c.is_ascii_alphanumeric())
                .unwrap_or(rest.len());
            self.pos += end;
            return Ok((Tok::Ident(rest[..end].to_string()), start));
        }
        Err(ExprError::Syntax {
            offset: start,
            message: format!("unexpected character '{ch}'"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    dim: usize,
}

pub(crate) fn parse_tree(source: &str, dim: usize) -> Result<Expr, ExprError> {
    let mut lexer = Lexer { src: source, pos: 0 };
    let (tok, at) = lexer.next()?;
    let mut p = Parser {
        lexer,
        tok,
        at,
        dim,
    };
    let e = p.sum()?;
    if p.tok != Tok::End {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

impl Parser<'_> {
    fn bump(&mut self) -> Result<(), ExprError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn syntax(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.at,
            message: message.to_string(),
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Minus => {
                    self.bump()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            return Ok(match self.unary()? {
                Expr::Const(v) => Expr::Const(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        let at = self.at;
        let exponent = self.unary()?;
        match exponent {
            Expr::Const(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                Ok(Expr::Pow(Box::new(base), v as i32))
            }
            _ => Err(ExprError::Syntax {
                offset: at,
                message: "exponent must be an integer literal".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.sum()?;
                if self.tok != Tok::RParen {
                    return Err(self.syntax("expected ')'"));
                }
                self.bump()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.at;
                if let Some(func) = Func::from_name(&name) {
                    self.bump()?;
                    if self.tok != Tok::LParen {
                        return Err(self.syntax("expected '(' after function name"));
                    }
                    self.bump()?;
                    let arg = self.sum()?;
                    if self.tok != Tok::RParen {
                        return Err(self.syntax("expected ')'"));
                    }
                    self.bump()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                let index = name
                    .strip_prefix('x')
                    .filter(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|digits| digits.parse::<usize>().ok())
                    .ok_or_else(|| ExprError::UnknownIdentifier {
                        offset: at,
                        name: name.clone(),
                    })?;
                if index == 0 || index > self.dim {
                    return Err(ExprError::DimensionMismatch {
                        offset: at,
                        index,
                        dim: self.dim,
                    });
                }
                self.bump()?;
                Ok(Expr::Var(index - 1))
            }
            Tok::End => Err(self.syntax("unexpected end of input")),
            _ => Err(self.syntax("expected a number, variable, function or '('")),
        }
    }
}
