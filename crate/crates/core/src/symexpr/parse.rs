//! Recursive-descent parser for the scalar expression language.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | ident | ident "(" expr ")" | "(" expr ")" ;
//! ident   = [A-Za-z_][A-Za-z0-9_]* ;
//! ```

use super::expr::{Expr, HalfInt, Symbols, UnaryOp};
use super::SymError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), SymError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = bytes[self.pos] as char;
        if c.is_ascii_digit() || c == '.' {
            let mut end = self.pos;
            while end < bytes.len() && ((bytes[end] as char).is_ascii_digit() || bytes[end] == b'.')
            {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && (bytes[k] as char).is_ascii_digit() {
                    end = k;
                    while end < bytes.len() && (bytes[end] as char).is_ascii_digit() {
                        end += 1;
                    }
                }
            }
            let text = &self.src[self.pos..end];
            let v: f64 = text.parse().map_err(|_| SymError::Syntax {
                pos: start,
                message: format!("malformed number '{text}'"),
            })?;
            self.pos = end;
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = self.pos;
            while end < bytes.len()
                && ((bytes[end] as char).is_ascii_alphanumeric() || bytes[end] == b'_')
            {
                end += 1;
            }
            let id = self.src[self.pos..end].to_string();
            self.pos = end;
            return Ok((Tok::Ident(id), start));
        }
        self.pos += c.len_utf8();
        match c {
            '+' | '-' | '*' | '/' | '^' => Ok((Tok::Op(c), start)),
            '(' => Ok((Tok::LParen, start)),
            ')' => Ok((Tok::RParen, start)),
            _ => Err(SymError::Syntax {
                pos: start,
                message: format!("unexpected character '{c}'"),
            }),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: usize,
    symbols: &'a Symbols,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), SymError> {
        let (t, p) = self.lexer.next()?;
        self.tok = t;
        self.pos = p;
        Ok(())
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SymError> {
        if self.tok == want {
            self.bump()
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    fn syntax(&self, message: String) -> SymError {
        SymError::Syntax {
            pos: self.pos,
            message,
        }
    }

    fn expr(&mut self) -> Result<Expr, SymError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.bump()?;
                    lhs = lhs.add(&self.term()?);
                }
                Tok::Op('-') => {
                    self.bump()?;
                    lhs = lhs.sub(&self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SymError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.bump()?;
                    lhs = lhs.mul(&self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump()?;
                    lhs = lhs.div(&self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SymError> {
        match self.tok {
            Tok::Op('-') => {
                self.bump()?;
                Ok(self.unary()?.neg())
            }
            Tok::Op('+') => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, SymError> {
        let base = self.primary()?;
        if self.tok != Tok::Op('^') {
            return Ok(base);
        }
        self.bump()?;
        let exponent = self.unary()?;
        if let Some(k) = exponent.as_const().and_then(HalfInt::from_f64) {
            return Ok(base.powh(k));
        }
        // anything other than an integer or half-integer literal goes through exp(b ln a)
        Ok(exponent.mul(&base.ln()).exp())
    }

    fn primary(&mut self) -> Result<Expr, SymError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::constant(v))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.pos;
                self.bump()?;
                if self.tok == Tok::LParen {
                    let op = UnaryOp::from_name(&name).ok_or_else(|| SymError::Undeclared {
                        name: name.clone(),
                        pos: at,
                        hint: "unknown function".into(),
                    })?;
                    self.bump()?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')' after function argument")?;
                    return Ok(Expr::unary(op, &arg));
                }
                if let Some(i) = self.symbols.coord_index(&name) {
                    Ok(Expr::var(i))
                } else if let Some(i) = self.symbols.param_index(&name) {
                    Ok(Expr::param(i))
                } else if name == "pi" {
                    Ok(Expr::constant(std::f64::consts::PI))
                } else {
                    let hint = match name.strip_prefix('d') {
                        Some(rest) if self.symbols.coord_index(rest).is_some() => {
                            "differentials are not scalar expressions".to_string()
                        }
                        _ => "not a declared coordinate or parameter".to_string(),
                    };
                    Err(SymError::Undeclared {
                        name,
                        pos: at,
                        hint,
                    })
                }
            }
            Tok::End => Err(self.syntax("unexpected end of input".into())),
            other => Err(self.syntax(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse `text` against the coordinates and parameters in `symbols`.
pub fn parse(text: &str, symbols: &Symbols) -> Result<Expr, SymError> {
    let mut p = Parser {
        lexer: Lexer { src: text, pos: 0 },
        tok: Tok::End,
        pos: 0,
        symbols,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.syntax(format!("trailing input {:?}", p.tok)));
    }
    Ok(e)
}
