//! Recursive-descent parser for the polynomial expression grammar.
//!
//! ```text
//! expression := term (('+'|'-') term)*
//! term       := factor (('*'|'/') factor)*
//! factor     := coefficient | identifier ('^' uint)? | '(' expression ')' | '-' factor
//! coefficient := decimal literal
//! ```
//!
//! Whitespace is insignificant. Implicit multiplication is not allowed.
//! A `/` divisor must reduce to a nonzero constant; this covers the
//! coefficient ratio "1/100" as well as "x^2/100". Products are expanded
//! eagerly into the canonical sparse sum.

use crate::poly::{MultiPoly, PolyError, VarSpace};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Ident(String),
    Number { value: f64, is_int: bool },
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), PolyError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((start, Tok::Eof));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ if c.is_ascii_digit() || c == b'.' => {
                return self.lex_number(start);
            }
            _ if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end])
                    .unwrap()
                    .to_string();
                self.pos = end;
                return Ok((start, Tok::Ident(name)));
            }
            _ => {
                return Err(PolyError::Syntax {
                    pos: start,
                    expected: "a token".into(),
                })
            }
        };
        self.pos += 1;
        Ok((start, tok))
    }

    fn lex_number(&mut self, start: usize) -> Result<(usize, Tok), PolyError> {
        let mut end = self.pos;
        let mut is_int = true;
        while end < self.src.len() && self.src[end].is_ascii_digit() {
            end += 1;
        }
        if end < self.src.len() && self.src[end] == b'.' {
            is_int = false;
            end += 1;
            while end < self.src.len() && self.src[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
            let mut k = end + 1;
            if k < self.src.len() && (self.src[k] == b'+' || self.src[k] == b'-') {
                k += 1;
            }
            if k < self.src.len() && self.src[k].is_ascii_digit() {
                is_int = false;
                end = k;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
        let value: f64 = text.parse().map_err(|_| PolyError::Syntax {
            pos: start,
            expected: "a numeric literal".into(),
        })?;
        self.pos = end;
        Ok((start, Tok::Number { value, is_int }))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    look: (usize, Tok),
    space: &'a VarSpace,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, space: &'a VarSpace) -> Result<Self, PolyError> {
        let mut lexer = Lexer::new(src);
        let look = lexer.next()?;
        Ok(Parser { lexer, look, space })
    }

    fn bump(&mut self) -> Result<(usize, Tok), PolyError> {
        let prev = std::mem::replace(&mut self.look, (0, Tok::Eof));
        self.look = self.lexer.next()?;
        Ok(prev)
    }

    fn err(&self, expected: &str) -> PolyError {
        PolyError::Syntax {
            pos: self.look.0,
            expected: expected.into(),
        }
    }

    fn expression(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.term()?;
        loop {
            match self.look.1 {
                Tok::Plus => {
                    self.bump()?;
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump()?;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.factor()?;
        loop {
            match self.look.1 {
                Tok::Star => {
                    self.bump()?;
                    acc = acc.mul(&self.factor()?);
                }
                Tok::Slash => {
                    let (pos, _) = self.bump()?;
                    let divisor = self.factor()?;
                    if divisor.degree() > 0 {
                        return Err(PolyError::Syntax {
                            pos,
                            expected: "a constant divisor".into(),
                        });
                    }
                    let c = divisor.coeff(&vec![0; divisor.num_vars()]);
                    if c == 0.0 {
                        return Err(PolyError::Syntax {
                            pos,
                            expected: "a nonzero divisor".into(),
                        });
                    }
                    acc = acc.div_scalar(c);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<MultiPoly, PolyError> {
        match self.look.1.clone() {
            Tok::Minus => {
                self.bump()?;
                Ok(self.factor()?.neg())
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expression()?;
                if self.look.1 != Tok::RParen {
                    return Err(self.err("`)`"));
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Number { value, .. } => {
                self.bump()?;
                Ok(MultiPoly::constant(self.space, value))
            }
            Tok::Ident(name) => {
                let var = self
                    .space
                    .index_of(&name)
                    .ok_or(PolyError::UnknownVariable(name.clone()))?;
                self.bump()?;
                let mut power = 1u32;
                if self.look.1 == Tok::Caret {
                    self.bump()?;
                    match self.look.1 {
                        Tok::Number {
                            value,
                            is_int: true,
                        } if value >= 0.0 => {
                            power = value as u32;
                            self.bump()?;
                        }
                        _ => return Err(self.err("a non-negative integer exponent")),
                    }
                }
                Ok(MultiPoly::monomial(self.space, var, power, 1.0))
            }
            _ => Err(self.err("a coefficient, identifier, `(` or `-`")),
        }
    }
}

/// Parse `text` into a canonical [`MultiPoly`] over `space`.
pub fn parse_poly(text: &str, space: &VarSpace) -> Result<MultiPoly, PolyError> {
    let mut p = Parser::new(text, space)?;
    let poly = p.expression()?;
    if p.look.1 != Tok::Eof {
        return Err(PolyError::Syntax {
            pos: p.look.0,
            expected: "end of input, `+`, `-` or `*`".into(),
        });
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(names: &[&str]) -> VarSpace {
        VarSpace::new(names.to_vec()).unwrap()
    }

    #[test]
    fn parses_conic() {
        let s = space(&["x1", "x2"]);
        let p = parse_poly("4*x1^2 + x2^2 - 4*x1", &s).unwrap();
        assert_eq!(p.coeff(&[2, 0]), 4.0);
        assert_eq!(p.coeff(&[0, 2]), 1.0);
        assert_eq!(p.coeff(&[1, 0]), -4.0);
        assert_eq!(p.num_terms(), 3);
    }

    #[test]
    fn parses_zero() {
        let s = space(&["x1"]);
        let p = parse_poly("0", &s).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.degree(), -1);
    }

    #[test]
    fn expands_joint_product() {
        let s = space(&["x1", "x2", "A", "B"]);
        let p = parse_poly("A*(x1-A)*(x1^2+x2^2) - B^2*x1^2", &s).unwrap();
        assert_eq!(p.degree(), 4);
        assert_eq!(p.eval(&[1.0, 0.0, 1.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn parses_ratio_coefficients() {
        let s = space(&["x", "y"]);
        let p = parse_poly("x^2 + 1/100*y^2 - 1/100", &s).unwrap();
        assert_eq!(p.coeff(&[0, 2]), 0.01);
        assert_eq!(p.coeff(&[0, 0]), -0.01);
    }

    #[test]
    fn rejects_unknown_variable() {
        let s = space(&["x"]);
        assert_eq!(
            parse_poly("x + y", &s),
            Err(PolyError::UnknownVariable("y".into()))
        );
    }

    #[test]
    fn rejects_implicit_multiplication() {
        let s = space(&["x", "y"]);
        assert!(matches!(
            parse_poly("2 x", &s),
            Err(PolyError::Syntax { .. })
        ));
        assert!(matches!(
            parse_poly("x y", &s),
            Err(PolyError::Syntax { .. })
        ));
    }

    #[test]
    fn reports_error_position() {
        let s = space(&["x"]);
        match parse_poly("x + ", &s) {
            Err(PolyError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn exponent_only_after_identifier() {
        let s = space(&["x"]);
        assert!(matches!(
            parse_poly("(x+1)^2", &s),
            Err(PolyError::Syntax { .. })
        ));
    }
}
