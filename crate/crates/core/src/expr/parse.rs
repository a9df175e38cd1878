//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr    := term { ("+"|"-") term } ;
//! term    := factor { ("*"|"/") factor } ;
//! factor  := "-" factor | power ;
//! power   := atom [ "^" integer ] ;
//! atom    := number [ "i" ] | "i" | "z" | "(" expr ")" | ident "(" expr ")" ;
//! ident   := "exp" | "sin" | "cos" ;
//! number  := digits [ "." digits ] ;
//! ```

use std::fmt;

use num_complex::Complex;
use thiserror::Error;

use super::Expr;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    /// Byte offset of the offending token.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at byte {}: found {}, expected one of: {}",
            self.offset,
            self.found,
            self.expected.join(", ")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Number(&'a str),
    Imag,
    Var,
    Ident(Func),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Imag => "`i`".into(),
            Tok::Var => "`z`".into(),
            Tok::Ident(Func::Exp) => "`exp`".into(),
            Tok::Ident(Func::Sin) => "`sin`".into(),
            Tok::Ident(Func::Cos) => "`cos`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const ATOM_START: &[&str] = &["number", "`i`", "`z`", "`(`", "`exp`", "`sin`", "`cos`", "`-`"];

fn lex(src: &str) -> Result<Vec<(usize, Tok<'_>)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        if b.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'.' {
                    pos += 1;
                    let frac = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    if pos == frac {
                        return Err(SyntaxError {
                            offset: pos,
                            expected: vec!["digits"],
                            found: describe_char(src, pos),
                        });
                    }
                }
                out.push((start, Tok::Number(&src[start..pos])));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() {
                    pos += 1;
                }
                let tok = match &src[start..pos] {
                    "i" => Tok::Imag,
                    "z" => Tok::Var,
                    "exp" => Tok::Ident(Func::Exp),
                    "sin" => Tok::Ident(Func::Sin),
                    "cos" => Tok::Ident(Func::Cos),
                    word => {
                        return Err(SyntaxError {
                            offset: start,
                            expected: ATOM_START.to_vec(),
                            found: format!("identifier `{word}`"),
                        })
                    }
                };
                out.push((start, tok));
                continue;
            }
            _ => {
                return Err(SyntaxError {
                    offset: start,
                    expected: ATOM_START.to_vec(),
                    found: describe_char(src, start),
                })
            }
        };
        pos += 1;
        out.push((start, tok));
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

fn describe_char(src: &str, pos: usize) -> String {
    match src[pos..].chars().next() {
        Some(c) => format!("`{c}`"),
        None => "end of input".into(),
    }
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok<'a>)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok<'a> {
        &self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (usize, Tok<'a>) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> SyntaxError {
        let (offset, tok) = &self.tokens[self.pos];
        SyntaxError {
            offset: *offset,
            expected: expected.to_vec(),
            found: tok.describe(),
        }
    }

    fn expr<T: Real>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor<T: Real>(&mut self) -> Result<Expr<T>, SyntaxError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power<T: Real>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match self.peek().clone() {
            Tok::Number(text) if !text.contains('.') => {
                let exponent = text.parse::<u32>().map_err(|_| SyntaxError {
                    offset: self.tokens[self.pos].0,
                    expected: vec!["integer exponent below 2^32"],
                    found: format!("number `{text}`"),
                })?;
                self.bump();
                Ok(Expr::Pow(Box::new(base), exponent))
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    fn atom<T: Real>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let (offset, tok) = self.bump();
        match tok {
            Tok::Number(text) => {
                let value = text
                    .parse::<f64>()
                    .ok()
                    .and_then(T::from_f64)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| SyntaxError {
                        offset,
                        expected: vec!["finite number"],
                        found: format!("number `{text}`"),
                    })?;
                if *self.peek() == Tok::Imag {
                    self.bump();
                    Ok(Expr::Constant(Complex::new(T::zero(), value)))
                } else {
                    Ok(Expr::real(value))
                }
            }
            Tok::Imag => Ok(Expr::Constant(Complex::new(T::zero(), T::one()))),
            Tok::Var => Ok(Expr::Variable),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(func) => {
                if *self.peek() != Tok::LParen {
                    return Err(self.error(&["`(`"]));
                }
                self.bump();
                let arg = Box::new(self.expr()?);
                self.expect_rparen()?;
                Ok(match func {
                    Func::Exp => Expr::Exp(arg),
                    Func::Sin => Expr::Sin(arg),
                    Func::Cos => Expr::Cos(arg),
                })
            }
            other => Err(SyntaxError {
                offset,
                expected: ATOM_START.to_vec(),
                found: other.describe(),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["`)`", "`+`", "`-`", "`*`", "`/`", "`^`"]))
        }
    }
}

pub(super) fn parse<T: Real>(src: &str) -> Result<Expr<T>, SyntaxError> {
    let mut parser = Parser {
        tokens: lex(src)?,
        pos: 0,
    };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error(&["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = Expr<f64>;

    fn p(s: &str) -> E {
        parse(s).unwrap()
    }

    fn b(e: E) -> Box<E> {
        Box::new(e)
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(
            p("i*z"),
            E::Mul(b(E::Constant(Complex::new(0.0, 1.0))), b(E::Variable))
        );
        assert_eq!(
            p("z^5*exp(z)"),
            E::Mul(b(E::Pow(b(E::Variable), 5)), b(E::Exp(b(E::Variable))))
        );
        assert_eq!(
            p("z^3*(z-1)^3"),
            E::Mul(
                b(E::Pow(b(E::Variable), 3)),
                b(E::Pow(b(E::Sub(b(E::Variable), b(E::real(1.0)))), 3))
            )
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // ^ binds tighter than unary minus
        assert_eq!(p("-z^2"), E::Neg(b(E::Pow(b(E::Variable), 2))));
        // left associative
        assert_eq!(
            p("z-1-2"),
            E::Sub(b(E::Sub(b(E::Variable), b(E::real(1.0)))), b(E::real(2.0)))
        );
        assert_eq!(
            p("z/2/3"),
            E::Div(b(E::Div(b(E::Variable), b(E::real(2.0)))), b(E::real(3.0)))
        );
        assert_eq!(
            p("1+2*z"),
            E::Add(b(E::real(1.0)), b(E::Mul(b(E::real(2.0)), b(E::Variable))))
        );
    }

    #[test]
    fn imaginary_juxtaposition_and_whitespace() {
        assert_eq!(
            p("1+2i"),
            E::Add(b(E::real(1.0)), b(E::Constant(Complex::new(0.0, 2.0))))
        );
        assert_eq!(p(" 2.5 i "), E::Constant(Complex::new(0.0, 2.5)));
        assert_eq!(p("( z )"), E::Variable);
        assert_eq!(p("sin ( z )"), E::Sin(b(E::Variable)));
    }

    #[test]
    fn syntax_errors_carry_offset_and_expectations() {
        let err = parse::<f64>("z^").unwrap_err();
        assert_eq!(err.offset, 2);
        assert_eq!(err.expected, vec!["integer"]);

        let err = parse::<f64>("z^1.5").unwrap_err();
        assert_eq!(err.offset, 2);

        let err = parse::<f64>("(z+1").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.expected.contains(&"`)`"));

        let err = parse::<f64>("log(z)").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(err.found.contains("log"));

        let err = parse::<f64>("z z").unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(err.expected.contains(&"end of input"));

        let err = parse::<f64>("1.").unwrap_err();
        assert_eq!(err.offset, 2);

        let err = parse::<f64>("").unwrap_err();
        assert_eq!(err.offset, 0);
        assert_eq!(err.found, "end of input");

        let err = parse::<f64>("exp z").unwrap_err();
        assert_eq!(err.offset, 4);

        assert!(parse::<f64>("z^-1").is_err());
        assert!(parse::<f64>("z & 1").is_err());
    }
}
