//! Complex expressions in one variable `z`: literals, `i`, `+ - * /`,
//! integer powers, parentheses and implicit multiplication (`2iz^2`).
//! Every expression is a rational function of `z`, hence holomorphic off
//! its poles.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Z,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.sum()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(Error::Expression(format!("unexpected '{}' at offset {}", t.tok, t.at))),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Z => z,
            Expr::Neg(a) => -a.eval(z),
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Div(a, b) => a.eval(z) / b.eval(z),
            Expr::Pow(a, n) => a.eval(z).powi(*n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Z,
    I,
    Op(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Z => write!(f, "z"),
            Tok::I => write!(f, "i"),
            Tok::Op(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    at: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let at = i;
        match c {
            ' ' | '\t' => i += 1,
            'z' | 'Z' => {
                out.push(Token { tok: Tok::Z, at });
                i += 1;
            }
            'i' | 'I' => {
                out.push(Token { tok: Tok::I, at });
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                out.push(Token { tok: Tok::Op(c), at });
                i += 1;
            }
            '0'..='9' | '.' => {
                let mut end = i;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                // exponent only when followed by digits, so "2e" is an error
                // rather than a silent product
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
                let text = &src[i..end];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Expression(format!("bad number '{text}' at offset {at}")))?;
                out.push(Token { tok: Tok::Num(v), at });
                i = end;
            }
            _ => return Err(Error::Expression(format!("unexpected character '{c}' at offset {at}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn at_op(&self, op: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Op(c), .. }) if *c == op)
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            if self.at_op('+') {
                self.pos += 1;
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.at_op('-') {
                self.pos += 1;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.at_op('*') {
                self.pos += 1;
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.at_op('/') {
                self.pos += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(
                self.peek().map(|t| &t.tok),
                Some(Tok::Num(_) | Tok::Z | Tok::I | Tok::Op('('))
            ) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.at_op('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.at_op('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if !self.at_op('^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.at_op('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next() {
            Some(Token { tok: Tok::Num(v), at }) => {
                if v.fract() != 0.0 || v.abs() > 64.0 {
                    return Err(Error::Expression(format!(
                        "exponent at offset {at} must be an integer of size at most 64"
                    )));
                }
                let n = if negative { -(v as i32) } else { v as i32 };
                Ok(Expr::Pow(Box::new(base), n))
            }
            Some(t) => Err(Error::Expression(format!(
                "expected an integer exponent at offset {}",
                t.at
            ))),
            None => Err(Error::Expression("expected an integer exponent at end of input".into())),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token { tok: Tok::Num(v), .. }) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Some(Token { tok: Tok::I, .. }) => Ok(Expr::Const(Complex64::i())),
            Some(Token { tok: Tok::Z, .. }) => Ok(Expr::Z),
            Some(Token { tok: Tok::Op('('), at }) => {
                let e = self.sum()?;
                if !self.at_op(')') {
                    return Err(Error::Expression(format!("unclosed '(' at offset {at}")));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(t) => Err(Error::Expression(format!("unexpected '{}' at offset {}", t.tok, t.at))),
            None => Err(Error::Expression("unexpected end of input".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eval(src: &str, z: Complex64) -> Complex64 {
        Expr::parse(src).unwrap().eval(z)
    }

    #[test]
    fn examples() {
        let z = c(0.5, -1.5);
        assert_eq!(eval("z", z), z);
        assert_eq!(eval("1", z), c(1.0, 0.0));
        assert_eq!(eval("2i", z), c(0.0, 2.0));
        assert_eq!(eval("-z^2", z), -(z * z));
        assert_eq!(eval("2z^2", z), 2.0 * z * z);
        assert_eq!(eval("(1+i)(z-2)", z), c(1.0, 1.0) * (z - 2.0));
        assert_eq!(eval("1/z^-2", z), 1.0 / z.powi(-2));
        assert_eq!(eval("z/2*3", z), z / 2.0 * 3.0);
        assert_eq!(eval("1 - 2 - 3", z), c(-4.0, 0.0));
        assert_eq!(eval("1.5e-1z", z), 0.15 * z);
    }

    #[test]
    fn errors() {
        for bad in ["", "z +", "(z", "z^1.5", "z^", "w", "2e", "z)", "z^z", "2^3^1"] {
            assert!(matches!(Expr::parse(bad), Err(Error::Expression(_))), "{bad}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn polynomial_matches_direct_evaluation(
            a in -3.0..3.0f64, b in -3.0..3.0f64, n in 0u32..5, re in -2.0..2.0f64, im in -2.0..2.0f64
        ) {
            let z = c(re, im);
            let src = format!("({a}) + ({b})i z^{n}");
            let expect = c(a, 0.0) + c(0.0, b) * z.powu(n);
            prop_assert!((eval(&src, z) - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
        }
    }
}
