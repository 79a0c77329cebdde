//! Text syntax for tropical fractions.
//!
//! ```text
//! sum     := product ('+' product)*
//! product := power (('*' | '/') power)*
//! power   := atom ('^' ['-'] digits)?
//! atom    := numeral | '{' p/q '}' | var | abs(sum) | meet(sum, sum) | '(' sum ')'
//! numeral := ['-'] digits ['.' digits]
//! var     := x1 | x2 | ... | x | y | z | w
//! ```
//!
//! Numerals are log-scale values: `3*x1` is the monomial `3 + p₁`, `+` is
//! tropical addition (max) and `/` tropical division. There is no subtraction.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::rational::RationalFunction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rat),
    /// Zero-based variable index.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Abs(Box<Expr>),
    Meet(Box<Expr>, Box<Expr>),
}

/// Integers print plainly, other rationals in braces so that `/` stays an operator.
pub fn fmt_numeral(r: &Rat) -> String {
    if r.is_integer() {
        fmt_rat(r)
    } else {
        format!("{{{}}}", fmt_rat(r))
    }
}

impl Expr {
    /// Number of variables referenced (highest index + 1).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Meet(a, b) => a.arity().max(b.arity()),
            Expr::Pow(a, _) | Expr::Abs(a) => a.arity(),
        }
    }

    /// Builds the rational function in `n` variables, pruning after each step.
    pub fn to_function(&self, n: usize) -> Result<RationalFunction> {
        if self.arity() > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.arity(),
            });
        }
        self.build(n)
    }

    fn build(&self, n: usize) -> Result<RationalFunction> {
        Ok(match self {
            Expr::Num(c) => RationalFunction::constant(n, c.clone()),
            Expr::Var(i) => RationalFunction::var(n, *i),
            Expr::Add(a, b) => a.build(n)?.add(&b.build(n)?)?.simplified(),
            Expr::Mul(a, b) => a.build(n)?.mul(&b.build(n)?)?.simplified(),
            Expr::Div(a, b) => a.build(n)?.div(&b.build(n)?)?.simplified(),
            Expr::Pow(a, k) => a.build(n)?.pow(*k).simplified(),
            Expr::Abs(a) => a.build(n)?.abs().simplified(),
            Expr::Meet(a, b) => a.build(n)?.meet(&b.build(n)?)?.simplified(),
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) => 0,
            Expr::Mul(..) | Expr::Div(..) => 1,
            Expr::Pow(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool| {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        let binary = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, p: u8| {
            side(f, a, a.prec() < p)?;
            write!(f, "{op}")?;
            side(f, b, b.prec() <= p)
        };
        match self {
            Expr::Num(c) => write!(f, "{}", fmt_numeral(c)),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Add(a, b) => binary(f, a, " + ", b, 0),
            Expr::Mul(a, b) => binary(f, a, "*", b, 1),
            Expr::Div(a, b) => binary(f, a, "/", b, 1),
            Expr::Pow(a, k) => {
                side(f, a, a.prec() < 3)?;
                write!(f, "^{k}")
            }
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Meet(a, b) => write!(f, "meet({a}, {b})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut acc = self.product()?;
        while self.eat('+') {
            acc = Expr::Add(Box::new(acc), Box::new(self.product()?));
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = Expr::Mul(Box::new(acc), Box::new(self.power()?));
            } else if self.eat('/') {
                acc = Expr::Div(Box::new(acc), Box::new(self.power()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let neg = self.eat('-');
        self.skip_ws();
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            self.pos = start;
            return self.err("expected integer exponent");
        }
        let k: i64 = match digits.parse() {
            Ok(k) => k,
            Err(_) => {
                self.pos = start;
                return self.err("exponent out of range");
            }
        };
        Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }))
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(c) = self.peek() else {
            return self.err("unexpected end of input");
        };
        let start = self.pos;
        match c {
            '(' => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            '{' => {
                self.pos += 1;
                self.skip_ws();
                let body = self.take_while(|c| c != '}');
                let r = match parse_rat(body) {
                    Ok(r) => r,
                    Err(_) => {
                        self.pos = start;
                        return self.err(format!("invalid rational `{body}`"));
                    }
                };
                self.expect('}')?;
                Ok(Expr::Num(r))
            }
            '-' | '0'..='9' | '.' => {
                let mut seen_digit = false;
                let text = {
                    let s = self.pos;
                    self.pos += c.len_utf8();
                    if c.is_ascii_digit() {
                        seen_digit = true;
                    }
                    let rest = self.take_while(|c| c.is_ascii_digit() || c == '.');
                    seen_digit |= rest.chars().any(|c| c.is_ascii_digit());
                    &self.src[s..self.pos]
                };
                if !seen_digit {
                    self.pos = start;
                    return self.err("expected numeral");
                }
                match parse_rat(text) {
                    Ok(r) => Ok(Expr::Num(r)),
                    Err(_) => {
                        self.pos = start;
                        self.err(format!("invalid numeral `{text}`"))
                    }
                }
            }
            c if c.is_ascii_alphabetic() => {
                let word = self.take_while(|c| c.is_ascii_alphanumeric());
                match word {
                    "abs" => {
                        self.expect('(')?;
                        let e = self.sum()?;
                        self.expect(')')?;
                        Ok(Expr::Abs(Box::new(e)))
                    }
                    "meet" => {
                        self.expect('(')?;
                        let a = self.sum()?;
                        self.expect(',')?;
                        let b = self.sum()?;
                        self.expect(')')?;
                        Ok(Expr::Meet(Box::new(a), Box::new(b)))
                    }
                    "x" => Ok(Expr::Var(0)),
                    "y" => Ok(Expr::Var(1)),
                    "z" => Ok(Expr::Var(2)),
                    "w" => Ok(Expr::Var(3)),
                    w => match w.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                        Some(i) if i >= 1 => Ok(Expr::Var(i - 1)),
                        _ => {
                            self.pos = start;
                            self.err(format!("unknown identifier `{w}`"))
                        }
                    },
                }
            }
            _ => self.err(format!("unexpected `{c}`")),
        }
    }
}

/// Parses an expression; errors carry the byte offset of the problem.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.sum()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses and builds a function. Without `n`, the arity is the highest variable index.
pub fn parse_function(src: &str, n: Option<usize>) -> Result<RationalFunction> {
    let e = parse(src)?;
    let n = match n {
        Some(n) => n,
        None => e.arity().max(1),
    };
    e.to_function(n)
}

/// Converts a function back to an expression tree (`num / den`).
pub fn to_expr(f: &RationalFunction) -> Expr {
    let poly = |p: &crate::poly::Polynomial| {
        let mut acc: Option<Expr> = None;
        for t in p.terms() {
            let mut m: Option<Expr> = None;
            let push = |m: &mut Option<Expr>, e: Expr| {
                *m = Some(match m.take() {
                    None => e,
                    Some(a) => Expr::Mul(Box::new(a), Box::new(e)),
                });
            };
            if !t.coeff.is_zero() || t.is_constant() {
                push(&mut m, Expr::Num(t.coeff.clone()));
            }
            for (i, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => push(&mut m, Expr::Var(i)),
                    _ => push(&mut m, Expr::Pow(Box::new(Expr::Var(i)), e)),
                }
            }
            let m = m.expect("constant monomials print their coefficient");
            acc = Some(match acc {
                None => m,
                Some(a) => Expr::Add(Box::new(a), Box::new(m)),
            });
        }
        acc.expect("polynomials are nonempty")
    };
    let num = poly(&f.num);
    let den_one = f.den.len() == 1 && f.den.terms()[0].is_constant() && f.den.terms()[0].coeff.is_zero();
    if den_one {
        num
    } else {
        Expr::Div(Box::new(num), Box::new(poly(&f.den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};
    use proptest::prelude::*;

    #[test]
    fn parses_and_evaluates() {
        let f = parse_function("x + y", None).unwrap();
        assert_eq!(f.n, 2);
        assert_eq!(f.value_at(&[int(3), int(5)]), int(5));
        let g = parse_function("abs(x1/x2)", None).unwrap();
        assert_eq!(g.value_at(&[int(1), int(4)]), int(3));
        let h = parse_function("{3/2}*x^-2 + -1", Some(1)).unwrap();
        assert_eq!(h.value_at(&[int(1)]), frac(-1, 2));
        let m = parse_function("meet(abs(x), abs(y))", None).unwrap();
        assert_eq!(m.value_at(&[int(2), int(-5)]), int(2));
        assert_eq!(parse_function("2.5", None).unwrap().value_at(&[int(0)]), frac(5, 2));
    }

    #[test]
    fn reports_positions() {
        match parse("x + ") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            e => panic!("{e:?}"),
        }
        match parse("x + q") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse("(x"), Err(Error::Parse { .. })));
        assert!(matches!(parse("x0"), Err(Error::Parse { .. })));
        assert!(matches!(parse("x)"), Err(Error::Parse { pos: 1, .. })));
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            parse_function("x3", Some(2)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn function_round_trip() {
        let f = parse_function("(x + 1)/(y^2 + {-1/3}*x)", None).unwrap();
        let g = parse_function(&to_expr(&f).to_string(), Some(2)).unwrap();
        assert_eq!(f, g);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-9i64..9, 1i64..4).prop_map(|(p, q)| Expr::Num(frac(p, q))),
            (0usize..3).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), -3i64..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                inner.clone().prop_map(|a| Expr::Abs(Box::new(a))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Meet(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(parse(&text).unwrap(), e);
        }
    }
}
