//! Recursive-descent parser for the plain expression syntax.
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ['^' NAT | '^' exponent]
//! base   := INT | NAME | NAME '[' affine ']' | call | '(' expr ')'
//! call   := Sum(var, INT, expr, expr) | binom(a, a) | invbinom(a, a)
//!         | harmonic(a) | pow(base, a) | altsign(a) | fact(a)
//! ```
//!
//! Division is only accepted by an atom-free divisor. `(-1)^A` and `q^A`
//! with an affine exponent become exponential atoms.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ast::{Affine, HyperAtom, PowBase, SumExpr};
use crate::algebra::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Int(s.parse().expect("digits")),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Name(chars[start..i].iter().collect()),
                line: tl,
                column: tc,
            });
            continue;
        }
        if "()[],+-*/^".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                column: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError {
            line: tl,
            column: tc,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

const RESERVED: &[&str] = &["Sum", "binom", "invbinom", "harmonic", "pow", "altsign", "fact"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    bound: Vec<String>,
}

/// Parses an expression in the plain syntax and returns its normal form, so
/// that printing and parsing again gives back the same tree.
pub fn parse(src: &str) -> Result<SumExpr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        bound: Vec::new(),
    };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(super::normalize(&e))
}

/// Parses an affine expression such as `k+1` or `2*n-1`.
pub fn parse_affine(src: &str) -> Result<Affine, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        bound: Vec::new(),
    };
    let a = p.affine()?;
    if p.peek() != &Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(a)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        &self.toks[(self.pos + off).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: &str) -> ParseError {
        let t = &self.toks[self.pos];
        let found = match &t.tok {
            Tok::Int(i) => format!("`{i}`"),
            Tok::Name(n) => format!("`{n}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        };
        ParseError {
            line: t.line,
            column: t.column,
            message: format!("{msg} (found {found})"),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == &Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek() == &Tok::Sym(c)
    }

    fn expr(&mut self) -> Result<SumExpr, ParseError> {
        let mut terms = Vec::new();
        let first_neg = if self.is_sym('-') {
            self.next();
            true
        } else {
            false
        };
        let t = self.term()?;
        terms.push(if first_neg { super::neg(&t) } else { t });
        loop {
            if self.is_sym('+') {
                self.next();
                terms.push(self.term()?);
            } else if self.is_sym('-') {
                self.next();
                let t = self.term()?;
                terms.push(super::neg(&t));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            SumExpr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<SumExpr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.is_sym('*') {
                self.next();
                factors.push(self.factor()?);
            } else if self.is_sym('/') {
                self.next();
                let at = self.pos;
                let d = self.factor()?;
                let Some(dr) = d.to_ratfunc() else {
                    self.pos = at;
                    return Err(self.err("divisor must be free of atoms and sums"));
                };
                if dr.is_zero() {
                    self.pos = at;
                    return Err(self.err("division by zero"));
                }
                let last = factors.pop().expect("term has a factor");
                let merged = match (&last, &d) {
                    (SumExpr::Const(a), SumExpr::Const(b)) => vec![SumExpr::Const(a / b)],
                    _ => match last.to_ratfunc() {
                        Some(lr) => vec![SumExpr::RatCoeff(&lr / &dr)],
                        None => vec![last, SumExpr::RatCoeff(dr.inv().expect("non-zero"))],
                    },
                };
                factors.extend(merged);
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            SumExpr::Mul(factors)
        })
    }

    fn factor(&mut self) -> Result<SumExpr, ParseError> {
        let base = self.base()?;
        if !self.is_sym('^') {
            return Ok(base);
        }
        self.next();
        if let Tok::Int(n) = self.peek().clone() {
            // A bare integer exponent is a polynomial power unless more
            // affine syntax follows it, which needs parentheses anyway.
            self.next();
            let e: u32 = num_traits::ToPrimitive::to_u32(&n)
                .ok_or_else(|| self.err("exponent too large"))?;
            return Ok(SumExpr::Pow(Box::new(base), e));
        }
        let at = self.pos;
        let exp = if self.is_sym('(') {
            self.next();
            let a = self.affine()?;
            self.expect(')')?;
            a
        } else if let Tok::Name(n) = self.peek().clone() {
            self.next();
            Affine::var(&n)
        } else {
            return Err(self.err("expected exponent"));
        };
        match &base {
            SumExpr::Const(c) if *c == -Rat::one() => Ok(SumExpr::Hyper(HyperAtom::AltSign(exp))),
            SumExpr::Const(c) if !c.is_zero() => Ok(SumExpr::Hyper(HyperAtom::Pow {
                base: PowBase::Rat(c.clone()),
                exp,
            })),
            SumExpr::Var(v) if !self.bound.contains(v) => Ok(SumExpr::Hyper(HyperAtom::Pow {
                base: PowBase::Param(v.clone()),
                exp,
            })),
            _ => {
                self.pos = at;
                Err(self.err("symbolic exponents need a constant or parameter base"))
            }
        }
    }

    fn base(&mut self) -> Result<SumExpr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(SumExpr::Const(Rat::from_integer(n)))
            }
            Tok::Sym('(') => {
                self.next();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Name(name) => {
                if matches!(self.peek_at(1), Tok::Sym('[')) {
                    if RESERVED.contains(&name.as_str()) {
                        return Err(self.err("reserved name used as a sequence"));
                    }
                    self.next();
                    self.next();
                    let idx = self.affine()?;
                    self.expect(']')?;
                    return Ok(SumExpr::Gen { name, index: idx });
                }
                if matches!(self.peek_at(1), Tok::Sym('(')) && RESERVED.contains(&name.as_str()) {
                    self.next();
                    self.next();
                    let e = self.call(&name)?;
                    self.expect(')')?;
                    return Ok(e);
                }
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.err("expected `(` after function name"));
                }
                self.next();
                Ok(SumExpr::Var(name))
            }
            _ => Err(self.err("expected an expression")),
        }
    }

    fn call(&mut self, name: &str) -> Result<SumExpr, ParseError> {
        match name {
            "Sum" => {
                let var = match self.next() {
                    Tok::Name(v) if !RESERVED.contains(&v.as_str()) => v,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected summation variable"));
                    }
                };
                if self.bound.contains(&var) {
                    self.pos -= 1;
                    return Err(self.err(&format!("summation variable `{var}` shadows an enclosing one")));
                }
                self.expect(',')?;
                let lower = self.signed_int()?;
                self.expect(',')?;
                let upper = self.expr()?;
                if upper.free_vars().contains(&var) {
                    return Err(self.err("upper bound mentions its own summation variable"));
                }
                self.expect(',')?;
                self.bound.push(var.clone());
                let body = self.expr();
                self.bound.pop();
                Ok(SumExpr::sum(&var, lower, upper, body?))
            }
            "binom" | "invbinom" => {
                let top = self.affine()?;
                self.expect(',')?;
                let bottom = self.affine()?;
                Ok(SumExpr::Hyper(if name == "binom" {
                    HyperAtom::Binom { top, bottom }
                } else {
                    HyperAtom::InvBinom { top, bottom }
                }))
            }
            "harmonic" => Ok(SumExpr::Hyper(HyperAtom::Harmonic(self.affine()?))),
            "altsign" => Ok(SumExpr::Hyper(HyperAtom::AltSign(self.affine()?))),
            "fact" => Ok(SumExpr::Hyper(HyperAtom::Fact(self.affine()?))),
            "pow" => {
                let base = match self.peek().clone() {
                    Tok::Name(p) => {
                        self.next();
                        PowBase::Param(p)
                    }
                    _ => {
                        let neg = if self.is_sym('-') {
                            self.next();
                            true
                        } else {
                            false
                        };
                        let n = self.nat()?;
                        let mut q = Rat::from_integer(n);
                        if self.is_sym('/') {
                            self.next();
                            let d = self.nat()?;
                            if d.is_zero() {
                                return Err(self.err("zero denominator"));
                            }
                            q /= Rat::from_integer(d);
                        }
                        if q.is_zero() {
                            return Err(self.err("power base must be non-zero"));
                        }
                        PowBase::Rat(if neg { -q } else { q })
                    }
                };
                self.expect(',')?;
                let exp = self.affine()?;
                if let PowBase::Rat(q) = &base {
                    if *q == -Rat::one() {
                        return Ok(SumExpr::Hyper(HyperAtom::AltSign(exp)));
                    }
                }
                Ok(SumExpr::Hyper(HyperAtom::Pow { base, exp }))
            }
            _ => unreachable!("reserved names are exhaustive"),
        }
    }

    fn nat(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let neg = if self.is_sym('-') {
            self.next();
            true
        } else {
            false
        };
        let n = self.nat()?;
        let v: i64 = num_traits::ToPrimitive::to_i64(&n).ok_or_else(|| self.err("integer too large"))?;
        Ok(if neg { -v } else { v })
    }

    /// `['-'] aterm (('+'|'-') aterm)*` with `aterm := INT ['*' NAME] | NAME`.
    fn affine(&mut self) -> Result<Affine, ParseError> {
        let mut acc = Affine::default();
        let mut sign = 1i64;
        if self.is_sym('-') {
            self.next();
            sign = -1;
        }
        loop {
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.next();
                    let v: i64 = num_traits::ToPrimitive::to_i64(&n)
                        .ok_or_else(|| self.err("integer too large"))?;
                    if self.is_sym('*') {
                        self.next();
                        match self.next() {
                            Tok::Name(x) => acc = acc.add(&Affine::var(&x).scale(sign * v)),
                            _ => {
                                self.pos -= 1;
                                return Err(self.err("expected variable in affine term"));
                            }
                        }
                    } else {
                        acc = acc.plus(sign * v);
                    }
                }
                Tok::Name(x) if !RESERVED.contains(&x.as_str()) => {
                    self.next();
                    acc = acc.add(&Affine::var(&x).scale(sign));
                }
                _ => return Err(self.err("expected affine expression")),
            }
            if self.is_sym('+') {
                self.next();
                sign = 1;
            } else if self.is_sym('-') {
                self.next();
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }
}
