//! Canonical normal form.
//!
//! An expression is expanded into a map from atom monomials (products of
//! generic, hypergeometric and sum atoms) to rational-function coefficients.
//! Rebuilding an expression from that map in a fixed order gives the normal
//! form: equal maps print identically.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::{Affine, HyperAtom, PowBase, SumExpr};
use crate::algebra::{MultiPoly, Rat, RatFunc};

/// Product of atoms with positive exponents.
pub type AtomMono = BTreeMap<SumExpr, u32>;

/// Linear combination of atom monomials.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Lin {
    pub terms: BTreeMap<AtomMono, RatFunc>,
}

impl Lin {
    pub fn zero() -> Self {
        Lin::default()
    }

    pub fn coeff(r: RatFunc) -> Self {
        let mut l = Lin::zero();
        l.add_term(AtomMono::new(), r);
        l
    }

    pub fn atom(a: SumExpr) -> Self {
        let mut m = AtomMono::new();
        m.insert(a, 1);
        let mut l = Lin::zero();
        l.add_term(m, RatFunc::one());
        l
    }

    pub fn add_term(&mut self, m: AtomMono, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x = &*x + &c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, o: &Lin) -> Lin {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, r: &RatFunc) -> Lin {
        let mut out = Lin::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * r);
        }
        out
    }

    pub fn mul(&self, o: &Lin) -> Lin {
        let mut out = Lin::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Lin {
        let mut acc = Lin::coeff(RatFunc::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient when no atoms are present.
    pub fn as_coeff(&self) -> Option<RatFunc> {
        match self.terms.len() {
            0 => Some(RatFunc::zero()),
            1 => self.terms.get(&AtomMono::new()).cloned(),
            _ => None,
        }
    }

    pub fn to_expr(&self) -> SumExpr {
        let terms: Vec<SumExpr> = self
            .terms
            .iter()
            .map(|(m, c)| term_expr(c, m))
            .collect();
        SumExpr::add(terms)
    }
}

/// Multiplies atom monomials; `(-1)^A` atoms are reduced modulo 2.
fn mono_mul(a: &AtomMono, b: &AtomMono) -> AtomMono {
    let mut out = a.clone();
    for (atom, e) in b {
        *out.entry(atom.clone()).or_insert(0) += e;
    }
    out.retain(|atom, e| {
        if matches!(atom, SumExpr::Hyper(HyperAtom::AltSign(_))) {
            *e %= 2;
        }
        *e > 0
    });
    out
}

/// Coefficient factors followed by atom factors.
fn term_expr(c: &RatFunc, m: &AtomMono) -> SumExpr {
    let mut factors = coeff_factors(c);
    if !m.is_empty() && factors.len() == 1 && factors[0].is_one() {
        factors.clear();
    }
    for (atom, e) in m {
        factors.push(if *e == 1 {
            atom.clone()
        } else {
            SumExpr::Pow(Box::new(atom.clone()), *e)
        });
    }
    SumExpr::mul(factors)
}

/// Rendering of a coefficient as factors: an optional rational content, then
/// either variable powers or a primitive polynomial / rational function.
pub(crate) fn coeff_factors(c: &RatFunc) -> Vec<SumExpr> {
    if let Some(q) = c.as_constant() {
        return vec![SumExpr::Const(q)];
    }
    let Some(p) = c.as_poly() else {
        return vec![SumExpr::RatCoeff(c.clone())];
    };
    let mut content = p.rational_content();
    if p.leading_coeff().is_negative() {
        content = -content;
    }
    let q = p.scale(&(Rat::one() / &content));
    let mut out = Vec::new();
    if !content.is_one() {
        out.push(SumExpr::Const(content));
    }
    if q.num_terms() == 1 {
        let (mono, _) = q.leading_term().expect("non-zero");
        for (v, e) in mono.pairs() {
            out.push(if *e == 1 {
                SumExpr::Var(v.clone())
            } else {
                SumExpr::Pow(Box::new(SumExpr::Var(v.clone())), *e)
            });
        }
    } else {
        out.push(SumExpr::RatCoeff(RatFunc::from_poly(q)));
    }
    out
}

fn falling(top: &MultiPoly, m: i64) -> MultiPoly {
    let mut acc = MultiPoly::one();
    for i in 0..m {
        acc = &acc * &(top - &MultiPoly::int(i));
    }
    acc
}

fn factorial(m: i64) -> Rat {
    (1..=m).fold(Rat::one(), |acc, i| acc * Rat::from_integer(BigInt::from(i)))
}

/// Normalizes a hypergeometric atom: constant arguments are evaluated,
/// constant offsets of exponentials are pulled into the coefficient.
fn hyper_lin(h: &HyperAtom) -> Lin {
    match h {
        HyperAtom::AltSign(a) => {
            let sign = if a.constant.rem_euclid(2) == 1 { -1 } else { 1 };
            let mut b = Affine::default();
            for (v, c) in &a.terms {
                if c.rem_euclid(2) == 1 {
                    b.terms.insert(v.clone(), 1);
                }
            }
            if b.terms.is_empty() {
                Lin::coeff(RatFunc::int(sign))
            } else {
                Lin::atom(SumExpr::Hyper(HyperAtom::AltSign(b))).scale(&RatFunc::int(sign))
            }
        }
        HyperAtom::Pow { base, exp } => {
            let c = exp.constant;
            let bf = match base {
                PowBase::Rat(q) => RatFunc::constant(q.clone()),
                PowBase::Param(p) => RatFunc::var(p),
            };
            let factor = bf.pow(c).unwrap_or_else(|_| RatFunc::zero());
            if exp.is_constant() {
                return Lin::coeff(factor);
            }
            let mut rest = exp.clone();
            rest.constant = 0;
            let mut base = base.clone();
            if let PowBase::Rat(q) = &base {
                if q.is_one() {
                    return Lin::coeff(RatFunc::one());
                }
                // q^(-A) is written (1/q)^A.
                if rest.terms.values().next().is_some_and(|c| *c < 0) {
                    base = PowBase::Rat(Rat::one() / q);
                    rest = rest.scale(-1);
                }
            }
            // b^(g*A) is written (b^A)^g.
            let g = rest
                .terms
                .values()
                .fold(0i64, |acc, c| num_integer::gcd(acc, *c))
                .abs();
            let g = if g > 1 { g } else { 1 };
            let reduced = Affine {
                terms: rest.terms.iter().map(|(v, c)| (v.clone(), c / g)).collect(),
                constant: 0,
            };
            Lin::atom(SumExpr::Hyper(HyperAtom::Pow {
                base,
                exp: reduced,
            }))
            .pow(g as u32)
            .scale(&factor)
        }
        HyperAtom::Binom { top, bottom } | HyperAtom::InvBinom { top, bottom } => {
            let inv = matches!(h, HyperAtom::InvBinom { .. });
            if bottom.is_constant() {
                let m = bottom.constant;
                if m < 0 {
                    return Lin::zero();
                }
                let val = RatFunc::from_poly(falling(&top.to_poly(), m).scale(&(Rat::one() / factorial(m))));
                return Lin::coeff(if inv {
                    val.inv().unwrap_or_else(|_| RatFunc::zero())
                } else {
                    val
                });
            }
            Lin::atom(SumExpr::Hyper(h.clone()))
        }
        HyperAtom::Harmonic(a) => {
            if a.is_constant() {
                let mut h = Rat::zero();
                for j in 1..=a.constant {
                    h += Rat::new(BigInt::one(), BigInt::from(j));
                }
                return Lin::coeff(RatFunc::constant(h));
            }
            Lin::atom(SumExpr::Hyper(h.clone()))
        }
        HyperAtom::Fact(a) => {
            if a.is_constant() {
                if a.constant < 0 {
                    return Lin::zero();
                }
                return Lin::coeff(RatFunc::constant(factorial(a.constant)));
            }
            Lin::atom(SumExpr::Hyper(h.clone()))
        }
    }
}

/// Expands an expression into atom-monomial form.
pub fn lin_of(e: &SumExpr) -> Lin {
    match e {
        SumExpr::Const(c) => Lin::coeff(RatFunc::constant(c.clone())),
        SumExpr::Var(v) => Lin::coeff(RatFunc::var(v)),
        SumExpr::RatCoeff(r) => Lin::coeff(r.clone()),
        SumExpr::Gen { index, .. } => {
            if index.is_constant() && index.constant < 0 {
                Lin::zero()
            } else {
                Lin::atom(e.clone())
            }
        }
        SumExpr::Hyper(h) => hyper_lin(h),
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => {
            let u = normalize(upper);
            if let SumExpr::Const(c) = &u {
                if let Some(ui) = c.to_integer().to_i64() {
                    if c.is_integer() && ui < *lower {
                        return Lin::zero();
                    }
                }
            }
            let b = normalize(body);
            if b.is_zero() {
                return Lin::zero();
            }
            Lin::atom(SumExpr::Sum {
                var: var.clone(),
                lower: *lower,
                upper: Box::new(u),
                body: Box::new(b),
            })
        }
        SumExpr::Pow(b, k) => lin_of(b).pow(*k),
        SumExpr::Mul(fs) => fs
            .iter()
            .fold(Lin::coeff(RatFunc::one()), |acc, f| acc.mul(&lin_of(f))),
        SumExpr::Add(ts) => ts.iter().fold(Lin::zero(), |acc, t| acc.add(&lin_of(t))),
    }
}

/// Canonical normal form; idempotent.
pub fn normalize(e: &SumExpr) -> SumExpr {
    lin_of(e).to_expr()
}
