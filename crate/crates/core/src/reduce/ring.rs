//! The generic ring `Q[k, X_{k+l}, Y_{k+l}, (-1)^k][S]` as multivariate
//! polynomials over reserved variable names.
//!
//! Names containing `@` cannot come from the parser, so they never collide
//! with user symbols: `@k` is the running index, `@m` stands for `(-1)^k`,
//! `@S` is the inner sum `S(k) = X_0 + ... + X_k`, and `X@l` is `X_{k+l}`.

use std::collections::BTreeSet;

use num_traits::One;

use crate::algebra::{Monomial, MultiPoly, Rat, RatFunc};
use crate::expr::{normalize, Affine, HyperAtom, SumExpr};

use super::ReduceError;

pub(crate) const K: &str = "@k";
pub(crate) const M: &str = "@m";
pub(crate) const S: &str = "@S";

pub(crate) fn gen_var(name: &str, shift: i64) -> String {
    format!("{name}@{shift}")
}

/// Splits `X@l` into `("X", l)`.
pub(crate) fn parse_gen(v: &str) -> Option<(&str, i64)> {
    let (name, l) = v.split_once('@')?;
    if name.is_empty() {
        return None;
    }
    Some((name, l.parse().ok()?))
}

/// Folds `(-1)^k` powers modulo 2.
pub(crate) fn reduce_m(p: &MultiPoly) -> MultiPoly {
    if !p.has_var(M) {
        return p.clone();
    }
    MultiPoly::from_terms(p.terms().map(|(mono, c)| {
        let pairs = mono
            .pairs()
            .iter()
            .filter_map(|(v, e)| match v.as_str() {
                M if e % 2 == 0 => None,
                M => Some((v.clone(), 1)),
                _ => Some((v.clone(), *e)),
            })
            .collect();
        (Monomial::from_pairs(pairs), c.clone())
    }))
}

pub(crate) fn mul(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    reduce_m(&(a * b))
}

/// `σ^dir` for `dir = ±1`; `x` is the generic summed by `S`.
pub(crate) fn sigma(p: &MultiPoly, x: &str, dir: i64) -> MultiPoly {
    let r = p.rename(&|v| match parse_gen(v) {
        Some((n, l)) => gen_var(n, l + dir),
        None => v.to_string(),
    });
    let mut r = r.shift(K, dir);
    if r.has_var(M) {
        r = r.subst(M, &MultiPoly::var(M).scale(&-Rat::one()));
    }
    if r.has_var(S) {
        let step = if dir > 0 {
            &MultiPoly::var(S) + &MultiPoly::var(&gen_var(x, 1))
        } else {
            &MultiPoly::var(S) - &MultiPoly::var(&gen_var(x, 0))
        };
        r = r.subst(S, &step);
    }
    r
}

/// Generic shifts occurring in `p` for the generic `name`.
pub(crate) fn generic_names(p: &MultiPoly) -> BTreeSet<String> {
    p.vars()
        .iter()
        .filter_map(|v| parse_gen(v).map(|(n, _)| n.to_string()))
        .collect()
}

/// Reads a summand into the ring. `k` is the summation variable; the inner
/// sum found first fixes `x`, the generic `S` sums over.
pub(crate) fn from_expr(e: &SumExpr, k: &str, x: &mut Option<String>) -> Result<MultiPoly, ReduceError> {
    let unsupported = |what: &str| ReduceError::Unsupported(what.to_string());
    Ok(match e {
        SumExpr::Const(c) => MultiPoly::constant(c.clone()),
        SumExpr::Var(v) if v == k => MultiPoly::var(K),
        SumExpr::Var(v) => return Err(unsupported(&format!("symbolic parameter `{v}` in a generic summand"))),
        SumExpr::RatCoeff(r) => {
            let p = r
                .as_poly()
                .ok_or_else(|| unsupported("rational coefficient in a generic summand"))?;
            if let Some(v) = p.vars().into_iter().find(|v| v != k) {
                return Err(unsupported(&format!("symbolic parameter `{v}` in a generic summand")));
            }
            p.rename(&|v| if v == k { K.to_string() } else { v.to_string() })
        }
        SumExpr::Gen { name, index } => {
            let l = shift_of(index, k).ok_or_else(|| unsupported("generic index not of the form k+l"))?;
            MultiPoly::var(&gen_var(name, l))
        }
        SumExpr::Hyper(HyperAtom::AltSign(a)) => {
            let l = shift_of(a, k).ok_or_else(|| unsupported("sign exponent not of the form k+l"))?;
            let m = MultiPoly::var(M);
            if l.rem_euclid(2) == 1 {
                m.scale(&-Rat::one())
            } else {
                m
            }
        }
        SumExpr::Hyper(h) => return Err(unsupported(&format!("atom `{}` in a generic summand", h.name()))),
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => {
            if *lower != 0 {
                return Err(unsupported("inner sum must start at 0"));
            }
            let up = upper
                .to_ratfunc()
                .and_then(|r| r.as_poly())
                .and_then(|p| Affine::from_poly(&p))
                .and_then(|a| shift_of(&a, k))
                .ok_or_else(|| unsupported("inner upper bound not of the form k+v"))?;
            let name = match normalize(body) {
                SumExpr::Gen { name, index } if index == Affine::var(var) => name,
                _ => return Err(unsupported("inner sum must be a plain generic sum")),
            };
            match x {
                Some(prev) if *prev != name => return Err(unsupported("more than one inner sum")),
                _ => *x = Some(name.clone()),
            }
            // S(k+v) in terms of S(k).
            let mut s = MultiPoly::var(S);
            for t in 1..=up {
                s = &s + &MultiPoly::var(&gen_var(&name, t));
            }
            for t in (up + 1)..=0 {
                s = &s - &MultiPoly::var(&gen_var(&name, t));
            }
            s
        }
        SumExpr::Pow(b, n) => reduce_m(&from_expr(b, k, x)?.pow(*n)),
        SumExpr::Mul(fs) => {
            let mut acc = MultiPoly::one();
            for f in fs {
                acc = mul(&acc, &from_expr(f, k, x)?);
            }
            acc
        }
        SumExpr::Add(ts) => {
            let mut acc = MultiPoly::zero();
            for t in ts {
                acc = &acc + &from_expr(t, k, x)?;
            }
            acc
        }
    })
}

fn shift_of(a: &Affine, k: &str) -> Option<i64> {
    (a.terms.len() == 1 && a.coeff(k) == 1).then_some(a.constant)
}

/// Where the running index is placed when leaving the ring.
#[derive(Clone, Debug)]
pub(crate) struct Target {
    pub index: Affine,
    pub x: String,
}

impl Target {
    pub fn new(index: Affine, x: &str) -> Self {
        Target { index, x: x.to_string() }
    }

    fn inner_sum(&self) -> SumExpr {
        if let Some(c) = self.index.is_constant().then_some(self.index.constant) {
            return SumExpr::add((0..=c).map(|t| SumExpr::gen(&self.x, Affine::constant(t))).collect());
        }
        let vars = self.index.vars();
        let bound = ["i", "j", "l", "r"]
            .into_iter()
            .find(|b| !vars.contains(*b))
            .expect("an unused bound name");
        SumExpr::sum(
            bound,
            0,
            SumExpr::RatCoeff(RatFunc::from_poly(self.index.to_poly())),
            SumExpr::gen(&self.x, Affine::var(bound)),
        )
    }
}

/// Converts a ring element back to an expression, placing `k` at `t.index`.
pub(crate) fn to_expr(p: &MultiPoly, t: &Target) -> SumExpr {
    let k_poly = t.index.to_poly();
    let mut terms = Vec::new();
    for (mono, c) in p.terms() {
        let mut coeff = MultiPoly::constant(c.clone());
        let mut factors = Vec::new();
        for (v, e) in mono.pairs() {
            if v == K {
                coeff = &coeff * &k_poly.pow(*e);
            } else if v == M {
                factors.push(SumExpr::Hyper(HyperAtom::AltSign(t.index.clone())));
            } else if v == S {
                factors.push(SumExpr::Pow(Box::new(t.inner_sum()), *e));
            } else if let Some((name, l)) = parse_gen(v) {
                factors.push(SumExpr::Pow(Box::new(SumExpr::gen(name, t.index.plus(l))), *e));
            } else {
                coeff = &coeff * &MultiPoly::var(v).pow(*e);
            }
        }
        factors.insert(0, SumExpr::RatCoeff(RatFunc::from_poly(coeff)));
        terms.push(SumExpr::Mul(factors));
    }
    normalize(&SumExpr::Add(terms))
}
