use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::{pow_rat, Rat};
use crate::expr::{Affine, HyperAtom, PowBase, SumExpr};

use super::OracleError;

/// Values for free variables and generic sequence tables.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    pub vars: HashMap<String, Rat>,
    pub tables: HashMap<String, Vec<Rat>>,
}

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn with_var(mut self, v: &str, x: Rat) -> Self {
        self.vars.insert(v.to_string(), x);
        self
    }

    pub fn with_int(self, v: &str, x: i64) -> Self {
        self.with_var(v, Rat::from_integer(x.into()))
    }

    pub fn with_table(mut self, name: &str, t: Vec<Rat>) -> Self {
        self.tables.insert(name.to_string(), t);
        self
    }
}

struct Evaluator<'a> {
    base: &'a Binding,
    scope: Vec<(String, Rat)>,
}

impl Evaluator<'_> {
    fn lookup(&self, v: &str) -> Result<Rat, OracleError> {
        if let Some((_, x)) = self.scope.iter().rev().find(|(n, _)| n == v) {
            return Ok(x.clone());
        }
        self.base
            .vars
            .get(v)
            .cloned()
            .ok_or_else(|| OracleError::Unbound(v.to_string()))
    }

    fn point(&self, vars: impl IntoIterator<Item = String>) -> Result<HashMap<String, Rat>, OracleError> {
        let mut p = HashMap::new();
        for v in vars {
            let x = self.lookup(&v)?;
            p.insert(v, x);
        }
        Ok(p)
    }

    fn affine(&self, a: &Affine) -> Result<Rat, OracleError> {
        let mut acc = Rat::from_integer(a.constant.into());
        for (v, c) in &a.terms {
            acc += self.lookup(v)? * Rat::from_integer((*c).into());
        }
        Ok(acc)
    }

    fn int_arg(&self, a: &Affine, what: &str) -> Result<i64, OracleError> {
        let x = self.affine(a)?;
        if !x.is_integer() {
            return Err(OracleError::NonIntegral(format!("{what} argument {}", a.render())));
        }
        x.to_integer()
            .to_i64()
            .ok_or_else(|| OracleError::NonIntegral(format!("{what} argument too large")))
    }

    fn hyper(&self, h: &HyperAtom) -> Result<Rat, OracleError> {
        Ok(match h {
            HyperAtom::Binom { top, bottom } => binom(&self.affine(top)?, self.int_arg(bottom, "binomial")?),
            HyperAtom::InvBinom { top, bottom } => {
                let b = binom(&self.affine(top)?, self.int_arg(bottom, "binomial")?);
                if b.is_zero() {
                    Rat::zero()
                } else {
                    Rat::one() / b
                }
            }
            HyperAtom::Harmonic(a) => harmonic(self.int_arg(a, "harmonic")?),
            HyperAtom::AltSign(a) => {
                if self.int_arg(a, "sign")?.rem_euclid(2) == 0 {
                    Rat::one()
                } else {
                    -Rat::one()
                }
            }
            HyperAtom::Fact(a) => {
                let n = self.int_arg(a, "factorial")?;
                if n < 0 {
                    Rat::zero()
                } else {
                    (1..=n).fold(Rat::one(), |acc, i| acc * Rat::from_integer(i.into()))
                }
            }
            HyperAtom::Pow { base, exp } => {
                let b = match base {
                    PowBase::Rat(q) => q.clone(),
                    PowBase::Param(p) => self.lookup(p)?,
                };
                let e = self.int_arg(exp, "exponent")?;
                if b.is_zero() && e < 0 {
                    Rat::zero()
                } else {
                    pow_rat(&b, e)
                }
            }
        })
    }

    fn eval(&mut self, e: &SumExpr) -> Result<Rat, OracleError> {
        Ok(match e {
            SumExpr::Const(c) => c.clone(),
            SumExpr::Var(v) => self.lookup(v)?,
            SumExpr::RatCoeff(r) => {
                let p = self.point(r.vars())?;
                r.eval(&p)?
            }
            SumExpr::Gen { name, index } => {
                let i = self.int_arg(index, "index")?;
                if i < 0 {
                    return Ok(Rat::zero());
                }
                let t = self
                    .base
                    .tables
                    .get(name)
                    .ok_or_else(|| OracleError::Unbound(format!("{name}[..]")))?;
                t.get(i as usize).cloned().ok_or(OracleError::TableTooShort {
                    name: name.clone(),
                    index: i,
                })?
            }
            SumExpr::Hyper(h) => self.hyper(h)?,
            SumExpr::Sum {
                var,
                lower,
                upper,
                body,
            } => {
                let u = self.eval(upper)?;
                if !u.is_integer() {
                    return Err(OracleError::NonIntegral("summation bound".into()));
                }
                let u = u.to_integer().to_i64().ok_or_else(|| OracleError::NonIntegral("summation bound".into()))?;
                let mut acc = Rat::zero();
                for j in *lower..=u {
                    self.scope.push((var.clone(), Rat::from_integer(j.into())));
                    let r = self.eval(body);
                    self.scope.pop();
                    acc += r?;
                }
                acc
            }
            SumExpr::Pow(b, k) => pow_rat(&self.eval(b)?, *k as i64),
            SumExpr::Mul(fs) => {
                let mut acc = Rat::one();
                for f in fs {
                    acc *= self.eval(f)?;
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            SumExpr::Add(ts) => {
                let mut acc = Rat::zero();
                for t in ts {
                    acc += self.eval(t)?;
                }
                acc
            }
        })
    }
}

/// Generalized binomial coefficient with integer bottom; 0 for negative bottom.
pub fn binom(top: &Rat, bottom: i64) -> Rat {
    if bottom < 0 {
        return Rat::zero();
    }
    let mut acc = Rat::one();
    for i in 0..bottom {
        let f = top - Rat::from_integer(i.into());
        if f.is_zero() {
            return Rat::zero();
        }
        acc = acc * f / Rat::from_integer(BigInt::from(i + 1));
    }
    acc
}

pub fn harmonic(n: i64) -> Rat {
    let mut h = Rat::zero();
    for j in 1..=n {
        h += Rat::new(BigInt::one(), BigInt::from(j));
    }
    h
}

/// Evaluates an expression; poles of rational coefficients evaluate to 0.
pub fn eval(e: &SumExpr, b: &Binding) -> Result<Rat, OracleError> {
    Evaluator {
        base: b,
        scope: Vec::new(),
    }
    .eval(e)
}

/// Evaluates `e` with the free variable `var` bound to `i`.
pub fn eval_sequence(e: &SumExpr, b: &Binding, var: &str, i: i64) -> Result<Rat, OracleError> {
    Evaluator {
        base: b,
        scope: vec![(var.to_string(), Rat::from_integer(i.into()))],
    }
    .eval(e)
}
