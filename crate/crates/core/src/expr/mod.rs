//! Expression trees for nested sums: parsing, printing, normal forms,
//! shifting and substitution.

mod ast;
mod normal;
mod parser;
mod printer;
pub mod serde_plain;

pub use ast::{Affine, HyperAtom, PowBase, SumExpr};
pub use normal::{lin_of, normalize, AtomMono, Lin};
pub use parser::{parse, parse_affine, ParseError};
pub use printer::{to_json, to_latex, to_plain};


use num_traits::{One, Signed};

use crate::algebra::{AlgebraError, Rat, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("substitution would capture bound variable `{0}`")]
    Capture(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{0}")]
    Unsupported(String),
}

/// Additive inverse that keeps the leading-sign conventions of the printer.
pub fn neg(e: &SumExpr) -> SumExpr {
    match e {
        SumExpr::Const(c) => SumExpr::Const(-c.clone()),
        SumExpr::RatCoeff(r) => SumExpr::RatCoeff(-r),
        SumExpr::Mul(fs) => match fs.first() {
            Some(SumExpr::Const(c)) => {
                let nc = -c.clone();
                let mut rest: Vec<SumExpr> = fs[1..].to_vec();
                if !nc.is_one() {
                    rest.insert(0, SumExpr::Const(nc));
                }
                if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    SumExpr::Mul(rest)
                }
            }
            Some(SumExpr::RatCoeff(r)) => {
                let mut v = fs.clone();
                v[0] = SumExpr::RatCoeff(-r);
                SumExpr::Mul(v)
            }
            _ => {
                let mut v = vec![SumExpr::Const(-Rat::one())];
                v.extend(fs.iter().cloned());
                SumExpr::Mul(v)
            }
        },
        SumExpr::Add(ts) => SumExpr::Add(ts.iter().map(neg).collect()),
        _ => SumExpr::Mul(vec![SumExpr::Const(-Rat::one()), e.clone()]),
    }
}

/// True when the printer renders `e` with a leading minus sign.
pub fn is_negative(e: &SumExpr) -> bool {
    match e {
        SumExpr::Const(c) => c.is_negative(),
        SumExpr::RatCoeff(r) => r.is_negative(),
        SumExpr::Mul(fs) => fs.first().map(is_negative).unwrap_or(false),
        _ => false,
    }
}

fn affine_expr(a: &Affine) -> SumExpr {
    let mut terms: Vec<SumExpr> = a
        .terms
        .iter()
        .map(|(v, c)| {
            if *c == 1 {
                SumExpr::Var(v.clone())
            } else {
                SumExpr::Mul(vec![SumExpr::int(*c), SumExpr::Var(v.clone())])
            }
        })
        .collect();
    if a.constant != 0 {
        terms.push(SumExpr::int(a.constant));
    }
    SumExpr::add(terms)
}

/// Replaces free occurrences of `var` by the affine expression `by`, without
/// normalizing. Fails if `by` would be captured by an inner summation.
pub fn subst_affine(e: &SumExpr, var: &str, by: &Affine) -> Result<SumExpr, ExprError> {
    Ok(match e {
        SumExpr::Const(_) => e.clone(),
        SumExpr::Var(v) => {
            if v == var {
                affine_expr(by)
            } else {
                e.clone()
            }
        }
        SumExpr::RatCoeff(r) => SumExpr::RatCoeff(r.subst_poly(var, &by.to_poly())?),
        SumExpr::Gen { name, index } => SumExpr::Gen {
            name: name.clone(),
            index: index.subst(var, by),
        },
        SumExpr::Hyper(h) => SumExpr::Hyper(h.map_args(&|a| a.subst(var, by))),
        SumExpr::Sum {
            var: bv,
            lower,
            upper,
            body,
        } => {
            let upper = Box::new(subst_affine(upper, var, by)?);
            let body = if bv == var {
                body.clone()
            } else {
                if by.terms.contains_key(bv) && body.free_vars().contains(var) {
                    return Err(ExprError::Capture(bv.clone()));
                }
                Box::new(subst_affine(body, var, by)?)
            };
            SumExpr::Sum {
                var: bv.clone(),
                lower: *lower,
                upper,
                body,
            }
        }
        SumExpr::Pow(b, k) => SumExpr::Pow(Box::new(subst_affine(b, var, by)?), *k),
        SumExpr::Mul(fs) => SumExpr::Mul(
            fs.iter()
                .map(|f| subst_affine(f, var, by))
                .collect::<Result<_, _>>()?,
        ),
        SumExpr::Add(ts) => SumExpr::Add(
            ts.iter()
                .map(|t| subst_affine(t, var, by))
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// `e` with `var` replaced by `var + m`, in normal form.
pub fn shift(e: &SumExpr, var: &str, m: i64) -> SumExpr {
    let by = Affine::var_plus(var, m);
    normalize(&subst_affine(e, var, &by).expect("a self-shift cannot capture"))
}

/// Replaces every generic atom `name[idx]` by `replacement` with its free
/// variable `param` set to `idx`. Result is normalized.
pub fn substitute(
    e: &SumExpr,
    name: &str,
    param: &str,
    replacement: &SumExpr,
) -> Result<SumExpr, ExprError> {
    let free = replacement.free_vars();
    let out = subst_gen(e, name, param, replacement, &free, &mut Vec::new())?;
    Ok(normalize(&out))
}

fn subst_gen(
    e: &SumExpr,
    name: &str,
    param: &str,
    rep: &SumExpr,
    rep_free: &std::collections::BTreeSet<String>,
    bound: &mut Vec<String>,
) -> Result<SumExpr, ExprError> {
    let rec = |x: &SumExpr, bound: &mut Vec<String>| subst_gen(x, name, param, rep, rep_free, bound);
    Ok(match e {
        SumExpr::Gen { name: n, index } if n == name => {
            for b in bound.iter() {
                if b != param && rep_free.contains(b) {
                    return Err(ExprError::Capture(b.clone()));
                }
            }
            subst_affine(rep, param, index)?
        }
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => {
            let upper = rec(upper, bound)?;
            bound.push(var.clone());
            let body = rec(body, bound);
            bound.pop();
            SumExpr::Sum {
                var: var.clone(),
                lower: *lower,
                upper: Box::new(upper),
                body: Box::new(body?),
            }
        }
        SumExpr::Pow(b, k) => SumExpr::Pow(Box::new(rec(b, bound)?), *k),
        SumExpr::Mul(fs) => SumExpr::Mul(fs.iter().map(|f| rec(f, bound)).collect::<Result<_, _>>()?),
        SumExpr::Add(ts) => SumExpr::Add(ts.iter().map(|t| rec(t, bound)).collect::<Result<_, _>>()?),
        _ => e.clone(),
    })
}

/// Replaces a free parameter by a rational function everywhere it occurs,
/// including inside coefficients. Result is normalized.
pub fn substitute_param(e: &SumExpr, var: &str, value: &RatFunc) -> Result<SumExpr, ExprError> {
    fn go(e: &SumExpr, var: &str, value: &RatFunc) -> Result<SumExpr, ExprError> {
        Ok(match e {
            SumExpr::Var(v) if v == var => SumExpr::RatCoeff(value.clone()),
            SumExpr::RatCoeff(r) => SumExpr::RatCoeff(r.subst(var, value)?),
            SumExpr::Sum {
                var: bv,
                lower,
                upper,
                body,
            } => SumExpr::Sum {
                var: bv.clone(),
                lower: *lower,
                upper: Box::new(go(upper, var, value)?),
                body: Box::new(if bv == var {
                    (**body).clone()
                } else {
                    go(body, var, value)?
                }),
            },
            SumExpr::Hyper(HyperAtom::Pow {
                base: PowBase::Param(p),
                ..
            }) if p == var => {
                return Err(ExprError::Unsupported(format!(
                    "cannot substitute exponential base `{var}`"
                )))
            }
            SumExpr::Pow(b, k) => SumExpr::Pow(Box::new(go(b, var, value)?), *k),
            SumExpr::Mul(fs) => SumExpr::Mul(fs.iter().map(|f| go(f, var, value)).collect::<Result<_, _>>()?),
            SumExpr::Add(ts) => SumExpr::Add(ts.iter().map(|t| go(t, var, value)).collect::<Result<_, _>>()?),
            _ => e.clone(),
        })
    }
    Ok(normalize(&go(e, var, value)?))
}

/// Renames a bound summation variable throughout its body.
pub fn rename_bound(e: &SumExpr, to: &str) -> Result<SumExpr, ExprError> {
    match e {
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => {
            if var == to {
                return Ok(e.clone());
            }
            if body.free_vars().contains(to) {
                return Err(ExprError::Capture(to.to_string()));
            }
            Ok(SumExpr::Sum {
                var: to.to_string(),
                lower: *lower,
                upper: upper.clone(),
                body: Box::new(subst_affine(body, var, &Affine::var(to))?),
            })
        }
        _ => Ok(e.clone()),
    }
}

/// Same as [`parse`], which already normalizes.
pub fn parse_normal(src: &str) -> Result<SumExpr, ParseError> {
    parse(src).map(|e| normalize(&e))
}
