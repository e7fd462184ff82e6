//! Plain, LaTeX and JSON renderings.
//!
//! The plain form re-parses to the same tree for normal forms. Top-level sums
//! separate terms with spaced ` + `/` - `; nested sums are compact.

use num_traits::{One, Signed};
use serde_json::{json, Value};

use super::ast::{Affine, HyperAtom, PowBase, SumExpr};
use super::{is_negative, neg};
use crate::algebra::{format_rat, MultiPoly, Rat, RatFunc};

pub fn to_plain(e: &SumExpr) -> String {
    match e {
        SumExpr::Add(terms) => join_terms(terms, true, &plain),
        _ => join_terms(std::slice::from_ref(e), true, &plain),
    }
}

fn join_terms(terms: &[SumExpr], spaced: bool, f: &dyn Fn(&SumExpr) -> String) -> String {
    let mut s = String::new();
    for (i, t) in terms.iter().enumerate() {
        let (neg_t, body) = if is_negative(t) {
            let n = neg(t);
            (true, if is_compound(&n) { paren(f(&n)) } else { f(&n) })
        } else {
            (false, f(t))
        };
        match (i, neg_t, spaced) {
            (0, true, _) => s.push('-'),
            (0, false, _) => {}
            (_, true, true) => s.push_str(" - "),
            (_, false, true) => s.push_str(" + "),
            (_, true, false) => s.push('-'),
            (_, false, false) => s.push('+'),
        }
        s.push_str(&body);
    }
    s
}

/// Terms that need brackets after a minus sign.
fn is_compound(e: &SumExpr) -> bool {
    match e {
        SumExpr::Add(_) => true,
        SumExpr::RatCoeff(r) => r.den().is_one() && r.num().num_terms() > 1,
        _ => false,
    }
}

fn paren(s: String) -> String {
    format!("({s})")
}

fn poly_is_simple(p: &MultiPoly) -> bool {
    // A single variable, a variable power, or a non-negative integer.
    match p.as_constant() {
        Some(c) => c.is_integer() && !c.is_negative(),
        None => {
            p.num_terms() == 1 && {
                let (m, c) = p.leading_term().unwrap();
                c.is_one() && m.pairs().len() == 1
            }
        }
    }
}

fn plain_ratfunc(r: &RatFunc) -> String {
    if r.den().is_one() {
        return r.num().to_plain();
    }
    let (num, den) = r.display_parts();
    let n = if poly_is_simple(&num) {
        num.to_plain()
    } else {
        paren(num.to_plain())
    };
    let d = if poly_is_simple(&den) {
        den.to_plain()
    } else {
        paren(den.to_plain())
    };
    format!("{n}/{d}")
}

/// Rendering of a single factor inside a product.
fn plain_factor(f: &SumExpr, first: bool) -> String {
    match f {
        SumExpr::Add(_) => paren(plain(f)),
        SumExpr::Const(c) if !first && (!c.is_integer() || c.is_negative()) => paren(plain(f)),
        SumExpr::RatCoeff(r) if r.den().is_one() && r.num().num_terms() > 1 => paren(plain(f)),
        SumExpr::RatCoeff(r) if r.den().is_one() && !first && r.is_negative() => paren(plain(f)),
        SumExpr::RatCoeff(r) if !r.den().is_one() && !first => paren(plain(f)),
        SumExpr::RatCoeff(r) if r.den().is_one() => {
            // Single-term polynomial such as `2*n`: safe as a factor.
            plain(f)
        }
        _ => plain(f),
    }
}

fn plain_pow_base(b: &SumExpr) -> String {
    match b {
        SumExpr::Var(_) | SumExpr::Gen { .. } | SumExpr::Sum { .. } => plain(b),
        SumExpr::Hyper(HyperAtom::AltSign(_)) => paren(plain(b)),
        SumExpr::Hyper(_) => plain(b),
        SumExpr::Const(c) if c.is_integer() && !c.is_negative() => plain(b),
        _ => paren(plain(b)),
    }
}

fn plain_affine_arg(a: &Affine) -> String {
    a.render()
}

fn plain_hyper(h: &HyperAtom) -> String {
    match h {
        HyperAtom::Binom { top, bottom } => format!("binom({},{})", top.render(), bottom.render()),
        HyperAtom::InvBinom { top, bottom } => {
            format!("invbinom({},{})", top.render(), bottom.render())
        }
        HyperAtom::Harmonic(a) => format!("harmonic({})", a.render()),
        HyperAtom::Fact(a) => format!("fact({})", a.render()),
        HyperAtom::AltSign(a) => {
            if a.is_compound() {
                format!("(-1)^({})", a.render())
            } else {
                format!("(-1)^{}", a.render())
            }
        }
        HyperAtom::Pow { base, exp } => {
            let b = match base {
                PowBase::Rat(q) => format_rat(q),
                PowBase::Param(p) => p.clone(),
            };
            format!("pow({},{})", b, plain_affine_arg(exp))
        }
    }
}

fn plain(e: &SumExpr) -> String {
    match e {
        SumExpr::Const(c) => format_rat(c),
        SumExpr::Var(v) => v.clone(),
        SumExpr::RatCoeff(r) => plain_ratfunc(r),
        SumExpr::Gen { name, index } => format!("{}[{}]", name, index.render()),
        SumExpr::Hyper(h) => plain_hyper(h),
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => format!("Sum({},{},{},{})", var, lower, plain(upper), plain(body)),
        SumExpr::Pow(b, k) => format!("{}^{}", plain_pow_base(b), k),
        SumExpr::Mul(fs) if fs.len() > 1 && fs[0] == SumExpr::int(-1) => {
            format!("-{}", plain(&SumExpr::Mul(fs[1..].to_vec())))
        }
        SumExpr::Mul(fs) => fs
            .iter()
            .enumerate()
            .map(|(i, f)| plain_factor(f, i == 0))
            .collect::<Vec<_>>()
            .join("*"),
        SumExpr::Add(ts) => join_terms(ts, false, &plain),
    }
}

fn latex_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else if c.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -c.numer(), c.denom())
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

fn latex_affine(a: &Affine) -> String {
    a.render().replace('*', " ")
}

fn latex_hyper(h: &HyperAtom) -> String {
    match h {
        HyperAtom::Binom { top, bottom } => {
            format!("\\binom{{{}}}{{{}}}", latex_affine(top), latex_affine(bottom))
        }
        HyperAtom::InvBinom { top, bottom } => format!(
            "\\binom{{{}}}{{{}}}^{{-1}}",
            latex_affine(top),
            latex_affine(bottom)
        ),
        HyperAtom::Harmonic(a) => format!("H_{{{}}}", latex_affine(a)),
        HyperAtom::Fact(a) => format!("({})!", latex_affine(a)),
        HyperAtom::AltSign(a) => format!("(-1)^{{{}}}", latex_affine(a)),
        HyperAtom::Pow { base, exp } => {
            let b = match base {
                PowBase::Rat(q) if q.is_integer() && !q.is_negative() => latex_rat(q),
                PowBase::Rat(q) => format!("\\left({}\\right)", latex_rat(q)),
                PowBase::Param(p) => p.clone(),
            };
            format!("{}^{{{}}}", b, latex_affine(exp))
        }
    }
}

pub fn to_latex(e: &SumExpr) -> String {
    match e {
        SumExpr::Const(c) => latex_rat(c),
        SumExpr::Var(v) => v.clone(),
        SumExpr::RatCoeff(r) => r.to_latex(),
        SumExpr::Gen { name, index } => format!("{}_{{{}}}", name, latex_affine(index)),
        SumExpr::Hyper(h) => latex_hyper(h),
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => format!(
            "\\sum_{{{}={}}}^{{{}}} {}",
            var,
            lower,
            to_latex(upper),
            latex_factor(body)
        ),
        SumExpr::Pow(b, k) => match b.as_ref() {
            SumExpr::Var(_)
            | SumExpr::Gen { .. }
            | SumExpr::Hyper(HyperAtom::Binom { .. } | HyperAtom::Harmonic(_)) => {
                format!("{}^{{{}}}", to_latex(b), k)
            }
            _ => format!("\\left({}\\right)^{{{}}}", to_latex(b), k),
        },
        SumExpr::Mul(fs) if fs.len() > 1 && fs[0] == SumExpr::int(-1) => {
            format!("-{}", to_latex(&SumExpr::Mul(fs[1..].to_vec())))
        }
        SumExpr::Mul(fs) => fs.iter().map(latex_factor).collect::<Vec<_>>().join(" "),
        SumExpr::Add(ts) => {
            let mut s = String::new();
            for (i, t) in ts.iter().enumerate() {
                if is_negative(t) {
                    s.push_str(if i == 0 { "-" } else { " - " });
                    let n = neg(t);
                    if is_compound(&n) {
                        s.push_str(&format!("\\left({}\\right)", to_latex(&n)));
                    } else {
                        s.push_str(&to_latex(&n));
                    }
                } else {
                    if i > 0 {
                        s.push_str(" + ");
                    }
                    s.push_str(&to_latex(t));
                }
            }
            s
        }
    }
}

fn latex_factor(f: &SumExpr) -> String {
    match f {
        SumExpr::Add(_) => format!("\\left({}\\right)", to_latex(f)),
        SumExpr::RatCoeff(r) if r.den().is_one() && r.num().num_terms() > 1 => {
            format!("\\left({}\\right)", to_latex(f))
        }
        SumExpr::Sum { .. } => format!("\\left({}\\right)", to_latex(f)),
        _ => to_latex(f),
    }
}

fn affine_json(a: &Affine) -> Value {
    json!({"terms": a.terms, "constant": a.constant})
}

pub fn to_json(e: &SumExpr) -> Value {
    match e {
        SumExpr::Const(c) => json!({"kind": "Const", "value": format_rat(c)}),
        SumExpr::Var(v) => json!({"kind": "Var", "name": v}),
        SumExpr::RatCoeff(r) => json!({
            "kind": "RatCoeff",
            "num": r.num().to_plain(),
            "den": r.den().to_plain(),
        }),
        SumExpr::Gen { name, index } => json!({
            "kind": "Gen", "name": name, "index": affine_json(index),
        }),
        SumExpr::Hyper(h) => {
            let mut v = json!({
                "kind": "Hyper",
                "atom": h.name(),
                "args": h.args().into_iter().map(affine_json).collect::<Vec<_>>(),
            });
            if let HyperAtom::Pow { base, .. } = h {
                v["base"] = match base {
                    PowBase::Rat(q) => json!(format_rat(q)),
                    PowBase::Param(p) => json!(p),
                };
            }
            v
        }
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => json!({
            "kind": "Sum", "var": var, "lower": lower,
            "upper": to_json(upper), "body": to_json(body),
        }),
        SumExpr::Pow(b, k) => json!({"kind": "Pow", "base": to_json(b), "exp": k}),
        SumExpr::Mul(fs) => json!({"kind": "Mul", "factors": fs.iter().map(to_json).collect::<Vec<_>>()}),
        SumExpr::Add(ts) => json!({"kind": "Add", "terms": ts.iter().map(to_json).collect::<Vec<_>>()}),
    }
}

impl std::fmt::Display for SumExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&to_plain(self))
    }
}
