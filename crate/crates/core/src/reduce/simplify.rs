use crate::algebra::{MultiPoly, RatFunc};
use crate::expr::{lin_of, normalize, rename_bound, subst_affine, Affine, AtomMono, Lin, SumExpr};

use super::ReduceError;

const BOUND_NAMES: [&str; 6] = ["i", "j", "l", "r", "u", "w"];

/// Rewrites `Sum(k,0,a, Sum(j,0,k,A(j)) * B(k))` by exchanging the order of
/// summation over the square `0 <= j, k <= a`:
/// `(sum B)(sum A) + sum A*B - sum_k A(k) * Sum(j,0,k,B(j))`.
pub fn interchange(double_sum: &SumExpr) -> Result<SumExpr, ReduceError> {
    let shape = |msg: &str| ReduceError::Shape(msg.to_string());
    let SumExpr::Sum {
        var: k,
        lower: 0,
        upper,
        body,
    } = double_sum
    else {
        return Err(shape("expected Sum(k,0,a,...)"));
    };
    let lin = lin_of(body);
    let [(mono, coeff)] = lin.terms.iter().collect::<Vec<_>>()[..] else {
        return Err(shape("summand must be a single product"));
    };
    let mut inner = None;
    let mut rest = Lin::coeff(coeff.clone());
    for (atom, e) in mono {
        match atom {
            SumExpr::Sum {
                var: j,
                lower: 0,
                upper: u,
                body: a_body,
            } if *e == 1 && inner.is_none() && **u == SumExpr::var(k) => {
                inner = Some((j.clone(), (**a_body).clone()));
            }
            _ => rest = rest.mul(&lin_of(&SumExpr::Pow(Box::new(atom.clone()), *e))),
        }
    }
    let (j, a_body) = inner.ok_or_else(|| shape("no inner sum Sum(j,0,k,...) in the summand"))?;
    let b_body = rest.to_expr();
    if a_body.free_vars().contains(k) {
        return Err(shape("inner summand depends on the outer index"));
    }
    let at = |e: &SumExpr, from: &str, to: &str| {
        subst_affine(e, from, &Affine::var(to)).map_err(|err| ReduceError::Shape(err.to_string()))
    };
    let a_k = at(&a_body, &j, k)?;
    let b_j = at(&b_body, k, &j)?;
    let up = (**upper).clone();
    let total_b = SumExpr::sum(k, 0, up.clone(), b_body.clone());
    let total_a = SumExpr::sum(&j, 0, up.clone(), a_body.clone());
    let diagonal = SumExpr::sum(k, 0, up.clone(), SumExpr::mul(vec![b_body, a_k.clone()]));
    let nested = SumExpr::sum(
        k,
        0,
        up,
        SumExpr::mul(vec![a_k, SumExpr::sum(&j, 0, SumExpr::var(k), b_j)]),
    );
    Ok(SumExpr::add(vec![
        SumExpr::mul(vec![total_b, total_a]),
        diagonal,
        SumExpr::mul(vec![SumExpr::int(-1), nested]),
    ]))
}

/// Splits sums over sums of terms, pulls factors free of the summation
/// variable out, moves every upper bound `a+v` to `a` (collecting the
/// boundary terms) and renames bound variables canonically, so that sums
/// with equal bodies merge.
pub fn post_simplify(e: &SumExpr) -> SumExpr {
    post_simplify_with_threshold(e).0
}

/// [`post_simplify`] together with the least value of the upper-bound
/// variable from which the rewrite is exact (`i64::MIN` when unconditional).
pub fn post_simplify_with_threshold(e: &SumExpr) -> (SumExpr, i64) {
    let mut threshold = i64::MIN;
    let out = simplify_lin(&lin_of(e), &mut threshold);
    (out.to_expr(), threshold)
}

fn simplify_lin(l: &Lin, thr: &mut i64) -> Lin {
    let mut out = Lin::zero();
    for (mono, c) in &l.terms {
        let mut acc = Lin::coeff(c.clone());
        for (atom, e) in mono {
            let part = match atom {
                SumExpr::Sum { .. } => simplify_sum(atom, thr),
                _ => Lin::atom(atom.clone()),
            };
            acc = acc.mul(&part.pow(*e));
        }
        out = out.add(&acc);
    }
    out
}

fn simplify_sum(s: &SumExpr, thr: &mut i64) -> Lin {
    let SumExpr::Sum {
        var,
        lower,
        upper,
        body,
    } = s
    else {
        unreachable!("called on sums only")
    };
    let body = simplify_lin(&lin_of(body), thr);
    let upper = normalize(upper);

    // Upper bound a+v becomes a, plus or minus the boundary terms.
    let affine = upper.to_ratfunc().and_then(|r| r.as_poly()).and_then(|p| Affine::from_poly(&p));
    if let Some(aff) = affine.filter(|a| a.terms.len() == 1 && a.terms.values().all(|c| *c == 1) && a.constant != 0) {
        let v = aff.constant;
        let base = aff.plus(-v);
        let body_e = body.to_expr();
        let mut out = simplify_sum(&SumExpr::sum(var, *lower, SumExpr::RatCoeff(RatFunc::from_poly(base.to_poly())), body_e.clone()), thr);
        let (range, sign) = if v > 0 { (1..=v, 1) } else { (v + 1..=0, -1) };
        for t in range {
            if let Ok(term) = subst_affine(&body_e, var, &base.plus(t)) {
                out = out.add(&lin_of(&term).scale(&RatFunc::int(sign)));
            }
        }
        // Exact once the shorter range is not below an empty sum.
        *thr = (*thr).max(lower - 1 - v.min(0));
        return out;
    }

    let mut out = Lin::zero();
    for (mono, c) in &body.terms {
        let mut inside = AtomMono::new();
        let mut outside = AtomMono::new();
        for (atom, e) in mono {
            if atom.free_vars().contains(var) {
                inside.insert(atom.clone(), *e);
            } else {
                outside.insert(atom.clone(), *e);
            }
        }
        let outside = Lin {
            terms: [(outside, RatFunc::one())].into_iter().collect(),
        };
        for (coef, power) in split_coeff(c, var) {
            let mut inner = Lin::zero();
            inner.add_term(inside.clone(), power);
            let summed = canonical_sum(var, *lower, &upper, inner.to_expr());
            out = out.add(&Lin::atom(summed).mul(&outside).scale(&coef));
        }
    }
    out
}

/// `c = sum_t coef_t * var^t` with `coef_t` free of `var`; a coefficient
/// with `var` in its denominator stays whole.
fn split_coeff(c: &RatFunc, var: &str) -> Vec<(RatFunc, RatFunc)> {
    if c.den().has_var(var) || !c.num().has_var(var) {
        return if c.has_var(var) {
            vec![(RatFunc::one(), c.clone())]
        } else {
            vec![(c.clone(), RatFunc::one())]
        };
    }
    let den = RatFunc::from_poly(c.den().clone());
    c.num()
        .coeffs_in(var)
        .into_iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(t, p)| {
            (
                &RatFunc::from_poly(p) / &den,
                RatFunc::from_poly(MultiPoly::var(var).pow(t as u32)),
            )
        })
        .collect()
}

/// A sum atom with its bound variable renamed to the first canonical name
/// not free in it.
fn canonical_sum(var: &str, lower: i64, upper: &SumExpr, body: SumExpr) -> SumExpr {
    let mut free = body.free_vars();
    free.remove(var);
    free.extend(upper.free_vars());
    let s = SumExpr::sum(var, lower, upper.clone(), body);
    let name = BOUND_NAMES
        .into_iter()
        .find(|n| !free.contains(*n))
        .expect("an unused bound name");
    let renamed = rename_bound(&s, name).unwrap_or(s);
    match renamed {
        SumExpr::Sum {
            var,
            lower,
            upper,
            body,
        } => SumExpr::Sum {
            var,
            lower,
            upper,
            body: Box::new(normalize(&body)),
        },
        other => other,
    }
}
