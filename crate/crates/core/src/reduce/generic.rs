use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::algebra::{solve_linear_system, Monomial, MultiPoly, Rat, RatFunc};
use crate::expr::{normalize, Affine, SumExpr};
use crate::oracle::{check_identity, CheckOptions, Constraint};
use crate::telescope::Fresh;

use super::ring::{self, from_expr, gen_var, parse_gen, reduce_m, to_expr, Target, K, M, S};
use super::{CaseTag, ReduceError, ReductionResult};

/// Generic part of a monomial: `(name, shift, exponent)` in name/shift order.
type GenPart = Vec<(String, i64, u32)>;

fn split_mono(m: &Monomial) -> (u32, u32, GenPart) {
    let mut k = 0;
    let mut sign = 0;
    let mut gens = Vec::new();
    for (v, e) in m.pairs() {
        if v == K {
            k = *e;
        } else if v == M {
            sign = *e;
        } else if let Some((n, l)) = parse_gen(v) {
            gens.push((n.to_string(), l, *e));
        }
    }
    gens.sort();
    (k, sign, gens)
}

fn min_shift(g: &GenPart) -> i64 {
    g.iter().map(|(_, l, _)| *l).min().unwrap_or(0)
}

fn shifted(g: &GenPart, by: i64) -> GenPart {
    g.iter().map(|(n, l, e)| (n.clone(), l + by, *e)).collect()
}

fn gen_poly(g: &GenPart) -> MultiPoly {
    g.iter().fold(MultiPoly::one(), |acc, (n, l, e)| {
        &acc * &MultiPoly::var(&gen_var(n, *l)).pow(*e)
    })
}

/// Shift class of a generic part: the part moved so its lowest index is 0.
fn class_of(g: &GenPart) -> GenPart {
    shifted(g, -min_shift(g))
}

fn binomial(n: usize, k: usize) -> Rat {
    (0..k).fold(Rat::one(), |acc, i| acc * Rat::from_integer(((n - i) as i64).into()) / Rat::from_integer(((i + 1) as i64).into()))
}

/// Mutable state of one reduction: fresh-symbol supply and every polynomial
/// that must see parameter assignments.
struct Reducer {
    x: String,
    fresh: Fresh,
}

type Assignment = Vec<(String, MultiPoly)>;

impl Reducer {
    /// Solves `σ(g) - g = rhs` in the ring without `S`, by undetermined
    /// coefficients. `rhs` is linear in the pending symbols, which are solved
    /// for as well. Free directions become fresh symbols.
    fn solve_level(&mut self, rhs: &MultiPoly) -> Option<(MultiPoly, Assignment)> {
        let pending: Vec<String> = rhs.vars().into_iter().filter(|v| self.fresh.is_fresh(v)).collect();
        let zero_point = pending.iter().map(|p| (p.clone(), Rat::zero())).collect();
        let rhs0 = rhs.partial_eval(&zero_point);
        let mut pieces = Vec::new();
        for p in &pending {
            let cs = rhs.coeffs_in(p);
            if cs.len() > 2 {
                return None;
            }
            pieces.push(cs.get(1).cloned().unwrap_or_default());
        }

        // Ansatz monomials: constants and (-1)^k, plus lower shifts of every
        // generic monomial down to the lowest index seen in its class.
        let mut lowest: BTreeMap<GenPart, i64> = BTreeMap::new();
        let mut parts: BTreeSet<GenPart> = BTreeSet::new();
        let mut k_deg = 0;
        for poly in std::iter::once(&rhs0).chain(&pieces) {
            for (m, _) in poly.terms() {
                let (kd, _, g) = split_mono(m);
                k_deg = k_deg.max(kd);
                if g.is_empty() {
                    continue;
                }
                let low = lowest.entry(class_of(&g)).or_insert(i64::MAX);
                *low = (*low).min(min_shift(&g));
                parts.insert(g);
            }
        }
        let mut candidates: BTreeSet<GenPart> = BTreeSet::new();
        candidates.insert(Vec::new());
        for g in &parts {
            let low = lowest[&class_of(g)];
            for t in 1..=(min_shift(g) - low) {
                candidates.insert(shifted(g, -t));
            }
        }
        let mut basis = Vec::new();
        for g in &candidates {
            let base = gen_poly(g);
            for sign in [MultiPoly::one(), MultiPoly::var(M)] {
                for t in 0..=k_deg + 1 {
                    basis.push(&(&base * &sign) * &MultiPoly::var(K).pow(t));
                }
            }
        }

        let mut columns: Vec<MultiPoly> = basis
            .iter()
            .map(|b| &ring::sigma(b, &self.x, 1) - b)
            .collect();
        columns.extend(pieces.iter().map(|p| -p));
        let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
        for poly in columns.iter().chain(std::iter::once(&rhs0)) {
            for (m, _) in poly.terms() {
                let n = rows.len();
                rows.entry(m.clone()).or_insert(n);
            }
        }
        let mut a = vec![vec![RatFunc::zero(); columns.len()]; rows.len()];
        for (j, col) in columns.iter().enumerate() {
            for (m, c) in col.terms() {
                a[rows[m]][j] = RatFunc::constant(c.clone());
            }
        }
        let mut b = vec![RatFunc::zero(); rows.len()];
        for (m, c) in rhs0.terms() {
            b[rows[m]] = RatFunc::constant(c.clone());
        }
        let space = solve_linear_system(&a, &b)?;

        let syms: Vec<MultiPoly> = space.nullspace.iter().map(|_| MultiPoly::var(&self.fresh.next())).collect();
        let value = |j: usize| -> MultiPoly {
            let mut v = MultiPoly::constant(space.particular[j].as_constant().expect("constant system"));
            for (sym, null) in syms.iter().zip(&space.nullspace) {
                let c = null[j].as_constant().expect("constant system");
                v = &v + &sym.scale(&c);
            }
            v
        };
        let mut g = MultiPoly::zero();
        for (j, bj) in basis.iter().enumerate() {
            g = &g + &(bj * &value(j));
        }
        let assignment = pending
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), value(basis.len() + i)))
            .collect();
        Some((g, assignment))
    }
}

fn apply(polys: &mut [&mut MultiPoly], assignment: &Assignment) {
    for (sym, val) in assignment {
        for p in polys.iter_mut() {
            if p.has_var(sym) {
                **p = p.subst(sym, val);
            }
        }
    }
}

/// Splits a polynomial by shift class of its generic part.
fn by_class(p: &MultiPoly) -> BTreeMap<GenPart, MultiPoly> {
    let mut out: BTreeMap<GenPart, MultiPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (_, _, g) = split_mono(m);
        let e = out.entry(class_of(&g)).or_default();
        *e = &*e + &MultiPoly::term(m.clone(), c.clone());
    }
    out
}

/// `base`, `base1`, `base2`, ... skipping names in `taken`.
fn unused_names<'a>(base: &'a str, taken: &'a BTreeSet<String>) -> impl Iterator<Item = String> + 'a {
    std::iter::once(base.to_string())
        .chain((1..).map(move |i| format!("{base}{i}")))
        .filter(move |n| !taken.contains(n))
}

fn outer_sum(sum: &SumExpr) -> Result<(String, String, SumExpr), ReduceError> {
    let SumExpr::Sum {
        var,
        lower: 0,
        upper,
        body,
    } = sum
    else {
        return Err(ReduceError::Unsupported(
            "expected a definite sum Sum(k,0,a,...) starting at 0".into(),
        ));
    };
    let a = match normalize(upper) {
        SumExpr::Var(a) if &a != var => a,
        _ => return Err(ReduceError::Unsupported("outer upper bound must be a variable".into())),
    };
    Ok((var.clone(), a, normalize(body)))
}

/// Reduces `Sum(k, 0, a, P(k, X, S(k)))` with `S(k) = Sum(j, 0, k, X[j])`.
///
/// The telescoper `g = g_0 + g_1 S + ... + g_{d+1} S^{d+1}` is found from
/// the top coefficient down. A coefficient equation that has no solution in
/// the generic ring is handed to a fresh sequence `Y` and recorded as a
/// constraint (degree >= 1), or kept as a plain sum (degree 0). More than
/// `max_constraints` fresh sequences makes the reduction give up and return
/// the input unchanged. The result is checked by the oracle before it is
/// returned.
pub fn reduce_generic(sum: &SumExpr, max_constraints: usize) -> Result<ReductionResult, ReduceError> {
    let sum = normalize(sum);
    let (k, a, body) = outer_sum(&sum)?;
    let mut x = None;
    let f = from_expr(&body, &k, &mut x)?;
    let x = x
        .or_else(|| ring::generic_names(&f).into_iter().next())
        .unwrap_or_else(|| "X".to_string());
    let d = f.degree(S) as usize;
    let mut red = Reducer {
        x: x.clone(),
        fresh: Fresh::new("@c"),
    };

    let mut levels = ring::sigma(&f, &x, 1).coeffs_in(S);
    levels.resize(d + 2, MultiPoly::zero());
    let mut g = vec![MultiPoly::zero(); d + 2];
    let mut h = MultiPoly::zero();
    let mut taken: BTreeSet<String> = sum.generic_names();
    taken.extend(sum.free_vars());
    taken.insert(k.clone());
    let mut y_names = unused_names("Y", &taken);
    let mut constraints: Vec<(String, MultiPoly)> = Vec::new();
    let x1 = MultiPoly::var(&gen_var(&x, 1));

    for j in (0..=d + 1).rev() {
        let mut rhs = levels[j].clone();
        for (i, gi) in g.iter().enumerate().skip(j + 1) {
            let term = ring::mul(&ring::sigma(gi, &x, 1), &x1.pow((i - j) as u32));
            rhs = &rhs - &term.scale(&binomial(i, j));
        }
        if let Some((gj, asg)) = red.solve_level(&rhs) {
            g[j] = gj;
            let mut all: Vec<&mut MultiPoly> = g.iter_mut().chain(levels.iter_mut()).collect();
            all.extend(constraints.iter_mut().map(|(_, c)| c));
            apply(&mut all, &asg);
            continue;
        }
        if j > 0 {
            if constraints.len() >= max_constraints {
                return Ok(ReductionResult::unchanged(sum, &k, &a, &x));
            }
            let y = y_names.next().expect("unbounded names");
            g[j] = MultiPoly::var(&gen_var(&y, 0));
            constraints.push((y, rhs));
            continue;
        }
        // Degree 0: keep what solves, sum up the rest trivially.
        let mut parts: Vec<MultiPoly> = by_class(&rhs).into_values().collect();
        for i in 0..parts.len() {
            let Some((gp, asg)) = red.solve_level(&parts[i]) else {
                h = &h + &parts[i];
                continue;
            };
            g[0] = &g[0] + &gp;
            let mut all: Vec<&mut MultiPoly> = g.iter_mut().chain(std::iter::once(&mut h)).collect();
            all.extend(constraints.iter_mut().map(|(_, c)| c));
            all.extend(parts.iter_mut().skip(i + 1));
            apply(&mut all, &asg);
        }
    }

    // Name the constants the constraints depend on; fix the rest to zero.
    let mut params = Vec::new();
    let mut c_names = unused_names("c", &taken);
    let mut renames: Assignment = Vec::new();
    for (_, c) in &constraints {
        for v in c.vars() {
            if red.fresh.is_fresh(&v) && !renames.iter().any(|(s, _)| s == &v) {
                let name = c_names.next().expect("unbounded names");
                renames.push((v, MultiPoly::var(&name)));
                params.push(name);
            }
        }
    }
    let mut leftover: BTreeSet<String> = BTreeSet::new();
    for p in g.iter().chain(std::iter::once(&h)) {
        leftover.extend(p.vars().into_iter().filter(|v| red.fresh.is_fresh(v)));
    }
    leftover.retain(|v| !renames.iter().any(|(s, _)| s == v));
    let mut d_names = unused_names("d", &taken);
    let fixed_to_zero: Vec<String> = leftover.iter().map(|_| d_names.next().expect("names")).collect();
    renames.extend(leftover.into_iter().map(|v| (v, MultiPoly::zero())));
    {
        let mut all: Vec<&mut MultiPoly> = g.iter_mut().chain(std::iter::once(&mut h)).collect();
        all.extend(constraints.iter_mut().map(|(_, c)| c));
        apply(&mut all, &renames);
    }

    let s = MultiPoly::var(S);
    let telescoper = g
        .iter()
        .enumerate()
        .fold(MultiPoly::zero(), |acc, (i, gi)| &acc + &reduce_m(&(gi * &s.pow(i as u32))));
    let h_at = ring::sigma(&h, &x, -1);
    let bound = if a == "i" { "j" } else { "i" };
    let at_a = Target::new(Affine::var(&a), &x);
    let h_sum = (!h.is_zero()).then(|| {
        SumExpr::sum(bound, 0, SumExpr::var(&a), to_expr(&h_at, &Target::new(Affine::var(bound), &x)))
    });
    // Sum_{k=0}^a f(k) = f(0) + G(a) - G(0).
    let x0 = MultiPoly::var(&gen_var(&x, 0));
    let boundary = (&(&f - &telescoper) - &h_at).subst(S, &x0).eval_var(K, &Rat::zero());
    let mut closed_terms = vec![to_expr(&telescoper, &at_a), to_expr(&boundary, &Target::new(Affine::constant(0), &x))];
    closed_terms.extend(h_sum.clone());
    let closed_form = normalize(&SumExpr::add(closed_terms));

    let constraints: Vec<Constraint> = constraints
        .iter()
        .map(|(y, rhs)| Constraint {
            symbol: y.clone(),
            var: a.clone(),
            rhs: to_expr(rhs, &at_a),
        })
        .collect();
    let case = if !constraints.is_empty() {
        CaseTag::SolvedWithConstraints
    } else if h_sum.is_some() {
        CaseTag::SolvedWithExtension
    } else {
        CaseTag::SolvedInRing
    };
    let mut k_sum = vec![to_expr(&telescoper, &Target::new(Affine::var(&k), &x))];
    if !h.is_zero() {
        let inner = if k == "i" { "j" } else { "i" };
        k_sum.push(SumExpr::sum(inner, 0, SumExpr::var(&k), to_expr(&h_at, &Target::new(Affine::var(inner), &x))));
    }
    let result = ReductionResult {
        input: sum,
        var: a,
        generic: x,
        closed_form,
        constraints,
        params,
        extensions: h_sum.into_iter().collect(),
        case,
        fixed_to_zero,
        telescoper: normalize(&SumExpr::add(k_sum)),
        telescoper_degree: telescoper.degree(S) as usize,
        summand_degree: d,
    };
    let report = check_identity(&result.identity(), &CheckOptions::default());
    if !report.passed() {
        return Err(ReduceError::Unsound(report.summary()));
    }
    Ok(result)
}
