use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{MultiPoly, Rat, RatFunc};
use crate::expr::{normalize, subst_affine, Affine, HyperAtom, PowBase, SumExpr};
use crate::telescope::sigma_layer_telescope;

use super::{DiffRingError, ExtKind, Tower, TowerElem};

#[derive(Clone, Debug, PartialEq)]
pub enum Admissibility {
    Admissible,
    /// A `g` in the current ring with `σ(g) - g = β`.
    Inadmissible(TowerElem),
}

/// Decides whether `σ(s) = s + β` defines a Σ-extension of `tower`, by
/// searching for `g` with `σ(g) - g = β`.
pub fn check_sigma_ext(beta: &TowerElem, tower: &Tower) -> Result<Admissibility, DiffRingError> {
    match sigma_layer_telescope(beta, tower, &[])? {
        Some(sol) => Ok(Admissibility::Inadmissible(sol.g)),
        None => Ok(Admissibility::Admissible),
    }
}

/// An expression realized in a tower.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub tower: Tower,
    pub elem: TowerElem,
}

/// Builds the smallest tower over `Q(params)(var)` housing `e` and the
/// element representing it. Sums that telescope inside the ring built so far
/// are replaced by their closed form instead of a new generator.
pub fn from_expression(e: &SumExpr, var: &str) -> Result<Embedding, DiffRingError> {
    embed_into(&Tower::base(var), e)
}

/// Like [`from_expression`], reusing and extending an existing tower.
pub fn embed_into(tower: &Tower, e: &SumExpr) -> Result<Embedding, DiffRingError> {
    let mut t = tower.clone();
    let elem = embed(&mut t, &normalize(e))?;
    Ok(Embedding { tower: t, elem })
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T, DiffRingError> {
    Err(DiffRingError::Unsupported(msg.into()))
}

fn shift_by(tower: &Tower, x: &TowerElem, v: i64) -> TowerElem {
    let mut out = x.clone();
    for _ in 0..v.unsigned_abs() {
        out = if v > 0 { tower.sigma(&out) } else { tower.sigma_inv(&out) };
    }
    out
}

fn embed(tower: &mut Tower, e: &SumExpr) -> Result<TowerElem, DiffRingError> {
    let var = tower.var.clone();
    Ok(match e {
        SumExpr::Const(c) => TowerElem::from_ratfunc(RatFunc::constant(c.clone())),
        SumExpr::Var(v) => TowerElem::from_ratfunc(RatFunc::var(v)),
        SumExpr::RatCoeff(r) => TowerElem::from_ratfunc(r.clone()),
        SumExpr::Gen { name, .. } => return unsupported(format!("generic sequence `{name}` in a tower")),
        SumExpr::Hyper(h) => embed_atom(tower, h, &var)?,
        SumExpr::Sum {
            var: j,
            lower,
            upper,
            body,
        } => {
            let up = upper
                .to_ratfunc()
                .and_then(|r| r.as_poly())
                .and_then(|p| Affine::from_poly(&p));
            let v = match up {
                Some(a) if a.coeff(&var) == 1 && a.vars().len() == 1 => a.constant,
                _ => return unsupported(format!("summation bound `{}`", crate::expr::to_plain(upper))),
            };
            if j != &var && body.free_vars().contains(&var) {
                return unsupported("summand depends on the outer variable");
            }
            let inner = normalize(&subst_affine(body, j, &Affine::var(&var)).map_err(|e| DiffRingError::Unsupported(e.to_string()))?);
            let x = embed(tower, &inner)?;
            let beta = tower.sigma(&x);
            let mut init = RatFunc::zero();
            for i in *lower..=0 {
                init = &init + &ev_sym(tower, &x, i)?;
            }
            let display = SumExpr::sum(j, *lower, SumExpr::var(&var), (**body).clone());
            let s = sigma_generator(tower, beta, init, display)?;
            shift_by(tower, &s, v)
        }
        SumExpr::Pow(b, k) => {
            let x = embed(tower, b)?;
            tower.pow(&x, *k)
        }
        SumExpr::Mul(fs) => {
            let mut acc = TowerElem::one();
            for f in fs {
                let x = embed(tower, f)?;
                acc = tower.mul(&acc, &x);
            }
            acc
        }
        SumExpr::Add(ts) => {
            let mut acc = TowerElem::zero();
            for t in ts {
                acc = acc.add(&embed(tower, t)?);
            }
            acc
        }
    })
}

/// Reuses a Σ-generator with the same rule, collapses a telescoping sum, or
/// adjoins a new generator.
fn sigma_generator(
    tower: &mut Tower,
    beta: TowerElem,
    init: RatFunc,
    display: SumExpr,
) -> Result<TowerElem, DiffRingError> {
    for (i, ext) in tower.exts.iter().enumerate() {
        if let ExtKind::Sigma { beta: b, init: s0 } = &ext.kind {
            if b == &beta {
                // Same rule, possibly another starting value.
                return Ok(TowerElem::gen(i).add(&TowerElem::from_ratfunc(&init - s0)));
            }
        }
    }
    match super::check_sigma_ext(&beta, tower)? {
        super::Admissibility::Inadmissible(g) => {
            let g0 = ev_sym(tower, &g, 0)?;
            Ok(g.add(&TowerElem::from_ratfunc(&init - &g0)))
        }
        super::Admissibility::Admissible => {
            let name = format!("s{}", tower.len());
            *tower = tower.push(&name, ExtKind::Sigma { beta, init }, display);
            Ok(TowerElem::gen(tower.len() - 1))
        }
    }
}

fn embed_atom(tower: &mut Tower, h: &HyperAtom, var: &str) -> Result<TowerElem, DiffRingError> {
    if !h.free_vars().contains(var) {
        return unsupported(format!("atom `{}` constant in `{var}`", crate::expr::to_plain(&SumExpr::Hyper(h.clone()))));
    }
    match h {
        HyperAtom::Harmonic(a) => {
            if a.coeff(var) != 1 || a.vars().len() != 1 {
                return unsupported("harmonic number argument");
            }
            let beta = TowerElem::from_ratfunc(
                RatFunc::new(MultiPoly::one(), MultiPoly::var_plus(var, 1)).expect("nonzero"),
            );
            let display = SumExpr::Hyper(HyperAtom::Harmonic(Affine::var(var)));
            let s = sigma_generator(tower, beta, RatFunc::zero(), display)?;
            Ok(shift_by(tower, &s, a.constant))
        }
        HyperAtom::AltSign(a) => {
            if a.coeff(var).rem_euclid(2) == 0 {
                return unsupported("sign atom with even coefficient");
            }
            let display = SumExpr::Hyper(HyperAtom::AltSign(Affine::var(var)));
            let i = match tower.exts.iter().position(|x| x.display == display) {
                Some(i) => i,
                None => {
                    *tower = tower.extend_r(&format!("m{}", tower.len()), display);
                    tower.len() - 1
                }
            };
            let mut g = TowerElem::gen(i);
            if a.constant.rem_euclid(2) == 1 {
                g = g.neg();
            }
            Ok(g)
        }
        HyperAtom::InvBinom { top, bottom } => {
            let b = embed_atom(
                tower,
                &HyperAtom::Binom {
                    top: top.clone(),
                    bottom: bottom.clone(),
                },
                var,
            )?;
            // binom^(-1): a single monomial in a Π-generator.
            let mut out = TowerElem::zero();
            for (e, c) in b.terms() {
                let inv = c.inv().map_err(|_| DiffRingError::Unsupported("zero binomial".into()))?;
                out.add_term(e.iter().map(|x| -x).collect(), inv);
            }
            if out.terms().count() != 1 {
                return unsupported("inverse of a non-monomial");
            }
            Ok(out)
        }
        HyperAtom::Binom { bottom: main, .. } | HyperAtom::Fact(main) | HyperAtom::Pow { exp: main, .. } => {
            let v = main.constant;
            let base = h.map_args(&|a| a.subst(var, &Affine::var_plus(var, -v)));
            let Some(alpha) = base.quotient(var) else {
                return unsupported(format!("atom `{}`", crate::expr::to_plain(&SumExpr::Hyper(h.clone()))));
            };
            let display = SumExpr::Hyper(base.clone());
            let i = match tower.exts.iter().position(|x| x.display == display) {
                Some(i) => i,
                None => {
                    *tower = tower.extend_pi(&format!("{}{}", base.name(), tower.len()), alpha, display)?;
                    tower.len() - 1
                }
            };
            Ok(shift_by(tower, &TowerElem::gen(i), v))
        }
    }
}

fn rat_i(i: i64) -> Rat {
    Rat::from_integer(BigInt::from(i))
}

/// Value of an atom at `var = i` with parameters kept symbolic.
fn atom_at(h: &HyperAtom, var: &str, i: i64) -> Result<RatFunc, DiffRingError> {
    let at = |a: &Affine| a.subst(var, &Affine::constant(i));
    let int_of = |a: &Affine| -> Result<i64, DiffRingError> {
        let a = at(a);
        if a.is_constant() {
            Ok(a.constant)
        } else {
            unsupported("symbolic integer argument")
        }
    };
    Ok(match h {
        HyperAtom::Binom { top, bottom } | HyperAtom::InvBinom { top, bottom } => {
            let t = RatFunc::from_poly(at(top).to_poly());
            let b = int_of(bottom)?;
            let mut v = if b < 0 { RatFunc::zero() } else { RatFunc::one() };
            for j in 0..b.max(0) {
                v = &v * &(&(&t - &RatFunc::int(j)) / &RatFunc::int(j + 1));
            }
            if matches!(h, HyperAtom::InvBinom { .. }) {
                v.inv().unwrap_or_default()
            } else {
                v
            }
        }
        HyperAtom::Pow { base, exp } => {
            let b = match base {
                PowBase::Rat(q) => RatFunc::constant(q.clone()),
                PowBase::Param(p) => RatFunc::var(p),
            };
            b.pow(int_of(exp)?).unwrap_or_default()
        }
        HyperAtom::Fact(a) => {
            let n = int_of(a)?;
            RatFunc::constant((1..=n.max(0)).fold(Rat::one(), |acc, j| acc * rat_i(j)))
        }
        HyperAtom::AltSign(a) => RatFunc::int(if int_of(a)?.rem_euclid(2) == 0 { 1 } else { -1 }),
        HyperAtom::Harmonic(a) => {
            let n = int_of(a)?;
            RatFunc::constant((1..=n.max(0)).fold(Rat::zero(), |acc, j| acc + Rat::new(BigInt::one(), BigInt::from(j))))
        }
    })
}

/// Evaluates at an integer point with parameters left symbolic.
pub fn ev_sym(tower: &Tower, x: &TowerElem, i: i64) -> Result<RatFunc, DiffRingError> {
    let var = &tower.var;
    let mut acc = RatFunc::zero();
    for (e, c) in x.terms() {
        let mut v = c.eval_var(var, &rat_i(i));
        for (g, &p) in e.iter().enumerate() {
            if p == 0 || v.is_zero() {
                continue;
            }
            let gv = gen_at(tower, g, i)?;
            v = &v * &gv.pow(p as i64).unwrap_or_default();
        }
        acc = &acc + &v;
    }
    Ok(acc)
}

fn gen_at(tower: &Tower, g: usize, i: i64) -> Result<RatFunc, DiffRingError> {
    let ext = &tower.exts[g];
    match &ext.kind {
        ExtKind::Pi { .. } | ExtKind::R => match &ext.display {
            SumExpr::Hyper(h) => atom_at(h, &tower.var, i),
            _ => unsupported("product generator without an atom"),
        },
        ExtKind::Sigma { beta, init } => {
            let mut acc = init.clone();
            if i >= 0 {
                for j in 0..i {
                    acc = &acc + &ev_sym(tower, beta, j)?;
                }
            } else {
                for j in i..0 {
                    acc = &acc - &ev_sym(tower, beta, j)?;
                }
            }
            Ok(acc)
        }
    }
}

fn inverse_atom(h: &HyperAtom) -> Result<HyperAtom, DiffRingError> {
    Ok(match h {
        HyperAtom::Binom { top, bottom } => HyperAtom::InvBinom {
            top: top.clone(),
            bottom: bottom.clone(),
        },
        HyperAtom::InvBinom { top, bottom } => HyperAtom::Binom {
            top: top.clone(),
            bottom: bottom.clone(),
        },
        HyperAtom::Pow { base, exp } => HyperAtom::Pow {
            base: base.clone(),
            exp: exp.scale(-1),
        },
        _ => return unsupported(format!("no atom for the inverse of `{}`", h.name())),
    })
}

/// Replaces each generator by the sequence it models.
pub fn to_expression(x: &TowerElem, tower: &Tower) -> Result<SumExpr, DiffRingError> {
    let mut terms = Vec::new();
    for (e, c) in x.terms() {
        let mut fs = vec![SumExpr::RatCoeff(c.clone())];
        for (g, &p) in e.iter().enumerate() {
            if p == 0 {
                continue;
            }
            let ext = &tower.exts[g];
            let (base, p) = if p < 0 {
                let SumExpr::Hyper(h) = &ext.display else {
                    return unsupported("negative power of a sum");
                };
                (SumExpr::Hyper(inverse_atom(h)?), (-p) as u32)
            } else {
                (ext.display.clone(), p as u32)
            };
            fs.push(if p == 1 { base } else { SumExpr::Pow(Box::new(base), p) });
        }
        terms.push(SumExpr::Mul(fs));
    }
    Ok(normalize(&SumExpr::Add(terms)))
}
