use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{Monomial, MultiPoly, Rat, RatFunc};
use crate::diffring::{ExtKind, Tower, TowerElem};

use super::{param_telescope_family, Fresh, KernelPart, TeleError, TeleProblem};

/// Degree cap for the coefficient ansatz inside a Σ-layer.
pub const SIGMA_DEGREE_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaSolution {
    #[serde(skip)]
    pub g: TowerElem,
    pub constants: BTreeMap<String, RatFunc>,
    pub threshold: i64,
}

/// Splits `c = c_0 + sum_i p_i c_i` for a coefficient linear in `params`.
pub(crate) fn split_linear(c: &RatFunc, params: &[String]) -> Result<Vec<RatFunc>, TeleError> {
    if params.iter().any(|p| c.den().has_var(p)) {
        return Err(TeleError::Unsupported("parameter in a denominator".into()));
    }
    let mut nums = vec![MultiPoly::zero(); params.len() + 1];
    for (m, q) in c.num().terms() {
        let hits: Vec<(usize, u32)> = m
            .pairs()
            .iter()
            .filter_map(|(v, e)| params.iter().position(|p| p == v).map(|i| (i, *e)))
            .collect();
        match hits.as_slice() {
            [] => nums[0] = &nums[0] + &MultiPoly::term(m.clone(), q.clone()),
            [(i, 1)] => {
                let rest = Monomial::from_pairs(
                    m.pairs().iter().filter(|(v, _)| v != &params[*i]).cloned().collect(),
                );
                nums[i + 1] = &nums[i + 1] + &MultiPoly::term(rest, q.clone());
            }
            _ => return Err(TeleError::Unsupported("coefficient not linear in the parameters".into())),
        }
    }
    let den = RatFunc::from_poly(c.den().clone());
    Ok(nums.into_iter().map(|n| &RatFunc::from_poly(n) / &den).collect())
}

fn kernel_ratio(tower: &Tower, exps: &[i32]) -> Result<RatFunc, TeleError> {
    let mut r = RatFunc::one();
    for (i, &x) in exps.iter().enumerate() {
        if x == 0 {
            continue;
        }
        match &tower.exts[i].kind {
            ExtKind::Pi { alpha } => r = &r * &alpha.pow(x as i64).expect("Π quotients are units"),
            ExtKind::R => {
                if x % 2 != 0 {
                    r = -r;
                }
            }
            ExtKind::Sigma { .. } => {
                return Err(TeleError::Unsupported("telescoping across more than one Σ-layer".into()))
            }
        }
    }
    Ok(r)
}

/// Solves `σ(g) - g = rhs` in the ring below the Σ-layer, one kernel per
/// monomial in the Π- and R-generators, all sharing `pending`.
fn solve_lower(
    rhs: &TowerElem,
    pending: &[String],
    tower: &Tower,
    fresh: &mut Fresh,
) -> Result<Option<(TowerElem, BTreeMap<String, RatFunc>, i64)>, TeleError> {
    let mut keys: BTreeSet<Vec<i32>> = rhs.terms().map(|(e, _)| e.clone()).collect();
    keys.insert(Vec::new());
    let mut kernels = Vec::new();
    for e in &keys {
        kernels.push(KernelPart {
            ratio: kernel_ratio(tower, e)?,
            pieces: split_linear(&rhs.coeff(e), pending)?,
        });
    }
    let mut prob = TeleProblem::new(&tower.var, pending.to_vec(), kernels);
    prob.degree_cap = SIGMA_DEGREE_CAP;
    let Some(sol) = param_telescope_family(&prob, fresh)? else {
        return Ok(None);
    };
    let mut g = TowerElem::zero();
    for (e, r) in keys.iter().zip(&sol.certificates) {
        g.add_term(e.clone(), r.clone());
    }
    Ok(Some((g, sol.constants, sol.threshold)))
}

fn subst_elem(e: &TowerElem, sym: &str, val: &RatFunc) -> Result<TowerElem, TeleError> {
    e.try_map_coeffs(|c| c.subst(sym, val).map_err(|err| TeleError::Unsupported(err.to_string())))
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Solves `σ(g) - g = f` for `g` polynomial in the topmost Σ-generator of
/// `tower`, of degree at most `deg f + 1`, together with values for the
/// unknown constants `params` (which enter `f` linearly). Coefficients are
/// determined from the top degree down; each step is a parameterized
/// telescoping problem one layer below, and constants left free at the end
/// are set to zero.
pub fn sigma_layer_telescope(
    f: &TowerElem,
    tower: &Tower,
    params: &[String],
) -> Result<Option<SigmaSolution>, TeleError> {
    let top = (0..tower.len()).rev().find(|&i| tower.is_sigma(i));
    if let Some(t) = top {
        if (0..t).any(|i| tower.is_sigma(i) && f.uses_gen(i)) {
            return Err(TeleError::Unsupported("telescoping across more than one Σ-layer".into()));
        }
    }
    let mut fresh = Fresh::new("_f");
    let (mut levels, beta) = match top {
        Some(t) => {
            let ExtKind::Sigma { beta, .. } = &tower.exts[t].kind else { unreachable!() };
            let mut cs = f.coeffs_in(t);
            cs.push(TowerElem::zero());
            (cs, Some(beta.clone()))
        }
        None => (vec![f.clone()], None),
    };
    let d = levels.len() - 1;
    let mut g: Vec<TowerElem> = vec![TowerElem::zero(); d + 1];
    let mut assigned: BTreeMap<String, RatFunc> = BTreeMap::new();
    let mut threshold = 0;
    for j in (0..=d).rev() {
        let mut rhs = levels[j].clone();
        if let Some(beta) = &beta {
            for (i, gi) in g.iter().enumerate().skip(j + 1) {
                if gi.is_zero() {
                    continue;
                }
                let term = tower.mul(
                    &tower.sigma(gi),
                    &tower.pow(beta, (i - j) as u32),
                );
                rhs = rhs.sub(&term.scale(&RatFunc::int(binomial(i, j))));
            }
        }
        let pending: Vec<String> = rhs
            .vars()
            .into_iter()
            .filter(|v| params.contains(v) || fresh.is_fresh(v))
            .collect();
        let Some((gj, consts, thr)) = solve_lower(&rhs, &pending, tower, &mut fresh)? else {
            return Ok(None);
        };
        threshold = threshold.max(thr);
        for (sym, val) in &consts {
            for gi in g.iter_mut().skip(j + 1) {
                *gi = subst_elem(gi, sym, val)?;
            }
            for lv in levels.iter_mut().take(j) {
                *lv = subst_elem(lv, sym, val)?;
            }
            for v in assigned.values_mut() {
                *v = v.subst(sym, val).map_err(|e| TeleError::Unsupported(e.to_string()))?;
            }
            if params.contains(sym) {
                assigned.insert(sym.clone(), val.clone());
            }
        }
        g[j] = gj;
    }
    // Remaining free symbols and untouched parameters are set to zero.
    let mut zero: HashMap<String, Rat> = HashMap::new();
    for e in g.iter() {
        for v in e.vars() {
            if fresh.is_fresh(&v) || params.contains(&v) {
                zero.insert(v, Rat::zero());
            }
        }
    }
    for v in assigned.values() {
        for s in v.vars() {
            if fresh.is_fresh(&s) {
                zero.insert(s, Rat::zero());
            }
        }
    }
    let mut total = TowerElem::zero();
    for (j, gj) in g.iter().enumerate() {
        let gj = gj.map_coeffs(|c| c.partial_eval(&zero));
        let mono = match top {
            Some(t) if j > 0 => tower.pow(&TowerElem::gen(t), j as u32),
            _ => TowerElem::one(),
        };
        total = total.add(&tower.mul(&gj, &mono));
    }
    let constants: BTreeMap<String, RatFunc> = params
        .iter()
        .map(|p| {
            let v = assigned.get(p).map(|v| v.partial_eval(&zero)).unwrap_or_default();
            (p.clone(), v)
        })
        .collect();
    let mut f_solved = f.clone();
    for (p, v) in &constants {
        f_solved = subst_elem(&f_solved, p, v)?;
    }
    assert_eq!(
        tower.sigma(&total).sub(&total),
        f_solved,
        "Σ-layer solution failed its identity check"
    );
    Ok(Some(SigmaSolution {
        g: total,
        constants,
        threshold,
    }))
}
