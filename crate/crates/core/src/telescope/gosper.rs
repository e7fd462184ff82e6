use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::algebra::{gcd, integer_roots, resultant, solve_linear_system, MultiPoly, Rat, RatFunc};

use super::{Fresh, TeleError, TeleProblem, TeleSolution};

/// Shift variable used inside dispersion resultants.
const SHIFT_VAR: &str = "_h";

/// Gosper-Petkovšek form `r = a(k)/b(k) * c(k+1)/c(k)` with
/// `gcd(a(k), b(k+h)) = 1` for every integer `h >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GpForm {
    pub a: MultiPoly,
    pub b: MultiPoly,
    pub c: MultiPoly,
}

pub fn gp_form(r: &RatFunc, var: &str) -> GpForm {
    let mut a = r.num().clone();
    let mut b = r.den().clone();
    let mut c = MultiPoly::one();
    if !a.has_var(var) || !b.has_var(var) {
        return GpForm { a, b, c };
    }
    let bh = b.subst(var, &(&MultiPoly::var(var) + &MultiPoly::var(SHIFT_VAR)));
    let res = resultant(&a, &bh, var);
    let roots: Vec<i64> = integer_roots(&res, SHIFT_VAR).into_iter().filter(|h| *h >= 0).collect();
    for h in roots {
        let g = gcd(&a, &b.shift(var, h));
        if !g.has_var(var) {
            continue;
        }
        a = a.div_exact(&g).expect("gcd divides a");
        b = b.div_exact(&g.shift(var, -h)).expect("shifted gcd divides b");
        for i in 1..=h {
            c = &c * &g.shift(var, -i);
        }
    }
    GpForm { a, b, c }
}

fn lcm(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let g = gcd(a, b);
    (a * b).div_exact(&g).expect("gcd divides product")
}

fn poly_ratfunc_coeffs(p: &MultiPoly, var: &str) -> Vec<RatFunc> {
    p.coeffs_in(var).into_iter().map(RatFunc::from_poly).collect()
}

/// Per-kernel data for the polynomial equation
/// `a(k) x(k+1) - b(k-1) x(k) = c(k) (P_0 + sum_i c_i P_i)(k)`.
struct KernelSetup {
    gp: GpForm,
    b_prev: MultiPoly,
    /// Common denominator of the pieces.
    den: MultiPoly,
    /// `c(k) * P_i(k)`, one per piece.
    rhs: Vec<MultiPoly>,
    degree: i64,
}

fn setup_kernel(ratio: &RatFunc, pieces: &[RatFunc], var: &str) -> Result<KernelSetup, TeleError> {
    if ratio.is_zero() {
        return Err(TeleError::DegenerateKernel);
    }
    let den = pieces
        .iter()
        .filter(|p| !p.is_zero())
        .fold(MultiPoly::one(), |acc, p| lcm(&acc, p.den()));
    let den = den.monic();
    // Summand P(k) * t(k)/B(k): its kernel ratio picks up B(k)/B(k+1).
    let shifted = RatFunc::new(den.clone(), den.shift(var, 1)).expect("shift of nonzero is nonzero");
    let r = ratio * &shifted;
    let gp = gp_form(&r, var);
    let rhs: Vec<MultiPoly> = pieces
        .iter()
        .map(|p| {
            if p.is_zero() {
                return MultiPoly::zero();
            }
            let num = (p.num() * &den).div_exact(p.den()).expect("common denominator");
            &gp.c * &num
        })
        .collect();
    let b_prev = gp.b.shift(var, -1);
    let degree = degree_bound(&gp.a, &b_prev, &rhs, var);
    Ok(KernelSetup {
        gp,
        b_prev,
        den,
        rhs,
        degree,
    })
}

/// Upper bound for `deg x` in `a(k)x(k+1) - b(k-1)x(k) = f(k)`; -1 means x = 0.
fn degree_bound(a: &MultiPoly, bp: &MultiPoly, rhs: &[MultiPoly], var: &str) -> i64 {
    let df: Option<i64> = rhs.iter().filter(|p| !p.is_zero()).map(|p| p.degree(var) as i64).max();
    let da = a.degree(var) as i64;
    let db = bp.degree(var) as i64;
    let la = a.leading_coeff_in(var);
    let lb = bp.leading_coeff_in(var);
    if da != db || la != lb {
        return df.map(|d| d - da.max(db)).unwrap_or(-1);
    }
    let d = da;
    let mut bound = df.map(|f| f - d + 1).unwrap_or(-1);
    let ca = a.coeffs_in(var);
    let cb = bp.coeffs_in(var);
    let sub = |cs: &Vec<MultiPoly>| {
        if d >= 1 {
            cs.get(d as usize - 1).cloned().unwrap_or_default()
        } else {
            MultiPoly::zero()
        }
    };
    let diff = &sub(&cb) - &sub(&ca);
    if let Ok(delta) = RatFunc::new(diff, la) {
        if let Some(q) = delta.as_constant() {
            if q.is_integer() && !q.is_negative() {
                let q: i64 = q.to_integer().try_into().unwrap_or(i64::MAX);
                bound = bound.max(q);
            }
        }
    }
    bound
}

fn threshold_of(polys: &[&MultiPoly], var: &str) -> i64 {
    polys
        .iter()
        .flat_map(|p| integer_roots(p, var))
        .filter(|r| *r >= 0)
        .max()
        .map(|r| r + 1)
        .unwrap_or(0)
}

/// How to treat directions of the solution space left free by the system.
pub(crate) enum FreeMode<'a> {
    Zero,
    Symbolic(&'a mut Fresh),
}

/// Solves the problem for certificates and constants; free directions are
/// either set to zero or named by fresh symbols.
pub(crate) fn solve_problem(p: &TeleProblem, mode: FreeMode<'_>) -> Result<Option<TeleSolution>, TeleError> {
    let var = p.var.as_str();
    let np = p.params.len();
    for k in &p.kernels {
        if k.pieces.len() != np + 1 {
            return Err(TeleError::Unsupported(format!(
                "kernel has {} pieces for {} parameters",
                k.pieces.len(),
                np
            )));
        }
    }
    let setups: Vec<KernelSetup> = p
        .kernels
        .iter()
        .map(|k| setup_kernel(&k.ratio, &k.pieces, var))
        .collect::<Result<_, _>>()?;
    if let Some(s) = setups.iter().find(|s| s.degree > p.degree_cap as i64) {
        return Err(TeleError::DegreeCap {
            bound: s.degree as usize,
            cap: p.degree_cap,
        });
    }
    // Columns: x-coefficients per kernel (low degree first), then parameters.
    let mut offsets = Vec::new();
    let mut cols = 0usize;
    for s in &setups {
        offsets.push(cols);
        cols += (s.degree + 1).max(0) as usize;
    }
    let param_col = cols;
    cols += np;
    let mut matrix: Vec<Vec<RatFunc>> = Vec::new();
    let mut rhs: Vec<RatFunc> = Vec::new();
    for (ki, s) in setups.iter().enumerate() {
        let x_var = MultiPoly::var(var);
        let x_next = MultiPoly::var_plus(var, 1);
        let mut col_polys: Vec<(usize, MultiPoly)> = Vec::new();
        for i in 0..=s.degree {
            let e = i as u32;
            let lhs = &(&s.gp.a * &x_next.pow(e)) - &(&s.b_prev * &x_var.pow(e));
            col_polys.push((offsets[ki] + i as usize, lhs));
        }
        for j in 0..np {
            col_polys.push((param_col + j, -&s.rhs[j + 1]));
        }
        let rows = col_polys
            .iter()
            .map(|(_, q)| q.degree(var))
            .chain(std::iter::once(s.rhs[0].degree(var)))
            .max()
            .unwrap_or(0) as usize
            + 1;
        let mut block = vec![vec![RatFunc::zero(); cols]; rows];
        for (c, q) in &col_polys {
            for (e, coef) in poly_ratfunc_coeffs(q, var).into_iter().enumerate() {
                block[e][*c] = coef;
            }
        }
        let mut b = vec![RatFunc::zero(); rows];
        for (e, coef) in poly_ratfunc_coeffs(&s.rhs[0], var).into_iter().enumerate() {
            b[e] = coef;
        }
        for (row, val) in block.into_iter().zip(b) {
            if row.iter().all(|x| x.is_zero()) && val.is_zero() {
                continue;
            }
            matrix.push(row);
            rhs.push(val);
        }
    }
    let values: Vec<RatFunc> = if cols == 0 {
        if rhs.iter().any(|x| !x.is_zero()) {
            return Ok(None);
        }
        Vec::new()
    } else if matrix.is_empty() {
        free_assign(vec![RatFunc::zero(); cols], identity_null(cols), mode)
    } else {
        match solve_linear_system(&matrix, &rhs) {
            None => return Ok(None),
            Some(space) => free_assign(space.particular, space.nullspace, mode),
        }
    };
    let mut certificates = Vec::new();
    for (ki, s) in setups.iter().enumerate() {
        let mut x = RatFunc::zero();
        for i in 0..(s.degree + 1).max(0) as usize {
            let v = &values[offsets[ki] + i];
            if !v.is_zero() {
                x = &x + &(v * &RatFunc::from_poly(MultiPoly::var(var).pow(i as u32)));
            }
        }
        let r = &(&x * &RatFunc::from_poly(s.b_prev.clone()))
            / &RatFunc::from_poly(&s.gp.c * &s.den);
        certificates.push(r);
    }
    let constants: BTreeMap<String, RatFunc> = p
        .params
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), values[param_col + j].clone()))
        .collect();
    let mut thr_polys: Vec<&MultiPoly> = Vec::new();
    for k in &p.kernels {
        thr_polys.push(k.ratio.num());
        thr_polys.push(k.ratio.den());
    }
    for r in &certificates {
        thr_polys.push(r.den());
    }
    let threshold = threshold_of(&thr_polys, var);
    let sol = TeleSolution {
        constants,
        certificates,
        threshold,
    };
    assert!(
        certificate_holds(p, &sol),
        "telescoping certificate failed its identity check"
    );
    Ok(Some(sol))
}

fn identity_null(cols: usize) -> Vec<Vec<RatFunc>> {
    (0..cols)
        .map(|i| {
            let mut v = vec![RatFunc::zero(); cols];
            v[i] = RatFunc::one();
            v
        })
        .collect()
}

fn free_assign(particular: Vec<RatFunc>, null: Vec<Vec<RatFunc>>, mode: FreeMode<'_>) -> Vec<RatFunc> {
    match mode {
        FreeMode::Zero => particular,
        FreeMode::Symbolic(fresh) => {
            let mut v = particular;
            for dir in null {
                let sym = RatFunc::var(&fresh.next());
                for (x, d) in v.iter_mut().zip(dir) {
                    if !d.is_zero() {
                        *x = &*x + &(&sym * &d);
                    }
                }
            }
            v
        }
    }
}

/// `R(k+1) r(k) - R(k) = P_0 + sum_i c_i P_i` for every kernel.
pub fn certificate_holds(p: &TeleProblem, s: &TeleSolution) -> bool {
    let var = p.var.as_str();
    p.kernels.iter().zip(&s.certificates).all(|(k, r)| {
        let lhs = &(&r.shift(var, 1) * &k.ratio) - r;
        let mut rhs = k.pieces[0].clone();
        for (j, name) in p.params.iter().enumerate() {
            let c = s.constants.get(name).cloned().unwrap_or_default();
            rhs = &rhs + &(&c * &k.pieces[j + 1]);
        }
        lhs == rhs
    })
}

/// Normalizes `p` to a primitive integer polynomial whose value at `var = 0`
/// (or, failing that, whose leading term) has positive leading coefficient.
/// Returns the normalized polynomial and the factor applied.
pub(crate) fn normalize_premultiplier(p: &RatFunc, var: &str) -> (MultiPoly, RatFunc) {
    let poly = p.num().clone();
    let content = poly.rational_content();
    let mut scale = Rat::one() / content;
    let prim = poly.scale(&scale);
    let at_zero = prim.eval_var(var, &Rat::zero());
    let sign_src = if at_zero.is_zero() { &prim } else { &at_zero };
    if sign_src.leading_coeff().is_negative() {
        scale = -scale;
    }
    let out = poly.scale(&scale);
    // p * factor = out, with factor = scale * den.
    let factor = RatFunc::from_poly(p.den().clone()).scale(&scale);
    debug_assert_eq!(&(p * &factor), &RatFunc::from_poly(out.clone()));
    (out, factor)
}
