use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::algebra::{format_rat, solve_linear_system, MultiPoly, Rat, RatFunc};
use crate::expr::SumExpr;

use super::check::{CheckReport, CheckStatus, Constraint, Witness};
use super::eval::{eval, eval_sequence, Binding};
use super::OracleError;

/// Checks `Y[v+1] - Y[v] = rhs(v)` for `0 <= v < len`, with the table of `Y`,
/// the generic tables and the constants all taken from `b`.
pub fn check_constraint(c: &Constraint, b: &Binding, len: i64) -> CheckReport {
    let mut report = CheckReport {
        id: c.to_plain(),
        status: CheckStatus::Pass,
        points: 0,
        seed: 0,
        grid: vec![(c.var.clone(), len)],
        witness: None,
        error: None,
    };
    let run = |report: &mut CheckReport| -> Result<(), OracleError> {
        let table = b.tables.get(&c.symbol).ok_or_else(|| OracleError::Unbound(c.symbol.clone()))?;
        let entry = |i: i64| {
            table.get(i as usize).cloned().ok_or_else(|| OracleError::TableTooShort {
                name: c.symbol.clone(),
                index: i,
            })
        };
        for v in 0..len {
            let step = entry(v + 1)? - entry(v)?;
            let mut bv = b.clone();
            bv.vars.insert(c.var.clone(), Rat::from_integer(v.into()));
            let rhs = eval(&c.rhs, &bv)?;
            report.points += 1;
            if step != rhs {
                report.status = CheckStatus::Fail;
                report.witness = Some(Witness {
                    point: [(c.var.clone(), v.to_string())].into_iter().collect(),
                    lhs: format_rat(&step),
                    rhs: format_rat(&rhs),
                });
                return Ok(());
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut report) {
        report.status = CheckStatus::Error;
        report.error = Some(e.to_string());
    }
    report
}

/// Values substituted for symbolic parameters. Integers are avoided so that
/// terms like `binom(n,k)` do not terminate and turn polynomial.
const PARAM_SAMPLES: [(i64, i64); 2] = [(7, 2), (-5, 3)];

const FIRST: i64 = 1;

/// Searches for `g(k) = R(k) f(k)` with `g(k+1) - g(k) = f(k)`, where `R` is
/// a quotient of polynomials of degree at most `cap`. The search is exact:
/// any such `g` satisfies `Q(k) (C + F(k)) = P(k) f(k)` with `F` the partial
/// sums of `f` and `C` a constant, which is a linear system in the
/// coefficients of `P`, `Q` and `C*Q`. Every nullspace direction with a
/// nonzero `Q` is turned into a candidate and tested exactly.
///
/// The report passes when no certificate exists (no refutation of a
/// nonexistence claim) and fails with the certificate as witness otherwise.
/// Symbolic parameters are fixed to non-integral samples; a certificate over
/// `Q(n)(k)` would survive every such specialization.
pub fn falsify_nonexistence(summand: &SumExpr, var: &str, cap: usize) -> CheckReport {
    let params: Vec<String> = summand.free_vars().into_iter().filter(|v| v != var).collect();
    let mut report = CheckReport {
        id: format!("nonexistence of a rational certificate for {}", crate::expr::to_plain(summand)),
        status: CheckStatus::Pass,
        points: 0,
        seed: 0,
        grid: vec![(var.to_string(), FIRST + rows_needed(cap) + VERIFY_EXTRA)],
        witness: None,
        error: None,
    };
    let samples: Vec<Rat> = PARAM_SAMPLES.iter().map(|(n, d)| Rat::new((*n).into(), (*d).into())).collect();
    let combos = if params.is_empty() { 1 } else { samples.len() };
    for s in 0..combos {
        let mut b = Binding::new();
        for (i, p) in params.iter().enumerate() {
            b.vars.insert(p.clone(), samples[(s + i) % samples.len()].clone());
        }
        match sweep(summand, var, cap, &b) {
            Ok((points, None)) => report.points += points,
            Ok((points, Some(cert))) => {
                report.points += points;
                report.status = CheckStatus::Fail;
                let mut point: BTreeMap<String, String> =
                    b.vars.iter().map(|(k, v)| (k.clone(), format_rat(v))).collect();
                point.insert("certificate".into(), cert.to_plain());
                report.witness = Some(Witness {
                    point,
                    lhs: format!("g({var}) = ({}) * f({var})", cert.to_plain()),
                    rhs: "g(k+1) - g(k) = f(k)".into(),
                });
                return report;
            }
            Err(e) => {
                report.status = CheckStatus::Error;
                report.error = Some(e.to_string());
                return report;
            }
        }
    }
    report
}

const VERIFY_EXTRA: i64 = 30;

fn rows_needed(cap: usize) -> i64 {
    3 * (cap as i64 + 1) + 12
}

fn powers(k: i64, cap: usize) -> Vec<Rat> {
    let k = Rat::from_integer(k.into());
    let mut out = vec![Rat::one()];
    for _ in 0..cap {
        let next = out.last().expect("nonempty") * &k;
        out.push(next);
    }
    out
}

fn poly_at(coeffs: &[Rat], k: i64) -> Rat {
    coeffs.iter().zip(powers(k, coeffs.len().saturating_sub(1))).map(|(c, p)| c * p).sum()
}

fn sweep(summand: &SumExpr, var: &str, cap: usize, b: &Binding) -> Result<(usize, Option<RatFunc>), OracleError> {
    let rows = rows_needed(cap);
    let last = FIRST + rows + VERIFY_EXTRA;
    let f: Vec<Rat> = (FIRST..=last + 1)
        .map(|k| eval_sequence(summand, b, var, k))
        .collect::<Result<_, _>>()?;
    // partial[i] = f(FIRST) + ... + f(FIRST + i - 1)
    let mut partial = vec![Rat::zero()];
    for x in &f {
        let next = partial.last().expect("nonempty") + x;
        partial.push(next);
    }
    let w = cap + 1;
    // Unknowns: q (w), cq = C*q (w), p (w).
    let mut a = Vec::new();
    for i in 0..rows as usize {
        let k = FIRST + i as i64;
        let pw = powers(k, cap);
        let mut row = Vec::with_capacity(3 * w);
        row.extend(pw.iter().map(|x| RatFunc::constant(x * &partial[i])));
        row.extend(pw.iter().map(|x| RatFunc::constant(x.clone())));
        row.extend(pw.iter().map(|x| RatFunc::constant(-(x * &f[i]))));
        a.push(row);
    }
    let zeros = vec![RatFunc::zero(); a.len()];
    let space = solve_linear_system(&a, &zeros).expect("homogeneous systems are consistent");
    let mut candidates: Vec<Vec<Rat>> = Vec::new();
    let as_rats = |v: &[RatFunc]| -> Vec<Rat> { v.iter().map(|x| x.as_constant().unwrap_or_default()).collect() };
    for v in &space.nullspace {
        candidates.push(as_rats(&v[..w]));
    }
    if space.nullspace.len() > 1 {
        let mut sum = vec![Rat::zero(); w];
        for v in &space.nullspace {
            for (s, x) in sum.iter_mut().zip(as_rats(&v[..w])) {
                *s += x;
            }
        }
        candidates.push(sum);
    }
    for q in candidates.into_iter().filter(|q| q.iter().any(|x| !x.is_zero())) {
        if let Some(cert) = certificate_for(&q, &f, &partial, cap, rows, var)? {
            // Exact check of g(k+1) - g(k) = f(k) beyond the fitted rows.
            let point: HashMap<String, Rat> = HashMap::new();
            let g = |k: i64| -> Option<Rat> {
                let mut pt = point.clone();
                pt.insert(var.to_string(), Rat::from_integer(k.into()));
                cert.eval(&pt).ok().map(|r| r * &f[(k - FIRST) as usize])
            };
            let holds = (FIRST..last).all(|k| match (g(k + 1), g(k)) {
                (Some(x), Some(y)) => x - y == f[(k - FIRST) as usize],
                _ => true,
            });
            if holds {
                return Ok((rows as usize, Some(cert)));
            }
        }
    }
    Ok((rows as usize, None))
}

/// With the denominator `Q` fixed, solves `C Q(k) - P(k) f(k) = -Q(k) F(k)`
/// for `C` and `P`, and returns `R = P/Q` in `var`.
fn certificate_for(
    q: &[Rat],
    f: &[Rat],
    partial: &[Rat],
    cap: usize,
    rows: i64,
    var: &str,
) -> Result<Option<RatFunc>, OracleError> {
    let mut a = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..rows as usize {
        let k = FIRST + i as i64;
        let qk = poly_at(q, k);
        let mut row = vec![RatFunc::constant(qk.clone())];
        row.extend(powers(k, cap).iter().map(|x| RatFunc::constant(-(x * &f[i]))));
        a.push(row);
        rhs.push(RatFunc::constant(-(qk * &partial[i])));
    }
    let Some(space) = solve_linear_system(&a, &rhs) else {
        return Ok(None);
    };
    let p: Vec<Rat> = space.particular[1..]
        .iter()
        .map(|x| x.as_constant().unwrap_or_default())
        .collect();
    let to_poly = |c: &[Rat]| {
        let k = MultiPoly::var(var);
        c.iter().enumerate().fold(MultiPoly::zero(), |acc, (e, x)| {
            &acc + &k.pow(e as u32).scale(x)
        })
    };
    Ok(RatFunc::new(to_poly(&p), to_poly(q)).ok())
}
