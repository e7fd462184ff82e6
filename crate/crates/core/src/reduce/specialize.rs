use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::algebra::{integer_roots, rat, RatFunc};
use crate::diffring::{from_expression, to_expression};
use crate::expr::{self, normalize, parse_normal, substitute, substitute_param, SumExpr};
use crate::oracle::{check_identity, default_samples, CheckOptions, CheckReport, CmpOp, Identity, Operand, Proviso, DEFAULT_SEED};
use crate::telescope::sigma_layer_telescope;

use super::simplify::post_simplify_with_threshold;
use super::{ReduceError, ReductionResult};

/// Index variable of atoms passed to [`specialize`].
pub const ATOM_VAR: &str = "k";

/// Variables sampled on the integer grid; any other free symbol is a
/// parameter sampled from a few rationals.
const GRID_VARS: [&str; 2] = ["n", "m"];

/// Built-in atoms, all in the index variable `k`.
pub fn named_atom(name: &str) -> Option<SumExpr> {
    let src = match name {
        "binom" => "binom(n,k)",
        "binom2" => "binom(n,k)^2",
        "altbinom" => "(-1)^k*binom(n,k)",
        "harmonic" => "harmonic(k)",
        "fact" => "fact(k)",
        "pow2" => "pow(2,k)",
        "powx" => "pow(x,k)",
        "one" => "1",
        _ => return None,
    };
    Some(parse_normal(src).expect("built-in atoms parse"))
}

#[derive(Clone, Debug)]
pub struct SpecializeOptions {
    pub grid: Option<Vec<i64>>,
    pub seed: u64,
}

impl Default for SpecializeOptions {
    fn default() -> Self {
        SpecializeOptions {
            grid: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// A concrete identity obtained from a reduction.
#[derive(Clone, Debug, Serialize)]
pub struct Specialized {
    pub identity: Identity,
    /// Values of the reduction's constants.
    pub constants: BTreeMap<String, RatFunc>,
    /// Closed forms of the fresh sequences, in the identity's variable.
    #[serde(serialize_with = "plain_map")]
    pub solutions: BTreeMap<String, SumExpr>,
    /// Least value of the identity's variable from which it holds.
    pub threshold: i64,
    pub report: CheckReport,
}

fn plain_map<S: serde::Serializer>(m: &BTreeMap<String, SumExpr>, s: S) -> Result<S::Ok, S::Error> {
    m.iter()
        .map(|(k, v)| (k.clone(), expr::to_plain(v)))
        .collect::<BTreeMap<_, _>>()
        .serialize(s)
}

fn expr_err(e: impl std::fmt::Display) -> ReduceError {
    ReduceError::Unsupported(e.to_string())
}

/// Replaces the generic sequence of `result` by `atom` (an expression in
/// `k`), solves every constraint with the Σ-layer telescoping solver,
/// substitutes the constants and sequences found, and checks the resulting
/// identity with the oracle.
pub fn specialize(
    result: &ReductionResult,
    atom: &SumExpr,
    opts: &SpecializeOptions,
) -> Result<Specialized, ReduceError> {
    let a = &result.var;
    let x = &result.generic;
    let mut constants: BTreeMap<String, RatFunc> = BTreeMap::new();
    let mut solutions: BTreeMap<String, SumExpr> = BTreeMap::new();
    let mut threshold = 0i64;

    let concrete = |e: &SumExpr, constants: &BTreeMap<String, RatFunc>, solutions: &BTreeMap<String, SumExpr>| {
        let mut out = substitute(e, x, ATOM_VAR, atom).map_err(expr_err)?;
        for (y, sol) in solutions {
            out = substitute(&out, y, a, sol).map_err(expr_err)?;
        }
        for (c, v) in constants {
            out = substitute_param(&out, c, v).map_err(expr_err)?;
        }
        Ok::<_, ReduceError>(out)
    };

    for c in &result.constraints {
        let rhs = concrete(&c.rhs, &constants, &solutions)?;
        let params: Vec<String> = result
            .params
            .iter()
            .filter(|p| !constants.contains_key(*p) && rhs.free_vars().contains(*p))
            .cloned()
            .collect();
        let emb = from_expression(&rhs, a).map_err(expr_err)?;
        let sol = sigma_layer_telescope(&emb.elem, &emb.tower, &params).map_err(expr_err)?;
        let Some(sol) = sol else {
            return Err(ReduceError::ConstraintUnsolvable {
                constraint: c.to_plain(),
                rhs: expr::to_plain(&rhs),
            });
        };
        threshold = threshold.max(sol.threshold);
        constants.extend(sol.constants);
        let y_bar = to_expression(&sol.g, &emb.tower).map_err(expr_err)?;
        solutions.insert(c.symbol.clone(), y_bar);
    }
    // Constants that no constraint mentions are free; zero is as good as any.
    for p in &result.params {
        constants.entry(p.clone()).or_default();
    }

    let lhs = substitute(&result.input, x, ATOM_VAR, atom).map_err(expr_err)?;
    let rhs = concrete(&result.closed_form, &constants, &solutions)?;
    let (rhs, thr) = post_simplify_with_threshold(&rhs);
    threshold = threshold.max(thr);
    let rhs = normalize(&rhs);

    let mut id = Identity::new(&format!("{}@{}", result.generic, expr::to_plain(atom)), lhs, rhs);
    let free: BTreeSet<String> = id.lhs.free_vars().union(&id.rhs.free_vars()).cloned().collect();
    id.grid = std::iter::once((a.clone(), 12))
        .chain(GRID_VARS.iter().filter(|v| free.contains(**v) && *v != a).map(|v| (v.to_string(), 12)))
        .collect();
    for p in free.iter().filter(|p| *p != a && !GRID_VARS.contains(&p.as_str())) {
        id.params.insert(p.clone(), default_samples());
    }
    if threshold > 0 {
        id.provisos.push(Proviso {
            lhs: a.clone(),
            op: CmpOp::Ge,
            rhs: Operand::Num(rat(threshold, 1)),
        });
    }
    id.provisos.extend(pole_provisos(&id));

    let check_opts = CheckOptions {
        grid: opts.grid.clone(),
        seed: opts.seed,
        ..CheckOptions::default()
    };
    let mut report = check_identity(&id, &check_opts);
    if !report.passed() && id.grid.iter().any(|(v, _)| v == "n") {
        // Many binomial identities only hold inside the triangle a <= n.
        let mut within = id.clone();
        within.provisos.push(Proviso {
            lhs: a.clone(),
            op: CmpOp::Le,
            rhs: Operand::Var("n".into()),
        });
        let retry = check_identity(&within, &check_opts);
        if retry.passed() {
            id = within;
            report = retry;
        }
    }
    if !report.passed() {
        return Err(ReduceError::CheckFailed(report.summary()));
    }
    Ok(Specialized {
        identity: id,
        constants,
        solutions,
        threshold,
        report,
    })
}

/// `v != r` for every grid variable `v` and integer pole `r >= 0` of a
/// coefficient denominator depending on `v` alone; a pole at 0 is written
/// `v >= 1`.
fn pole_provisos(id: &Identity) -> Vec<Proviso> {
    let mut dens = Vec::new();
    for side in [&id.lhs, &id.rhs] {
        side.visit(&mut |e| {
            if let SumExpr::RatCoeff(r) = e {
                dens.push(r.den().clone());
            }
        });
    }
    let mut out = Vec::new();
    for (v, _) in &id.grid {
        let mut roots: BTreeSet<i64> = BTreeSet::new();
        for d in &dens {
            if d.vars().len() == 1 && d.has_var(v) {
                roots.extend(integer_roots(d, v).into_iter().filter(|r| *r >= 0));
            }
        }
        for r in roots {
            out.push(if r == 0 {
                Proviso {
                    lhs: v.clone(),
                    op: CmpOp::Ge,
                    rhs: Operand::Num(rat(1, 1)),
                }
            } else {
                Proviso {
                    lhs: v.clone(),
                    op: CmpOp::Ne,
                    rhs: Operand::Num(rat(r, 1)),
                }
            });
        }
    }
    out
}
