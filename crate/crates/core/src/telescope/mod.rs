//! Telescoping over `Q(params)(k)`: Gosper's algorithm, the variant with an
//! unknown polynomial premultiplier, parameterized telescoping with several
//! hypergeometric kernels sharing unknown constants, and the solver for one
//! Σ-layer on top of those.

mod gosper;
mod sigma;

pub use gosper::{certificate_holds, gp_form, GpForm};
pub use sigma::{sigma_layer_telescope, SigmaSolution};

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{MultiPoly, Rat, RatFunc};
use crate::expr::SumExpr;

use gosper::{normalize_premultiplier, solve_problem, FreeMode};

/// Largest polynomial degree the solver will set up an ansatz for.
pub const DEFAULT_DEGREE_CAP: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TeleError {
    #[error("kernel ratio is zero")]
    DegenerateKernel,
    #[error("degree bound {bound} exceeds the cap {cap}")]
    DegreeCap { bound: usize, cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// One hypergeometric kernel `t` with `t(k+1)/t(k) = ratio`, and the
/// coefficients of its summand: `pieces[0]` is fixed, `pieces[i]` multiplies
/// the unknown constant `params[i-1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelPart {
    pub ratio: RatFunc,
    pub pieces: Vec<RatFunc>,
}

/// Find `g = sum_j R_j t_j` and constants `c_i` with
/// `g(k+1) - g(k) = sum_j (pieces_j[0] + sum_i c_i pieces_j[i]) t_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleProblem {
    pub var: String,
    pub params: Vec<String>,
    pub kernels: Vec<KernelPart>,
    pub degree_cap: usize,
}

impl TeleProblem {
    pub fn new(var: &str, params: Vec<String>, kernels: Vec<KernelPart>) -> Self {
        TeleProblem {
            var: var.to_string(),
            params,
            kernels,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    /// A single kernel with summand `(pieces[0] + sum c_i pieces[i]) * t`.
    pub fn single(var: &str, ratio: RatFunc, pieces: Vec<RatFunc>, params: Vec<String>) -> Self {
        TeleProblem::new(var, params, vec![KernelPart { ratio, pieces }])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeleSolution {
    /// Values of the unknown constants.
    pub constants: BTreeMap<String, RatFunc>,
    /// Certificates `R_j`, one per kernel, with `g = sum_j R_j t_j`.
    pub certificates: Vec<RatFunc>,
    /// The telescoping relation holds for `k >= threshold`.
    pub threshold: i64,
}

impl TeleSolution {
    pub fn certificate(&self) -> &RatFunc {
        &self.certificates[0]
    }
}

/// Source of fresh symbol names for free directions of solution spaces.
#[derive(Debug, Default)]
pub struct Fresh {
    prefix: String,
    next: usize,
}

impl Fresh {
    pub fn new(prefix: &str) -> Self {
        Fresh {
            prefix: prefix.to_string(),
            next: 0,
        }
    }

    pub fn next(&mut self) -> String {
        let s = format!("{}{}", self.prefix, self.next);
        self.next += 1;
        s
    }

    pub fn is_fresh(&self, name: &str) -> bool {
        name.strip_prefix(&self.prefix)
            .map(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
            .unwrap_or(false)
    }
}

/// Gosper's algorithm: a rational `R` with `R(k+1) r(k) - R(k) = 1`, so that
/// `g = R t` telescopes `t`. `None` proves no such `R` exists.
pub fn gosper(r: &RatFunc, var: &str) -> Result<Option<TeleSolution>, TeleError> {
    let p = TeleProblem::single(var, r.clone(), vec![RatFunc::one()], Vec::new());
    solve_problem(&p, FreeMode::Zero)
}

/// Solves a parameterized telescoping problem. Directions of the solution
/// space left free are set to zero, which fixes the additive constant of `g`.
pub fn param_telescope(p: &TeleProblem) -> Result<Option<TeleSolution>, TeleError> {
    solve_problem(p, FreeMode::Zero)
}

/// Like [`param_telescope`], but free directions are named by fresh symbols
/// from `fresh`, so constants and certificates describe the whole solution
/// family linearly in those symbols.
pub fn param_telescope_family(p: &TeleProblem, fresh: &mut Fresh) -> Result<Option<TeleSolution>, TeleError> {
    solve_problem(p, FreeMode::Symbolic(fresh))
}

/// Finds a nonzero polynomial `p` of lowest degree `<= max_degree` and `R`
/// with `R(k+1) r(k) - R(k) = p(k)`. `p` is returned as a primitive integer
/// polynomial with positive leading coefficient at `k = 0`.
pub fn extended_gosper(
    r: &RatFunc,
    var: &str,
    max_degree: usize,
) -> Result<Option<(MultiPoly, TeleSolution)>, TeleError> {
    let mut fresh = Fresh::new("_f");
    for d in 0..=max_degree {
        let params: Vec<String> = (0..=d).map(|i| format!("_p{i}")).collect();
        let mut pieces = vec![RatFunc::zero()];
        pieces.extend((0..=d).map(|i| RatFunc::from_poly(MultiPoly::var(var).pow(i as u32))));
        let prob = TeleProblem::single(var, r.clone(), pieces, params.clone());
        let Some(family) = param_telescope_family(&prob, &mut fresh)? else {
            continue;
        };
        let p_family = params.iter().enumerate().fold(RatFunc::zero(), |acc, (i, name)| {
            &acc + &(&family.constants[name] * &RatFunc::from_poly(MultiPoly::var(var).pow(i as u32)))
        });
        let free: Vec<String> = p_family
            .vars()
            .into_iter()
            .chain(family.certificates[0].vars())
            .filter(|v| fresh.is_fresh(v))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        for chosen in &free {
            let point: HashMap<String, Rat> = free
                .iter()
                .map(|f| (f.clone(), if f == chosen { Rat::from_integer(1.into()) } else { Rat::zero() }))
                .collect();
            let p = p_family.partial_eval(&point);
            if p.is_zero() {
                continue;
            }
            let (poly, factor) = normalize_premultiplier(&p, var);
            let cert = &family.certificates[0].partial_eval(&point) * &factor;
            let mut constants = BTreeMap::new();
            for (i, c) in poly.coeffs_in(var).into_iter().enumerate() {
                constants.insert(format!("_p{i}"), RatFunc::from_poly(c));
            }
            let sol = TeleSolution {
                constants,
                certificates: vec![cert],
                threshold: family.threshold,
            };
            return Ok(Some((poly, sol)));
        }
    }
    Ok(None)
}

/// Result of [`telescope_pieces`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecesSolution {
    /// Constant multiplying each piece after the first.
    pub constants: BTreeMap<String, RatFunc>,
    /// `g` with `g(k+1) - g(k) = p_0(k) + sum_i c_i p_i(k)`.
    #[serde(serialize_with = "crate::expr::serde_plain::serialize")]
    pub telescoper: SumExpr,
    /// When `g` is a rational multiple of a single hypergeometric term, that
    /// multiple.
    pub certificate: Option<RatFunc>,
    pub threshold: i64,
}

fn is_constant_name(v: &str) -> bool {
    v.strip_prefix('c').is_some_and(|r| r.chars().all(|ch| ch.is_ascii_digit()))
}

/// Names of the unknown constants multiplying the pieces after the first:
/// `c`, then `c1`, `c2`, ..., skipping names already free in the pieces.
pub fn piece_constants(pieces: &[SumExpr], var: &str) -> Vec<String> {
    let taken: std::collections::BTreeSet<String> =
        pieces.iter().flat_map(|p| p.free_vars()).chain([var.to_string()]).collect();
    std::iter::once("c".to_string())
        .chain((1..).map(|i| format!("c{i}")))
        .filter(|n| !taken.contains(n))
        .take(pieces.len().saturating_sub(1))
        .collect()
}

/// Parameterized telescoping on expression pieces: finds constants `c_i` and
/// `g` with `g(k+1) - g(k) = p_0(k) + sum_{i>=1} c_i p_i(k)`. The pieces are
/// embedded into one difference ring, so they may mix hypergeometric terms
/// with one layer of indefinite sums. Symbols `c`, `c1`, ... occurring in
/// the pieces are unknown constants as well.
pub fn telescope_pieces(pieces: &[SumExpr], var: &str) -> Result<Option<PiecesSolution>, TeleError> {
    if pieces.is_empty() {
        return Err(TeleError::Unsupported("no pieces given".into()));
    }
    let names = piece_constants(pieces, var);
    let mut terms = vec![pieces[0].clone()];
    for (p, c) in pieces[1..].iter().zip(&names) {
        terms.push(SumExpr::mul(vec![SumExpr::var(c), p.clone()]));
    }
    let f = crate::expr::normalize(&SumExpr::add(terms));
    let mut unknowns: Vec<String> = f.free_vars().into_iter().filter(|v| is_constant_name(v)).collect();
    unknowns.retain(|v| v != var);
    let unsupported = |e: crate::diffring::DiffRingError| TeleError::Unsupported(e.to_string());
    let emb = crate::diffring::from_expression(&f, var).map_err(unsupported)?;
    let Some(sol) = sigma_layer_telescope(&emb.elem, &emb.tower, &unknowns)? else {
        return Ok(None);
    };
    let telescoper = crate::diffring::to_expression(&sol.g, &emb.tower).map_err(unsupported)?;
    Ok(Some(PiecesSolution {
        certificate: single_term_certificate(&telescoper),
        constants: sol.constants,
        telescoper,
        threshold: sol.threshold,
    }))
}

fn single_term_certificate(g: &SumExpr) -> Option<RatFunc> {
    let lin = crate::expr::lin_of(g);
    let [(mono, c)] = lin.terms.iter().collect::<Vec<_>>()[..] else {
        return None;
    };
    let hyper = mono.iter().all(|(a, e)| *e == 1 && matches!(a, SumExpr::Hyper(_)));
    (mono.len() == 1 && hyper).then(|| c.clone())
}
