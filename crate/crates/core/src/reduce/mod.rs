//! Reduction of generic double sums `Sum(k,0,a, P(k, X, S(k)))`, where
//! `S(k)` is the inner sum of a generic sequence `X`, to single nested sums,
//! and specialization of the results to concrete sequences.

mod generic;
mod ring;
mod simplify;
mod specialize;

pub use generic::reduce_generic;
pub use simplify::{interchange, post_simplify, post_simplify_with_threshold};
pub use specialize::{named_atom, specialize, SpecializeOptions, Specialized, ATOM_VAR};

use serde::{Deserialize, Serialize};

use crate::expr::{self, SumExpr};
use crate::oracle::{Constraint, Identity};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("reduction failed its oracle check: {0}")]
    Unsound(String),
    #[error("constraint `{constraint}` has no solution once specialized (right-hand side {rhs})")]
    ConstraintUnsolvable { constraint: String, rhs: String },
    #[error("specialized identity failed its oracle check: {0}")]
    CheckFailed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    /// The telescoper lies in the generic ring itself.
    SolvedInRing,
    /// A plain sum over the summation range was needed.
    SolvedWithExtension,
    /// Fresh sequences subject to recurrences were introduced.
    SolvedWithConstraints,
    /// The constraint budget was exceeded; the input is returned as is.
    Unchanged,
}

/// Closed form of a generic double sum, valid for every sequence `Y` (and
/// constants `c`) satisfying the constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionResult {
    #[serde(with = "expr::serde_plain")]
    pub input: SumExpr,
    /// Upper summation bound, the variable of the identity.
    pub var: String,
    /// The generic sequence summed by the inner sum.
    pub generic: String,
    #[serde(with = "expr::serde_plain")]
    pub closed_form: SumExpr,
    pub constraints: Vec<Constraint>,
    /// Unknown constants the constraints depend on.
    pub params: Vec<String>,
    /// Plain sums the closed form needed besides the inner sum.
    #[serde(with = "expr_list")]
    pub extensions: Vec<SumExpr>,
    pub case: CaseTag,
    /// Names given to free constants of the telescoper that were set to 0.
    pub fixed_to_zero: Vec<String>,
    /// `g(k)` with `g(k+1) - g(k) = P(k+1)`.
    #[serde(with = "expr::serde_plain")]
    pub telescoper: SumExpr,
    pub telescoper_degree: usize,
    pub summand_degree: usize,
}

mod expr_list {
    use super::*;
    pub fn serialize<S: serde::Serializer>(v: &[SumExpr], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(expr::to_plain).collect::<Vec<_>>().serialize(s)
    }
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<SumExpr>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| expr::parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl ReductionResult {
    pub(crate) fn unchanged(input: SumExpr, _k: &str, a: &str, x: &str) -> Self {
        ReductionResult {
            closed_form: input.clone(),
            telescoper: SumExpr::zero(),
            input,
            var: a.to_string(),
            generic: x.to_string(),
            constraints: Vec::new(),
            params: Vec::new(),
            extensions: Vec::new(),
            case: CaseTag::Unchanged,
            fixed_to_zero: Vec::new(),
            telescoper_degree: 0,
            summand_degree: 0,
        }
    }

    /// `input = closed_form` as a checkable identity with random tables for
    /// the generic sequences and the constraints driving the fresh ones.
    pub fn identity(&self) -> Identity {
        let mut id = Identity::new("reduction", self.input.clone(), self.closed_form.clone());
        id.grid = vec![(self.var.clone(), 19)];
        for c in &self.constraints {
            if !id.generics.contains(&c.symbol) {
                id.generics.push(c.symbol.clone());
            }
        }
        id.constraints = self.constraints.clone();
        id.free_params = self.params.clone();
        id
    }

    /// Closed form with sums split and merged as far as possible.
    pub fn simple_sums(&self) -> ReductionResult {
        ReductionResult {
            closed_form: post_simplify(&self.closed_form),
            ..self.clone()
        }
    }

    pub fn to_plain(&self) -> String {
        let mut s = format!("{} = {}", expr::to_plain(&self.input), expr::to_plain(&self.closed_form));
        for c in &self.constraints {
            s.push_str(&format!("\n  where {}", c.to_plain()));
        }
        s
    }

    pub fn to_latex(&self) -> String {
        let mut s = format!("{} = {}", expr::to_latex(&self.input), expr::to_latex(&self.closed_form));
        for c in &self.constraints {
            s.push_str(&format!(",\\quad {}", c.to_latex()));
        }
        s
    }
}
