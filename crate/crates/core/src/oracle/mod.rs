//! Exact numerical checking of identities on grids of integer points.

mod check;
mod eval;
mod falsify;

pub use check::{
    check_identity, constraint_table, default_samples, default_seed, random_rat, CheckOptions, CheckReport, CheckStatus,
    CmpOp, Constraint, Identity, Operand, Proviso, Witness, DEFAULT_SEED,
};
pub use eval::{binom, eval, eval_sequence, harmonic, Binding};
pub use falsify::{check_constraint, falsify_nonexistence};

use crate::algebra::AlgebraError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("table `{name}` has no entry at index {index}")]
    TableTooShort { name: String, index: i64 },
    #[error("non-integral {0}")]
    NonIntegral(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
