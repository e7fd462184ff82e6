use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{format_rat, parse_rat, Rat};
use crate::expr::{self, SumExpr};

use super::eval::{eval, Binding};
use super::OracleError;

/// Default seed for random tables; `TELESUM_SEED` overrides it.
pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn default_seed() -> u64 {
    std::env::var("TELESUM_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// A side condition on grid variables or parameters, e.g. `a<=n`, `n!=0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proviso {
    pub lhs: String,
    pub op: CmpOp,
    pub rhs: Operand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Ne,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Num(Rat),
}

impl Proviso {
    /// `None` when a variable is not bound at this point.
    pub fn holds(&self, point: &HashMap<String, Rat>) -> Option<bool> {
        let l = point.get(&self.lhs)?;
        let r = match &self.rhs {
            Operand::Var(v) => point.get(v)?.clone(),
            Operand::Num(q) => q.clone(),
        };
        Some(match self.op {
            CmpOp::Le => *l <= r,
            CmpOp::Lt => *l < r,
            CmpOp::Ge => *l >= r,
            CmpOp::Gt => *l > r,
            CmpOp::Ne => *l != r,
        })
    }
}

impl FromStr for Proviso {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        for (tok, op) in [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("!=", CmpOp::Ne),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ] {
            if let Some((l, r)) = s.split_once(tok) {
                if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(format!("bad proviso `{s}`"));
                }
                let rhs = match parse_rat(r) {
                    Some(q) => Operand::Num(q),
                    None if r.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !r.is_empty() => {
                        Operand::Var(r.to_string())
                    }
                    None => return Err(format!("bad proviso `{s}`")),
                };
                return Ok(Proviso {
                    lhs: l.to_string(),
                    op,
                    rhs,
                });
            }
        }
        Err(format!("bad proviso `{s}`"))
    }
}

impl fmt::Display for Proviso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Ne => "!=",
        };
        let r = match &self.rhs {
            Operand::Var(v) => v.clone(),
            Operand::Num(q) => format_rat(q),
        };
        write!(f, "{}{}{}", self.lhs, op, r)
    }
}

impl Serialize for Proviso {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Proviso {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A first-order recurrence defining a fresh sequence:
/// `symbol[var+1] - symbol[var] = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub symbol: String,
    pub var: String,
    #[serde(with = "expr::serde_plain")]
    pub rhs: SumExpr,
}

impl Constraint {
    pub fn to_plain(&self) -> String {
        format!(
            "{s}[{v}+1] - {s}[{v}] = {}",
            expr::to_plain(&self.rhs),
            s = self.symbol,
            v = self.var
        )
    }

    pub fn to_latex(&self) -> String {
        format!(
            "{s}_{{{v}+1}} - {s}_{{{v}}} = {}",
            expr::to_latex(&self.rhs),
            s = self.symbol,
            v = self.var
        )
    }
}

/// An identity `lhs = rhs` with the data needed to test it numerically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identity {
    pub id: String,
    #[serde(with = "expr::serde_plain")]
    pub lhs: SumExpr,
    #[serde(with = "expr::serde_plain")]
    pub rhs: SumExpr,
    #[serde(default)]
    pub provisos: Vec<Proviso>,
    /// Grid variables with their default maxima; each ranges from 0.
    pub grid: Vec<(String, i64)>,
    /// Sample values for symbolic parameters such as `x`.
    #[serde(default, with = "rat_lists")]
    pub params: BTreeMap<String, Vec<Rat>>,
    /// Generic sequences bound to random tables.
    #[serde(default)]
    pub generics: Vec<String>,
    /// Recurrences for sequences introduced by a reduction.
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    /// Parameters that are free in the identity; sampled at random.
    #[serde(default)]
    pub free_params: Vec<String>,
}

mod rat_lists {
    use super::*;
    pub fn serialize<S: serde::Serializer>(m: &BTreeMap<String, Vec<Rat>>, s: S) -> Result<S::Ok, S::Error> {
        let conv: BTreeMap<&String, Vec<String>> =
            m.iter().map(|(k, v)| (k, v.iter().map(format_rat).collect())).collect();
        conv.serialize(s)
    }
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Vec<Rat>>, D::Error> {
        let raw = BTreeMap::<String, Vec<String>>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                let vals = v
                    .iter()
                    .map(|s| parse_rat(s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((k, vals))
            })
            .collect()
    }
}

impl Identity {
    pub fn new(id: &str, lhs: SumExpr, rhs: SumExpr) -> Self {
        let grid = ["a", "n"]
            .iter()
            .filter(|v| lhs.free_vars().contains(**v) || rhs.free_vars().contains(**v))
            .map(|v| (v.to_string(), 12))
            .collect();
        let mut generics: Vec<String> = lhs.generic_names().into_iter().collect();
        for g in rhs.generic_names() {
            if !generics.contains(&g) {
                generics.push(g);
            }
        }
        Identity {
            id: id.to_string(),
            lhs,
            rhs,
            provisos: Vec::new(),
            grid,
            params: BTreeMap::new(),
            generics,
            constraints: Vec::new(),
            free_params: Vec::new(),
        }
    }

    /// Parses `lhs = rhs`. `a` and `n` range over the default grid; every
    /// other free symbol is a parameter sampled at a few rationals.
    pub fn parse(id: &str, text: &str) -> Result<Identity, String> {
        let (l, r) = text
            .split_once('=')
            .filter(|(_, r)| !r.contains('='))
            .ok_or_else(|| format!("expected `lhs = rhs`, got `{text}`"))?;
        let lhs = expr::parse(l).map_err(|e| e.to_string())?;
        let rhs = expr::parse(r).map_err(|e| e.to_string())?;
        let mut out = Identity::new(id, lhs, rhs);
        let free = out.lhs.free_vars().into_iter().chain(out.rhs.free_vars());
        for v in free {
            if !out.grid.iter().any(|(g, _)| *g == v) {
                out.params.insert(v, default_samples());
            }
        }
        Ok(out)
    }

    pub fn to_plain(&self) -> String {
        format!("{} = {}", expr::to_plain(&self.lhs), expr::to_plain(&self.rhs))
    }

    pub fn to_latex(&self) -> String {
        format!("{} = {}", expr::to_latex(&self.lhs), expr::to_latex(&self.rhs))
    }
}

/// Sample values for parameters that are not on the integer grid.
pub fn default_samples() -> Vec<Rat> {
    [(2, 1), (3, 1), (1, 2), (5, 3)]
        .iter()
        .map(|(n, d)| Rat::new(BigInt::from(*n), BigInt::from(*d)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Replaces the identity's grid maxima, in grid order.
    pub grid: Option<Vec<i64>>,
    pub seed: u64,
    /// Random table sets per grid point for generic identities.
    pub table_sets: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            grid: None,
            seed: default_seed(),
            table_sets: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: BTreeMap<String, String>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub status: CheckStatus,
    pub points: usize,
    pub seed: u64,
    pub grid: Vec<(String, i64)>,
    pub witness: Option<Witness>,
    pub error: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn summary(&self) -> String {
        match self.status {
            CheckStatus::Pass => format!("{}: PASS ({} points, seed {})", self.id, self.points, self.seed),
            CheckStatus::Fail => {
                let w = self.witness.as_ref().expect("failures carry a witness");
                let pt: Vec<String> = w.point.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!(
                    "{}: FAIL at {} (lhs {}, rhs {})",
                    self.id,
                    pt.join(", "),
                    w.lhs,
                    w.rhs
                )
            }
            CheckStatus::Error => format!(
                "{}: ERROR {}",
                self.id,
                self.error.as_deref().unwrap_or("unknown")
            ),
        }
    }
}

pub fn random_rat(rng: &mut impl Rng) -> Rat {
    let n: i64 = rng.gen_range(-9..=9);
    let d: i64 = rng.gen_range(1..=9);
    Rat::new(n.into(), d.into())
}

fn cartesian(ranges: &[(String, Vec<Rat>)]) -> Vec<Vec<(String, Rat)>> {
    let mut out: Vec<Vec<(String, Rat)>> = vec![Vec::new()];
    for (v, vals) in ranges {
        let mut next = Vec::with_capacity(out.len() * vals.len());
        for prefix in &out {
            for x in vals {
                let mut p = prefix.clone();
                p.push((v.clone(), x.clone()));
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Builds the table of a constrained sequence from its recurrence, starting
/// at `start`, for indices `0..len`.
pub fn constraint_table(
    c: &Constraint,
    binding: &Binding,
    start: Rat,
    len: usize,
) -> Result<Vec<Rat>, OracleError> {
    let mut t = Vec::with_capacity(len);
    t.push(start);
    let mut b = binding.clone();
    for j in 0..len.saturating_sub(1) {
        b.vars.insert(c.var.clone(), Rat::from_integer((j as i64).into()));
        let step = eval(&c.rhs, &b)?;
        let next = t[j].clone() + step;
        t.push(next);
    }
    Ok(t)
}

/// Checks an identity on every grid point satisfying its provisos.
pub fn check_identity(id: &Identity, opts: &CheckOptions) -> CheckReport {
    let mut grid = id.grid.clone();
    if let Some(over) = &opts.grid {
        for (g, m) in grid.iter_mut().zip(over) {
            g.1 = *m;
        }
    }
    let mut report = CheckReport {
        id: id.id.clone(),
        status: CheckStatus::Pass,
        points: 0,
        seed: opts.seed,
        grid: grid.clone(),
        witness: None,
        error: None,
    };
    match run_check(id, &grid, opts, &mut report) {
        Ok(()) => {}
        Err(e) => {
            report.status = CheckStatus::Error;
            report.error = Some(e.to_string());
        }
    }
    report
}

fn run_check(
    id: &Identity,
    grid: &[(String, i64)],
    opts: &CheckOptions,
    report: &mut CheckReport,
) -> Result<(), OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ranges: Vec<(String, Vec<Rat>)> = grid
        .iter()
        .map(|(v, m)| (v.clone(), (0..=*m).map(|i| Rat::from_integer(i.into())).collect()))
        .chain(id.params.iter().map(|(k, v)| (k.clone(), v.clone())))
        .collect();
    let table_len = grid.iter().map(|(_, m)| *m).max().unwrap_or(0).max(0) as usize * 2 + 16;
    let sets = if id.generics.is_empty() && id.free_params.is_empty() {
        1
    } else {
        opts.table_sets.max(1)
    };
    for pt in cartesian(&ranges) {
        let map: HashMap<String, Rat> = pt.iter().cloned().collect();
        if id.provisos.iter().any(|p| p.holds(&map) == Some(false)) {
            continue;
        }
        for _ in 0..sets {
            let mut b = Binding {
                vars: map.clone(),
                tables: HashMap::new(),
            };
            for g in &id.generics {
                if id.constraints.iter().any(|c| &c.symbol == g) {
                    continue;
                }
                let t = (0..table_len).map(|_| random_rat(&mut rng)).collect();
                b.tables.insert(g.clone(), t);
            }
            for p in &id.free_params {
                b.vars.insert(p.clone(), random_rat(&mut rng));
            }
            for c in &id.constraints {
                let start = random_rat(&mut rng);
                let t = constraint_table(c, &b, start, table_len)?;
                b.tables.insert(c.symbol.clone(), t);
            }
            let l = eval(&id.lhs, &b)?;
            let r = eval(&id.rhs, &b)?;
            report.points += 1;
            if l != r {
                report.status = CheckStatus::Fail;
                let mut point: BTreeMap<String, String> =
                    pt.iter().map(|(k, v)| (k.clone(), format_rat(v))).collect();
                for p in &id.free_params {
                    point.insert(p.clone(), format_rat(&b.vars[p]));
                }
                report.witness = Some(Witness {
                    point,
                    lhs: format_rat(&l),
                    rhs: format_rat(&r),
                });
                return Ok(());
            }
        }
    }
    Ok(())
}
