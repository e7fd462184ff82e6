//! Difference rings built as towers of Π-, R- and Σ-extensions over the
//! rational function field in the running variable.
//!
//! Elements are finite sums of monomials in the generators with rational
//! function coefficients. Π exponents may be negative; R exponents are kept
//! in {0, 1}; Σ exponents are nonnegative. Exponent vectors carry no trailing
//! zeros, so an element stays valid when the tower grows.

mod embed;

pub use embed::{check_sigma_ext, embed_into, ev_sym, from_expression, to_expression, Admissibility, Embedding};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;

use crate::algebra::{Rat, RatFunc};
use crate::expr::SumExpr;
use crate::oracle::OracleError;
use crate::telescope::TeleError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffRingError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not a Σ-extension: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Tele(#[from] TeleError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtKind {
    /// `σ(t) = α t` with `α` in the base field.
    Pi { alpha: RatFunc },
    /// `σ(t) = -t`, `t^2 = 1`.
    R,
    /// `σ(t) = t + β`, with `init` the value at the running variable 0.
    Sigma { beta: TowerElem, init: RatFunc },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extension {
    pub name: String,
    pub kind: ExtKind,
    /// The sequence the generator models, as an expression in the running variable.
    pub display: SumExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tower {
    pub var: String,
    pub exts: Vec<Extension>,
}

/// Exponent vector without trailing zeros.
pub type Exps = Vec<i32>;

fn trim(mut e: Exps) -> Exps {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn exp_at(e: &Exps, i: usize) -> i32 {
    e.get(i).copied().unwrap_or(0)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TowerElem {
    terms: BTreeMap<Exps, RatFunc>,
}

impl TowerElem {
    pub fn zero() -> Self {
        TowerElem::default()
    }

    pub fn one() -> Self {
        TowerElem::from_ratfunc(RatFunc::one())
    }

    pub fn from_ratfunc(r: RatFunc) -> Self {
        TowerElem::monomial(Vec::new(), r)
    }

    pub fn monomial(exps: Exps, c: RatFunc) -> Self {
        let mut t = TowerElem::zero();
        t.add_term(exps, c);
        t
    }

    /// The generator with index `i`.
    pub fn gen(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        TowerElem::monomial(e, RatFunc::one())
    }

    pub fn add_term(&mut self, exps: Exps, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let exps = trim(exps);
        let sum = match self.terms.remove(&exps) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(exps, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &RatFunc)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient when the element lies in the base field.
    pub fn as_ratfunc(&self) -> Option<RatFunc> {
        match self.terms.len() {
            0 => Some(RatFunc::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn coeff(&self, exps: &Exps) -> RatFunc {
        self.terms.get(&trim(exps.clone())).cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &TowerElem) -> TowerElem {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &TowerElem) -> TowerElem {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> TowerElem {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, r: &RatFunc) -> TowerElem {
        self.map_coeffs(|c| c * r)
    }

    pub fn map_coeffs(&self, f: impl Fn(&RatFunc) -> RatFunc) -> TowerElem {
        let mut out = TowerElem::zero();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn try_map_coeffs<E>(&self, f: impl Fn(&RatFunc) -> Result<RatFunc, E>) -> Result<TowerElem, E> {
        let mut out = TowerElem::zero();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Highest exponent of generator `i` (0 when absent or only negative).
    pub fn degree_in(&self, i: usize) -> i32 {
        self.terms.keys().map(|e| exp_at(e, i)).max().unwrap_or(0).max(0)
    }

    pub fn uses_gen(&self, i: usize) -> bool {
        self.terms.keys().any(|e| exp_at(e, i) != 0)
    }

    /// Splits by the exponent of generator `i`: entry `d` is the coefficient
    /// of `gen_i^d`. Requires nonnegative exponents of that generator.
    pub fn coeffs_in(&self, i: usize) -> Vec<TowerElem> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![TowerElem::zero(); d + 1];
        for (e, c) in &self.terms {
            let k = exp_at(e, i);
            assert!(k >= 0, "negative exponent of a polynomial generator");
            let mut rest = e.clone();
            if i < rest.len() {
                rest[i] = 0;
            }
            out[k as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn vars(&self) -> std::collections::BTreeSet<String> {
        self.terms.values().flat_map(|c| c.vars()).collect()
    }
}

impl Tower {
    /// The base field `Q(params)(var)`.
    pub fn base(var: &str) -> Self {
        Tower {
            var: var.to_string(),
            exts: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.exts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exts.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.exts.iter().position(|e| e.name == name)
    }

    pub fn is_sigma(&self, i: usize) -> bool {
        matches!(self.exts[i].kind, ExtKind::Sigma { .. })
    }

    /// Adjoins a Π-generator with `σ(t) = α t`.
    pub fn extend_pi(&self, name: &str, alpha: RatFunc, display: SumExpr) -> Result<Tower, DiffRingError> {
        if alpha.is_zero() {
            return Err(DiffRingError::Unsupported("Π-extension with α = 0".into()));
        }
        Ok(self.push(name, ExtKind::Pi { alpha }, display))
    }

    /// Adjoins the sign generator with `σ(t) = -t`, `t^2 = 1`.
    pub fn extend_r(&self, name: &str, display: SumExpr) -> Tower {
        self.push(name, ExtKind::R, display)
    }

    /// Adjoins a Σ-generator with `σ(t) = t + β`, after checking that no
    /// element of the current ring telescopes `β`.
    pub fn extend_sigma(
        &self,
        name: &str,
        beta: TowerElem,
        init: RatFunc,
        display: SumExpr,
    ) -> Result<Tower, DiffRingError> {
        match check_sigma_ext(&beta, self)? {
            Admissibility::Admissible => Ok(self.push(name, ExtKind::Sigma { beta, init }, display)),
            Admissibility::Inadmissible(g) => Err(DiffRingError::Inadmissible(format!(
                "{} telescopes the summand",
                self.render(&g)
            ))),
        }
    }

    fn push(&self, name: &str, kind: ExtKind, display: SumExpr) -> Tower {
        let mut t = self.clone();
        t.exts.push(Extension {
            name: name.to_string(),
            kind,
            display,
        });
        t
    }

    pub fn mul(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        let mut out = TowerElem::zero();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let n = ea.len().max(eb.len());
                let mut e: Exps = (0..n).map(|i| exp_at(ea, i) + exp_at(eb, i)).collect();
                for (i, x) in e.iter_mut().enumerate() {
                    if matches!(self.exts.get(i).map(|x| &x.kind), Some(ExtKind::R)) {
                        *x = x.rem_euclid(2);
                    }
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, a: &TowerElem, e: u32) -> TowerElem {
        let mut acc = TowerElem::one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// The automorphism σ: `var -> var + 1` on coefficients, extended to the
    /// generators by their rules.
    pub fn sigma(&self, a: &TowerElem) -> TowerElem {
        self.apply(a, 1)
    }

    pub fn sigma_inv(&self, a: &TowerElem) -> TowerElem {
        self.apply(a, -1)
    }

    fn apply(&self, a: &TowerElem, dir: i64) -> TowerElem {
        let var = &self.var;
        let mut out = TowerElem::zero();
        for (e, c) in &a.terms {
            let mut coeff = c.shift(var, dir);
            let mut mono: Exps = Vec::new();
            let mut sums: Vec<(usize, i32)> = Vec::new();
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                match &self.exts[i].kind {
                    ExtKind::Pi { alpha } => {
                        // σ(t^x) = α^x t^x;  σ⁻¹(t^x) = α(var-1)^(-x) t^x.
                        let f = if dir > 0 {
                            alpha.pow(x as i64)
                        } else {
                            alpha.shift(var, -1).pow(-(x as i64))
                        }
                        .expect("Π quotients are units");
                        coeff = &coeff * &f;
                        set_exp(&mut mono, i, x);
                    }
                    ExtKind::R => {
                        if x % 2 != 0 {
                            coeff = -coeff;
                        }
                        set_exp(&mut mono, i, x);
                    }
                    ExtKind::Sigma { .. } => sums.push((i, x)),
                }
            }
            let mut term = TowerElem::monomial(mono, coeff);
            for (i, x) in sums {
                let ExtKind::Sigma { beta, .. } = &self.exts[i].kind else { unreachable!() };
                // σ(s) = s + β;  σ⁻¹(s) = s - σ⁻¹(β).
                let shift = if dir > 0 { beta.clone() } else { self.sigma_inv(beta).neg() };
                let image = TowerElem::gen(i).add(&shift);
                term = self.mul(&term, &self.pow(&image, x as u32));
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluates at `var = i` with parameters bound by `binding`.
    pub fn ev(&self, a: &TowerElem, i: i64, binding: &HashMap<String, Rat>) -> Result<Rat, DiffRingError> {
        let mut cache = HashMap::new();
        let mut acc = Rat::zero();
        for (e, c) in &a.terms {
            let mut point = binding.clone();
            point.insert(self.var.clone(), Rat::from_integer(i.into()));
            let mut v = c.eval(&point).map_err(OracleError::from)?;
            for (g, &x) in e.iter().enumerate() {
                if x == 0 || v.is_zero() {
                    continue;
                }
                let gv = self.ev_gen(g, i, binding, &mut cache)?;
                v *= crate::algebra::pow_rat(&gv, x as i64);
            }
            acc += v;
        }
        Ok(acc)
    }

    fn ev_gen(
        &self,
        g: usize,
        i: i64,
        binding: &HashMap<String, Rat>,
        cache: &mut HashMap<(usize, i64), Rat>,
    ) -> Result<Rat, DiffRingError> {
        if let Some(v) = cache.get(&(g, i)) {
            return Ok(v.clone());
        }
        let ext = &self.exts[g];
        let v = match &ext.kind {
            ExtKind::Pi { .. } | ExtKind::R => {
                let b = crate::oracle::Binding {
                    vars: binding.clone(),
                    tables: HashMap::new(),
                };
                crate::oracle::eval_sequence(&ext.display, &b, &self.var, i)?
            }
            ExtKind::Sigma { beta, init } => {
                // ev(s, i) = init + sum_{j < i} ev(β, j)
                let mut acc = init.eval(binding).map_err(OracleError::from)?;
                for j in 0..i {
                    acc += self.ev(beta, j, binding)?;
                }
                acc
            }
        };
        cache.insert((g, i), v.clone());
        Ok(v)
    }

    /// Plain rendering with generator names.
    pub fn render(&self, a: &TowerElem) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = a
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mut fs: Vec<String> = Vec::new();
                for (i, &x) in e.iter().enumerate() {
                    match x {
                        0 => {}
                        1 => fs.push(self.exts[i].name.clone()),
                        _ => fs.push(format!("{}^{}", self.exts[i].name, x)),
                    }
                }
                if fs.is_empty() {
                    c.to_plain()
                } else if c.is_one() {
                    fs.join("*")
                } else {
                    format!("({})*{}", c.to_plain(), fs.join("*"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

fn set_exp(e: &mut Exps, i: usize, x: i32) {
    if e.len() <= i {
        e.resize(i + 1, 0);
    }
    e[i] = x;
}

impl fmt::Display for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("({})*t{:?}", c.to_plain(), e))
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}
