use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::algebra::{MultiPoly, Rat, RatFunc};

/// Integer-affine combination of variables, used for atom arguments and
/// generic-sequence indices: `sum coef_v * v + constant`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Affine {
    pub terms: BTreeMap<String, i64>,
    pub constant: i64,
}

impl Affine {
    pub fn constant(c: i64) -> Self {
        Affine {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: &str) -> Self {
        Affine::var_plus(v, 0)
    }

    pub fn var_plus(v: &str, c: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(v.to_string(), 1);
        Affine { terms, constant: c }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, v: &str) -> i64 {
        self.terms.get(v).copied().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms.keys().cloned().collect()
    }

    pub fn add(&self, other: &Affine) -> Affine {
        let mut out = self.clone();
        for (v, c) in &other.terms {
            *out.terms.entry(v.clone()).or_insert(0) += c;
        }
        out.terms.retain(|_, c| *c != 0);
        out.constant += other.constant;
        out
    }

    pub fn scale(&self, s: i64) -> Affine {
        let mut out = Affine {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * s)).collect(),
            constant: self.constant * s,
        };
        out.terms.retain(|_, c| *c != 0);
        out
    }

    pub fn plus(&self, c: i64) -> Affine {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    /// Replaces `var` by `by`.
    pub fn subst(&self, var: &str, by: &Affine) -> Affine {
        let c = self.coeff(var);
        if c == 0 {
            return self.clone();
        }
        let mut rest = self.clone();
        rest.terms.remove(var);
        rest.add(&by.scale(c))
    }

    pub fn to_poly(&self) -> MultiPoly {
        let mut p = MultiPoly::int(self.constant);
        for (v, c) in &self.terms {
            p = &p + &MultiPoly::var(v).scale(&Rat::from_integer((*c).into()));
        }
        p
    }

    /// Converts a polynomial with integer coefficients and degree at most one.
    pub fn from_poly(p: &MultiPoly) -> Option<Affine> {
        let mut out = Affine::default();
        for (m, c) in p.terms() {
            if !c.is_integer() {
                return None;
            }
            let c: i64 = num_traits::ToPrimitive::to_i64(&c.to_integer())?;
            match m.pairs() {
                [] => out.constant = c,
                [(v, 1)] => {
                    out.terms.insert(v.clone(), c);
                }
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (v, c) in &self.terms {
            match *c {
                1 => {
                    if !s.is_empty() {
                        s.push('+');
                    }
                    s.push_str(v);
                }
                -1 => {
                    s.push('-');
                    s.push_str(v);
                }
                c if c < 0 => s.push_str(&format!("{c}*{v}")),
                c => {
                    if !s.is_empty() {
                        s.push('+');
                    }
                    s.push_str(&format!("{c}*{v}"));
                }
            }
        }
        if s.is_empty() {
            return self.constant.to_string();
        }
        if self.constant > 0 {
            s.push_str(&format!("+{}", self.constant));
        } else if self.constant < 0 {
            s.push_str(&format!("{}", self.constant));
        }
        s
    }

    /// True when rendering needs parentheses in exponent position.
    pub fn is_compound(&self) -> bool {
        !(self.terms.is_empty() && self.constant >= 0
            || self.terms.len() == 1 && self.constant == 0 && self.terms.values().all(|c| *c == 1))
    }
}

/// Base of an exponential atom `base^A`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PowBase {
    Rat(Rat),
    Param(String),
}

/// Hypergeometric (and harmonic) atoms with affine arguments.
///
/// Each has a shift quotient in its running variable and an initial value;
/// see [`HyperAtom::quotient`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HyperAtom {
    /// Generalized binomial coefficient; zero for a negative bottom argument.
    Binom { top: Affine, bottom: Affine },
    /// `1/binom(top, bottom)`, taken to be 0 where the binomial vanishes.
    InvBinom { top: Affine, bottom: Affine },
    /// `H_A = sum_{j=1}^{A} 1/j`, zero for `A <= 0`.
    Harmonic(Affine),
    Pow { base: PowBase, exp: Affine },
    /// `(-1)^A`.
    AltSign(Affine),
    /// `A!`, zero for negative `A`.
    Fact(Affine),
}

impl HyperAtom {
    pub fn name(&self) -> &'static str {
        match self {
            HyperAtom::Binom { .. } => "binom",
            HyperAtom::InvBinom { .. } => "invbinom",
            HyperAtom::Harmonic(_) => "harmonic",
            HyperAtom::Pow { .. } => "pow",
            HyperAtom::AltSign(_) => "altsign",
            HyperAtom::Fact(_) => "fact",
        }
    }

    pub fn args(&self) -> Vec<&Affine> {
        match self {
            HyperAtom::Binom { top, bottom } | HyperAtom::InvBinom { top, bottom } => {
                vec![top, bottom]
            }
            HyperAtom::Harmonic(a) | HyperAtom::AltSign(a) | HyperAtom::Fact(a) => vec![a],
            HyperAtom::Pow { exp, .. } => vec![exp],
        }
    }

    pub fn map_args(&self, f: &dyn Fn(&Affine) -> Affine) -> HyperAtom {
        match self {
            HyperAtom::Binom { top, bottom } => HyperAtom::Binom {
                top: f(top),
                bottom: f(bottom),
            },
            HyperAtom::InvBinom { top, bottom } => HyperAtom::InvBinom {
                top: f(top),
                bottom: f(bottom),
            },
            HyperAtom::Harmonic(a) => HyperAtom::Harmonic(f(a)),
            HyperAtom::AltSign(a) => HyperAtom::AltSign(f(a)),
            HyperAtom::Fact(a) => HyperAtom::Fact(f(a)),
            HyperAtom::Pow { base, exp } => HyperAtom::Pow {
                base: base.clone(),
                exp: f(exp),
            },
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut v: BTreeSet<String> = self.args().iter().flat_map(|a| a.vars()).collect();
        if let HyperAtom::Pow {
            base: PowBase::Param(p),
            ..
        } = self
        {
            v.insert(p.clone());
        }
        v
    }

    /// Shift quotient `t(var+1)/t(var)` and initial value `t(var=0)` for
    /// hypergeometric atoms whose bottom/exponent argument has coefficient
    /// one in `var`. `None` for harmonic numbers (not hypergeometric) and
    /// for argument shapes outside that class.
    pub fn quotient(&self, var: &str) -> Option<RatFunc> {
        match self {
            HyperAtom::Binom { top, bottom } | HyperAtom::InvBinom { top, bottom } => {
                if bottom.coeff(var) != 1 || top.coeff(var) < 0 {
                    return None;
                }
                let p = top.coeff(var);
                let t = RatFunc::from_poly(top.to_poly());
                let b = RatFunc::from_poly(bottom.to_poly());
                let d = &t - &b;
                let mut num = RatFunc::one();
                let mut den = &b + &RatFunc::one();
                if p == 0 {
                    num = d;
                } else {
                    for i in 1..=p {
                        num = &num * &(&t + &RatFunc::int(i));
                    }
                    for i in 1..p {
                        den = &den * &(&d + &RatFunc::int(i));
                    }
                }
                let q = &num / &den;
                if matches!(self, HyperAtom::InvBinom { .. }) {
                    q.inv().ok()
                } else {
                    Some(q)
                }
            }
            HyperAtom::Pow { base, exp } => {
                let b = match base {
                    PowBase::Rat(r) => RatFunc::constant(r.clone()),
                    PowBase::Param(p) => RatFunc::var(p),
                };
                b.pow(exp.coeff(var)).ok()
            }
            HyperAtom::AltSign(a) => Some(if a.coeff(var) % 2 == 0 {
                RatFunc::one()
            } else {
                RatFunc::int(-1)
            }),
            HyperAtom::Fact(a) => {
                if a.coeff(var) != 1 {
                    return None;
                }
                Some(RatFunc::from_poly(&a.to_poly() + &MultiPoly::one()))
            }
            HyperAtom::Harmonic(_) => None,
        }
    }
}

/// Expression tree for nested sums over generic and hypergeometric atoms.
///
/// The variant order is significant: the derived `Ord` drives the canonical
/// ordering of factors and terms in normal forms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SumExpr {
    Const(Rat),
    Var(String),
    /// Rational-function coefficient in free variables.
    RatCoeff(RatFunc),
    /// Generic sequence value `name[index]`.
    Gen { name: String, index: Affine },
    Hyper(HyperAtom),
    /// `sum_{var=lower}^{upper} body`.
    Sum {
        var: String,
        lower: i64,
        upper: Box<SumExpr>,
        body: Box<SumExpr>,
    },
    Pow(Box<SumExpr>, u32),
    Mul(Vec<SumExpr>),
    Add(Vec<SumExpr>),
}

impl SumExpr {
    pub fn int(c: i64) -> SumExpr {
        SumExpr::Const(Rat::from_integer(c.into()))
    }

    pub fn zero() -> SumExpr {
        SumExpr::Const(Rat::zero())
    }

    pub fn one() -> SumExpr {
        SumExpr::Const(Rat::one())
    }

    pub fn var(v: &str) -> SumExpr {
        SumExpr::Var(v.to_string())
    }

    pub fn gen(name: &str, index: Affine) -> SumExpr {
        SumExpr::Gen {
            name: name.to_string(),
            index,
        }
    }

    pub fn sum(var: &str, lower: i64, upper: SumExpr, body: SumExpr) -> SumExpr {
        SumExpr::Sum {
            var: var.to_string(),
            lower,
            upper: Box::new(upper),
            body: Box::new(body),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SumExpr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, SumExpr::Const(c) if c.is_one())
    }

    /// Flattening product constructor.
    pub fn mul(factors: Vec<SumExpr>) -> SumExpr {
        let mut out = Vec::new();
        for f in factors {
            match f {
                SumExpr::Mul(inner) => out.extend(inner),
                f if f.is_one() => {}
                f => out.push(f),
            }
        }
        match out.len() {
            0 => SumExpr::one(),
            1 => out.pop().unwrap(),
            _ => SumExpr::Mul(out),
        }
    }

    /// Flattening sum constructor.
    pub fn add(terms: Vec<SumExpr>) -> SumExpr {
        let mut out = Vec::new();
        for t in terms {
            match t {
                SumExpr::Add(inner) => out.extend(inner),
                t if t.is_zero() => {}
                t => out.push(t),
            }
        }
        match out.len() {
            0 => SumExpr::zero(),
            1 => out.pop().unwrap(),
            _ => SumExpr::Add(out),
        }
    }

    /// True when the expression contains no atoms or sums.
    pub fn is_atom_free(&self) -> bool {
        match self {
            SumExpr::Const(_) | SumExpr::Var(_) | SumExpr::RatCoeff(_) => true,
            SumExpr::Gen { .. } | SumExpr::Hyper(_) | SumExpr::Sum { .. } => false,
            SumExpr::Pow(b, _) => b.is_atom_free(),
            SumExpr::Mul(v) | SumExpr::Add(v) => v.iter().all(|e| e.is_atom_free()),
        }
    }

    /// Converts an atom-free expression to a rational function.
    pub fn to_ratfunc(&self) -> Option<RatFunc> {
        Some(match self {
            SumExpr::Const(c) => RatFunc::constant(c.clone()),
            SumExpr::Var(v) => RatFunc::var(v),
            SumExpr::RatCoeff(r) => r.clone(),
            SumExpr::Pow(b, e) => b.to_ratfunc()?.pow(*e as i64).ok()?,
            SumExpr::Mul(v) => {
                let mut acc = RatFunc::one();
                for f in v {
                    acc = &acc * &f.to_ratfunc()?;
                }
                acc
            }
            SumExpr::Add(v) => {
                let mut acc = RatFunc::zero();
                for f in v {
                    acc = &acc + &f.to_ratfunc()?;
                }
                acc
            }
            _ => return None,
        })
    }

    /// Free variables, including parameters inside coefficients and atoms.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            SumExpr::Const(_) => {}
            SumExpr::Var(v) => {
                out.insert(v.clone());
            }
            SumExpr::RatCoeff(r) => out.extend(r.vars()),
            SumExpr::Gen { index, .. } => out.extend(index.vars()),
            SumExpr::Hyper(h) => out.extend(h.free_vars()),
            SumExpr::Sum {
                var, upper, body, ..
            } => {
                upper.collect_free(out);
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(var);
                out.extend(inner);
            }
            SumExpr::Pow(b, _) => b.collect_free(out),
            SumExpr::Mul(v) | SumExpr::Add(v) => v.iter().for_each(|e| e.collect_free(out)),
        }
    }

    /// Names of generic sequences referenced anywhere.
    pub fn generic_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let SumExpr::Gen { name, .. } = e {
                out.insert(name.clone());
            }
        });
        out
    }

    pub fn contains_sum(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, SumExpr::Sum { .. }));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&SumExpr)) {
        f(self);
        match self {
            SumExpr::Sum { upper, body, .. } => {
                upper.visit(f);
                body.visit(f);
            }
            SumExpr::Pow(b, _) => b.visit(f),
            SumExpr::Mul(v) | SumExpr::Add(v) => v.iter().for_each(|e| e.visit(f)),
            _ => {}
        }
    }

    /// Nesting depth of sums.
    pub fn sum_depth(&self) -> usize {
        match self {
            SumExpr::Sum { upper, body, .. } => (1 + body.sum_depth()).max(upper.sum_depth()),
            SumExpr::Pow(b, _) => b.sum_depth(),
            SumExpr::Mul(v) | SumExpr::Add(v) => v.iter().map(|e| e.sum_depth()).max().unwrap_or(0),
            _ => 0,
        }
    }
}
