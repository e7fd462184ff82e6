use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{AlgebraError, Rat};

/// A power product of named variables, kept sorted by variable name with
/// strictly positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(name: &str, exp: u32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(name.to_string(), exp)])
        }
    }

    pub fn from_pairs(mut pairs: Vec<(String, u32)>) -> Self {
        pairs.retain(|(_, e)| *e > 0);
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(String, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn pairs(&self) -> &[(String, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn degree(&self, var: &str) -> u32 {
        self.0
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *v {
                let oe = other.0[j].1;
                if oe > *e {
                    return None;
                }
                if oe < *e {
                    out.push((v.clone(), e - oe));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *v {
                return None;
            } else {
                out.push((v.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes `var` from the monomial and returns its former exponent.
    pub fn without(&self, var: &str) -> (Monomial, u32) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(v, x)| {
                if v == var {
                    e = *x;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (Monomial(rest), e)
    }
}

/// Graded-lex: total degree first, then exponent vectors compared in
/// alphabetical variable order (a larger exponent on an earlier variable wins).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.total_degree().cmp(&other.total_degree());
        if d != Ordering::Equal {
            return d;
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn one() -> Self {
        MultiPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        MultiPoly { terms }
    }

    pub fn int(c: i64) -> Self {
        MultiPoly::constant(Rat::from_integer(BigInt::from(c)))
    }

    pub fn var(name: &str) -> Self {
        MultiPoly::term(Monomial::var(name, 1), Rat::one())
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(it: I) -> Self {
        let mut p = MultiPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    /// `var + shift` as a polynomial.
    pub fn var_plus(name: &str, shift: i64) -> Self {
        &MultiPoly::var(name) + &MultiPoly::int(shift)
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn has_var(&self, var: &str) -> bool {
        self.terms.keys().any(|m| m.degree(var) > 0)
    }

    pub fn degree(&self, var: &str) -> u32 {
        self.terms.keys().map(|m| m.degree(var)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Leading term under graded-lex.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rat {
        self.leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rat::zero)
    }

    pub fn scale(&self, c: &Rat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, c: &Rat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.mul(mono), x * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut result = MultiPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Divides by the graded-lex leading coefficient.
    pub fn monic(&self) -> MultiPoly {
        if self.is_zero() {
            return MultiPoly::zero();
        }
        let lc = self.leading_coeff();
        self.scale(&(Rat::one() / lc))
    }

    /// Coefficients with respect to `var`; index `i` holds the coefficient of `var^i`.
    pub fn coeffs_in(&self, var: &str) -> Vec<MultiPoly> {
        let d = self.degree(var) as usize;
        let mut out = vec![MultiPoly::zero(); d + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.without(var);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(var: &str, coeffs: &[MultiPoly]) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            let vm = Monomial::var(var, i as u32);
            for (m, x) in &c.terms {
                out.add_term(m.mul(&vm), x.clone());
            }
        }
        out
    }

    pub fn leading_coeff_in(&self, var: &str) -> MultiPoly {
        self.coeffs_in(var).pop().unwrap_or_default()
    }

    pub fn derivative(&self, var: &str) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.without(var);
            if e > 0 {
                let nm = rest.mul(&Monomial::var(var, e - 1));
                out.add_term(nm, c * Rat::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Evaluates with every variable bound.
    pub fn eval(&self, point: &HashMap<String, Rat>) -> Result<Rat, AlgebraError> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.0 {
                let x = point
                    .get(v)
                    .ok_or_else(|| AlgebraError::UnboundVariable(v.clone()))?;
                t *= pow_rat(x, *e as i64);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Binds the variables present in `point`, leaving the others symbolic.
    pub fn partial_eval(&self, point: &HashMap<String, Rat>) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            let mut rest = Vec::new();
            for (v, e) in &m.0 {
                match point.get(v) {
                    Some(x) => t *= pow_rat(x, *e as i64),
                    None => rest.push((v.clone(), *e)),
                }
            }
            out.add_term(Monomial(rest), t);
        }
        out
    }

    pub fn eval_var(&self, var: &str, value: &Rat) -> MultiPoly {
        let mut point = HashMap::new();
        point.insert(var.to_string(), value.clone());
        self.partial_eval(&point)
    }

    /// Substitutes `var := replacement`.
    pub fn subst(&self, var: &str, replacement: &MultiPoly) -> MultiPoly {
        if !self.has_var(var) {
            return self.clone();
        }
        let coeffs = self.coeffs_in(var);
        // Horner in `var`.
        let mut acc = MultiPoly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * replacement) + c;
        }
        acc
    }

    /// `p(var + m)`.
    pub fn shift(&self, var: &str, m: i64) -> MultiPoly {
        if m == 0 {
            return self.clone();
        }
        self.subst(var, &MultiPoly::var_plus(var, m))
    }

    /// Renames variables through `f`; names mapping to the same target merge.
    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let pairs = m.0.iter().map(|(v, e)| (f(v), *e)).collect();
            out.add_term(Monomial::from_pairs(pairs), c.clone());
        }
        out
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&(Rat::one() / c)));
        }
        let (lm, lc) = divisor.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let inv = Rat::one() / lc;
        let mut q = MultiPoly::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            let tm = rm.div(&lm)?;
            let tc = &rc * &inv;
            r = &r - &divisor.mul_monomial(&tm, &tc);
            q.add_term(tm, tc);
        }
        Some(q)
    }

    /// Pseudo-remainder of `self` by `b` with respect to `var`.
    pub fn prem(&self, b: &MultiPoly, var: &str) -> MultiPoly {
        let db = b.degree(var);
        let lb = b.leading_coeff_in(var);
        let mut r = self.clone();
        while !r.is_zero() && r.degree(var) >= db {
            let dr = r.degree(var);
            let lr = r.leading_coeff_in(var);
            let shift = Monomial::var(var, dr - db);
            r = &(&r * &lb) - &(&(&lr * b).mul_monomial(&shift, &Rat::one()));
        }
        r
    }

    /// Gcd of the coefficients with respect to `var` (a polynomial free of `var`).
    pub fn content_in(&self, var: &str) -> MultiPoly {
        let mut g = MultiPoly::zero();
        for c in self.coeffs_in(var) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_constant() {
                return MultiPoly::one();
            }
        }
        g
    }

    /// Gcd of all rational coefficients, as a positive rational, so that
    /// `self / content` has coprime integer coefficients.
    pub fn rational_content(&self) -> Rat {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Rat::one();
        }
        Rat::new(num, den)
    }

    pub fn primitive_part_in(&self, var: &str) -> MultiPoly {
        let c = self.content_in(var);
        self.div_exact(&c).unwrap_or_else(|| self.clone())
    }

    pub fn to_plain(&self) -> String {
        format_poly(self, false)
    }

    pub fn to_latex(&self) -> String {
        format_poly(self, true)
    }
}

/// `x^e`, with a negative power of zero taken as 0 like any other pole.
pub(crate) fn pow_rat(x: &Rat, e: i64) -> Rat {
    if e < 0 && x.is_zero() {
        Rat::zero()
    } else if e >= 0 {
        num_traits::pow::pow(x.clone(), e as usize)
    } else {
        Rat::one() / num_traits::pow::pow(x.clone(), (-e) as usize)
    }
}

/// Recursive gcd over Q, normalized to be monic (graded-lex leading coefficient 1).
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one();
    }
    if a == b {
        return a.monic();
    }
    // Pick the variable of smallest combined degree among those present.
    let va = a.vars();
    let vb = b.vars();
    let var = va
        .union(&vb)
        .min_by_key(|v| a.degree(v) + b.degree(v))
        .cloned()
        .expect("non-constant polynomials have variables");
    if !a.has_var(&var) {
        return gcd(a, &b.content_in(&var));
    }
    if !b.has_var(&var) {
        return gcd(&a.content_in(&var), b);
    }
    let ca = a.content_in(&var);
    let cb = b.content_in(&var);
    let c = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let (mut r0, mut r1) = if pa.degree(&var) >= pb.degree(&var) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    while !r1.is_zero() {
        let r = r0.prem(&r1, &var);
        r0 = r1;
        r1 = if r.is_zero() || !r.has_var(&var) {
            if r.is_zero() {
                MultiPoly::zero()
            } else {
                // Non-zero remainder free of `var`: the primitive gcd is trivial.
                r0 = MultiPoly::one();
                MultiPoly::zero()
            }
        } else {
            let cr = r.content_in(&var);
            let pr = r.div_exact(&cr).expect("content divides");
            pr.scale(&(Rat::one() / pr.rational_content()))
        };
    }
    let g = if r0.has_var(&var) {
        r0.primitive_part_in(&var)
    } else {
        MultiPoly::one()
    };
    (&g * &c).monic()
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        if self.is_zero() || rhs.is_zero() {
            return MultiPoly::zero();
        }
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

pub(crate) fn format_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn format_monomial(m: &Monomial, latex: bool) -> String {
    m.0.iter()
        .map(|(v, e)| {
            if *e == 1 {
                v.clone()
            } else if latex {
                format!("{v}^{{{e}}}")
            } else {
                format!("{v}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join(if latex { " " } else { "*" })
}

fn format_poly(p: &MultiPoly, latex: bool) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms.iter().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if neg {
            s.push('-');
        } else if i > 0 {
            s.push('+');
        }
        let mono = format_monomial(m, latex);
        let coef = if latex && !a.is_integer() {
            format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom())
        } else {
            format_rat(&a)
        };
        if m.is_one() {
            s.push_str(&coef);
        } else if a.is_one() {
            s.push_str(&mono);
        } else if latex {
            s.push_str(&format!("{coef} {mono}"));
        } else {
            s.push_str(&format!("{coef}*{mono}"));
        }
    }
    s
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain())
    }
}
