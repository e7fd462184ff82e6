//! Exact arithmetic: rationals, sparse multivariate polynomials, normalized
//! rational functions and linear systems over them.

mod linsolve;
mod poly;
mod ratfunc;
mod resultant;

pub use linsolve::{solve_linear_system, SolutionSpace};
pub use poly::{gcd, Monomial, MultiPoly};
pub use ratfunc::RatFunc;
pub use resultant::{determinant, resultant};

pub(crate) use poly::{format_rat, pow_rat};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rat = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("division by zero polynomial")]
    DivisionByZero,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `p` or `p/q` with optional sign.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

pub fn rat_to_i64(r: &Rat) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

/// Integer roots of `p` viewed as a polynomial in `var`, valid identically in
/// all other variables. Sorted ascending.
pub fn integer_roots(p: &MultiPoly, var: &str) -> Vec<i64> {
    if p.is_zero() || !p.has_var(var) {
        return Vec::new();
    }
    // Split p = sum_mu mu(other vars) * p_mu(var); common roots of all p_mu.
    let mut parts: std::collections::BTreeMap<Monomial, Vec<Rat>> = Default::default();
    let d = p.degree(var) as usize;
    for (m, c) in p.terms() {
        let (rest, e) = m.without(var);
        parts
            .entry(rest)
            .or_insert_with(|| vec![Rat::zero(); d + 1])[e as usize] += c.clone();
    }
    let mut g: Option<MultiPoly> = None;
    for coeffs in parts.values() {
        let up = MultiPoly::from_coeffs_in(
            var,
            &coeffs.iter().map(|c| MultiPoly::constant(c.clone())).collect::<Vec<_>>(),
        );
        g = Some(match g {
            None => up,
            Some(acc) => gcd(&acc, &up),
        });
    }
    let g = g.unwrap_or_default();
    if !g.has_var(var) {
        return Vec::new();
    }
    univariate_integer_roots(&g.coeffs_in(var).iter().map(|c| c.as_constant().unwrap_or_default()).collect::<Vec<_>>())
}

/// Integer roots of `sum coeffs[i] x^i` with rational coefficients.
pub fn univariate_integer_roots(coeffs: &[Rat]) -> Vec<i64> {
    let mut cs: Vec<Rat> = coeffs.to_vec();
    while cs.last().map(|c| c.is_zero()).unwrap_or(false) {
        cs.pop();
    }
    if cs.len() <= 1 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    let mut low = 0;
    while cs[low].is_zero() {
        low += 1;
    }
    if low > 0 {
        roots.push(0);
    }
    let cs = &cs[low..];
    if cs.len() > 1 {
        // Cauchy bound on root magnitude.
        let lead = cs.last().unwrap().abs();
        let mut bound = Rat::zero();
        for c in &cs[..cs.len() - 1] {
            let q = c.abs() / &lead;
            if q > bound {
                bound = q;
            }
        }
        let bound = (bound + Rat::one()).ceil().to_integer().to_i64().unwrap_or(i64::MAX);
        let eval = |x: i64| -> bool {
            let xr = rat_int(x);
            let mut acc = Rat::zero();
            for c in cs.iter().rev() {
                acc = acc * &xr + c;
            }
            acc.is_zero()
        };
        if bound <= 100_000 {
            for x in -bound..=bound {
                if x != 0 && eval(x) {
                    roots.push(x);
                }
            }
        } else {
            // Rational root test on divisors of the trailing coefficient.
            let lcm = cs.iter().fold(BigInt::one(), |acc, c| num_integer::lcm(acc, c.denom().clone()));
            let t = (&cs[0] * Rat::from_integer(lcm)).to_integer().abs();
            if let Some(t) = t.to_i64() {
                let mut dv = 1i64;
                while dv * dv <= t {
                    if t % dv == 0 {
                        for cand in [dv, t / dv] {
                            for s in [cand, -cand] {
                                if eval(s) && !roots.contains(&s) {
                                    roots.push(s);
                                }
                            }
                        }
                    }
                    dv += 1;
                }
            }
        }
    }
    roots.sort();
    roots.dedup();
    roots
}
