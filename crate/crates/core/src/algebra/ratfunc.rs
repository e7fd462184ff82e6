use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::poly::{gcd, MultiPoly};
use super::{AlgebraError, Rat};

/// A quotient of polynomials kept in lowest terms with a monic denominator.
///
/// Every constructor and arithmetic operation re-normalizes, so structural
/// equality coincides with equality of rational functions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: MultiPoly, den: MultiPoly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (
                    num.div_exact(&g).expect("gcd divides numerator"),
                    den.div_exact(&g).expect("gcd divides denominator"),
                )
            }
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = Rat::one() / lc;
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn zero() -> Self {
        RatFunc {
            num: MultiPoly::zero(),
            den: MultiPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(MultiPoly::one())
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RatFunc {
            num: p,
            den: MultiPoly::one(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc::from_poly(MultiPoly::constant(c))
    }

    pub fn int(c: i64) -> Self {
        RatFunc::from_poly(MultiPoly::int(c))
    }

    pub fn var(name: &str) -> Self {
        RatFunc::from_poly(MultiPoly::var(name))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_poly(&self) -> Option<MultiPoly> {
        self.den
            .as_constant()
            .map(|c| self.num.scale(&(Rat::one() / c)))
    }

    pub fn as_constant(&self) -> Option<Rat> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn has_var(&self, var: &str) -> bool {
        self.num.has_var(var) || self.den.has_var(var)
    }

    /// Sign of the numerator's graded-lex leading coefficient.
    pub fn is_negative(&self) -> bool {
        self.num.leading_coeff().is_negative()
    }

    pub fn inv(&self) -> Result<Self, AlgebraError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i64) -> Result<Self, AlgebraError> {
        if e >= 0 {
            Ok(RatFunc {
                num: self.num.pow(e as u32),
                den: self.den.pow(e as u32),
            }
            .renormalize())
        } else {
            self.inv()?.pow(-e)
        }
    }

    fn renormalize(self) -> Self {
        // Powers of a reduced fraction stay reduced; only the leading
        // coefficient of the denominator needs fixing.
        let lc = self.den.leading_coeff();
        if lc.is_one() {
            self
        } else {
            let inv = Rat::one() / lc;
            RatFunc {
                num: self.num.scale(&inv),
                den: self.den.scale(&inv),
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn checked_div(&self, other: &RatFunc) -> Result<Self, AlgebraError> {
        if other.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(RatFunc::normalized(
            &self.num * &other.den,
            &self.den * &other.num,
        ))
    }

    /// Evaluates at a point binding every variable. A vanishing denominator
    /// yields 0, the convention used throughout for poles.
    pub fn eval(&self, point: &HashMap<String, Rat>) -> Result<Rat, AlgebraError> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            // Still report unbound variables in the numerator.
            self.num.eval(point)?;
            return Ok(Rat::zero());
        }
        Ok(self.num.eval(point)? / d)
    }

    /// Binds some variables. A denominator that vanishes identically under
    /// the binding gives 0, matching the pole convention of `eval`.
    pub fn partial_eval(&self, point: &HashMap<String, Rat>) -> RatFunc {
        let d = self.den.partial_eval(point);
        if d.is_zero() {
            return RatFunc::zero();
        }
        RatFunc::normalized(self.num.partial_eval(point), d)
    }

    pub fn eval_var(&self, var: &str, value: &Rat) -> RatFunc {
        let mut point = HashMap::new();
        point.insert(var.to_string(), value.clone());
        self.partial_eval(&point)
    }

    pub fn subst_poly(&self, var: &str, p: &MultiPoly) -> Result<RatFunc, AlgebraError> {
        RatFunc::new(self.num.subst(var, p), self.den.subst(var, p))
    }

    /// Substitutes `var := r` for a rational function `r`.
    pub fn subst(&self, var: &str, r: &RatFunc) -> Result<RatFunc, AlgebraError> {
        if !self.has_var(var) {
            return Ok(self.clone());
        }
        if r.den.is_one() {
            return self.subst_poly(var, &r.num);
        }
        let d = self.num.degree(var).max(self.den.degree(var));
        let hom = |p: &MultiPoly| -> MultiPoly {
            let cs = p.coeffs_in(var);
            let mut acc = MultiPoly::zero();
            for (i, c) in cs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let t = &(c * &r.num.pow(i as u32)) * &r.den.pow(d - i as u32);
                acc = &acc + &t;
            }
            acc
        };
        RatFunc::new(hom(&self.num), hom(&self.den))
    }

    /// `f(var + m)`.
    pub fn shift(&self, var: &str, m: i64) -> RatFunc {
        if m == 0 || !self.has_var(var) {
            return self.clone();
        }
        // Shifting preserves coprimality, so no gcd is needed.
        RatFunc {
            num: self.num.shift(var, m),
            den: self.den.shift(var, m),
        }
        .renormalize()
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> Result<RatFunc, AlgebraError> {
        RatFunc::new(self.num.rename(f), self.den.rename(f))
    }

    /// Numerator and denominator rescaled to coprime integer coefficients,
    /// the form used for display.
    pub fn display_parts(&self) -> (MultiPoly, MultiPoly) {
        if self.den.is_one() {
            return (self.num.clone(), self.den.clone());
        }
        let cn = self.num.rational_content();
        let cd = self.den.rational_content();
        let c = cn / cd;
        let n = self.num.scale(&(Rat::one() / self.num.rational_content()));
        let d = self.den.scale(&(Rat::one() / self.den.rational_content()));
        // c = p/q goes into numerator and denominator respectively.
        let p = Rat::from_integer(c.numer().clone());
        let q = Rat::from_integer(c.denom().clone());
        (n.scale(&p), d.scale(&q))
    }

    pub fn to_plain(&self) -> String {
        if self.den.is_one() {
            return self.num.to_plain();
        }
        let (n, d) = self.display_parts();
        let ns = n.to_plain();
        let ds = d.to_plain();
        let simple_den = d.num_terms() == 1
            && d.leading_coeff().is_one()
            && d.terms().next().map(|(m, _)| m.pairs().len() == 1).unwrap_or(false);
        let ns = if n.num_terms() > 1 { format!("({ns})") } else { ns };
        let ds = if simple_den || d.is_constant() { ds } else { format!("({ds})") };
        format!("{ns}/{ds}")
    }

    pub fn to_latex(&self) -> String {
        if self.den.is_one() {
            return self.num.to_latex();
        }
        let (n, d) = self.display_parts();
        format!("\\frac{{{}}}{{{}}}", n.to_latex(), d.to_latex())
    }
}

impl From<MultiPoly> for RatFunc {
    fn from(p: MultiPoly) -> Self {
        RatFunc::from_poly(p)
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::normalized(&self.num + &rhs.num, self.den.clone());
        }
        if self.den.is_one() {
            return RatFunc::normalized(&(&self.num * &rhs.den) + &rhs.num, rhs.den.clone());
        }
        if rhs.den.is_one() {
            return RatFunc::normalized(&self.num + &(&rhs.num * &self.den), self.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        let a = self.den.div_exact(&g).expect("gcd divides");
        let b = rhs.den.div_exact(&g).expect("gcd divides");
        RatFunc::normalized(
            &(&self.num * &b) + &(&rhs.num * &a),
            &(&a * &b) * &g,
        )
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        // Cross-cancel first to keep the intermediate sizes small.
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g1).expect("gcd divides");
        let n2 = rhs.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        RatFunc {
            num: &n1 * &n2,
            den: &d1 * &d2,
        }
        .renormalize()
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    /// Panics on division by the zero function; use `checked_div` otherwise.
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("division by zero polynomial")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $f(self, rhs: RatFunc) -> RatFunc {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain())
    }
}

impl serde::Serialize for RatFunc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_plain())
    }
}
