use std::collections::HashMap;

use num_traits::Zero;
use proptest::prelude::*;

use telesum_core::algebra::{gcd, rat, solve_linear_system, AlgebraError, MultiPoly, Rat, RatFunc};
use telesum_core::expr::parse;

fn poly(s: &str) -> MultiPoly {
    parse(s).unwrap().to_ratfunc().unwrap().as_poly().unwrap()
}

fn point(pairs: &[(&str, Rat)]) -> HashMap<String, Rat> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[test]
fn normalization_cancels_common_factors() {
    let f = RatFunc::new(poly("k^2-1"), poly("k-1")).unwrap();
    assert_eq!(f, RatFunc::from_poly(poly("k+1")));
    assert!(f.den().is_one());
}

#[test]
fn zero_numerator_gives_zero_over_one() {
    let f = RatFunc::new(MultiPoly::zero(), poly("k")).unwrap();
    assert!(f.is_zero());
    assert!(f.den().is_one());
}

#[test]
fn constant_denominator_moves_into_numerator() {
    let f = RatFunc::new(poly("2*k+2"), MultiPoly::int(4)).unwrap();
    assert!(f.den().is_one());
    assert_eq!(f.num(), &poly("1/2*k+1/2"));
}

#[test]
fn zero_denominator_is_an_error() {
    assert_eq!(RatFunc::new(poly("k"), MultiPoly::zero()), Err(AlgebraError::DivisionByZero));
}

#[test]
fn evaluation_at_a_pole_is_zero() {
    let f = RatFunc::new(MultiPoly::one(), poly("k-2")).unwrap();
    assert_eq!(f.eval(&point(&[("k", rat(2, 1))])).unwrap(), Rat::zero());
}

#[test]
fn evaluation_of_polynomials_and_quotients() {
    let f = RatFunc::from_poly(poly("k+1"));
    assert_eq!(f.eval(&point(&[("k", rat(4, 1))])).unwrap(), rat(5, 1));
    let g = RatFunc::new(poly("n-k"), poly("n+1")).unwrap();
    assert_eq!(g.eval(&point(&[("n", rat(3, 1)), ("k", rat(1, 1))])).unwrap(), rat(1, 2));
}

#[test]
fn evaluation_with_an_unbound_variable_fails() {
    let f = RatFunc::from_poly(poly("n+k"));
    assert!(matches!(f.eval(&point(&[("k", rat(1, 1))])), Err(AlgebraError::UnboundVariable(_))));
}

#[test]
fn linear_system_identity_matrix() {
    let a = vec![vec![RatFunc::one(), RatFunc::zero()], vec![RatFunc::zero(), RatFunc::one()]];
    let b = vec![RatFunc::one(), RatFunc::var("n")];
    let s = solve_linear_system(&a, &b).unwrap();
    assert_eq!(s.particular, b);
    assert!(s.nullspace.is_empty());
}

#[test]
fn linear_system_underdetermined() {
    let a = vec![vec![RatFunc::one(), RatFunc::one()]];
    let s = solve_linear_system(&a, &[RatFunc::one()]).unwrap();
    assert_eq!(s.particular, vec![RatFunc::one(), RatFunc::zero()]);
    assert_eq!(s.nullspace, vec![vec![RatFunc::int(-1), RatFunc::one()]]);
}

#[test]
fn linear_system_inconsistent() {
    let a = vec![vec![RatFunc::one()], vec![RatFunc::one()]];
    assert!(solve_linear_system(&a, &[RatFunc::one(), RatFunc::int(2)]).is_none());
}

#[test]
fn gcd_examples() {
    assert_eq!(gcd(&poly("k^2-1"), &poly("k+1")), poly("k+1"));
    assert_eq!(gcd(&poly("k"), &poly("n")), MultiPoly::one());
    let g = gcd(&poly("(k+n)*(k+1)"), &poly("(k+n)*k"));
    assert_eq!(g, poly("k+n"));
    assert!(poly("(k+n)*(k+1)").div_exact(&g).is_some());
    assert!(poly("(k+n)*k").div_exact(&g).is_some());
    assert_eq!(gcd(&poly("2*k+4"), &MultiPoly::zero()), poly("k+2"));
}

// Dense univariate polynomials in k with small coefficients, low degree first.
fn dense() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, 1..4)
}

fn from_dense(c: &[i64]) -> MultiPoly {
    c.iter().enumerate().fold(MultiPoly::zero(), |acc, (i, x)| {
        &acc + &MultiPoly::var("k").pow(i as u32).scale(&rat(*x, 1))
    })
}

/// Euclid's algorithm on dense coefficient vectors, independent of the
/// library's multivariate gcd. Returns the monic gcd, low degree first.
fn euclid(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    fn trim(mut v: Vec<Rat>) -> Vec<Rat> {
        while v.last().is_some_and(|x| x.is_zero()) {
            v.pop();
        }
        v
    }
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let mut r = x.clone();
        while r.len() >= y.len() && !r.is_empty() {
            let f = r.last().unwrap() / y.last().unwrap();
            let off = r.len() - y.len();
            for (i, c) in y.iter().enumerate() {
                r[off + i] -= &f * c;
            }
            r = trim(r);
            if r.len() < y.len() {
                break;
            }
        }
        x = y;
        y = r;
    }
    if let Some(lead) = x.last().cloned() {
        x.iter_mut().for_each(|c| *c /= &lead);
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gcd_matches_euclid(a in dense(), b in dense(), f in dense()) {
        let pa = &from_dense(&a) * &from_dense(&f);
        let pb = &from_dense(&b) * &from_dense(&f);
        let g = gcd(&pa, &pb);
        let dense_a: Vec<Rat> = pa.coeffs_in("k").iter().map(|c| c.as_constant().unwrap_or_default()).collect();
        let dense_b: Vec<Rat> = pb.coeffs_in("k").iter().map(|c| c.as_constant().unwrap_or_default()).collect();
        let expect = euclid(&dense_a, &dense_b);
        if expect.is_empty() {
            prop_assert!(g.is_zero());
        } else {
            let got: Vec<Rat> = g.coeffs_in("k").iter().map(|c| c.as_constant().unwrap_or_default()).collect();
            prop_assert_eq!(got, expect);
        }
    }

    #[test]
    fn gcd_divides_with_coprime_cofactors(a in dense(), b in dense(), f in dense()) {
        let pa = &from_dense(&a) * &from_dense(&f);
        let pb = &from_dense(&b) * &from_dense(&f);
        prop_assume!(!pa.is_zero() && !pb.is_zero());
        let g = gcd(&pa, &pb);
        let qa = pa.div_exact(&g).expect("gcd divides a");
        let qb = pb.div_exact(&g).expect("gcd divides b");
        prop_assert!(gcd(&qa, &qb).is_one());
    }

    #[test]
    fn multiplying_and_dividing_by_g_is_identity(a in dense(), b in dense(), c in dense(), d in dense()) {
        let (pb, pd) = (from_dense(&b), from_dense(&d));
        prop_assume!(!pb.is_zero() && !pd.is_zero());
        let f = RatFunc::new(from_dense(&a), pb).unwrap();
        let g = RatFunc::new(from_dense(&c), pd).unwrap();
        prop_assume!(!g.is_zero());
        let back = (&(&f * &g)).checked_div(&g).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in dense(), b in dense(), c in dense(), d in dense(), x in -6i64..=6) {
        let (pb, pd) = (from_dense(&b), from_dense(&d));
        prop_assume!(!pb.is_zero() && !pd.is_zero());
        let f = RatFunc::new(from_dense(&a), pb).unwrap();
        let g = RatFunc::new(from_dense(&c), pd).unwrap();
        let pt = point(&[("k", rat(x, 1))]);
        let nonpole = |h: &RatFunc| !h.den().eval(&pt).unwrap().is_zero();
        prop_assume!(nonpole(&f) && nonpole(&g));
        let (fv, gv) = (f.eval(&pt).unwrap(), g.eval(&pt).unwrap());
        let sum = &f + &g;
        let prod = &f * &g;
        if nonpole(&sum) {
            prop_assert_eq!(sum.eval(&pt).unwrap(), &fv + &gv);
        }
        if nonpole(&prod) {
            prop_assert_eq!(prod.eval(&pt).unwrap(), &fv * &gv);
        }
    }

    #[test]
    fn linear_solutions_reproduce_the_right_hand_side(
        rows in 1usize..=6,
        cols in 1usize..=6,
        entries in prop::collection::vec(-3i64..=3, 36),
        rhs in prop::collection::vec(-3i64..=3, 6),
        with_n in any::<bool>(),
    ) {
        let n = RatFunc::var("n");
        let entry = |i: usize, j: usize| {
            let e = RatFunc::int(entries[i * 6 + j]);
            if with_n && (i + j) % 3 == 0 { &e * &n } else { e }
        };
        let a: Vec<Vec<RatFunc>> = (0..rows).map(|i| (0..cols).map(|j| entry(i, j)).collect()).collect();
        let b: Vec<RatFunc> = (0..rows).map(|i| RatFunc::int(rhs[i])).collect();
        let apply = |x: &[RatFunc]| -> Vec<RatFunc> {
            a.iter().map(|row| row.iter().zip(x).fold(RatFunc::zero(), |acc, (p, q)| &acc + &(p * q))).collect()
        };
        if let Some(s) = solve_linear_system(&a, &b) {
            prop_assert_eq!(apply(&s.particular), b.clone());
            for v in &s.nullspace {
                prop_assert!(apply(v).iter().all(|x| x.is_zero()));
            }
            prop_assert_eq!(s.nullspace.len() + s.pivot_columns.len(), cols);
        } else {
            // Inconsistent: the augmented matrix must have larger rank. Check
            // via the homogeneous system in one extra unknown.
            let aug: Vec<Vec<RatFunc>> = a.iter().zip(&b).map(|(r, x)| {
                let mut r = r.clone();
                r.push(-x.clone());
                r
            }).collect();
            let h = solve_linear_system(&aug, &vec![RatFunc::zero(); rows]).unwrap();
            prop_assert!(h.nullspace.iter().all(|v| v[cols].is_zero()));
        }
    }
}
