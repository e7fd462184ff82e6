use std::collections::HashMap;

use num_traits::Zero;
use proptest::prelude::*;

use telesum_core::algebra::{rat, Rat, RatFunc};
use telesum_core::diffring::{
    check_sigma_ext, from_expression, to_expression, Admissibility, ExtKind, Tower, TowerElem,
};
use telesum_core::expr::parse;
use telesum_core::oracle::{eval_sequence, Binding};

fn rf(s: &str) -> RatFunc {
    parse(s).unwrap().to_ratfunc().unwrap()
}

fn harmonic_tower() -> Tower {
    Tower::base("k")
        .extend_sigma("s", TowerElem::from_ratfunc(rf("1/(k+1)")), RatFunc::zero(), parse("harmonic(k)").unwrap())
        .unwrap()
}

fn params(n: Rat) -> HashMap<String, Rat> {
    [("n".to_string(), n)].into_iter().collect()
}

#[test]
fn sigma_on_the_harmonic_generator() {
    let t = harmonic_tower();
    let s = TowerElem::gen(0);
    let expect = s.add(&TowerElem::from_ratfunc(rf("1/(k+1)")));
    assert_eq!(t.sigma(&s), expect);

    let ks = s.scale(&rf("k"));
    assert_eq!(t.sigma(&ks), t.mul(&TowerElem::from_ratfunc(rf("k+1")), &expect));

    let c = TowerElem::from_ratfunc(rf("n^2+1"));
    assert_eq!(t.sigma(&c), c);
}

#[test]
fn harmonic_evaluation() {
    let t = harmonic_tower();
    let s = TowerElem::gen(0);
    assert_eq!(t.ev(&s, 3, &HashMap::new()).unwrap(), rat(11, 6));
    let ks = s.scale(&rf("k"));
    for i in 0..10 {
        let h: Rat = (1..=i).map(|j| rat(1, j)).sum();
        assert_eq!(t.ev(&ks, i, &HashMap::new()).unwrap(), h * rat(i, 1));
    }
}

#[test]
fn binomial_product_generator() {
    let t = Tower::base("k").extend_pi("b", rf("(n-k)/(k+1)"), parse("binom(n,k)").unwrap()).unwrap();
    assert_eq!(t.ev(&TowerElem::gen(0), 2, &params(rat(4, 1))).unwrap(), rat(6, 1));
}

#[test]
fn sign_generator_squares_to_one() {
    let t = Tower::base("k").extend_r("m", parse("(-1)^k").unwrap());
    let m = TowerElem::gen(0);
    assert_eq!(t.mul(&m, &m), TowerElem::one());
    assert_eq!(t.sigma(&m), m.neg());
    for i in 0..6 {
        let sign = if i % 2 == 0 { 1 } else { -1 };
        assert_eq!(t.ev(&m, i, &HashMap::new()).unwrap(), rat(sign, 1));
    }
}

#[test]
fn reciprocal_is_a_sigma_extension() {
    let beta = TowerElem::from_ratfunc(rf("1/(k+1)"));
    assert_eq!(check_sigma_ext(&beta, &Tower::base("k")).unwrap(), Admissibility::Admissible);
}

#[test]
fn factorial_weight_collapses() {
    let t = Tower::base("k").extend_pi("f", rf("k+1"), parse("fact(k)").unwrap()).unwrap();
    let beta = TowerElem::gen(0).scale(&rf("k"));
    let Admissibility::Inadmissible(g) = check_sigma_ext(&beta, &t).unwrap() else {
        panic!("k*k! telescopes")
    };
    assert_eq!(t.sigma(&g).sub(&g), beta);
    // g is k! up to a constant.
    let diff = g.sub(&TowerElem::gen(0));
    assert!(diff.as_ratfunc().is_some_and(|r| r.as_constant().is_some()), "{}", t.render(&g));
}

#[test]
fn shifted_binomial_is_a_sigma_extension() {
    let t = Tower::base("k").extend_pi("b", rf("(n-k)/(k+1)"), parse("binom(n,k)").unwrap()).unwrap();
    let beta = t.sigma(&TowerElem::gen(0));
    assert_eq!(check_sigma_ext(&beta, &t).unwrap(), Admissibility::Admissible);
}

#[test]
fn binomial_partial_sum_embeds_as_a_sum_generator() {
    let emb = from_expression(&parse("Sum(j,0,k,binom(n,j))").unwrap(), "k").unwrap();
    let kinds: Vec<_> = emb.tower.exts.iter().map(|e| &e.kind).collect();
    assert_eq!(kinds.len(), 2);
    assert!(matches!(kinds[0], ExtKind::Pi { .. }));
    assert!(matches!(kinds[1], ExtKind::Sigma { .. }));
    assert_eq!(emb.elem, TowerElem::gen(1));
}

#[test]
fn harmonic_number_embeds_as_a_sum_generator() {
    let emb = from_expression(&parse("harmonic(k)").unwrap(), "k").unwrap();
    assert_eq!(emb.tower.len(), 1);
    assert!(emb.tower.is_sigma(0));
    assert_eq!(emb.elem, TowerElem::gen(0));
    assert_eq!(to_expression(&emb.elem, &emb.tower).unwrap(), parse("harmonic(k)").unwrap());
}

#[test]
fn collapsible_sum_adds_no_sum_generator() {
    let e = parse("Sum(j,0,k,j*fact(j))").unwrap();
    let emb = from_expression(&e, "k").unwrap();
    assert!((0..emb.tower.len()).all(|i| !emb.tower.is_sigma(i)));
    // (k+1)! - 1
    let f = TowerElem::gen(0);
    let expect = emb.tower.mul(&f, &TowerElem::from_ratfunc(rf("k+1"))).sub(&TowerElem::one());
    assert_eq!(emb.elem, expect);
}

#[test]
fn rational_elements_print_as_coefficients() {
    let back = to_expression(&TowerElem::from_ratfunc(rf("1/(k+1)")), &Tower::base("k")).unwrap();
    assert_eq!(back, parse("1/(k+1)").unwrap());
}

const ATOMS: [&str; 10] = [
    "binom(n,k)",
    "harmonic(k)",
    "(-1)^k",
    "fact(k)",
    "pow(2,k)",
    "Sum(j,0,k,binom(n,j))",
    "Sum(j,0,k,(-1)^j*binom(n,j))",
    "Sum(j,0,k,harmonic(j)/(j+1))",
    "Sum(j,0,k,invbinom(n,j))",
    "k*binom(n,k)*Sum(j,0,k,binom(n,j))^2 + harmonic(k+1)",
];

#[test]
fn expression_round_trip_agrees_with_the_oracle() {
    for n in [rat(5, 1), rat(7, 2)] {
        let b = Binding::new().with_var("n", n.clone());
        for a in ATOMS {
            let e = parse(a).unwrap();
            let emb = from_expression(&e, "k").unwrap_or_else(|err| panic!("{a}: {err}"));
            let back = to_expression(&emb.elem, &emb.tower).unwrap();
            for i in 0..=25 {
                let want = eval_sequence(&e, &b, "k", i).unwrap();
                assert_eq!(eval_sequence(&back, &b, "k", i).unwrap(), want, "{a} at {i}");
                assert_eq!(emb.tower.ev(&emb.elem, i, &params(n.clone())).unwrap(), want, "{a} at {i}");
            }
        }
    }
}

// A tower with a Π-, an R- and two Σ-generators; n is sampled off the
// integers so the binomial never vanishes.
fn big_tower() -> Tower {
    let e = parse("(-1)^k*Sum(j,0,k,binom(n,j)) + harmonic(k)").unwrap();
    from_expression(&e, "k").unwrap().tower
}

const COEFFS: [&str; 6] = ["1", "k", "n-k", "1/(k+1)", "(k+n)/(k+2)", "-3/2"];

fn element(t: &Tower) -> impl Strategy<Value = TowerElem> {
    let len = t.len();
    let is_pi: Vec<bool> = t.exts.iter().map(|e| matches!(e.kind, ExtKind::Pi { .. })).collect();
    let monomial = (prop::collection::vec(0i32..=2, len), prop::collection::vec(any::<bool>(), len), 0..COEFFS.len())
        .prop_map(move |(exps, negate, c)| {
            let exps: Vec<i32> = exps
                .iter()
                .zip(&negate)
                .zip(&is_pi)
                .map(|((x, neg), pi)| if *pi && *neg { -x } else { *x })
                .collect();
            TowerElem::monomial(exps, rf(COEFFS[c]))
        });
    let t = t.clone();
    // Multiplying by one reduces sign exponents to 0 or 1.
    prop::collection::vec(monomial, 1..4)
        .prop_map(move |ms| t.mul(&TowerElem::one(), &ms.iter().fold(TowerElem::zero(), |a, m| a.add(m))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sigma_is_a_ring_automorphism((x, y) in (element(&big_tower()), element(&big_tower()))) {
        let t = big_tower();
        prop_assert_eq!(t.sigma(&x.add(&y)), t.sigma(&x).add(&t.sigma(&y)));
        prop_assert_eq!(t.sigma(&t.mul(&x, &y)), t.mul(&t.sigma(&x), &t.sigma(&y)));
        prop_assert_eq!(t.sigma_inv(&t.sigma(&x)), x.clone());
        prop_assert_eq!(t.sigma(&t.sigma_inv(&x)), x);
    }

    #[test]
    fn evaluation_commutes_with_sigma(x in element(&big_tower()), i in 0i64..=25) {
        let t = big_tower();
        let p = params(rat(7, 2));
        prop_assert_eq!(t.ev(&t.sigma(&x), i, &p).unwrap(), t.ev(&x, i + 1, &p).unwrap());
    }

    #[test]
    fn sign_exponents_stay_reduced((x, y) in (element(&big_tower()), element(&big_tower()))) {
        let t = big_tower();
        let r = t.exts.iter().position(|e| matches!(e.kind, ExtKind::R)).unwrap();
        let p = t.mul(&x, &y);
        prop_assert!(p.terms().all(|(e, _)| e.get(r).copied().unwrap_or(0) <= 1));
    }

    #[test]
    fn constants_do_not_depend_on_the_index(num in -9i64..=9, den in 1i64..=9, i in 0i64..=25) {
        let t = big_tower();
        let c = TowerElem::from_ratfunc(RatFunc::constant(rat(num, den)));
        prop_assert_eq!(t.sigma(&c), c.clone());
        prop_assert_eq!(t.ev(&c, i, &params(rat(7, 2))).unwrap(), rat(num, den));
        prop_assert!(!t.ev(&c, i, &params(rat(7, 2))).unwrap().is_zero() || num == 0);
    }
}
