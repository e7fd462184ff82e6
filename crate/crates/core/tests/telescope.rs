use proptest::prelude::*;

use telesum_core::algebra::{rat, MultiPoly, Rat, RatFunc};
use telesum_core::diffring::{from_expression, Tower, TowerElem};
use telesum_core::expr::parse;
use telesum_core::oracle::{eval_sequence, falsify_nonexistence, Binding};
use telesum_core::telescope::{
    certificate_holds, extended_gosper, gosper, param_telescope, sigma_layer_telescope, telescope_pieces, TeleProblem,
};

fn rf(s: &str) -> RatFunc {
    parse(s).unwrap().to_ratfunc().unwrap()
}

fn poly(s: &str) -> MultiPoly {
    rf(s).as_poly().unwrap()
}

#[test]
fn factorial_weight_telescopes_to_the_factorial() {
    // t = k*k!, t(k+1)/t(k) = (k+1)^2/k, g = k! = t/k.
    let sol = gosper(&rf("(k+1)^2/k"), "k").unwrap().expect("summable");
    assert_eq!(sol.certificate(), &rf("1/k"));
}

#[test]
fn binomial_is_not_gosper_summable() {
    assert!(gosper(&rf("(n-k)/(k+1)"), "k").unwrap().is_none());
    let r = falsify_nonexistence(&parse("binom(n,k)").unwrap(), "k", 8);
    assert!(r.passed(), "{}", r.summary());
}

#[test]
fn constant_summand() {
    let sol = gosper(&RatFunc::one(), "k").unwrap().unwrap();
    assert_eq!(sol.certificate(), &rf("k"));
}

#[test]
fn zero_kernel_is_an_error() {
    assert!(gosper(&RatFunc::zero(), "k").is_err());
}

#[test]
fn extended_gosper_on_shifted_binomial() {
    let (p, sol) = extended_gosper(&rf("(n-k-1)/(k+2)"), "k", 1).unwrap().unwrap();
    assert_eq!(p, poly("n-2-2*k"));
    assert_eq!(sol.certificate(), &rf("k+1"));
}

#[test]
fn extended_gosper_trivial_cases() {
    let (p, sol) = extended_gosper(&RatFunc::one(), "k", 0).unwrap().unwrap();
    assert_eq!(p, MultiPoly::one());
    assert_eq!(sol.certificate(), &rf("k"));

    // t = 1/(k(k+1)), g = -1/k = -(k+1) t.
    let (p, sol) = extended_gosper(&rf("k/(k+2)"), "k", 0).unwrap().unwrap();
    assert_eq!(p, MultiPoly::one());
    assert_eq!(sol.certificate(), &rf("-(k+1)"));
}

#[test]
fn parameterized_binomial_constraint() {
    let p = TeleProblem::single("k", rf("(n-k-1)/(k+2)"), vec![rf("k+1"), rf("-2")], vec!["c".into()]);
    let sol = param_telescope(&p).unwrap().unwrap();
    assert!(certificate_holds(&p, &sol));
    assert_eq!(sol.constants["c"], rf("n/4"));
    assert_eq!(sol.certificate(), &rf("-(k+1)/2"));
}

#[test]
fn parameterized_squared_binomial_constraint() {
    let ratio = rf("((n-k-1)/(k+2))^2");
    let p = TeleProblem::single("k", ratio, vec![rf("k+1"), rf("-2")], vec!["c".into()]);
    let sol = param_telescope(&p).unwrap().unwrap();
    assert!(certificate_holds(&p, &sol));
    assert_eq!(sol.constants["c"], rf("n/4"));
    // -(n-k)^2/(2n) binom(n,k)^2 written against t = binom(n,k+1)^2.
    assert_eq!(sol.certificate(), &rf("-(k+1)^2/(2*n)"));
}

#[test]
fn pieces_interface() {
    let pieces = [parse("(k+1)*binom(n,k+1)").unwrap(), parse("-2*binom(n,k+1)").unwrap()];
    let sol = telescope_pieces(&pieces, "k").unwrap().unwrap();
    assert_eq!(sol.constants["c"], rf("n/4"));
    let g = &sol.telescoper;
    let want = parse("-1/2*(k+1)*binom(n,k+1)").unwrap();
    let b = Binding::new().with_int("n", 9);
    for i in 0..12 {
        assert_eq!(eval_sequence(g, &b, "k", i).unwrap(), eval_sequence(&want, &b, "k", i).unwrap());
    }
}

#[test]
fn harmonic_constraint_has_zero_constant() {
    let pieces = [parse("(k+1)*harmonic(k+1)").unwrap(), parse("-2*harmonic(k+1)").unwrap()];
    let sol = telescope_pieces(&pieces, "k").unwrap().unwrap();
    assert_eq!(sol.constants["c"], RatFunc::zero());
    // Up to an additive constant, g = (-k^2 + 2k(k+1)H_k + k - 5)/4.
    let want = parse("(-k^2 + 2*k*(k+1)*harmonic(k) + k - 5)/4").unwrap();
    let b = Binding::new();
    let offset = eval_sequence(&sol.telescoper, &b, "k", 0).unwrap() - eval_sequence(&want, &b, "k", 0).unwrap();
    for i in 0..=20 {
        let got = eval_sequence(&sol.telescoper, &b, "k", i).unwrap();
        assert_eq!(got - &offset, eval_sequence(&want, &b, "k", i).unwrap());
    }
}

fn harmonic_tower() -> Tower {
    from_expression(&parse("harmonic(k)").unwrap(), "k").unwrap().tower
}

#[test]
fn sum_of_harmonic_numbers() {
    let t = harmonic_tower();
    let s = TowerElem::gen(0);
    let f = t.sigma(&s);
    let sol = sigma_layer_telescope(&f, &t, &[]).unwrap().unwrap();
    assert_eq!(t.sigma(&sol.g).sub(&sol.g), f);
    let want = s.scale(&rf("k+1")).sub(&TowerElem::from_ratfunc(rf("k")));
    assert_eq!(sol.g, want);
    // Independent check of sum_{j=1}^k H_j = (k+1) H_k - k.
    let h = |k: i64| (1..=k).map(|j| rat(1, j)).sum::<Rat>();
    for k in 0..=20 {
        let lhs: Rat = (1..=k).map(h).sum();
        assert_eq!(lhs, rat(k + 1, 1) * h(k) - rat(k, 1));
    }
}

#[test]
fn shifted_sum_generator_without_a_closed_form() {
    // s = sum_{j<=k} 1/(j+1)^2; the sum of s needs H_k, which is not in the ring.
    let emb = from_expression(&parse("Sum(j,0,k,1/(j+1)^2)").unwrap(), "k").unwrap();
    assert_eq!(emb.tower.len(), 1);
    let f = emb.tower.sigma(&emb.elem);
    assert!(sigma_layer_telescope(&f, &emb.tower, &[]).unwrap().is_none());
}

#[test]
fn sum_of_binomial_partial_sums_closes() {
    // With binom(n,k) in the ring, sum_j S(j) has a closed form.
    let emb = from_expression(&parse("Sum(j,0,k,binom(n,j))").unwrap(), "k").unwrap();
    let t = &emb.tower;
    let f = t.sigma(&emb.elem);
    let sol = sigma_layer_telescope(&f, t, &[]).unwrap().unwrap();
    assert_eq!(t.sigma(&sol.g).sub(&sol.g), f);
    let b = TowerElem::gen(0).scale(&rf("(n-k)/2"));
    let s = TowerElem::gen(1).scale(&rf("k+1-n/2"));
    assert_eq!(sol.g, b.add(&s));
}

#[test]
fn zero_telescopes_to_zero() {
    let sol = sigma_layer_telescope(&TowerElem::zero(), &harmonic_tower(), &[]).unwrap().unwrap();
    assert!(sol.g.is_zero());
}

#[test]
fn degree_bound_for_squared_harmonic() {
    let t = harmonic_tower();
    let s = TowerElem::gen(0);
    let f = t.pow(&s, 2);
    let sol = sigma_layer_telescope(&f, &t, &[]).unwrap().unwrap();
    assert_eq!(t.sigma(&sol.g).sub(&sol.g), f);
    assert!(sol.g.degree_in(0) <= 3);
}

const RATIOS: [&str; 6] = ["1", "(n-k)/(k+1)", "k+1", "2", "1/(k+1)", "(k+1)^2/(k+3)"];

fn small_poly() -> impl Strategy<Value = MultiPoly> {
    (prop::collection::vec(-3i64..=3, 1..4), any::<bool>()).prop_map(|(cs, with_n)| {
        let k = MultiPoly::var("k");
        cs.iter().enumerate().fold(MultiPoly::zero(), |acc, (i, c)| {
            let mut c = MultiPoly::int(*c);
            if with_n && i == 0 {
                c = &c * &MultiPoly::var("n");
            }
            &acc + &(&c * &k.pow(i as u32))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // Plant g = R t, derive the summand coefficient R(k+1) r - R and ask the
    // solver to recover a certificate for it.
    #[test]
    fn planted_certificates_are_recovered(
        ratio in 0..RATIOS.len(),
        num in small_poly(),
        den_shift in 1i64..=3,
        rational in any::<bool>(),
    ) {
        let r = rf(RATIOS[ratio]);
        let den = if rational { poly(&format!("k+{den_shift}")) } else { MultiPoly::one() };
        let planted = RatFunc::new(num, den).unwrap();
        let coeff = &(&planted.shift("k", 1) * &r) - &planted;
        prop_assume!(!coeff.is_zero());
        let p = TeleProblem::single("k", r, vec![coeff.clone()], Vec::new());
        let sol = param_telescope(&p).unwrap();
        prop_assert!(sol.is_some(), "no certificate for {:?}", coeff);
        let sol = sol.unwrap();
        prop_assert!(certificate_holds(&p, &sol));
        let got = &(&sol.certificate().shift("k", 1) * &p.kernels[0].ratio) - sol.certificate();
        prop_assert_eq!(got, coeff);
    }
}
