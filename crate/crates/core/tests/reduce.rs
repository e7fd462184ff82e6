use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use telesum_core::algebra::{rat, Rat, RatFunc};
use telesum_core::expr::{parse, substitute, substitute_param, to_plain, SumExpr};
use telesum_core::oracle::{check_identity, eval, eval_sequence, Binding, CheckOptions};
use telesum_core::reduce::{
    interchange, named_atom, post_simplify, post_simplify_with_threshold, reduce_generic, specialize, CaseTag,
    ReductionResult, SpecializeOptions,
};

fn p(s: &str) -> SumExpr {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn assert_same(got: &SumExpr, want: &str) {
    let (g, w) = (post_simplify(got), post_simplify(&p(want)));
    assert_eq!(g, w, "\n got: {}\nwant: {}", to_plain(&g), to_plain(&w));
}

fn reduce(s: &str, budget: usize) -> ReductionResult {
    reduce_generic(&p(s), budget).unwrap_or_else(|e| panic!("{s}: {e}"))
}

#[test]
fn interchange_generic() {
    let got = interchange(&p("Sum(k,0,a,Sum(j,0,k,X[j])*Y[k])")).unwrap();
    assert_same(
        &got,
        "Sum(k,0,a,Y[k])*Sum(j,0,a,X[j]) + Sum(k,0,a,X[k]*Y[k]) - Sum(k,0,a,X[k]*Sum(j,0,k,Y[j]))",
    );
}

#[test]
fn interchange_at_small_tables() {
    let lhs = p("Sum(k,0,a,Sum(j,0,k,X[j])*Y[k])");
    let rhs = interchange(&lhs).unwrap();
    let b = Binding::new()
        .with_int("a", 2)
        .with_table("X", vec![rat(1, 1), rat(2, 1), rat(3, 1)])
        .with_table("Y", vec![rat(1, 1); 3]);
    assert_eq!(eval(&lhs, &b).unwrap(), rat(10, 1));
    assert_eq!(eval(&rhs, &b).unwrap(), rat(10, 1));
    // The three pieces: 3*6, 6 and 1*1 + 2*2 + 3*3.
    assert_eq!(eval(&p("Sum(k,0,a,Y[k])*Sum(j,0,a,X[j])"), &b).unwrap(), rat(18, 1));
    assert_eq!(eval(&p("Sum(k,0,a,X[k]*Sum(j,0,k,Y[j]))"), &b).unwrap(), rat(14, 1));
}

#[test]
fn interchange_with_binomials() {
    let lhs = p("Sum(k,0,a,Sum(j,0,k,binom(n,j)))");
    let got = interchange(&lhs).unwrap();
    let want = p("(a+1)*Sum(k,0,a,binom(n,k)) - Sum(k,0,a,k*binom(n,k))");
    for a in 0..8 {
        for n in 0..8 {
            let b = Binding::new().with_int("a", a).with_int("n", n);
            assert_eq!(eval(&got, &b).unwrap(), eval(&want, &b).unwrap());
        }
    }
}

#[test]
fn interchange_rejects_other_shapes() {
    assert!(interchange(&p("Sum(k,0,a,X[k])")).is_err());
}

#[test]
fn double_sum_of_a_generic_sequence() {
    let r = reduce("Sum(k,0,a,Sum(j,0,k,X[j]))", 0);
    assert!(r.constraints.is_empty());
    assert_same(&r.closed_form, "(a+1)*Sum(i,0,a,X[i]) - Sum(i,0,a,i*X[i])");
    assert_eq!(
        to_plain(&r.simple_sums().closed_form),
        "(a+1)*Sum(i,0,a,X[i]) - Sum(i,0,a,i*X[i])"
    );
}

#[test]
fn weighted_double_sum_needs_one_constraint() {
    let r = reduce("Sum(k,0,a,k*X[k]*Sum(j,0,k,X[j]))", 1);
    assert_eq!(r.case, CaseTag::SolvedWithConstraints);
    assert_eq!(r.params, vec!["c".to_string()]);
    assert_same(
        &r.closed_form,
        "c*Sum(i,0,a,X[i])^2 + Y[a]*Sum(i,0,a,X[i]) + Sum(i,0,a,-c*X[i]^2 + i*X[i]^2 - X[i]*Y[i])",
    );
    let [c] = &r.constraints[..] else { panic!("{:?}", r.constraints) };
    assert_eq!((c.symbol.as_str(), c.var.as_str()), ("Y", "a"));
    assert_eq!(c.rhs, p("(1+a)*X[a+1] - 2*c*X[a+1]"));
}

#[test]
fn constraint_budget_exhausted_returns_the_input() {
    let input = p("Sum(k,0,a,k*X[k]*Sum(j,0,k,X[j]))");
    let r = reduce_generic(&input, 0).unwrap();
    assert_eq!(r.case, CaseTag::Unchanged);
    assert_eq!(r.closed_form, input);
}

#[test]
fn squared_partial_sums() {
    let r = reduce("Sum(k,0,a,Sum(j,0,k,X[j])^2)", 1);
    assert_same(
        &r.closed_form,
        "(a+c)*Sum(i,0,a,X[i])^2 - c*Sum(i,0,a,X[i]^2) - Sum(i,0,a,X[i]*Y[i]) + Y[a]*Sum(i,0,a,X[i]) \
         + Sum(i,0,a,X[i]^2) - Sum(i,0,a,i*X[i]^2)",
    );
    assert_eq!(r.constraints[0].rhs, p("-2*a*X[a+1] - 2*c*X[a+1]"));
}

/// Rewrites a result with `c -> -c/2` and `Y -> -Y/2`, the normalization
/// under which the alternating reduction is usually printed.
fn regauge(e: &SumExpr) -> SumExpr {
    let e = substitute_param(e, "c", &(&RatFunc::var("c") * &RatFunc::constant(rat(-1, 2)))).unwrap();
    substitute(&e, "Y", "k", &p("-1/2*Y[k]")).unwrap()
}

#[test]
fn alternating_squared_partial_sums() {
    let r = reduce("Sum(k,0,a,(-1)^k*Sum(j,0,k,X[j])^2)", 1);
    assert_same(
        &regauge(&r.closed_form),
        "(-c/2 + 1/2*(-1)^a)*Sum(i,0,a,X[i])^2 + 1/2*c*Sum(i,0,a,X[i]^2) + 1/2*Sum(i,0,a,(-1)^i*X[i]^2) \
         + 1/2*Sum(i,0,a,X[i]*Y[i]) - 1/2*Y[a]*Sum(i,0,a,X[i])",
    );
    // Y' = -2Y, so the recurrence scales by -2 after c -> -c/2.
    let rhs = &r.constraints[0].rhs;
    let scaled = SumExpr::mul(vec![SumExpr::int(-2), regauge(rhs)]);
    assert_same(&scaled, "2*(-1)^a*X[a+1] - 2*c*X[a+1]");
}

#[test]
fn post_simplify_is_linear() {
    assert_same(&p("Sum(i,0,a,2*X[i] + i*X[i])"), "2*Sum(i,0,a,X[i]) + Sum(i,0,a,i*X[i])");
    let got = post_simplify(&p("Sum(i,0,a,2*X[i] + i*X[i])"));
    assert_eq!(to_plain(&got), "2*Sum(i,0,a,X[i]) + Sum(i,0,a,i*X[i])");
}

#[test]
fn post_simplify_simple_sum_representation() {
    let got = post_simplify(&p("c*Sum(i,0,a,X[i])^2 + Y[a]*Sum(i,0,a,X[i]) + Sum(i,0,a,-c*X[i]^2 + i*X[i]^2 - X[i]*Y[i])"));
    let want = p("c*Sum(i,0,a,X[i])^2 + Y[a]*Sum(i,0,a,X[i]) - c*Sum(i,0,a,X[i]^2) + Sum(i,0,a,i*X[i]^2) - Sum(i,0,a,X[i]*Y[i])");
    assert_eq!(got, post_simplify(&want));
    let terms = match &got {
        SumExpr::Add(ts) => ts.len(),
        _ => 1,
    };
    assert_eq!(terms, 5);
}

#[test]
fn post_simplify_collapses_a_difference_of_sums() {
    let (got, thr) = post_simplify_with_threshold(&p("Sum(l,0,k,X[l]) - Sum(l,0,k-1,X[l])"));
    assert_eq!(got, p("X[k]"));
    assert_eq!(thr, 0);
}

fn calkin_variant() -> ReductionResult {
    reduce("Sum(k,0,a,k*X[k]*Sum(j,0,k,X[j]))", 1)
}

#[test]
fn specialize_to_binomials() {
    let s = specialize(&calkin_variant(), &named_atom("binom").unwrap(), &SpecializeOptions::default()).unwrap();
    assert_eq!(s.constants["c"], RatFunc::constant(rat(1, 4)) * RatFunc::var("n"));
    let y = &s.solutions["Y"];
    let want = p("-1/2*(a+1)*binom(n,a+1)");
    for n in 0..8 {
        let b = Binding::new().with_int("n", n);
        for a in 0..10 {
            assert_eq!(eval_sequence(y, &b, "a", a).unwrap(), eval_sequence(&want, &b, "a", a).unwrap());
        }
    }
    assert!(s.report.passed());
}

#[test]
fn specialize_to_harmonic_numbers() {
    let s = specialize(&calkin_variant(), &named_atom("harmonic").unwrap(), &SpecializeOptions::default()).unwrap();
    assert!(s.constants["c"].is_zero());
    assert!(s.report.passed());
}

#[test]
fn specialize_to_squared_binomials() {
    let s = specialize(&calkin_variant(), &named_atom("binom2").unwrap(), &SpecializeOptions::default()).unwrap();
    assert_eq!(s.constants["c"], RatFunc::constant(rat(1, 4)) * RatFunc::var("n"));
    assert!(s.report.passed());
    // Re-check over the full square, with the identity's own provisos.
    let opts = CheckOptions { grid: Some(vec![12, 12]), ..CheckOptions::default() };
    assert!(check_identity(&s.identity, &opts).passed());
}

#[test]
fn reductions_pass_the_oracle() {
    for s in [
        "Sum(k,0,a,Sum(j,0,k,X[j]))",
        "Sum(k,0,a,k*X[k]*Sum(j,0,k,X[j]))",
        "Sum(k,0,a,Sum(j,0,k,X[j])^2)",
        "Sum(k,0,a,(-1)^k*Sum(j,0,k,X[j])^2)",
    ] {
        let r = reduce(s, 1);
        let rep = check_identity(&r.identity(), &CheckOptions::default());
        assert!(rep.passed(), "{s}: {}", rep.summary());
    }
}

// Summands c0 + c1 S + c2 S^2 with coefficients built from k, X[k], X[k+1]
// and (-1)^k.
fn coefficient() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("0".to_string()),
        Just("1".to_string()),
        Just("k".to_string()),
        Just("X[k]".to_string()),
        Just("k*X[k]".to_string()),
        Just("(-1)^k".to_string()),
        Just("X[k+1]".to_string()),
        Just("(2*k+1)*X[k]^2".to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_reduction_is_sound(c0 in coefficient(), c1 in coefficient(), c2 in coefficient()) {
        let s = format!("Sum(k,0,a,{c0} + ({c1})*Sum(j,0,k,X[j]) + ({c2})*Sum(j,0,k,X[j])^2)");
        let r = match reduce_generic(&p(&s), 2) {
            Ok(r) => r,
            Err(e) => return Err(TestCaseError::reject(e.to_string())),
        };
        let rep = check_identity(&r.identity(), &CheckOptions { table_sets: 2, ..CheckOptions::default() });
        prop_assert!(rep.passed(), "{}: {}", s, rep.summary());
    }

    // Whatever threshold post_simplify reports, the rewrite agrees with the
    // input from there on.
    #[test]
    fn post_simplify_threshold_is_sound(
        shifts in prop::collection::vec(-3i64..=3, 1..4),
        bodies in prop::collection::vec(0usize..4, 4),
        seed in any::<u64>(),
    ) {
        const BODIES: [&str; 4] = ["X[l]", "l*X[l]", "X[l]^2", "(-1)^l*X[l]"];
        let terms: Vec<String> = shifts
            .iter()
            .zip(&bodies)
            .enumerate()
            .map(|(i, (v, b))| format!("{}Sum(l,0,k+({v}),{})", ["", " + ", " - "][(i > 0) as usize + (i % 2 == 1) as usize], BODIES[*b]))
            .collect();
        let e = p(&terms.concat());
        let (out, thr) = post_simplify_with_threshold(&e);
        let start = thr.max(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let table: Vec<Rat> = (0..40).map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=9))).collect();
            let b = Binding::new().with_table("X", table);
            for i in start..=start + 30 {
                prop_assert_eq!(eval_sequence(&e, &b, "k", i).unwrap(), eval_sequence(&out, &b, "k", i).unwrap());
            }
        }
    }
}
