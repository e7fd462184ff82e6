//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Run with `cargo test --test acceptance`.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use telesum_core::algebra::{rat, MultiPoly, Rat, RatFunc};
use telesum_core::corpus::corpus;
use telesum_core::diffring::{check_sigma_ext, from_expression, Admissibility, ExtKind, Tower, TowerElem};
use telesum_core::expr::{parse, substitute, substitute_param, SumExpr};
use telesum_core::oracle::{eval, eval_sequence, falsify_nonexistence, Binding, CheckOptions, CheckStatus};
use telesum_core::reduce::{interchange, post_simplify, reduce_generic};
use telesum_core::telescope::{
    certificate_holds, gosper, param_telescope, sigma_layer_telescope, telescope_pieces, TeleProblem,
};

fn p(s: &str) -> SumExpr {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn rf(s: &str) -> RatFunc {
    p(s).to_ratfunc().unwrap()
}

/// Collects the reasons a criterion failed; an empty list means PASS.
#[derive(Default)]
struct Outcome {
    problems: Vec<String>,
    detail: String,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(what());
        }
    }
}

fn corpus_verification() -> Outcome {
    let mut out = Outcome::default();
    let start = Instant::now();
    let entries = corpus();
    let opts = CheckOptions::default();
    let mut points = 0;
    for e in &entries {
        let r = e.verify(&opts);
        points += r.points;
        out.check(r.passed(), || r.summary());
    }
    let secs = start.elapsed().as_secs_f64();
    out.check(secs < 60.0, || format!("took {secs:.1}s"));
    out.detail = format!("{} identities, {points} points, {secs:.1}s", entries.len());
    out
}

/// True when `got - want` does not depend on k for every n in `ns`.
fn equal_up_to_constant(got: &SumExpr, want: &SumExpr, ns: std::ops::RangeInclusive<i64>) -> bool {
    ns.into_iter().all(|n| {
        let b = Binding::new().with_int("n", n);
        let diff = |i| eval_sequence(got, &b, "k", i).unwrap() - eval_sequence(want, &b, "k", i).unwrap();
        let d0 = diff(0);
        (1..=15).all(|i| diff(i) == d0)
    })
}

fn parameterized_telescoping() -> Outcome {
    let mut out = Outcome::default();
    let cases = [
        (
            ["(k+1)*binom(n,k+1)", "-2*binom(n,k+1)"],
            "-1/2*(k+1)*binom(n,k+1)",
        ),
        (
            ["(k+1)*binom(n,k+1)^2", "-2*binom(n,k+1)^2"],
            "-(n-k)^2/(2*n)*binom(n,k)^2",
        ),
    ];
    for (pieces, want) in cases {
        let pieces: Vec<SumExpr> = pieces.iter().map(|s| p(s)).collect();
        match telescope_pieces(&pieces, "k") {
            Ok(Some(sol)) => {
                let c = sol.constants.get("c").cloned();
                out.check(c == Some(rf("n/4")), || format!("{want}: c = {c:?}"));
                out.check(equal_up_to_constant(&sol.telescoper, &p(want), 1..=10), || {
                    format!("telescoper differs from {want} by more than a constant")
                });
            }
            other => out.check(false, || format!("{want}: solver returned {other:?}")),
        }
    }
    out.detail = "binom and binom^2 pieces give c = n/4".into();
    out
}

fn same(got: &SumExpr, want: &str) -> bool {
    post_simplify(got) == post_simplify(&p(want))
}

fn regauge(e: &SumExpr) -> SumExpr {
    let e = substitute_param(e, "c", &(&RatFunc::var("c") * &RatFunc::constant(rat(-1, 2)))).unwrap();
    substitute(&e, "Y", "k", &p("-1/2*Y[k]")).unwrap()
}

fn generic_reduction() -> Outcome {
    let mut out = Outcome::default();

    let r = reduce_generic(&p("Sum(k,0,a,Sum(j,0,k,X[j]))"), 0).unwrap();
    out.check(r.constraints.is_empty() && same(&r.closed_form, "(a+1)*Sum(i,0,a,X[i]) - Sum(i,0,a,i*X[i])"), || {
        "double sum of X".into()
    });

    let r = reduce_generic(&p("Sum(k,0,a,k*X[k]*Sum(j,0,k,X[j]))"), 1).unwrap();
    out.check(
        same(
            &r.closed_form,
            "c*Sum(i,0,a,X[i])^2 + Y[a]*Sum(i,0,a,X[i]) + Sum(i,0,a,-c*X[i]^2 + i*X[i]^2 - X[i]*Y[i])",
        ) && r.constraints.len() == 1
            && r.constraints[0].rhs == p("(1+a)*X[a+1] - 2*c*X[a+1]"),
        || "weighted double sum".into(),
    );

    let r = reduce_generic(&p("Sum(k,0,a,Sum(j,0,k,X[j])^2)"), 1).unwrap();
    out.check(
        same(
            &r.closed_form,
            "(a+c)*Sum(i,0,a,X[i])^2 - c*Sum(i,0,a,X[i]^2) - Sum(i,0,a,X[i]*Y[i]) + Y[a]*Sum(i,0,a,X[i]) \
             + Sum(i,0,a,X[i]^2) - Sum(i,0,a,i*X[i]^2)",
        ) && r.constraints.len() == 1
            && r.constraints[0].rhs == p("-2*a*X[a+1] - 2*c*X[a+1]"),
        || "squared partial sums".into(),
    );

    let r = reduce_generic(&p("Sum(k,0,a,(-1)^k*Sum(j,0,k,X[j])^2)"), 1).unwrap();
    let scaled = r
        .constraints
        .first()
        .map(|c| SumExpr::mul(vec![SumExpr::int(-2), regauge(&c.rhs)]));
    out.check(
        same(
            &regauge(&r.closed_form),
            "(-c/2 + 1/2*(-1)^a)*Sum(i,0,a,X[i])^2 + 1/2*c*Sum(i,0,a,X[i]^2) + 1/2*Sum(i,0,a,(-1)^i*X[i]^2) \
             + 1/2*Sum(i,0,a,X[i]*Y[i]) - 1/2*Y[a]*Sum(i,0,a,X[i])",
        ) && scaled.is_some_and(|s| same(&s, "2*(-1)^a*X[a+1] - 2*c*X[a+1]")),
        || "alternating squared partial sums".into(),
    );
    out.detail = "four reductions match their normal forms".into();
    out
}

fn nonexistence() -> Outcome {
    let mut out = Outcome::default();

    // Hypergeometric summands through their shift quotients.
    for (summand, ratio) in [
        ("1/(k+1)", "(k+1)/(k+2)"),
        ("binom(n,k)", "(n-k)/(k+1)"),
        ("binom(n,k)^2", "((n-k)/(k+1))^2"),
    ] {
        let sol = gosper(&rf(ratio), "k").unwrap();
        out.check(sol.is_none(), || format!("{summand}: solver found a certificate"));
    }
    out.check(
        check_sigma_ext(&TowerElem::from_ratfunc(rf("1/(k+1)")), &Tower::base("k")).unwrap()
            == Admissibility::Admissible,
        || "1/(k+1) telescopes in the rational field".into(),
    );

    // In the harmonic tower: H_k/(k+1) has no antidifference.
    let emb = from_expression(&p("harmonic(k)"), "k").unwrap();
    let f = emb.elem.scale(&rf("1/(k+1)"));
    out.check(sigma_layer_telescope(&f, &emb.tower, &[]).unwrap().is_none(), || {
        "H_k/(k+1) telescopes in its tower".into()
    });

    for s in ["1/(k+1)", "binom(n,k)", "binom(n,k)^2", "harmonic(k)/(k+1)"] {
        let r = falsify_nonexistence(&p(s), "k", 8);
        out.check(r.passed(), || format!("refuted: {}", r.summary()));
    }

    let sol = gosper(&rf("(k+1)^2/k"), "k").unwrap();
    out.check(sol.is_some_and(|s| s.certificate() == &rf("1/k")), || "no certificate for k*k!".into());
    let r = falsify_nonexistence(&p("k*fact(k)"), "k", 8);
    out.check(r.status == CheckStatus::Fail && r.witness.is_some(), || "no witness for k*k!".into());

    out.detail = "four summands without certificates, k*k! refuted".into();
    out
}

const RATIOS: [&str; 6] = ["1", "(n-k)/(k+1)", "k+1", "2", "1/(k+1)", "(k+1)^2/(k+3)"];

fn planted_certificates(rng: &mut ChaCha8Rng, out: &mut Outcome) -> usize {
    let k = MultiPoly::var("k");
    let mut recovered = 0;
    let mut tried = 0;
    while tried < 100 {
        let r = rf(RATIOS[rng.gen_range(0..RATIOS.len())]);
        let deg = rng.gen_range(0..3u32);
        let mut num = MultiPoly::zero();
        for i in 0..=deg {
            let mut c = MultiPoly::int(rng.gen_range(-3..=3));
            if i == 0 && rng.gen_bool(0.5) {
                c = &c * &MultiPoly::var("n");
            }
            num = &num + &(&c * &k.pow(i));
        }
        let den = if rng.gen_bool(0.5) {
            &k + &MultiPoly::int(rng.gen_range(1..=3))
        } else {
            MultiPoly::one()
        };
        let planted = RatFunc::new(num, den).unwrap();
        let coeff = &(&planted.shift("k", 1) * &r) - &planted;
        if coeff.is_zero() {
            continue;
        }
        tried += 1;
        let prob = TeleProblem::single("k", r, vec![coeff.clone()], Vec::new());
        let ok = match param_telescope(&prob) {
            Ok(Some(sol)) => {
                let back = &(&sol.certificate().shift("k", 1) * &prob.kernels[0].ratio) - sol.certificate();
                certificate_holds(&prob, &sol) && back == coeff
            }
            _ => false,
        };
        if ok {
            recovered += 1;
        }
        out.check(ok, || format!("planted certificate {planted:?} not recovered"));
    }
    recovered
}

fn random_table(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rat> {
    (0..len).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=7))).collect()
}

fn random_tables(rng: &mut ChaCha8Rng, out: &mut Outcome) {
    let pairs = [
        (
            p("Sum(k,0,a,Sum(j,0,k,X[j])*Y[k])"),
            p("Sum(k,0,a,Y[k])*Sum(j,0,a,X[j]) + Sum(k,0,a,X[k]*Y[k]) - Sum(k,0,a,X[k]*Sum(j,0,k,Y[j]))"),
        ),
        (p("Sum(k,0,a,Sum(j,0,k,X[j]))"), p("(a+1)*Sum(i,0,a,X[i]) - Sum(i,0,a,i*X[i])")),
    ];
    let computed = interchange(&pairs[0].0).unwrap();
    for _ in 0..50 {
        let (x, y) = (random_table(rng, 21), random_table(rng, 21));
        for a in 0..=20 {
            let b = Binding::new().with_int("a", a).with_table("X", x.clone()).with_table("Y", y.clone());
            for (lhs, rhs) in pairs.iter().chain([&(pairs[0].0.clone(), computed.clone())]) {
                let (l, r) = (eval(lhs, &b).unwrap(), eval(rhs, &b).unwrap());
                out.check(l == r, || format!("table identity fails at a = {a}: {l} vs {r}"));
            }
        }
    }
}

const COEFFS: [&str; 6] = ["1", "k", "n-k", "1/(k+1)", "(k+n)/(k+2)", "-3/2"];

/// Random elements of `tower` with at most `max_exp` in each generator.
fn random_element(rng: &mut ChaCha8Rng, tower: &Tower, max_exp: i32) -> TowerElem {
    let mut acc = TowerElem::zero();
    for _ in 0..rng.gen_range(1..4) {
        let exps: Vec<i32> = tower
            .exts
            .iter()
            .map(|e| {
                let x = rng.gen_range(0..=max_exp);
                if matches!(e.kind, ExtKind::Pi { .. }) && rng.gen_bool(0.5) {
                    -x
                } else {
                    x
                }
            })
            .collect();
        acc = acc.add(&TowerElem::monomial(exps, rf(COEFFS[rng.gen_range(0..COEFFS.len())])));
    }
    tower.mul(&TowerElem::one(), &acc)
}

fn degree_bound(rng: &mut ChaCha8Rng, out: &mut Outcome) -> (usize, usize) {
    let towers: Vec<Tower> = ["harmonic(k)", "Sum(j,0,k,binom(n,j))", "Sum(j,0,k,(-1)^j*binom(n,j))"]
        .iter()
        .map(|s| from_expression(&p(s), "k").unwrap().tower)
        .collect();
    let (mut instances, mut solved) = (0, 0);
    for t in &towers {
        let top = t.len() - 1;
        for _ in 0..40 {
            let f = random_element(rng, t, 2);
            if f.is_zero() {
                continue;
            }
            instances += 1;
            if let Some(sol) = sigma_layer_telescope(&f, t, &[]).unwrap() {
                solved += 1;
                out.check(t.sigma(&sol.g).sub(&sol.g) == f, || "unsound telescoper".into());
                let (dg, df) = (sol.g.degree_in(top), f.degree_in(top));
                out.check(dg <= df + 1, || format!("deg g = {dg} > deg f + 1 = {}", df + 1));
            }
        }
    }
    // Generic reductions carry the same bound.
    for s in [
        "Sum(k,0,a,Sum(j,0,k,X[j]))",
        "Sum(k,0,a,k*X[k]*Sum(j,0,k,X[j]))",
        "Sum(k,0,a,Sum(j,0,k,X[j])^2)",
        "Sum(k,0,a,(-1)^k*Sum(j,0,k,X[j])^2)",
        "Sum(k,0,a,k^2*X[k]*Sum(j,0,k,X[j]))",
        "Sum(k,0,a,Sum(j,0,k,X[j])^3)",
    ] {
        let r = reduce_generic(&p(s), 2).unwrap();
        instances += 1;
        solved += 1;
        out.check(r.telescoper_degree <= r.summand_degree + 1, || {
            format!("{s}: deg {} > {} + 1", r.telescoper_degree, r.summand_degree)
        });
    }
    (instances, solved)
}

fn evaluation_commutes(rng: &mut ChaCha8Rng, out: &mut Outcome) {
    let t = from_expression(&p("(-1)^k*Sum(j,0,k,binom(n,j)) + harmonic(k)"), "k").unwrap().tower;
    let params: HashMap<String, Rat> = [("n".to_string(), rat(7, 2))].into_iter().collect();
    for _ in 0..200 {
        let x = random_element(rng, &t, 2);
        let sx = t.sigma(&x);
        for i in 0..=25 {
            let (l, r) = (t.ev(&sx, i, &params).unwrap(), t.ev(&x, i + 1, &params).unwrap());
            out.check(l == r, || format!("ev(sigma x, {i}) = {l} but ev(x, {}) = {r}", i + 1));
        }
    }
}

fn property_suites() -> Outcome {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let recovered = planted_certificates(&mut rng, &mut out);
    random_tables(&mut rng, &mut out);
    let (instances, solved) = degree_bound(&mut rng, &mut out);
    evaluation_commutes(&mut rng, &mut out);
    out.detail = format!(
        "{recovered}/100 certificates, 50 table pairs, degree bound on {instances} instances ({solved} solved), \
         200 elements"
    );
    out
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 5] = [
        ("corpus verification", corpus_verification),
        ("parameterized telescoping", parameterized_telescoping),
        ("generic reduction", generic_reduction),
        ("nonexistence", nonexistence),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let status = if o.problems.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {status}: {name} ({})", i + 1, o.detail);
        for prob in o.problems.iter().take(5) {
            println!("    {prob}");
        }
        if !o.problems.is_empty() {
            failed += 1;
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
