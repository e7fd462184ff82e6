use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use telesum_core::algebra::RatFunc;
use telesum_core::corpus::corpus;
use telesum_core::expr::parse;
use telesum_core::oracle::{check_identity, CheckOptions, Identity};
use telesum_core::reduce::reduce_generic;
use telesum_core::telescope::{gosper, param_telescope, TeleProblem};

fn rf(s: &str) -> RatFunc {
    parse(s).unwrap().to_ratfunc().unwrap()
}

fn telescoping(c: &mut Criterion) {
    let factorial = rf("(k+1)^2/k");
    c.bench_function("gosper/k*k!", |b| b.iter(|| gosper(black_box(&factorial), "k").unwrap()));
    let binom = rf("(n-k)/(k+1)");
    c.bench_function("gosper/binom (no solution)", |b| b.iter(|| gosper(black_box(&binom), "k").unwrap()));

    let squares = TeleProblem::single("k", rf("((n-k-1)/(k+2))^2"), vec![rf("k+1"), rf("-2")], vec!["c".into()]);
    c.bench_function("param_telescope/binom^2", |b| b.iter(|| param_telescope(black_box(&squares)).unwrap()));
}

fn reduction(c: &mut Criterion) {
    let mut g = c.benchmark_group("reduce_generic");
    g.sample_size(20);
    for (name, s, budget) in [
        ("double sum", "Sum(k,0,a,Sum(j,0,k,X[j]))", 0),
        ("squares", "Sum(k,0,a,Sum(j,0,k,X[j])^2)", 1),
        ("alternating squares", "Sum(k,0,a,(-1)^k*Sum(j,0,k,X[j])^2)", 1),
    ] {
        let e = parse(s).unwrap();
        g.bench_function(name, |b| b.iter(|| reduce_generic(black_box(&e), budget).unwrap()));
    }
    g.finish();
}

fn checking(c: &mut Criterion) {
    let id = Identity::parse("C2Vn", "Sum(k,0,n,Sum(j,0,k,binom(n,j))^2) = (n+2)*pow(2,2*n-1) - n*binom(2*n-1,n)")
        .unwrap();
    let opts = CheckOptions::default();
    c.bench_function("check_identity/C2Vn", |b| b.iter(|| check_identity(black_box(&id), &opts)));

    let entries = corpus();
    let mut g = c.benchmark_group("corpus");
    g.sample_size(10);
    g.bench_function("verify all", |b| b.iter(|| entries.iter().map(|e| e.verify(&opts).passed()).count()));
    g.finish();
}

criterion_group!(benches, telescoping, reduction, checking);
criterion_main!(benches);
