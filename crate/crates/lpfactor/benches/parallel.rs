//! Side-by-side timing of the data-parallel and sequential execution paths.
//!
//! Three workloads at increasing granularity: a single randomized zero test
//! (parallel over evaluation trials), the curated fixture suite (parallel
//! over fixtures), and a recomposition sweep (parallel over random draws).
//! Build with the default `parallel` feature to compare real thread pools;
//! without it both variants run sequentially.

use criterion::{criterion_group, criterion_main, Criterion};

use lpfactor::expr::{self, is_zero_with};
use lpfactor::factor::factor2;
use lpfactor::verify;
use lpfactor::{Expr, Lpdo, ZeroCfg};

fn cfg(parallel: bool, trials: u32) -> ZeroCfg {
    ZeroCfg { parallel, trials, ..ZeroCfg::default() }
}

/// A structurally nontrivial zero: the second-order remainder is unchanged
/// by gauge conjugation, so the difference vanishes identically but only
/// after substantial evaluation work per trial.
fn gauge_residual() -> Expr {
    let a = Lpdo::new()
        .with(2, 0, Expr::one())
        .with(0, 2, expr::int(-1))
        .with(1, 0, expr::func("p"))
        .with(0, 1, expr::func("q"))
        .with(0, 0, expr::func("r"));
    let phi = expr::func("phi");
    let seq = cfg(false, 1);
    let plain = factor2(&a, &expr::int(1), &seq).expect("root 1");
    let gauged = factor2(&a.gauge_conjugate(&phi), &expr::int(1), &seq).expect("root 1");
    gauged.l2 - plain.l2
}

fn bench_zero_test(c: &mut Criterion) {
    let resid = gauge_residual();
    let mut g = c.benchmark_group("zero_test_16_trials");
    for (name, par) in [("parallel", true), ("sequential", false)] {
        let cfg = cfg(par, 16);
        g.bench_function(name, |b| {
            b.iter(|| is_zero_with(&resid, &cfg).expect("zero test"))
        });
    }
    g.finish();
}

fn bench_reference_suite(c: &mut Criterion) {
    let mut g = c.benchmark_group("reference_suite");
    g.sample_size(10);
    for (name, par) in [("parallel", true), ("sequential", false)] {
        let cfg = cfg(par, 8);
        g.bench_function(name, |b| {
            b.iter(|| {
                let report = verify::reference_suite(&cfg);
                assert!(report.pass());
                report
            })
        });
    }
    g.finish();
}

fn bench_recompose_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("recompose_sweep_32");
    g.sample_size(10);
    for (name, par) in [("parallel", true), ("sequential", false)] {
        let cfg = cfg(par, 8);
        g.bench_function(name, |b| {
            b.iter(|| {
                let out = verify::sweep_recompose2(7, 32, &cfg).expect("sweep");
                assert_eq!(out.zero_ok, 32);
                out
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_zero_test, bench_reference_suite, bench_recompose_sweep);
criterion_main!(benches);
