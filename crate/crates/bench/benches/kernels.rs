use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use scorebayes_bench::{eqcorr_data, normal_target, vonmises_angles};
use scorebayes_core::estimation::vmf_kappa_closed_form;
use scorebayes_core::models::PairwiseEqCorr;
use scorebayes_core::numerics::{bessel_ratio_a1, fd_hessian};
use scorebayes_core::posterior::{mh_sample, MhOptions};
use scorebayes_core::scoring::{total_score, Derivatives};

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_ratio_a1 small and large", |b| {
        b.iter(|| bessel_ratio_a1(black_box(3.7)).unwrap() + bessel_ratio_a1(black_box(45.0)).unwrap())
    });
}

fn hessian(c: &mut Criterion) {
    let f = |t: &[f64]| (t[0] * t[1]).sin() + t[2].exp() * t[0] - t[1].powi(3);
    c.bench_function("fd_hessian 3x3", |b| b.iter(|| fd_hessian(f, black_box(&[0.3, -0.7, 1.1])).unwrap()));
}

fn pairwise(c: &mut Criterion) {
    let data = eqcorr_data(100, 10);
    let model = PairwiseEqCorr { q: 10 };
    c.bench_function("pairwise total score n=100 q=10 with gradient", |b| {
        b.iter(|| total_score(&model, &data, black_box(&[0.1, 1.2, 0.4]), Derivatives::Gradient).unwrap())
    });
}

fn closed_form(c: &mut Criterion) {
    let angles = vonmises_angles(1000);
    c.bench_function("vmf_kappa_closed_form n=1000", |b| b.iter(|| vmf_kappa_closed_form(black_box(&angles)).unwrap()));
}

fn sampler(c: &mut Criterion) {
    let target = normal_target(50);
    let opts = MhOptions { iterations: 2000, burn_in: 500, ..MhOptions::default() };
    c.bench_function("mh_sample 2500 steps, normal mean n=50", |b| b.iter(|| mh_sample(&target, opts, black_box(4)).unwrap()));
}

criterion_group!(benches, bessel, hessian, pairwise, closed_form, sampler);
criterion_main!(benches);
