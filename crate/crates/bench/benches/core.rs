use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use horoflow::acceptance::{attractor_runs, ATTRACTOR_SCHEDULE};
use horoflow::bundle::minimal_set_sample;
use horoflow::catalog::{rank2_group, rank2_sym2, rank3_noninjective};
use horoflow::projective::eigen::eigenvalues;
use horoflow::projective::DEFAULT_GAP_TOL;
use horoflow::{FreeWord, Psl2Element};

fn reduce(c: &mut Criterion) {
    let g = rank2_group().unwrap();
    let w = FreeWord::from_letters(&[1, 2, -1, 2, 2, -1, -2, -1]).unwrap();
    let u = g.evaluate(&w).unwrap() * Psl2Element::unipotent(0.3);
    c.bench_function("reduce length-8 word", |b| b.iter(|| g.reduce(black_box(&u)).unwrap()));
}

fn limit_set(c: &mut Criterion) {
    let g = rank2_group().unwrap();
    c.bench_function("limit set sample L=8", |b| {
        b.iter(|| g.limit_set_sample(black_box(8)).unwrap())
    });
}

fn eigen(c: &mut Criterion) {
    let rho = rank2_sym2().unwrap();
    let a = rho.evaluate(&FreeWord::from_letters(&[1, 2, 1, -2]).unwrap()).unwrap();
    c.bench_function("eigenvalues of Sym^2 image", |b| {
        b.iter(|| eigenvalues(black_box(a.matrix())).unwrap())
    });
}

fn minimal_set(c: &mut Criterion) {
    let rho = rank3_noninjective().unwrap();
    c.bench_function("minimal set sample, rank 3, L=6", |b| {
        b.iter(|| minimal_set_sample(&rho, black_box(6), DEFAULT_GAP_TOL).unwrap())
    });
}

fn attractor(c: &mut Criterion) {
    let mut group = c.benchmark_group("attractor");
    group.sample_size(10);
    group.bench_function("20 starts, schedule 1..1024", |b| {
        b.iter(|| attractor_runs(black_box(42), &ATTRACTOR_SCHEDULE).unwrap())
    });
    group.finish();
}

criterion_group!(benches, reduce, limit_set, eigen, minimal_set, attractor);
criterion_main!(benches);
