use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qpa_bench::{hermitian, instance};
use qpa_core::entropy::{product_spectrum, smooth_renyi_0_spectrum};
use qpa_core::hashing::{certify_two_universal, HashFamily, HashKind};
use qpa_core::linalg::eig_hermitian;
use qpa_core::pa::{exact_key_distance, collision_entropy_bound};

fn bench_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("eig_hermitian");
    for dim in [8usize, 32, 64] {
        let op = hermitian(dim);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &op, |b, op| {
            b.iter(|| eig_hermitian(black_box(op)).unwrap());
        });
    }
    group.finish();
}

fn bench_exact_distance(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_key_distance");
    group.sample_size(10);

    let toeplitz = instance(4, 4, 3, HashKind::Toeplitz);
    group.bench_function("toeplitz_n4_d4_s3", |b| {
        b.iter(|| exact_key_distance(black_box(&toeplitz)).unwrap());
    });

    let complete = instance(4, 2, 2, HashKind::AllFunctions);
    group.bench_function("complete_family_n4_d2_s2", |b| {
        b.iter(|| exact_key_distance(black_box(&complete)).unwrap());
    });
    group.finish();
}

fn bench_bound(c: &mut Criterion) {
    let inst = instance(4, 4, 2, HashKind::Toeplitz);
    c.bench_function("collision_entropy_bound_n4_d4", |b| {
        b.iter(|| collision_entropy_bound(black_box(&inst)).unwrap());
    });
}

fn bench_product_smoothing(c: &mut Criterion) {
    let rho = qpa_core::DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
    c.bench_function("product_spectrum_smooth_n1024", |b| {
        b.iter(|| {
            let spec = product_spectrum(black_box(&rho), 1024).unwrap();
            smooth_renyi_0_spectrum(&spec, 0.01).unwrap()
        });
    });
}

fn bench_certification(c: &mut Criterion) {
    let fam = HashFamily::new(HashKind::Toeplitz, 6, 3).unwrap();
    let mut group = c.benchmark_group("certify_two_universal");
    group.sample_size(10);
    group.bench_function("toeplitz_n6_s3", |b| {
        b.iter(|| certify_two_universal(black_box(&fam)).unwrap());
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_eig,
    bench_exact_distance,
    bench_bound,
    bench_product_smoothing,
    bench_certification
);
criterion_main!(benches);
