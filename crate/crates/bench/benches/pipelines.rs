//! Wall-clock benchmarks over the reproducible instance families.
//!
//! Run with `cargo bench -p subseq-bench`; pass a substring filter to
//! narrow the set, e.g. `cargo bench -p subseq-bench lcs/approx`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::time::Duration;
use subseq_bench::{desk_lcs_config, lis_array, planted_pair};
use subseq_core::harness::InstanceKind;
use subseq_core::lis::{lis_approx, lis_decide, LisConfig};
use subseq_core::lis_recursive::{recursive_lis, RecursionConfig};
use subseq_core::oracles::{lcs_exact, lis_exact};
use subseq_core::pipeline::{approx_lcs, Regime};
use subseq_core::strings::Symbol;

fn bench_lcs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lcs");
    group.sample_size(10);
    group.measurement_time(Duration::from_secs(4));
    for n in [128usize, 256, 512] {
        let (a, b) = planted_pair(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |bench, _| {
            bench.iter(|| lcs_exact(&a, &b).0)
        });
        let cfg = desk_lcs_config(Regime::Quadratic, 0.25, 3);
        group.bench_with_input(BenchmarkId::new("approx-desk", n), &n, |bench, _| {
            bench.iter(|| approx_lcs(&a, &b, &cfg).expect("pipeline").estimate)
        });
    }
    group.finish();
}

fn bench_lis(c: &mut Criterion) {
    let mut group = c.benchmark_group("lis");
    group.sample_size(10);
    group.measurement_time(Duration::from_secs(4));
    for n in [4096usize, 16384] {
        let sorted = lis_array(InstanceKind::LisSorted, n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |bench, _| {
            bench.iter(|| lis_exact(&sorted).0)
        });
        let cfg = LisConfig {
            sample_scale: 0.0003,
            ..LisConfig::default()
        };
        group.bench_with_input(BenchmarkId::new("approx", n), &n, |bench, _| {
            bench.iter(|| lis_approx(&sorted, &cfg).estimate)
        });
    }
    group.finish();
}

fn bench_decisions(c: &mut Criterion) {
    let mut group = c.benchmark_group("decide");
    group.sample_size(10);
    group.measurement_time(Duration::from_secs(4));
    let n = 10_000usize;
    let cfg = LisConfig {
        sample_scale: 0.0003,
        ..LisConfig::default()
    };
    for kind in [InstanceKind::LisSorted, InstanceKind::LisBlockReversed] {
        let a = lis_array(kind, n);
        let tag = format!("{kind:?}").to_lowercase();
        group.bench_with_input(BenchmarkId::new("lis", &tag), &n, |bench, _| {
            bench.iter(|| lis_decide(&a, 0.5, &cfg).accept)
        });
    }
    let sorted = lis_array(InstanceKind::LisSorted, 4096);
    let rec_cfg = RecursionConfig {
        attenuation: 1.0,
        lis: LisConfig {
            sample_scale: 0.0003,
            ..LisConfig::default()
        },
        ..RecursionConfig::default()
    };
    group.bench_function("recursive/sorted-4096", |bench| {
        bench.iter(|| recursive_lis(&sorted, 0.5, 0, Symbol::MAX, &rec_cfg).accept)
    });
    group.finish();
}

criterion_group!(benches, bench_lcs, bench_lis, bench_decisions);
criterion_main!(benches);
