use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jumpchamp_core::gap_census::{run_census_with, CensusConfig};
use jumpchamp_core::prime_engine::{primes_up_to_with, SieveConfig, DEFAULT_SEGMENT_SIZE};
use jumpchamp_core::series_average::{average_ratio_sum, gallagher_ms_average};
use jumpchamp_core::singular_series::SeriesEvaluator;
use jumpchamp_core::{AnchorConvention, Exec};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    g.sample_size(10);
    let limit = 100_000_000;
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, limit), |b| {
            b.iter(|| {
                let cfg = SieveConfig::new(limit, DEFAULT_SEGMENT_SIZE).unwrap();
                let count: usize = primes_up_to_with(cfg, exec)
                    .unwrap()
                    .map(|s| s.primes.len())
                    .sum();
                black_box(count)
            })
        });
    }
    g.finish();
}

fn census(c: &mut Criterion) {
    let mut g = c.benchmark_group("census");
    g.sample_size(10);
    let limit = 50_000_000;
    for k in [1, 3] {
        for (name, exec) in MODES {
            g.bench_function(BenchmarkId::new(format!("{name}/k{k}"), limit), |b| {
                b.iter(|| {
                    let cfg = CensusConfig::new(vec![limit], k, AnchorConvention::LargestLeX)
                        .unwrap()
                        .with_exec(exec);
                    black_box(run_census_with(cfg).unwrap())
                })
            });
        }
    }
    g.finish();
}

fn series_averages(c: &mut Criterion) {
    let mut g = c.benchmark_group("series_average");
    g.sample_size(10);
    for (name, exec) in MODES {
        let eval = SeriesEvaluator::with_exec(100_000, exec).unwrap();
        g.bench_function(BenchmarkId::new(name, "ratio_sum_0_6_H1e3"), |b| {
            b.iter(|| black_box(average_ratio_sum(&[0, 6], 1_000, &eval).unwrap()))
        });
        let eval = SeriesEvaluator::with_exec(10_000, exec).unwrap();
        g.bench_function(BenchmarkId::new(name, "gallagher_k2_D100"), |b| {
            b.iter(|| black_box(gallagher_ms_average(2, 100, &eval).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, sieve, census, series_averages);
criterion_main!(benches);
