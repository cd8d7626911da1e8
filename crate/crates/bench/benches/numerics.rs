use std::hint::black_box;

use cbp_bench::fixtures;
use cbp_core::harmonics::ft_norm_power;
use cbp_core::sections::{section_volume_direct, volume};
use cbp_core::spherequad::{mc_volume, sphere_rule};
use cbp_core::theorems::gamma_lemma_check;
use cbp_core::{Direction, Settings};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("sphere_rule");
    for (m, level) in [(4, 16), (6, 12), (8, 8)] {
        group.bench_with_input(BenchmarkId::new(format!("S^{}", m - 1), level), &level, |b, &level| {
            b.iter(|| sphere_rule(m, black_box(level)).unwrap())
        });
    }
    group.finish();
}

fn sections(c: &mut Criterion) {
    let s = Settings::default();
    let mut group = c.benchmark_group("section_direct");
    for n in [2usize, 3] {
        let rule = s.section_rule(n).unwrap();
        let xi = Direction::random(n, 1, 1).unwrap().remove(0);
        for body in fixtures(n) {
            group.bench_function(body.label(), |b| {
                b.iter(|| section_volume_direct(&body, black_box(&xi), &rule).unwrap())
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("volume");
    for n in [2usize, 3] {
        let rule = s.sphere_rule(n).unwrap();
        for body in fixtures(n) {
            group.bench_function(body.label(), |b| b.iter(|| volume(black_box(&body), &rule).unwrap()));
        }
    }
    group.finish();
}

fn transforms(c: &mut Criterion) {
    let s = Settings::default();
    let mut group = c.benchmark_group("ft_norm_power");
    group.sample_size(10);
    for n in [2usize, 3] {
        let rule = s.sphere_rule(n).unwrap();
        let jmax = s.jmax(2 * n);
        for body in fixtures(n) {
            group.bench_function(body.label(), |b| {
                b.iter(|| ft_norm_power(black_box(&body), 2.0, jmax, &rule).unwrap())
            });
        }
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let body = fixtures(2).remove(1);
    let mut group = c.benchmark_group("oracles");
    group.sample_size(10);
    group.bench_function("mc_volume_1e5", |b| b.iter(|| mc_volume(&body, 100_000, black_box(7)).unwrap()));
    group.bench_function("gamma_lemma_170", |b| b.iter(|| gamma_lemma_check(black_box(170)).unwrap()));
    group.finish();
}

criterion_group!(benches, quadrature, sections, transforms, oracles);
criterion_main!(benches);
