use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use renyi_core::{alpha2_bar, limit_constant, ln_gamma, renyi_divergence, FamilySpec, QuadratureConfig, RenyiOrder};

fn divergence(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let s = RenyiOrder::new(0.3).unwrap();
    let mut group = c.benchmark_group("renyi_divergence");
    for spec in ["uniform", "exp:1", "beta:0.5,0.5", "beta:3,3", "gamma:2.5,1"] {
        let f: FamilySpec = spec.parse().unwrap();
        for eps in [1e-2, 1e-5] {
            group.bench_with_input(BenchmarkId::new(spec, eps), &eps, |b, &eps| {
                b.iter(|| renyi_divergence(&f, 0.0, black_box(eps), s, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn constants(c: &mut Criterion) {
    let beta: FamilySpec = "beta:0.5,0.7".parse().unwrap();
    c.bench_function("limit_constant/beta", |b| b.iter(|| limit_constant(&beta, black_box(0.4)).unwrap()));
    c.bench_function("alpha2_bar/beta", |b| b.iter(|| alpha2_bar(black_box(&beta)).unwrap()));
    c.bench_function("ln_gamma", |b| b.iter(|| ln_gamma(black_box(3.7)).unwrap()));
}

criterion_group!(benches, divergence, constants);
criterion_main!(benches);
