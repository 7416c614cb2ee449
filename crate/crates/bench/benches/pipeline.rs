use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use liefrenet::analysis::fleet::{fleet_members, run_members};
use liefrenet::bertrand::{construct_mate, verify_couple};
use liefrenet::curve::build_curve;
use liefrenet::frenet::{analyze, classify, ClassifyOptions, FrenetOptions};
use liefrenet::{BertrandFit, CurveSpec, Family, GroupStructure, MateMode, Profile};

fn helix(n: usize) -> CurveSpec {
    CurveSpec::family(
        GroupStructure::abelian(),
        Family::AbelianHelix { a: 3.0, b: 4.0 },
    )
    .with_samples(n)
}

fn su2_curve() -> CurveSpec {
    CurveSpec::family(
        GroupStructure::su2(),
        Family::ExpProduct {
            f1: Profile::polynomial(vec![0.0, 1.0]),
            f2: Profile::sine(0.0, 0.5, 1.0),
            f3: Profile::polynomial(vec![0.0, 0.0, 0.3]),
        },
    )
    .with_domain(0.0, 2.0)
}

fn stages(c: &mut Criterion) {
    let opts = FrenetOptions::default();
    let spec = helix(2048);
    c.bench_function("build_curve/helix_2048", |b| {
        b.iter(|| build_curve(black_box(&spec)).unwrap())
    });

    let curve = build_curve(&spec).unwrap();
    c.bench_function("analyze/helix_2048", |b| {
        b.iter(|| analyze(black_box(&curve), &opts).unwrap())
    });

    let su2 = build_curve(&su2_curve()).unwrap();
    c.bench_function("analyze/su2_2048", |b| {
        b.iter(|| analyze(black_box(&su2), &opts).unwrap())
    });

    let fd = analyze(&curve, &opts).unwrap();
    c.bench_function("classify/helix_2048", |b| {
        b.iter(|| classify(black_box(&fd), &ClassifyOptions::default()).unwrap())
    });

    let small = analyze(&build_curve(&helix(512)).unwrap(), &opts).unwrap();
    let t = small.torsion().unwrap();
    let fit = BertrandFit::with_lambda(
        &small.retained_values(small.kappa()),
        &small.retained_values(&t.harmonic),
        1.0,
    )
    .unwrap();
    c.bench_function("mate/helix_512", |b| {
        b.iter(|| {
            construct_mate(
                black_box(&small),
                1.0,
                MateMode::Geodesic,
                Some(&fit),
                &opts,
            )
            .unwrap()
        })
    });
    let mate = construct_mate(&small, 1.0, MateMode::Geodesic, Some(&fit), &opts).unwrap();
    c.bench_function("verify/helix_512", |b| {
        b.iter(|| {
            verify_couple(black_box(&small), &mate, &fit, &ClassifyOptions::default()).unwrap()
        })
    });
}

fn fleet(c: &mut Criterion) {
    let members = fleet_members();
    let mut group = c.benchmark_group("fleet");
    group.sample_size(10);
    group.bench_function("run_members", |b| {
        b.iter(|| run_members(black_box(&members)))
    });
    group.finish();
}

criterion_group!(benches, stages, fleet);
criterion_main!(benches);
