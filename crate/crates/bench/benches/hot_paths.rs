use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fracheat::hitting::{small_ball_scaling, SmallBallMethod, SmallBallSetup};
use fracheat::kernel::{green_kernel, green_kernel_quadrature};
use fracheat::potential::{capacity, hausdorff_premeasure, BoxSpec, CapacityOptions, CompactSetSpec, RieszOrder};
use fracheat::spde::solve;
use fracheat::{Alpha, ModelSpec, Preset, Scheme, SolverGrid};

fn al(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

fn kernel(c: &mut Criterion) {
    let a = al(1.5);
    c.bench_function("green_kernel alpha 1.5", |b| b.iter(|| green_kernel(a, black_box(0.7), black_box(1.3)).unwrap()));
    c.bench_function("green_kernel_quadrature alpha 1.5", |b| {
        b.iter(|| green_kernel_quadrature(a, black_box(0.7), black_box(1.3)).unwrap())
    });
}

fn solver(c: &mut Criterion) {
    let g = SolverGrid::new(al(1.5), 1.0, 4.0, 64, 256).unwrap();
    let walsh = ModelSpec::new(1, Preset::BoundedSmooth);
    let exact = ModelSpec::new(1, Preset::Additive).with_scheme(Scheme::ExactConvolution);
    c.bench_function("solve walsh 64x256", |b| b.iter(|| solve(&walsh, &g, black_box(7)).unwrap()));
    c.bench_function("solve exact 64x256", |b| b.iter(|| solve(&exact, &g, black_box(7)).unwrap()));
}

fn potential(c: &mut Criterion) {
    let unit = CompactSetSpec::from_boxes(1, 2.0, vec![BoxSpec { lo: vec![0.0], hi: vec![1.0] }]).unwrap();
    let opts = CapacityOptions::default();
    c.bench_function("capacity [0,1] mesh 1/256", |b| {
        b.iter(|| capacity(&unit, RieszOrder(0.5), black_box(1.0 / 256.0), opts).unwrap())
    });
    c.bench_function("hausdorff [0,1] eps 0.01", |b| {
        b.iter(|| hausdorff_premeasure(&unit, RieszOrder(1.0), black_box(0.01)).unwrap())
    });
}

fn small_ball(c: &mut Criterion) {
    let setup = SmallBallSetup {
        alpha: al(2.0),
        d: 1,
        z: vec![0.0],
        levels: vec![2, 3, 4],
        n_samples: 2000,
        seed0: 0,
        nodes_per_side: 3,
        eta_report: 0.2,
        method: SmallBallMethod::ExactGaussian { horizon: 1.0 },
    };
    c.bench_function("small ball exact 3 levels x 2000", |b| b.iter(|| small_ball_scaling(black_box(&setup)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernel, solver, potential, small_ball
}
criterion_main!(benches);
