//! Performance tracking for the hot paths: the pair-response matrix
//! (closed form, quadrature, and table interpolation), one semi-implicit
//! step of each PDE solver, and one sweep of the particle simulation.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use needles::conformal::{build_t_table, sc_constant, sc_constant_quadrature, t_matrix};
use needles::geometry::Torus2;
use needles::homogeneous::{self, AngularDensity};
use needles::hydro::{self, needle_coefficient, DriftField, SpatialDensity};
use needles::kinetic::{self, KineticParams, PhaseDensity};
use needles::particle::{self, DriftSpec, SimParams};
use std::hint::black_box;

fn bench_conformal(c: &mut Criterion) {
    let mut group = c.benchmark_group("conformal");
    group.bench_function("sc_constant_closed_form", |b| {
        b.iter(|| sc_constant(black_box(1.0)).expect("interior angle"))
    });
    group.bench_function("sc_constant_quadrature", |b| {
        b.iter(|| sc_constant_quadrature(black_box(1.0), 1e-11).expect("interior angle"))
    });
    group.bench_function("t_matrix_closed_form", |b| {
        b.iter(|| t_matrix(black_box(1.0)).expect("interior angle"))
    });
    let table = build_t_table(17).expect("table");
    group.bench_function("t_table_eval", |b| {
        b.iter(|| table.eval(black_box(1.0)).expect("domain"))
    });
    group.finish();
}

fn bench_mean_field(c: &mut Criterion) {
    let mut group = c.benchmark_group("mean_field");
    let p0 = AngularDensity::perturbed_cosine(256, 1, 0.05).expect("density");
    let phi = 1.1 * homogeneous::threshold(1);
    group.bench_function("evolve_step_m256", |b| {
        b.iter(|| homogeneous::evolve(black_box(&p0), phi, 1.0, 1e-3, 1e-3, &[]).expect("step"))
    });
    group.bench_function("stationary_m256", |b| {
        b.iter(|| {
            homogeneous::stationary_fixed_point(black_box(&p0), phi, 1e-10, 10_000)
                .expect("iteration")
        })
    });
    group.finish();
}

fn bench_kinetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("kinetic");
    group.sample_size(20);
    let table = build_t_table(17).expect("table");
    let torus = Torus2::square(1.0).expect("box");
    for (nx, mt) in [(16, 16), (32, 32)] {
        let params = KineticParams::new(1.0, 1.0, 1.0, &table, mt).expect("params");
        let p0 = PhaseDensity::uniform(nx, nx, mt, torus).expect("density");
        let dt = kinetic::default_dt(&p0, &params);
        group.bench_function(format!("evolve_step_{nx}x{nx}x{mt}"), |b| {
            b.iter(|| kinetic::evolve(black_box(&p0), &params, dt, Some(dt), &[]).expect("step"))
        });
    }
    group.finish();
}

fn bench_hydro(c: &mut Criterion) {
    let mut group = c.benchmark_group("hydro");
    let torus = Torus2::square(1.0).expect("box");
    let rho0 = SpatialDensity::gaussian_bump(64, 64, torus, 0.15).expect("density");
    let c_needle = needle_coefficient(2.0);
    let dt = hydro::stable_dt(&rho0, c_needle);
    group.bench_function("evolve_step_64x64", |b| {
        b.iter(|| {
            hydro::evolve(
                black_box(&rho0),
                &DriftField::None,
                c_needle,
                dt,
                &[],
                Some(dt),
            )
            .expect("step")
        })
    });
    group.finish();
}

fn bench_particle(c: &mut Criterion) {
    let mut group = c.benchmark_group("particle");
    group.sample_size(20);
    let params = SimParams {
        n: 100,
        eps: 0.1,
        d_t: 1.0,
        d_r: 1.0,
        dt: 1e-4,
        torus: Torus2::square(1.0).expect("box"),
        drift: DriftSpec::None,
        seed: 7,
    };
    let initial = particle::sample_sequential_initial(&params).expect("initial state");
    group.bench_function("sweep_n100_10steps", |b| {
        b.iter_batched(
            || initial.clone(),
            |state| particle::run_from(state, &params, 10.0 * params.dt, 100).expect("run"),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_conformal,
    bench_mean_field,
    bench_kinetic,
    bench_hydro,
    bench_particle
);
criterion_main!(benches);
