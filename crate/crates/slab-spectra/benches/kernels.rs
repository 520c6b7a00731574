//! Parallel vs sequential timings of the two hot kernels: Q(z) assembly and one simulator step.
//!
//! "sequential" runs inside a one-thread rayon pool, "parallel" in the global pool. Without
//! the `parallel` feature only the sequential variant exists.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slab_spectra::discretize::{assemble_q, CollisionKernel, GridSpec, Profile};
use slab_spectra::transport_sim::{Field, MuQuad, MuRule, Propagator, SimParams, XGrid};
use slab_spectra::C64;
use std::hint::black_box;

type Runner = Box<dyn Fn(&mut (dyn FnMut() + Send))>;

fn variants() -> Vec<(&'static str, Runner)> {
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
        vec![
            ("sequential", Box::new(move |f: &mut (dyn FnMut() + Send)| one.install(f)) as Runner),
            ("parallel", Box::new(|f: &mut (dyn FnMut() + Send)| f())),
        ]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![("sequential", Box::new(|f: &mut (dyn FnMut() + Send)| f()) as Runner)]
    }
}

fn assembly(c: &mut Criterion) {
    let profile = Profile::step(1.0, 1.0);
    let mut group = c.benchmark_group("assemble_q");
    group.sample_size(10);
    for (name, kernel) in [
        ("isotropic", CollisionKernel::isotropic()),
        ("legendre3", CollisionKernel::legendre(&[1.0, 0.8, 0.5]).unwrap()),
    ] {
        let g = GridSpec::from_profile(&profile, 128).unwrap();
        for (mode, run) in variants() {
            group.bench_function(BenchmarkId::new(name, mode), |b| {
                b.iter(|| run(&mut || {
                    black_box(assemble_q(C64::new(1.0, 1.0), &g, &kernel).unwrap());
                }))
            });
        }
    }
    group.finish();
}

fn sim_step(c: &mut Criterion) {
    let profile = Profile::step(1.0, 1.0);
    let mu = MuQuad::new(MuRule::HalfRangeGauss { per_half: 16 }).unwrap();
    let params = SimParams { x_max: 31.5, nx: 4096, dt: 0.05, max_cfl: 8.0 };
    let prop = Propagator::new(&params, &mu, &profile, &CollisionKernel::isotropic()).unwrap();
    let x = XGrid { x_max: params.x_max, n: params.nx };
    let u0 = Field::from_fn(x, mu.clone(), |x, m| if x.abs() < 1.0 { 1.0 + 0.3 * m } else { 0.0 });
    let mut group = c.benchmark_group("propagator_step_4096x32");
    for (mode, run) in variants() {
        group.bench_function(mode, |b| {
            let mut u = u0.clone();
            b.iter(|| run(&mut || prop.step(&mut u)))
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, sim_step);
criterion_main!(benches);
