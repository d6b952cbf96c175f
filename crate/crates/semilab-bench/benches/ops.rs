use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use semilab_core::linalg::Element;
use semilab_core::resolvent::resolvent_solve;
use semilab_core::sample::{random_elements, random_q_matrix};
use semilab_core::semigroup::{exp_series, SemigroupHandle};
use semilab_core::markov::transition_mc;

fn bench_exp_series(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("exp_series");
    for dim in [4usize, 8, 16] {
        let q = random_q_matrix(&mut rng, dim, 2.0);
        let x = random_elements(&mut rng, dim, 1).pop().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| exp_series(&q, 1.0, &x, 1e-13).unwrap())
        });
    }
    group.finish();
}

fn bench_resolvent(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let q = random_q_matrix(&mut rng, 8, 2.0);
    let x = random_elements(&mut rng, 8, 1).pop().unwrap();
    c.bench_function("resolvent_solve_8", |b| {
        b.iter(|| resolvent_solve(&q, 1.0, &x).unwrap())
    });
    let h = SemigroupHandle::new(q);
    let tb = semilab_core::TypeBound { m: 1.0, omega: 0.0 };
    c.bench_function("resolvent_quadrature_8", |b| {
        b.iter(|| {
            semilab_core::resolvent::resolvent_quadrature(&h, 1.0, &x, &tb, 1e-8).unwrap()
        })
    });
}

fn bench_transition_mc(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let q = random_q_matrix(&mut rng, 6, 2.0);
    let f: Vec<f64> = (0..6).map(|i| i as f64).collect();
    c.bench_function("transition_mc_10k", |b| {
        b.iter(|| transition_mc(&q, 1.0, &f, 0, 10_000, 7).unwrap())
    });
    let _ = Element::zeros(1);
}

criterion_group!(benches, bench_exp_series, bench_resolvent, bench_transition_mc);
criterion_main!(benches);
