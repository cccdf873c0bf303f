use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cvqe_bench::{model, records};
use cvqe_core::cvqe::{evaluate, scan_theta};
use cvqe_core::experiment::Mode;
use cvqe_core::hubbard::Lattice;
use cvqe_core::onebody::{compile_thouless, decompose, random_unitary};
use cvqe_core::sim;

fn circuits(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_unitary(&mut rng, 8);
    c.bench_function("decompose+compile 8x8", |b| b.iter(|| compile_thouless(&decompose(black_box(&f)).unwrap())));

    let m = model(Lattice::square4(), 2.0);
    let circuit = m.sea.circuit().unwrap();
    c.bench_function("simulate square4 sea", |b| b.iter(|| sim::apply(&sim::vacuum(8), black_box(&circuit)).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let m = model(Lattice::square4(), 2.0);
    let mut g = c.benchmark_group("records");
    g.sample_size(10);
    g.bench_function("square4 full 1e5 shots", |b| b.iter(|| records(&m, Mode::Full, 100_000)));
    g.bench_function("square4 infinite-shot", |b| b.iter(|| records(&m, Mode::InfiniteShot, 0)));
    g.finish();
}

fn replay(c: &mut Criterion) {
    for lattice in [Lattice::square4(), Lattice::triangular4()] {
        let m = model(lattice.clone(), 2.0);
        let rec = records(&m, Mode::Full, 100_000);
        let theta = m.gutzwiller(0.5);
        c.bench_function(&format!("evaluate {} one θ", lattice.kind()), |b| {
            b.iter(|| evaluate(black_box(&rec), &m.dressed, &theta).unwrap())
        });
        let grid: Vec<_> = (0..100).map(|i| m.gutzwiller(0.03 * i as f64)).collect();
        c.bench_function(&format!("scan {} 100 θ", lattice.kind()), |b| {
            b.iter(|| scan_theta(black_box(&rec), &m.dressed, &grid).unwrap())
        });
    }
}

criterion_group!(benches, circuits, sampling, replay);
criterion_main!(benches);
