//! Scaling benchmarks for the tableau engine: per-gate update cost and
//! per-shot sampling cost at n in {64, 256, 1024}.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rebit_core::stab::{random_rclifford_circuit, StabilizerTableau};

fn prepared_tableau(n: usize, seed: u64) -> StabilizerTableau {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circ = random_rclifford_circuit(n, 4 * n, &mut rng);
    let mut t = StabilizerTableau::init_zero(n).unwrap().with_seed(seed);
    t.apply_circuit(&circ).unwrap();
    t
}

fn bench_gate_application(c: &mut Criterion) {
    let mut group = c.benchmark_group("tableau_gate_application");
    for &n in &[64usize, 256, 1024] {
        group.throughput(Throughput::Elements((4 * n) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let circ = random_rclifford_circuit(n, 4 * n, &mut rng);
            b.iter(|| {
                let mut t = StabilizerTableau::init_zero(n).unwrap();
                t.apply_circuit(&circ).unwrap();
                t
            });
        });
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("tableau_sampling_per_shot");
    for &n in &[64usize, 256, 1024] {
        let t = prepared_tableau(n, 2);
        group.throughput(Throughput::Elements(64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| t.sample(64).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_gate_application, bench_sampling);
criterion_main!(benches);
