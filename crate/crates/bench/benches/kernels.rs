use anonbandit::decomp::{greedy_decompose, lp_decompose, random_decompose};
use anonbandit::env::gen_uniform_instance;
use anonbandit::feedback::elicit;
use anonbandit::learners::run_alg1;
use anonbandit::{
    Alg1Config, Assignment, BanditEnv, BatchedGraph, Decomposer, SeedStreams, Simulator, Stream,
};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

/// 30 users over 5 arms; user `i` demands arms `i % 5` and `(i + 1) % 5`,
/// so every arm has 12 demanders.
fn ring_graph(demand: usize) -> BatchedGraph {
    let sets = (0..30).map(|i| vec![i % 5, (i + 1) % 5]).collect();
    BatchedGraph::new(demand, 5, sets).unwrap()
}

fn decompositions(c: &mut Criterion) {
    let graph = ring_graph(200);
    c.bench_function("greedy_decompose n30 k5", |b| {
        b.iter(|| greedy_decompose(black_box(&graph), 4))
    });
    c.bench_function("random_decompose n30 k5", |b| {
        let mut rng = SeedStreams::new(1).stream(Stream::Algorithm);
        b.iter(|| random_decompose(black_box(&graph), 4, &mut rng))
    });
    c.bench_function("lp_decompose n30 k5 u10", |b| {
        b.iter(|| lp_decompose(black_box(&graph), 4, 10).unwrap())
    });
}

fn elicitation(c: &mut Criterion) {
    let instance = gen_uniform_instance(50, 5, 4, 1_000_000, 3).unwrap();
    let assignment = Assignment::new((0..50).map(|i| i % 5).collect());
    let mut sim = Simulator::new(&instance, SeedStreams::new(3).stream(Stream::Rewards));
    c.bench_function("elicit n50 c4", |b| {
        b.iter(|| {
            if sim.remaining() < 10 {
                sim = Simulator::new(&instance, SeedStreams::new(3).stream(Stream::Rewards));
            }
            elicit(&mut sim, black_box(&assignment)).unwrap()
        })
    });
}

fn learner(c: &mut Criterion) {
    let instance = gen_uniform_instance(50, 5, 4, 20_000, 4).unwrap();
    let mut group = c.benchmark_group("alg1");
    group.sample_size(10);
    for d in [Decomposer::Greedy, Decomposer::Random, Decomposer::Lp] {
        let mut config = Alg1Config::new(d);
        config.gamma_const = 0.1;
        group.bench_function(format!("{} n50 k5 t20000", d.name()), |b| {
            b.iter(|| run_alg1(black_box(&instance), &config, 9).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, decompositions, elicitation, learner);
criterion_main!(benches);
