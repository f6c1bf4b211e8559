use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use tricok::modular::PadicRing;
use tricok::plinalg::{dense, gf2, invariant_valuations, streamed_valuations, TriMatrix};
use tricok::rng::{purpose, substream};

fn random(p: u64, e: u32, n: usize) -> TriMatrix {
    let ring = PadicRing::new(p, e).unwrap();
    let mut rng = substream(3, purpose::MATRIX, n as u64);
    TriMatrix::from_fn(ring, n, |_, _| rng.random_range(0..ring.modulus()))
}

fn corank(c: &mut Criterion) {
    let mut g = c.benchmark_group("corank_p2");
    g.sample_size(10);
    for n in [256usize, 1024, 4096] {
        let m = random(2, 1, n);
        g.bench_with_input(BenchmarkId::new("bitpacked", n), &m, |b, m| b.iter(|| gf2::corank(m)));
        if n <= 1024 {
            g.bench_with_input(BenchmarkId::new("generic", n), &m, |b, m| b.iter(|| dense::corank_generic(m)));
        }
    }
    g.finish();
}

fn valuations(c: &mut Criterion) {
    let mut g = c.benchmark_group("valuations");
    g.sample_size(10);
    for (p, n) in [(2u64, 256usize), (3, 256), (2, 1024)] {
        let m = random(p, 3, n);
        let label = format!("p{p}_n{n}");
        g.bench_with_input(BenchmarkId::new("stream", &label), &m, |b, m| b.iter(|| streamed_valuations(m, 3).unwrap()));
        if n <= 256 {
            g.bench_with_input(BenchmarkId::new("dense", &label), &m, |b, m| b.iter(|| invariant_valuations(m)));
        }
    }
    g.finish();
}

criterion_group!(benches, corank, valuations);
criterion_main!(benches);
