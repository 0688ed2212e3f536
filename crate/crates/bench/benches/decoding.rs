use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcnot_core::matching::max_weight_matching;
use tcnot_core::*;

fn prepared(experiment: Experiment, decoder: DecoderKind, d: usize, p: f64) -> PreparedExperiment {
    let cfg = ExperimentConfig { experiment, decoder, d, p, shots: 1, seed: 3, ..Default::default() };
    PreparedExperiment::new(&cfg).expect("valid configuration")
}

fn blossom(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 60;
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.3) {
                edges.push((i, j, rng.random_range(1..10_000)));
            }
        }
    }
    c.bench_function("blossom dense 60 vertices", |b| b.iter(|| max_weight_matching(n, black_box(&edges), true)));
}

fn decode(c: &mut Criterion) {
    let cases = [
        ("2scqm mwpm d=5 p=0.6%", Experiment::TwoScqm, DecoderKind::Mwpm),
        ("tcnot single_update d=5 p=0.6%", Experiment::Tcnot, DecoderKind::SingleUpdate),
        ("tcnot ordered d=5 p=0.6%", Experiment::Tcnot, DecoderKind::Ordered),
        ("teleport d=5 p=0.6%", Experiment::Teleport, DecoderKind::Teleport),
        ("ls_xx mwpm d=5 p=0.6%", Experiment::LsXx, DecoderKind::Mwpm),
    ];
    for (name, e, k) in cases {
        let prep = prepared(e, k, 5, 0.006);
        let samples: Vec<DetectionSample> = (0..64).map(|s| prep.sampler.sample(3, s)).collect();
        let mut i = 0;
        c.bench_function(&format!("decode {name}"), |b| {
            b.iter(|| {
                i = (i + 1) % samples.len();
                prep.decoder.decode(black_box(&samples[i])).unwrap()
            })
        });
    }
}

fn sample(c: &mut Criterion) {
    let prep = prepared(Experiment::Tcnot, DecoderKind::Ordered, 7, 0.006);
    let mut shot = 0;
    c.bench_function("sample tcnot d=7 p=0.6%", |b| {
        b.iter_batched(
            || {
                shot += 1;
                shot
            },
            |s| prep.sampler.sample(3, s),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, blossom, decode, sample);
criterion_main!(benches);
