//! Compares the data-parallel trial runner against the sequential fallback
//! on two representative workloads: the square-root transfer (modular
//! arithmetic bound) and the residuosity coin flip (session bound). Both
//! runners produce identical results; this measures only the speedup.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rand::SeedableRng;
use twoparty::derived::run_coin_flip_qrp;
use twoparty::numtheory::gen_blum;
use twoparty::oblivious::run_rabin;
use twoparty::session::{InProcTransport, SessionRng};
use twoparty::stats::{run_trials, run_trials_sequential};

const TRIALS: u64 = 200;

fn rabin_trial(modulus: &twoparty::numtheory::BlumModulus, i: u64) -> bool {
    let mut t = InProcTransport::new();
    let (_, outcome) = run_rabin(modulus.clone(), 2 * i, 2 * i + 1, &mut t).unwrap();
    matches!(outcome, twoparty::oblivious::RabinOutcome::Factors(_, _))
}

fn coin_trial(i: u64) -> bool {
    let mut t = InProcTransport::new();
    let (_, coin) = run_coin_flip_qrp(24, 2 * i, 2 * i + 1, &mut t).unwrap();
    coin.winner == twoparty::session::Role::B
}

fn bench_runners(c: &mut Criterion) {
    let mut rng = SessionRng::seed_from_u64(7);
    let modulus = gen_blum(48, &mut rng);

    let mut group = c.benchmark_group("rabin_transfer");
    group.bench_function(BenchmarkId::new("parallel", TRIALS), |b| {
        b.iter(|| run_trials(TRIALS, |i| rabin_trial(&modulus, i)))
    });
    group.bench_function(BenchmarkId::new("sequential", TRIALS), |b| {
        b.iter(|| run_trials_sequential(TRIALS, |i| rabin_trial(&modulus, i)))
    });
    group.finish();

    let mut group = c.benchmark_group("coin_flip");
    group.bench_function(BenchmarkId::new("parallel", TRIALS), |b| {
        b.iter(|| run_trials(TRIALS, coin_trial))
    });
    group.bench_function(BenchmarkId::new("sequential", TRIALS), |b| {
        b.iter(|| run_trials_sequential(TRIALS, coin_trial))
    });
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_runners
}
criterion_main!(benches);
