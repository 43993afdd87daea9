use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use magic_bcs::bcs::{classical_solve, pauli_solve, verify_certificate};
use magic_bcs::game::sample_question;
use magic_bcs::gf2::{solve, BitRow, Gf2Matrix, Gf2System};
use magic_bcs::quantum::{permutation_solution, play_round};
use magic_bcs::shallow::{
    lightcone_disjoint_probability, random_local_dag, run_sampling_trial, sample_instance,
    BetaChoice,
};
use magic_bcs::{Bcs, GameBcs, PauliOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_system(rows: usize, cols: usize, seed: u64) -> Gf2System {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<Vec<bool>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen()).collect())
        .collect();
    let rhs: Vec<bool> = (0..rows).map(|_| rng.gen()).collect();
    let strs: Vec<String> = bits
        .iter()
        .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect())
        .collect();
    let refs: Vec<&str> = strs.iter().map(String::as_str).collect();
    Gf2System::new(Gf2Matrix::from_strs(&refs), BitRow::from_bits(&rhs))
}

fn gf2(c: &mut Criterion) {
    let mut group = c.benchmark_group("gf2_solve");
    for size in [64, 256, 1024] {
        let system = random_system(size, size, 1);
        group.bench_with_input(BenchmarkId::from_parameter(size), &system, |b, s| {
            b.iter(|| solve(black_box(s)))
        });
    }
    group.finish();
}

fn pauli(c: &mut Criterion) {
    let mp = Bcs::mermin_peres();
    c.bench_function("pauli_solve/mermin_peres", |b| {
        b.iter(|| pauli_solve(black_box(&mp)))
    });

    let mut group = c.benchmark_group("pauli_solve/game");
    group.sample_size(10);
    for n in [4, 6, 8] {
        let game = GameBcs::build(n, false).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &game.bcs, |b, bcs| {
            b.iter(|| pauli_solve(black_box(bcs)))
        });
    }
    group.finish();

    let game = GameBcs::build(8, false).unwrap();
    c.bench_function("classical_solve/game8", |b| {
        b.iter(|| classical_solve(black_box(&game.bcs)))
    });
    if let Ok(PauliOutcome::Certificate(cert)) = pauli_solve(&game.bcs) {
        let mut group = c.benchmark_group("verify_certificate");
        group.sample_size(10);
        group.bench_function("game8", |b| {
            b.iter(|| verify_certificate(&game.bcs, black_box(&cert)))
        });
        group.finish();
    }
}

fn strategies(c: &mut Criterion) {
    let game = GameBcs::build(8, false).unwrap();
    let sol = permutation_solution(&game).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("play_round/n8", |b| {
        b.iter(|| {
            let q = sample_question(&game, &mut rng);
            play_round(&game, &sol, q, &mut rng).unwrap()
        })
    });

    let modified = GameBcs::build(8, true).unwrap();
    let msol = permutation_solution(&modified).unwrap();
    c.bench_function("sampling_trial/N1000", |b| {
        b.iter(|| {
            let inst = sample_instance(1000, &modified, BetaChoice::InConstraint, &mut rng);
            run_sampling_trial(&inst, &modified, &msol, &mut rng).unwrap()
        })
    });
}

fn lightcones(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut group = c.benchmark_group("lightcone_probability");
    group.sample_size(10);
    for n in [1_000, 10_000] {
        let dag = random_local_dag(n, 3, 4, 2, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(n), &dag, |b, d| {
            b.iter(|| lightcone_disjoint_probability(black_box(d)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gf2, pauli, strategies, lightcones);
criterion_main!(benches);
