//! `magic-bcs`: solve constraint systems, generate the game family and run
//! seeded strategy simulations from the command line.
//!
//! Exit codes: 0 success, 1 internal error or violated exactness check,
//! 2 usage or parse error, 3 proven absence of a solution, 4 I/O error.

use clap::{Parser, Subcommand, ValueEnum};
use magic_bcs::bcs::{classical_outcome, format_solution, parse_bcs, pauli_solve, serialize_bcs};
use magic_bcs::game::{classify, clifford_bound_denominator, count_questions, sample_question};
use magic_bcs::quantum::{permutation_solution, play_round, verify_operator_solution};
use magic_bcs::shallow::{
    build_strategy_dag, check_relation, lightcone_bound, lightcone_disjoint_probability,
    random_local_dag, run_round1, run_round2, run_sampling_trial, sample_instance, BetaChoice,
    CircuitDag, ConeIndex, Round2Options, SamplingCase,
};
use magic_bcs::{Bcs, GameBcs, OperatorSolution, PauliOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn internal(message: impl fmt::Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: 4,
            message: format!("{}: {err}", path.display()),
        }
    }
}

type CliResult = Result<u8, Failure>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SolveMode {
    Classical,
    Pauli,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SimMode {
    Relation,
    Sampling,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    MerminPeres,
    Chsh,
}

#[derive(Parser, Debug)]
#[command(
    name = "magic-bcs",
    version,
    about = "Linear constraint systems, Pauli solutions and the magic game family"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a constraint system file; exit 3 when no solution exists.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMode::Pauli)]
        mode: SolveMode,
        /// Write the solution or certificate here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the game system for `n` (and a `.names.json` sidecar next to `--out`).
    Gen {
        #[arg(long, required_unless_present = "preset")]
        n: Option<usize>,
        #[arg(long)]
        modified: bool,
        /// A small textbook system instead of the game family.
        #[arg(long, value_enum, conflicts_with_all = ["n", "modified"])]
        preset: Option<Preset>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clifford winning-probability cap for even `n >= 6`.
    Bound {
        #[arg(long)]
        n: usize,
    },
    /// Which strategy class wins the game for `n` perfectly.
    Classify {
        #[arg(long)]
        n: usize,
    },
    /// Play the game with the permutation strategy.
    Play {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the shallow-circuit relation problem or its sampling variant.
    Simulate {
        #[arg(long, value_enum, default_value_t = SimMode::Relation)]
        mode: SimMode,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        sites: usize,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Let `beta` range over every variable, not only those of `alpha`.
        #[arg(long)]
        any_beta: bool,
        /// JSON-lines trial log.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lightcone statistics of a circuit: a JSON file, the strategy circuit or a random one.
    Lightcone {
        #[arg(long)]
        dag: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        sites: usize,
        /// Build a random local circuit with this fan-in (needs --depth and --seed).
        #[arg(long, requires_all = ["depth", "seed"], conflicts_with = "dag")]
        fanin: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the circuit as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Commands that reproduce the reference numbers, with their targets.
    Recipes,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

/// Writes to stdout, ignoring a closed pipe.
fn put(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(format: Format, text: String, value: Value) {
    match format {
        Format::Text => put(&format!("{text}\n")),
        Format::Json => put(&format!("{value}\n")),
    }
}

/// Runs `f` once per trial with an independent stream of the seeded generator,
/// so results do not depend on the thread count.
fn run_trials<T, F>(trials: u64, seed: u64, jobs: usize, f: F) -> Result<Vec<T>, Failure>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T, Failure> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(Failure::internal)?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                f(t, &mut rng)
            })
            .collect()
    })
}

fn solve(format: Format, path: &Path, mode: SolveMode, out: Option<&Path>) -> CliResult {
    let bcs = parse_bcs(&read(path)?).map_err(Failure::usage)?;
    let (code, body) = match mode {
        SolveMode::Classical => match classical_outcome(&bcs) {
            Ok(values) => {
                let body = match format {
                    Format::Text => bcs
                        .variables
                        .iter()
                        .zip(&values)
                        .map(|(name, v)| format!("{name} = {v}\n"))
                        .collect(),
                    Format::Json => {
                        let map: serde_json::Map<String, Value> = bcs
                            .variables
                            .iter()
                            .cloned()
                            .zip(values.iter().map(|&v| json!(v)))
                            .collect();
                        format!("{}\n", Value::Object(map))
                    }
                };
                (0, body)
            }
            Err(rows) => (3, format!("{}\n", json!({ "inconsistent_rows": rows }))),
        },
        SolveMode::Pauli => match pauli_solve(&bcs).map_err(Failure::internal)? {
            PauliOutcome::Solution(sol) => {
                let body = match format {
                    Format::Text => format_solution(&bcs, &sol).map_err(Failure::internal)?,
                    Format::Json => {
                        let map: serde_json::Map<String, Value> = bcs
                            .variables
                            .iter()
                            .cloned()
                            .zip(sol.assignment.iter().map(|p| json!(p.to_string())))
                            .collect();
                        format!("{}\n", json!({ "qubits": sol.qubits, "assignment": map }))
                    }
                };
                (0, body)
            }
            PauliOutcome::Certificate(cert) => (
                3,
                serde_json::to_string_pretty(&cert).map_err(Failure::internal)? + "\n",
            ),
        },
    };
    match out {
        Some(p) => {
            write(p, &body)?;
            let what = if code == 0 {
                "solution"
            } else {
                "no solution; certificate"
            };
            eprintln!("{what} written to {}", p.display());
        }
        None => put(&body),
    }
    Ok(code)
}

/// Reference `(variables, constraints)`; the variable count is not always given.
type CountTarget = (Option<usize>, usize);

fn names_path(out: &Path) -> PathBuf {
    out.with_extension("names.json")
}

fn gen(
    format: Format,
    n: Option<usize>,
    modified: bool,
    preset: Option<Preset>,
    out: Option<&Path>,
) -> CliResult {
    let (bcs, names, label, target): (Bcs, Option<String>, String, Option<CountTarget>) =
        match preset {
            Some(Preset::MerminPeres) => (
                Bcs::mermin_peres(),
                None,
                "mermin-peres".into(),
                Some((Some(9), 6)),
            ),
            Some(Preset::Chsh) => (Bcs::chsh(), None, "chsh".into(), None),
            None => {
                let n = n.expect("clap enforces n or preset");
                let game = GameBcs::build(n, modified).map_err(Failure::usage)?;
                let target = match (n, modified) {
                    (8, false) => Some((Some(722), 1037)),
                    (8, true) => Some((None, 1042)),
                    _ => None,
                };
                let label = format!("n={n}{}", if modified { " modified" } else { "" });
                (game.bcs.clone(), Some(game.names_json()), label, target)
            }
        };
    let text = serialize_bcs(&bcs);
    match out {
        Some(p) => {
            write(p, &text)?;
            if let Some(names) = &names {
                write(&names_path(p), names)?;
            }
        }
        None => put(&text),
    }
    let target_text = match target {
        Some((Some(v), c)) => format!(" (target {v} variables, {c} constraints)"),
        Some((None, c)) => format!(" (target {c} constraints)"),
        None => String::new(),
    };
    let banner = format!(
        "{label}: {} variables, {} constraints{target_text}",
        bcs.n_vars(),
        bcs.n_constraints()
    );
    let value = json!({
        "system": label,
        "variables": bcs.n_vars(),
        "constraints": bcs.n_constraints(),
        "target": target.map(|(v, c)| json!({ "variables": v, "constraints": c })),
    });
    // The banner goes to stderr when the system itself is on stdout.
    if out.is_some() {
        emit(format, banner, value);
    } else {
        match format {
            Format::Text => eprintln!("{banner}"),
            Format::Json => eprintln!("{value}"),
        }
    }
    if let Some(n) = n {
        let q = count_questions(n).map_err(Failure::usage)?;
        let expected = if modified { q.modified_alice } else { q.alice };
        if expected as usize != bcs.n_constraints()
            || q.bob as usize + modified_extra(n, modified) != bcs.n_vars()
        {
            return Err(Failure::internal(
                "generated system disagrees with the question counts",
            ));
        }
    }
    Ok(0)
}

/// Chain variables added by the modified construction.
fn modified_extra(n: usize, modified: bool) -> usize {
    if modified {
        n.saturating_sub(3)
    } else {
        0
    }
}

fn bound(format: Format, n: usize) -> CliResult {
    let d = clifford_bound_denominator(n).map_err(Failure::usage)?;
    let value = 1.0 - 1.0 / d as f64;
    let target = (n == 8).then_some("1 - 1/6252");
    let mut text = format!("n={n}: Clifford win probability <= 1 - 1/{d} = {value:.10}");
    if let Some(t) = target {
        text.push_str(&format!(" (target {t})"));
    }
    emit(
        format,
        text,
        json!({ "n": n, "denominator": d, "bound": value, "target": target }),
    );
    Ok(0)
}

fn classify_cmd(format: Format, n: usize) -> CliResult {
    let class = classify(n).map_err(Failure::usage)?;
    let name = format!("{class:?}");
    emit(
        format,
        format!("n={n}: {name}"),
        json!({ "n": n, "class": name }),
    );
    Ok(0)
}

fn magic_strategy(game: &GameBcs, tol: f64) -> Result<OperatorSolution, Failure> {
    let unsupported = || {
        Failure::usage(format!(
            "no permutation strategy wired for n={}; use an even n >= 4",
            game.n
        ))
    };
    if game.n % 2 == 1 {
        return Err(unsupported());
    }
    let sol = permutation_solution(game).map_err(|_| unsupported())?;
    let report = verify_operator_solution(&game.bcs, &sol).map_err(Failure::internal)?;
    if !report.passes(tol) {
        return Err(Failure::internal(format!(
            "strategy fails verification at tol {tol}: {report:?}"
        )));
    }
    Ok(sol)
}

fn play(format: Format, n: usize, trials: u64, seed: u64, tol: f64, jobs: usize) -> CliResult {
    let game = GameBcs::build(n, false).map_err(Failure::usage)?;
    let sol = magic_strategy(&game, tol)?;
    let results = run_trials(trials, seed, jobs, |_, rng| {
        let q = sample_question(&game, rng);
        play_round(&game, &sol, q, rng).map_err(Failure::internal)
    })?;
    let wins = results.iter().filter(|r| r.won).count() as u64;
    let rate = wins as f64 / trials as f64;
    emit(
        format,
        format!("n={n} seed={seed}: wins {wins}/{trials} (rate {rate:.6}, target 1)"),
        json!({ "n": n, "seed": seed, "trials": trials, "wins": wins, "rate": rate, "target": 1.0 }),
    );
    Ok(if wins == trials { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    format: Format,
    mode: SimMode,
    n: usize,
    sites: usize,
    trials: u64,
    seed: u64,
    tol: f64,
    jobs: usize,
    any_beta: bool,
    out: Option<&Path>,
) -> CliResult {
    if n != 8 {
        return Err(Failure::usage(
            "simulate needs n = 8 (three qubits per side)",
        ));
    }
    if sites < 2 {
        return Err(Failure::usage("--sites must be at least 2"));
    }
    let game = GameBcs::build(n, true).map_err(Failure::usage)?;
    let sol = magic_strategy(&game, tol)?;
    let beta = if any_beta {
        BetaChoice::Any
    } else {
        BetaChoice::InConstraint
    };
    let records = run_trials(trials, seed, jobs, |t, rng| {
        let inst = sample_instance(sites, &game, beta, rng);
        let (outputs, case, satisfied) = match mode {
            SimMode::Relation => {
                let tr = run_round1(&inst, rng).map_err(Failure::internal)?;
                let o = run_round2(&inst, &tr, &game, &sol, Round2Options::default(), rng)
                    .map_err(Failure::internal)?;
                let ok = check_relation(&inst, &o, &game).map_err(Failure::internal)?;
                (o, None, ok)
            }
            SimMode::Sampling => {
                let trial =
                    run_sampling_trial(&inst, &game, &sol, rng).map_err(Failure::internal)?;
                let ok = check_relation(&inst, &trial.outputs, &game).map_err(Failure::internal)?;
                (trial.outputs, Some(trial.case), ok)
            }
        };
        let record = json!({
            "N": inst.n_sites, "n": inst.n, "j": inst.j, "k": inst.k,
            "alpha": inst.alpha, "beta": inst.beta, "seed": seed, "trial": t,
            "outputs": { "alice": outputs.r_a, "bob": outputs.r_b },
            "case": case.map(|c| format!("{c:?}")),
            "relation": satisfied,
        });
        Ok((record, case, satisfied))
    })?;
    if let Some(p) = out {
        let log: String = records.iter().map(|(r, _, _)| format!("{r}\n")).collect();
        write(p, &log)?;
    }
    let satisfied = records.iter().filter(|r| r.2).count() as u64;
    match mode {
        SimMode::Relation => {
            emit(
                format,
                format!("relation N={sites} seed={seed}: satisfied {satisfied}/{trials} (target {trials}/{trials})"),
                json!({ "mode": "relation", "N": sites, "seed": seed, "trials": trials, "satisfied": satisfied }),
            );
            Ok(if satisfied == trials { 0 } else { 1 })
        }
        SimMode::Sampling => {
            let count = |c: SamplingCase| records.iter().filter(|r| r.1 == Some(c)).count() as u64;
            let (c1, c2, bad) = (
                count(SamplingCase::Case1),
                count(SamplingCase::Case2),
                count(SamplingCase::Invalid),
            );
            let p = 1.0 / 64.0;
            let rate = c1 as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            emit(
                format,
                format!(
                    "sampling N={sites} seed={seed}: case1 {c1}/{trials} = {rate:.5} (target 1/64 = {p:.5}, {:+.2} sigma), case2 {c2}, invalid {bad}",
                    (rate - p) / sigma
                ),
                json!({
                    "mode": "sampling", "N": sites, "seed": seed, "trials": trials,
                    "case1": c1, "case2": c2, "invalid": bad, "case1_rate": rate, "target": p,
                }),
            );
            Ok(if bad == 0 { 0 } else { 1 })
        }
    }
}

fn lightcone(
    format: Format,
    dag_path: Option<&Path>,
    sites: usize,
    random: Option<(usize, usize, u64)>,
    out: Option<&Path>,
) -> CliResult {
    let (dag, label) = match (dag_path, random) {
        (Some(p), _) => {
            let dag: CircuitDag = serde_json::from_str(&read(p)?).map_err(Failure::usage)?;
            (dag, p.display().to_string())
        }
        (None, Some((k, d, seed))) => {
            if sites < 2 || k == 0 || d == 0 {
                return Err(Failure::usage(
                    "random circuits need --sites >= 2, --fanin >= 1, --depth >= 1",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                random_local_dag(sites, k, d, 2, &mut rng),
                format!("random K<={k} D={d} seed={seed}"),
            )
        }
        (None, None) => {
            if sites < 2 {
                return Err(Failure::usage("--sites must be at least 2"));
            }
            let game = GameBcs::build(8, true).map_err(Failure::internal)?;
            (build_strategy_dag(sites, &game), "strategy".to_string())
        }
    };
    dag.validate().map_err(Failure::usage)?;
    if let Some(p) = out {
        write(p, &serde_json::to_string(&dag).map_err(Failure::internal)?)?;
    }
    let (k, d, n) = (dag.max_fanin(), dag.depth(), dag.sites.len());
    let cones = ConeIndex::new(&dag);
    let mut worst_ratio = 0.0f64;
    for s in &dag.sites {
        let o: Vec<usize> = s
            .alice_outputs
            .iter()
            .chain(&s.bob_outputs)
            .copied()
            .collect();
        if o.is_empty() {
            continue;
        }
        let cone = cones.backward(&o).map_err(Failure::usage)?;
        worst_ratio =
            worst_ratio.max(cone.len() as f64 / (o.len() as f64 * (k as f64).powi(d as i32)));
    }
    let p = lightcone_disjoint_probability(&dag).map_err(Failure::usage)?;
    let bound = lightcone_bound(k, d, n);
    let target = (label == "strategy").then_some(14);
    let mut text = format!(
        "{label}: {n} sites, {} gates, {} wires; max fan-in K={k}, depth D={d}\n\
         max |backward(O)| / (|O| K^D) = {worst_ratio:.4}\n\
         Pr[E_C] = {p:.6} (bound 1 - 48 K^D / N = {bound:.6})",
        dag.gates.len(),
        dag.wires.len()
    );
    if let Some(t) = target {
        text.push_str(&format!("\ntarget fan-in {t}"));
    }
    emit(
        format,
        text,
        json!({
            "circuit": label, "sites": n, "gates": dag.gates.len(), "wires": dag.wires.len(),
            "fanin": k, "depth": d, "backward_ratio": worst_ratio,
            "disjoint_probability": p, "bound": bound, "target_fanin": target,
        }),
    );
    let violated = worst_ratio > 1.0 || p < bound || target.is_some_and(|t| t != k);
    Ok(if violated { 1 } else { 0 })
}

const RECIPES: &[(&str, &str, &str)] = &[
    (
        "game size",
        "magic-bcs gen --n 8 --out game8.bcs",
        "722 variables, 1037 constraints",
    ),
    (
        "modified game",
        "magic-bcs gen --n 8 --modified --out game8m.bcs",
        "1042 constraints",
    ),
    ("Clifford cap", "magic-bcs bound --n 8", "1 - 1/6252"),
    (
        "classes",
        "magic-bcs classify --n 4   (and 5, 6)",
        "CliffordOnly, Classical, MagicRequired",
    ),
    (
        "Mermin-Peres",
        "magic-bcs gen --preset mermin-peres --out mp.bcs && magic-bcs solve mp.bcs",
        "2-qubit solution, exit 0",
    ),
    (
        "CHSH",
        "magic-bcs gen --preset chsh --out chsh.bcs && magic-bcs solve chsh.bcs",
        "certificate, exit 3",
    ),
    (
        "no Pauli solution",
        "magic-bcs solve game8.bcs",
        "certificate, exit 3",
    ),
    (
        "perfect play",
        "magic-bcs play --n 8 --trials 10000 --seed 1",
        "wins 10000/10000",
    ),
    (
        "relation problem",
        "magic-bcs simulate --mode relation --sites 1000 --trials 10000 --seed 1",
        "all satisfied",
    ),
    (
        "sampling problem",
        "magic-bcs simulate --mode sampling --sites 1000 --trials 100000 --seed 1",
        "case1 rate 1/64, invalid 0",
    ),
    (
        "fan-in",
        "magic-bcs lightcone --sites 64",
        "K = 14, constant depth",
    ),
];

fn recipes(format: Format) -> CliResult {
    let text = RECIPES
        .iter()
        .map(|(name, cmd, target)| format!("{name:<18} {cmd}\n{:<18} target: {target}", ""))
        .collect::<Vec<_>>()
        .join("\n");
    let value = Value::Array(
        RECIPES
            .iter()
            .map(|(name, cmd, target)| json!({ "name": name, "command": cmd, "target": target }))
            .collect(),
    );
    emit(format, text, value);
    Ok(0)
}

fn run(cli: Cli) -> CliResult {
    let f = cli.format;
    match cli.command {
        Command::Solve { path, mode, out } => solve(f, &path, mode, out.as_deref()),
        Command::Gen {
            n,
            modified,
            preset,
            out,
        } => gen(f, n, modified, preset, out.as_deref()),
        Command::Bound { n } => bound(f, n),
        Command::Classify { n } => classify_cmd(f, n),
        Command::Play {
            n,
            trials,
            seed,
            tol,
            jobs,
        } => play(f, n, trials, seed, tol, jobs),
        Command::Simulate {
            mode,
            n,
            sites,
            trials,
            seed,
            tol,
            jobs,
            any_beta,
            out,
        } => simulate(
            f,
            mode,
            n,
            sites,
            trials,
            seed,
            tol,
            jobs,
            any_beta,
            out.as_deref(),
        ),
        Command::Lightcone {
            dag,
            sites,
            fanin,
            depth,
            seed,
            out,
        } => {
            let random = fanin.map(|k| (k, depth.unwrap_or(1), seed.unwrap_or(0)));
            lightcone(f, dag.as_deref(), sites, random, out.as_deref())
        }
        Command::Recipes => recipes(f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
