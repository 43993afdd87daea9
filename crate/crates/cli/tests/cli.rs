use magic_bcs::bcs::{parse_bcs, parse_solution, verify_certificate, verify_pauli_solution};
use magic_bcs::Certificate;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magic-bcs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_reports_counts_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("game8.bcs");
    let o = run(&["gen", "--n", "8", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("722 variables, 1037 constraints"));
    let bcs = parse_bcs(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((bcs.n_vars(), bcs.n_constraints()), (722, 1037));
    let names: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("game8.names.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(names.as_object().unwrap().len(), 722);
    assert_eq!(names["b1_2|3_4"], bcs.var_index("b1_2|3_4").unwrap());

    let o = run(&[
        "--format",
        "json",
        "gen",
        "--n",
        "8",
        "--modified",
        "--out",
        path(&out),
    ]);
    assert_eq!(json(&o)["constraints"], 1042);
}

#[test]
fn gen_rejects_tiny_games() {
    let o = run(&["gen", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mp = dir.path().join("mp.bcs");
    let chsh = dir.path().join("chsh.bcs");
    assert!(
        run(&["gen", "--preset", "mermin-peres", "--out", path(&mp)])
            .status
            .success()
    );
    assert!(run(&["gen", "--preset", "chsh", "--out", path(&chsh)])
        .status
        .success());
    let mp_bcs = parse_bcs(&std::fs::read_to_string(&mp).unwrap()).unwrap();
    let chsh_bcs = parse_bcs(&std::fs::read_to_string(&chsh).unwrap()).unwrap();

    let sol_path = dir.path().join("mp.sol");
    let o = run(&["solve", path(&mp), "--out", path(&sol_path)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&sol_path).unwrap();
    assert!(text.starts_with("# qubits: 2"));
    let sol = parse_solution(&mp_bcs, &text).unwrap();
    assert!(verify_pauli_solution(&mp_bcs, &sol).ok());

    let cert_path = dir.path().join("chsh.json");
    let o = run(&["solve", path(&chsh), "--out", path(&cert_path)]);
    assert_eq!(o.status.code(), Some(3));
    let cert: Certificate =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    assert!(verify_certificate(&chsh_bcs, &cert));

    assert_eq!(
        run(&["solve", path(&mp), "--mode", "classical"])
            .status
            .code(),
        Some(3)
    );
    let o = run(&[
        "--format",
        "json",
        "solve",
        path(&chsh),
        "--mode",
        "classical",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bcs");
    std::fs::write(&bad, "a b = 2\n").unwrap();
    assert_eq!(run(&["solve", path(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.bcs");
    assert_eq!(run(&["solve", path(&missing)]).status.code(), Some(4));
}

#[test]
fn bound_and_classify() {
    let o = run(&["bound", "--n", "8"]);
    assert!(stdout(&o).contains("1 - 1/6252"));
    let v = json(&run(&["--format", "json", "bound", "--n", "8"]));
    assert_eq!(v["denominator"], 6252);
    assert_eq!(run(&["bound", "--n", "7"]).status.code(), Some(2));
    for (n, class) in [
        ("4", "CliffordOnly"),
        ("5", "Classical"),
        ("8", "MagicRequired"),
    ] {
        let v = json(&run(&["--format", "json", "classify", "--n", n]));
        assert_eq!(v["class"], class);
    }
}

#[test]
fn play_is_perfect_and_reproducible() {
    let a = run(&["play", "--n", "8", "--trials", "300", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).contains("wins 300/300"));
    let b = run(&[
        "play", "--n", "8", "--trials", "300", "--seed", "3", "--jobs", "3",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        run(&["play", "--n", "7", "--seed", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["play", "--n", "8"]).status.code(), Some(2));
    assert_eq!(
        run(&["play", "--n", "8", "--seed", "1", "--trials", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn simulate_logs_are_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let args = |p: &Path, jobs: &'static str| {
        vec![
            "--format".to_string(),
            "json".into(),
            "simulate".into(),
            "--mode".into(),
            "sampling".into(),
            "--sites".into(),
            "50".into(),
            "--trials".into(),
            "2000".into(),
            "--seed".into(),
            "9".into(),
            "--jobs".into(),
            jobs.into(),
            "--out".into(),
            path(p).into(),
        ]
    };
    let oa = run(&args(&a, "1").iter().map(String::as_str).collect::<Vec<_>>());
    let ob = run(&args(&b, "2").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let summary = json(&oa);
    assert_eq!(summary["invalid"], 0);
    assert_eq!(
        summary["case1"].as_u64().unwrap() + summary["case2"].as_u64().unwrap(),
        2000
    );
    let log = std::fs::read_to_string(&a).unwrap();
    let first: Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    for key in [
        "N", "n", "j", "k", "alpha", "beta", "seed", "outputs", "case",
    ] {
        assert!(first.get(key).is_some(), "missing {key}");
    }

    let o = run(&[
        "simulate",
        "--mode",
        "relation",
        "--sites",
        "200",
        "--trials",
        "500",
        "--seed",
        "1",
        "--any-beta",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("satisfied 500/500"));
    assert_eq!(
        run(&["simulate", "--n", "6", "--seed", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn lightcone_reports_fanin_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dag = dir.path().join("dag.json");
    let o = run(&[
        "--format",
        "json",
        "lightcone",
        "--sites",
        "16",
        "--out",
        path(&dag),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["fanin"], 14);
    assert_eq!(v["disjoint_probability"], 1.0);
    let again = json(&run(&[
        "--format",
        "json",
        "lightcone",
        "--dag",
        path(&dag),
    ]));
    assert_eq!(again["fanin"], 14);
    assert_eq!(again["depth"], v["depth"]);

    let r = json(&run(&[
        "--format",
        "json",
        "lightcone",
        "--sites",
        "500",
        "--fanin",
        "3",
        "--depth",
        "2",
        "--seed",
        "4",
    ]));
    assert!(r["disjoint_probability"].as_f64().unwrap() >= r["bound"].as_f64().unwrap());

    std::fs::write(&dag, "{not json").unwrap();
    assert_eq!(
        run(&["lightcone", "--dag", path(&dag)]).status.code(),
        Some(2)
    );
}

#[test]
fn recipes_list_targets() {
    let text = stdout(&run(&["recipes"]));
    for target in [
        "1 - 1/6252",
        "722 variables, 1037 constraints",
        "1/64",
        "K = 14",
    ] {
        assert!(text.contains(target), "missing {target}");
    }
}
