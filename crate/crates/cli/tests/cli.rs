use std::path::Path;
use std::process::{Command, Output};

fn madenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_madenet"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn small_suite(dir: &Path) {
    let o = madenet(&["gen-envs", "--out", p(dir), "--seed", "4", "--count", "2", "--size", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_envs_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = madenet(&["gen-envs", "--out", p(d.path()), "--seed", "11"]);
        assert_eq!(code(&o), 0);
    }
    for k in 0..10 {
        let name = format!("env_{k:02}.grid");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    assert!(!a.path().join("env_10.grid").exists());
}

#[test]
fn seed_is_mandatory() {
    let d = tempfile::tempdir().unwrap();
    let o = madenet(&["gen-envs", "--out", p(d.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "count = 2\nbogus = 1\n").unwrap();
    let o = madenet(&["gen-envs", "--out", p(d.path()), "--seed", "1", "--config", p(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn learned_method_needs_weights() {
    let d = tempfile::tempdir().unwrap();
    small_suite(d.path());
    let out = d.path().join("eval");
    let o = madenet(&["eval", "--suite", p(d.path()), "--out", p(&out), "--seed", "1", "--methods", "made-net"]);
    assert_eq!(code(&o), 2);
    let missing = d.path().join("nowhere");
    let o = madenet(&[
        "eval", "--suite", p(d.path()), "--out", p(&out), "--seed", "1", "--methods", "made-net", "--made-net",
        p(&missing),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!out.join("trials.csv").exists());
}

#[test]
fn eval_summarize_plot_pipeline() {
    let d = tempfile::tempdir().unwrap();
    small_suite(d.path());
    let run = |out: &Path| {
        let o = madenet(&[
            "eval", "--suite", p(d.path()), "--out", p(out), "--seed", "9", "--methods", "nf,random", "--csps",
            "0,1",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    let a = d.path().join("a");
    let b = d.path().join("b");
    run(&a);
    run(&b);
    let trials = std::fs::read_to_string(a.join("trials.csv")).unwrap();
    assert_eq!(trials, std::fs::read_to_string(b.join("trials.csv")).unwrap());
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 4 * 2);

    let o = madenet(&["summarize", "--input", p(&a)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
    assert!(a.join("curves.csv").exists());

    let o = madenet(&["plot", "--input", p(&a), "--out", p(&a.join("plots"))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(a.join("plots").join("steps.svg")).unwrap();
    let points = madenet_core::harness::parse_plot_data(&svg);
    assert_eq!(points.len(), 4);
    for line in summary.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (csp, steps): (f64, f64) = (f[1].parse().unwrap(), f[2].parse().unwrap());
        assert!(points.iter().any(|q| q.series == f[0] && q.x == csp && q.y == steps), "{line}");
    }
}

#[test]
fn train_then_evaluate_learned() {
    let d = tempfile::tempdir().unwrap();
    small_suite(d.path());
    let weights = d.path().join("w");
    let o = madenet(&[
        "train", "--out", p(&weights), "--seed", "3", "--episodes", "2", "--set", "width=10", "--set", "height=10",
        "--set", "batch_size=2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["cep.madn", "dep0.madn", "dep1.madn", "dep2.madn", "training_log.csv"] {
        assert!(weights.join(f).exists(), "{f}");
    }
    let log = std::fs::read_to_string(weights.join("training_log.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "episode,team_reward,steps,explored_cells,epsilon");
    assert_eq!(log.lines().count(), 3);

    let out = d.path().join("eval");
    let o = madenet(&[
        "eval", "--suite", p(d.path()), "--out", p(&out), "--seed", "1", "--made-net", p(&weights), "--methods",
        "made-net", "--csps", "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trials = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 4);
    assert!(trials.lines().skip(1).all(|l| l.starts_with("made-net,")));
}

#[test]
fn train_dt_writes_no_centralized_weights() {
    let d = tempfile::tempdir().unwrap();
    let o = madenet(&[
        "train-dt", "--out", p(d.path()), "--seed", "3", "--episodes", "1", "--team-size", "2", "--set",
        "width=10", "--set", "height=10",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!d.path().join("cep.madn").exists());
    assert!(d.path().join("dep1.madn").exists());
}

#[test]
fn invalid_training_config_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = madenet(&["train", "--out", p(d.path()), "--seed", "3", "--set", "learning_rate=-1"]);
    assert_eq!(code(&o), 2);
}
