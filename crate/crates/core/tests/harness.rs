use madenet_core::harness::*;
use madenet_core::sim::GridEnvironment;
use madenet_core::world::SeriesPoint;

fn small_envs() -> Vec<GridEnvironment> {
    (0..3)
        .map(|k| GridEnvironment::generate(10, 10, suite_density(k, 3, 0.2, 0.4), 100 + k as u64).unwrap())
        .collect()
}

fn config(methods: Vec<Method>) -> EvalConfig {
    EvalConfig {
        methods,
        csps: vec![0.0, 0.5, 1.0],
        seed: 5,
        ..EvalConfig::default()
    }
}

fn run(methods: &[Method]) -> Vec<TrialRecord> {
    let cfg = config(methods.to_vec());
    let policies: Vec<(Method, Policy)> = methods.iter().map(|&m| (m, Policy::for_method(m, &cfg).unwrap())).collect();
    run_trials_in_memory(&small_envs(), &policies, &cfg).unwrap().0
}

#[test]
fn protocol_count_and_order() {
    let methods = [Method::Random, Method::Nf, Method::Ub];
    let records = run(&methods);
    assert_eq!(records.len(), 3 * 3 * 4 * 3);
    let keys: Vec<(usize, usize, usize, u64)> = records
        .iter()
        .map(|r| {
            (
                methods.iter().position(|&m| m == r.method).unwrap(),
                r.env,
                r.corner,
                (r.csp * 10.0) as u64,
            )
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &records {
        assert!(r.series.windows(2).all(|w| w[0].explored <= w[1].explored));
        assert_eq!(r.series.last().unwrap().distance_m, r.distance_m);
        assert_eq!(r.series.len(), r.steps as usize + 1);
        assert!(r.steps <= 300);
        assert_eq!(r.wall_ms, 0);
    }
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_trials_csv(&a, &run(&[Method::Nf, Method::Random])).unwrap();
    write_trials_csv(&b, &run(&[Method::Nf, Method::Random])).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn methods_share_trial_conditions() {
    let records = run(&[Method::Nf, Method::Pb]);
    let (nf, pb) = records.split_at(records.len() / 2);
    for (x, y) in nf.iter().zip(pb) {
        assert_eq!((x.env, x.corner, x.csp), (y.env, y.corner, y.csp));
        assert_eq!(x.series[0], y.series[0]);
        assert_eq!(x.reachable, y.reachable);
    }
}

#[test]
fn summary_matches_recomputation_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let records = run(&[Method::Nf, Method::Random]);
    let trials = dir.path().join("trials.csv");
    let series = dir.path().join("series.csv");
    write_trials_csv(&trials, &records).unwrap();
    write_series_csv(&series, &records).unwrap();
    let mut back = read_trials_csv(&trials).unwrap();
    read_series_csv(&series, &mut back).unwrap();
    assert_eq!(back, records);

    let (summary, curves) = summarize(&back);
    assert_eq!(summary.len(), 2 * 3);
    let text = std::fs::read_to_string(&trials).unwrap();
    for row in &summary {
        let cells: Vec<Vec<&str>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|f| f[0] == row.method.name() && f[3].parse::<f64>().unwrap() == row.csp)
            .collect();
        let mean = |i: usize| cells.iter().map(|f| f[i].parse::<f64>().unwrap()).sum::<f64>() / cells.len() as f64;
        assert_eq!(row.trials, cells.len());
        assert!((row.mean_steps - mean(4)).abs() < 1e-9);
        assert!((row.mean_distance_m - mean(5)).abs() < 1e-9);
        assert!((row.mean_interactions - mean(6)).abs() < 1e-9);
        assert!((row.mean_ofv - mean(7)).abs() < 1e-9);
        assert!((row.completion_rate - mean(8)).abs() < 1e-9);
    }
    // Coverage deciles increase with distance.
    for w in curves.windows(2) {
        if w[0].method == w[1].method && w[0].csp == w[1].csp {
            assert!(w[0].decile_pct < w[1].decile_pct);
            assert!(w[0].mean_distance_m <= w[1].mean_distance_m + 1e-9);
        }
    }
}

#[test]
fn single_record_summary_equals_record() {
    let records = run(&[Method::Nf]);
    let one = &records[7];
    let (summary, _) = summarize(std::slice::from_ref(one));
    assert_eq!(summary.len(), 1);
    let s = &summary[0];
    assert_eq!(s.mean_steps, one.steps as f64);
    assert_eq!(s.mean_distance_m, one.distance_m);
    assert_eq!(s.mean_ofv, one.ofv);
    assert_eq!(s.completion_rate, one.completed as u8 as f64);
}

#[test]
fn ofv_properties() {
    assert_eq!(compute_ofv(&[0.0, 10.0, 20.0], &[0.0, 2.0, 4.0]).unwrap(), 10.0);
    assert_eq!(compute_ofv(&[5.0, 6.0], &[0.0, 0.0]).unwrap(), 0.0);
    let e = [3.0, 8.0, 13.0, 20.0];
    let d = [0.0, 1.5, 2.0, 7.0];
    let doubled: Vec<f64> = d.iter().map(|x| 2.0 * x).collect();
    let a = compute_ofv(&e, &d).unwrap();
    assert!((compute_ofv(&e, &doubled).unwrap() - a / 2.0).abs() < 1e-12);
    assert!(matches!(compute_ofv(&e, &d[..3]), Err(HarnessError::LengthMismatch { .. })));
}

#[test]
fn decile_interpolation_is_linear() {
    let series: Vec<SeriesPoint> = (0..=4)
        .map(|t| SeriesPoint {
            t,
            explored: 25 * t as usize,
            covered: 25 * t as usize,
            distance_m: 8.0 * t as f64,
        })
        .collect();
    let d = decile_distances(&series, 100);
    for (k, v) in d.iter().enumerate() {
        assert!((v.unwrap() - 3.2 * (k + 1) as f64).abs() < 1e-12, "decile {k}");
    }
}

#[test]
fn plots_round_trip_csv_values() {
    let dir = tempfile::tempdir().unwrap();
    let (summary, curves) = summarize(&run(&[Method::Nf, Method::Random]));
    let files = emit_plots(dir.path(), &summary, &curves).unwrap();
    assert_eq!(files.len(), 5 + 3);
    let steps = std::fs::read_to_string(dir.path().join("steps.svg")).unwrap();
    let pts = parse_plot_data(&steps);
    assert_eq!(pts.len(), summary.len());
    for row in &summary {
        assert!(pts.iter().any(|p| p.series == row.method.name() && p.x == row.csp && p.y == row.mean_steps));
    }
    let cov = std::fs::read_to_string(dir.path().join("coverage_csp1.svg")).unwrap();
    let pts = parse_plot_data(&cov);
    let expected: Vec<&CurveRow> = curves.iter().filter(|c| c.csp == 1.0).collect();
    assert_eq!(pts.len(), expected.len());
    for c in expected {
        assert!(pts.iter().any(|p| p.series == c.method.name() && p.x == c.mean_distance_m && p.y == c.decile_pct as f64));
    }
}

#[test]
fn empty_curves_write_no_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let (summary, _) = summarize(&run(&[Method::Nf])[..1]);
    let files = emit_plots(dir.path(), &summary, &[]).unwrap();
    assert_eq!(files.len(), 5);
    assert!(files.iter().all(|f| !f.to_string_lossy().contains("coverage")));
    let pts = parse_plot_data(&std::fs::read_to_string(dir.path().join("ofv.svg")).unwrap());
    assert_eq!(pts.len(), 1);
}

#[test]
fn suite_generation_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let paths = gen_env_suite(dir.path(), 10, 20, 0.3, 0.7, 8).unwrap();
    assert_eq!(paths.len(), 10);
    let envs = load_env_suite(dir.path()).unwrap();
    for (k, env) in envs.iter().enumerate() {
        assert!((env.density() - suite_density(k, 10, 0.3, 0.7)).abs() < 1e-12);
        assert_eq!(env.spawn_anchors().len(), 4);
        let again = GridEnvironment::from_text(&env.to_text()).unwrap();
        assert_eq!(&again, env);
    }
    let other = tempfile::tempdir().unwrap();
    gen_env_suite(other.path(), 10, 20, 0.3, 0.7, 8).unwrap();
    for p in &paths {
        let name = p.file_name().unwrap();
        assert_eq!(std::fs::read(p).unwrap(), std::fs::read(other.path().join(name)).unwrap());
    }
}

#[test]
fn config_errors_surface_before_running() {
    let cfg = config(vec![Method::MadeNet]);
    assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
    let bad = EvalConfig {
        csps: vec![1.5],
        ..config(vec![Method::Nf])
    };
    assert!(bad.validate().is_err());
    let missing = EvalConfig {
        suite_dir: "/nonexistent/suite".into(),
        ..config(vec![Method::Nf])
    };
    assert!(run_trials(&missing).is_err());
}
