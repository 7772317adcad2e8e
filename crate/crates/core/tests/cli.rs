use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volt-sched"))
        .args(args)
        .env_remove("VOLT_SCHED_DETERMINISTIC")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn oracle_on_fig3_prints_optimum() {
    let o = run(&["solve", "fixture:fig3-variable", "--method", "oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("status: optimal"), "{text}");
    assert!(text.contains("tec_eur: 0.24"), "{text}");
}

#[test]
fn exact_on_fig3_fixed_reports_bound() {
    let o = run(&["solve", "fixture:fig3-fixed", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("tec_eur: 0.42") && text.contains("z_lb: 0.42"), "{text}");
}

#[test]
fn ils_on_fig1_finds_nothing() {
    let o = run(&["solve", "fixture:fig1-variable", "--deterministic"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("no solution found"));
}

#[test]
fn evaluate_rejects_unknown_job() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("bad.json");
    std::fs::write(&sol, r#"{"assignments": [{"job": 4, "machine": 0, "start": 0}], "tec_eur": 0.0}"#).unwrap();
    let o = run(&["evaluate", "fixture:fig3-variable", p(&sol)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("assignments[0].job"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_with_error() {
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "fixture:nope"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn generate_solve_evaluate_cross_eval_flow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(&[
        "generate", "--num-jobs", "8", "--num-machines", "2", "--num-slots", "24", "--saturation", "0.6",
        "--seed", "5", "--out-dir", p(d), "--prefix", "pair",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fixed = d.join("pair-fixed.json");
    let variable = d.join("pair-variable.json");
    assert!(fixed.exists() && variable.exists());

    let sol = d.join("sol.json");
    let report = d.join("report.json");
    let o = run(&[
        "solve", p(&fixed), "--deterministic", "--max-noimprove", "3", "--out", p(&sol), "--report", p(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tec_line = stdout(&o).lines().find(|l| l.starts_with("tec_eur:")).unwrap().to_string();
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(value.get("z_heur").is_some() && value.get("iterations").is_some());

    let o = run(&["evaluate", p(&fixed), p(&sol)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(&tec_line));
    assert!(stdout(&o).contains("feasible: true"));

    let o = run(&["cross-eval", "--fixed", p(&fixed), "--solution", p(&sol), "--variable", p(&variable)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cross: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["min_inf", "avg_inf", "max_inf", "total_inf", "pct_inf_e", "pct_inf_t"] {
        assert!(cross.get(key).is_some(), "missing {key}");
    }

    let other = d.join("other");
    run(&["generate", "--num-jobs", "8", "--num-machines", "2", "--num-slots", "24", "--saturation", "0.6",
        "--seed", "6", "--out-dir", p(&other)]);
    let o = run(&["cross-eval", "--fixed", p(&fixed), "--solution", p(&sol), "--variable", p(&other.join("instance-variable.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unpaired instances"), "{}", stderr(&o));
}

#[test]
fn export_plot_and_bench() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mps = d.join("fig3.mps");
    let o = run(&["export-mps", "fixture:fig3-variable", "--out", p(&mps)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&mps).unwrap();
    assert!(text.starts_with("NAME") && text.trim_end().ends_with("ENDATA"));

    let sol = d.join("sol.json");
    assert_eq!(run(&["solve", "fixture:fig3-variable", "--method", "oracle", "--out", p(&sol)]).status.code(), Some(0));
    let xs = d.join("x.txt");
    std::fs::write(&xs, "X_0_0_1 1\nX_0_0_0 0\n").unwrap();
    let o = run(&["evaluate", "fixture:fig3-variable", p(&xs), "--format", "x"]);
    assert!(stdout(&o).contains("tec_eur: 0.24"));

    let plots = d.join("plots");
    let o = run(&["plot", "fixture:fig3-variable", p(&sol), "--out-dir", p(&plots)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["energy_profile.svg", "energy_profile.csv", "gantt.svg", "gantt.csv"] {
        assert!(plots.join(f).exists(), "missing {f}");
    }
    assert!(std::fs::read_to_string(plots.join("energy_profile.svg")).unwrap().contains("<svg"));

    let suite = d.join("suite.json");
    std::fs::write(
        &suite,
        r#"{"instances": [{"id": "f1", "fixture": "fig1-variable"}, {"id": "f3", "fixture": "fig3-variable"},
            {"id": "g", "generate": {"num_jobs": 3, "num_machines": 1, "num_slots": 8, "saturation": 0.5, "seed": 1}, "consumption": "variable"}],
           "solvers": [{"solver": "oracle"}, {"solver": "ils", "deterministic": true, "max_noimprove_iters": 2}]}"#,
    )
    .unwrap();
    let csv = d.join("out.csv");
    let agg = d.join("agg.csv");
    let o = run(&["bench", p(&suite), "--out", p(&csv), "--aggregate", p(&agg), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 7, "{rows}");
    assert!(rows.lines().any(|l| l.starts_with("f1,") && l.contains("infeasible")));
    assert!(std::fs::read_to_string(&agg).unwrap().lines().count() >= 2);
}

#[test]
fn deterministic_env_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(&["generate", "--num-jobs", "6", "--num-machines", "2", "--num-slots", "24", "--saturation", "0.5",
        "--seed", "9", "--out-dir", p(d)]);
    let inst = d.join("instance-variable.json");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let o = Command::new(env!("CARGO_BIN_EXE_volt-sched"))
            .args(["solve", p(&inst), "--max-noimprove", "3"])
            .env("VOLT_SCHED_DETERMINISTIC", "1")
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outputs.push(stdout(&o));
    }
    assert_eq!(outputs[0], outputs[1]);
}
