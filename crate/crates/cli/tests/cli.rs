use std::path::PathBuf;
use std::process::{Command, Output};

use sirdro_cli::problem::Problem;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn sirdro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sirdro")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(csv: &str, name: &str) -> Vec<f64> {
    let line = csv.lines().find(|l| l.split(',').next() == Some(name)).unwrap_or_else(|| panic!("no {name} in {csv}"));
    line.split(',').skip(1).map(|v| v.parse().unwrap()).collect()
}

fn eval_value(o: &Output) -> f64 {
    stdout(o).lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn eval_newsvendor_at_the_atom() {
    let f = data("newsvendor.txt");
    let exact = sirdro(&["eval", f.to_str().unwrap(), "--x", "1.5", "--variant", "exact"]);
    assert!(exact.status.success(), "{}", String::from_utf8_lossy(&exact.stderr));
    assert_eq!(eval_value(&exact), 0.0);
    let hat = sirdro(&["eval", f.to_str().unwrap(), "--x", "1.5", "--variant", "hat"]);
    assert_eq!(eval_value(&hat), 1.0);
    // 17 significant digits
    assert!(stdout(&hat).contains("1.0000000000000000e0"));
}

#[test]
fn eval_density_reference() {
    let o = sirdro(&["eval", data("density.txt").to_str().unwrap(), "--x", "0.5", "--variant", "lp"]);
    assert!(o.status.success());
    assert!(eval_value(&o) > 0.0);
}

#[test]
fn eval_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("value.csv");
    let o = sirdro(&["eval", data("two_dim_w1.txt").to_str().unwrap(), "--x", "-0.2,1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("variant,x1,x2,value\nexact,"));
}

#[test]
fn malformed_file_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "cost\nq 2 oops\n").unwrap();
    let o = sirdro(&["eval", bad.to_str().unwrap(), "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column 5"));
}

#[test]
fn dimension_mismatch_exits_two() {
    let o = sirdro(&["eval", data("newsvendor.txt").to_str().unwrap(), "--x", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pragmatic_w1_puts_x_half_above_atom() {
    let o = sirdro(&["solve", data("newsvendor.txt").to_str().unwrap(), "--method", "pragmatic-w1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = field(&stdout(&o), "x");
    assert!((x[0] - 2.0).abs() < 1e-6, "{x:?}");
}

#[test]
fn large_radius_newsvendor_is_one_above_quantile() {
    let o = sirdro(&["solve", data("newsvendor.txt").to_str().unwrap(), "--method", "standard-large-eps"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert_eq!(field(&csv, "x"), vec![2.5]);
    assert_eq!(field(&csv, "lambda"), vec![2.0]);
}

#[test]
fn rowgen_agrees_with_closed_form_for_order_one() {
    let f = data("two_dim_w1.txt");
    let closed = stdout(&sirdro(&["solve", f.to_str().unwrap(), "--method", "pragmatic-w1"]));
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    let o = sirdro(&["solve", f.to_str().unwrap(), "--method", "pragmatic-rowgen", "--log", log.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rg = stdout(&o);
    assert!((field(&closed, "objective")[0] - field(&rg, "objective")[0]).abs() < 1e-5);
    let log = std::fs::read_to_string(log).unwrap();
    assert!(log.starts_with("iteration,lambda,objective,cuts,max_violation\n"));
    assert!(log.lines().count() > 2);
}

#[test]
fn rowgen_handles_order_two() {
    let o = sirdro(&["solve", data("order_two.txt").to_str().unwrap(), "--method", "pragmatic-rowgen"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert!(field(&csv, "lambda")[0] > 0.0);
    // closed-form-only methods refuse order 2
    let o = sirdro(&["solve", data("order_two.txt").to_str().unwrap(), "--method", "pragmatic-w1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn moment_solve_and_method_mismatch() {
    let f = data("mean_mad.txt");
    let o = sirdro(&["solve", f.to_str().unwrap(), "--method", "moment"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "x").len(), 1);
    let o = sirdro(&["solve", f.to_str().unwrap(), "--method", "pragmatic-w1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn radius_too_small_is_a_numerical_failure() {
    let o = sirdro(&["solve", data("two_dim_w1.txt").to_str().unwrap(), "--method", "standard-large-eps"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn canonical_dump_round_trips() {
    for name in ["newsvendor.txt", "two_dim_w1.txt", "order_two.txt", "mean_mad.txt", "density.txt"] {
        let f = data(name);
        let o = sirdro(&["check", f.to_str().unwrap(), "--dump-canonical"]);
        assert!(o.status.success());
        let original = Problem::parse(&std::fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(Problem::parse(&stdout(&o)).unwrap(), original, "{name}");
    }
}

#[test]
fn experiments_pass_and_are_deterministic() {
    for name in ["bound-curves", "dyadic-family", "normal-bounds"] {
        let a = sirdro(&["experiment", name]);
        assert!(a.status.success(), "{name}: {}", String::from_utf8_lossy(&a.stderr));
        assert!(String::from_utf8_lossy(&a.stderr).starts_with("PASS"));
        let b = sirdro(&["experiment", name]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn normal_bounds_row_matches_reference_values() {
    let csv = stdout(&sirdro(&["experiment", "normal-bounds"]));
    let row: Vec<&str> = csv.lines().find(|l| l.starts_with("normal,")).unwrap().split(',').collect();
    let wass: f64 = row[2].parse().unwrap();
    let tv: f64 = row[3].parse().unwrap();
    assert!((wass - 0.37).abs() <= 0.02 && (tv - 0.10).abs() <= 0.005);
}

#[test]
fn convexity_sweep_finds_violation_with_surplus_cost() {
    let o = sirdro(&["experiment", "fig-convexity", "--qminus", "1"]);
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.starts_with("PASS fig-convexity: non-convex"), "{err}");
}

#[test]
fn thread_cap_keeps_output_identical() {
    let a = Command::new(env!("CARGO_BIN_EXE_sirdro")).args(["experiment", "dyadic-family"]).env("SIR_DRO_THREADS", "1").output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_sirdro")).args(["experiment", "dyadic-family"]).env("SIR_DRO_THREADS", "3").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_sirdro")).args(["experiment", "dyadic-family"]).env("SIR_DRO_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_experiment_lists_names() {
    let o = sirdro(&["experiment", "fig-9"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fig-convexity") && err.contains("dyadic-family"));
}
