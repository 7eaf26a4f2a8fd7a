use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_curve-thickness"));
    c.env_remove("THICKNESS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fixture(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let file = dir.join(format!("{name}.json"));
    let mut args = vec!["fixtures", name, "--file", file.to_str().unwrap()];
    args.extend_from_slice(extra);
    json(&run(&args));
    file
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn circle_fixture_then_thickness() {
    let dir = tempfile::tempdir().unwrap();
    let c = fixture(dir.path(), "circle", &["--n", "1000", "--radius", "1"]);
    let doc = json(&run(&["thickness", s(&c)]));
    let t = doc["report"]["thickness"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 1e-4);
    assert_eq!(doc["manifest"]["command"], "thickness");
    assert_eq!(doc["manifest"]["inputs"][0], s(&c));
}

#[test]
fn ellipse_oracles_agree() {
    let dir = tempfile::tempdir().unwrap();
    let e = fixture(dir.path(), "ellipse", &["--a", "2", "--b", "1", "--n", "2000"]);
    let doc = json(&run(&["thickness", s(&e), "--oracle", "both"]));
    let r = &doc["report"];
    assert_eq!(r["attaining_feature"]["kind"], "Focal");
    assert!(r["max_discrepancy"].as_f64().unwrap() <= 5e-3);
    assert!(r["oracle_rolling_ball"].as_f64().is_some() && r["oracle_cut_value"].as_f64().is_some());
}

#[test]
fn plot_csv_is_tidy() {
    let dir = tempfile::tempdir().unwrap();
    let c = fixture(dir.path(), "stadium", &[]);
    let csv = dir.path().join("plot.csv");
    json(&run(&["thickness", s(&c), "--plot-csv", s(&csv)]));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("component,vertex,x0,x1,curvature\n"));
}

#[test]
fn self_intersecting_curve_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bowtie.csv");
    std::fs::write(&bad, "0,0\n1,1\n1,0\n0,1\n").unwrap();
    let out = run(&["thickness", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(run(&["thickness", "/nonexistent/curve.json"]).status.code(), Some(2));
    assert_eq!(run(&["thickness"]).status.code(), Some(2));
}

#[test]
fn semicontinuity_verdicts_and_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let c = fixture(dir.path(), "circle", &["--n", "200"]);
    let csv = dir.path().join("seq.csv");
    let doc = json(&run(&[
        "semicontinuity",
        s(&c),
        "--family",
        "mixed",
        "--terms",
        "12",
        "--plot-csv",
        s(&csv),
    ]));
    assert_eq!(doc["report"]["upper_thickness"]["pass"], true);
    assert_eq!(doc["report"]["lower_mdc"]["pass"], true);
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 13);

    let flat = json(&run(&["semicontinuity", s(&c), "--amplitudes", "0,0,0,0"]));
    let t0 = flat["report"]["base_thickness"].as_f64().unwrap();
    for term in flat["report"]["terms"].as_array().unwrap() {
        assert_eq!(term["thickness"].as_f64().unwrap(), t0);
    }

    let grow = run(&["semicontinuity", s(&c), "--amplitudes", "0.01,0.02,0.03"]);
    assert_eq!(grow.status.code(), Some(2));
}

#[test]
fn smooth_success_and_ladder_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let st = fixture(dir.path(), "stadium", &["--n", "1000"]);
    let out_curve = dir.path().join("smooth.json");
    let doc = json(&run(&[
        "smooth",
        s(&st),
        "--r1",
        "1",
        "--r2",
        "0.9",
        "--sigma",
        "0.01",
        "--out-curve",
        s(&out_curve),
    ]));
    assert!(doc["report"]["sup_curvature"].as_f64().unwrap() <= 1.0 / 0.9 + 1e-3);
    assert!(out_curve.exists());

    let fail = run(&[
        "smooth",
        s(&st),
        "--r1",
        "1",
        "--r2",
        "0.9",
        "--sigma",
        "1e-9",
        "--max-halvings",
        "2",
    ]);
    assert_eq!(fail.status.code(), Some(3), "{}", String::from_utf8_lossy(&fail.stderr));
}

#[test]
fn isotopy_of_a_curve_with_itself() {
    let dir = tempfile::tempdir().unwrap();
    let t = fixture(dir.path(), "trefoil", &["--n", "400"]);
    let doc = json(&run(&["isotopy", s(&t), s(&t)]));
    assert_eq!(doc["report"]["verdict"]["verdict"], "Isotopic");
    assert!(doc["report"]["rho_used"].as_f64().unwrap() > 0.0);
}

#[test]
fn bounds_table_and_json() {
    let out = run(&["bounds", "--n", "3", "--table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("i0")));
    let doc = json(&run(&["bounds", "--n", "3", "--k", "1", "--r", "1"]));
    assert_eq!(doc["report"]["rho"]["value"].as_f64(), Some(0.125));
    assert_eq!(run(&["bounds", "--n", "2", "--k", "2"]).status.code(), Some(2));
}

#[test]
fn tighten_writes_trace_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let c = fixture(dir.path(), "perturbed-circle", &["--n", "80"]);
    let trace = dir.path().join("trace.jsonl");
    let fin = dir.path().join("final.csv");
    let doc = json(&run(&[
        "tighten",
        s(&c),
        "--steps",
        "300",
        "--seed",
        "5",
        "--trace",
        s(&trace),
        "--out-curve",
        s(&fin),
    ]));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count(), 300);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first["objective"].as_f64().is_some());
    assert!(doc["report"]["final_objective"].as_f64().unwrap() <= doc["report"]["initial_objective"].as_f64().unwrap());
    assert_eq!(doc["manifest"]["seed"], 5);
    assert_eq!(doc["manifest"]["parameters"]["resolved"]["steps"], 300);
    assert!(std::fs::read_to_string(fin).unwrap().lines().count() >= 80);
}

#[test]
fn thread_env_overrides_flag() {
    let doc = json(
        &bin()
            .env("THICKNESS_THREADS", "2")
            .args(["--threads", "1", "bounds", "--n", "3"])
            .output()
            .unwrap(),
    );
    assert_eq!(doc["manifest"]["threads"], 2);
    let doc = json(&run(&["--threads", "3", "bounds", "--n", "3"]));
    assert_eq!(doc["manifest"]["threads"], 3);
    let bad = bin()
        .env("THICKNESS_THREADS", "many")
        .args(["bounds", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn reruns_reproduce_reports() {
    let dir = tempfile::tempdir().unwrap();
    let c = fixture(dir.path(), "random-trig", &["--seed", "9", "--n", "600"]);
    let one = json(&run(&["--threads", "1", "thickness", s(&c), "--oracle", "both"]));
    let two = json(&run(&["--threads", "4", "thickness", s(&c), "--oracle", "both"]));
    assert_eq!(one["report"], two["report"]);
    let mut a = one["manifest"].clone();
    let mut b = two["manifest"].clone();
    for m in [&mut a, &mut b] {
        m["wall_time_s"] = Value::Null;
        m["threads"] = Value::Null;
    }
    assert_eq!(a, b);
}

#[test]
fn output_file_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let res = run(&["--out", s(&out), "bounds", "--n", "4"]);
    assert!(res.status.success() && res.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(doc["report"]["n"], 4);
}

#[test]
fn angular_profile_fixture() {
    let doc = json(&run(&[
        "fixtures",
        "angular-profile",
        "--profile",
        "spike",
        "--n",
        "200",
        "--nodes",
        "21",
    ]));
    assert_eq!(doc["report"]["k"], 2);
    assert_eq!(doc["report"]["m"], 1);
    assert_eq!(run(&["fixtures", "angular-profile", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn defaults_table_lists_constants() {
    let out = run(&["defaults"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("tighten.steps") || text.contains("steps"));
}
