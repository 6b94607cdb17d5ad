use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emkahler"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn run_report(dir: &Path, scenario: &str, extra: &[&str]) -> (i32, Value) {
    let out = dir.join("report.json");
    let mut args = vec!["run", scenario, "--deterministic", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    let code = o.status.code().unwrap();
    let report = std::fs::read_to_string(&out).map(|s| serde_json::from_str(&s).unwrap()).unwrap_or(Value::Null);
    (code, report)
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

fn lines(o: &Output) -> Vec<String> {
    String::from_utf8_lossy(&o.stdout).lines().map(str::to_string).collect()
}

#[test]
fn list_catalog_and_filters() {
    let all = run(&["list"]);
    assert_eq!(all.status.code(), Some(0));
    assert!(lines(&all).len() >= 10);

    let sub = run(&["list", "--filter", "cohomology"]);
    let sub = lines(&sub);
    assert!(!sub.is_empty() && sub.len() < lines(&all).len());
    assert!(sub.iter().any(|l| l.starts_with("kodaira_counterexample")));

    let none = run(&["list", "--filter", "no_such_module"]);
    assert_eq!(none.status.code(), Some(0));
    assert!(lines(&none).is_empty());
}

#[test]
fn checks_command_lists_registry() {
    let o = run(&["checks"]);
    assert_eq!(o.status.code(), Some(0));
    let l = lines(&o);
    for name in ["em_residual", "gauss_bonnet", "counterexample_gap", "first_variation", "hitchin_thorpe"] {
        assert!(l.iter().any(|x| x.starts_with(name)), "{name}");
    }
}

#[test]
fn flat_torus_kahler_form_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "flat.json",
        r#"{"name": "flat", "geometry": {"kind": "flat_torus"},
            "checks": [{"check": "em_residual", "params": {"field": "kahler_form"}}]}"#,
    );
    let (code, r) = run_report(dir.path(), &s, &[]);
    assert_eq!(code, 0);
    let v = &check(&r, "em_residual")["values"];
    for k in ["d_f", "d_star_f", "einstein"] {
        assert!(v[k].as_f64().unwrap().abs() < 1e-12, "{k}: {v}");
    }
    assert_eq!(r["pass"], true);
}

#[test]
fn sphere_product_composite_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s2.json",
        r#"{"name": "s2", "geometry": {"kind": "sphere_product", "params": {"a": 1, "b": 2}},
            "resolution": 32,
            "checks": [{"check": "em_residual", "params": {"field": "canonical"}},
                       {"check": "kahler_identity"},
                       {"check": "gauss_bonnet", "params": {"chi": 4, "tau": 0}}]}"#,
    );
    let (code, r) = run_report(dir.path(), &s, &[]);
    assert_eq!(code, 0, "{r}");
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["em_residual", "kahler_identity", "gauss_bonnet"]);
    assert_eq!(r["environment"]["resolution"], 32);
}

#[test]
fn kodaira_gap_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "k.toml",
        r#"name = "kodaira"
[geometry]
kind = "kodaira"
params = { p = 2, q = 3, tau = 16 }

[[checks]]
check = "counterexample_gap"
params = { eps = "1/100", expects = "-618/13" }
"#,
    );
    let (code, r) = run_report(dir.path(), &s, &[]);
    assert_eq!(code, 0, "{r}");
    let v = &check(&r, "counterexample_gap")["values"];
    assert_eq!(v["gap"]["numerator"], "-618");
    assert_eq!(v["gap"]["denominator"], "13");
    assert!(v["gap"]["decimal"].as_str().unwrap().starts_with("-47.538461"));
    assert_eq!(v["sign_near_zero"], -1);
    assert_eq!(v["certified"], true);
    assert!(v["gap_function"]["numerator"].is_array());
}

#[test]
fn wrong_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "k.json",
        r#"{"name": "k", "geometry": {"kind": "kodaira", "params": {"p": 2, "q": 3, "tau": 16}},
            "checks": [{"check": "counterexample_gap", "params": {"expects": "-618/11"}}]}"#,
    );
    let (code, r) = run_report(dir.path(), &s, &[]);
    assert_eq!(code, 1);
    assert_eq!(r["pass"], false);
    assert_eq!(check(&r, "counterexample_gap")["status"], "fail");
}

#[test]
fn failing_numeric_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "w.json",
        r#"{"name": "w", "geometry": {"kind": "warped_torus"}, "checks": [{"check": "kahler_identity"}]}"#,
    );
    assert_eq!(run_report(dir.path(), &s, &[]).0, 1);
}

#[test]
fn tolerance_scale_tightens_checks() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.json",
        r#"{"name": "s", "geometry": {"kind": "fubini_study"}, "checks": [{"check": "em_residual"}]}"#,
    );
    assert_eq!(run_report(dir.path(), &s, &[]).0, 0);
    let (code, r) = run_report(dir.path(), &s, &["--tolerance-scale", "1e-30"]);
    assert_eq!(code, 1);
    assert!((r["environment"]["tolerance_scale"].as_f64().unwrap() / 1e-30 - 1.0).abs() < 1e-12);
    assert_eq!(run(&["run", &s, "--tolerance-scale", "-1"]).status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{\"name\": \"x\",\n \"checks\": [\n}", "line 3"),
        ("unknown_check.json", r#"{"name": "x", "checks": [{"check": "nope"}]}"#, "checks[0] (nope)"),
        ("unknown_field.json", r#"{"name": "x", "checks": [], "extra": 1}"#, "extra"),
        (
            "bad_tol.json",
            r#"{"name": "x", "checks": [{"check": "symbolic_identities", "tolerance": -1}]}"#,
            "tolerance",
        ),
        (
            "bad_param.json",
            r#"{"name": "x", "checks": [{"check": "algebraic_identities", "params": {"pears": 3}}]}"#,
            "pears",
        ),
        ("needs_geometry.json", r#"{"name": "x", "checks": [{"check": "kahler_identity"}]}"#, "needs"),
        (
            "unknown_geometry.json",
            r#"{"name": "x", "geometry": {"kind": "klein_bottle"}, "checks": [{"check": "signature"}]}"#,
            "klein_bottle",
        ),
        (
            "no_potential.json",
            r#"{"name": "x", "geometry": {"kind": "warped_torus"}, "checks": [{"check": "em_residual"}]}"#,
            "potential",
        ),
        (
            "bad_genera.json",
            r#"{"name": "x", "geometry": {"kind": "kodaira", "params": {"p": 1, "q": 3, "tau": 1}}, "checks": [{"check": "counterexample_gap"}]}"#,
            "genus",
        ),
        ("bad.toml", "name = \"x\"\nchecks = 3\n", "line 2"),
    ];
    for (file, body, needle) in cases {
        let s = write(dir.path(), file, body);
        let o = run(&["run", &s]);
        assert_eq!(o.status.code(), Some(2), "{file}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{file}: {err}");
    }
    assert_eq!(run(&["run", "/no/such/scenario.json"]).status.code(), Some(2));
}

#[test]
fn evaluation_error_exits_two_and_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "p.json",
        r#"{"name": "p", "geometry": {"kind": "sphere_product"},
            "checks": [{"check": "symbolic_identities"},
                       {"check": "first_variation", "params": {"profile": "cos(c0"}}]}"#,
    );
    let (code, r) = run_report(dir.path(), &s, &[]);
    assert_eq!(code, 2);
    assert_eq!(check(&r, "symbolic_identities")["status"], "pass");
    assert_eq!(check(&r, "first_variation")["status"], "error");
}

#[test]
fn skipped_checks_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.json",
        r#"{"name": "s", "checks": [{"check": "symbolic_identities"},
                                    {"check": "hitchin_thorpe", "skip": true, "params": {"chi": 1, "tau": 1}}]}"#,
    );
    let (code, r) = run_report(dir.path(), &s, &[]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "hitchin_thorpe")["status"], "skipped");
    assert_eq!(r["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&[
            "run",
            "integral_identities_sphere",
            "--resolution",
            "16",
            "--deterministic",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let r: Value = serde_json::from_slice(&ra).unwrap();
    assert!(check(&r, "gauss_bonnet").get("elapsed_ms").is_none());
    let hash = r["environment"]["norm_convention_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn csv_tables_have_resolution_and_residual_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("csv");
    let o = run(&[
        "run",
        "integral_identities_sphere",
        "--resolution",
        "16",
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut files: Vec<_> = std::fs::read_dir(&csv).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 4);
    for f in files {
        let body = std::fs::read_to_string(&f).unwrap();
        let mut l = body.lines();
        assert_eq!(l.next(), Some("resolution,residual"));
        let rows: Vec<(usize, f64)> = l
            .map(|r| {
                let (n, v) = r.split_once(',').unwrap();
                (n.parse().unwrap(), v.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), [8, 16, 32, 64]);
    }
}

#[test]
fn report_goes_to_stdout_without_out() {
    let o = run(&["run", "cross_checks", "--deterministic"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["pass"], true);
    assert_eq!(r["scenario"]["name"], "cross_checks");
}

#[test]
fn every_bundled_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut n = 0;
    for e in std::fs::read_dir(scenarios).unwrap() {
        let p = e.unwrap().path();
        let (code, r) = run_report(dir.path(), p.to_str().unwrap(), &[]);
        assert_eq!(code, 0, "{}: {r}", p.display());
        assert_eq!(r["pass"], true);
        n += 1;
    }
    assert!(n >= 10);
}
