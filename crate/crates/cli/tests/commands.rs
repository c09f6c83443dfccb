use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_riskroute"));
    c.env("RISKROUTE_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn generated(name: &str, family_args: &[&str]) -> PathBuf {
    let path = scratch(name);
    let mut args = vec!["generate"];
    args.extend_from_slice(family_args);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "generate failed: {}", String::from_utf8_lossy(&o.stderr));
    path
}

/// Value printed after `key` in a whitespace-aligned table.
fn field(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_braess_both_modes() {
    let f = generated("braess.json", &["--family", "braess", "--v", "0.1"]);
    let o = run(&["solve", path_str(&f), "--mode", "rawe"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "social cost") - 1.3).abs() < 1e-6);
    let o = run(&["solve", path_str(&f), "--mode", "rnwe"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!((field(&out, "social cost") - 1.1).abs() < 1e-6);
    assert!(out.contains("converged     true"));
}

#[test]
fn solve_writes_flow_document() {
    let f = generated("braess_flow.json", &["--family", "braess", "--v", "0.1"]);
    let out = scratch("braess_flow_out.json");
    let o = run(&["solve", path_str(&f), "--mode", "rnwe", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(doc["converged"], true);
    let total: f64 = doc["paths"].as_array().unwrap().iter().map(|p| p["flow"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn malformed_input_exits_2() {
    let f = scratch("malformed.json");
    std::fs::write(&f, "{ not an instance").unwrap();
    assert_eq!(run(&["solve", path_str(&f)]).status.code(), Some(2));
    assert_eq!(run(&["analyze", path_str(&f)]).status.code(), Some(2));
    assert_eq!(run(&["solve", "/nonexistent/instance.json"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    // The all-or-nothing starting flow is not an equilibrium here.
    let f = generated("pigou_iter.json", &["--family", "pigou"]);
    let o = run(&["solve", path_str(&f), "--mode", "rnwe", "--max-iter", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("converged     false"));
}

#[test]
fn analyze_pigou() {
    let f = generated("pigou.json", &["--family", "pigou", "--gamma", "1", "--kappa", "1"]);
    let o = run(&["analyze", path_str(&f)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!((field(&out, "PRA") - 2.0).abs() < 1e-6);
    assert_eq!(field(&out, "eta"), 1.0);
    assert!((field(&out, "bound 1+gk*eta") - 2.0).abs() < 1e-12);
    let row = out.lines().last().unwrap();
    assert!(row.ends_with(",true"), "{row}");
}

#[test]
fn analyze_braess_with_json_report() {
    let f = generated("braess_an.json", &["--family", "braess", "--v", "0.1"]);
    let rep = scratch("braess_report.json");
    let o = run(&["analyze", path_str(&f), "--out", path_str(&rep)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!((field(&out, "PRA") - 1.3 / 1.1).abs() < 1e-6);
    assert_eq!(field(&out, "eta"), 2.0);
    assert!((field(&out, "bound 1+gk*eta") - 1.2).abs() < 1e-9);
    assert!(out.contains("param,cost_rnwe,cost_rawe,pra,kappa,eta,bound_eta,bound_rho,pass"));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&rep).unwrap()).unwrap();
    assert_eq!(doc["eta"], 2);
}

#[test]
fn analyze_gamma_zero_is_one() {
    let f = generated("pigou0.json", &["--family", "pigou", "--gamma", "0", "--kappa", "1"]);
    let o = run(&["analyze", path_str(&f)]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "PRA") - 1.0).abs() < 1e-9);
}

#[test]
fn risk_model_override_changes_the_equilibrium() {
    let f = generated("braess_mv.json", &["--family", "braess", "--v", "0.1"]);
    let mv = run(&["analyze", path_str(&f)]);
    let ms = run(&["analyze", path_str(&f), "--risk-model", "mean-stdev"]);
    assert!(mv.status.success() && ms.status.success());
    assert!(stdout(&mv).contains("risk model       mean-var"), "{}", stdout(&mv));
    assert!(stdout(&ms).contains("risk model       mean-stdev"), "{}", stdout(&ms));
}

fn sweep_rows(extra: &[&str]) -> (Output, Vec<String>) {
    let mut args = vec!["sweep"];
    args.extend_from_slice(extra);
    let o = run(&args);
    let rows = stdout(&o).lines().map(str::to_owned).collect();
    (o, rows)
}

#[test]
fn braess_sweep_matches_closed_form_and_is_byte_stable() {
    let args = ["--family", "braess", "--param", "v", "--from", "0.05", "--to", "0.5", "--steps", "10"];
    let (o, rows) = sweep_rows(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows[0], "param,cost_rnwe,cost_rawe,pra,kappa,eta,bound_eta,bound_rho,pass");
    assert_eq!(rows.len(), 11);
    for row in &rows[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        let v: f64 = cols[0].parse().unwrap();
        let pra: f64 = cols[3].parse().unwrap();
        assert!((pra - (1.0 + 3.0 * v) / (1.0 + v)).abs() < 1e-5, "{row}");
        assert_eq!(cols[8], "true");
    }
    let (again, _) = sweep_rows(&args);
    assert_eq!(o.stdout, again.stdout);
    let single = bin().arg("sweep").args(args).env("RISKROUTE_THREADS", "1").output().unwrap();
    assert_eq!(o.stdout, single.stdout);
}

#[test]
fn pigou_kappa_sweep_and_two_steps() {
    let (o, rows) =
        sweep_rows(&["--family", "pigou", "--param", "kappa", "--from", "0.1", "--to", "1", "--steps", "5"]);
    assert_eq!(o.status.code(), Some(0));
    for row in &rows[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        let kappa: f64 = cols[0].parse().unwrap();
        let pra: f64 = cols[3].parse().unwrap();
        assert!((pra - (1.0 + kappa)).abs() < 1e-6, "{row}");
    }
    let out = scratch("two.csv");
    let o = run(&[
        "sweep", "--family", "braess", "--param", "v", "--from", "0.1", "--to", "0.2", "--steps", "2", "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
}

#[test]
fn invalid_sweeps_exit_2() {
    let base = ["sweep", "--family", "braess", "--param", "v", "--from", "0.5", "--to", "0.1", "--steps", "3"];
    assert_eq!(run(&base).status.code(), Some(2));
    let o = run(&["sweep", "--family", "braess", "--param", "v", "--from", "0.1", "--to", "0.5", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "sweep", "--family", "braess", "--param", "v", "--from", "0.1", "--to", "0.5", "--steps", "2", "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suites_report_counts() {
    for (suite, n, expect) in [
        ("bound-chain", "20", "bound-chain: 20/20 PASS"),
        ("sigma-lemma", "5000", "sigma-lemma: 5000/5000 PASS"),
        ("sp-theorem", "10", "sp-theorem: 13/13 PASS"),
        ("oracle", "5", "oracle: 8/8 PASS"),
    ] {
        let o = run(&["verify", "--suite", suite, "--seeds", n, "--grid", "40"]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        assert!(stdout(&o).contains(expect), "{suite}: {}", stdout(&o));
    }
}

#[test]
fn generate_round_trips_through_solve() {
    let f = generated("sp.json", &["--family", "random-sp", "--budget", "6", "--seed", "4"]);
    let again = run(&["generate", "--family", "random-sp", "--budget", "6", "--seed", "4"]);
    assert_eq!(std::fs::read(&f).unwrap(), again.stdout);
    assert_eq!(run(&["solve", path_str(&f)]).status.code(), Some(0));
    assert_eq!(run(&["generate", "--family", "braess", "--v", "-1"]).status.code(), Some(2));
}

#[test]
fn oracle_on_zigzag() {
    let f = generated("zigzag.json", &["--family", "zigzag", "--k", "3"]);
    let o = run(&["oracle", path_str(&f), "--grid", "60"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("series-parallel  false"));
    assert!((field(&out, "max S(f)") - 1.0).abs() < 1e-6);
    assert!((field(&out, "S(z)") - 1.0 / 3.0).abs() < 1e-6);
}
