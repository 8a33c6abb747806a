use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn gaussep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussep")).args(args).output().expect("spawn gaussep")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = gaussep(args);
    let code = out.status.code().expect("exit code");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr)));
    (code, json)
}

fn write_input(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(p).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn check_vacuum_is_pure() {
    let (code, j) = run_json(&["check", s(&fixture("vacuum_1x1.json"))]);
    assert_eq!(code, 0);
    assert_eq!(j["schema_version"], "1");
    assert_eq!(j["command"], "check");
    assert_eq!(j["quantum_condition"]["holds"], true);
    assert!((f(&j["purity"]) - 1.0).abs() < 1e-12);
    assert_eq!(j["pure"], true);
    assert!((f(&j["reduced_purities"]["A"]) - 1.0).abs() < 1e-12);
    assert_eq!(j["input"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn check_rejects_uncertainty_violation() {
    let dir = tempfile::tempdir().unwrap();
    // Σ = 0.1·I is too narrow for ħ = 1.
    let p = write_input(
        dir.path(),
        "narrow.json",
        r#"{"schema_version":"1","split":{"n_A":1,"n_B":1},"matrix_kind":"sigma","matrix":[0.1,0,0,0, 0,0.1,0,0, 0,0,0.1,0, 0,0,0,0.1]}"#,
    );
    let (code, j) = run_json(&["check", s(&p)]);
    assert_eq!(code, 2);
    assert_eq!(j["quantum_condition"]["holds"], false);
    assert!(j.get("purity").is_none());
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let asym = write_input(
        dir.path(),
        "asym.json",
        r#"{"schema_version":"1","split":{"n_A":1,"n_B":1},"matrix_kind":"M","matrix":[[1,0.5,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#,
    );
    let out = gaussep(&["check", s(&asym)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not symmetric"));

    let broken = write_input(dir.path(), "broken.json", "{\n \"schema_version\": \"1\",\n }");
    let out = gaussep(&["analyze", s(&broken)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let missing = dir.path().join("missing.json");
    assert_eq!(gaussep(&["check", s(&missing)]).status.code(), Some(1));

    let plane = gaussep(&["project", s(&fixture("third_example.json")), "--plane", "y_A,p_B", "--out", s(&dir.path().join("p.csv"))]);
    assert_eq!(plane.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&plane.stderr).contains("bad plane"));
}

#[test]
fn first_example_is_certified_on_the_form_but_is_not_a_state() {
    // The matrix is indefinite (the x coupling is too strong), so the
    // certificate is reported while the exit code flags the invalid state.
    let (code, j) = run_json(&["analyze", s(&fixture("first_example.json"))]);
    assert_eq!(code, 2);
    assert_eq!(j["quantum_condition"]["holds"], false);
    let reports = j["reports"].as_array().unwrap();
    let c2 = reports.iter().find(|r| r["criterion"] == "Criterion2").expect("criterion 2 report");
    assert_eq!(c2["verdict"], "Separable");
    assert_eq!(c2["certificate"]["check"]["valid"], true);
    assert_eq!(j["overall_verdict"], "Separable");
    assert_eq!(j["first_separable"], "Criterion2");
}

#[test]
fn squeezed_state_is_entangled() {
    let (code, j) = run_json(&["analyze", s(&fixture("two_mode_squeezed_r1.json"))]);
    assert_eq!(code, 3);
    assert_eq!(j["overall_verdict"], "NotSeparable");
    let reports = j["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1, "analysis stops at the PPT violation");
    let w = &reports[0]["witness"];
    assert!((f(&w["value"]) - (-2.0f64).exp() / 2.0).abs() < 1e-10);

    let (code, _) = run_json(&["ppt", s(&fixture("two_mode_squeezed_r1.json"))]);
    assert_eq!(code, 3);
    let (code, _) = run_json(&["ppt", s(&fixture("third_example.json"))]);
    assert_eq!(code, 4);
}

#[test]
fn inconclusive_and_explicit_parameters() {
    let third = fixture("third_example.json");
    // Criterion 1 alone does not decide this state.
    let (code, j) = run_json(&["analyze", s(&third), "--criteria", "1"]);
    assert_eq!(code, 4);
    assert_eq!(j["overall_verdict"], "Inconclusive");

    let (code, j) = run_json(&["analyze", s(&third), "--criteria", "3", "--epsilon", "1/2,2"]);
    let c3 = j["reports"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(c3["criterion"], "Criterion3");
    assert_eq!(code == 0, c3["verdict"] == "Separable");

    let (code, j) = run_json(&["analyze", s(&third), "--criteria", "3", "--strategy", "nelder-mead"]);
    assert_eq!(code, 0);
    assert_eq!(j["epsilon_search"]["found"], true);
    assert_eq!(j["epsilon_search"]["strategy"], "nelder-mead");

    // A point inside the computed region certifies separability.
    let (code, j) = run_json(&["analyze", s(&third), "--criteria", "4", "--ab", "1.2,1.1"]);
    assert_eq!(code, 0, "{j}");
    let c4 = j["reports"].as_array().unwrap().last().unwrap();
    assert_eq!(c4["certificate"]["check"]["valid"], true);
}

#[test]
fn criterion4_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    // Every 1+1 state reaches the normal form; a generic 2+1 coupling does not.
    let p = write_input(
        dir.path(),
        "mixed.json",
        r#"{"schema_version":"1","split":{"n_A":2,"n_B":1},"matrix_kind":"M","matrix":[
            [0.6,0,0.1,0.05,0.1,0.02],[0,0.5,0.05,0.1,0.03,0.1],[0.1,0.05,0.55,0.02,0.07,0.01],
            [0.05,0.1,0.02,0.5,0.02,0.06],[0.1,0.03,0.07,0.02,0.6,0.03],[0.02,0.1,0.01,0.06,0.03,0.5]]}"#,
    );
    let out = gaussep(&["region", s(&p), "--out", s(&dir.path().join("r.csv"))]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
    let out = gaussep(&["analyze", s(&p), "--criteria", "4", "--ab", "1,1,1"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn global_layout_matches_ab_block() {
    let (c1, a) = run_json(&["analyze", s(&fixture("third_example.json"))]);
    let (c2, b) = run_json(&["analyze", s(&fixture("third_example_global.json"))]);
    assert_eq!(c1, c2);
    assert_eq!(b["input"]["layout_in"], "global");
    assert_eq!(a["input"]["matrix"], b["input"]["matrix"]);
    assert_eq!(a["overall_verdict"], b["overall_verdict"]);
}

#[test]
fn region_on_the_third_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let (code, j) = run_json(&["region", s(&fixture("third_example.json")), "--grid", "120x90", "--out", s(&out)]);
    assert_eq!(code, 0);
    let rows = read_csv(&out);
    assert_eq!(rows[0], ["a", "b", "feasible"]);
    assert_eq!(rows.len() - 1, 120 * 90);
    let feasible: Vec<(f64, f64)> = rows[1..]
        .iter()
        .filter(|r| r[2] == "1")
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(feasible.len() as u64, j["feasible_cells"].as_u64().unwrap());
    assert!(!feasible.is_empty() && feasible.len() < 120 * 90);
    let (la, lb) = (f(&j["lambda_a"]), f(&j["lambda_b"]));
    assert!(feasible.iter().all(|&(a, b)| a > la && b > lb));
    assert_eq!(j["boundary_check"]["within_one_cell"], true);

    // Default boundary file sits next to the grid.
    let boundary = read_csv(&dir.path().join("region_boundary.csv"));
    assert_eq!(boundary[0], ["a", "b_lower", "b_upper"]);
    assert_eq!(boundary.len() - 1, 120);

    // Every feasible cell certifies separability when fed back in.
    let (a, b) = feasible[feasible.len() / 2];
    let (code, k) = run_json(&["analyze", s(&fixture("third_example.json")), "--criteria", "4", "--ab", &format!("{a:e},{b:e}")]);
    assert_eq!(code, 0, "{k}");
}

#[test]
fn decoupled_state_is_feasible_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let (code, j) = run_json(&["region", s(&fixture("decoupled_thermal.json")), "--grid", "15x12", "--out", s(&out)]);
    assert_eq!(code, 0);
    assert_eq!(j["feasible_cells"], 15 * 12);
    assert!(read_csv(&out)[1..].iter().all(|r| r[2] == "1"));
}

#[test]
fn region_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out = gaussep(&["region", s(&fixture("third_example.json")), "--grid", "64x64", "--out", s(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(dir.path().join("a_boundary.csv")).unwrap(), std::fs::read(dir.path().join("b_boundary.csv")).unwrap());
}

#[test]
fn projection_of_a_ball_has_radius_sqrt_hbar() {
    let dir = tempfile::tempdir().unwrap();
    let ball = write_input(
        dir.path(),
        "ball.json",
        r#"{"schema_version":"1","split":{"n_A":1,"n_B":1,"hbar":1},"matrix_kind":"M","matrix":[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}"#,
    );
    let out = dir.path().join("ball.csv");
    for hbar in ["1", "2.5"] {
        let (code, j) = run_json(&["--hbar", hbar, "project", s(&ball), "--plane", "x_A,p_B", "--out", s(&out), "--points", "64"]);
        assert_eq!(code, 0);
        assert_eq!(j["coordinates"], serde_json::json!([0, 3]));
        let h: f64 = hbar.parse().unwrap();
        let rows = read_csv(&out);
        assert_eq!(rows.len() - 1, 64);
        for r in &rows[1..] {
            let (x, y): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
            assert!(((x * x + y * y).sqrt() - h.sqrt()).abs() < 1e-12);
        }
    }
}

#[test]
fn certificate_blob_projects_inside_the_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("blob.csv");
    let (code, j) = run_json(&["project", s(&fixture("third_example.json")), "--plane", "A", "--out", s(&out), "--blob", "1.2,1.1"]);
    assert_eq!(code, 0);
    assert_eq!(j["inner"]["certificate_valid"], true);
    assert_eq!(j["inner"]["contained"], true);
    let rows = read_csv(&out);
    assert!(rows.iter().any(|r| r[0] == "inner") && rows.iter().any(|r| r[0] == "outer"));
}

#[test]
fn certificate_round_trip() {
    // Re-validate the emitted certificate: M_A ⊕ M_B − M ⪰ 0 and both
    // marginals satisfy the uncertainty principle, using only the JSON.
    let (code, j) = run_json(&["analyze", s(&fixture("third_example.json"))]);
    assert_eq!(code, 0);
    let report = j["reports"].as_array().unwrap().iter().find(|r| r["verdict"] == "Separable").unwrap();
    let m = matrix(&j["input"]["matrix"]);
    let (ma, mb) = (matrix(&report["certificate"]["m_a"]), matrix(&report["certificate"]["m_b"]));
    let mut direct = nalgebra::DMatrix::zeros(4, 4);
    direct.view_mut((0, 0), (2, 2)).copy_from(&ma);
    direct.view_mut((2, 2), (2, 2)).copy_from(&mb);
    let gap = (&direct - &m).symmetric_eigen().eigenvalues.min();
    assert!(gap >= -1e-10, "domination fails: {gap}");
    for block in [ma, mb] {
        // one mode: M_X ⪰ 0 and det M_X ≤ 1 (symplectic eigenvalue ≤ 1)
        assert!(block.clone().symmetric_eigen().eigenvalues.min() > 0.0);
        assert!(block.determinant().sqrt() <= 1.0 + 1e-10);
    }
}

fn matrix(v: &Value) -> nalgebra::DMatrix<f64> {
    let rows = v.as_array().unwrap();
    let n = rows.len();
    nalgebra::DMatrix::from_fn(n, n, |i, k| f(&rows[i][k]))
}

#[test]
fn reduce_keeps_the_mean() {
    let (code, j) = run_json(&["reduce", s(&fixture("vacuum_1x1.json")), "--subsystem", "B"]);
    assert_eq!(code, 0);
    assert_eq!(j["mean"], serde_json::json!([-1.0, 0.5]));
    assert!((f(&j["purity"]) - 1.0).abs() < 1e-12);
    let out = gaussep(&["reduce", s(&fixture("first_example.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn summary_format() {
    let out = gaussep(&["--format", "summary", "analyze", s(&fixture("third_example.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().starts_with("overall: Separable"));
}
