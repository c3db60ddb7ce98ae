use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn pebms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pebms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.ends_with('\n'), "json output is newline-terminated");
    serde_json::from_str(&text).unwrap()
}

#[test]
fn check_ebm_235_passes() {
    let out = pebms(&["check", "gallery:ebm_235", "--profile", "ebm"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["tool"], "pebms");
    assert_eq!(doc["command"], "check");
    assert_eq!(doc["config"]["profile"]["profile"], "ebm");
    assert!(doc["input_digest"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(doc["verdict"], "pass");
}

#[test]
fn check_detail_lists_the_worked_products() {
    let out = pebms(&["check", "gallery:ebm_235", "--detail"]);
    let doc = json(&out);
    let products: Vec<f64> = doc["triangles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["product"].as_f64().unwrap())
        .collect();
    assert_eq!(products.len(), 27);
    assert!(products.contains(&240.0) && products.contains(&280.0));
}

#[test]
fn check_absx_fails_with_symmetry_witnesses() {
    let out = pebms(&["check", "gallery:pebm_absx", "--format", "csv"]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("axiom,witness,coords,lhs,rhs,margin\n"));
    assert!(text
        .lines()
        .any(|l| l.starts_with("A3_symmetry,") && l.contains(",0 1,1,2,")));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(code(&pebms(&["check", "/nonexistent/space.json"])), 2);
    assert_eq!(code(&pebms(&["check", "gallery:nope"])), 2);
    assert_eq!(code(&pebms(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"kind\": \"finite\", \"p\": [[0, 1]").unwrap();
    let out = pebms(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("line"));
}

#[test]
fn solve_banach_on_max_converges() {
    let out = pebms(&[
        "solve",
        "gallery:pebm_max",
        "--map",
        "x/4",
        "--family",
        "banach",
        "--k",
        "0.25",
        "--x0",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["outcome"]["status"], "converged");
    assert!(doc["outcome"]["fixed_point"].as_f64().unwrap().abs() <= 1e-9);
    let names: Vec<&str> = doc["preconditions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "axioms_pebm",
            "banach_contraction",
            "banach_theta_condition"
        ]
    );
}

#[test]
fn solve_on_asymmetric_space_warns_but_converges() {
    let out = pebms(&[
        "solve",
        "gallery:pebm_absx",
        "--map",
        "x/4",
        "--family",
        "kannan",
        "--k",
        "0.45",
        "--x0",
        "1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr.clone())
        .unwrap()
        .contains("axioms_pebm"));
    let doc = json(&out);
    assert_eq!(doc["outcome"]["status"], "converged");
    assert!(doc["outcome"]["fixed_point"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn solve_rejects_inadmissible_k() {
    let out = pebms(&[
        "solve",
        "gallery:pebm_max",
        "--map",
        "x/4",
        "--family",
        "kannan",
        "--k",
        "0.6",
        "--x0",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_without_convergence_exits_3() {
    let out = pebms(&[
        "solve",
        "gallery:pebm_max",
        "--map",
        "1-x",
        "--x0",
        "0",
        "--max-iter",
        "50",
    ]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["outcome"]["status"], "exhausted");
}

#[test]
fn trace_and_certificate_round_trip_through_bound() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let cert = dir.path().join("cert.json");
    let out = pebms(&[
        "solve",
        "gallery:kannan_max",
        "--trace",
        trace.to_str().unwrap(),
        "--certificate",
        cert.to_str().unwrap(),
        "--starts",
        "0,0.5,1",
    ]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("n,x,step_dist,self_dist,bound,n_self\n"));
    let c: Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["status"], "converged");
    assert_eq!(c["unique_within_starts"], true);

    let t = trace.to_str().unwrap();
    let ok = pebms(&[
        "bound",
        t,
        "--space",
        "gallery:kannan_max",
        "--kind",
        "kannan",
        "--k",
        "0.3333333333333333",
    ]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["violations"], 0);
    // A smaller k gives a bound the trace cannot meet.
    let tight = pebms(&[
        "bound",
        t,
        "--space",
        "gallery:kannan_max",
        "--kind",
        "kannan",
        "--k",
        "0.1",
    ]);
    assert_eq!(code(&tight), 1);
    let banach = pebms(&[
        "bound",
        t,
        "--space",
        "gallery:kannan_max",
        "--kind",
        "banach",
        "--k",
        "0.25",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&banach), 0);
    assert!(String::from_utf8(banach.stdout)
        .unwrap()
        .starts_with("n,m,quantity,observed,bound,holds\n"));
}

#[test]
fn modkannan_bound_with_window() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = pebms(&[
        "solve",
        "gallery:pebm_absx",
        "--trace",
        trace.to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(
        code(&out),
        1,
        "the asymmetric space fails its axiom precondition"
    );
    let b = pebms(&[
        "bound",
        trace.to_str().unwrap(),
        "--space",
        "gallery:pebm_absx",
        "--kind",
        "modkannan",
        "--k",
        "0.3333333333333333",
        "--n",
        "3",
        "--m",
        "2",
    ]);
    assert_eq!(code(&b), 0);
    assert!(json(&b)["window_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn finite_space_solve_with_table_map() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("space.json");
    fs::write(
        &path,
        r#"{"kind":"finite","profile":"pebm","P":[[0,1,1],[1,0,1],[1,1,0]],"Theta":[[1,1,1],[1,1,1],[1,1,1]]}"#,
    )
    .unwrap();
    let out = pebms(&[
        "solve",
        path.to_str().unwrap(),
        "--map",
        "0,0,0",
        "--x0",
        "2",
        "--format",
        "text",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("converged: u = 0"));
}

#[test]
fn gallery_exits_0_with_seven_entries() {
    let out = pebms(&["gallery", "--grid-n", "5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["entries"].as_object().unwrap().len(), 7);
    let text = pebms(&["gallery", "--format", "text"]);
    assert!(String::from_utf8(text.stdout)
        .unwrap()
        .contains("overall: pass"));
    assert_eq!(code(&pebms(&["gallery", "--format", "csv"])), 2);
}

#[test]
fn fuzz_single_trial_and_replay() {
    assert_eq!(code(&pebms(&["fuzz", "--trials", "1"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let out = pebms(&[
        "fuzz",
        "--trials",
        "10",
        "--seed",
        "7",
        "--save-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    for (report, path) in doc["counterexamples"]
        .as_array()
        .unwrap()
        .iter()
        .zip(doc["saved"].as_array().unwrap())
    {
        let replay = pebms(&["check", path.as_str().unwrap()]);
        assert_eq!(code(&replay), 1);
        assert_eq!(json(&replay)["violations"][0], report["violation"]);
    }
}

#[test]
fn fuzz_is_deterministic() {
    let a = json(&pebms(&["fuzz", "--trials", "20", "--seed", "3"]));
    let b = json(&pebms(&["fuzz", "--trials", "20", "--seed", "3"]));
    assert_eq!(a, b);
}
