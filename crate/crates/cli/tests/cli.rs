use std::path::{Path, PathBuf};
use std::process::Command;

use parcalc::verify::{generate, VerifierConfig};
use parcalc::Scenario;
use serde_json::Value;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/scenarios/double_cover.json")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn pcalc(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_pcalc"))
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn on_fixture(args: &[&str]) -> Run {
    let path = fixture();
    let mut all = args.to_vec();
    all.extend(["--scenario", path.to_str().unwrap()]);
    pcalc(&all)
}

fn json(run: &Run) -> Value {
    assert_eq!(run.code, 0, "{}", run.stderr);
    serde_json::from_str(&run.stdout).unwrap()
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), text).unwrap();
    file
}

#[test]
fn degree_of_half_weighted_line() {
    let run = on_fixture(&["degree", "--name", "L"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("par-deg  5/2"), "{}", run.stdout);
    let v = json(&on_fixture(&["degree", "--name", "L", "--out", "json"]));
    assert_eq!(v["result"]["par_deg"], "5/2");
}

#[test]
fn pushforward_of_trivial_line_on_double_cover() {
    let v = json(&on_fixture(&[
        "pushforward",
        "--map",
        "phi",
        "--name",
        "O",
        "--out",
        "json",
    ]));
    let r = &v["result"];
    assert_eq!(r["rank"], 2);
    assert_eq!(r["degree"], -1);
    assert_eq!(r["par_deg"], "0");
    assert_eq!(r["weights"]["a"], serde_json::json!(["0", "1/2"]));
    assert_eq!(r["weights"]["b"], serde_json::json!(["0", "1/2"]));

    // the produced objects form a loadable scenario
    let scenario = Scenario::from_json(&v["scenario"].to_string()).unwrap();
    let c = scenario.bundle("phi_*O").unwrap().char();
    assert_eq!((c.rank(), c.degree()), (2, -1));
}

#[test]
fn naht_table1_example() {
    let v = json(&on_fixture(&[
        "naht", "table1", "--name", "P", "--out", "json",
    ]));
    let image = &v["result"]["image"][0];
    assert_eq!(image["kind"], "connection");
    assert_eq!(image["jump"], "0");
    assert_eq!(image["eigenvalue"], "1/2+2 i");

    let v = json(&on_fixture(&[
        "naht", "table1", "--name", "P", "--m", "2", "--out", "json",
    ]));
    assert_eq!(v["result"]["commutes"], true);
    assert_eq!(v["result"]["pullback"][0]["eigenvalue"], "1+4 i");
}

#[test]
fn naht_table2_commutes() {
    let v = json(&on_fixture(&[
        "naht", "table2", "--name", "P", "--m", "2", "--name", "Q", "--m", "3", "--out", "json",
    ]));
    assert_eq!(v["result"]["commutes"], true);
    assert_eq!(v["result"]["direct_image"].as_array().unwrap().len(), 5);
}

#[test]
fn pullback_and_compose_emit_scenarios() {
    let v = json(&on_fixture(&[
        "pullback", "--map", "phi", "--name", "E", "--out", "json",
    ]));
    // par-deg of E is 1/2 + 2 = 5/2; the pullback has twice that
    assert_eq!(v["result"]["par_deg"], "5");
    let s = Scenario::from_json(&v["scenario"].to_string()).unwrap();
    assert!(matches!(
        s.bundle("phi*E").unwrap(),
        parcalc::Bundle::Split(_)
    ));

    let v = json(&on_fixture(&[
        "compose", "--map", "psi", "--map", "phi", "--out", "json",
    ]));
    assert_eq!(v["result"]["degree"], 6);
    assert_eq!(v["result"]["points"]["u"]["multiplicity"], 6);
    let s = Scenario::from_json(&v["scenario"].to_string()).unwrap();
    assert_eq!(s.covering("phi∘psi").unwrap().degree(), 6);
}

#[test]
fn residue_commands() {
    let v = json(&on_fixture(&[
        "residue",
        "--name",
        "N",
        "--pullback",
        "2",
        "--out",
        "json",
    ]));
    assert_eq!(v["result"]["residue"], serde_json::json!([["0"]]));
    assert_eq!(v["result"]["residual"], true);
    let v = json(&on_fixture(&[
        "residue",
        "--name",
        "H",
        "--pushforward",
        "--out",
        "json",
    ]));
    assert_eq!(v["result"]["strongly_parabolic"], true);
    assert_eq!(
        v["result"]["char_poly"],
        serde_json::json!(["0", "0", "0", "0", "1"])
    );
}

#[test]
fn stability_and_slope() {
    let run = on_fixture(&["stability", "--name", "E"]);
    assert_eq!(run.code, 0);
    assert!(
        run.stdout.contains("semistable        false"),
        "{}",
        run.stdout
    );
    let v = json(&on_fixture(&["slope", "--name", "C", "--out", "json"]));
    assert_eq!(v["result"]["slope"], "-1/4");
}

#[test]
fn exit_statuses() {
    assert_eq!(on_fixture(&["degree", "--name", "missing"]).code, 4);
    assert_eq!(on_fixture(&["stability", "--name", "C"]).code, 5);
    assert_eq!(
        on_fixture(&["pullback", "--map", "phi", "--name", "O"]).code,
        6
    );
    assert_eq!(on_fixture(&["degree"]).code, 2);
    assert_eq!(pcalc(&["frobnicate"]).code, 2);

    let validate = on_fixture(&["validate"]);
    assert_eq!(validate.code, 3);
    assert!(
        validate.stdout.contains("Riemann–Hurwitz"),
        "{}",
        validate.stdout
    );
}

#[test]
fn bad_files() {
    let parse = write_temp(r#"{ "curves": { "X": { "genus": -1 } } }"#);
    let run = pcalc(&["validate", "--scenario", parse.path().to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("curves.X.genus"), "{}", run.stderr);

    let weight = write_temp(
        r#"{ "curves": { "X": { "genus": 0, "points": ["x"] } },
             "bundles": { "L": { "curve": "X", "lines": [ { "degree": 0, "weights": { "x": "3/2" } } ] } } }"#,
    );
    let run = pcalc(&["validate", "--scenario", weight.path().to_str().unwrap()]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("outside [0, 1)"), "{}", run.stderr);

    let missing = pcalc(&["validate", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(missing.code, 2);
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--seed", "0", "--trials", "15"];
    let first = pcalc(&args);
    let second = pcalc(&args);
    assert_eq!(first.code, 0, "{}", first.stdout);
    assert_eq!(first.stdout, second.stdout);
    assert!(first.stdout.contains("all 14 properties passed"));

    let v: Value = serde_json::from_str(
        &pcalc(&[
            "verify",
            "--trials",
            "3",
            "--property",
            "table1_square",
            "--out",
            "json",
        ])
        .stdout,
    )
    .unwrap();
    assert_eq!(v["properties"][0]["passed"], 3);

    assert_eq!(pcalc(&["verify", "--trials", "0"]).code, 2);
    assert_eq!(pcalc(&["verify", "--property", "nope"]).code, 2);
}

#[test]
fn check_replays_generated_scenarios() {
    let cfg = VerifierConfig::default();
    let file = generate("direct_image_degree", &cfg, 4).unwrap();
    let good = write_temp(&file.to_json());
    let run = pcalc(&["check", "--scenario", good.path().to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert!(run.stdout.contains("pass"));

    // a validator case with the wrong expected clause fails the check
    let mut file = generate("riemann_hurwitz_validator", &cfg, 0).unwrap();
    let check = file.check.as_mut().unwrap();
    check.expect = Some(
        if check.expect.as_deref() == Some("valid") {
            "degree"
        } else {
            "valid"
        }
        .into(),
    );
    let bad = write_temp(&file.to_json());
    let run = pcalc(&[
        "check",
        "--scenario",
        bad.path().to_str().unwrap(),
        "--out",
        "json",
    ]);
    assert_eq!(run.code, 1);
    let v: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(v["result"]["passed"], false);
}
