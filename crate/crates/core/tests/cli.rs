//! End-to-end runs of the command-line front end.

use std::path::PathBuf;
use std::process::Command;

use hrkit::cli::{run_with, ResultBody, ResultDocument, FORMAT_VERSION};
use hrkit::numerics::ComplexMatrix;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    run_seeded(args, None)
}

fn run_seeded(args: &[&str], seed: Option<&str>) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hrkit").chain(args.iter().copied());
    let code = run_with(argv, seed, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn machine(args: &[&str]) -> (i32, ResultDocument) {
    let mut full = vec!["--format", "machine"];
    full.extend_from_slice(args);
    let r = run(&full);
    let doc: ResultDocument =
        serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout));
    (r.code, doc)
}

#[test]
fn example1_without_one_is_infeasible_with_certificate() {
    let r = run(&["counterexample", "example1", "--points", "0,0.25,0.5,0.75"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stdout.contains("certificate"));
    assert!(r.stdout.contains("b^T y"));
    let (code, doc) = machine(&["counterexample", "example1", "--points", "0,0.25,0.5,0.75"]);
    assert_eq!(code, 3);
    let ResultBody::Feasibility {
        certificate_check, ..
    } = doc.result
    else {
        panic!("wrong body")
    };
    let check = certificate_check.unwrap();
    assert!(check.aty.iter().all(|&v| v >= -1e-10));
    assert!(check.bty <= -1e-6);
}

#[test]
fn example1_with_one_is_feasible() {
    let r = run(&[
        "counterexample",
        "example1",
        "--points",
        "0,0.25,0.5",
        "--include-one",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn extend_scalar_gives_corner_state() {
    for engine in ["l2", "reflexive"] {
        let (code, doc) = machine(&[
            "extend-scalar",
            "--engine",
            engine,
            "--instance",
            &fixture("upper_triangular.json"),
        ]);
        assert_eq!(code, 0);
        let ResultBody::NormalState { density, .. } = &doc.result else {
            panic!("wrong body")
        };
        assert!(density.approx_eq(&ComplexMatrix::unit(2, 0, 0), 1e-10));
        assert!(doc.report.pass());
    }
}

#[test]
fn human_report_shows_construction_trace() {
    let r = run(&[
        "extend-scalar",
        "--instance",
        &fixture("upper_triangular.json"),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("dim E = 1, dim F = 0"));
    assert!(r.stdout.contains("extension_residual"));
}

#[test]
fn extend_dchar_on_truncation_passes() {
    let r = run(&[
        "extend-dchar",
        "--instance",
        &fixture("diagonal_truncation.json"),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("Choi eigen-floor"));
    assert!(r.stdout.contains("=> PASS"));
}

#[test]
fn non_closed_span_is_a_validation_error() {
    let r = run(&["extend-scalar", "--instance", &fixture("not_closed.json")]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("closure residual"), "{}", r.stderr);
}

#[test]
fn truncated_instance_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.json");
    let text = std::fs::read_to_string(fixture("upper_triangular.json")).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    let r = run(&["extend-scalar", "--instance", path.to_str().unwrap()]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("line"), "{}", r.stderr);
}

#[test]
fn missing_section_is_a_validation_error() {
    let r = run(&[
        "extend-dchar",
        "--instance",
        &fixture("upper_triangular.json"),
    ]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("d_character"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["--bogus"]).code, 2);
    assert_eq!(run(&["extend-scalar"]).code, 2);
    assert_eq!(
        run(&["extend-scalar", "--engine", "qr", "--instance", "x"]).code,
        2
    );
    assert_eq!(run(&["counterexample", "example1"]).code, 2);
    assert_eq!(run(&["feasibility-lp"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn seed_variable_is_validated() {
    assert_eq!(run_seeded(&["demo"], Some("not-a-number")).code, 2);
    let r = run_seeded(&["demo"], Some("17"));
    assert_eq!(r.code, 0, "{}", r.stdout);
}

#[test]
fn demo_passes() {
    let r = run(&["demo"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(!r.stdout.contains("FAIL"));
}

#[test]
fn upper_triangular_functions_family() {
    assert_eq!(
        run(&["counterexample", "prop25", "--points", "0,0.5"]).code,
        3
    );
    assert_eq!(
        run(&[
            "counterexample",
            "prop25",
            "--points",
            "0,0.5",
            "--three-dim"
        ])
        .code,
        3
    );
    assert_eq!(
        run(&["counterexample", "prop25", "--points", "0,0.5,1"]).code,
        0
    );
    assert_eq!(
        run(&["counterexample", "prop25", "--points", "0.5"]).code,
        4
    );
}

#[test]
fn cp_probe_verdicts() {
    let r = run(&["cp-probe", "--instance", &fixture("identity_cp.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = run(&["cp-probe", "--prop25-points", "0,0.5", "--max-iter", "500"]);
    assert_eq!(r.code, 5, "{}", r.stderr);
    assert!(r.stdout.contains("not a proof"));
}

#[test]
fn lp_from_file_and_points_agree() {
    let a = run(&["feasibility-lp", "--instance", &fixture("example1_lp.json")]);
    let b = run(&["feasibility-lp", "--points", "0,0.25,0.5,0.75"]);
    assert_eq!(a.code, 3);
    assert_eq!(b.code, 3);
}

fn round_trip(args: &[&str], instance: Option<&str>) -> (ResultDocument, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    full.extend_from_slice(&["--out", &out_str]);
    let first = run(&full);
    assert!(first.code == 0 || first.code == 3, "{}", first.stderr);
    let text = std::fs::read_to_string(&out).unwrap();
    let doc: ResultDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.format_version, FORMAT_VERSION);
    let mut verify = vec!["verify", "--result", &out_str];
    if let Some(i) = instance {
        verify.extend_from_slice(&["--instance", i]);
    }
    let v = run(&verify);
    assert_eq!(v.code, 0, "{}{}", v.stdout, v.stderr);
    (doc, text)
}

#[test]
fn results_verify_after_round_trip() {
    let ut = fixture("upper_triangular.json");
    let dt = fixture("diagonal_truncation.json");
    let cp = fixture("identity_cp.json");
    round_trip(&["extend-scalar", "--instance", &ut], Some(&ut));
    round_trip(
        &[
            "extend-scalar",
            "--engine",
            "reflexive",
            "--instance",
            &fixture("weighted_atoms.json"),
        ],
        Some(&fixture("weighted_atoms.json")),
    );
    round_trip(&["extend-dchar", "--instance", &dt], Some(&dt));
    round_trip(&["cp-probe", "--instance", &cp], Some(&cp));
    round_trip(
        &["counterexample", "example1", "--points", "0,0.25,0.5,0.75"],
        None,
    );
    round_trip(&["counterexample", "example1", "--points", "0,0.5,1"], None);
}

#[test]
fn machine_output_is_bit_exact() {
    let dt = fixture("diagonal_truncation.json");
    let (doc, text) = round_trip(&["extend-dchar", "--instance", &dt], Some(&dt));
    let again = hrkit::cli::render_machine(&doc);
    assert_eq!(text, again);
}

#[test]
fn tampered_result_fails_verification() {
    let ut = fixture("upper_triangular.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let out_s = out.to_str().unwrap();
    assert_eq!(
        run(&["extend-scalar", "--instance", &ut, "--out", out_s]).code,
        0
    );
    let mut doc: ResultDocument =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    if let ResultBody::NormalState { density, .. } = &mut doc.result {
        *density = ComplexMatrix::identity(2).scale_real(0.5);
    }
    std::fs::write(&out, hrkit::cli::render_machine(&doc)).unwrap();
    let r = run(&["verify", "--result", out_s, "--instance", &ut]);
    assert_eq!(r.code, 4);
    assert!(r.stdout.contains("FAIL"));
}

#[test]
fn binary_honours_seed_variable() {
    let bin = env!("CARGO_BIN_EXE_hrkit");
    let ok = Command::new(bin)
        .arg("demo")
        .env("HR_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin)
        .arg("demo")
        .env("HR_SEED", "-1")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let inf = Command::new(bin)
        .args(["counterexample", "example1", "--points", "0,0.5"])
        .env_remove("HR_SEED")
        .output()
        .unwrap();
    assert_eq!(inf.status.code(), Some(3));
}
