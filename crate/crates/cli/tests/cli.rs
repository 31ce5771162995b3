use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn wittlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wittlab"))
        .args(args)
        .env_remove("WITTLAB_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = wittlab(args);
    assert!(
        out.status.success(),
        "{args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    wittlab(args).status.code().expect("exit code")
}

const RAMIFIED: &str = "Z2[pi]/(pi^2-2)";

fn ramified_ext() -> String {
    let zp = r#"{"p":2,"h":1,"e":1,"precision":8,"unram_modulus":[0,1],"eisenstein":[[-2],[1]]}"#;
    let top = r#"{"p":2,"h":1,"e":2,"precision":8,"unram_modulus":[0,1],"eisenstein":[[-2],[0],[1]]}"#;
    format!(r#"{{"base":{zp},"top":{top}}}"#)
}

#[test]
fn sum_polynomials_for_z2() {
    let text = stdout(&["polys", "--kind", "sum", "--n", "2"]);
    assert_eq!(text, "sum_0 = X0 + Y0\nsum_1 = X1 + Y1 - X0*Y0\n");
}

#[test]
fn product_polynomials_for_z2() {
    let text = stdout(&["polys", "--kind", "prod", "--n", "2"]);
    assert!(text.contains("prod_1 = 2*X1*Y1 + X0^2*Y1 + X1*Y0^2"), "{text}");
}

#[test]
fn drinfeld_polys_start_with_x0() {
    let ext = ramified_ext();
    let text = stdout(&["drinfeld", "polys", "--ext", &ext, "--n", "3"]);
    assert!(text.lines().next().unwrap().ends_with("= X0"), "{text}");
}

#[test]
fn non_eisenstein_spec_is_an_input_error() {
    let spec = r#"{"p":2,"h":1,"e":2,"precision":8,"unram_modulus":[0,1],"eisenstein":[[-3],[0],[1]]}"#;
    assert_eq!(code(&["polys", "--kind", "sum", "--n", "2", "--spec", spec]), 2);
}

#[test]
fn wrong_operand_count_is_an_input_error() {
    assert_eq!(code(&["eval", "add", "(1,0)", "--instance", "F2"]), 2);
}

#[test]
fn unknown_suite_is_an_input_error() {
    assert_eq!(code(&["verify", "no-such-suite"]), 2);
}

#[test]
fn eval_sum_in_ramified_witt_vectors() {
    let text = stdout(&["eval", "add", "(1,0)", "(1,0)", "--spec", RAMIFIED, "--instance", "F2"]);
    assert_eq!(text.trim(), "(0, 0)");
}

#[test]
fn eval_teichmuller_over_f4() {
    let text = stdout(&["eval", "teichmuller", "w", "--n", "3", "--instance", "F4"]);
    assert_eq!(text.trim(), "(w, 0, 0)");
}

#[test]
fn eval_ghost_over_the_lift() {
    let lift = r#"{"kind":"torsion_free_lift","vars":[]}"#;
    let text = stdout(&["eval", "ghost", "(1,1)", "--instance", lift]);
    assert_eq!(text.trim(), "(1, 3)");
}

#[test]
fn verify_suites_exit_zero() {
    stdout(&["verify", "fv-identities", "--instance", "F4"]);
    stdout(&["verify", "drinfeld-kernel-ram", "--e", "2", "--s-max", "4"]);
    stdout(&["greenberg", "verify", "r-bijectivity", "--A", "F4"]);
}

#[test]
fn json_report_is_stable_apart_from_timing() {
    let args = ["verify", "ring-axioms", "--instance", "F2[x]/(x^2)", "--format", "json", "--n", "2"];
    let mut runs: Vec<Value> = (0..2).map(|_| serde_json::from_str(&stdout(&args)).unwrap()).collect();
    for r in &mut runs {
        assert_eq!(r["passed"], Value::Bool(true));
        r.as_object_mut().unwrap().remove("elapsed_ms");
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn cache_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let args = ["polys", "--kind", "prod", "--n", "3", "--format", "json", "--cache-dir", path];
    let first = stdout(&args);
    let entries = fs::read_dir(dir.path()).unwrap().count();
    assert!(entries > 0, "nothing written to the cache directory");
    let second = stdout(&args);
    assert_eq!(first, second);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), entries);
}
