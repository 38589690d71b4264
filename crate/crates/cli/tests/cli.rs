//! End-to-end runs of the `rdw` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SCHEMA_EXAMPLE: &str = r#"{"n":1,"eta":{"re":0.7,"im":0.2},"zeta":{"re":0.3,"im":0.1},"lambda":[{"re":0.4,"im":0.2},{"re":-0.2,"im":0.3}],"u":[{"re":0.5,"im":0.2}],"xi":[{"re":0.1,"im":0.15}]}"#;

fn rdw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A generic parameter file with `n` sites.
fn params_file(dir: &TempDir, n: usize) -> PathBuf {
    let c = |re: f64, im: f64| serde_json::json!({"re": re, "im": im});
    let u: Vec<Value> = (0..n)
        .map(|k| c(0.31 + 0.173 * k as f64, 0.2 + 0.03 * k as f64))
        .collect();
    let xi: Vec<Value> = (0..n)
        .map(|k| c(-0.52 + 0.211 * k as f64, 0.15 + 0.04 * k as f64))
        .collect();
    let v = serde_json::json!({
        "n": n, "eta": c(0.7, 0.2), "zeta": c(0.3, 0.1),
        "lambda": [c(0.4, 0.2), c(-0.2, 0.3)], "u": u, "xi": xi,
    });
    write(dir, &format!("p{n}.json"), &v.to_string())
}

#[test]
fn schema_example_computes() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", SCHEMA_EXAMPLE);
    let o = rdw(&["compute", "--method", "determinant", "--params", s(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["tool"], "rdw-cli");
    assert!(r["version"].is_string());
    assert_eq!(r["config"]["params"]["n"], 1);
    assert_eq!(r["results"]["method"], "determinant");
    for key in ["z", "normalized", "prefactor"] {
        assert!(
            r["results"][key]["re"].is_f64() && r["results"][key]["im"].is_f64(),
            "{key}"
        );
    }
    assert!(r["results"].get("elapsed_seconds").is_none());
}

#[test]
fn all_methods_agree_on_the_schema_example() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", SCHEMA_EXAMPLE);
    let value = |m: &str| {
        let r = json(&rdw(&["compute", "--method", m, "--params", s(&p)]));
        (
            r["results"]["z"]["re"].as_f64().unwrap(),
            r["results"]["z"]["im"].as_f64().unwrap(),
        )
    };
    let (re, im) = value("contraction");
    for m in ["enumeration", "face-form", "symmetric-sum", "recursion", "determinant"] {
        let (a, b) = value(m);
        assert!((a - re).hypot(b - im) < 1e-11 * re.hypot(im), "{m}");
    }
}

#[test]
fn length_mismatch_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let text = SCHEMA_EXAMPLE.replace(
        r#""u":[{"re":0.5,"im":0.2}]"#,
        r#""u":[{"re":0.5,"im":0.2},{"re":0.1,"im":0.3}]"#,
    );
    let p = write(&dir, "p.json", &text);
    let o = rdw(&["compute", "--method", "determinant", "--params", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("length mismatch"), "{}", stderr(&o));
}

#[test]
fn coincident_inhomogeneities_name_the_denominator() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"n":2,"eta":{"re":0.7,"im":0.2},"zeta":{"re":0.3,"im":0.1},"lambda":[{"re":0.4,"im":0.2},{"re":-0.2,"im":0.3}],"u":[{"re":0.5,"im":0.2},{"re":0.1,"im":0.3}],"xi":[{"re":0.1,"im":0.15},{"re":0.1,"im":0.15}]}"#;
    let p = write(&dir, "p.json", text);
    let o = rdw(&["compute", "--method", "determinant", "--params", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("sin(xi_1 - xi_2)"), "{}", stderr(&o));
}

#[test]
fn malformed_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", "{\"n\": 1");
    assert_eq!(
        code(&rdw(&["compute", "--method", "determinant", "--params", s(&p)])),
        2
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&rdw(&["compute", "--method", "determinant", "--params", s(&missing)])),
        2
    );
}

#[test]
fn size_limits_exit_with_code_three() {
    let dir = TempDir::new().unwrap();
    let p9 = params_file(&dir, 9);
    let o = rdw(&["compute", "--method", "symmetric-sum", "--params", s(&p9)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let p4 = params_file(&dir, 4);
    assert_eq!(
        code(&rdw(&["compute", "--method", "enumeration", "--params", s(&p4)])),
        3
    );
}

#[test]
fn determinant_at_fifty_sites() {
    let dir = TempDir::new().unwrap();
    let p = params_file(&dir, 50);
    let o = rdw(&["compute", "--method", "determinant", "--params", s(&p), "--timings"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&o);
    assert!(r["results"]["elapsed_seconds"].as_f64().unwrap() < 1.0);
    assert!(r["results"]["z"]["log10_abs"].as_f64().unwrap().is_finite());
}

#[test]
fn csv_splits_complex_columns() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", SCHEMA_EXAMPLE);
    let out = dir.path().join("z.csv");
    let o = rdw(&[
        "compute",
        "--method",
        "determinant",
        "--params",
        s(&p),
        "--format",
        "csv",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("method,n,z_re,z_im,"));
    assert!(header.contains("normalized_re,normalized_im"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn verify_ybe_passes() {
    let o = rdw(&["verify", "--suite", "ybe", "--trials", "100", "--tol", "1e-10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["passed"], true);
    assert_eq!(r["results"][0]["suite"], "ybe");
    assert!(r["results"][0]["worst_draw"]["u"].is_array());
}

#[test]
fn verify_fmatrix_passes() {
    let o = rdw(&["verify", "--suite", "fmatrix", "--trials", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn verify_below_rounding_floor_fails_honestly() {
    let o = rdw(&["verify", "--suite", "all", "--trials", "3", "--tol", "1e-16"]);
    assert_eq!(code(&o), 4);
    let r = json(&o);
    assert_eq!(r["passed"], false);
    assert!(stderr(&o).contains("FAIL"));
}

#[test]
fn unknown_suite_is_an_input_error() {
    assert_eq!(code(&rdw(&["verify", "--suite", "nonsense"])), 2);
}

#[test]
fn crosscheck_all_methods_at_three_sites() {
    let o = rdw(&[
        "crosscheck",
        "--n",
        "3",
        "--methods",
        "all",
        "--trials",
        "20",
        "--tol",
        "1e-9",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&o);
    let trial = &r["results"]["trials"][0];
    assert!(trial["draw"]["xi"].is_array());
    assert!(trial["values"][0]["method"].is_string());
    // Odd N with oracle and formula methods: the prefactor calibration.
    let cal = &r["results"]["calibration"];
    assert_eq!(cal["n"], 3);
    assert_eq!(cal["consistent"], true);
    assert!(cal["ratios"].as_array().unwrap().len() >= 20);
}

#[test]
fn crosscheck_formulas_against_contraction_at_five_sites() {
    let o = rdw(&[
        "crosscheck",
        "--n",
        "5",
        "--methods",
        "determinant,symmetric-sum,recursion,contraction",
        "--trials",
        "5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn crosscheck_with_printed_prefactor_fails_at_even_n() {
    let o = rdw(&[
        "crosscheck",
        "--n",
        "2",
        "--methods",
        "determinant,contraction",
        "--trials",
        "3",
        "--form",
        "printed",
    ]);
    assert_eq!(code(&o), 4);
}

#[test]
fn crosscheck_rejects_methods_beyond_their_limits() {
    let o = rdw(&[
        "crosscheck",
        "--n",
        "4",
        "--methods",
        "enumeration,determinant",
        "--trials",
        "2",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn sweep_emits_one_row_per_point() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", SCHEMA_EXAMPLE);
    let o = rdw(&[
        "sweep",
        "--params",
        s(&p),
        "--vary",
        "u1",
        "--from",
        "0.1",
        "--to",
        "0.6",
        "--steps",
        "6",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("index,parameter,parameter_re,parameter_im,method,z_re,z_im"));
    // The imaginary part is kept from the file.
    assert!(rows[1].starts_with("0,u1,0.1,0.2,determinant,"));
    assert!(rows[6].starts_with("5,u1,0.6,0.2,"));
}

#[test]
fn sweep_through_a_pole_reports_the_point() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", SCHEMA_EXAMPLE);
    // u₁ = ξ₁ − η = (−0.6, −0.05) is a pole; the sweep passes through it.
    let o = rdw(&[
        "sweep",
        "--params",
        s(&p),
        "--vary",
        "u1",
        "--from",
        "-0.8,-0.05",
        "--to",
        "-0.4,-0.05",
        "--steps",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&o);
    let points = r["results"].as_array().unwrap();
    assert!(points[1]["error"].as_str().unwrap().contains("singular"));
    assert!(points[0]["z"]["re"].is_f64());
}

#[test]
fn sweep_target_must_exist() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", SCHEMA_EXAMPLE);
    assert_eq!(
        code(&rdw(&[
            "sweep",
            "--params",
            s(&p),
            "--vary",
            "u2",
            "--from",
            "0",
            "--to",
            "1"
        ])),
        2
    );
}

#[test]
fn identical_runs_give_identical_reports() {
    let a = rdw(&["crosscheck", "--n", "2", "--trials", "4", "--seed", "7"]);
    let b = rdw(&["crosscheck", "--n", "2", "--trials", "4", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = rdw(&["crosscheck", "--n", "2", "--trials", "4", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn reports_rerun_to_the_same_results() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", SCHEMA_EXAMPLE);
    let runs: [&[&str]; 4] = [
        &["compute", "--method", "symmetric-sum", "--params", s(&p)],
        &["verify", "--suite", "dybe", "--trials", "5", "--seed", "3"],
        &[
            "crosscheck",
            "--n",
            "3",
            "--methods",
            "determinant,contraction",
            "--trials",
            "3",
        ],
        &[
            "sweep",
            "--params",
            s(&p),
            "--vary",
            "xi1",
            "--from",
            "0.0",
            "--to",
            "0.2",
            "--steps",
            "3",
        ],
    ];
    for (k, args) in runs.iter().enumerate() {
        let first = dir.path().join(format!("r{k}.json"));
        let again = dir.path().join(format!("r{k}-again.json"));
        let mut a: Vec<&str> = args.to_vec();
        a.extend(["--out", s(&first)]);
        assert_eq!(code(&rdw(&a)), 0);
        assert_eq!(code(&rdw(&["rerun", "--report", s(&first), "--out", s(&again)])), 0);
        assert_eq!(fs::read(&first).unwrap(), fs::read(&again).unwrap(), "{}", args[0]);
    }
}
