//! End-to-end tests of the fmm binary.

use std::path::Path;
use std::process::{Command, Output};

use fmm::{catalog, engine, Matrix, RecursionPlan};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmm"))
        .args(args)
        .output()
        .expect("spawning the fmm binary")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[test]
fn validate_distinguishes_valid_incorrect_and_malformed() {
    let dir = tempfile::tempdir().unwrap();

    let good = dir.path().join("strassen.alg");
    std::fs::write(&good, fmm::serialize_algorithm(&catalog::strassen())).unwrap();
    let out = run(&["validate", p(&good)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("valid"));
    assert!(stdout(&out).contains("rank 7"));

    // Structurally fine, mathematically wrong: C = 2ab instead of ab.
    let wrong = dir.path().join("double.alg");
    std::fs::write(&wrong, "name double\ndims 1 1 1\nrank 1\nU\n2\nV\n1\nW\n1\n").unwrap();
    let out = run(&["validate", p(&wrong)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("invalid"));

    // Malformed file.
    let broken = dir.path().join("broken.alg");
    std::fs::write(&broken, "name broken\ndims 2 2\nrank 7\n").unwrap();
    let out = run(&["validate", p(&broken)]);
    assert_eq!(code(&out), 2);

    // Expressions: built-ins validate, unknown names are a usage error.
    let out = run(&["validate", "--algo", "rot(tr(323))"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("valid"));
    let out = run(&["validate", "--algo", "nonsense"]);
    assert_eq!(code(&out), 2);

    // No input at all.
    let out = run(&["validate"]);
    assert_eq!(code(&out), 2);
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[test]
fn analyze_prints_the_stability_quantities() {
    let out = run(&["analyze", "--algo", "strassen"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("rank 7"));
    assert!(text.contains("Q 8"));
    assert!(text.contains("E 12"));
    assert!(text.contains("e [12, 4, 4, 12]"));
    assert!(text.contains("q [8, 5, 5, 8]"));
    assert!(text.contains("stability-exponent 3.58"));

    let out = run(&["analyze", "--algo", "442"]);
    let text = stdout(&out);
    assert!(text.contains("Q 22"));
    assert!(text.contains("E 89"));
    assert!(text.contains("legacy-E 125"));

    // Bound table: L=1 on K=1024 has coefficient (512 + 8) * 512 * 12.
    let out = run(&["analyze", "--algo", "strassen", "--k", "1024", "--levels", "1"]);
    let text = stdout(&out);
    assert!(text.contains("L=1"), "{text}");
    assert!(text.contains("bound 7.0940"), "{text}");

    let out = run(&["analyze", "--plan", "strassen:L=1", "--k", "1024"]);
    let text = stdout(&out);
    assert!(text.contains("delta 520"), "{text}");
    assert!(text.contains("xi 12"), "{text}");

    let out = run(&["analyze", "--model", "dnc", "--algo", "strassen"]);
    let text = stdout(&out);
    assert!(text.contains("Q 7"), "{text}");
    assert!(text.contains("q [7, 5, 5, 7]"), "{text}");
}

// ---------------------------------------------------------------------------
// gen / multiply / scale round trip
// ---------------------------------------------------------------------------

#[test]
fn gen_multiply_and_scale_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = run(&[
        "gen", "--m", "16", "--k", "16", "--n", "16", "--seed", "3", "--out", p(&data),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let a_path = data.join("a.bin");
    let b_path = data.join("b.bin");
    assert!(a_path.exists() && b_path.exists());

    // Same seed, same bytes.
    let data2 = dir.path().join("data2");
    run(&[
        "gen", "--m", "16", "--k", "16", "--n", "16", "--seed", "3", "--out", p(&data2),
    ]);
    assert_eq!(
        std::fs::read(&a_path).unwrap(),
        std::fs::read(data2.join("a.bin")).unwrap()
    );

    let c_path = dir.path().join("c.bin");
    let out = run(&[
        "multiply", p(&a_path), p(&b_path), p(&c_path),
        "--plan", "strassen:L=2", "--check",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("max_rel_err"), "{text}");
    assert!(text.contains("within true"), "{text}");

    // The stored product matches an in-process run bitwise.
    let a = Matrix::read_binary(&a_path).unwrap();
    let b = Matrix::read_binary(&b_path).unwrap();
    let c = Matrix::read_binary(&c_path).unwrap();
    let plan = RecursionPlan::stationary(std::sync::Arc::new(catalog::strassen()), 2);
    let want = engine::multiply(&a, &b, &plan).unwrap();
    assert_eq!(c, want);

    // Plans in the other shapes parse and run.
    for plan in [
        "classical",
        "seq(strassen,323)",
        "tree(strassen,classical,classical,classical,classical,classical,classical,classical)",
    ] {
        let out = run(&["multiply", p(&a_path), p(&b_path), "--plan", plan]);
        assert_eq!(code(&out), 0, "plan {plan}: {}", stderr(&out));
    }

    // Scaling trace output.
    let scaled = dir.path().join("scaled");
    let out = run(&[
        "scale", p(&a_path), p(&b_path),
        "--scaling", "repeated", "--tau", "1e-6", "--out", p(&scaled),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("step 1: O"), "{text}");
    assert!(text.contains("fired true"), "{text}");
    assert!(scaled.join("a_scaled.bin").exists());
    assert!(scaled.join("d_a.txt").exists());

    // Text matrix IO round trip.
    let tdata = dir.path().join("tdata");
    run(&[
        "gen", "--m", "4", "--k", "4", "--n", "4", "--seed", "1", "--out", p(&tdata), "--text",
    ]);
    let ct = dir.path().join("ct.txt");
    let out = run(&[
        "multiply", p(&tdata.join("a.txt")), p(&tdata.join("b.txt")), p(&ct),
        "--plan", "strassen:L=1", "--text",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(Matrix::read_text(&ct).unwrap().rows() == 4);
}

#[test]
fn multiply_rejects_mismatched_operands() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    Matrix::new(2, 3, vec![1.0; 6]).write_binary(&a).unwrap();
    Matrix::new(2, 2, vec![1.0; 4]).write_binary(&b).unwrap();
    let out = run(&["multiply", p(&a), p(&b)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("error"));
}

// ---------------------------------------------------------------------------
// bench subcommands
// ---------------------------------------------------------------------------

#[test]
fn bench_error_emits_one_csv_row_per_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = run(&[
        "bench-error",
        "--m", "8", "--k", "8", "--n", "8",
        "--algo", "strassen",
        "--dist", "u01,u11",
        "--levels", "0..1",
        "--scaling", "none,outside",
        "--seed", "1",
        "--out", p(&csv_path),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        vec![
            "algo", "m", "k", "n", "dist", "seed", "L", "scaling",
            "steps_taken", "max_abs_err", "max_rel_err", "bound",
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 8);
    for row in &rows {
        assert_eq!(&row[0], "strassen");
        let steps: usize = row[8].parse().unwrap();
        let expected_steps = if &row[7] == "none" { 0 } else { 1 };
        assert_eq!(steps, expected_steps);
        let abs: f64 = row[9].parse().unwrap();
        let rel: f64 = row[10].parse().unwrap();
        let bound: f64 = row[11].parse().unwrap();
        assert!(abs.is_finite() && rel.is_finite());
        assert!(bound > 0.0);
        assert!(abs <= bound, "abs {abs} vs bound {bound}");
    }
}

#[test]
fn bench_perf_reports_positive_throughput() {
    let out = run(&[
        "bench-perf",
        "--m", "32", "--k", "32", "--n", "32",
        "--algo", "strassen",
        "--levels", "1",
        "--reps", "3",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "32x32x32");
    let gflops: f64 = rows[0][5].parse().unwrap();
    assert!(gflops > 0.0);
}
