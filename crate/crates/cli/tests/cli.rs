use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshless")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn solve_writes_a_solution_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let out = run(&["solve", "--example", "1", "--nodes", "11", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,x,y,u,exact,abs_error"));
    assert_eq!(lines.count(), 121);
    assert!(String::from_utf8_lossy(&out.stderr).contains("121 nodes"));
}

#[test]
fn coupled_solution_has_two_fields() {
    let out = run(&["solve", "--example", "3", "--nodes", "9", "--method", "gfd"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,x,y,u,v,exact_u,exact_v,abs_error_u,abs_error_v\n"));
}

#[test]
fn solve_json_reports_errors_and_condition_number() {
    let out = run(&[
        "solve",
        "--example",
        "1",
        "--nodes",
        "11",
        "--format",
        "json",
        "--condition",
        "--error-norm",
        "normalized",
    ]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let err = doc["errors"][0].as_f64().unwrap();
    assert!((3.0e-5..4.0e-5).contains(&err), "{err}");
    let cn = doc["condition_number"].as_f64().unwrap();
    assert!((cn - 38.32).abs() < 0.01, "{cn}");
    assert_eq!(doc["fields"][0].as_array().unwrap().len(), 121);
}

#[test]
fn study_round_trips_through_the_library_reader() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("study.csv");
    let out = run(&["study", "--example", "2", "--refine", "9,17", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let file = fs::File::open(&path).unwrap();
    let report = meshless::study::ConvergenceReport::read_csv(std::io::BufReader::new(file)).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report.rows[1].orders[0].is_some());
    assert_eq!(report.config.case, 2);
}

#[test]
fn study_json_output() {
    let out = run(&["study", "--example", "1", "--refine", "11", "--format", "json", "--method", "cd2"]);
    assert_eq!(code(&out), 0);
    let report: meshless::study::ConvergenceReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.config.method, meshless::Method::Cd2);
}

#[test]
fn dumps_system_and_stencils() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("a.mtx");
    let st = dir.path().join("stencils.csv");
    let out = run(&[
        "solve",
        "--example",
        "1",
        "--nodes",
        "7",
        "--dump-system",
        mtx.to_str().unwrap(),
        "--dump-stencils",
        st.to_str().unwrap(),
        "-o",
        dir.path().join("u.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let a = meshless::linalg::read_matrix_market(std::io::BufReader::new(fs::File::open(&mtx).unwrap())).unwrap();
    assert_eq!((a.nrows(), a.ncols()), (25, 25));
    let stencils = fs::read_to_string(&st).unwrap();
    assert!(stencils.starts_with("center,neighbor,wx,wy,w_op\n"));
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        vec!["solve", "--example", "4"],
        vec!["solve", "--example", "1", "--ng", "7"],
        vec!["solve", "--example", "1", "--method", "fem"],
        vec!["solve", "--example", "1", "--epsilon", "-1"],
        vec!["solve", "--example", "1", "--method", "cd2", "--dist", "chebyshev"],
        vec!["study", "--example", "1", "--refine", "x"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn non_convergence_exits_with_two() {
    let out = run(&["solve", "--example", "2", "--nodes", "11", "--max-picard", "2"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["study", "--example", "2", "--refine", "9,11", "--max-picard", "2"]);
    assert_eq!(code(&out), 2);
    let report = meshless::study::ConvergenceReport::read_csv(out.stdout.as_slice()).unwrap();
    assert!(report.rows.iter().all(|r| !r.status.is_ok()));
}

#[test]
fn help_exits_with_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("study"));
}
