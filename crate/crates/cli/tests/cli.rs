//! End-to-end checks of the command-line surface: output text, witness
//! files, and the exit-code contract (0 success, 1 internal/violation,
//! 2 invalid input).

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_planarmatch"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

fn write_five_edge_instance(path: &Path) {
    let mut rows = vec![vec![0u8; 9]; 9];
    for (i, j) in [(2, 1), (3, 4), (5, 5), (6, 7), (7, 9)] {
        rows[i - 1][j - 1] = 1;
    }
    let mut text = String::from("# planarmatch v1 n=9 kind=states\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(u8::to_string).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn solve_max_size_five_edge_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("fig.csv");
    write_five_edge_instance(&input);
    let witness = tmp.path().join("witness.csv");
    let (stdout, _, code) = run(&[
        "solve",
        "max-size",
        "--input",
        input.to_str().unwrap(),
        "--L",
        "2",
        "--witness",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "5");
    let witness_text = std::fs::read_to_string(&witness).unwrap();
    assert_eq!(witness_text, "1,2,1\n2,3,4\n3,5,5\n4,6,7\n5,7,9\n");
}

#[test]
fn solve_min_weight_all_zeros() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("zeros.csv");
    let mut text = String::from("# planarmatch v1 n=4 kind=weights\n");
    for _ in 0..4 {
        text.push_str("0,0,0,0\n");
    }
    std::fs::write(&input, text).unwrap();
    let (stdout, _, code) =
        run(&["solve", "min-weight", "--input", input.to_str().unwrap(), "--tau", "3"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "0");
}

#[test]
fn solve_min_weight_rejects_oversized_tau() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("w.csv");
    std::fs::write(&input, "# planarmatch v1 n=2 kind=weights\n1,2\n3,4\n").unwrap();
    let (_, stderr, code) =
        run(&["solve", "min-weight", "--input", input.to_str().unwrap(), "--tau", "3"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("tau"), "stderr: {stderr}");
}

#[test]
fn solve_missing_input_is_invalid() {
    let (_, _, code) =
        run(&["solve", "max-size", "--input", "/nonexistent/x.csv", "--L", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn solve_rejects_wrong_instance_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("states.csv");
    std::fs::write(&input, "# planarmatch v1 n=2 kind=states\n1,0\n0,1\n").unwrap();
    let (_, _, code) =
        run(&["solve", "min-weight", "--input", input.to_str().unwrap(), "--tau", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn experiment_rejects_zero_trials_and_bad_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"experiment":"theorem21","n":10,"L":2,
            "states":{"kind":"homogeneous","p":0.5},
            "trials":0,"master_seed":1}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let (_, _, code) = run(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);

    std::fs::write(&cfg, "{not json").unwrap();
    let (_, _, code) = run(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn experiment_matrix_model_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let probs = tmp.path().join("p.csv");
    std::fs::write(&probs, "# planarmatch v1 n=3 kind=probs\n1,0.5,0\n0.5,1,0.5\n0,0.5,1\n")
        .unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"experiment":"theorem21","n":3,"L":1,
                "states":{{"kind":"matrix","path":"{}"}},
                "trials":120,"master_seed":5}}"#,
            probs.display()
        ),
    )
    .unwrap();
    let out = tmp.path().join("out");
    let (_, _, code) = run(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let bounds = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert!(bounds.starts_with("bound_id,lhs,rhs,holds,skipped,params_json\n"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn oracle_check_small_sizes_pass() {
    let (stdout, _, code) = run(&["oracle-check", "--n-max", "2", "--trials", "20", "--seed", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("0 mismatches"), "stdout: {stdout}");
}

#[test]
fn oracle_check_rejects_oversized_n() {
    let (_, _, code) = run(&["oracle-check", "--n-max", "9"]);
    assert_eq!(code, 2);
}
