use std::process::{Command, Output};

fn spiderwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiderwalk"))
        .args(args)
        .env_remove("SPIDERWALK_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn figure2_has_thirty_one_rows_near_the_envelope() {
    let (header, rows) = csv(&stdout(&spiderwalk(&["figure2"])));
    assert_eq!(header, ["n", "p_origin", "envelope", "qbar"]);
    assert_eq!(rows.len(), 31);
    assert_eq!(rows[0][0], 620.0);
    assert_eq!(rows[30][0], 650.0);
    for r in &rows {
        assert!((r[1] - r[2]).abs() < 0.02);
        assert_eq!(r[3], 0.125);
    }
}

#[test]
fn simulate_starts_at_the_origin() {
    let (_, rows) = csv(&stdout(&spiderwalk(&["simulate", "4", "6", "3", "--steps", "0"])));
    assert_eq!(rows, vec![vec![0.0, 1.0, 0.0, 0.0, 0.0]]);
}

#[test]
fn full_and_reduced_simulations_agree() {
    let args = |mode| vec!["simulate", "4", "6", "3", "--steps", "8", "--strata", "4", mode];
    let (_, full) = csv(&stdout(&spiderwalk(&args("--full"))));
    let (_, reduced) = csv(&stdout(&spiderwalk(&args("--reduced"))));
    assert_eq!(full.len(), 9);
    for (x, y) in full.iter().zip(&reduced) {
        for (u, v) in x.iter().zip(y) {
            assert!((u - v).abs() < 1e-10);
        }
        assert!((x[1..].iter().sum::<f64>() - 1.0).abs() < 1e-12 || x[0] >= 4.0);
    }
}

#[test]
fn spectrum_trace_matches_closed_form() {
    let (header, rows) = csv(&stdout(&spiderwalk(&["spectrum", "4", "6", "3", "--cutoff", "7"])));
    assert_eq!(header[3], "multiplicity");
    let total: f64 = rows.iter().map(|r| r[3]).sum();
    assert_eq!(total, 20.0);
    let phases: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert!(phases.windows(2).all(|w| w[0] < w[1]));
    assert!((rows[0][4] - rows[0][5]).abs() < 1e-12);
    assert!((rows[0][5] - -2.0).abs() < 1e-12);
}

#[test]
fn amplitude_routes_agree() {
    let (_, rows) = csv(&stdout(&spiderwalk(&["amplitude", "4", "6", "3", "--l", "2", "--m", "1", "--n-max", "40"])));
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| r[3] < 1e-10));
}

#[test]
fn json_output_has_named_fields() {
    let text = stdout(&spiderwalk(&["localize", "4", "6", "3", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v[0]["w"], 0.5);
    assert_eq!(v[0]["qbar_origin"], 0.125);
    assert_eq!(v[0]["localized"], true);
}

#[test]
fn errors_are_json_on_stderr() {
    let out = spiderwalk(&["graph", "3", "4", "2", "--radius", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "UnrealizableWiring");
    assert!(err["message"].as_str().unwrap().contains("|V_1| = 3"));

    let out = spiderwalk(&["rwalk", "--pqr", "0.2", "0.5", "0.3", "--n-max", "3"]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ParamsOutOfRange");
}

#[test]
fn output_file_and_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_spiderwalk"))
        .args(["rwalk", "4", "6", "3", "--n-max", "6", "-o", "sub/rw.csv"])
        .env("SPIDERWALK_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let (_, rows) = csv(&std::fs::read_to_string(dir.path().join("sub/rw.csv")).unwrap());
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r[3] < 1e-12));
}

#[test]
fn graph_edge_list_counts() {
    // S(2,4,2): 1 + 2 + 4 vertices, tree edges 2 + 4, one intra edge per level
    let text = stdout(&spiderwalk(&["graph", "2", "4", "2", "--radius", "2"]));
    assert_eq!(text.lines().count(), 2 + 4 + 1 + 2);
}

#[test]
fn verify_passes() {
    let text = stdout(&spiderwalk(&["verify"]));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");
}
