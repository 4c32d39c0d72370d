use std::process::{Command, Output};

fn rankflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankflow"))
        .args(args)
        .env_remove("RANKFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_writes_positions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pos.csv");
    let out = rankflow(&[
        "simulate", "--particles", "25", "--step", "0.1", "--horizon", "1", "--sigma2", "0.2",
        "--seed", "3", "--emit-positions", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,position");
    assert_eq!(lines.len(), 26);
    assert!(lines[1].starts_with("0,"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("w1_to_exact"));
}

#[test]
fn simulate_accepts_model_flags() {
    let out = rankflow(&[
        "simulate", "--particles", "10", "--step", "0.5", "--flux", "poly:0,1,-0.5", "--scheme",
        "frac", "--init", "optimal", "--dist", "uniform:0,1", "--ties", "count",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("w1_to_exact"));
}

#[test]
fn exact_dumps_quantile_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let out = rankflow(&["exact", "--sigma2", "0.2", "--horizon", "1", "--grid", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["level", "quantile"]);
    let rows: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1].0, 0.5);
    assert!((rows[1].1 - 0.5).abs() < 1e-10);
    assert!(rows[0].1 < rows[1].1 && rows[1].1 < rows[2].1);
}

#[test]
fn strong_study_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = rankflow(&[
        "strong", "--sweep", "n:20,40", "--step", "0.1", "--runs", "6", "--seed", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "parameter,estimation,precision,ratio");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("20,") && lines[1].ends_with(','));
    assert!(lines[2].starts_with("40,") && !lines[2].ends_with(','));
}

#[test]
fn weak_study_json_to_stdout_is_thread_invariant() {
    let args = [
        "weak", "--sweep", "h:0.5,0.25", "--particles", "30", "--runs", "8", "--batches", "2",
        "--grid", "20", "--format", "json",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_rankflow"))
        .args(args)
        .env("RANKFLOW_THREADS", "1")
        .output()
        .unwrap();
    let three = Command::new(env!("CARGO_BIN_EXE_rankflow"))
        .args(args)
        .args(["--threads", "3"])
        .output()
        .unwrap();
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, three.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    let table = rankflow::harness::parse_json(&text).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!(table.rows[0].ratio.is_none());
    assert!(table.rows[1].ratio.is_some());
}

#[test]
fn configuration_errors_exit_2() {
    let cases: [&[&str]; 5] = [
        &["strong", "--sweep", "n:10", "--flux", "quadratic", "--runs", "4"],
        &["weak", "--sweep", "n:10", "--runs", "8", "--batches", "3", "--grid", "10"],
        &["simulate", "--particles", "10", "--step", "0.1", "--flux", "cubic"],
        &["simulate", "--particles", "0", "--step", "0.1"],
        &["strong", "--runs", "4"],
    ];
    for args in cases {
        let out = rankflow(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    let bad_env = Command::new(env!("CARGO_BIN_EXE_rankflow"))
        .args(["strong", "--sweep", "n:10", "--runs", "4"])
        .env("RANKFLOW_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // the quantile bracket cannot grow wide enough for this diffusion
    let out = rankflow(&["exact", "--sigma2", "1e300", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn unwritable_output_names_path() {
    let out = rankflow(&[
        "strong", "--sweep", "n:10", "--step", "0.5", "--runs", "2", "--out", "/no/such/dir/t.csv",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/no/such/dir/t.csv"));
}
