use std::process::{Command, Output};

fn frolov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frolov")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["basis", "--dim", "1"][..],
        &["nodes", "--dim", "2", "--n", "0"],
        &["table", "--dim", "0"],
        &["integrate", "--dim", "2", "--integrand", "nope", "--n", "64"],
        &["integrate", "--dim", "2", "--integrand", "const"],
        &["frobnicate"],
    ] {
        let o = frolov(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn resource_guard_exits_3() {
    let o = frolov(&["table", "--dim", "16", "--n", "65536"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--force"));
    let o = frolov(&["table", "--dim", "8", "--n", "1024", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn basis_json_d2() {
    let o = frolov(&["basis", "--dim", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["d"], 2);
    assert_eq!(v["admissible"], true);
    let root = v["roots"][0].as_f64().unwrap();
    assert!((root - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(v["reduction"], serde_json::json!([[1, 0], [0, 1]]));
    let det = v["determinant"].as_f64().unwrap();
    assert!((det + 8f64.sqrt()).abs() < 1e-12, "det = {det}");
    assert!(v["diagnostics"]["gram_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn basis_csv_is_long_form() {
    let o = frolov(&["basis", "--dim", "4", "--format", "csv"]);
    let out = stdout(&o);
    assert!(out.starts_with("name,row,col,value\n"));
    assert!(out.contains("reduction,1,3,-2\n"));
    assert!(out.contains("admissible,0,0,true\n"));
}

#[test]
fn nodes_csv_and_stats_line() {
    let o = frolov(&["nodes", "--dim", "2", "--n", "64"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x1,x2"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 65);
    assert!(rows.iter().flatten().all(|v| v.abs() <= 0.5));
    let stats: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(stats["cube_points"], 65);
    assert_eq!(stats["ellipsoid_points"], 101);
    assert_eq!(stats["in_regime"], true);
}

#[test]
fn nodes_json_has_stats_and_nodes() {
    let o = frolov(&["nodes", "--dim", "4", "--n", "64", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 71);
    assert_eq!(v["stats"]["ellipsoid_points"], 347);
    // n = 64 <= 2^6 is outside the regime of the lower bound
    assert!(v["stats"]["bound_lower"].is_null());
}

#[test]
fn nodes_out_file_moves_stats_to_stdout() {
    let dir = std::env::temp_dir().join(format!("frolov-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("nodes.csv");
    let o = frolov(&["nodes", "--dim", "2", "--n", "256", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file.lines().count(), 1 + 257);
    let stats: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(stats["cube_points"], 257);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn integrate_const_d2() {
    let o = frolov(&["integrate", "--dim", "2", "--integrand", "const", "--n", "64"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..3], ["64", "65", "1.015625"]);
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.015625);
    assert!(stderr(&o).is_empty());
}

#[test]
fn integrate_non_admissible_dimension_warns() {
    let o = frolov(&["integrate", "--dim", "3", "--integrand", "const", "--n", "100"]);
    assert!(o.status.success());
    assert!(stderr(&o).starts_with("warning:"));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn bounds_sandwich_holds_in_regime() {
    let o = frolov(&["bounds", "--dim", "2", "--n-list", "64,4096,65536"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,bound_lower,ellipsoid_points,bound_upper,in_regime,holds"));
    for line in lines {
        assert!(line.ends_with(",true,true"), "{line}");
    }
}

#[test]
fn table_json_matches_csv() {
    let csv = stdout(&frolov(&["table", "--dim", "4", "--n-list", "64,256"]));
    let json = stdout(&frolov(&["table", "--dim", "4", "--n-list", "64,256", "--format", "json"]));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    for (line, row) in csv.lines().skip(1).zip(&rows) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], row["cube_points"].to_string());
        assert_eq!(cols[2], row["ellipsoid_points"].to_string());
    }
    assert_eq!(csv, "n,cube_points,ellipsoid_points,overhead\n64,71,347,4.89\n256,261,1205,4.62\n");
}

#[test]
fn tolerance_widens_node_set() {
    let strict = stdout(&frolov(&["table", "--dim", "2", "--n", "1024"]));
    let loose = stdout(&frolov(&["table", "--dim", "2", "--n", "1024", "--tolerance", "0.05"]));
    let count = |s: &str| s.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse::<u64>().unwrap();
    assert!(count(&loose) > count(&strict));
}
