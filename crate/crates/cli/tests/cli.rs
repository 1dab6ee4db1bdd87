use std::process::{Command, Output};

use cachepir::Rational;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cachepir")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&a)).unwrap()
}

fn csv_rows(text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().clone();
    (header, r.records().map(|x| x.unwrap()).collect())
}

#[test]
fn headers_are_exact() {
    let first = |args: &[&str]| stdout(args).lines().next().unwrap().to_string();
    assert_eq!(first(&["bounds", "-K", "3", "-N", "2", "--points", "3"]), "r_num,r_den,outer,inner,gap,fully_known");
    assert_eq!(
        first(&["corners", "-K", "3", "-N", "2"]),
        "s,r_num,r_den,cost_num,cost_den,message_length,download_count"
    );
    assert_eq!(
        first(&["gap", "-N", "2", "--max-messages", "3"]),
        "k,max_gap_num,max_gap_den,argmax_r_num,argmax_r_den"
    );
}

#[test]
fn bounds_at_a_corner_meet() {
    let text = stdout(&["bounds", "--messages", "4", "--databases", "2", "--ratios", "1/3"]);
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "1");
    assert_eq!(&rows[0][1], "3");
    assert_eq!(&rows[0][2], "0.833333333333");
    assert_eq!(&rows[0][4], "0.000000000000");

    let v = json(&["bounds", "-K", "4", "-N", "2", "--ratios", "1/3"]);
    assert_eq!(v["rows"][0]["outer"], "5/6");
    assert_eq!(v["rows"][0]["gap"], "0/1");
}

#[test]
fn bounds_grid_contains_breakpoints_once() {
    let (_, rows) = csv_rows(&stdout(&["bounds", "-K", "3", "-N", "2", "--points", "4"]));
    let rs: Vec<Rational> = rows.iter().map(|r| Rational::new(r[0].parse::<i64>().unwrap(), r[1].parse::<i64>().unwrap())).collect();
    assert!(rs.windows(2).all(|w| w[0] < w[1]));
    // 0, 1/3, 2/3, 1 from the grid plus 1/4 and 1/2 from the curves.
    for (p, q) in [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (1, 1)] {
        assert!(rs.contains(&Rational::new(p, q)), "{p}/{q}");
    }
}

#[test]
fn csv_decimals_match_exact_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("b.csv");
    let json_path = dir.path().join("b.json");
    let base = ["bounds", "-K", "5", "-N", "3", "--points", "9", "--precision", "9"];
    let mut a = base.to_vec();
    a.extend(["--out", csv_path.to_str().unwrap()]);
    assert!(stdout(&a).is_empty());
    let mut b = base.to_vec();
    b.extend(["--format", "json", "--out", json_path.to_str().unwrap()]);
    stdout(&b);

    let (_, rows) = csv_rows(&std::fs::read_to_string(&csv_path).unwrap());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let items = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), items.len());
    for (row, item) in rows.iter().zip(items) {
        let r: Rational = item["r"].as_str().unwrap().parse().unwrap();
        assert_eq!(r, Rational::new(row[0].parse::<i64>().unwrap(), row[1].parse::<i64>().unwrap()));
        for (col, key) in [(2, "outer"), (3, "inner"), (4, "gap"), (5, "fully_known")] {
            let exact: Rational = item[key].as_str().unwrap().parse().unwrap();
            assert_eq!(&row[col], exact.to_decimal(9), "{key}");
        }
    }
}

#[test]
fn corner_rows() {
    let (_, rows) = csv_rows(&stdout(&["corners", "-K", "3", "-N", "2"]));
    let got: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().collect()).collect();
    assert_eq!(
        got,
        vec![
            vec!["0", "0", "1", "7", "4", "8", "14"],
            vec!["1", "1", "4", "1", "1", "8", "8"],
            vec!["2", "1", "2", "1", "2", "4", "2"],
            vec!["3", "1", "1", "0", "1", "2", "0"],
        ]
    );
}

#[test]
fn gap_has_running_max() {
    let (_, rows) = csv_rows(&stdout(&["gap", "-N", "2", "--max-messages", "6"]));
    assert_eq!(rows.len(), 6);
    let last = rows.last().unwrap();
    assert_eq!(&last[0], "max");
    let v = json(&["gap", "-N", "2", "--max-messages", "6"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    let max: Rational = v["max"]["max_gap"].as_str().unwrap().parse().unwrap();
    for row in v["rows"].as_array().unwrap() {
        assert!(row["max_gap"].as_str().unwrap().parse::<Rational>().unwrap() <= max);
    }
    assert_eq!(max, Rational::new(last[1].parse::<i64>().unwrap(), last[2].parse::<i64>().unwrap()));
}

#[test]
fn simulate_reports_documented_costs() {
    for (args, cost) in [
        (vec!["-K", "3", "-N", "2", "--corner", "1"], "1/1"),
        (vec!["-K", "4", "-N", "2", "--corner", "2"], "5/6"),
        (vec!["-K", "4", "-N", "2", "--corner", "3"], "1/2"),
        (vec!["-K", "3", "-N", "2", "--ratio", "1/3", "--target", "3"], "5/6"),
    ] {
        let mut a = vec!["simulate"];
        a.extend(&args);
        a.extend(["--trials", "4", "--seed", "10"]);
        let v = json(&a);
        assert_eq!(v["aggregate"]["expected_cost"], cost);
        assert_eq!(v["aggregate"]["pass"], true);
        let sessions = v["sessions"].as_array().unwrap();
        assert_eq!(sessions.len(), 4);
        for (i, s) in sessions.iter().enumerate() {
            assert_eq!(s["cost"], cost);
            assert_eq!(s["decode_ok"], true);
            assert_eq!(s["seed"], 10 + i as u64);
        }
    }
}

#[test]
fn session_json_round_trips() {
    let v = json(&["simulate", "-K", "4", "-N", "3", "--corner", "2", "--seed", "5"]);
    let session: cachepir::sim::SessionReport = serde_json::from_value(v["sessions"][0].clone()).unwrap();
    let params = cachepir::PirParams::with_corner(4, 3, 2).unwrap();
    assert_eq!(session, cachepir::sim::run_session(&params, 1, 5).unwrap());
}

#[test]
fn verify_modes_pass_on_small_instance() {
    for mode in ["structural", "leak", "consumption", "reliability"] {
        let v = json(&["verify", "-K", "4", "-N", "2", "--corner", "1", "--mode", mode, "--trials", "5"]);
        assert_eq!(v["mode"], mode);
        assert_eq!(v["pass"], true, "{mode}");
        if mode != "reliability" {
            assert_eq!(v["details"].as_array().unwrap().len(), 2);
        }
    }
}

#[test]
fn verification_failure_exits_three() {
    // Twenty transcripts cannot resolve the distributions to within 0.05.
    let out = run(&["verify", "-K", "2", "-N", "2", "--corner", "1", "--mode", "statistical", "--samples", "20"]);
    assert_eq!(out.status.code(), Some(3));
    let (_, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(&rows[0][2], "false");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["bounds"],
        vec!["bounds", "-K", "1", "-N", "2"],
        vec!["simulate", "-K", "3", "-N", "2", "--ratio", "3/2"],
        vec!["simulate", "-K", "3", "-N", "2", "--corner", "3"],
        vec!["verify", "-K", "3", "-N", "2", "--corner", "1", "--mode", "sideways"],
        vec!["bounds", "-K", "3", "-N", "2", "--ratios", "x/y"],
        vec!["gap", "-N", "2", "--max-messages", "1"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.csv");
    let out = run(&["corners", "-K", "3", "-N", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
