use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE1: &str = r#"{"n_relays":1,"m_source":1,"m_relay":[2],"m_dest":1,"switching":"independent",
 "H":[[[0,0],[0,0],[1.7320508075688772,0]],[[0,0],[0,0],[0,0]],[[0,0],[1.7320508075688772,0],[0,0]]]}"#;

fn hdrelay(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdrelay"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn solve_crossed_line_network() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ex1.json"), EXAMPLE1).unwrap();
    let o = hdrelay(&["solve", "ex1.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["rate_bits"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let sched = v["schedule"].as_array().unwrap();
    assert_eq!(sched.len(), 1);
    assert_eq!(sched[0]["state_bits"], "01");
    assert_eq!(v["certificate"]["passed"], true);
    assert!(v["iterations"].as_u64().unwrap() >= 1);
    assert!(v["tight_cuts"].is_array());

    std::fs::write(dir.path().join("lock.json"), EXAMPLE1.replace("independent", "lockstep")).unwrap();
    let o = hdrelay(&["solve", "lock.json", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!((v["rate_bits"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn malformed_file_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), EXAMPLE1.replace(r#""m_dest":1,"#, "")).unwrap();
    let o = hdrelay(&["solve", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m_dest"));

    let truncated = EXAMPLE1.replace(r#",[[0,0],[1.7320508075688772,0],[0,0]]]"#, "]");
    std::fs::write(dir.path().join("short.json"), truncated).unwrap();
    let o = hdrelay(&["solve", "short.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("destination block"));

    let o = hdrelay(&["solve", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oracle_matches_and_refuses_large_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for seed in ["1", "2", "3"] {
        let o = hdrelay(&["gen-random", "--n", "4", "--seed", seed, "--out", "net.json"], d);
        assert_eq!(o.status.code(), Some(0));
        let o = hdrelay(&["oracle", "net.json"], d);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout_json(&o)["matches_solver"], true);
    }
    let o = hdrelay(&["gen-random", "--n", "12", "--out", "big.json"], d);
    assert_eq!(o.status.code(), Some(0));
    let o = hdrelay(&["oracle", "big.json"], d);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("refused"));

    let zero = EXAMPLE1.replace("1.7320508075688772", "0");
    std::fs::write(d.join("zero.json"), zero).unwrap();
    let o = hdrelay(&["oracle", "zero.json"], d);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["c_prime_exact"].as_f64(), Some(0.0));
}

#[test]
fn gen_random_is_deterministic_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    hdrelay(&["gen-random", "--n", "2", "--seed", "7", "--out", "a.json"], d);
    hdrelay(&["gen-random", "--n", "2", "--seed", "7", "--out", "b.json"], d);
    let a = std::fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.json")).unwrap());
    let net = hdrelay_core::gaussian::parse_network(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(net.channel().rows(), 3);
    assert_eq!(net.channel().cols(), 3);

    let o = hdrelay(&["gen-random", "--n", "2", "--antennas", "2,1"], d);
    let net = hdrelay_core::gaussian::parse_network(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(net.layout().m_tot(), 3);
    // Printed output is the same file the parser reads back.
    assert_eq!(hdrelay_core::gaussian::to_json(&net) + "\n", String::from_utf8(o.stdout).unwrap());

    let o = hdrelay(&["gen-random", "--n", "2", "--antennas", "2,1,1"], d);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_line_rows_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = hdrelay(
        &["sweep-line", "--gamma-min", "0.1", "--gamma-max", "10", "--points", "50", "--out", "s.csv"],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "gamma,c_fixed_i,c_fixed_ii,c_wf_i,c_wf_ii,active_states_i");
    assert_eq!(lines.len(), 51);
    let mut max_gap = f64::NEG_INFINITY;
    for l in &lines[1..] {
        let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        max_gap = max_gap.max(f[3] - f[1]);
    }
    assert!(max_gap <= 0.2077, "{max_gap}");

    let o = hdrelay(&["sweep-line", "--gamma-min", "1", "--gamma-max", "1", "--points", "1"], d);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[4] - 0.5 * 5f64.log2()).abs() < 1e-9);

    let o = hdrelay(&["sweep-line", "--gamma-min", "0.5", "--gamma-max", "2", "--points", "2"], d);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);

    for bad in [["0", "1", "5"], ["2", "1", "5"], ["0.1", "1", "1"]] {
        let o = hdrelay(
            &["sweep-line", "--gamma-min", bad[0], "--gamma-max", bad[1], "--points", bad[2]],
            d,
        );
        assert_eq!(o.status.code(), Some(1), "{bad:?}");
    }
}

#[test]
fn verify_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        ["--suite", "submodularity", "--n", "4", "--trials", "100"],
        ["--suite", "sparsity", "--n", "8", "--trials", "25"],
        ["--suite", "gap", "--n", "3", "--trials", "200"],
    ] {
        let mut full = vec!["verify"];
        full.extend(args);
        let o = hdrelay(&full, d);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout_json(&o)["passed"], true);
    }
    assert!(!d.join("hdrelay-witness.json").exists());
    let o = hdrelay(&["verify", "--suite", "sparsity", "--n", "9", "--trials", "1"], d);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_inputs_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    hdrelay(&["gen-random", "--n", "5", "--seed", "11", "--out", "n.json"], d);
    let a = hdrelay(&["solve", "n.json"], d).stdout;
    let b = hdrelay(&["solve", "n.json"], d).stdout;
    assert_eq!(a, b);
}
