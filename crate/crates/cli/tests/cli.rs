//! End-to-end runs of the `fama-lab` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fama-lab"))
        .args(args)
        .env_remove("FAMA_LAB_THREADS")
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const HEADER: &str = "gamma_db,N,W,NI,sigma,sigma_i,method,value,ci_halfwidth,capacity_lb,mult_gain,note";

#[test]
fn outage_sweep_writes_schema_to_stdout() {
    let o = lab(&["outage", "--values", "1,3", "--methods", "exact,bound-I,bound-II"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 1 + 2 * 3);
    // N = 1 at 10 dB with five interferers: q = 50, outage 50/51
    assert!(lines[1].starts_with("10,1,2,5,1,2.23606798,exact,0.980392157,"), "{}", lines[1]);
}

#[test]
fn single_port_mc_row_matches_ratio() {
    let o = lab(&[
        "outage", "--values", "1", "--methods", "mc", "--trials", "1000000", "--interferers", "1",
        "--gamma-db", "10",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let (v, ci): (f64, f64) = (row[7].parse().unwrap(), row[8].parse().unwrap());
    assert!((v - 10.0 / 11.0).abs() <= ci, "{v} ± {ci}");
}

#[test]
fn flags_override_config_file() {
    let cfg = scratch("override.cfg");
    fs::write(&cfg, "# fixed scenario\nports = 7\ninterferers = 3\naxis = gamma_db\nvalues = 0, 5\nmethods = bound-I\n")
        .unwrap();
    let o = lab(&["outage", "--config", cfg.to_str().unwrap(), "--ports", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",9,2,3,") && r.contains("bound-I")), "{text}");
}

#[test]
fn bad_config_is_an_error() {
    let cfg = scratch("bad.cfg");
    fs::write(&cfg, "portz = 7\n").unwrap();
    let o = lab(&["outage", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'portz'"));
    let o = lab(&["outage", "--config", "/nonexistent/fama.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/fama.cfg"));
}

#[test]
fn explicit_exact_beyond_cap_names_the_cap() {
    let o = lab(&["outage", "--values", "40", "--methods", "exact"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("32"));
}

#[test]
fn default_methods_fall_back_beyond_cap() {
    let o = lab(&["outage", "--values", "40", "--trials", "20000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("N exceeds exact cap 32"), "{text}");
    assert!(text.contains(",bound-I,") && text.contains(",mc,"));
}

#[test]
fn infeasible_only_exits_with_two() {
    let o = lab(&["width-vs-ports", "--values", "2,4", "--mult-gain", "20"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("infeasible"));
    // one feasible cell is enough for success
    let o = lab(&["width-vs-ports", "--values", "4,2000", "--mult-gain", "20"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn design_reports_every_rule() {
    let o = lab(&["design", "--mu", "0.3", "--ports", "200", "--width", "0.766"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for m in ["ports-general", "ports-equal", "width", "critical-mu"] {
        assert!(text.contains(&format!(",{m},")), "{m} missing:\n{text}");
    }
}

#[test]
fn invalid_inputs_exit_with_one() {
    for args in [
        vec!["outage", "--values", "5,2"],
        vec!["outage", "--values", "1", "--methods", "mc", "--trials", "10"],
        vec!["outage", "--methods", "nope"],
        vec!["capacity", "--axis", "sideways"],
        vec!["outage", "--threads", "0"],
    ] {
        let o = lab(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn plot_script_emitted_next_to_csv() {
    let csv = scratch("cap.csv");
    let o = lab(&[
        "capacity", "--values", "0:10:5", "--interferers", "2", "--out", csv.to_str().unwrap(),
        "--plot",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let script = fs::read_to_string(scratch("cap.capacity-vs-gamma.gp")).unwrap();
    assert!(script.contains("cap.csv"));
    assert!(script.lines().any(|l| l == "unset logscale y"));

    let o = lab(&["outage", "--values", "1,2", "--methods", "bound-I", "--out", csv.to_str().unwrap(), "--plot", "outage-vs-N"]);
    assert!(o.status.success());
    let script = fs::read_to_string(scratch("cap.outage-vs-N.gp")).unwrap();
    assert!(script.lines().any(|l| l == "set logscale y"));
}

#[test]
fn plot_needs_out_and_known_kind() {
    let o = lab(&["outage", "--plot"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty(), "nothing should run before the usage error");
    let csv = scratch("x.csv");
    let o = lab(&["outage", "--out", csv.to_str().unwrap(), "--plot", "pie-chart"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown figure kind"));
}

#[test]
fn selftest_passes_and_repeats() {
    let a = lab(&["selftest", "--seed", "3"]);
    assert!(a.status.success(), "{}", stdout(&a));
    assert!(stdout(&a).lines().all(|l| l.starts_with("PASS")));
    let (p1, p2) = (scratch("st1.csv"), scratch("st2.csv"));
    lab(&["selftest", "--seed", "3", "--threads", "1", "--out", p1.to_str().unwrap()]);
    lab(&["selftest", "--seed", "3", "--threads", "3", "--out", p2.to_str().unwrap()]);
    assert_eq!(fs::read(p1).unwrap(), fs::read(p2).unwrap());
}
