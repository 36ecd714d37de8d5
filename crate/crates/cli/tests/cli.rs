use std::path::PathBuf;
use std::process::{Command, Output};

use ptc_cli::csv_io::read_csv;

fn ptc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptc")).args(args).output().expect("spawn ptc")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn design_worked_numbers() {
    let o = ptc(&["design", "--b-lower", "1", "--b-upper", "2", "--psi", "abs", "--M", "10", "--eps", "0.1", "--T", "1", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for line in ["N=600", "K=400", "C=0.1", "delta=0.0016666666666666668", "delta_inv=0.3333333333333333"] {
        assert!(out.lines().any(|l| l == line), "missing {line} in\n{out}");
    }
    assert!(out.contains("[design]"));
}

#[test]
fn design_from_initial_state() {
    let o = ptc(&["design", "--b-lower", "1", "--b-upper", "2", "--from-x0", "-10", "--eps", "0.1", "--T", "1", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "N=600"));
}

#[test]
fn design_rejects_infeasible_inputs() {
    let o = ptc(&["design", "--b-lower", "1", "--b-upper", "2", "--M", "0.05", "--eps", "0.1", "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps >= M"));
    let o = ptc(&["design", "--b-lower", "1", "--b-upper", "0.5", "--M", "10", "--eps", "0.1", "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_lemma1_csv_is_nondecreasing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("l1.csv");
    let svg = dir.path().join("l1.svg");
    let o = ptc(&["simulate", "--config", &scenario("lemma1.ini"), "--csv", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].x.abs() >= w[0].x.abs()));
    assert!(rows.last().unwrap().event.contains("overflow"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn simulate_lemma4_csv_settles_after_deadline() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("l4.csv");
    let o = ptc(&["simulate", "--config", &scenario("lemma4.ini"), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert!(rows.iter().filter(|r| r.k >= 24923).all(|r| r.x.abs() <= 0.01));
}

#[test]
fn simulate_dense_rows_hold_the_control() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("l2.csv");
    let o = ptc(&["simulate", "--config", &scenario("lemma2.ini"), "--csv", csv.to_str().unwrap(), "--dense", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.iter().filter(|r| r.is_dense()).count(), 5 * 7);
    for r in rows.iter().filter(|r| r.is_dense()) {
        let sample = rows.iter().find(|s| !s.is_dense() && s.k == r.k).unwrap();
        assert_eq!(r.u, sample.u);
    }
}

#[test]
fn simulate_missing_config_is_exit_2() {
    let o = ptc(&["simulate", "--config", "/nonexistent/scenario.ini"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..3).map(|i| dir.path().join(format!("{i}.csv"))).collect();
    for (p, seed) in paths.iter().zip(["4", "4", "5"]) {
        let o = ptc(&["simulate", "--config", &scenario("lemma2.ini"), "--seed", seed, "--csv", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let bytes: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(bytes[0], bytes[1]);
    assert_ne!(bytes[0], bytes[2]);
}

#[test]
fn lemma_suites_report_pass() {
    let o = ptc(&["lemma", "--which", "1b", "--a", "0.5", "--m", "1", "--A", "1", "--c", "3", "--steps", "30"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict=PASS"));
    let o = ptc(&["lemma", "--which", "2", "--M", "32", "--eps", "1", "--N", "5", "--b-lower", "1", "--b-upper", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "c=2") && out.lines().any(|l| l == "D=60"), "{out}");
}

#[test]
fn stretched_ratio_for_second_power_fails() {
    let o = ptc(&["lemma", "--which", "example2", "--a", "0.5", "--m", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL ratio(a=0.5,m=2"));
}

#[test]
fn unknown_lemma_is_exit_2() {
    assert_eq!(ptc(&["lemma", "--which", "9"]).status.code(), Some(2));
    assert_eq!(ptc(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sweep_runs_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ptc"))
        .args(["sweep", &scenario(""), "--out-dir", dir.path().to_str().unwrap()])
        .env("PTC_THREADS", "2")
        .output()
        .unwrap();
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("scenarios=6 verdict=PASS"), "{out}");
    assert!(dir.path().join("linear.csv").exists());
}

#[test]
fn sweep_rejects_bad_thread_count() {
    let o = Command::new(env!("CARGO_BIN_EXE_ptc"))
        .args(["sweep", &scenario("lemma2.ini")])
        .env("PTC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
