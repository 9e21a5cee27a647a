//! End-to-end runs of the binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use badlatt::engine::{replay_audit, verify_content_hash};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_badlatt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BADLATT_PRECISION_CAP")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stdout).trim()).expect("json on stdout")
}

#[test]
fn construct_writes_hashed_outputs_and_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("lebesgue_short.json");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["construct", "--config", cfg.to_str().unwrap(), "--seed", "5"], out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout_json(&o)["nonempty"], Value::Bool(true));
    }
    for name in ["certificate.json", "removals.csv", "tq.csv", "audit.jsonl"] {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert_eq!(x, y, "{name} differs between reruns");
        let text = String::from_utf8(x).unwrap();
        assert!(verify_content_hash(name, &text).unwrap(), "{name}");
        assert!(text.contains("\"q_max\":2") || text.contains("\"q_max\": 2"), "{name} lacks the config");
    }
    let replay = replay_audit(&fs::read_to_string(a.join("audit.jsonl")).unwrap()).unwrap();
    assert!(replay.matches(), "{replay:?}");
}

#[test]
fn cantor_gap_start_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("cantor_gap.json");
    let o = run(&["construct", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));
}

#[test]
fn overrides_reach_the_recorded_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("lebesgue_short.json");
    let o = Command::new(env!("CARGO_BIN_EXE_badlatt"))
        .args(["construct", "--config", cfg.to_str().unwrap(), "--mode", "interval", "--precision", "96"])
        .arg("--out")
        .arg(dir.path())
        .env("BADLATT_PRECISION_CAP", "1024")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["config"]["mode"], "interval");
    assert_eq!(cert["config"]["precision"], 96);
    assert_eq!(cert["config"]["precision_cap"], 1024);
}

#[test]
fn certify_rational_is_zero_and_golden_is_not() {
    let dir = tempfile::tempdir().unwrap();
    let half = stdout_json(&run(&["certify", "--x", "1/2"], dir.path()));
    assert_eq!(half["estimate"]["hi"], "0");
    let golden = stdout_json(&run(&["certify", "--x", "golden", "--horizon", "1000"], dir.path()));
    let lo = golden["c_est_lo"].as_f64().unwrap();
    // min over q of q |q phi - p| is attained at q = 1: 2 - phi.
    assert!((lo - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12, "{golden}");
    assert!(dir.path().join("certify.json").exists());
}

#[test]
fn flow_floor_separates_golden_from_half() {
    let dir = tempfile::tempdir().unwrap();
    let floor = |x: &str| {
        let o = run(&["flow", "--point", x, "--t-end", "25", "--steps", "50"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_to_string(dir.path().join("flow.csv")).unwrap();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 52);
        stdout_json(&o)["floor_norm2"].as_f64().unwrap()
    };
    assert!(floor("golden") >= 0.5);
    assert!(floor("1/2") < 1e-4);
}

#[test]
fn tq_zero_rates_and_table_and_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["tq", "--R", "16", "--q-max", "5"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("tq.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("16")), "{csv}");

    let table = dir.path().join("h.csv");
    fs::write(&table, "p,q,h\n0,0,15\n0,1,20\n").unwrap();
    let o = run(&["tq", "--R", "16", "--table", table.to_str().unwrap(), "--q-max", "1"], dir.path());
    // t_0 = 1, t_1 = 16 - 20 / 1 < 0.
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout_json(&o)["failed_at"], 1);

    let o = run(&["tq", "--preset", "desk", "--q-max", "40"], dir.path());
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["extra"]["first_below_floor"], Value::Null);
    assert!(v["t_min"].as_f64().unwrap() >= 1093.0 / 36.0);
}

#[test]
fn qnd_writes_csv_and_fit_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        r#"{"measure":{"kind":"lebesgue","support":["0","1"]},"curve":"veronese:1","J":["0","1"],
            "tau":["2","-2"],"deltas":["1","1/2","1/4","1/8","3/4","3/8"],"depth":8}"#,
    )
    .unwrap();
    let o = run(&["qnd", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("qnd.csv")).unwrap();
    assert!(csv.starts_with("delta,mass_lo,mass_hi"));
    assert_eq!(csv.lines().count(), 7);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("qnd_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["depth"], 8);
    assert!(summary["fit_upper"]["gamma_hat"].as_f64().is_some(), "{summary}");
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"weights":["1"],"R":16,"bogus":1}"#).unwrap();
    let o = run(&["construct", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}
