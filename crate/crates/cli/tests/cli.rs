use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn microlocal(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microlocal"))
        .args(args)
        .current_dir(dir)
        .env_remove("MICROLOCAL_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn coherent_scan_has_one_detected_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = microlocal(&["scan", "--u", "coherent", "--x0", "0.5", "--xi0", "-1", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("# content_hash: sha256:"));
    assert_eq!(lines.next().unwrap(), "x,xi,slope,residual,class");
    assert_eq!(lines.count(), 41 * 41);
    let doc = read_json(&dir.path().join("res/scan.json"));
    assert_eq!(doc["result"]["detected"], serde_json::json!([[25, 10]]));
    assert_eq!(doc["verdict"], true);
    assert_eq!(std::fs::read_to_string(dir.path().join("res/scan.csv")).unwrap(), csv);
}

#[test]
fn recurrence_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = microlocal(&["bounds", "--recurrence", "10"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,epsilon");
    assert_eq!(rows.len(), 12);
    let eps: Vec<f64> = rows[1..5].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(eps, [1.0, 0.5, 0.375, 0.3046875]);
}

#[test]
fn example1_config_reruns_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("example1.toml"), "experiment = \"example1\"\n[output]\ndir = \"a\"\n").unwrap();
    let o = microlocal(&["run", "example1.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = microlocal(&["--threads", "1", "run", "example1.toml", "--out", "b"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a/example1.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b/example1.json")).unwrap());
    let doc: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["verdict"], true);
    assert_eq!(doc["config"]["theorem1"]["epsilon"], 0.1);
    assert!(doc["content_hash"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn thread_env_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_microlocal"))
            .args(["wkb", "--u", "quadratic_gaussian", "--out", out])
            .env("MICROLOCAL_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap()
    };
    assert_eq!(run("1", "one").status.code(), Some(0));
    assert_eq!(run("4", "four").status.code(), Some(0));
    for f in ["wkb.json", "wkb.csv"] {
        let one = std::fs::read(dir.path().join("one").join(f)).unwrap();
        assert_eq!(one, std::fs::read(dir.path().join("four").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn epsilon_outside_the_allowed_range_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "experiment = \"theorem1\"\n[symbol]\nkind = \"bump\"\n[theorem1]\nepsilon = 0.3\n";
    std::fs::write(dir.path().join("bad.toml"), cfg).unwrap();
    let o = microlocal(&["run", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`theorem1.epsilon`"), "{}", stderr(&o));
    let scaled = microlocal(&["theorem1", "--symbol", "{ kind = \"scaled_bump\", delta = 0.3 }", "--epsilon", "0.15"], dir.path());
    assert_eq!(scaled.status.code(), Some(1));
    assert!(stderr(&scaled).contains("`theorem1.epsilon`"));
}

#[test]
fn schema_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (cfg, key) in [
        ("experiment = \"scan\"\n[scan]\nbogus = 1\n", "scan"),
        ("experiment = \"scan\"\n[scan.rect]\nx = [-1, 1]\nxi = [-1, 1]\nnx = 5\nnxi = \"a\"\n", "scan.rect.nxi"),
        ("experiment = \"wkb\"\n[state]\nkind = \"coherent\"\nx0 = 0\nxi0 = 0\n", "state.kind"),
        ("experiment = \"nothing\"\n", "experiment"),
        ("experiment = \"selftest\"\n[selftest]\ncriteria = [13]\n", "selftest.criteria"),
    ] {
        std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
        let o = microlocal(&["run", "c.toml"], dir.path());
        assert_eq!(o.status.code(), Some(1), "{cfg}");
        assert!(stderr(&o).contains(&format!("`{key}")), "{cfg}: {}", stderr(&o));
    }
}

#[test]
fn execution_and_usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(microlocal(&["run", "missing.toml"], dir.path()).status.code(), Some(1));
    assert_eq!(microlocal(&["frobnicate"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("s.toml"), "experiment = \"scan\"\n").unwrap();
    let o = microlocal(&["bounds", "--config", "s.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`experiment`"));
    assert_eq!(microlocal(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn selftest_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = microlocal(&["selftest", "--criteria", "2,10"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let five = microlocal(&["selftest", "--criteria", "5"], dir.path());
    assert_eq!(five.status.code(), Some(2));
    assert!(stdout(&five).starts_with("FAIL criterion  5"));
}

#[test]
fn transform_reports_unitarity() {
    let dir = tempfile::tempdir().unwrap();
    let o = microlocal(&["transform", "--u", "bump_gaussian", "--h", "0.001"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["result"]["inversion_error"].as_f64().unwrap() < 1e-12);
    assert!(doc["result"]["norm_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(doc["config"]["transform"]["h"], 0.001);
}
