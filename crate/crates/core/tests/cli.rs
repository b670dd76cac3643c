use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qdiff(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiff"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_dirs(out: &Path, sub: &str) -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(out.join(sub)).unwrap().map(|e| e.unwrap().path()).collect();
    dirs.sort();
    dirs
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_worked_example() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qdiff(tmp.path(), &["classify", "--perm", "1 2 7 6 5 3 4 8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = &run_dirs(tmp.path(), "classify")[0];
    let meta = json(&dir.join("meta.json"));
    let c = &meta["result"]["classification"];
    assert_eq!(c["degree"], 4);
    assert_eq!(c["peaks"], serde_json::json!([3]));
    assert_eq!(c["valleys"], serde_json::json!([7]));
    assert_eq!(c["slopes"], serde_json::json!([5, 8]));
    assert_eq!(c["ladders"], serde_json::json!([1, 2, 4, 6]));
    assert_eq!(meta["config"]["lambda"], "0.3");
    let summary = json(&dir.join("summary.json"));
    assert_eq!(summary["status"], "PASS");
    let csv = std::fs::read_to_string(dir.join("result.csv")).unwrap();
    assert!(csv.contains("degree,4"));
}

#[test]
fn ursell_lattice_four() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qdiff(tmp.path(), &["ursell", "--n", "4", "--mode", "lattice"]);
    assert_eq!(o.status.code(), Some(0));
    let meta = json(&run_dirs(tmp.path(), "ursell")[0].join("meta.json"));
    assert_eq!(meta["result"]["value"], -6);
    assert_eq!(meta["result"]["bound"], 16);
}

#[test]
fn csv_is_reproducible_across_runs_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["diffusion", "--e", "1", "--ntraj", "2000", "--seed", "11"];
    for w in ["1", "1", "3"] {
        let mut a = args.to_vec();
        a.extend(["--workers", w]);
        let o = qdiff(tmp.path(), &a);
        assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
    }
    let csvs: Vec<Vec<u8>> =
        run_dirs(tmp.path(), "diffusion").iter().map(|d| std::fs::read(d.join("result.csv")).unwrap()).collect();
    assert_eq!(csvs.len(), 3);
    assert!(csvs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn show_config_lists_every_key() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qdiff(tmp.path(), &["--show-config", "--lambda", "0.2", "--set", "ntraj=500"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("lambda = 0.2\n") && text.contains("ntraj = 500\n") && text.contains("eta = auto\n"));
    assert_eq!(text.lines().count(), qdiff::harness::RunConfig::keys().len());
}

#[test]
fn config_file_and_invalid_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# coupling\nkappa = 0.2\n").unwrap();
    let o = qdiff(tmp.path(), &["--config", cfg.to_str().unwrap(), "exponent", "--k", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2/(6+9d)"));

    let o = qdiff(tmp.path(), &["lemma33", "--set", "eta=0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("η ≤ λ²"));

    let o = qdiff(tmp.path(), &["classify", "--perm", "1 1 2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qdiff(tmp.path(), &["counts", "--k", "9"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qdiff(tmp.path(), &["nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    // a tolerance nobody can meet
    let o = qdiff(tmp.path(), &["kidentity", "--sets", "3", "--set", "tol_kidentity=0"]);
    assert_eq!(o.status.code(), Some(1));
    let summary = json(&run_dirs(tmp.path(), "kidentity")[0].join("summary.json"));
    assert_eq!(summary["status"], "FAIL");
}
