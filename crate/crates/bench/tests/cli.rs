use std::path::Path;
use std::process::{Command, Output};

fn pacbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pacbench"))
        .args(args)
        .current_dir(dir)
        .env_remove("PACBENCH_SEED")
        .env_remove("PACBENCH_OUT")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const TRACKING: &str = "scenario = \"tracking\"\nmaximizer = \"pac\"\nk = 1\ntrajectories = 3\nsteps = 5\n";

#[test]
fn run_tracking_writes_one_row_per_trajectory_metric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", TRACKING);
    let out = pacbench(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scenario,maximizer,k,seed,trial,metric,value"));
    let rows: Vec<&str> = lines.collect();
    // accuracy, work, prior-samples, reinitializations
    assert_eq!(rows.len(), 3 * 4);
    assert!(rows.iter().all(|r| r.starts_with("tracking,pac,1,0,")));
    assert!(!text.contains("wall-ms"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "scenario = \"sensor-toy\"\nmaximizer = [\"greedy\", \"lazier\", \"pac\"]\nk = [1, 2]\ntrials = 5\nsample_size = 3\n",
    );
    let a = pacbench(&["run", &cfg, "--seed", "11", "--out", "a.csv"], dir.path());
    let b = pacbench(&["run", &cfg, "--seed", "11", "--out", "b.csv", "--jobs", "1"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().contains(",11,"));
}

#[test]
fn environment_overrides_seed_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", TRACKING);
    let out = Command::new(env!("CARGO_BIN_EXE_pacbench"))
        .args(["run", &cfg])
        .current_dir(dir.path())
        .env("PACBENCH_SEED", "5")
        .env("PACBENCH_OUT", "env.csv")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("env.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",1,5,")));
}

#[test]
fn k_above_n_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "scenario = \"coverage\"\nmaximizer = \"greedy\"\nk = 9\nn = 4\n");
    let out = pacbench(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("k:"), "{err}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.toml", "scenario = \"coverage\"\nbogus = 1\n");
    assert_eq!(pacbench(&["run", &unknown], dir.path()).status.code(), Some(2));
    assert_eq!(pacbench(&["run", "missing.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(pacbench(&["verify", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(pacbench(&["frobnicate"], dir.path()).status.code(), Some(2));
    let single = write(dir.path(), "s.toml", "scenario = \"coverage\"\nmaximizer = \"greedy\"\nk = 1\n");
    assert_eq!(pacbench(&["compare", &single], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_coarsening_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = pacbench(&["verify", "coarsening"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("coarsening: pass"), "{text}");
}

#[test]
fn verify_nemhauser_reports_min_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = pacbench(&["verify", "nemhauser"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("min F(greedy)/F(opt)")).unwrap();
    let observed: f64 = line.split("observed ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(observed >= 0.632, "{line}");
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn compare_sensor_toy_pairs_rows_on_shared_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "scenario = \"sensor-toy\"\nmaximizer = [\"greedy\", \"pac\"]\nk = 2\ntrials = 4\nseed = 3\n",
    );
    let out = pacbench(&["compare", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    for m in ["greedy", "pac"] {
        assert_eq!(rows.iter().filter(|r| r[1] == m && r[5] == "objective").count(), 4);
    }
    assert!(rows.iter().all(|r| r[3] == "3"));
    let paired: Vec<_> = rows.iter().filter(|r| r[1] == "pac-vs-greedy").collect();
    assert!(paired.iter().any(|r| r[4] == "mean" && r[5] == "work-ratio"));
    assert!(paired.iter().any(|r| r[4] == "0" && r[5] == "objective-delta"));
}

#[test]
fn compare_lazier_with_full_sample_matches_greedy_selections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "scenario = \"coverage\"\nmaximizer = [\"greedy\", \"lazier\"]\nk = 3\nn = 9\nsample_size = 9\ntrials = 10\n",
    );
    let out = pacbench(&["compare", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&String::from_utf8(out.stdout).unwrap());
    let selections = |m: &str| -> Vec<String> {
        rows.iter().filter(|r| r[1] == m && r[5] == "selection").map(|r| r[6].clone()).collect()
    };
    assert_eq!(selections("greedy").len(), 10);
    assert_eq!(selections("greedy"), selections("lazier"));
}

#[test]
fn timing_rows_are_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "scenario = \"coverage\"\nmaximizer = \"greedy\"\nk = 2\ntrials = 2\ntiming = true\n",
    );
    let out = pacbench(&["run", &cfg], dir.path());
    assert!(String::from_utf8(out.stdout).unwrap().contains(",wall-ms,"));
}
