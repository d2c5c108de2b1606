use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn obstrnav(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obstrnav"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Temp dir with `toy/config.json` and its fixtures.
fn toy_dir(seed: &str) -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    let out = obstrnav(tmp.path(), &["--seed", seed, "--out", "toy", "toy"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    tmp
}

const CFG: &str = "toy/config.json";

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn help_and_usage_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&obstrnav(tmp.path(), &["--help"])), 0);
    assert_eq!(code(&obstrnav(tmp.path(), &["--version"])), 0);
    assert_eq!(code(&obstrnav(tmp.path(), &["frobnicate"])), 3);
    assert_eq!(code(&obstrnav(tmp.path(), &["masks", "--scan", "s"])), 3);
    assert_eq!(
        code(&obstrnav(
            tmp.path(),
            &["--config", "nope.json", "gen-blocks"]
        )),
        3
    );
}

#[test]
fn bad_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.json"), r#"{"x_max": 3, "bogus": 1}"#).unwrap();
    let out = obstrnav(tmp.path(), &["--config", "c.json", "gen-blocks"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    std::fs::write(tmp.path().join("c.json"), r#"{"x_max": 0}"#).unwrap();
    assert_eq!(
        code(&obstrnav(tmp.path(), &["--config", "c.json", "gen-blocks"])),
        3
    );
}

#[test]
fn missing_connectivity_is_a_domain_error() {
    let tmp = toy_dir("1");
    let cfg = tmp.path().join(CFG);
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("\"connectivity\"", "\"missing\"");
    std::fs::write(&cfg, text).unwrap();
    let out = obstrnav(tmp.path(), &["--config", CFG, "gen-blocks"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not found"), "{}", stderr(&out));
}

#[test]
fn x_max_one_writes_only_block_one() {
    let tmp = toy_dir("2");
    let out = obstrnav(tmp.path(), &["--config", CFG, "gen-blocks", "--x-max", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dir = tmp.path().join("toy/out");
    assert!(dir.join("block_1.jsonl").is_file());
    assert!(!dir.join("block_2.jsonl").exists());
    let stats = std::fs::read_to_string(dir.join("stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 2, "{stats}");

    let out = obstrnav(tmp.path(), &["stats", "toy/out/block_1.jsonl"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), stats);
}

#[test]
fn masks_are_written_and_reproducible() {
    let tmp = toy_dir("3");
    let args = [
        "--config",
        CFG,
        "masks",
        "--scan",
        "toy_pair",
        "--edge",
        "pair_a,pair_b",
    ];
    assert_eq!(code(&obstrnav(tmp.path(), &args)), 0);
    let root = tmp.path().join("toy/out/masks");
    let read = || {
        files_under(&root)
            .into_iter()
            .map(|p| std::fs::read(p).unwrap())
            .collect::<Vec<_>>()
    };
    let pngs = files_under(&root)
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .count();
    assert_eq!(pngs, 18);
    let first = read();
    assert_eq!(code(&obstrnav(tmp.path(), &args)), 0);
    assert_eq!(read(), first);
}

#[test]
fn unknown_edge_is_a_domain_error() {
    let tmp = toy_dir("3");
    let out = obstrnav(
        tmp.path(),
        &[
            "--config",
            CFG,
            "masks",
            "--scan",
            "toy_pair",
            "--edge",
            "pair_a,nowhere",
        ],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn gmm_then_filter() {
    let tmp = toy_dir("4");
    assert_eq!(
        code(&obstrnav(tmp.path(), &["--config", CFG, "fit-gmm"])),
        0
    );
    let models: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("toy/out/models.json")).unwrap())
            .unwrap();
    assert_eq!(models.as_array().map(Vec::len), Some(10));
    assert_eq!(code(&obstrnav(tmp.path(), &["--config", CFG, "filter"])), 0);
    let selected = std::fs::read_to_string(tmp.path().join("toy/out/selected.jsonl")).unwrap();
    assert_eq!(selected.lines().count(), 60);
}

#[test]
fn simulate_reports_both_agents() {
    let tmp = toy_dir("5");
    assert_eq!(
        code(&obstrnav(tmp.path(), &["--config", CFG, "gen-blocks"])),
        0
    );
    assert_eq!(
        code(&obstrnav(tmp.path(), &["--config", CFG, "simulate"])),
        0
    );
    let results = std::fs::read_to_string(tmp.path().join("toy/out/results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(lines.next(), Some("set,agent,count,TL,NE,SR,SPL"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    for row in &rows {
        let (sr, spl): (f64, f64) = (row[5].parse().unwrap(), row[6].parse().unwrap());
        assert!(spl <= sr);
        if row[1] == "detour" {
            assert_eq!(sr, 100.0, "{row:?}");
        }
    }
    let before = std::fs::read(tmp.path().join("toy/out/trajectories.jsonl")).unwrap();
    assert_eq!(
        code(&obstrnav(
            tmp.path(),
            &["--config", CFG, "simulate", "--agent", "detour"]
        )),
        0
    );
    let only: Vec<String> = std::fs::read_to_string(tmp.path().join("toy/out/results.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(String::from)
        .collect();
    assert_eq!(only.len(), 4);
    assert!(only.iter().all(|l| l.contains(",detour,")));
    assert_ne!(
        std::fs::read(tmp.path().join("toy/out/trajectories.jsonl")).unwrap(),
        before
    );
}

#[test]
fn curriculum_prints_the_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let out = obstrnav(
        tmp.path(),
        &["curriculum", "--steps", "0,10000,20000", "--batch", "4"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,alpha,batch");
    assert!(
        lines[1].starts_with("0,0.0000,") && lines[1].ends_with("OOOO"),
        "{}",
        lines[1]
    );
    assert!(lines[2].starts_with("10000,0.2500,"));
    assert!(lines[3].starts_with("20000,0.5000,"));
}
