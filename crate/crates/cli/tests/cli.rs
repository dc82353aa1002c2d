use std::path::Path;
use std::process::{Command, Output};

fn crewpair(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crewpair"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CREWPAIR_OUT_DIR")
        .output()
        .unwrap()
}

const SMALL: &str = r#"
seed = 3
[netgen]
num_hubs = 2
num_spokes = 4
num_bases = 1
flights_per_day = 30
num_days = 1
[run]
cg_patience = 10
[run.schedule]
kind = "fixed"
iterations = [2, 4]
"#;

#[test]
fn missing_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = crewpair(&["run"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = crewpair(&["run", "nope.toml"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn run_writes_outputs_and_honours_the_env_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.toml"), SMALL).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_crewpair"))
        .args(["run", "exp.toml"])
        .current_dir(dir.path())
        .env("CREWPAIR_OUT_DIR", "results")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("delta"));
    for f in ["trace_with.csv", "trace_without.csv", "summary.csv", "curves.csv"] {
        assert!(dir.path().join("results").join(f).exists(), "{f}");
    }
}

#[test]
fn no_learning_flag_skips_the_learning_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.toml"), SMALL).unwrap();
    let out = crewpair(
        &["run", "exp.toml", "--no-learning", "--out", "o", "--seed", "9"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o/trace_without.csv").exists());
    assert!(!dir.path().join("o/trace_with.csv").exists());
}

#[test]
fn gen_is_deterministic_and_feeds_the_pairing_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let a = crewpair(&["gen", "--seed", "4"], dir.path());
    let b = crewpair(&["gen", "--seed", "4"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("[[flights]]"));

    std::fs::write(
        dir.path().join("tiny.toml"),
        "seed = 1\n[netgen]\nnum_hubs = 1\nnum_spokes = 2\nnum_bases = 1\nflights_per_day = 8\nnum_days = 1\n",
    )
    .unwrap();
    let g = crewpair(&["gen", "-c", "tiny.toml", "-o", "net.toml"], dir.path());
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let o = crewpair(&["oracle", "pairings", "net.toml"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).ends_with("ok\n"));
}

#[test]
fn cover_oracle_agrees_on_a_dump() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tri.txt"),
        "# odd cycle\nflights 3\ncolumns 3\n1 0 1\n1 1 2\n1 0 2\n",
    )
    .unwrap();
    let out = crewpair(&["oracle", "cover", "tri.txt"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lp 1.5"));
    assert!(text.contains("ip 2"));
}
