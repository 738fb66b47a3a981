use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn aitlab(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aitlab"))
        .args(args)
        .env("AITLAB_CACHE_DIR", cache)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn build_table_then_depset_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache_s = cache.to_str().unwrap();
    let out = aitlab(
        &cache,
        &[
            "build-table",
            "--n",
            "8",
            "--cond",
            "empty",
            "--t",
            "4096",
            "--out",
            cache_s,
        ],
    );
    let report = json(&out);
    assert_eq!(report["result"]["key"]["length_cap"], 12);
    assert!(report["machine_version"].is_string());

    let out = aitlab(
        &cache,
        &[
            "depset", "--kind", "A", "--x", "10110010", "--alpha", "3", "--format", "csv",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["center", "kind", "alpha", "s", "size", "bound_ratio"]
    );
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "10110010");
    let size: usize = row[4].parse().unwrap();
    let ratio: f64 = row[5].parse().unwrap();
    assert_eq!(ratio, size as f64 / 32.0);
    assert!(text.starts_with("# machine_version: "));
}

#[test]
fn second_invocation_runs_no_programs() {
    let dir = tempfile::tempdir().unwrap();
    let first = json(&aitlab(
        dir.path(),
        &["build-table", "--n", "7", "--cond", "len"],
    ));
    assert!(first["result"]["programs_run"].as_u64().unwrap() > 0);
    let second = json(&aitlab(
        dir.path(),
        &["build-table", "--n", "7", "--cond", "len"],
    ));
    assert_eq!(second["result"]["programs_run"], 0);
    assert_eq!(
        first["result"]["count_below"],
        second["result"]["count_below"]
    );
}

#[test]
fn truncated_cache_is_rebuilt_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    json(&aitlab(
        dir.path(),
        &["build-table", "--n", "6", "--cond", "010"],
    ));
    let file = fs::read_dir(dir.path())
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let bytes = fs::read(&file).unwrap();
    fs::write(&file, &bytes[..bytes.len() / 2]).unwrap();
    let out = aitlab(dir.path(), &["build-table", "--n", "6", "--cond", "010"]);
    let report = json(&out);
    assert!(report["result"]["programs_run"].as_u64().unwrap() > 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rebuilding"));
    assert_eq!(fs::read(&file).unwrap(), bytes);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = aitlab(dir.path(), &["selftest", "--n", "6"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = aitlab(dir.path(), &["depset", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(
        aitlab(dir.path(), &["no-such-command"]).status.code(),
        Some(1)
    );
    // precondition: bad bit literal
    assert_eq!(
        aitlab(dir.path(), &["depset", "--x", "10a", "--alpha", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn refusals_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        aitlab(dir.path(), &["build-table", "--n", "20"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        aitlab(dir.path(), &["graph", "--n", "11", "--beta", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn cover_reports_are_reproducible_and_importable() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("cover.json");
    let args = [
        "cover",
        "greedy",
        "--n",
        "6",
        "--alpha",
        "2",
        "--save",
        saved.to_str().unwrap(),
    ];
    let a = aitlab(dir.path(), &args);
    let b = aitlab(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let verify = json(&aitlab(
        dir.path(),
        &["cover", "verify", "--input", saved.to_str().unwrap()],
    ));
    assert_eq!(verify["result"]["verdict"]["covers"], true);

    let random = [
        "cover",
        "random",
        "--n",
        "6",
        "--alpha",
        "2",
        "--samples",
        "8",
        "--seed",
        "3",
    ];
    assert_eq!(
        aitlab(dir.path(), &random).stdout,
        aitlab(dir.path(), &random).stdout
    );
}

#[test]
fn extractor_table_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("ext");
    let base = [
        "extract-count",
        "--n",
        "6",
        "--m",
        "2",
        "--x",
        "011010",
        "--alpha",
        "1",
        "--s",
        "3",
    ];
    let mut save = base.to_vec();
    save.extend(["--seed", "5", "--save", stem.to_str().unwrap()]);
    let a = json(&aitlab(dir.path(), &save));
    let mut load = base.to_vec();
    load.extend(["--table", stem.to_str().unwrap()]);
    let b = json(&aitlab(dir.path(), &load));
    assert_eq!(a["result"]["certificate"], b["result"]["certificate"]);
    let cert = &a["result"]["certificate"];
    assert!(cert["bound"].as_i64().unwrap() <= a["result"]["b_size"].as_i64().unwrap());
}

#[test]
fn remaining_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["degree", "--u", "0110", "--alpha", "1"],
        &[
            "degree", "--u", "0110", "--alpha", "1", "--sample", "4", "--seed", "2",
        ],
        &[
            "thm1-witness",
            "--x",
            "1101001110",
            "--alpha",
            "2",
            "--slack",
            "2",
        ],
        &["graph", "--n", "4", "--beta", "1", "--format", "csv"],
        &["indep-set", "--n", "4", "--beta", "1"],
        &["check-pairwise", "--set", "0110,1001,1111", "--alpha", "2"],
        &["check-mutual", "--tuple", "011,101", "--alpha", "3"],
        &["intersect", "--xs", "0110,0111", "--alpha", "1"],
        &["soi-report", "--n", "3"],
        &[
            "soi-report",
            "--n",
            "3",
            "--sample",
            "10",
            "--seed",
            "1",
            "--format",
            "csv",
        ],
        &[
            "depset",
            "--kind",
            "A-restricted",
            "--x",
            "0110",
            "--alpha",
            "1",
            "--s",
            "-3",
            "--members",
        ],
        &["depset", "--kind", "B", "--x", "0110", "--alpha", "1"],
    ];
    for args in cases {
        let out = aitlab(dir.path(), args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let thm1 = aitlab(
        dir.path(),
        &["thm1-witness", "--x", "1101001110", "--alpha", "2"],
    );
    assert_eq!(thm1.status.code(), Some(1));
}

#[test]
fn report_file_written_with_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = aitlab(
        dir.path(),
        &["soi-report", "--n", "2", "--out", path.to_str().unwrap()],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["result"]["pairs_evaluated"], 16);
    assert_eq!(v["config"]["command"], "soi-report");
}
