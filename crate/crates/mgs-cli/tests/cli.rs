// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `mgs` binary: the generate/order/compress/
//! verify/decompress pipeline, config-file defaults, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mgs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgs")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mgs(args);
    assert!(
        out.status.success(),
        "mgs {:?} failed:\n{}{}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(dir: &Path, name: &str) -> (PathBuf, String) {
    let p = dir.join(name);
    let s = p.to_str().unwrap().to_string();
    (p, s)
}

#[test]
fn pipeline_roundtrips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph) = path(dir.path(), "g.txt");
    let (_, perm) = path(dir.path(), "perm.txt");
    let (_, file) = path(dir.path(), "g.mgs");
    let (back_p, back) = path(dir.path(), "back.txt");

    ok(&["generate", "--kind", "web", "--n", "600", "--avg-deg", "6", "--seed", "5", "--out", &graph]);
    ok(&["order", "--input", &graph, "--ordering", "llp", "--seed", "5", "--out", &perm]);
    ok(&[
        "compress", "--input", &graph, "--out", &file, "--codec", "cs", "--window", "32",
        "--order-file", &perm,
    ]);
    ok(&["verify", "--original", &graph, "--compressed", &file, "--order-file", &perm]);
    ok(&["decompress", "--input", &file, "--out", &back]);

    // The decompressed edge list is the relabelled graph, sorted.
    let text = fs::read_to_string(&back_p).unwrap();
    assert!(text.lines().count() > 0);
    let stats = ok(&["stats", "--input", &file]);
    assert!(stats.contains("codec: cs"), "{stats}");
    assert!(stats.contains("window: 32"), "{stats}");
}

#[test]
fn verify_fails_with_nonzero_exit_on_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = path(dir.path(), "a.txt");
    let (_, b) = path(dir.path(), "b.txt");
    let (_, file) = path(dir.path(), "a.mgs");
    ok(&["generate", "--kind", "er", "--n", "200", "--p", "0.02", "--seed", "1", "--out", &a]);
    ok(&["generate", "--kind", "er", "--n", "200", "--p", "0.02", "--seed", "2", "--out", &b]);
    ok(&["compress", "--input", &a, "--out", &file]);
    let out = mgs(&["verify", "--original", &b, "--compressed", &file]);
    assert!(!out.status.success(), "mismatch must exit nonzero");
}

#[test]
fn corrupt_files_error_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph) = path(dir.path(), "g.txt");
    let (file_p, file) = path(dir.path(), "g.mgs");
    let (_, back) = path(dir.path(), "back.txt");
    ok(&["generate", "--kind", "er", "--n", "100", "--p", "0.05", "--seed", "3", "--out", &graph]);
    ok(&["compress", "--input", &graph, "--out", &file]);
    let mut bytes = fs::read(&file_p).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    fs::write(&file_p, &bytes).unwrap();
    let out = mgs(&["decompress", "--input", &file, "--out", &back]);
    assert!(!out.status.success(), "corrupt file must exit nonzero");
}

#[test]
fn compression_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph) = path(dir.path(), "g.txt");
    let (a_p, a) = path(dir.path(), "a.mgs");
    let (b_p, b) = path(dir.path(), "b.mgs");
    ok(&["generate", "--kind", "lfr", "--n", "400", "--avg-deg", "8", "--mu", "0.3", "--seed", "9", "--out", &graph]);
    ok(&["compress", "--input", &graph, "--out", &a, "--codec", "cg", "--clusters", "3", "--mode", "index", "--stride", "16"]);
    ok(&["compress", "--input", &graph, "--out", &b, "--codec", "cg", "--clusters", "3", "--mode", "index", "--stride", "16"]);
    assert_eq!(fs::read(a_p).unwrap(), fs::read(b_p).unwrap());
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph) = path(dir.path(), "g.txt");
    let (cfg_p, cfg) = path(dir.path(), "mgs.cfg");
    let (_, by_cfg) = path(dir.path(), "cfg.mgs");
    let (_, by_flag) = path(dir.path(), "flag.mgs");
    ok(&["generate", "--kind", "er", "--n", "300", "--p", "0.03", "--seed", "4", "--out", &graph]);
    fs::write(&cfg_p, "codec=cs\nwindow=16\n# comment\n").unwrap();
    ok(&["compress", "--config", &cfg, "--input", &graph, "--out", &by_cfg]);
    let stats = ok(&["stats", "--input", &by_cfg]);
    assert!(stats.contains("codec: cs") && stats.contains("window: 16"), "{stats}");
    ok(&["compress", "--config", &cfg, "--input", &graph, "--out", &by_flag, "--window", "8"]);
    let stats = ok(&["stats", "--input", &by_flag]);
    assert!(stats.contains("codec: cs") && stats.contains("window: 8"), "{stats}");
}

#[test]
fn bench_and_sweep_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (rows_p, rows) = path(dir.path(), "rows.csv");
    let out = ok(&["bench", "--out", &rows, "--n", "300", "--windows", "8", "--codecs", "bg,cs,cg", "--seed", "2"]);
    let text = fs::read_to_string(&rows_p).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dataset,ordering,codec,params,bpe,encode_us_per_edge,decode_us_per_edge"
    );
    // 5 datasets x 3 orderings x 3 codecs x 1 window.
    assert_eq!(lines.count(), 45);
    assert!(out.contains("transfer"), "{out}");
    assert!(out.contains("spread"), "{out}");

    let (sweep_p, sweep) = path(dir.path(), "sweep.csv");
    ok(&["sweep", "--synthetic", "er:200:0.03", "--codecs", "bg", "--ordering", "original", "--out", &sweep]);
    let text = fs::read_to_string(&sweep_p).unwrap();
    assert_eq!(text.lines().count(), 1 + 6, "header plus one row per window");
}

#[test]
fn ablate_reports_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let (csv_p, csv) = path(dir.path(), "walk.csv");
    let out = ok(&["ablate", "--synthetic", "web:400:6", "--seed", "1", "--out", &csv]);
    assert!(out.contains("baseline"), "{out}");
    assert!(out.contains("low-degree-search"), "{out}");
    let text = fs::read_to_string(&csv_p).unwrap();
    assert_eq!(text.lines().count(), 1 + 10, "header plus ten steps");
}
