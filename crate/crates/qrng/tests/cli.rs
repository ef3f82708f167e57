use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qrng(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrng"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(args: &[&str]) -> Output {
    let out = qrng(args);
    assert_eq!(code(&out), 0, "qrng {args:?} failed: {}", stderr(&out));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        ok(&["simulate", "--seed", seed, "--duration-ns", "2e7", "--out", s(out)]);
    }
    assert_eq!(files(&a), files(&b));
    assert_ne!(
        fs::read(a.join("tags.ptag")).unwrap(),
        fs::read(c.join("tags.ptag")).unwrap()
    );
    let side = json(&a.join("tags.json"));
    assert_eq!(side["seed"], 5);
    let counts = &side["counts"];
    let total: u64 = ["R1", "R2", "T1"].iter().map(|d| counts[d].as_u64().unwrap()).sum();
    assert_eq!(total, side["events"].as_u64().unwrap());
    assert_eq!(fs::metadata(a.join("tags.ptag")).unwrap().len(), 16 + 9 * total);
}

#[test]
fn pipeline_equals_chained_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scene.cfg");
    fs::write(&cfg, "seed = 11\npreset = bright\nduration_ns = 2e6\n").unwrap();
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    let code_one = code(&qrng(&["pipeline", "--config", s(&cfg), "--out", s(&one)]));

    let tags = two.join("tags.ptag");
    ok(&["simulate", "--config", s(&cfg), "--out", s(&two)]);
    ok(&["g2", "--tags", s(&tags), "--out", s(&two)]);
    ok(&["extract", "--tags", s(&tags), "--out", s(&two)]);
    let code_two = code(&qrng(&[
        "test",
        "--bits",
        s(&two.join("unbiased.qbit")),
        "--out",
        s(&two),
    ]));
    ok(&["report", "--run", s(&two), "--out", s(&two)]);

    assert_eq!(code_one, code_two);
    let (f1, f2) = (files(&one), files(&two));
    assert_eq!(f1.keys().collect::<Vec<_>>(), f2.keys().collect::<Vec<_>>());
    for (name, bytes) in &f1 {
        assert!(bytes == &f2[name], "{name} differs");
    }
    for name in [
        "tags.ptag",
        "tags.json",
        "g2_R1_T1.csv",
        "fit_R1_T1.json",
        "g2_R1_R2.csv",
        "fit_R1_R2.json",
        "raw.qbit",
        "stage1.qbit",
        "unbiased.qbit",
        "rates.json",
        "battery.json",
        "battery.csv",
        "summary.json",
        "summary.csv",
    ] {
        assert!(f1.contains_key(name), "missing {name}");
    }
    let curve = String::from_utf8(f1["g2_R1_T1.csv"].clone()).unwrap();
    assert!(curve.starts_with("lag_ns,counts,normalized\n"));
    assert_eq!(curve.lines().count(), 1 + 201);
}

#[test]
fn corrupted_magic_names_the_expected_magic() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&["pipeline", "--seed", "3", "--duration-ns", "1e7", "--out", s(&run)]);

    let mut tags = fs::read(run.join("tags.ptag")).unwrap();
    tags[..4].copy_from_slice(b"XTAG");
    let bad = dir.path().join("bad.ptag");
    fs::write(&bad, &tags).unwrap();
    let out = qrng(&["g2", "--tags", s(&bad), "--out", s(&run)]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("PTAG1\\0") && msg.contains("byte 0"), "{msg}");

    let mut bits = fs::read(run.join("unbiased.qbit")).unwrap();
    bits[0] = b'Z';
    let bad = dir.path().join("bad.qbit");
    fs::write(&bad, &bits).unwrap();
    let out = qrng(&["test", "--bits", s(&bad), "--out", s(&run)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("QBIT1\\0"), "{}", stderr(&out));

    let truncated = dir.path().join("short.ptag");
    fs::write(&truncated, &fs::read(run.join("tags.ptag")).unwrap()[..16 + 9 + 4]).unwrap();
    let out = qrng(&["extract", "--tags", s(&truncated), "--out", s(&run)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("byte 25"), "{}", stderr(&out));
}

#[test]
fn invalid_input_is_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");

    let out = qrng(&["simulate", "--seed", "1", "--duration-ns", "0", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("duration_ns"));
    assert!(!out_dir.exists());

    let out = qrng(&["pipeline", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--seed"));
    assert!(!out_dir.exists());

    for args in [
        vec!["simulate", "--seed", "1", "--format", "json"],
        vec!["simulate", "--seed", "1", "--set", "detectors.R1.efficiency=2"],
        vec!["simulate", "--seed", "1", "--set", "no_such_key=1"],
        vec!["pipeline", "--seed", "1", "--set", "g2.bin_width_ns=-1"],
        vec!["simulate", "--bogus-flag"],
    ] {
        let mut full = args.clone();
        full.extend(["--out", s(&out_dir)]);
        assert_eq!(code(&qrng(&full)), 2, "{args:?}");
        assert!(!out_dir.exists(), "{args:?}");
    }
}

#[test]
fn correlation_errors_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    // Dark counts only: no signal photons reach any detector.
    ok(&[
        "simulate",
        "--seed",
        "4",
        "--duration-ns",
        "1e8",
        "--set",
        "detectors.all.efficiency=0",
        "--set",
        "detectors.all.dark_rate_per_ns=2e-3",
        "--out",
        s(&run),
    ]);
    let tags = run.join("tags.ptag");
    ok(&["g2", "--tags", s(&tags), "--pair", "R1:T1", "--out", s(&run)]);
    let fit = json(&run.join("fit_R1_T1.json"));
    assert_eq!(fit["identified"], false, "{fit}");

    let out = qrng(&["g2", "--tags", s(&tags), "--pair", "R1:Q7", "--out", s(&run)]);
    assert_eq!(code(&out), 2);

    let empty = dir.path().join("empty");
    ok(&[
        "simulate",
        "--seed",
        "4",
        "--duration-ns",
        "1e6",
        "--set",
        "detectors.all.efficiency=0",
        "--set",
        "detectors.all.dark_rate_per_ns=0",
        "--out",
        s(&empty),
    ]);
    let out = qrng(&["g2", "--tags", s(&empty.join("tags.ptag")), "--out", s(&empty)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no events"), "{}", stderr(&out));
}

#[test]
fn csv_formats_match_binary() {
    let dir = tempfile::tempdir().unwrap();
    let (bin, csv) = (dir.path().join("bin"), dir.path().join("csv"));
    ok(&["simulate", "--seed", "8", "--duration-ns", "5e7", "--out", s(&bin)]);
    ok(&[
        "simulate",
        "--seed",
        "8",
        "--duration-ns",
        "5e7",
        "--format",
        "csv",
        "--out",
        s(&csv),
    ]);
    let text = fs::read_to_string(csv.join("tags.csv")).unwrap();
    assert!(text.starts_with("timestamp_ps,detector\n"));

    ok(&["extract", "--tags", s(&bin.join("tags.ptag")), "--out", s(&bin)]);
    ok(&[
        "extract",
        "--tags",
        s(&csv.join("tags.csv")),
        "--format",
        "csv",
        "--out",
        s(&csv),
    ]);
    for stage in ["raw", "stage1", "unbiased"] {
        let a = qrng::commands::load_bits(&bin.join(format!("{stage}.qbit"))).unwrap();
        let b = qrng::commands::load_bits(&csv.join(format!("{stage}.csv"))).unwrap();
        assert_eq!(a, b, "{stage}");
    }
    let (ra, rb) = (json(&bin.join("rates.json")), json(&csv.join("rates.json")));
    assert_eq!(ra["report"], rb["report"]);
}

#[test]
fn skewed_split_fails_raw_and_passes_unbiased() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&[
        "simulate",
        "--seed",
        "7",
        "--duration-ns",
        "5e9",
        "--set",
        "reflection_hbt_split=0.7",
        "--out",
        s(&run),
    ]);
    ok(&["extract", "--tags", s(&run.join("tags.ptag")), "--out", s(&run)]);

    let raw_dir = run.join("raw_tests");
    let out = qrng(&["test", "--bits", s(&run.join("raw.qbit")), "--out", s(&raw_dir)]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let battery = json(&raw_dir.join("battery.json"));
    let freq = &battery["report"]["records"][0];
    assert_eq!(freq["test"], "frequency");
    assert!(freq["min_p_value"].as_f64().unwrap() < 1e-6);
    assert_eq!(freq["pass"], false);
    let csv = fs::read_to_string(raw_dir.join("battery.csv")).unwrap();
    assert!(
        csv.lines().nth(1).unwrap().starts_with("frequency,") && csv.lines().nth(1).unwrap().ends_with(",0.01,false")
    );

    let out = qrng(&["test", "--bits", s(&run.join("unbiased.qbit")), "--out", s(&run)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let battery = json(&run.join("battery.json"));
    assert!(battery["report"]["bits"].as_u64().unwrap() > 30_000);
    assert_eq!(battery["report"]["records"][0]["pass"], true);
}

#[test]
fn io_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, b"x").unwrap();
    let out = qrng(&[
        "simulate",
        "--seed",
        "1",
        "--duration-ns",
        "1e6",
        "--out",
        s(&file.join("sub")),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = qrng(&[
        "test",
        "--bits",
        s(&dir.path().join("missing.qbit")),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 3);
    let out = qrng(&["report", "--run", s(dir.path()), "--out", s(dir.path())]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ascii_bits_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let bits = dir.path().join("bits.txt");
    fs::write(&bits, "1011010101\n").unwrap();
    let out = qrng(&["test", "--bits", s(&bits), "--format", "json", "--out", s(dir.path())]);
    // Ten bits are too short for every test.
    assert_eq!(code(&out), 4);
    let battery = json(&dir.path().join("battery.json"));
    assert_eq!(battery["report"]["verdict"], "inconclusive");
    assert!(!dir.path().join("battery.csv").exists());
}
