use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mfscale(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfscale"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_white(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let o = mfscale(
        &[
            "--seed",
            &seed.to_string(),
            "synth",
            "white",
            "--n",
            &n.to_string(),
        ],
        dir,
    );
    assert!(o.status.success());
    let path = dir.join(name);
    fs::write(&path, &o.stdout).unwrap();
    path
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn synth_is_seeded_single_column() {
    let dir = tempfile::tempdir().unwrap();
    let a = mfscale(
        &[
            "--seed", "9", "synth", "fgn", "--n", "1000", "--hurst", "0.7",
        ],
        dir.path(),
    );
    let b = mfscale(
        &[
            "--seed", "9", "synth", "fgn", "--n", "1000", "--hurst", "0.7",
        ],
        dir.path(),
    );
    let c = mfscale(
        &[
            "--seed", "10", "synth", "fgn", "--n", "1000", "--hurst", "0.7",
        ],
        dir.path(),
    );
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1000);
    assert!(text.lines().all(|l| l.parse::<f64>().is_ok()));
}

#[test]
fn synth_then_mfdfa_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_white(dir.path(), "w.txt", 1 << 14, 4);
    let o = mfscale(
        &[
            "mfdfa",
            input.to_str().unwrap(),
            "--z-min",
            "0",
            "--z-max",
            "2",
            "--z-step",
            "1",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z,h,tau,stderr,r2"));
    let row: Vec<f64> = lines
        .nth(2)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row[0], 2.0);
    assert!((row[1] - 0.5).abs() < 0.05, "h(2) = {}", row[1]);
    assert!((row[2] - (2.0 * row[1] - 1.0)).abs() < 1e-12);
    assert!(text.contains("z,alpha,f"));
}

#[test]
fn json_output_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_white(dir.path(), "w.txt", 4096, 5);
    let o = mfscale(
        &[
            "--format",
            "json",
            "--out",
            "res",
            "mfdfa",
            input.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/w_scaling.json")).unwrap())
            .unwrap();
    for key in ["z", "h", "tau", "stderr"] {
        assert!(v[key].is_array(), "missing {key}");
    }
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/w_spectrum.json")).unwrap())
            .unwrap();
    assert!(v["alpha"].is_array() && v["f"].is_array());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_white(dir.path(), "w.txt", 4096, 6);
    let good = good.to_str().unwrap();
    assert_eq!(mfscale(&["mfdfa", good], dir.path()).status.code(), Some(0));
    assert_eq!(
        mfscale(&["mfdfa", "missing.txt", good], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        mfscale(&["mfdfa", "missing.txt"], dir.path()).status.code(),
        Some(3)
    );
    assert_eq!(
        mfscale(&["mfdfa", "--no-such-flag", good], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mfscale(&["mfdfa", good, "--profile-order", "3"], dir.path())
            .status
            .code(),
        Some(2)
    );
    fs::write(dir.path().join("bad.txt"), "1.0\nabc\n2.0\n").unwrap();
    let o = mfscale(&["mfdfa", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn surrogate_carries_metadata_and_preserves_values() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_white(dir.path(), "w.txt", 512, 7);
    let o = mfscale(
        &[
            "--seed",
            "11",
            "surrogate",
            input.to_str().unwrap(),
            "--surrogate",
            "shuffle",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(first.trim_start_matches('#').trim()).unwrap();
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["kind"], "shuffle");
    let mut shuffled: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let mut orig: Vec<f64> = fs::read_to_string(&input)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    shuffled.sort_by(f64::total_cmp);
    orig.sort_by(f64::total_cmp);
    assert_eq!(shuffled, orig);
}

#[test]
fn boxdim_of_a_filled_square() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x,y\n");
    for i in 0..100 {
        for j in 0..100 {
            text.push_str(&format!("{},{}\n", i as f64 / 99.0, j as f64 / 99.0));
        }
    }
    fs::write(dir.path().join("sq.csv"), text).unwrap();
    let o = mfscale(
        &[
            "--format", "json", "boxdim", "sq.csv", "--fit-lo", "1", "--fit-hi", "5",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = v["d_f"].as_f64().unwrap();
    assert!((d - 2.0).abs() < 0.05, "d_f = {d}");
}

#[test]
fn suite_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_white(dir.path(), "a.txt", 4096, 1);
    let b = write_white(dir.path(), "b.txt", 4096, 2);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let run = |threads: &str, out: &str| {
        let o = mfscale(
            &[
                "--seed",
                "3",
                "--threads",
                threads,
                "--out",
                out,
                "suite",
                a,
                b,
                "--lags",
                "1,2",
            ],
            dir.path(),
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        tree(&dir.path().join(out))
    };
    let one = run("1", "r1");
    let four = run("4", "r4");
    assert_eq!(
        one.keys().collect::<Vec<_>>(),
        four.keys().collect::<Vec<_>>()
    );
    for (name, bytes) in &one {
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(bytes, &four[name], "{name} differs");
    }
    let strip = |m: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(m).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    assert_eq!(strip(&one["manifest.json"]), strip(&four["manifest.json"]));

    // re-run from the manifest reproduces the outputs
    let o = mfscale(
        &["--out", "r5", "suite", "--manifest", "r1/manifest.json"],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let again = tree(&dir.path().join("r5"));
    for (name, bytes) in &one {
        if name != "manifest.json" {
            assert_eq!(bytes, &again[name], "{name} differs on manifest rerun");
        }
    }
}

#[test]
fn suite_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_white(dir.path(), "a.txt", 4096, 1);
    fs::write(dir.path().join("short.txt"), "1\n2\n3\n").unwrap();
    let o = mfscale(
        &[
            "--out",
            "r",
            "suite",
            a.to_str().unwrap(),
            "short.txt",
            "--lags",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let errors = fs::read_to_string(dir.path().join("r/errors.csv")).unwrap();
    assert!(errors.contains("short"));
    let o = mfscale(&["suite", a.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
}
