use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use photonpress::cli::sha256_file;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_photonpress"));
    c.env_remove("PHOTONPRESS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../assets/scenarios")
        .join(name)
        .display()
        .to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn error_kind(out: &Output) -> String {
    let text = String::from_utf8_lossy(&out.stderr);
    let v: Value = serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"));
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn forcemap_is_reproducible_and_seed_dependent() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str, seed: &str| {
        let d = dir.path().join(name);
        let o = run(&[
            "forcemap",
            "--res",
            "6x3",
            "--spp",
            "128",
            "--seed",
            seed,
            "--out",
            d.to_str().unwrap(),
            "-q",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        d
    };
    let (a, b, c) = (out("a", "3"), out("b", "3"), out("c", "4"));
    let read = |d: &Path| std::fs::read(d.join("forcemap.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(
        std::fs::read(a.join("forcemap_force.ppm")).unwrap(),
        std::fs::read(b.join("forcemap_force.ppm")).unwrap()
    );
    assert!(std::fs::read(a.join("forcemap_torque.ppm"))
        .unwrap()
        .starts_with(b"P6\n6 3\n"));
    assert_eq!(
        std::fs::read_to_string(a.join("forcemap.csv")).unwrap().lines().count(),
        1 + 18
    );
}

#[test]
fn manifest_records_outputs_and_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("fm");
    let o = bin()
        .args([
            "forcemap",
            "--res",
            "4x2",
            "--spp",
            "64",
            "--seed",
            "9",
            "--out",
            d.to_str().unwrap(),
            "-q",
        ])
        .env("PHOTONPRESS_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let m = json(&d.join("manifest.json"));
    assert_eq!(m["command"], "forcemap");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["threads"], 1);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 3);
    for f in outputs {
        let p = PathBuf::from(f["path"].as_str().unwrap());
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_file(&p).unwrap());
    }
}

#[test]
fn exit_codes_and_error_objects() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["forcemap", "--res", "0x4"]).status.code(), Some(2));
    assert_eq!(
        run(&["optimize", "--scenario", "x.json", "--method", "newton"]).status.code(),
        Some(2)
    );

    let missing = run(&["propagate", "--scenario", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(error_kind(&missing), "io");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = run(&["propagate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "parse");

    let o = bin().args(["verify"]).env("PHOTONPRESS_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "invalid_argument");

    let o = run(&[
        "forcemap",
        "--template",
        "library:nope",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("7 of 7 checks passed"), "{stdout}");
    let report = json(&dir.path().join("verify.json"));
    let checks = report.as_array().unwrap();
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn sample_train_evaluate_optimize_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).display().to_string();
    let ok = |o: Output| {
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    ok(run(&[
        "sample",
        "--rows",
        "96",
        "--spp",
        "128",
        "--seed",
        "2",
        "--out",
        &p("s"),
    ]));
    let data = p("s/dataset.csv");
    assert_eq!(std::fs::read_to_string(&data).unwrap().lines().count(), 97);

    ok(run(&[
        "sample",
        "--rows",
        "32",
        "--spp",
        "128",
        "--seed",
        "2",
        "--extend",
        &data,
        "--out",
        &p("s2"),
    ]));
    let extended = std::fs::read_to_string(p("s2/dataset.csv")).unwrap();
    assert_eq!(extended.lines().count(), 129);
    assert!(extended.starts_with(&std::fs::read_to_string(&data).unwrap()));

    ok(run(&[
        "train-proxy",
        "--data",
        &data,
        "--steps",
        "300",
        "--batch",
        "32",
        "--arch",
        "2x8",
        "--out",
        &p("t"),
    ]));
    let proxy = p("t/proxy.json");
    assert!(std::fs::read_to_string(p("t/train_history.csv")).unwrap().lines().count() > 1);

    ok(run(&["eval-proxy", "--proxy", &proxy, "--data", &data, "--out", &p("e")]));
    let e = json(&dir.path().join("e/eval.json"));
    assert!(e["force"].as_f64().unwrap().is_finite());
    assert_eq!(e["rows"], 96);

    ok(run(&[
        "propagate",
        "--scenario",
        &scenario("waypoint-box-wing.json"),
        "--proxy",
        &proxy,
        "--steps",
        "40",
        "--out",
        &p("pr"),
    ]));
    assert_eq!(
        std::fs::read_to_string(p("pr/trajectory_case0.csv")).unwrap().lines().count(),
        1 + 41
    );

    let stdout = ok(run(&[
        "optimize",
        "--scenario",
        &scenario("waypoint-box-wing.json"),
        "--proxy",
        &proxy,
        "--steps",
        "3",
        "--check-gradient",
        "1e-6",
        "--out",
        &p("o"),
    ]));
    assert!(stdout.contains("terminal miss"), "{stdout}");
    let r = json(&dir.path().join("o/result.json"));
    let init = r["result"]["miss_init"][0].as_f64().unwrap();
    let best = r["result"]["miss_best"][0].as_f64().unwrap();
    assert!(best <= init);
    assert!(r["initial_gradient"].is_object());
    for f in ["baseline_case0.csv", "optimized_case0.csv", "manifest.json"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
}

#[test]
fn shipped_box_wing_waypoint_makes_progress() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "optimize",
        "--scenario",
        &scenario("waypoint-box-wing.json"),
        "--steps",
        "40",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("result.json"));
    let init = r["result"]["miss_init"][0].as_f64().unwrap();
    let best = r["result"]["miss_best"][0].as_f64().unwrap();
    assert!(best < 0.5 * init, "miss {best} vs initial {init}");
}
