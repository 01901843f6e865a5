use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cauchy_rc::coeff::{CompositeCauchyModel, PmfSampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cauchy-rc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn composite_dump(dir: &Path) -> PathBuf {
    let m = CompositeCauchyModel::new(4.0, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let draws = PmfSampler::new(&m, 10_000).sample_n(&mut rng, 50_000);
    let text: String = draws.iter().map(|d| format!("{d}\n")).collect();
    let path = dir.join("coeffs.txt");
    fs::write(&path, text).unwrap();
    path
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fit_dist_orders_models_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dump = composite_dump(tmp.path());
    let a = run(&["fit-dist", p(&dump)]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = run(&["fit-dist", p(&dump)]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let kl = |k: &str| v[k]["kl_bits"].as_f64().unwrap();
    assert!(kl("composite") < kl("cauchy"), "{v}");
    assert!(kl("composite") < kl("laplacian"), "{v}");
    assert!((v["composite"]["p0"].as_f64().unwrap() - 0.3).abs() < 0.01);
}

#[test]
fn fit_dist_rejects_bad_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    assert_eq!(code(&run(&["fit-dist", p(&empty)])), 2);

    let bad = tmp.path().join("bad.txt");
    fs::write(&bad, "0\n1\nseven\n").unwrap();
    let o = run(&["fit-dist", p(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    assert_eq!(code(&run(&["fit-dist", p(&tmp.path().join("missing.txt"))])), 2);
}

#[test]
fn fit_dist_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dump = composite_dump(tmp.path());
    let out = tmp.path().join("fit");
    let o = run(&["fit-dist", p(&dump), "--beta-step", "0.5", "--beta-max", "20", "--out-dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json_file(&out.join("manifest.json"));
    assert_eq!(m["command"], "fit-dist");
    assert_eq!(m["config"]["beta_grid"]["kind"], "linear");
    let digest = hex::encode(Sha256::digest(fs::read(&dump).unwrap()));
    assert_eq!(m["inputs"][0]["sha256"], Value::String(digest));
    check_output_digests(&out, &m);
}

fn check_output_digests(dir: &Path, manifest: &Value) {
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for o in outputs {
        let bytes = fs::read(dir.join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn rd_curve_rows_are_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let dump = composite_dump(tmp.path());
    let o = run(&["rd-curve", p(&dump), "--qps", "37,22,32,27"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("qp,q_step,entropy_bits,distortion\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.iter().map(|r| r[0] as i32).collect::<Vec<_>>(), vec![22, 27, 32, 37]);
    for w in rows.windows(2) {
        assert!(w[1][2] < w[0][2], "entropy {} then {}", w[0][2], w[1][2]);
        assert!(w[1][3] > w[0][3], "distortion {} then {}", w[0][3], w[1][3]);
    }

    let single = run(&["rd-curve", p(&dump), "--qps", "30", "--slice", "I", "--path", "sum"]);
    assert_eq!(code(&single), 0);
    assert_eq!(String::from_utf8(single.stdout).unwrap().lines().count(), 2);
}

#[test]
fn rd_curve_reports_invalid_qps() {
    let tmp = tempfile::tempdir().unwrap();
    let dump = composite_dump(tmp.path());
    let o = run(&["rd-curve", p(&dump), "--qps", "22,0,57"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains('0') && err.contains("57"), "{err}");
    assert_eq!(code(&run(&["rd-curve", p(&dump), "--qps", "30", "--slice", "X"])), 1);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["simulate", "--synth", "moving_blob"])), 1);
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    for args in [
        vec!["--modes", "proposed_rc", "--qp", "30", "--derive-targets"],
        vec!["--modes", "proposed_rc"],
        vec!["--modes", "fixed_qp", "--qp", "70"],
        vec!["--modes", "default_rc", "--targets", "-5"],
    ] {
        let mut full = vec!["simulate", "--synth", "moving_blob", "--frames", "9", "--out-dir", p(&out)];
        full.extend(args.iter());
        let o = run(&full);
        assert_eq!(code(&o), 1, "{full:?}: {}", stderr(&o));
        assert!(!out.exists());
    }
    assert_eq!(code(&run(&["probe-dependency", "--synth", "nope"])), 1);
    assert_eq!(code(&run(&["probe-dependency", "--synth", "textured_pan", "--ref-qp-min", "40", "--ref-qp-max", "39"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

fn summary(dir: &Path) -> Vec<Value> {
    json_file(&dir.join("summary.json")).as_array().unwrap().clone()
}

#[test]
fn fixed_qp_has_no_bit_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&[
        "simulate", "--synth", "moving_blob", "--width", "64", "--height", "64", "--frames", "17", "--mode", "fixed_qp",
        "--qp", "32", "--out-dir", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&out);
    assert_eq!(s.len(), 1);
    assert!(s[0]["bit_err_pct"].is_null());
    assert_eq!(s[0]["mode"], "fixed_qp");
    let frames = fs::read_to_string(out.join("frames_fixed_qp_qp32.csv")).unwrap();
    assert!(frames.starts_with("poc,level,slice,qp,lambda,bits,bpp,psnr,skip_ratio\n"));
    assert_eq!(frames.lines().count(), 18);
}

#[test]
fn derived_targets_follow_fixed_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&[
        "simulate", "--synth", "textured_pan", "--width", "64", "--height", "64", "--frames", "33", "--gop", "RA16",
        "--modes", "fixed_qp,proposed_rc,default_rc", "--qp", "30,36", "--derive-targets", "--jobs", "2", "--out-dir",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&out);
    assert_eq!(s.len(), 6);
    for qp in [30, 36] {
        let fixed = s.iter().find(|r| r["run"] == format!("fixed_qp_qp{qp}")).unwrap();
        for mode in ["proposed_rc", "default_rc"] {
            let rc = s.iter().find(|r| r["run"] == format!("{mode}_qp{qp}")).unwrap();
            assert_eq!(rc["target_bps"], fixed["actual_bps"]);
        }
    }
    check_output_digests(&out, &json_file(&out.join("manifest.json")));
}

#[test]
fn four_targets_are_met() {
    let tmp = tempfile::tempdir().unwrap();
    let fixed = tmp.path().join("fixed");
    let src = ["--synth", "moving_blob", "--frames", "65", "--gop", "RA16", "--seed", "3"];
    let mut args = vec!["simulate", "--modes", "fixed_qp", "--qp", "26,30,34,38", "--jobs", "4", "--out-dir", p(&fixed)];
    args.extend(src);
    assert_eq!(code(&run(&args)), 0);
    let targets: Vec<String> = summary(&fixed).iter().map(|r| r["actual_bps"].to_string()).collect();
    let joined = targets.join(",");

    let rc = tmp.path().join("rc");
    let mut args = vec!["simulate", "--modes", "proposed_rc", "--targets", &joined, "--jobs", "4", "--out-dir", p(&rc)];
    args.extend(src);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&rc);
    assert_eq!(s.len(), 4);
    for r in &s {
        let err = r["bit_err_pct"].as_f64().unwrap();
        assert!(err <= 2.0, "{}: {err}%", r["run"]);
    }
}

#[test]
fn simulate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<PathBuf> = (0..2).map(|k| tmp.path().join(format!("o{k}"))).collect();
    for (k, d) in dirs.iter().enumerate() {
        let jobs = if k == 0 { "1" } else { "3" };
        let o = run(&[
            "simulate", "--synth", "noise_ar1", "--width", "32", "--height", "32", "--frames", "13", "--modes",
            "fixed_qp,proposed_rc", "--qp", "28,34", "--derive-targets", "--jobs", jobs, "--out-dir", p(d),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let names = |d: &Path| {
        let mut v: Vec<String> = fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        v.sort();
        v
    };
    assert_eq!(names(&dirs[0]), names(&dirs[1]));
    for name in names(&dirs[0]) {
        assert_eq!(fs::read(dirs[0].join(&name)).unwrap(), fs::read(dirs[1].join(&name)).unwrap(), "{name}");
    }
}

#[test]
fn raw_input_with_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = tmp.path().join("seq.yuv");
    let frames: Vec<u8> = (0..5 * 16 * 32).map(|i| ((i * 7) % 251) as u8).collect();
    fs::write(&raw, &frames).unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"width": 16, "height": 32, "frame_count": 5, "fps": 25, "gop_structure": "LD4"}"#).unwrap();
    let out = tmp.path().join("o");
    let o = run(&[
        "simulate", "--input", p(&raw), "--config", p(&cfg), "--modes", "fixed_qp", "--qp", "30", "--out-dir", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json_file(&out.join("manifest.json"));
    assert_eq!(m["config"]["run"]["sequence"]["fps"], 25.0);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);

    // A flag beats the config file; the wrong width no longer matches the file.
    let out2 = tmp.path().join("o2");
    let o = run(&[
        "simulate", "--input", p(&raw), "--config", p(&cfg), "--width", "32", "--modes", "fixed_qp", "--qp", "30",
        "--out-dir", p(&out2),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("size mismatch"), "{}", stderr(&o));
    assert!(!out2.exists());
}

#[test]
fn failed_run_removes_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "mine").unwrap();
    // A directory where the summary should go makes the final write fail
    // after the per-run CSVs are already on disk.
    fs::create_dir(out.join("summary.json")).unwrap();
    let o = run(&[
        "simulate", "--synth", "moving_blob", "--width", "32", "--height", "32", "--frames", "9", "--modes", "fixed_qp",
        "--qp", "30", "--out-dir", p(&out),
    ]);
    assert_eq!(code(&o), 2);
    let mut left: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    left.sort();
    assert_eq!(left, vec!["keep.txt", "summary.json"]);
}

#[test]
fn probe_single_row_flags_missing_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let o = run(&[
        "probe-dependency", "--synth", "textured_pan", "--width", "64", "--height", "64", "--frames", "6", "--probe-qp",
        "40", "--ref-qp-min", "40", "--ref-qp-max", "40", "--out-dir", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("probe.csv")).unwrap().lines().count(), 2);
    let fit = json_file(&out.join("probe.json"));
    assert_eq!(fit["pi_available"], false);
    assert!(fit["pi"].is_null());
}

#[test]
fn probe_textured_pan_reports_non_negative_slope() {
    let o = run(&["probe-dependency", "--synth", "textured_pan", "--frames", "20", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&String::from_utf8_lossy(&o.stdout));
    assert_eq!(rows.len(), 14);
    let err = stderr(&o);
    let pi: f64 = err.trim().strip_prefix("pi = ").unwrap().parse().unwrap();
    assert!(pi >= 0.0);
}
