use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn echogeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_echogeo")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = echogeo(args);
    assert!(out.status.success(), "echogeo {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Corpora shared by the slower tests, generated once per run.
struct Corpora {
    root: PathBuf,
}

fn corpora() -> &'static Corpora {
    static C: OnceLock<Corpora> = OnceLock::new();
    C.get_or_init(|| {
        let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("echogeo-cli-corpora");
        let _ = std::fs::remove_dir_all(&root);
        for kind in ["classify", "eval", "gs"] {
            ok(&["gen-dataset", "--kind", kind, "--seed", "3", "--out", s(&root.join(kind))]);
        }
        Corpora { root }
    })
}

#[test]
fn simulate_is_deterministic_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.f32"), dir.path().join("b.f32"));
    for p in [&a, &b] {
        ok(&[
            "simulate",
            "--glints",
            "0,11.1,48.1mm",
            "--duration",
            "3ms",
            "--noise",
            "off",
            "--seed",
            "7",
            "--out",
            s(p),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let side = json(&dir.path().join("a.json"));
    assert_eq!(side["sample_rate"], 1e6);
    assert_eq!(side["target"]["glint_y_offsets"].as_array().unwrap().len(), 3);
    let cfg = json(&dir.path().join("a.config.json"));
    assert_eq!(cfg["command"]["subcommand"], "simulate");
}

#[test]
fn simulate_with_noise_depends_on_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let p = dir.path().join(name);
        ok(&["simulate", "--glints", "0mm", "--snr", "20", "--seed", seed, "--out", s(&p)]);
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("1", "a.f32"), run("1", "b.f32"));
    assert_ne!(run("1", "c.f32"), run("2", "d.f32"));
}

#[test]
fn invalid_parameters_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(&dir.path().join("x.f32")).to_string();
    for glints in ["0,80mm", "0,11.1", "5,10mm", "0,1,2,3,4mm"] {
        let r = echogeo(&["simulate", "--glints", glints, "--out", &out]);
        assert_eq!(r.status.code(), Some(2), "{glints}");
    }
    let r = echogeo(&["simulate", "--glints", "0mm", "--duration", "0ms", "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    let r = Command::new(env!("CARGO_BIN_EXE_echogeo"))
        .env("ECHOGEO_THREADS", "zero")
        .args(["simulate", "--glints", "0mm", "--out", &out])
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn missing_files_exit_with_3() {
    let r = echogeo(&["cochleagram", "--in", "/nonexistent/x.f32", "--out", "/tmp/never.f32"]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn cochleagram_of_a_simulated_record() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec.f32");
    ok(&["simulate", "--glints", "0,35mm", "--noise", "off", "--out", s(&rec)]);
    let cg = dir.path().join("cg.f32");
    let csv = dir.path().join("crossings.csv");
    ok(&["cochleagram", "--in", s(&rec), "--out", s(&cg), "--crossings-csv", s(&csv)]);
    assert_eq!(std::fs::metadata(&cg).unwrap().len(), 161 * 250 * 4);
    let side = json(&dir.path().join("cg.json"));
    assert_eq!(side["T"], 250);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 162);

    let cropped = dir.path().join("crop.f32");
    ok(&["cochleagram", "--in", s(&rec), "--out", s(&cropped), "--crop", "50:100"]);
    assert_eq!(std::fs::metadata(&cropped).unwrap().len(), 161 * 100 * 4);
    assert_eq!(echogeo(&["cochleagram", "--in", s(&rec), "--out", s(&cropped), "--crop", "50"]).status.code(), Some(2));
}

#[test]
fn replay_reproduces_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec.f32");
    ok(&["simulate", "--glints", "0,20mm", "--duration", "2ms", "--seed", "11", "--out", s(&rec)]);
    let first = std::fs::read(&rec).unwrap();
    std::fs::remove_file(&rec).unwrap();
    ok(&["replay", s(&dir.path().join("rec.config.json"))]);
    assert_eq!(std::fs::read(&rec).unwrap(), first);
}

#[test]
fn train_classify_and_eval() {
    let c = corpora();
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("cnn.ckpt");
    let classify = s(&c.root.join("classify")).to_string();
    let eval = s(&c.root.join("eval")).to_string();
    let quick = ["--epochs", "1", "--filters", "2,2,2,2", "--seed", "5"];
    let mut args = vec!["train", "--arch", "cnn", "--data", &classify, "--eval", &eval, "--out", s(&model)];
    args.extend(quick);
    ok(&args);
    let metrics = json(&dir.path().join("cnn.metrics.json"));
    assert!(metrics["validation"]["accuracy"].is_number());
    assert_eq!(std::fs::read_to_string(dir.path().join("cnn.history.csv")).unwrap().lines().count(), 2);

    // The same configuration retrains to identical bytes.
    let first = std::fs::read(&model).unwrap();
    ok(&["replay", s(&dir.path().join("cnn.config.json"))]);
    assert_eq!(std::fs::read(&model).unwrap(), first);

    let out = dir.path().join("eval");
    ok(&["eval", "--model", s(&model), "--data", &eval, "--out", s(&out)]);
    let m = json(&out.join("metrics.json"));
    let rows: Vec<u64> = m["confusion_total"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum())
        .collect();
    assert_eq!(rows, vec![16, 16, 16, 16]);
    assert!(m["reference_accuracy"]["eval"].is_number());
    assert_eq!(std::fs::read_to_string(out.join("confusion.csv")).unwrap().lines().count(), 5);

    let sample = c.root.join("eval/samples/0000.f32");
    let res = dir.path().join("class.json");
    ok(&["classify", "--model", s(&model), "--in", s(&sample), "--out", s(&res)]);
    let n = json(&res)["glint_count"].as_u64().unwrap();
    assert!((1..=4).contains(&n));

    // A spacing network cannot classify, and a cnn cannot reconstruct.
    let r = echogeo(&["reconstruct", "--in", s(&sample), "--model", s(&model), "--out", s(&res)]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn eval_repeat_summarizes_seeds() {
    let c = corpora();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    ok(&[
        "eval",
        "--arch",
        "rnn",
        "--train",
        s(&c.root.join("classify")),
        "--data",
        s(&c.root.join("eval")),
        "--repeat",
        "2",
        "--epochs",
        "1",
        "--timesteps",
        "25",
        "--out",
        s(&out),
    ]);
    let m = json(&out.join("metrics.json"));
    assert_eq!(m["runs"].as_array().unwrap().len(), 2);
    for key in ["mean", "median", "min", "max"] {
        assert!(m["eval_accuracy"][key].is_number(), "{key}");
    }
    let curves = std::fs::read_to_string(out.join("loss_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 3);
    // 250 bins cannot be cut into 7 steps.
    let r = echogeo(&[
        "eval",
        "--arch",
        "rnn",
        "--train",
        s(&c.root.join("classify")),
        "--data",
        s(&c.root.join("eval")),
        "--timesteps",
        "7",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn train_gs_and_reconstruct() {
    let c = corpora();
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("gs.ckpt");
    ok(&["train", "--arch", "gs", "--data", s(&c.root.join("gs")), "--epochs", "1", "--out", s(&model)]);
    let rec = dir.path().join("rec.f32");
    ok(&["simulate", "--glints", "0,11.1,48.1mm", "--seed", "4", "--out", s(&rec)]);
    let report = dir.path().join("report.json");
    let trace = dir.path().join("trace.csv");
    ok(&["reconstruct", "--in", s(&rec), "--model", s(&model), "--out", s(&report), "--trace-csv", s(&trace)]);
    let r = json(&report);
    assert_eq!(r["trace"].as_array().unwrap().len(), 20);
    let segments = r["segments"].as_array().unwrap();
    assert_eq!(segments.len(), r["change_points"].as_array().unwrap().len() + 1);
    for seg in segments {
        let ripple = &seg["ripple_interval_hz"];
        assert!(ripple.is_number() || ripple == "Infinity");
    }
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 21);

    // A gs checkpoint is rejected by classify; a wrong-width input by reconstruct.
    let r = echogeo(&["classify", "--model", s(&model), "--in", s(&rec)]);
    assert_eq!(r.status.code(), Some(2));
    let odd = dir.path().join("odd.f32");
    ok(&["cochleagram", "--in", s(&rec), "--out", s(&odd), "--crop", "0:60"]);
    let r = echogeo(&["reconstruct", "--in", s(&odd), "--model", s(&model), "--out", s(&report)]);
    assert_eq!(r.status.code(), Some(3));
}
