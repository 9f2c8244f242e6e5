use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use keybind::commitment::Commitment;
use keybind::decoder::{DecoderParams, Variant};
use keybind::simulation::synth_embeddings;

fn keybind(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keybind")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_code_reports_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = keybind(&["build-code", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "n=520 k=100 edges=1970");
    assert!(dir.path().join("code.alist").exists());

    let small = keybind(&["build-code", "--z", "1"]);
    assert!(stdout(&small).starts_with("n=52 "));

    let missing = keybind(&["build-code", "--base-graph", "/no/such/bg.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/bg.csv"));
}

#[test]
fn fer_noiseless_single_frame_and_dedup() {
    let out = keybind(&["fer", "--p-grid", "0", "--frames", "1", "--iters", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1], "ms,0,1,0,0.000000,10,1");

    let dup = keybind(&["fer", "--p-grid", "0.1,0.1", "--frames", "2", "--iters", "5"]);
    assert_eq!(stdout(&dup).lines().count(), 2);
    assert!(String::from_utf8_lossy(&dup.stderr).contains("duplicate"));
}

#[test]
fn zero_epoch_training_is_min_sum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.params");
    let out = keybind(&["train", "--iters", "4", "--epochs", "0", "--out", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let p = DecoderParams::load(&path).unwrap();
    assert_eq!(p.variant(), Variant::NeuralMinSum);
    assert!(p.alpha().iter().all(|&a| a == 1.0) && p.beta().iter().all(|&b| b == 0.0));
}

#[test]
fn config_precedence_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"frames": 12, "seed": 8}"#).unwrap();
    let out = keybind(&["fer", "--config", s(&cfg), "--seed", "3", "--dump-config"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["frames"], 12);
    assert_eq!(v["seed"], 3);

    std::fs::write(&cfg, r#"{"frams": 12}"#).unwrap();
    assert_eq!(keybind(&["fer", "--config", s(&cfg)]).status.code(), Some(2));
}

fn write_embeddings(path: &Path) {
    let mut text = String::new();
    for (subject, v) in synth_embeddings(40, 2, 0.3, 21) {
        text.push_str(&subject);
        for x in v.values() {
            let _ = write!(text, ",{x:.6}");
        }
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn calibrate_enroll_verify() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("emb.csv");
    write_embeddings(&emb);
    let pipe = dir.path().join("pipe");
    let cal = keybind(&["calibrate", "--embeddings", s(&emb), "--out", s(&pipe)]);
    assert_eq!(cal.status.code(), Some(0), "{}", String::from_utf8_lossy(&cal.stderr));
    assert!(stdout(&cal).starts_with("kappa="));

    let unreachable = keybind(&["calibrate", "--embeddings", s(&emb), "--tau", "0.9", "--out", s(&pipe)]);
    assert_eq!(unreachable.status.code(), Some(2));

    let rec = dir.path().join("c.json");
    let common = ["--embeddings", s(&emb), "--pipeline", s(&pipe)];
    let enroll = keybind(&[&["enroll", "--row", "0", "--test-key-seed", "5", "--out", s(&rec)][..], &common].concat());
    assert_eq!(enroll.status.code(), Some(0));

    let verify = |row: &str, record: &Path| {
        keybind(&[&["verify", "--row", row, "--commitment", s(record)][..], &common].concat())
            .status
            .code()
    };
    assert_eq!(verify("0", &rec), Some(0));
    assert_eq!(verify("1", &rec), Some(0));
    assert_eq!(verify("2", &rec), Some(1));

    // flipping the delta moves the decoded key away from the stored hash
    let mut c = Commitment::load(&rec).unwrap();
    for i in 0..c.delta.len() / 4 {
        c.delta.flip(4 * i);
    }
    let tampered = dir.path().join("t.json");
    c.save(&tampered).unwrap();
    assert_eq!(verify("0", &tampered), Some(1));

    let wrong_m = keybind(&[&["verify", "--row", "0", "--m", "2", "--commitment", s(&rec)][..], &common].concat());
    assert_eq!(wrong_m.status.code(), Some(2));
}

#[test]
fn population_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pop = dir.path().join("pop.csv");
    let synth = keybind(&["synth", "--subjects", "30", "--samples", "3", "--m", "1", "--out", s(&pop)]);
    assert_eq!(synth.status.code(), Some(0));
    assert!(std::fs::read_to_string(&pop).unwrap().starts_with("subject,sample,bits,template_hex\n"));

    let eval = keybind(&["eval", "--population", s(&pop), "--trials", "30", "--iters", "20", "--out", s(dir.path())]);
    assert_eq!(eval.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&eval)).unwrap();
    assert!(v["gmr"].as_f64().unwrap() > 0.8);
    assert_eq!(v["fmr"].as_f64().unwrap(), 0.0);
    let curve = std::fs::read_to_string(dir.path().join("gmr_fmr.csv")).unwrap();
    assert_eq!(curve.lines().count(), 21);

    let sec = keybind(&["security", "--h", "500", "--t", "0", "--m", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&sec)).unwrap();
    assert_eq!(v["s_sphere"], 500.0);
    assert_eq!(v["h_sys"], 300.0);
}
