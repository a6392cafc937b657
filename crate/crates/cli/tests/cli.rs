//! Runs the `sasgrade` binary against the bundled 30-response fixture.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic")
}

fn sasgrade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sasgrade"))
        .args(args)
        .env_remove("SASGRADE_CONFIG")
        .output()
        .expect("binary runs")
}

fn config() -> String {
    fixture().join("config.toml").display().to_string()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn evaluate(dir: &Path) {
    ok(sasgrade(&["evaluate", "--config", &config(), "--out", dir.to_str().unwrap()]));
}

/// Matrix-free form of quadratic weighted kappa: mean squared disagreement
/// over the mean squared difference of all cross pairs.
fn kappa_oracle(pairs: &[(i64, i64)]) -> f64 {
    let n = pairs.len() as f64;
    let observed: f64 = pairs.iter().map(|(h, m)| ((h - m) * (h - m)) as f64).sum::<f64>() / n;
    let mut expected = 0.0;
    for (h, _) in pairs {
        for (_, m) in pairs {
            expected += ((h - m) * (h - m)) as f64;
        }
    }
    1.0 - observed / (expected / (n * n))
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn evaluate_matches_the_golden_qwk() {
    let dir = tempfile::tempdir().unwrap();
    evaluate(dir.path());
    let golden: f64 = fs::read_to_string(fixture().join("golden_qwk.txt")).unwrap().trim().parse().unwrap();
    let report = json(&dir.path().join("report.json"));
    let mean = report["mean_test_qwk"].as_f64().unwrap();
    assert!((mean - golden).abs() < 1e-12, "mean QWK {mean}, golden {golden}");

    let tsv = fs::read_to_string(dir.path().join("predictions.tsv")).unwrap();
    let pairs: Vec<(i64, i64)> = tsv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    assert_eq!(pairs.len(), 6);
    assert!((kappa_oracle(&pairs) - golden).abs() < 1e-12);
    assert!(dir.path().join("report.txt").exists());
    assert!(dir.path().join("timings.json").exists());
    assert!(dir.path().join("models/1.json").exists());
}

#[test]
fn evaluate_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    evaluate(a.path());
    evaluate(b.path());
    for f in ["report.json", "report.txt", "predictions.tsv", "models/1.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn seed_override_changes_the_model() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(sasgrade(&["train", "--config", &config(), "--out", a.path().to_str().unwrap()]));
    ok(sasgrade(&["train", "--config", &config(), "--seed", "8", "--out", b.path().to_str().unwrap()]));
    let (ma, mb) = (json(&a.path().join("models/1.json")), json(&b.path().join("models/1.json")));
    assert_eq!(ma["metadata"]["seed"], "7");
    assert_eq!(mb["metadata"]["seed"], "8");
    assert_ne!(ma["forest"], mb["forest"]);
}

#[test]
fn train_then_score_is_deterministic_and_leaves_input_alone() {
    let dir = tempfile::tempdir().unwrap();
    ok(sasgrade(&["train", "--config", &config(), "--out", dir.path().to_str().unwrap()]));
    assert!(dir.path().join("train_report.json").exists());
    let model = dir.path().join("models/1.json");
    let input = fixture().join("train.tsv");
    let before = fs::read(&input).unwrap();
    let args = ["score", "--config", &config(), "--model", model.to_str().unwrap(), "--input", input.to_str().unwrap()];
    let first = ok(sasgrade(&args)).stdout;
    let second = ok(sasgrade(&args)).stdout;
    assert_eq!(first, second);
    assert_eq!(fs::read(&input).unwrap(), before);

    let text = String::from_utf8(first).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 30);
    for r in rows {
        let grade: i64 = r.split('\t').nth(2).unwrap().parse().unwrap();
        assert!((0..=3).contains(&grade), "{r}");
    }
}

#[test]
fn feedback_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    ok(sasgrade(&["train", "--config", &config(), "--out", dir.path().to_str().unwrap()]));
    let model = dir.path().join("models/1.json").display().to_string();
    let input = fixture().join("train.tsv").display().to_string();
    let base = ["feedback", "--config", &config(), "--model", &model, "--input", &input, "--id", "2"];

    let out = ok(sasgrade(&[&base[..], &["--format", "json"]].concat()));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["response_id"], "2");
    let sum = report["bias"].as_f64().unwrap()
        + report["groups"].as_array().unwrap().iter().map(|g| g["contribution"].as_f64().unwrap()).sum::<f64>();
    assert!((sum - report["raw_prediction"].as_f64().unwrap()).abs() < 1e-9);

    let text = String::from_utf8(ok(sasgrade(&[&base[..], &["--top", "2"]].concat())).stdout).unwrap();
    assert!(text.starts_with("Response 2 (prompt 1)"), "{text}");
    let listed = text.lines().skip_while(|l| !l.starts_with("Contributions")).skip(1).take_while(|l| l.starts_with("  "));
    assert!(listed.count() <= 2, "{text}");

    let missing = sasgrade(&["feedback", "--config", &config(), "--model", &model, "--input", &input, "--id", "nope"]);
    assert_eq!(missing.status.code(), Some(6));
}

#[test]
fn config_path_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sasgrade"))
        .args(["train", "--out", dir.path().to_str().unwrap()])
        .env("SASGRADE_CONFIG", config())
        .output()
        .unwrap();
    ok(out);
    assert!(dir.path().join("models/1.json").exists());
}

#[test]
fn disabling_every_group_fails_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = config();
    let mut args = vec!["evaluate", "--config", &cfg, "--out", out_dir.to_str().unwrap()];
    args.extend([
        "--disable-embeddings",
        "--disable-pos-ngrams",
        "--disable-weighted-keywords",
        "--disable-prompt-overlap",
        "--disable-lexical-overlap",
        "--disable-logical-operators",
        "--disable-temporal",
        "--disable-length-stats",
        "--disable-word-freq-difficulty",
    ]);
    let out = sasgrade(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disabled"));
    assert!(!out_dir.exists());
}

#[test]
fn ablate_writes_a_ranked_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(sasgrade(&[
        "ablate",
        "--config",
        &config(),
        "--out",
        dir.path().to_str().unwrap(),
        "--group",
        "prompt-overlap",
        "--group",
        "temporal",
    ]));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Prompt overlap"));
    let report = json(&dir.path().join("ablation.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["qwk_fall"].as_f64().unwrap() >= rows[1]["qwk_fall"].as_f64().unwrap());
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("out");
    let out_s = out.to_str().unwrap();

    // Missing config file: I/O.
    let missing = d.join("absent.toml");
    assert_eq!(sasgrade(&["train", "--config", missing.to_str().unwrap(), "--out", out_s]).status.code(), Some(3));

    // Referenced dataset missing: I/O.
    let cfg = write(d, "missing.toml", "[data]\ndataset = \"nope.tsv\"\nprompts = \"nope.toml\"\n[train.features]\ngroups = [\"temporal\"]\n");
    assert_eq!(sasgrade(&["train", "--config", cfg.to_str().unwrap(), "--out", out_s]).status.code(), Some(3));

    // Unknown key: configuration.
    let cfg = write(d, "bad.toml", "colour = \"blue\"\n");
    assert_eq!(sasgrade(&["train", "--config", cfg.to_str().unwrap(), "--out", out_s]).status.code(), Some(2));

    // Malformed dataset row: data format.
    write(d, "p.toml", "[[prompt]]\nid = \"1\"\nquestion = \"Why?\"\ngrade_min = 0\ngrade_max = 3\n");
    write(d, "bad.tsv", "Id\tEssaySet\tScore1\tScore2\tEssayText\n1\t1\t9\t9\ttoo high\n");
    let cfg = write(d, "rows.toml", "[data]\ndataset = \"bad.tsv\"\nprompts = \"p.toml\"\n[train.features]\ngroups = [\"temporal\"]\n");
    assert_eq!(sasgrade(&["train", "--config", cfg.to_str().unwrap(), "--out", out_s]).status.code(), Some(6));

    // Every response has the same grade and the model can only predict it:
    // kappa is undefined.
    let mut rows = String::from("Id\tEssaySet\tScore1\tScore2\tEssayText\n");
    for i in 1..=20 {
        rows.push_str(&format!("{i}\t1\t2\t2\tThe answer number {i} is here.\n"));
    }
    write(d, "flat.tsv", &rows);
    let cfg = write(
        d,
        "flat.toml",
        "[data]\ndataset = \"flat.tsv\"\nprompts = \"p.toml\"\n[train]\ncross_prompt_negatives = 0\nshuffled_negatives = 0\n[train.forest]\nn_trees = 5\n[train.features]\ngroups = [\"length-stats\"]\n",
    );
    let o = sasgrade(&["evaluate", "--config", cfg.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));

    // Model from a future format version.
    let trained = d.join("trained");
    ok(sasgrade(&["train", "--config", &config(), "--out", trained.to_str().unwrap()]));
    let model_path = trained.join("models/1.json");
    let mut model = json(&model_path);
    model["version"] = 99.into();
    let future = write(d, "future.json", &model.to_string());
    let input = fixture().join("train.tsv");
    let o = sasgrade(&["score", "--config", &config(), "--model", future.to_str().unwrap(), "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    // Same model scored with different resources: schema mismatch.
    let stop = write(d, "stop.txt", "the\n");
    let other = write(
        d,
        "other.toml",
        &format!(
            "[resources]\nembeddings = {:?}\nfrequency_lexicon = {:?}\nstopwords = {:?}\n",
            fixture().join("vectors.txt"),
            fixture().join("frequencies.txt"),
            stop
        ),
    );
    let o = sasgrade(&["score", "--config", other.to_str().unwrap(), "--model", model_path.to_str().unwrap(), "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn single_precision_models() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let body = fs::read_to_string(fixture().join("config.toml")).unwrap();
    let mut text = String::from("scalar = \"f32\"\n");
    for line in body.lines() {
        match line.split_once(" = \"") {
            Some((k, v)) if ["dataset", "prompts", "embeddings", "frequency_lexicon"].contains(&k) => {
                text.push_str(&format!("{k} = {:?}\n", fixture().join(v.trim_end_matches('"'))));
            }
            _ => text.push_str(&format!("{line}\n")),
        }
    }
    let cfg = write(d, "f32.toml", &text);
    let out = d.join("out");
    ok(sasgrade(&["train", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    let model = out.join("models/1.json");
    assert_eq!(json(&model)["scalar"], "f32");
    let input = fixture().join("train.tsv");
    ok(sasgrade(&["score", "--config", cfg.to_str().unwrap(), "--model", model.to_str().unwrap(), "--input", input.to_str().unwrap()]));
    let o = sasgrade(&["score", "--config", &config(), "--model", model.to_str().unwrap(), "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(6));
}
