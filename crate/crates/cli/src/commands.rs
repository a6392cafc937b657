use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use sasgrade::corpus::{load_submissions, PromptTable, Response, Submission};
use sasgrade::eval::{render_ablation_text, render_experiment_text, run_ablation, run_experiment};
use sasgrade::features::{FeatureGroup, FeatureResources};
use sasgrade::feedback::{render, ReportFormat};
use sasgrade::model::{load_model, save_model, train_prompt, PromptModel, Scorer};
use sasgrade::scalar::Real;
use serde::Serialize;

use crate::config::RunConfig;

fn create_dir(dir: &Path) -> sasgrade::Result<()> {
    fs::create_dir_all(dir).map_err(|e| sasgrade::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> sasgrade::Result<()> {
    fs::write(path, contents).map_err(|e| sasgrade::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(write_file(path, s)?)
}

fn stamp<T: Real>(model: &mut PromptModel<T>, cfg: &RunConfig) {
    let m = &mut model.metadata;
    m.insert("tool".into(), format!("sasgrade {}", env!("CARGO_PKG_VERSION")));
    m.insert("seed".into(), cfg.train.seed.to_string());
    if let Some(d) = &cfg.data {
        if let Some(name) = d.dataset.file_name() {
            m.insert("dataset".into(), name.to_string_lossy().into_owned());
        }
    }
}

fn save_models<T: Real>(models: &mut [PromptModel<T>], cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let dir = out.join("models");
    create_dir(&dir)?;
    for m in models {
        stamp(m, cfg);
        save_model(m, &dir.join(format!("{}.json", m.prompt.prompt_id)))?;
    }
    Ok(())
}

fn selected<'a>(prompts: &'a PromptTable, responses: &[Response], only: &[String]) -> anyhow::Result<Vec<&'a str>> {
    for id in only {
        if prompts.get(id).is_none() {
            bail!(sasgrade::Error::Config(format!("unknown prompt {id}")));
        }
    }
    Ok(prompts
        .ids()
        .filter(|id| only.is_empty() || only.iter().any(|o| o == id))
        .filter(|id| responses.iter().any(|r| r.prompt_id == *id))
        .collect())
}

#[derive(Serialize)]
struct TrainSummary {
    prompt_id: String,
    n_train: usize,
    n_validation: usize,
    n_test_held_out: usize,
    n_cross_prompt_negatives: usize,
    n_shuffled_negatives: usize,
    incidence_threshold: u32,
    threshold_search: Vec<(u32, Option<f64>)>,
    validation_qwk: Option<f64>,
}

pub fn train<T: Real>(cfg: &RunConfig, only: &[String]) -> anyhow::Result<()> {
    let out = cfg.output_dir()?;
    let resources = cfg.load_resources::<T>()?;
    let (prompts, responses) = cfg.load_dataset()?;
    let ids = selected(&prompts, &responses, only)?;
    if ids.is_empty() {
        bail!(sasgrade::Error::InvalidInput("no selected prompt has responses".into()));
    }
    let mut by_prompt: BTreeMap<&str, Vec<Response>> = BTreeMap::new();
    for r in &responses {
        by_prompt.entry(r.prompt_id.as_str()).or_default().push(r.clone());
    }
    let mut models = Vec::new();
    let mut summaries = Vec::new();
    for id in ids {
        let others: Vec<&[Response]> =
            by_prompt.iter().filter(|(k, _)| **k != id).map(|(_, v)| v.as_slice()).collect();
        let prompt = prompts.get(id).expect("selected from the table");
        let o = train_prompt(prompt, &by_prompt[id], &others, &resources, &cfg.train)?;
        summaries.push(TrainSummary {
            prompt_id: id.to_string(),
            n_train: o.split.train.len(),
            n_validation: o.split.validation.len(),
            n_test_held_out: o.split.test.len(),
            n_cross_prompt_negatives: o.n_cross_prompt,
            n_shuffled_negatives: o.n_shuffled,
            incidence_threshold: o.model.features.ngrams.incidence_threshold,
            threshold_search: o.threshold_search,
            validation_qwk: o.validation_qwk,
        });
        models.push(o.model);
    }
    create_dir(out)?;
    save_models(&mut models, cfg, out)?;
    write_json(&out.join("train_report.json"), &summaries)?;
    for s in &summaries {
        let v = s.validation_qwk.map_or("n/a".to_string(), |k| format!("{k:.3}"));
        println!("prompt {}: validation QWK {v}, model written", s.prompt_id);
    }
    Ok(())
}

pub fn evaluate<T: Real>(cfg: &RunConfig, only: &[String]) -> anyhow::Result<()> {
    let out = cfg.output_dir()?;
    let resources = cfg.load_resources::<T>()?;
    let (prompts, responses) = cfg.load_dataset()?;
    let only = (!only.is_empty()).then_some(only);
    let mut e = run_experiment(&responses, &prompts, only, &resources, &cfg.train)?;
    create_dir(out)?;
    save_models(&mut e.models, cfg, out)?;
    write_json(&out.join("report.json"), &e.report)?;
    let text = render_experiment_text(&e.report);
    write_file(&out.join("report.txt"), &text)?;
    write_json(&out.join("timings.json"), &e.timings)?;
    let mut tsv = String::from("prompt_id\tid\thuman\tpredicted\traw\n");
    for (prompt, items) in &e.test_items {
        for t in items {
            writeln!(tsv, "{prompt}\t{}\t{}\t{}\t{}", t.id, t.human, t.predicted, t.raw)?;
        }
    }
    write_file(&out.join("predictions.tsv"), tsv)?;
    print!("{text}");
    Ok(())
}

pub fn ablate<T: Real>(cfg: &RunConfig, only: &[String], groups: &[FeatureGroup]) -> anyhow::Result<()> {
    let out = cfg.output_dir()?;
    let resources = cfg.load_resources::<T>()?;
    let (prompts, responses) = cfg.load_dataset()?;
    let groups = if groups.is_empty() { cfg.enabled_groups() } else { groups.to_vec() };
    let only = (!only.is_empty()).then_some(only);
    let report = run_ablation(&responses, &prompts, only, &resources, &cfg.train, &groups)?;
    create_dir(out)?;
    write_json(&out.join("ablation.json"), &report)?;
    let text = render_ablation_text(&report);
    write_file(&out.join("ablation.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn load_models<T: Real>(paths: &[PathBuf]) -> anyhow::Result<BTreeMap<String, PromptModel<T>>> {
    let mut out = BTreeMap::new();
    for p in paths {
        let m = load_model::<T>(p).with_context(|| format!("loading {}", p.display()))?;
        if out.insert(m.prompt.prompt_id.clone(), m).is_some() {
            bail!(sasgrade::Error::Config(format!("two models given for prompt of {}", p.display())));
        }
    }
    Ok(out)
}

fn scorers<'a, T: Real>(
    models: &'a BTreeMap<String, PromptModel<T>>,
    resources: &'a FeatureResources<T>,
) -> anyhow::Result<BTreeMap<&'a str, Scorer<'a, T>>> {
    models
        .iter()
        .map(|(id, m)| Ok((id.as_str(), Scorer::new(m, resources)?)))
        .collect()
}

fn scorer_for<'s, 'a, T: Real>(
    scorers: &'s BTreeMap<&'a str, Scorer<'a, T>>,
    s: &Submission,
) -> anyhow::Result<&'s Scorer<'a, T>> {
    scorers.get(s.prompt_id.as_str()).ok_or_else(|| {
        anyhow::Error::new(sasgrade::Error::InvalidInput(format!(
            "response {} is for prompt {}, which has no model",
            s.id, s.prompt_id
        )))
    })
}

pub fn score<T: Real>(cfg: &RunConfig, models: &[PathBuf], input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let models = load_models::<T>(models)?;
    let resources = cfg.load_resources::<T>()?;
    let scorers = scorers(&models, &resources)?;
    let mut tsv = String::from("id\tprompt_id\tgrade\traw\n");
    for s in load_submissions(input)? {
        let scored = scorer_for(&scorers, &s)?.score_text(&s.id, &s.text)?;
        writeln!(tsv, "{}\t{}\t{}\t{}", s.id, s.prompt_id, scored.grade, scored.raw)?;
    }
    match out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join("scores.tsv"), tsv)?;
        }
        None => print!("{tsv}"),
    }
    Ok(())
}

pub fn feedback<T: Real>(
    cfg: &RunConfig,
    models: &[PathBuf],
    input: &Path,
    id: Option<&str>,
    json: bool,
    top: usize,
) -> anyhow::Result<()> {
    let models = load_models::<T>(models)?;
    let resources = cfg.load_resources::<T>()?;
    let scorers = scorers(&models, &resources)?;
    let subs: Vec<Submission> = load_submissions(input)?
        .into_iter()
        .filter(|s| id.is_none_or(|i| s.id == i))
        .collect();
    if let (Some(i), true) = (id, subs.is_empty()) {
        bail!(sasgrade::Error::InvalidInput(format!("no response with id {i} in {}", input.display())));
    }
    let format = if json { ReportFormat::Structured } else { ReportFormat::PlainText };
    let mut doc = String::new();
    for s in &subs {
        let report = scorer_for(&scorers, s)?.feedback(&s.id, &s.text)?;
        doc.push_str(&render(&report, format, top));
        if !json {
            doc.push('\n');
        }
    }
    print!("{doc}");
    Ok(())
}
