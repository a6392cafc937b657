use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::qwk::quadratic_weighted_kappa;
use crate::corpus::{Grade, PromptTable, Response};
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureResources};
use crate::model::{train_prompt, PromptModel, TestItem, TrainConfig, TrainOutcome};
use crate::scalar::Real;

pub const REPORT_VERSION: u32 = 1;

/// Published per-prompt test QWK for the ten ASAP-SAS prompts, shown next
/// to our results for comparison.
pub const REFERENCE_QWK: [(&str, f64); 10] = [
    ("1", 0.872),
    ("2", 0.824),
    ("3", 0.745),
    ("4", 0.743),
    ("5", 0.845),
    ("6", 0.858),
    ("7", 0.725),
    ("8", 0.624),
    ("9", 0.843),
    ("10", 0.832),
];
pub const REFERENCE_MEAN_QWK: f64 = 0.791;

/// Published percentage fall in QWK when each group is removed.
pub const REFERENCE_FALL_PERCENT: [(FeatureGroup, f64); 9] = [
    (FeatureGroup::Embeddings, 23.54),
    (FeatureGroup::PromptOverlap, 20.85),
    (FeatureGroup::WeightedKeywords, 16.93),
    (FeatureGroup::PosNgrams, 12.36),
    (FeatureGroup::LexicalOverlap, 8.45),
    (FeatureGroup::LogicalOperators, 6.40),
    (FeatureGroup::Temporal, 4.2),
    (FeatureGroup::LengthStats, 2.11),
    (FeatureGroup::WordFreqDifficulty, 1.02),
];

fn reference_qwk(prompt: &str) -> Option<f64> {
    REFERENCE_QWK.iter().find(|(p, _)| *p == prompt).map(|(_, v)| *v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptResult {
    pub prompt_id: String,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    pub n_cross_prompt_negatives: usize,
    pub n_shuffled_negatives: usize,
    pub incidence_threshold: u32,
    pub validation_qwk: Option<f64>,
    /// Against the configured resolved score.
    pub test_qwk: f64,
    /// Against the second rater, when every test response has one.
    pub test_qwk_score_b: Option<f64>,
    pub reference_qwk: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub seed: u64,
    pub prompts: Vec<PromptResult>,
    pub mean_test_qwk: f64,
    pub reference_mean_qwk: f64,
}

/// Wall-clock seconds, kept apart from the report so that reports are
/// reproducible byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub per_prompt_seconds: BTreeMap<String, f64>,
    pub total_seconds: f64,
}

pub struct Experiment<T> {
    pub report: ExperimentReport,
    pub models: Vec<PromptModel<T>>,
    pub test_items: BTreeMap<String, Vec<TestItem>>,
    pub timings: Timings,
}

fn test_qwk(items: &[TestItem], lo: Grade, hi: Grade) -> Result<(f64, Option<f64>)> {
    let human: Vec<Grade> = items.iter().map(|t| t.human).collect();
    let model: Vec<Grade> = items.iter().map(|t| t.predicted).collect();
    let k = quadratic_weighted_kappa(&human, &model, lo, hi)?;
    let b: Option<Vec<Grade>> = items.iter().map(|t| t.score_b).collect();
    let kb = match b {
        Some(b) => quadratic_weighted_kappa(&b, &model, lo, hi).ok(),
        None => None,
    };
    Ok((k, kb))
}

fn result_row<T: Real>(o: &TrainOutcome<T>) -> Result<PromptResult> {
    let p = &o.model.prompt;
    let (k, kb) = test_qwk(&o.test, p.grade_min, p.grade_max).map_err(|e| e.in_prompt(&p.prompt_id))?;
    Ok(PromptResult {
        prompt_id: p.prompt_id.clone(),
        n_train: o.split.train.len(),
        n_validation: o.split.validation.len(),
        n_test: o.split.test.len(),
        n_cross_prompt_negatives: o.n_cross_prompt,
        n_shuffled_negatives: o.n_shuffled,
        incidence_threshold: o.model.features.ngrams.incidence_threshold,
        validation_qwk: o.validation_qwk,
        test_qwk: k,
        test_qwk_score_b: kb,
        reference_qwk: reference_qwk(&p.prompt_id),
    })
}

/// Trains and tests every selected prompt that has responses, prompts in
/// parallel. Results come back in prompt-table order.
pub fn run_experiment<T: Real>(
    responses: &[Response],
    prompts: &PromptTable,
    only: Option<&[String]>,
    resources: &FeatureResources<T>,
    cfg: &TrainConfig,
) -> Result<Experiment<T>> {
    let start = Instant::now();
    let mut by_prompt: BTreeMap<&str, Vec<Response>> = BTreeMap::new();
    for r in responses {
        if prompts.get(&r.prompt_id).is_none() {
            return Err(Error::InvalidInput(format!("response {} has unknown prompt {}", r.id, r.prompt_id)));
        }
        by_prompt.entry(r.prompt_id.as_str()).or_default().push(r.clone());
    }
    if let Some(ids) = only {
        for id in ids {
            if !by_prompt.contains_key(id.as_str()) {
                return Err(Error::InvalidInput(format!("no responses for prompt {id}")));
            }
        }
    }
    let selected: Vec<&str> = prompts
        .ids()
        .filter(|id| by_prompt.contains_key(id))
        .filter(|id| only.is_none_or(|o| o.iter().any(|x| x == id)))
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidInput("no prompt has any responses".into()));
    }
    let outcomes: Vec<(TrainOutcome<T>, f64)> = selected
        .par_iter()
        .map(|&id| {
            let t0 = Instant::now();
            let others: Vec<&[Response]> =
                by_prompt.iter().filter(|(k, _)| **k != id).map(|(_, v)| v.as_slice()).collect();
            let prompt = prompts.get(id).expect("selected from table");
            let o = train_prompt(prompt, &by_prompt[id], &others, resources, cfg)?;
            log::info!("prompt {id}: trained in {:.1}s", t0.elapsed().as_secs_f64());
            Ok((o, t0.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut timings = Timings::default();
    let mut test_items = BTreeMap::new();
    let mut models = Vec::new();
    for (o, secs) in outcomes {
        rows.push(result_row(&o)?);
        timings.per_prompt_seconds.insert(o.model.prompt.prompt_id.clone(), secs);
        test_items.insert(o.model.prompt.prompt_id.clone(), o.test);
        models.push(o.model);
    }
    let mean = rows.iter().map(|r| r.test_qwk).sum::<f64>() / rows.len() as f64;
    timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(Experiment {
        report: ExperimentReport {
            version: REPORT_VERSION,
            seed: cfg.seed,
            prompts: rows,
            mean_test_qwk: mean,
            reference_mean_qwk: REFERENCE_MEAN_QWK,
        },
        models,
        test_items,
        timings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub group: FeatureGroup,
    pub mean_test_qwk: f64,
    /// Full-model mean QWK minus the ablated one.
    pub qwk_fall: f64,
    /// `qwk_fall` as a percentage of the full-model QWK.
    pub fall_percent: f64,
    pub reference_fall_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub version: u32,
    pub seed: u64,
    pub baseline_mean_qwk: f64,
    /// Largest fall first; ties in canonical group order.
    pub rows: Vec<AblationRow>,
}

/// Reruns the whole experiment once per group in `groups`, each time with
/// that group disabled and everything else unchanged.
pub fn run_ablation<T: Real>(
    responses: &[Response],
    prompts: &PromptTable,
    only: Option<&[String]>,
    resources: &FeatureResources<T>,
    cfg: &TrainConfig,
    groups: &[FeatureGroup],
) -> Result<AblationReport> {
    for g in groups {
        if !cfg.features.groups.contains(g) {
            return Err(Error::Config(format!("cannot ablate {g}: it is not enabled")));
        }
        if cfg.features.groups.len() == 1 {
            return Err(Error::Config(format!("removing {g} would leave no feature groups")));
        }
    }
    let baseline = run_experiment(responses, prompts, only, resources, cfg)?.report.mean_test_qwk;
    let mut rows = Vec::new();
    for &g in groups {
        let mut c = cfg.clone();
        c.features.groups.remove(&g);
        let q = run_experiment(responses, prompts, only, resources, &c)?.report.mean_test_qwk;
        let fall = baseline - q;
        rows.push(AblationRow {
            group: g,
            mean_test_qwk: q,
            qwk_fall: fall,
            fall_percent: if baseline == 0.0 { 0.0 } else { 100.0 * fall / baseline },
            reference_fall_percent: REFERENCE_FALL_PERCENT.iter().find(|(h, _)| *h == g).map(|(_, v)| *v),
        });
    }
    rows.sort_by(|a, b| b.qwk_fall.total_cmp(&a.qwk_fall).then(a.group.cmp(&b.group)));
    Ok(AblationReport {
        version: REPORT_VERSION,
        seed: cfg.seed,
        baseline_mean_qwk: baseline,
        rows,
    })
}
