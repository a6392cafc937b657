//! Per-prompt training and the persisted model file.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{augment_cross_prompt, augment_shuffled, stratified_split, Grade, PromptSpec, Response, SplitSet, DEFAULT_RATIOS};
use crate::error::{Error, Result};
use crate::eval::quadratic_weighted_kappa;
use crate::feedback::{build_report, fit_flag_rules, FeedbackReport, FlagRule, DEFAULT_FLAG_PERCENTILE};
use crate::features::{fit_features, FeatureConfig, FeatureExtractor, FeatureGroup, FeatureResources, FeatureVector, FittedFeatures};
use crate::forest::{decompose, to_grade, train_forest, Contribution, Forest, Hyperparams};
use crate::scalar::Real;
use crate::textproc::TaggedDoc;

pub const MODEL_FORMAT: &str = "sasgrade-model";
pub const MODEL_VERSION: u32 = 1;

/// Everything needed to score new responses to one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PromptModel<T> {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    pub prompt: PromptSpec,
    pub features: FittedFeatures,
    pub forest: Forest<T>,
    pub flag_rules: Vec<FlagRule>,
    /// Free-form provenance, such as the resource files used.
    pub metadata: BTreeMap<String, String>,
}

impl<T: Real> PromptModel<T> {
    fn validate(&self) -> Result<()> {
        let schema = &self.features.schema;
        schema.validate()?;
        if self.forest.n_features != schema.len() {
            return Err(Error::ModelFormat(format!(
                "forest expects {} features, schema has {}",
                self.forest.n_features,
                schema.len()
            )));
        }
        if self.forest.schema_fingerprint.as_deref() != Some(schema.fingerprint().as_str()) {
            return Err(Error::SchemaMismatch("forest was trained against a different feature schema".into()));
        }
        if self.forest.trees.is_empty() {
            return Err(Error::ModelFormat("model has no trees".into()));
        }
        for (t, tree) in self.forest.trees.iter().enumerate() {
            let n = tree.len();
            let consistent = n > 0
                && [tree.feature.len(), tree.threshold.len(), tree.left.len(), tree.right.len()] == [n; 4]
                && (0..n).all(|i| {
                    tree.is_leaf(i)
                        || (tree.feature[i] >= 0
                            && (tree.feature[i] as usize) < schema.len()
                            && (tree.left[i] as usize) > i
                            && (tree.left[i] as usize) < n
                            && (tree.right[i] as usize) > i
                            && (tree.right[i] as usize) < n)
                });
            if !consistent || tree.value.iter().chain(&tree.threshold).any(|v| !v.is_finite()) {
                return Err(Error::ModelFormat(format!("tree {t} is malformed")));
            }
        }
        Ok(())
    }
}

pub fn save_model<T: Real>(model: &PromptModel<T>, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string(model).map_err(|e| Error::ModelFormat(e.to_string()))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn model_from_str<T: Real>(s: &str) -> Result<PromptModel<T>> {
    let value: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if value.get("format").and_then(|v| v.as_str()) != Some(MODEL_FORMAT) {
        return Err(Error::ModelFormat("not a sasgrade model file".into()));
    }
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::ModelFormat("model file has no version".into()))?;
    if version != u64::from(MODEL_VERSION) {
        return Err(Error::ModelVersion {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_VERSION,
        });
    }
    let scalar = value.get("scalar").and_then(|v| v.as_str()).unwrap_or_default();
    if scalar != T::NAME {
        return Err(Error::ModelFormat(format!("model stores {scalar} values, expected {}", T::NAME)));
    }
    let model: PromptModel<T> = serde_json::from_value(value).map_err(|e| Error::ModelFormat(e.to_string()))?;
    model.validate()?;
    Ok(model)
}

pub fn load_model<T: Real>(path: &Path) -> Result<PromptModel<T>> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&s)
}

/// One scored response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub id: String,
    pub raw: f64,
    pub grade: Grade,
}

/// A model bound to the resources it was trained with.
#[derive(Debug)]
pub struct Scorer<'a, T> {
    model: &'a PromptModel<T>,
    extractor: FeatureExtractor<'a, T>,
}

impl<'a, T: Real> Scorer<'a, T> {
    pub fn new(model: &'a PromptModel<T>, resources: &'a FeatureResources<T>) -> Result<Self> {
        Ok(Scorer {
            model,
            extractor: FeatureExtractor::new(&model.features, resources)?,
        })
    }

    pub fn features(&self, doc: &TaggedDoc) -> Result<FeatureVector<T>> {
        self.extractor.assemble(doc)
    }

    pub fn score_doc(&self, id: &str, doc: &TaggedDoc) -> Result<Scored> {
        let v = self.features(doc)?;
        let raw = self.model.forest.predict(&v.values)?;
        Ok(Scored {
            id: id.to_string(),
            raw: raw.to_f64().unwrap_or(f64::NAN),
            grade: to_grade(raw, self.model.prompt.grade_min, self.model.prompt.grade_max),
        })
    }

    pub fn score_text(&self, id: &str, text: &str) -> Result<Scored> {
        self.score_doc(id, &self.preprocess(text))
    }

    pub fn preprocess(&self, text: &str) -> TaggedDoc {
        self.extractor.resources().preprocessor.process(text)
    }

    pub fn contribution(&self, doc: &TaggedDoc) -> Result<(FeatureVector<T>, Contribution<T>)> {
        let v = self.features(doc)?;
        let c = decompose(&self.model.forest, &v.values, &self.model.features.schema)?;
        Ok((v, c))
    }

    pub fn feedback(&self, id: &str, text: &str) -> Result<FeedbackReport> {
        let doc = self.preprocess(text);
        let (v, c) = self.contribution(&doc)?;
        let grade = to_grade(c.total(), self.model.prompt.grade_min, self.model.prompt.grade_max);
        build_report(id, &self.model.prompt.prompt_id, grade, &c, &v, &self.model.features.schema, &self.model.flag_rules)
    }
}

/// Settings for training one prompt's model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub split_ratios: [f64; 3],
    /// Drives the split, the shuffled negatives and the forest.
    pub seed: u64,
    pub cross_prompt_negatives: usize,
    pub shuffled_negatives: usize,
    pub features: FeatureConfig,
    pub forest: Hyperparams,
    /// Incidence thresholds tried on the validation set; empty keeps
    /// `features.incidence_threshold`.
    pub threshold_candidates: Vec<u32>,
    /// Forest size used while tuning the threshold.
    pub tuning_trees: usize,
    pub flag_percentile: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            split_ratios: DEFAULT_RATIOS,
            seed: 0,
            cross_prompt_negatives: 10,
            shuffled_negatives: 10,
            features: FeatureConfig::default(),
            forest: Hyperparams::default(),
            threshold_candidates: vec![0, 1, 2, 4, 8, 16, 32],
            tuning_trees: 50,
            flag_percentile: DEFAULT_FLAG_PERCENTILE,
        }
    }
}

/// A test-set response with its human and model grades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestItem {
    pub id: String,
    pub human: Grade,
    pub score_b: Option<Grade>,
    pub predicted: Grade,
    pub raw: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: PromptModel<T>,
    pub split: SplitSet,
    pub n_cross_prompt: usize,
    pub n_shuffled: usize,
    /// Validation QWK per candidate threshold (`None` when undefined).
    pub threshold_search: Vec<(u32, Option<f64>)>,
    pub validation_qwk: Option<f64>,
    pub test: Vec<TestItem>,
}

struct Prepared<'a> {
    docs: HashMap<&'a str, TaggedDoc>,
}

fn rows<T: Real>(ex: &FeatureExtractor<'_, T>, docs: &[&TaggedDoc]) -> Result<Vec<Vec<T>>> {
    docs.par_iter().map(|d| ex.assemble(d).map(|v| v.values)).collect()
}

fn predicted_grades<T: Real>(forest: &Forest<T>, x: &[Vec<T>], prompt: &PromptSpec) -> Result<Vec<(f64, Grade)>> {
    x.iter()
        .map(|r| {
            let raw = forest.predict(r)?;
            Ok((raw.to_f64().unwrap_or(f64::NAN), to_grade(raw, prompt.grade_min, prompt.grade_max)))
        })
        .collect()
}

/// Fits features and a forest on the train part, with the incidence
/// threshold picked on validation.
struct Fit<T> {
    fitted: FittedFeatures,
    forest: Forest<T>,
}

fn fit_once<T: Real>(
    train: &[(&TaggedDoc, Grade)],
    prompt: &PromptSpec,
    resources: &FeatureResources<T>,
    features: &FeatureConfig,
    hp: &Hyperparams,
) -> Result<Fit<T>> {
    let fitted = fit_features(train, prompt, resources, features)?;
    let ex = FeatureExtractor::new(&fitted, resources)?;
    let docs: Vec<&TaggedDoc> = train.iter().map(|(d, _)| *d).collect();
    let x = rows(&ex, &docs)?;
    let y: Vec<T> = train.iter().map(|(_, g)| T::from_f64_lossy(f64::from(*g))).collect();
    let forest = train_forest(&x, &y, hp)?.with_schema_fingerprint(fitted.schema.fingerprint());
    Ok(Fit { fitted, forest })
}

fn validation_score<T: Real>(
    fit: &Fit<T>,
    resources: &FeatureResources<T>,
    val: &[(&TaggedDoc, Grade)],
    prompt: &PromptSpec,
) -> Result<Option<f64>> {
    if val.is_empty() {
        return Ok(None);
    }
    let ex = FeatureExtractor::new(&fit.fitted, resources)?;
    let docs: Vec<&TaggedDoc> = val.iter().map(|(d, _)| *d).collect();
    let pred = predicted_grades(&fit.forest, &rows(&ex, &docs)?, prompt)?;
    let human: Vec<Grade> = val.iter().map(|(_, g)| *g).collect();
    let model: Vec<Grade> = pred.iter().map(|(_, g)| *g).collect();
    match quadratic_weighted_kappa(&human, &model, prompt.grade_min, prompt.grade_max) {
        Ok(k) => Ok(Some(k)),
        Err(Error::DegenerateRatings) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Splits, augments, preprocesses, tunes, trains and scores the test part
/// for one prompt. `responses` are the prompt's own responses; `others`
/// the other prompts' sets, used for cross-prompt negatives.
pub fn train_prompt<T: Real>(
    prompt: &PromptSpec,
    responses: &[Response],
    others: &[&[Response]],
    resources: &FeatureResources<T>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    train_prompt_inner(prompt, responses, others, resources, cfg).map_err(|e| e.in_prompt(&prompt.prompt_id))
}

fn train_prompt_inner<T: Real>(
    prompt: &PromptSpec,
    responses: &[Response],
    others: &[&[Response]],
    resources: &FeatureResources<T>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    prompt.validate()?;
    let split = stratified_split(responses, cfg.split_ratios, cfg.seed)?;
    let by_id: HashMap<&str, &Response> = responses.iter().map(|r| (r.id.as_str(), r)).collect();
    let train_orig: Vec<Response> = split.train.iter().map(|id| by_id[id.as_str()].clone()).collect();
    let cross = augment_cross_prompt(prompt, others.iter().copied(), cfg.cross_prompt_negatives);
    let shuffled = augment_shuffled(&train_orig, prompt, cfg.shuffled_negatives, cfg.seed);
    let train_all: Vec<&Response> = train_orig.iter().chain(&cross.responses).chain(&shuffled.responses).collect();

    let mut texts: Vec<(&str, &str)> = train_all.iter().map(|r| (r.id.as_str(), r.text.as_str())).collect();
    for id in split.validation.iter().chain(&split.test) {
        texts.push((id.as_str(), by_id[id.as_str()].text.as_str()));
    }
    let prepared = Prepared {
        docs: texts.par_iter().map(|&(id, t)| (id, resources.preprocessor.process(t))).collect(),
    };
    let pairs = |rs: &[&Response]| -> Vec<(&TaggedDoc, Grade)> {
        rs.iter().map(|r| (&prepared.docs[r.id.as_str()], r.resolved_score)).collect()
    };
    let train = pairs(&train_all);
    let val_rs: Vec<&Response> = split.validation.iter().map(|id| by_id[id.as_str()]).collect();
    let val = pairs(&val_rs);

    let mut features = cfg.features.clone();
    let mut threshold_search = Vec::new();
    if features.groups.contains(&FeatureGroup::PosNgrams) && !cfg.threshold_candidates.is_empty() {
        let tuning = Hyperparams {
            n_trees: cfg.tuning_trees.max(1),
            master_seed: cfg.seed,
            ..cfg.forest.clone()
        };
        let mut best: Option<(u32, f64)> = None;
        for &t in &cfg.threshold_candidates {
            let fc = FeatureConfig {
                incidence_threshold: t,
                ..features.clone()
            };
            let fit = fit_once(&train, prompt, resources, &fc, &tuning)?;
            let score = validation_score(&fit, resources, &val, prompt)?;
            threshold_search.push((t, score));
            if let Some(s) = score {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((t, s));
                }
            }
        }
        if let Some((t, _)) = best {
            features.incidence_threshold = t;
        }
        log::info!("prompt {}: incidence threshold {}", prompt.prompt_id, features.incidence_threshold);
    }

    let hp = Hyperparams {
        master_seed: cfg.seed,
        ..cfg.forest.clone()
    };
    let fit = fit_once(&train, prompt, resources, &features, &hp)?;
    let validation_qwk = validation_score(&fit, resources, &val, prompt)?;

    let ex = FeatureExtractor::new(&fit.fitted, resources)?;
    let orig_docs: Vec<&TaggedDoc> = train_orig.iter().map(|r| &prepared.docs[r.id.as_str()]).collect();
    let flag_rows: Vec<Vec<f64>> = rows(&ex, &orig_docs)?
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.to_f64().unwrap_or(0.0)).collect())
        .collect();
    let flag_rules = fit_flag_rules(&fit.fitted.schema, &flag_rows, cfg.flag_percentile);

    let test_docs: Vec<&TaggedDoc> = split.test.iter().map(|id| &prepared.docs[id.as_str()]).collect();
    let pred = predicted_grades(&fit.forest, &rows(&ex, &test_docs)?, prompt)?;
    let test = split
        .test
        .iter()
        .zip(pred)
        .map(|(id, (raw, predicted))| {
            let r = by_id[id.as_str()];
            TestItem {
                id: id.clone(),
                human: r.resolved_score,
                score_b: r.score_b,
                predicted,
                raw,
            }
        })
        .collect();
    drop(ex);

    let model = PromptModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        scalar: T::NAME.to_string(),
        prompt: prompt.clone(),
        features: fit.fitted,
        forest: fit.forest,
        flag_rules,
        metadata: BTreeMap::new(),
    };
    Ok(TrainOutcome {
        model,
        split,
        n_cross_prompt: cross.responses.len(),
        n_shuffled: shuffled.responses.len(),
        threshold_search,
        validation_qwk,
        test,
    })
}
