use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::keywords::{fit_keyword_weights, keyword_features, KeywordWeights};
use super::lexicons::{DifficultyLexicon, Stopwords, SynonymLexicon};
use super::ngrams::{count_pos_ngrams, pos_ngram_features, SignificantNgramSet, NGRAM_SIZES};
use super::operators::{logical_operator_counts, OPERATORS};
use super::overlap::{lexical_overlap, prompt_overlap, ReferenceProfile};
use super::stats::{difficulty_diversity_features, length_stats};
use super::temporal::temporal_features;
use super::{FeatureGroup, FeatureSchema, FeatureVector, DIFFICULTY_LEVELS};
use crate::corpus::{Grade, PromptSpec};
use crate::embeddings::{common_component, embed_response, DocumentEmbedder, EmbeddingTable, IdfMeanEmbedder, Weighting};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::textproc::{Preprocessor, TaggedDoc, Tagger};

pub const FITTED_FEATURES_VERSION: u32 = 1;

/// Which groups to extract and the fit-time hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub groups: BTreeSet<FeatureGroup>,
    /// POS n-grams are kept when their incidence exceeds this.
    pub incidence_threshold: u32,
    /// Minimum grade of the responses POS n-grams are collected from;
    /// [`default_high_grade_cutoff`] when unset.
    pub high_grade_cutoff: Option<Grade>,
    /// Project the dominant training direction out of document embeddings.
    pub common_component: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            groups: FeatureGroup::ALL.into_iter().collect(),
            incidence_threshold: 2,
            high_grade_cutoff: None,
            common_component: false,
        }
    }
}

impl FeatureConfig {
    pub fn without(mut self, group: FeatureGroup) -> Self {
        self.groups.remove(&group);
        self
    }

    pub fn only(groups: impl IntoIterator<Item = FeatureGroup>) -> Self {
        FeatureConfig {
            groups: groups.into_iter().collect(),
            ..Self::default()
        }
    }
}

/// One grade below the top when the scale has at least three grades, the
/// top grade otherwise.
pub fn default_high_grade_cutoff(prompt: &PromptSpec) -> Grade {
    if prompt.grade_max - prompt.grade_min >= 2 {
        prompt.grade_max - 1
    } else {
        prompt.grade_max
    }
}

/// External linguistic resources shared by every prompt.
#[derive(Debug, Clone, Default)]
pub struct FeatureResources<T> {
    pub preprocessor: Preprocessor,
    pub embeddings: Option<EmbeddingTable<T>>,
    pub stopwords: Stopwords,
    pub synonyms: Option<SynonymLexicon>,
    pub difficulty: DifficultyLexicon,
}

impl<T: Real> FeatureResources<T> {
    /// SHA-256 over everything that changes feature values: lexicons,
    /// tagger and speller, and the embedding table's shape.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |tag: &str, s: &str| {
            h.update(tag.as_bytes());
            h.update((s.len() as u64).to_le_bytes());
            h.update(s.as_bytes());
        };
        match &self.preprocessor.tagger {
            Tagger::Perceptron(p) => put("tagger", &p.to_model_string()),
            Tagger::Lexicon(_) => put("tagger", "builtin-lexicon"),
        }
        if let Some(sp) = &self.preprocessor.speller {
            for (w, f) in sp.lexicon().iter() {
                put("spell", &format!("{w}\t{f}"));
            }
        }
        put("lemma", &format!("{:?}", self.preprocessor.lemma_rules));
        if let Some(e) = &self.embeddings {
            put("embeddings", &format!("{}x{}", e.len(), e.dim()));
        }
        for w in self.stopwords.iter() {
            put("stop", w);
        }
        if let Some(s) = &self.synonyms {
            for (w, syns) in s.sorted() {
                put("syn", &format!("{w}\t{}", syns.iter().cloned().collect::<Vec<_>>().join(",")));
            }
        }
        for (w, l) in self.difficulty.sorted() {
            put("level", &format!("{w}\t{l}"));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Fitted document-embedding state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingState {
    pub dim: usize,
    pub vocab_size: usize,
    /// Document-frequency weights fitted on training responses, used when
    /// the table carries no idf sidecar.
    pub idf: Option<BTreeMap<String, f64>>,
    pub common_component: Option<Vec<f64>>,
}

/// Everything fitted on one prompt's training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedFeatures {
    pub version: u32,
    pub prompt_id: String,
    pub groups: Vec<FeatureGroup>,
    pub high_grade_cutoff: Grade,
    pub ngrams: SignificantNgramSet,
    pub keywords: KeywordWeights,
    pub question: ReferenceProfile,
    pub passage: Option<ReferenceProfile>,
    pub embedding: Option<EmbeddingState>,
    pub schema: FeatureSchema,
    pub resource_fingerprint: String,
}

impl FittedFeatures {
    pub fn has(&self, group: FeatureGroup) -> bool {
        self.groups.contains(&group)
    }
}

fn feature_names(groups: &[FeatureGroup], emb_dim: usize) -> Vec<(String, FeatureGroup)> {
    let mut out = Vec::new();
    for &g in groups {
        let names: Vec<String> = match g {
            FeatureGroup::Embeddings => (0..emb_dim)
                .map(|i| format!("w2v_{i}"))
                .chain((0..emb_dim).map(|i| format!("d2v_{i}")))
                .collect(),
            FeatureGroup::PosNgrams => NGRAM_SIZES
                .iter()
                .map(|n| format!("pos{n}_count"))
                .chain(NGRAM_SIZES.iter().map(|n| format!("pos{n}_ratio")))
                .collect(),
            FeatureGroup::WeightedKeywords => vec!["keyword_weight_sum".into(), "keyword_match_count".into()],
            FeatureGroup::PromptOverlap => vec!["prompt_coverage".into(), "prompt_jaccard".into()],
            FeatureGroup::LexicalOverlap => {
                vec!["noun_overlap".into(), "argument_overlap".into(), "content_overlap".into()]
            }
            FeatureGroup::LogicalOperators => OPERATORS
                .iter()
                .map(|o| format!("op_{o}"))
                .chain(["op_if_then".into(), "op_if_else".into(), "op_total".into()])
                .collect(),
            FeatureGroup::Temporal => [
                "tense_past",
                "tense_present",
                "tense_future",
                "aspect_progressive",
                "aspect_perfect",
                "tense_switches",
            ]
            .map(String::from)
            .to_vec(),
            FeatureGroup::LengthStats => [
                "sentence_count",
                "word_count",
                "mean_sentence_length",
                "mean_word_length",
                "max_sentence_length",
            ]
            .map(String::from)
            .to_vec(),
            FeatureGroup::WordFreqDifficulty => (1..=DIFFICULTY_LEVELS)
                .map(|l| format!("difficulty_level_{l:02}"))
                .chain(["difficulty_unknown".into(), "unique_words".into(), "type_token_ratio".into()])
                .collect(),
        };
        out.extend(names.into_iter().map(|n| (n, g)));
    }
    out
}

fn training_idf(docs: &[&TaggedDoc]) -> BTreeMap<String, f64> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for d in docs {
        let words: BTreeSet<String> = d.words().map(|t| t.lower()).collect();
        for w in words {
            *df.entry(w).or_insert(0) += 1;
        }
    }
    let n = docs.len() as f64;
    df.into_iter().map(|(w, c)| (w, ((1.0 + n) / (1.0 + c as f64)).ln() + 1.0)).collect()
}

fn column_stats(rows: &[Vec<f64>], col: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let first = rows[0][col];
    if rows.iter().all(|r| r[col] == first) {
        return (first, 0.0);
    }
    let mean = rows.iter().map(|r| r[col]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits all prompt-specific state on training responses only, then the
/// normalization statistics on their raw feature values.
pub fn fit_features<T: Real>(
    train: &[(&TaggedDoc, Grade)],
    prompt: &PromptSpec,
    resources: &FeatureResources<T>,
    config: &FeatureConfig,
) -> Result<FittedFeatures> {
    if config.groups.is_empty() {
        return Err(Error::Config("every feature group is disabled".into()));
    }
    if train.is_empty() {
        return Err(Error::InvalidInput(format!("prompt {}: no training responses", prompt.prompt_id)));
    }
    let groups: Vec<FeatureGroup> = FeatureGroup::ALL.into_iter().filter(|g| config.groups.contains(g)).collect();
    let has = |g| groups.contains(&g);
    let cutoff = config.high_grade_cutoff.unwrap_or_else(|| default_high_grade_cutoff(prompt));

    let ngrams = if has(FeatureGroup::PosNgrams) {
        count_pos_ngrams(train.iter().copied(), cutoff)?.select(config.incidence_threshold)
    } else {
        SignificantNgramSet::default()
    };
    let keywords = if has(FeatureGroup::WeightedKeywords) {
        if prompt.reference_docs.is_empty() {
            log::warn!("prompt {}: no reference documents, keyword features will be zero", prompt.prompt_id);
        }
        fit_keyword_weights(&prompt.reference_docs, &resources.stopwords)
    } else {
        KeywordWeights::default()
    };
    let pre = &resources.preprocessor;
    let question = ReferenceProfile::from_doc(&pre.process(&prompt.question_text), &resources.stopwords);
    if has(FeatureGroup::PromptOverlap) && question.content.is_empty() {
        log::warn!("prompt {}: question has no content words, prompt overlap will be zero", prompt.prompt_id);
    }
    let passage = prompt
        .passage_text
        .as_deref()
        .map(|p| ReferenceProfile::from_doc(&pre.process(p), &resources.stopwords));
    if has(FeatureGroup::LexicalOverlap) && passage.is_none() {
        log::warn!("prompt {}: no passage, lexical overlap features are absent", prompt.prompt_id);
    }

    let embedding = if has(FeatureGroup::Embeddings) {
        let table = resources
            .embeddings
            .as_ref()
            .ok_or_else(|| Error::Config("embedding features enabled but no vector table configured".into()))?;
        let docs: Vec<&TaggedDoc> = train.iter().map(|(d, _)| *d).collect();
        let mut state = EmbeddingState {
            dim: table.dim(),
            vocab_size: table.len(),
            idf: (!table.has_idf()).then(|| training_idf(&docs)),
            common_component: None,
        };
        if config.common_component {
            let idf = state.idf.as_ref().map(to_t_map::<T>);
            let vectors: Vec<Vec<T>> = docs.iter().map(|d| document_vector(table, idf.as_ref(), None, d)).collect();
            state.common_component = common_component(&vectors).map(|v| v.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect());
        }
        Some(state)
    } else {
        None
    };

    let names = feature_names(&groups, embedding.as_ref().map_or(0, |e| e.dim));
    let mut fitted = FittedFeatures {
        version: FITTED_FEATURES_VERSION,
        prompt_id: prompt.prompt_id.clone(),
        groups,
        high_grade_cutoff: cutoff,
        ngrams,
        keywords,
        question,
        passage,
        embedding,
        schema: FeatureSchema {
            groups: names.iter().map(|(_, g)| *g).collect(),
            means: vec![0.0; names.len()],
            stds: vec![0.0; names.len()],
            normalized: names.iter().map(|(_, g)| *g != FeatureGroup::Embeddings).collect(),
            names: names.into_iter().map(|(n, _)| n).collect(),
        },
        resource_fingerprint: resources.fingerprint(),
    };

    let extractor = FeatureExtractor::new(&fitted, resources)?;
    let rows: Vec<Vec<f64>> = train.par_iter().map(|(d, _)| extractor.raw(d)).collect::<Result<_>>()?;
    for col in 0..fitted.schema.len() {
        let (mean, std) = column_stats(&rows, col);
        fitted.schema.means[col] = mean;
        fitted.schema.stds[col] = std;
    }
    fitted.schema.validate()?;
    Ok(fitted)
}

fn to_t_map<T: Real>(m: &BTreeMap<String, f64>) -> HashMap<String, T> {
    m.iter().map(|(k, &v)| (k.clone(), T::from_f64_lossy(v))).collect()
}

fn document_vector<T: Real>(
    table: &EmbeddingTable<T>,
    idf: Option<&HashMap<String, T>>,
    common: Option<&Vec<T>>,
    doc: &TaggedDoc,
) -> Vec<T> {
    let mut e = IdfMeanEmbedder::new(table);
    if let Some(idf) = idf {
        e = e.with_idf(idf);
    }
    if let Some(c) = common {
        e = e.with_common_component(c.clone());
    }
    e.embed(doc)
}

/// Extracts feature vectors with fitted state and shared resources. Built
/// once per prompt and used read-only, so extraction can run in parallel.
#[derive(Debug)]
pub struct FeatureExtractor<'a, T> {
    fitted: &'a FittedFeatures,
    resources: &'a FeatureResources<T>,
    table: Option<&'a EmbeddingTable<T>>,
    idf: Option<HashMap<String, T>>,
    common: Option<Vec<T>>,
}

impl<'a, T: Real> FeatureExtractor<'a, T> {
    /// Fails when the resources differ from those the state was fitted
    /// with.
    pub fn new(fitted: &'a FittedFeatures, resources: &'a FeatureResources<T>) -> Result<Self> {
        if fitted.version != FITTED_FEATURES_VERSION {
            return Err(Error::ModelVersion {
                found: fitted.version,
                expected: FITTED_FEATURES_VERSION,
            });
        }
        let fp = resources.fingerprint();
        if fp != fitted.resource_fingerprint {
            return Err(Error::SchemaMismatch(format!(
                "prompt {}: linguistic resources differ from those used at training time",
                fitted.prompt_id
            )));
        }
        let table = match &fitted.embedding {
            None => None,
            Some(state) => {
                let table = resources
                    .embeddings
                    .as_ref()
                    .ok_or_else(|| Error::SchemaMismatch("model uses embeddings but no vector table is loaded".into()))?;
                if (table.dim(), table.len()) != (state.dim, state.vocab_size) {
                    return Err(Error::SchemaMismatch(format!(
                        "embedding table is {}x{}, model expects {}x{}",
                        table.len(),
                        table.dim(),
                        state.vocab_size,
                        state.dim
                    )));
                }
                Some(table)
            }
        };
        let state = fitted.embedding.as_ref();
        Ok(FeatureExtractor {
            fitted,
            resources,
            table,
            idf: state.and_then(|s| s.idf.as_ref()).map(to_t_map::<T>),
            common: state
                .and_then(|s| s.common_component.as_ref())
                .map(|c| c.iter().map(|&x| T::from_f64_lossy(x)).collect()),
        })
    }

    pub fn resources(&self) -> &'a FeatureResources<T> {
        self.resources
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.fitted.schema
    }

    /// Unnormalized feature values in schema order.
    pub fn raw(&self, doc: &TaggedDoc) -> Result<Vec<f64>> {
        if doc.words().any(|t| t.pos.is_none()) {
            return Err(Error::SchemaMismatch("response has not been POS-tagged".into()));
        }
        let f = self.fitted;
        let res = self.resources;
        let mut out = Vec::with_capacity(f.schema.len());
        for &g in &f.groups {
            match g {
                FeatureGroup::Embeddings => {
                    let table = self.table.expect("checked in new");
                    let to64 = |v: Vec<T>| v.into_iter().map(|x| x.to_f64().unwrap_or(0.0)).collect::<Vec<_>>();
                    out.extend(to64(embed_response(doc, table, Weighting::Uniform)));
                    out.extend(to64(document_vector(table, self.idf.as_ref(), self.common.as_ref(), doc)));
                }
                FeatureGroup::PosNgrams => {
                    let n = pos_ngram_features(doc, &f.ngrams);
                    out.extend(n.counts);
                    out.extend(n.ratios);
                }
                FeatureGroup::WeightedKeywords => {
                    let k = keyword_features(doc, &f.keywords);
                    out.extend([k.weight_sum, k.matched]);
                }
                FeatureGroup::PromptOverlap => {
                    let p = prompt_overlap(doc, &f.question, &res.stopwords);
                    out.extend([p.coverage, p.jaccard]);
                }
                FeatureGroup::LexicalOverlap => {
                    let l = lexical_overlap(doc, f.passage.as_ref(), res.synonyms.as_ref(), &res.stopwords);
                    out.extend([l.noun, l.argument, l.content]);
                }
                FeatureGroup::LogicalOperators => {
                    let o = logical_operator_counts(doc);
                    out.extend(o.single);
                    out.extend([o.if_then, o.if_else, o.total()]);
                }
                FeatureGroup::Temporal => {
                    let t = temporal_features(doc);
                    out.extend([t.past, t.present, t.future, t.progressive, t.perfect, t.tense_switches]);
                }
                FeatureGroup::LengthStats => {
                    let s = length_stats(doc);
                    out.extend([
                        s.sentence_count,
                        s.word_count,
                        s.mean_sentence_length,
                        s.mean_word_length,
                        s.max_sentence_length,
                    ]);
                }
                FeatureGroup::WordFreqDifficulty => {
                    let d = difficulty_diversity_features(doc, &res.difficulty);
                    out.extend(d.levels);
                    out.extend([d.unique_words, d.type_token_ratio]);
                }
            }
        }
        if out.len() != f.schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "extracted {} features, schema has {}",
                out.len(),
                f.schema.len()
            )));
        }
        Ok(out)
    }

    /// Raw values z-scored with the training statistics; features with zero
    /// training spread become 0 and the embedding block passes through.
    pub fn assemble(&self, doc: &TaggedDoc) -> Result<FeatureVector<T>> {
        let s = &self.fitted.schema;
        let raw = self.raw(doc)?;
        let values = raw
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                let v = if !s.normalized[i] {
                    x
                } else if s.stds[i] == 0.0 {
                    0.0
                } else {
                    (x - s.means[i]) / s.stds[i]
                };
                T::from_f64_lossy(v)
            })
            .collect();
        Ok(FeatureVector { values })
    }

    pub fn assemble_batch(&self, docs: &[TaggedDoc]) -> Result<Vec<FeatureVector<T>>> {
        docs.par_iter().map(|d| self.assemble(d)).collect()
    }

    /// Preprocesses raw text with the configured pipeline, then assembles.
    pub fn assemble_text(&self, text: &str) -> Result<FeatureVector<T>> {
        self.assemble(&self.resources.preprocessor.process(text))
    }
}
