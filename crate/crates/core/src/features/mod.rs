//! Prompt-specific feature fitting and extraction of the nine feature
//! groups into a fixed-schema vector.

mod extractor;
mod keywords;
mod lexicons;
mod ngrams;
mod operators;
mod overlap;
mod stats;
mod temporal;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extractor::{
    default_high_grade_cutoff, fit_features, EmbeddingState, FeatureConfig, FeatureExtractor, FeatureResources,
    FittedFeatures, FITTED_FEATURES_VERSION,
};
pub use keywords::{fit_keyword_weights, keyword_features, KeywordFeatures, KeywordWeights};
pub use lexicons::{DifficultyLexicon, Stopwords, SynonymLexicon, DIFFICULTY_LEVELS};
pub use ngrams::{count_pos_ngrams, fit_pos_ngram_vocab, pos_ngram_features, NgramCounts, NgramFeatures, SignificantNgramSet, NGRAM_SIZES};
pub use operators::{logical_operator_counts, OperatorCounts, OPERATORS, PAIR_WINDOW};
pub use overlap::{
    argument_pairs, content_lemmas, lexical_overlap, noun_lemmas, prompt_overlap, LexicalOverlap, PromptOverlap,
    ReferenceProfile,
};
pub use stats::{difficulty_diversity_features, length_stats, DifficultyFeatures, LengthStats};
pub use temporal::{temporal_features, TemporalFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureGroup {
    Embeddings,
    PosNgrams,
    WeightedKeywords,
    PromptOverlap,
    LexicalOverlap,
    LogicalOperators,
    Temporal,
    LengthStats,
    WordFreqDifficulty,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 9] = [
        FeatureGroup::Embeddings,
        FeatureGroup::PosNgrams,
        FeatureGroup::WeightedKeywords,
        FeatureGroup::PromptOverlap,
        FeatureGroup::LexicalOverlap,
        FeatureGroup::LogicalOperators,
        FeatureGroup::Temporal,
        FeatureGroup::LengthStats,
        FeatureGroup::WordFreqDifficulty,
    ];

    /// Kebab-case identifier, as used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Embeddings => "embeddings",
            FeatureGroup::PosNgrams => "pos-ngrams",
            FeatureGroup::WeightedKeywords => "weighted-keywords",
            FeatureGroup::PromptOverlap => "prompt-overlap",
            FeatureGroup::LexicalOverlap => "lexical-overlap",
            FeatureGroup::LogicalOperators => "logical-operators",
            FeatureGroup::Temporal => "temporal",
            FeatureGroup::LengthStats => "length-stats",
            FeatureGroup::WordFreqDifficulty => "word-freq-difficulty",
        }
    }

    /// Human-readable name for reports.
    pub fn label(self) -> &'static str {
        match self {
            FeatureGroup::Embeddings => "Word2Vec and Doc2Vec",
            FeatureGroup::PosNgrams => "POS n-grams",
            FeatureGroup::WeightedKeywords => "Weighted keywords",
            FeatureGroup::PromptOverlap => "Prompt overlap",
            FeatureGroup::LexicalOverlap => "Lexical overlap",
            FeatureGroup::LogicalOperators => "Logical operators",
            FeatureGroup::Temporal => "Temporal features",
            FeatureGroup::LengthStats => "Sentence and word length",
            FeatureGroup::WordFreqDifficulty => "Word frequency and difficulty",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature group {s:?}")))
    }
}

/// Ordered feature names with their groups and training normalization
/// statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// False for features passed through unscaled (the embedding block).
    pub normalized: Vec<bool>,
}

impl FeatureSchema {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn group_of(&self, name: &str) -> Option<FeatureGroup> {
        self.index_of(name).map(|i| self.groups[i])
    }

    pub fn indices_of(&self, group: FeatureGroup) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.groups[i] == group).collect()
    }

    /// Groups present, in canonical order.
    pub fn present_groups(&self) -> Vec<FeatureGroup> {
        FeatureGroup::ALL.into_iter().filter(|g| self.groups.contains(g)).collect()
    }

    /// SHA-256 over the ordered names and their groups.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for (n, g) in self.names.iter().zip(&self.groups) {
            h.update(n.as_bytes());
            h.update([0]);
            h.update(g.name().as_bytes());
            h.update([0]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.names.len();
        if [self.groups.len(), self.means.len(), self.stds.len(), self.normalized.len()] != [n; 4] {
            return Err(Error::SchemaMismatch("feature schema columns differ in length".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &self.names {
            if !seen.insert(name) {
                return Err(Error::SchemaMismatch(format!("duplicate feature name {name:?}")));
            }
        }
        if !self.means.iter().chain(&self.stds).all(|v| v.is_finite()) || self.stds.iter().any(|&s| s < 0.0) {
            return Err(Error::SchemaMismatch("non-finite normalization statistics".into()));
        }
        Ok(())
    }
}

/// Feature values aligned with a [`FeatureSchema`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
}

impl<T> FeatureVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
