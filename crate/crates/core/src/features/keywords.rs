use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Stopwords;
use crate::textproc::{tokenize_and_split, TaggedDoc};

/// Keyword -> tf-idf weight, fitted on a prompt's reference documents.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KeywordWeights {
    pub weights: BTreeMap<String, f64>,
}

fn terms(doc: &str, stopwords: &Stopwords) -> Vec<String> {
    tokenize_and_split(doc)
        .tokens
        .iter()
        .filter(|t| t.surface.chars().any(char::is_alphabetic))
        .map(|t| t.lower())
        .filter(|w| !stopwords.contains(w))
        .collect()
}

/// Weight of a term is `max_d tf(term, d) * ln((1 + D) / (1 + df))`, where tf
/// is the term's share of the document's non-stopword terms, `D` the number
/// of reference documents and `df` how many contain the term. Terms present in
/// every document get weight 0 and are dropped.
pub fn fit_keyword_weights<S: AsRef<str>>(reference_docs: &[S], stopwords: &Stopwords) -> KeywordWeights {
    let n_docs = reference_docs.len() as f64;
    let mut max_tf: BTreeMap<String, f64> = BTreeMap::new();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in reference_docs {
        let ts = terms(doc.as_ref(), stopwords);
        if ts.is_empty() {
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in &ts {
            *counts.entry(t).or_insert(0) += 1;
        }
        for (t, c) in counts {
            let tf = c as f64 / ts.len() as f64;
            let e = max_tf.entry(t.to_string()).or_insert(0.0);
            *e = e.max(tf);
            *df.entry(t.to_string()).or_insert(0) += 1;
        }
    }
    let weights = max_tf
        .into_iter()
        .filter_map(|(t, tf)| {
            let idf = ((1.0 + n_docs) / (1.0 + df[&t] as f64)).ln();
            let w = tf * idf;
            (w > 0.0).then_some((t, w))
        })
        .collect();
    KeywordWeights { weights }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KeywordFeatures {
    pub weight_sum: f64,
    pub matched: f64,
}

/// Sums the weights of the distinct keywords a response uses, matching
/// either a token's lowercased surface or its lemma.
pub fn keyword_features(doc: &TaggedDoc, weights: &KeywordWeights) -> KeywordFeatures {
    let mut hit: BTreeSet<&str> = BTreeSet::new();
    for t in doc.words() {
        for form in [t.lower(), t.base()] {
            if let Some((k, _)) = weights.weights.get_key_value(&form) {
                hit.insert(k);
            }
        }
    }
    KeywordFeatures {
        weight_sum: hit.iter().map(|k| weights.weights[*k]).sum(),
        matched: hit.len() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_two_doc_corpus() {
        let sw = Stopwords::default();
        let docs = ["The cell has a cell membrane.", "A cell nucleus."];
        let kw = fit_keyword_weights(&docs, &sw);
        // doc 1 terms: cell x2, membrane (3 terms); doc 2: cell, nucleus (2 terms).
        let idf_once = (3.0f64 / 2.0).ln();
        assert_eq!(kw.weights.len(), 2);
        assert!((kw.weights["membrane"] - idf_once / 3.0).abs() < 1e-15);
        assert!((kw.weights["nucleus"] - idf_once / 2.0).abs() < 1e-15);
        assert!(!kw.weights.contains_key("cell"));

        let resp = tokenize_and_split("The nucleus and the membrane, the nucleus!");
        let f = keyword_features(&resp, &kw);
        assert_eq!(f.matched, 2.0);
        assert!((f.weight_sum - (idf_once / 3.0 + idf_once / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_corpus_gives_zero() {
        let kw = fit_keyword_weights::<&str>(&[], &Stopwords::default());
        assert!(kw.weights.is_empty());
        assert_eq!(keyword_features(&tokenize_and_split("anything at all"), &kw), KeywordFeatures::default());
    }

    #[test]
    fn word_in_every_doc_has_zero_weight() {
        let kw = fit_keyword_weights(&["osmosis water", "osmosis salt", "osmosis"], &Stopwords::default());
        assert!(!kw.weights.contains_key("osmosis"));
        assert!(kw.weights.contains_key("salt"));
    }
}
