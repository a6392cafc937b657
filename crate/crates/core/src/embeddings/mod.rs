//! Word-vector tables and response-level embedding features.

mod io;

use std::collections::HashMap;

use crate::scalar::Real;
use crate::textproc::TaggedDoc;

pub use io::{load_idf, load_vectors, write_binary, write_text, VectorFormat};

/// Word vectors of a common dimension, with optional idf weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<T>,
    idf: Option<HashMap<String, T>>,
    default_idf: T,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            idf: None,
            default_idf: T::one(),
        }
    }

    /// Adds a vector. Returns false (and keeps the existing entry) when the
    /// word is already present.
    ///
    /// # Panics
    /// If `vector.len() != dim`.
    pub fn insert(&mut self, word: &str, vector: &[T]) -> bool {
        assert_eq!(vector.len(), self.dim, "vector length must equal table dim");
        if self.index.contains_key(word) {
            return false;
        }
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.data.extend_from_slice(vector);
        true
    }

    /// Attaches idf weights. Words missing from `idf` get the largest weight
    /// present, treating unseen words as rare.
    pub fn with_idf(mut self, idf: HashMap<String, T>) -> Self {
        self.default_idf = idf.values().copied().fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max(v)))).unwrap_or(T::one());
        self.idf = Some(idf);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn has_idf(&self) -> bool {
        self.idf.is_some()
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index.get(word).map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn idf(&self, word: &str) -> T {
        match &self.idf {
            None => T::one(),
            Some(m) => m.get(word).copied().unwrap_or(self.default_idf),
        }
    }

    /// Looks a token up by its lowercased form, falling back to the surface.
    fn lookup<'a>(&'a self, surface: &str, lower: &'a str) -> Option<(&'a str, &'a [T])> {
        if let Some(v) = self.get(lower) {
            return Some((lower, v));
        }
        self.index.get_key_value(surface).map(|(k, &i)| (k.as_str(), &self.data[i * self.dim..(i + 1) * self.dim]))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    Idf,
}

fn weighted_mean<T: Real>(doc: &TaggedDoc, table: &EmbeddingTable<T>, weight: impl Fn(&str) -> T) -> Vec<T> {
    let mut acc = vec![T::zero(); table.dim()];
    let mut total = T::zero();
    for tok in doc.words() {
        let lower = tok.lower();
        let Some((key, v)) = table.lookup(&tok.surface, &lower) else {
            continue;
        };
        let w = weight(key);
        if w <= T::zero() {
            continue;
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = *a + w * x;
        }
        total = total + w;
    }
    if total > T::zero() {
        for a in &mut acc {
            *a = *a / total;
        }
    }
    acc
}

/// Mean of the vectors of in-vocabulary word tokens, optionally idf
/// weighted. Out-of-vocabulary tokens and punctuation are skipped; a
/// response with no known words embeds to the zero vector.
pub fn embed_response<T: Real>(doc: &TaggedDoc, table: &EmbeddingTable<T>, weighting: Weighting) -> Vec<T> {
    match weighting {
        Weighting::Uniform => weighted_mean(doc, table, |_| T::one()),
        Weighting::Idf => weighted_mean(doc, table, |w| table.idf(w)),
    }
}

/// Produces one fixed-length vector per document.
pub trait DocumentEmbedder<T> {
    fn dim(&self) -> usize;
    fn embed(&self, doc: &TaggedDoc) -> Vec<T>;
}

/// Document embedding as the idf-weighted mean of word vectors, with an
/// optional common direction projected out.
#[derive(Debug, Clone)]
pub struct IdfMeanEmbedder<'a, T> {
    table: &'a EmbeddingTable<T>,
    idf: Option<(&'a HashMap<String, T>, T)>,
    common_component: Option<Vec<T>>,
}

impl<'a, T: Real> IdfMeanEmbedder<'a, T> {
    pub fn new(table: &'a EmbeddingTable<T>) -> Self {
        IdfMeanEmbedder {
            table,
            idf: None,
            common_component: None,
        }
    }

    /// Uses `idf` instead of the table's own weights. Words missing from the
    /// map get its largest value.
    pub fn with_idf(mut self, idf: &'a HashMap<String, T>) -> Self {
        let default = idf.values().copied().fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max(v)))).unwrap_or(T::one());
        self.idf = Some((idf, default));
        self
    }

    /// Removes the projection onto `direction` (normalized here) from every
    /// output.
    pub fn with_common_component(mut self, direction: Vec<T>) -> Self {
        let norm = direction.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        self.common_component = (norm > T::zero()).then(|| direction.iter().map(|&x| x / norm).collect());
        self
    }
}

impl<T: Real> DocumentEmbedder<T> for IdfMeanEmbedder<'_, T> {
    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn embed(&self, doc: &TaggedDoc) -> Vec<T> {
        let mut v = match self.idf {
            Some((idf, default)) => weighted_mean(doc, self.table, |w| idf.get(w).copied().unwrap_or(default)),
            None => weighted_mean(doc, self.table, |w| self.table.idf(w)),
        };
        if let Some(u) = &self.common_component {
            let dot = v.iter().zip(u).fold(T::zero(), |s, (&a, &b)| s + a * b);
            for (a, &b) in v.iter_mut().zip(u) {
                *a = *a - dot * b;
            }
        }
        v
    }
}

pub fn embed_document<T: Real>(doc: &TaggedDoc, table: &EmbeddingTable<T>) -> Vec<T> {
    IdfMeanEmbedder::new(table).embed(doc)
}

/// Dominant direction of a set of vectors (uncentered), by power iteration
/// from a fixed start. `None` for an empty or all-zero set.
pub fn common_component<T: Real>(vectors: &[Vec<T>]) -> Option<Vec<T>> {
    let dim = vectors.first()?.len();
    let mut u = vec![T::one(); dim];
    for _ in 0..200 {
        let mut next = vec![T::zero(); dim];
        for v in vectors {
            let dot = v.iter().zip(&u).fold(T::zero(), |s, (&a, &b)| s + a * b);
            for (n, &x) in next.iter_mut().zip(v) {
                *n = *n + dot * x;
            }
        }
        let norm = next.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if norm <= T::zero() {
            return None;
        }
        u = next.into_iter().map(|x| x / norm).collect();
    }
    Some(u)
}
