use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Grade;
use crate::error::{Error, Result};
use crate::textproc::{Tag, TaggedDoc};

pub const NGRAM_SIZES: [usize; 3] = [2, 3, 4];

/// POS-tag n-grams per sentence of `doc`, for one size `n`.
fn tag_ngrams(doc: &TaggedDoc, n: usize) -> impl Iterator<Item = Vec<Tag>> + '_ {
    doc.sentences().flat_map(move |s| {
        let tags: Vec<Tag> = s.iter().filter_map(|t| t.pos).collect();
        let windows: Vec<Vec<Tag>> = tags.windows(n).map(<[Tag]>::to_vec).collect();
        windows
    })
}

/// Incidence counts of every tag n-gram seen in high-graded training
/// responses, before thresholding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NgramCounts {
    counts: BTreeMap<Vec<Tag>, u32>,
}

impl NgramCounts {
    pub fn select(&self, incidence_threshold: u32) -> SignificantNgramSet {
        let mut sets: [BTreeSet<Vec<Tag>>; 3] = Default::default();
        for (gram, &c) in &self.counts {
            if c > incidence_threshold {
                sets[gram.len() - 2].insert(gram.clone());
            }
        }
        SignificantNgramSet {
            sets,
            incidence_threshold,
        }
    }
}

pub fn count_pos_ngrams<'a>(
    train_docs: impl IntoIterator<Item = (&'a TaggedDoc, Grade)>,
    high_grade_cutoff: Grade,
) -> Result<NgramCounts> {
    let mut counts = BTreeMap::new();
    let mut qualifying = 0;
    for (doc, grade) in train_docs {
        if grade < high_grade_cutoff {
            continue;
        }
        qualifying += 1;
        for n in NGRAM_SIZES {
            for g in tag_ngrams(doc, n) {
                *counts.entry(g).or_insert(0u32) += 1;
            }
        }
    }
    if qualifying == 0 {
        return Err(Error::InvalidInput(format!(
            "no training response graded at or above {high_grade_cutoff} to build POS n-grams from"
        )));
    }
    Ok(NgramCounts { counts })
}

/// Tag bi-, tri- and tetra-grams whose incidence in high-graded training
/// responses exceeds a threshold.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignificantNgramSet {
    /// Indexed by `n - 2`.
    pub sets: [BTreeSet<Vec<Tag>>; 3],
    pub incidence_threshold: u32,
}

impl SignificantNgramSet {
    pub fn get(&self, n: usize) -> &BTreeSet<Vec<Tag>> {
        &self.sets[n - 2]
    }

    pub fn len(&self) -> usize {
        self.sets.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn fit_pos_ngram_vocab<'a>(
    train_docs: impl IntoIterator<Item = (&'a TaggedDoc, Grade)>,
    high_grade_cutoff: Grade,
    incidence_threshold: u32,
) -> Result<SignificantNgramSet> {
    Ok(count_pos_ngrams(train_docs, high_grade_cutoff)?.select(incidence_threshold))
}

/// Per size n in {2, 3, 4}: how many of the doc's tag n-grams are in the
/// significant set, and that count as a fraction of all its n-grams.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NgramFeatures {
    pub counts: [f64; 3],
    pub ratios: [f64; 3],
}

pub fn pos_ngram_features(doc: &TaggedDoc, set: &SignificantNgramSet) -> NgramFeatures {
    let mut out = NgramFeatures::default();
    for (k, n) in NGRAM_SIZES.into_iter().enumerate() {
        let (mut hit, mut total) = (0usize, 0usize);
        for g in tag_ngrams(doc, n) {
            total += 1;
            if set.get(n).contains(&g) {
                hit += 1;
            }
        }
        out.counts[k] = hit as f64;
        out.ratios[k] = if total == 0 { 0.0 } else { hit as f64 / total as f64 };
    }
    out
}
