use std::collections::BTreeSet;

use super::{DifficultyLexicon, DIFFICULTY_LEVELS};
use crate::textproc::TaggedDoc;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LengthStats {
    pub sentence_count: f64,
    pub word_count: f64,
    pub mean_sentence_length: f64,
    pub mean_word_length: f64,
    pub max_sentence_length: f64,
}

/// Sentence lengths count word tokens; sentences made only of punctuation
/// are ignored. Word length is in characters.
pub fn length_stats(doc: &TaggedDoc) -> LengthStats {
    let lengths: Vec<usize> = doc
        .sentences()
        .map(|s| s.iter().filter(|t| t.is_word()).count())
        .filter(|&n| n > 0)
        .collect();
    let words: usize = lengths.iter().sum();
    if words == 0 {
        return LengthStats::default();
    }
    let chars: usize = doc.words().map(|t| t.surface.chars().count()).sum();
    LengthStats {
        sentence_count: lengths.len() as f64,
        word_count: words as f64,
        mean_sentence_length: words as f64 / lengths.len() as f64,
        mean_word_length: chars as f64 / words as f64,
        max_sentence_length: *lengths.iter().max().expect("nonempty") as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifficultyFeatures {
    /// Counts for levels 1..=20 followed by the bin of words the lexicon
    /// does not know.
    pub levels: [f64; DIFFICULTY_LEVELS + 1],
    pub unique_words: f64,
    pub type_token_ratio: f64,
}

impl Default for DifficultyFeatures {
    fn default() -> Self {
        DifficultyFeatures {
            levels: [0.0; DIFFICULTY_LEVELS + 1],
            unique_words: 0.0,
            type_token_ratio: 0.0,
        }
    }
}

/// Histogram of word difficulty levels plus vocabulary diversity. A word is
/// looked up by its lowercased surface, then by its lemma. The type-token
/// ratio is distinct lemmas over word tokens.
pub fn difficulty_diversity_features(doc: &TaggedDoc, lexicon: &DifficultyLexicon) -> DifficultyFeatures {
    let mut out = DifficultyFeatures::default();
    let mut types = BTreeSet::new();
    let mut tokens = 0usize;
    for t in doc.words() {
        tokens += 1;
        let base = t.base();
        let bin = lexicon
            .level(&t.lower())
            .or_else(|| lexicon.level(&base))
            .map_or(DIFFICULTY_LEVELS, |l| l as usize - 1);
        out.levels[bin] += 1.0;
        types.insert(base);
    }
    if tokens > 0 {
        out.unique_words = types.len() as f64;
        out.type_token_ratio = types.len() as f64 / tokens as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize_and_split;
    use proptest::prelude::*;

    #[test]
    fn two_short_sentences() {
        let s = length_stats(&tokenize_and_split("Paul ran. He won!"));
        assert_eq!(s.sentence_count, 2.0);
        assert_eq!(s.word_count, 4.0);
        assert_eq!(s.mean_sentence_length, 2.0);
        assert_eq!(s.max_sentence_length, 2.0);
        assert_eq!(s.mean_word_length, 12.0 / 4.0);
    }

    #[test]
    fn empty_doc_is_zero() {
        assert_eq!(length_stats(&tokenize_and_split("")), LengthStats::default());
        assert_eq!(difficulty_diversity_features(&tokenize_and_split(""), &DifficultyLexicon::default()), DifficultyFeatures::default());
    }

    #[test]
    fn fifty_word_sentence() {
        let text = vec!["word"; 50].join(" ");
        assert_eq!(length_stats(&tokenize_and_split(&text)).mean_sentence_length, 50.0);
    }

    #[test]
    fn ttr_of_repeated_token() {
        let f = difficulty_diversity_features(&tokenize_and_split("a a b"), &DifficultyLexicon::default());
        assert!((f.type_token_ratio - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.unique_words, 2.0);
        let f = difficulty_diversity_features(&tokenize_and_split("x y z"), &DifficultyLexicon::default());
        assert_eq!(f.type_token_ratio, 1.0);
    }

    #[test]
    fn level_histogram_trace() {
        let lex = DifficultyLexicon::from_levels([("the", 1), ("a", 1), ("cell", 5), ("mitochondrion", 20)]).unwrap();
        let f = difficulty_diversity_features(&tokenize_and_split("the a cell mitochondrion"), &lex);
        let mut expected = [0.0; 21];
        expected[0] = 2.0;
        expected[4] = 1.0;
        expected[19] = 1.0;
        assert_eq!(f.levels, expected);
        let f = difficulty_diversity_features(&tokenize_and_split("zebra"), &lex);
        assert_eq!(f.levels[20], 1.0);
    }

    proptest! {
        #[test]
        fn ttr_in_unit_interval(words in proptest::collection::vec("[a-d]{1,2}", 1..30)) {
            let f = difficulty_diversity_features(&tokenize_and_split(&words.join(" ")), &DifficultyLexicon::default());
            prop_assert!(f.type_token_ratio > 0.0 && f.type_token_ratio <= 1.0);
            prop_assert_eq!(f.levels.iter().sum::<f64>(), words.len() as f64);
        }
    }
}
