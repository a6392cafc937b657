use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::{TaggedDoc, Token};
use crate::error::{Error, Result};

/// A word list with optional corpus frequencies. Words are stored lowercase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    freq: BTreeMap<String, u64>,
}

impl Lexicon {
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        Self::from_counts(words.into_iter().map(|w| (w, 1)))
    }

    pub fn from_counts<'a>(counts: impl IntoIterator<Item = (&'a str, u64)>) -> Self {
        let mut freq = BTreeMap::new();
        for (w, c) in counts {
            *freq.entry(w.to_lowercase()).or_insert(0) += c;
        }
        Lexicon { freq }
    }

    /// One word per line, optionally followed by whitespace and a frequency.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let freq = match parts.next() {
                None => 1,
                Some(f) => f
                    .parse::<u64>()
                    .map_err(|_| Error::parse(path, i + 1, format!("bad frequency {f:?}")))?,
            };
            entries.push((word, freq));
        }
        Ok(Self::from_counts(entries))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.freq.contains_key(word)
    }

    pub fn frequency(&self, word: &str) -> u64 {
        self.freq.get(word).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    /// Words with frequencies, in alphabetical order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.freq.iter().map(|(w, &f)| (w.as_str(), f))
    }
}

/// Optimal string alignment distance: Levenshtein edits plus transposition
/// of adjacent characters, no substring edited twice.
pub fn osa_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let w = b.len() + 1;
    let mut d = vec![0usize; (a.len() + 1) * w];
    for i in 0..=a.len() {
        d[i * w] = i;
    }
    for (j, cell) in d.iter_mut().enumerate().take(w) {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut v = (d[(i - 1) * w + j] + 1).min(d[i * w + j - 1] + 1).min(d[(i - 1) * w + j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[(i - 2) * w + j - 2] + 1);
            }
            d[i * w + j] = v;
        }
    }
    d[a.len() * w + b.len()]
}

const MAX_EDIT: usize = 2;

fn deletes(word: &str, max: usize, out: &mut HashSet<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut frontier = vec![chars];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 0..w.len() {
                let mut d = w.clone();
                d.remove(i);
                if out.insert(d.iter().collect()) {
                    next.push(d);
                }
            }
        }
        frontier = next;
    }
}

/// Lexicon plus a symmetric-delete index for edit-distance-2 lookups.
#[derive(Debug, Clone)]
pub struct SpellCorrector {
    lexicon: Lexicon,
    words: Vec<String>,
    index: HashMap<String, Vec<u32>>,
}

impl SpellCorrector {
    pub fn new(lexicon: Lexicon) -> Self {
        let words: Vec<String> = lexicon.freq.keys().cloned().collect();
        let mut index: HashMap<String, Vec<u32>> = HashMap::new();
        let mut dels = HashSet::new();
        for (i, w) in words.iter().enumerate() {
            dels.clear();
            dels.insert(w.clone());
            deletes(w, MAX_EDIT, &mut dels);
            for d in dels.drain() {
                index.entry(d).or_default().push(i as u32);
            }
        }
        SpellCorrector { lexicon, words, index }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// The closest lexicon word within edit distance 2, preferring smaller
    /// distance, then higher frequency, then alphabetical order. `None` when
    /// the word is already known or nothing is close enough.
    pub fn suggest(&self, word: &str) -> Option<&str> {
        if self.lexicon.contains(word) {
            return None;
        }
        let mut probes = HashSet::new();
        probes.insert(word.to_string());
        deletes(word, MAX_EDIT, &mut probes);
        let mut seen = HashSet::new();
        let mut best: Option<(usize, u64, &str)> = None;
        for p in &probes {
            for &i in self.index.get(p).into_iter().flatten() {
                if !seen.insert(i) {
                    continue;
                }
                let cand = self.words[i as usize].as_str();
                let dist = osa_distance(word, cand);
                if dist > MAX_EDIT {
                    continue;
                }
                let key = (dist, self.lexicon.frequency(cand), cand);
                let better = match best {
                    None => true,
                    Some((bd, bf, bw)) => dist < bd || (dist == bd && (key.1 > bf || (key.1 == bf && cand < bw))),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        best.map(|(_, _, w)| w)
    }
}

fn is_lower_alpha(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphabetic() && c.is_lowercase())
}

fn is_capitalized(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_alphabetic() && c.is_uppercase()) && cs.all(|c| c.is_alphabetic() && c.is_lowercase())
}

fn capitalize(s: &str) -> String {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

/// Replaces misspelled words with their closest lexicon entry.
///
/// Only purely alphabetic tokens are candidates. Lowercase words are
/// corrected anywhere; a capitalized word is corrected (and re-capitalized)
/// only at the start of a sentence. Capitalized words elsewhere (proper
/// nouns), mixed-case tokens such as chemical formulas, and anything with
/// digits or inner punctuation pass through unchanged.
pub fn correct_spelling(doc: &TaggedDoc, speller: &SpellCorrector) -> TaggedDoc {
    let mut out = doc.clone();
    if speller.lexicon.is_empty() {
        return out;
    }
    let starts: HashSet<usize> = doc.sentence_bounds.iter().map(|&(s, _)| s).collect();
    for (i, tok) in out.tokens.iter_mut().enumerate() {
        if let Some(fixed) = corrected(tok, starts.contains(&i), speller) {
            tok.surface = fixed;
        }
    }
    out
}

fn corrected(tok: &Token, sentence_start: bool, speller: &SpellCorrector) -> Option<String> {
    let s = tok.surface.as_str();
    if is_lower_alpha(s) {
        return speller.suggest(s).map(str::to_string);
    }
    if sentence_start && is_capitalized(s) {
        let lower = s.to_lowercase();
        return speller.suggest(&lower).map(capitalize);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize_and_split;
    use proptest::prelude::*;

    fn lexicon() -> Lexicon {
        Lexicon::from_counts([
            ("receive", 50),
            ("relieve", 20),
            ("the", 1000),
            ("salt", 30),
            ("water", 40),
            ("cat", 10),
            ("cut", 12),
            ("he", 300),
            ("will", 200),
            ("a", 900),
        ])
    }

    /// Exhaustive scan of the lexicon.
    fn brute_force(word: &str, lex: &Lexicon) -> Option<String> {
        if lex.contains(word) {
            return None;
        }
        lex.iter()
            .map(|(w, f)| (osa_distance(word, w), std::cmp::Reverse(f), w))
            .filter(|(d, _, _)| *d <= 2)
            .min()
            .map(|(_, _, w)| w.to_string())
    }

    fn fix(text: &str, sp: &SpellCorrector) -> Vec<String> {
        correct_spelling(&tokenize_and_split(text), sp).tokens.into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn osa_basics() {
        assert_eq!(osa_distance("recieve", "receive"), 1);
        assert_eq!(osa_distance("", "abc"), 3);
        assert_eq!(osa_distance("kitten", "sitting"), 3);
        assert_eq!(osa_distance("ca", "abc"), 3);
    }

    #[test]
    fn corrects_against_exhaustive_search() {
        let sp = SpellCorrector::new(lexicon());
        assert_eq!(sp.suggest("recieve"), Some("receive"));
        assert_eq!(brute_force("recieve", &lexicon()).as_deref(), Some("receive"));
        // cat and cut are both one edit from "cot"; cut is more frequent.
        assert_eq!(sp.suggest("cot"), Some("cut"));
        assert_eq!(fix("he will recieve the slat", &sp), ["he", "will", "receive", "the", "salt"]);
    }

    #[test]
    fn guarded_tokens_pass_through() {
        let sp = SpellCorrector::new(lexicon());
        assert_eq!(fix("the NaCl water", &sp), ["the", "NaCl", "water"]);
        assert_eq!(fix("the Wter H2O", &sp), ["the", "Wter", "H2O"]);
        assert_eq!(fix("Recieve the salt", &sp), ["Receive", "the", "salt"]);
        assert_eq!(fix("the water", &sp), ["the", "water"]);
    }

    #[test]
    fn empty_lexicon_is_identity() {
        let sp = SpellCorrector::new(Lexicon::default());
        assert_eq!(fix("teh watr", &sp), ["teh", "watr"]);
    }

    proptest! {
        #[test]
        fn index_lookup_matches_brute_force(
            words in proptest::collection::vec("[abcd]{1,6}", 1..30),
            query in "[abcd]{0,7}",
        ) {
            let lex = Lexicon::from_counts(words.iter().enumerate().map(|(i, w)| (w.as_str(), (i % 4) as u64 + 1)));
            let sp = SpellCorrector::new(lex.clone());
            prop_assert_eq!(sp.suggest(&query).map(str::to_string), brute_force(&query, &lex));
        }

        #[test]
        fn correction_is_idempotent(text in "[a-dA-D ]{0,40}") {
            let sp = SpellCorrector::new(Lexicon::from_words(["ab", "abc", "bad", "cab", "dab", "a"]));
            let once = correct_spelling(&tokenize_and_split(&text), &sp);
            let twice = correct_spelling(&once, &sp);
            prop_assert_eq!(once, twice);
        }
    }
}
