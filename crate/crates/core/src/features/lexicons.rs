use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::Lexicon;

const BUILTIN_STOPWORDS: &str = "a about above after again against all am an and any are aren't as at be because been before being
below between both but by can cannot could couldn't did didn't do does doesn't doing don't down during each few for from
further had hadn't has hasn't have haven't having he he'd he'll he's her here here's hers herself him himself his how how's
i i'd i'll i'm i've if in into is isn't it it's its itself let's me more most mustn't my myself no nor not of off on once
only or other ought our ours ourselves out over own same shan't she she'd she'll she's should shouldn't so some such than
that that's the their theirs them themselves then there there's these they they'd they'll they're they've this those
through to too under until up very was wasn't we we'd we'll we're we've were weren't what what's when when's where where's
which while who who's whom why why's with won't would wouldn't you you'd you'll you're you've your yours yourself
yourselves also just will";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stopwords(BTreeSet<String>);

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords(BUILTIN_STOPWORDS.split_whitespace().map(str::to_string).collect())
    }
}

impl Stopwords {
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        Stopwords(words.into_iter().map(str::to_lowercase).collect())
    }

    /// One word per line.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_words(text.lines().map(str::trim).filter(|l| !l.is_empty())))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Symmetric synonym relation read from `word<TAB>syn1,syn2,...` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    map: HashMap<String, BTreeSet<String>>,
}

impl SynonymLexicon {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut map: HashMap<String, BTreeSet<String>> = HashMap::new();
        for (a, b) in pairs {
            let (a, b) = (a.to_lowercase(), b.to_lowercase());
            if a == b {
                continue;
            }
            map.entry(a.clone()).or_default().insert(b.clone());
            map.entry(b).or_default().insert(a);
        }
        SynonymLexicon { map }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (w, syns) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected word<TAB>syn1,syn2,..."))?;
            for s in syns.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                pairs.push((w.trim().to_string(), s.to_string()));
            }
        }
        Ok(Self::from_pairs(pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))))
    }

    pub fn synonyms(&self, word: &str) -> impl Iterator<Item = &str> {
        self.map.get(word).into_iter().flatten().map(String::as_str)
    }

    /// Sorted `word -> synonyms` entries, for fingerprinting.
    pub(crate) fn sorted(&self) -> BTreeMap<&str, &BTreeSet<String>> {
        self.map.iter().map(|(k, v)| (k.as_str(), v)).collect()
    }
}

pub const DIFFICULTY_LEVELS: usize = 20;

/// Maps words to one of 20 difficulty levels, level 1 holding the most
/// frequent words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DifficultyLexicon {
    levels: HashMap<String, u8>,
}

impl DifficultyLexicon {
    /// Ranks by descending frequency (ties alphabetical) and cuts the ranking
    /// into 20 bins of equal population.
    pub fn from_frequencies(lexicon: &Lexicon) -> Self {
        let mut ranked: Vec<(&str, u64)> = lexicon.iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let n = ranked.len();
        let levels = ranked
            .into_iter()
            .enumerate()
            .map(|(rank, (w, _))| (w.to_string(), (1 + rank * DIFFICULTY_LEVELS / n) as u8))
            .collect();
        DifficultyLexicon { levels }
    }

    /// Explicit levels; each must lie in `1..=20`.
    pub fn from_levels<'a>(levels: impl IntoIterator<Item = (&'a str, u8)>) -> Result<Self> {
        let mut out = HashMap::new();
        for (w, l) in levels {
            if !(1..=DIFFICULTY_LEVELS as u8).contains(&l) {
                return Err(Error::InvalidInput(format!("difficulty level {l} for {w:?} outside 1..=20")));
            }
            out.insert(w.to_lowercase(), l);
        }
        Ok(DifficultyLexicon { levels: out })
    }

    pub fn level(&self, word: &str) -> Option<u8> {
        self.levels.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub(crate) fn sorted(&self) -> BTreeMap<&str, u8> {
        self.levels.iter().map(|(k, &v)| (k.as_str(), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_population_bins() {
        let words: Vec<String> = (0..40).map(|i| format!("w{i:02}")).collect();
        let lex = Lexicon::from_counts(words.iter().enumerate().map(|(i, w)| (w.as_str(), 1000 - i as u64)));
        let d = DifficultyLexicon::from_frequencies(&lex);
        assert_eq!(d.level("w00"), Some(1));
        assert_eq!(d.level("w01"), Some(1));
        assert_eq!(d.level("w02"), Some(2));
        assert_eq!(d.level("w39"), Some(20));
        for l in 1..=20u8 {
            assert_eq!(d.sorted().values().filter(|&&v| v == l).count(), 2);
        }
    }

    #[test]
    fn synonyms_are_symmetric() {
        let s = SynonymLexicon::from_pairs([("big", "large"), ("big", "huge")]);
        assert_eq!(s.synonyms("big").collect::<Vec<_>>(), ["huge", "large"]);
        assert_eq!(s.synonyms("large").collect::<Vec<_>>(), ["big"]);
    }

    #[test]
    fn levels_validated() {
        assert!(DifficultyLexicon::from_levels([("a", 21)]).is_err());
        assert!(DifficultyLexicon::from_levels([("a", 0)]).is_err());
        assert_eq!(DifficultyLexicon::from_levels([("A", 5)]).unwrap().level("a"), Some(5));
    }
}
