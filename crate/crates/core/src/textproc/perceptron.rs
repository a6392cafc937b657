use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{shape_tag, Tag};
use crate::error::{Error, Result};

pub type TaggedSentence = Vec<(String, Tag)>;

const MODEL_MAGIC: &str = "sasgrade-tagger";
const MODEL_VERSION: u32 = 1;

/// Reads a tagged corpus: one sentence per line, tokens `word_TAG` separated
/// by spaces. The tag follows the last underscore.
pub fn read_tagged_corpus(path: &Path) -> Result<Vec<TaggedSentence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tagged_corpus(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
}

pub(crate) fn parse_tagged_corpus(text: &str) -> std::result::Result<Vec<TaggedSentence>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut sent = Vec::new();
        for item in line.split_whitespace() {
            let (word, tag) = item
                .rsplit_once('_')
                .filter(|(w, _)| !w.is_empty())
                .ok_or_else(|| (i + 1, format!("token {item:?} is not word_TAG")))?;
            let tag = tag.parse::<Tag>().map_err(|e| (i + 1, e))?;
            sent.push((word.to_string(), tag));
        }
        if !sent.is_empty() {
            out.push(sent);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub iterations: usize,
    pub seed: u64,
    /// Words seen at least this often with a near-unique tag are tagged by
    /// lookup instead of by the model.
    pub tagdict_min_count: u32,
    pub tagdict_max_ambiguity: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            iterations: 5,
            seed: 0,
            tagdict_min_count: 20,
            tagdict_max_ambiguity: 0.03,
        }
    }
}

/// Greedy left-to-right averaged perceptron over word, affix, neighbour and
/// previous-tag features.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerceptronTagger {
    weights: HashMap<String, Vec<(Tag, f64)>>,
    tagdict: HashMap<String, Tag>,
    classes: Vec<Tag>,
}

fn normalize(word: &str) -> String {
    let first = word.chars().next();
    if word.contains('-') && first != Some('-') {
        "!HYPHEN".into()
    } else if word.len() == 4 && word.chars().all(|c| c.is_ascii_digit()) {
        "!YEAR".into()
    } else if first.is_some_and(|c| c.is_ascii_digit()) {
        "!DIGITS".into()
    } else {
        word.to_lowercase()
    }
}

fn suffix3(w: &str) -> &str {
    let n = w.chars().count();
    if n <= 3 {
        w
    } else {
        let skip: usize = w.chars().take(n - 3).map(char::len_utf8).sum();
        &w[skip..]
    }
}

fn tag_name(t: Option<Tag>, start: &'static str) -> &'static str {
    t.map_or(start, Tag::as_str)
}

fn features(i: usize, word: &str, context: &[String], prev: Option<Tag>, prev2: Option<Tag>) -> Vec<String> {
    let i = i + 2;
    let p1 = tag_name(prev, "-START-");
    let p2 = tag_name(prev2, "-START2-");
    let first: String = word.chars().next().map(String::from).unwrap_or_default();
    vec![
        "bias".to_string(),
        format!("i suffix {}", suffix3(word)),
        format!("i pref1 {first}"),
        format!("i-1 tag {p1}"),
        format!("i-2 tag {p2}"),
        format!("i tag+i-2 tag {p1} {p2}"),
        format!("i word {}", context[i]),
        format!("i-1 tag+i word {p1} {}", context[i]),
        format!("i-1 word {}", context[i - 1]),
        format!("i-1 suffix {}", suffix3(&context[i - 1])),
        format!("i-2 word {}", context[i - 2]),
        format!("i+1 word {}", context[i + 1]),
        format!("i+1 suffix {}", suffix3(&context[i + 1])),
        format!("i+2 word {}", context[i + 2]),
    ]
}

fn context_of(words: &[&str]) -> Vec<String> {
    let mut c = Vec::with_capacity(words.len() + 4);
    c.push("-START-".to_string());
    c.push("-START2-".to_string());
    c.extend(words.iter().map(|w| normalize(w)));
    c.push("-END-".to_string());
    c.push("-END2-".to_string());
    c
}

impl PerceptronTagger {
    pub fn train(sentences: &[TaggedSentence], opts: TrainOptions) -> Self {
        let mut model = PerceptronTagger {
            tagdict: build_tagdict(sentences, opts),
            ..Default::default()
        };
        let mut classes: Vec<Tag> = sentences.iter().flatten().map(|(_, t)| *t).collect();
        classes.sort();
        classes.dedup();
        model.classes = classes;

        let mut learner = Learner::default();
        let mut order: Vec<usize> = (0..sentences.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.iterations {
            for &s in &order {
                let sent = &sentences[s];
                let words: Vec<&str> = sent.iter().map(|(w, _)| w.as_str()).collect();
                let context = context_of(&words);
                let (mut prev, mut prev2) = (None, None);
                for (i, (word, truth)) in sent.iter().enumerate() {
                    let guess = match model.fixed_tag(word) {
                        Some(t) => t,
                        None => {
                            let feats = features(i, word, &context, prev, prev2);
                            let guess = learner.predict(&feats, &model.classes);
                            learner.update(*truth, guess, &feats);
                            guess
                        }
                    };
                    prev2 = prev;
                    prev = Some(guess);
                }
            }
            order.shuffle(&mut rng);
        }
        model.weights = learner.averaged();
        model
    }

    fn fixed_tag(&self, word: &str) -> Option<Tag> {
        shape_tag(word).or_else(|| self.tagdict.get(word).copied())
    }

    pub fn tag_words(&self, words: &[&str]) -> Vec<Tag> {
        let context = context_of(words);
        let (mut prev, mut prev2) = (None, None);
        let mut out = Vec::with_capacity(words.len());
        let mut scores = [0.0f64; 45];
        for (i, word) in words.iter().enumerate() {
            let tag = self.fixed_tag(word).unwrap_or_else(|| {
                scores.fill(0.0);
                for f in features(i, word, &context, prev, prev2) {
                    for &(t, w) in self.weights.get(&f).into_iter().flatten() {
                        scores[t.index()] += w;
                    }
                }
                argmax(&scores, &self.classes)
            });
            out.push(tag);
            prev2 = prev;
            prev = Some(tag);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_model_string()).map_err(|e| Error::io(path, e))
    }

    pub fn to_model_string(&self) -> String {
        let mut s = format!("{MODEL_MAGIC}\t{MODEL_VERSION}\n");
        let classes: Vec<&str> = self.classes.iter().map(|t| t.as_str()).collect();
        writeln!(s, "classes\t{}", classes.join("\t")).unwrap();
        let dict: BTreeMap<&String, &Tag> = self.tagdict.iter().collect();
        for (w, t) in dict {
            writeln!(s, "dict\t{w}\t{t}").unwrap();
        }
        let weights: BTreeMap<&String, &Vec<(Tag, f64)>> = self.weights.iter().collect();
        for (f, ws) in weights {
            for (t, w) in ws {
                writeln!(s, "w\t{f}\t{t}\t{w}").unwrap();
            }
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_model_str(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    pub fn from_model_str(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut lines = text.lines().enumerate();
        match lines.next().map(|(_, l)| l.split('\t').collect::<Vec<_>>()) {
            Some(h) if h.len() == 2 && h[0] == MODEL_MAGIC => {
                if h[1] != MODEL_VERSION.to_string() {
                    return Err((1, format!("unsupported tagger model version {}", h[1])));
                }
            }
            _ => return Err((1, "not a tagger model file".into())),
        }
        let mut model = PerceptronTagger::default();
        let tag = |s: &str, line: usize| s.parse::<Tag>().map_err(|e| (line, e));
        for (i, line) in lines {
            let n = i + 1;
            let cols: Vec<&str> = line.split('\t').collect();
            match cols.as_slice() {
                ["classes", rest @ ..] => {
                    model.classes = rest.iter().map(|t| tag(t, n)).collect::<std::result::Result<_, _>>()?;
                }
                ["dict", w, t] => {
                    model.tagdict.insert(w.to_string(), tag(t, n)?);
                }
                ["w", f, t, w] => {
                    let w: f64 = w.parse().map_err(|_| (n, format!("bad weight {w:?}")))?;
                    model.weights.entry(f.to_string()).or_default().push((tag(t, n)?, w));
                }
                [""] => {}
                _ => return Err((n, format!("unrecognised line {line:?}"))),
            }
        }
        if model.classes.is_empty() {
            return Err((1, "model has no classes".into()));
        }
        Ok(model)
    }
}

fn argmax(scores: &[f64; 45], classes: &[Tag]) -> Tag {
    let mut best = classes[0];
    for &c in &classes[1..] {
        if scores[c.index()] > scores[best.index()] {
            best = c;
        }
    }
    best
}

fn build_tagdict(sentences: &[TaggedSentence], opts: TrainOptions) -> HashMap<String, Tag> {
    let mut counts: HashMap<&str, BTreeMap<Tag, u32>> = HashMap::new();
    for (w, t) in sentences.iter().flatten() {
        *counts.entry(w.as_str()).or_default().entry(*t).or_default() += 1;
    }
    counts
        .into_iter()
        .filter_map(|(w, tags)| {
            let total: u32 = tags.values().sum();
            let (tag, &n) = tags.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))?;
            let ambiguity = f64::from(total - n) / f64::from(total);
            (total >= opts.tagdict_min_count && ambiguity <= opts.tagdict_max_ambiguity).then(|| (w.to_string(), *tag))
        })
        .collect()
}

/// Perceptron weights with lazily updated running totals for averaging.
#[derive(Default)]
struct Learner {
    weights: HashMap<String, BTreeMap<Tag, f64>>,
    totals: HashMap<(String, Tag), f64>,
    stamps: HashMap<(String, Tag), u64>,
    instances: u64,
}

impl Learner {
    fn predict(&self, feats: &[String], classes: &[Tag]) -> Tag {
        let mut scores = [0.0f64; 45];
        for f in feats {
            if let Some(ws) = self.weights.get(f) {
                for (t, w) in ws {
                    scores[t.index()] += w;
                }
            }
        }
        argmax(&scores, classes)
    }

    fn update(&mut self, truth: Tag, guess: Tag, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for f in feats {
            self.bump(f, truth, 1.0);
            self.bump(f, guess, -1.0);
        }
    }

    fn bump(&mut self, feat: &str, tag: Tag, delta: f64) {
        let w = self.weights.entry(feat.to_string()).or_default().entry(tag).or_insert(0.0);
        let key = (feat.to_string(), tag);
        let stamp = self.stamps.entry(key.clone()).or_insert(0);
        *self.totals.entry(key).or_insert(0.0) += (self.instances - *stamp) as f64 * *w;
        *stamp = self.instances;
        *w += delta;
    }

    fn averaged(self) -> HashMap<String, Vec<(Tag, f64)>> {
        let n = self.instances.max(1) as f64;
        let mut out = HashMap::new();
        for (feat, ws) in self.weights {
            let mut avg = Vec::new();
            for (tag, w) in ws {
                let key = (feat.clone(), tag);
                let total = self.totals.get(&key).copied().unwrap_or(0.0)
                    + (self.instances - self.stamps.get(&key).copied().unwrap_or(0)) as f64 * w;
                let a = total / n;
                if a != 0.0 {
                    avg.push((tag, a));
                }
            }
            if !avg.is_empty() {
                out.insert(feat, avg);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<TaggedSentence> {
        let text = "The_DT dog_NN barks_VBZ ._.\nA_DT cat_NN sleeps_VBZ ._.\nThe_DT dogs_NNS bark_VBP ._.\nthe_DT cat_NN saw_VBD 3_CD dogs_NNS ._.";
        parse_tagged_corpus(text).unwrap()
    }

    #[test]
    fn parses_word_tag_pairs() {
        let c = corpus();
        assert_eq!(c.len(), 4);
        assert_eq!(c[0][1], ("dog".to_string(), Tag::NN));
        assert!(parse_tagged_corpus("dog_XX").is_err());
        assert!(parse_tagged_corpus("dog").is_err());
        assert_eq!(parse_tagged_corpus("a_b_NN").unwrap()[0][0].0, "a_b");
    }

    #[test]
    fn learns_training_data_and_digits_are_cd() {
        let opts = TrainOptions {
            iterations: 10,
            ..Default::default()
        };
        let t = PerceptronTagger::train(&corpus(), opts);
        for sent in corpus() {
            let words: Vec<&str> = sent.iter().map(|(w, _)| w.as_str()).collect();
            let gold: Vec<Tag> = sent.iter().map(|(_, t)| *t).collect();
            assert_eq!(t.tag_words(&words), gold);
        }
        assert_eq!(t.tag_words(&["12345"]), [Tag::CD]);
        assert_eq!(t.tag_words(&["the", "dog"]), t.tag_words(&["the", "dog"]));
    }

    #[test]
    fn model_file_round_trip() {
        let t = PerceptronTagger::train(&corpus(), TrainOptions::default());
        let s = t.to_model_string();
        let back = PerceptronTagger::from_model_str(&s).unwrap();
        assert_eq!(back.to_model_string(), s);
        let words = ["A", "dog", "saw", "the", "cat", "."];
        assert_eq!(back.tag_words(&words), t.tag_words(&words));
    }

    #[test]
    fn corrupt_model_rejected() {
        assert!(PerceptronTagger::from_model_str("garbage").is_err());
        assert!(PerceptronTagger::from_model_str("sasgrade-tagger\t9\nclasses\tNN\n").is_err());
        assert!(PerceptronTagger::from_model_str("sasgrade-tagger\t1\nclasses\tNN\nw\tbias\tNN\tabc\n").is_err());
    }
}
