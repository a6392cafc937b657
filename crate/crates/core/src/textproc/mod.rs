//! Deterministic linguistic preprocessing: tokenization, sentence
//! splitting, spelling normalization, part-of-speech tagging and
//! lemmatization.

mod lemma;
mod lexicon_tagger;
mod perceptron;
mod spell;
mod tag;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use lemma::{lemmatize, Inflection, LemmaRules, PosClass, SuffixRule};
pub use lexicon_tagger::LexiconTagger;
pub use perceptron::{read_tagged_corpus, PerceptronTagger, TaggedSentence, TrainOptions};
pub use spell::{correct_spelling, osa_distance, Lexicon, SpellCorrector};
pub use tag::Tag;
pub use tokenize::tokenize_and_split;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Lowercased base form; empty until [`lemmatize`] runs.
    pub lemma: String,
    pub pos: Option<Tag>,
    pub sentence_index: usize,
    pub position: usize,
    /// Byte offset of the surface in the source text.
    pub offset: usize,
}

impl Token {
    /// True when the token contains at least one letter or digit.
    pub fn is_word(&self) -> bool {
        self.surface.chars().any(char::is_alphanumeric)
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }

    /// The lemma if set, the lowercased surface otherwise.
    pub fn base(&self) -> String {
        if self.lemma.is_empty() {
            self.lower()
        } else {
            self.lemma.clone()
        }
    }
}

/// A token sequence with sentence boundaries as half-open index ranges that
/// partition the tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedDoc {
    pub tokens: Vec<Token>,
    pub sentence_bounds: Vec<(usize, usize)>,
}

impl TaggedDoc {
    pub fn sentences(&self) -> impl Iterator<Item = &[Token]> {
        self.sentence_bounds.iter().map(|&(s, e)| &self.tokens[s..e])
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word())
    }

    pub fn tags(&self) -> impl Iterator<Item = Option<Tag>> + '_ {
        self.tokens.iter().map(|t| t.pos)
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A tagger: either a trained averaged perceptron or the lexicon fallback.
#[derive(Debug, Clone)]
pub enum Tagger {
    Perceptron(PerceptronTagger),
    Lexicon(LexiconTagger),
}

impl Default for Tagger {
    fn default() -> Self {
        Tagger::Lexicon(LexiconTagger::builtin())
    }
}

impl Tagger {
    pub fn tag_words(&self, words: &[&str]) -> Vec<Tag> {
        match self {
            Tagger::Perceptron(t) => t.tag_words(words),
            Tagger::Lexicon(t) => t.tag_words(words),
        }
    }
}

/// Tags every token of `doc`, one sentence at a time. Token count and
/// surfaces are left untouched.
pub fn pos_tag(doc: &TaggedDoc, tagger: &Tagger) -> TaggedDoc {
    let mut out = doc.clone();
    for &(s, e) in &doc.sentence_bounds {
        let words: Vec<&str> = doc.tokens[s..e].iter().map(|t| t.surface.as_str()).collect();
        for (tok, tag) in out.tokens[s..e].iter_mut().zip(tagger.tag_words(&words)) {
            tok.pos = Some(tag);
        }
    }
    out
}

/// The full preprocessing chain applied to every response, question and
/// passage: tokenize, correct spelling, tag, lemmatize.
#[derive(Debug, Clone, Default)]
pub struct Preprocessor {
    pub tagger: Tagger,
    pub speller: Option<SpellCorrector>,
    pub lemma_rules: LemmaRules,
}

impl Preprocessor {
    pub fn process(&self, text: &str) -> TaggedDoc {
        let mut doc = tokenize_and_split(text);
        if let Some(speller) = &self.speller {
            doc = correct_spelling(&doc, speller);
        }
        let doc = pos_tag(&doc, &self.tagger);
        lemmatize(&doc, &self.lemma_rules)
    }
}

/// Classifies a token by shape alone: numbers are `CD` and punctuation gets
/// its punctuation tag. Returns `None` for ordinary words.
pub(crate) fn shape_tag(word: &str) -> Option<Tag> {
    let mut chars = word.chars();
    let first = chars.next()?;
    if word.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') && first.is_ascii_digit() {
        return Some(Tag::CD);
    }
    if word.chars().any(char::is_alphanumeric) {
        return None;
    }
    Some(match first {
        '.' | '!' | '?' => Tag::Period,
        ',' => Tag::Comma,
        ':' | ';' | '-' | '\u{2013}' | '\u{2014}' | '\u{2026}' => Tag::Colon,
        '(' | '[' | '{' => Tag::LeftParen,
        ')' | ']' | '}' => Tag::RightParen,
        '"' | '“' | '`' | '‘' => Tag::OpenQuote,
        '”' | '\'' | '’' => Tag::CloseQuote,
        '$' | '€' | '£' => Tag::Dollar,
        '#' => Tag::Hash,
        _ => Tag::SYM,
    })
}
