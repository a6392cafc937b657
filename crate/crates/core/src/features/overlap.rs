use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Stopwords, SynonymLexicon};
use crate::textproc::{TaggedDoc, Token};

const AUXILIARIES: [&str; 3] = ["be", "have", "do"];

fn is_alphabetic(t: &Token) -> bool {
    t.surface.chars().any(char::is_alphabetic)
}

/// Lemmas of open-class, alphabetic, non-stopword tokens.
pub fn content_lemmas(doc: &TaggedDoc, stopwords: &Stopwords) -> BTreeSet<String> {
    doc.tokens
        .iter()
        .filter(|t| t.pos.is_some_and(|p| p.is_open_class()) && is_alphabetic(t))
        .map(Token::base)
        .filter(|l| !stopwords.contains(l))
        .collect()
}

pub fn noun_lemmas(doc: &TaggedDoc) -> BTreeSet<String> {
    doc.tokens
        .iter()
        .filter(|t| t.pos.is_some_and(|p| p.is_noun()) && is_alphabetic(t))
        .map(Token::base)
        .collect()
}

/// `(noun lemma, verb lemma)` pairs. Each noun is paired with the nearest
/// non-auxiliary verb in its sentence, the preceding one on a distance tie.
/// Auxiliaries are used only when the sentence has no other verb. Nouns in
/// verbless sentences contribute nothing.
pub fn argument_pairs(doc: &TaggedDoc) -> BTreeSet<(String, String)> {
    let mut pairs = BTreeSet::new();
    for sentence in doc.sentences() {
        let verbs: Vec<(usize, String)> = sentence
            .iter()
            .enumerate()
            .filter(|(_, t)| t.pos.is_some_and(|p| p.is_verb()))
            .map(|(i, t)| (i, t.base()))
            .collect();
        let main: Vec<&(usize, String)> = verbs.iter().filter(|(_, l)| !AUXILIARIES.contains(&l.as_str())).collect();
        let candidates: Vec<&(usize, String)> = if main.is_empty() { verbs.iter().collect() } else { main };
        if candidates.is_empty() {
            continue;
        }
        for (i, t) in sentence.iter().enumerate() {
            if !(t.pos.is_some_and(|p| p.is_noun()) && is_alphabetic(t)) {
                continue;
            }
            // min_by_key keeps the first minimum, and candidates are in
            // sentence order, so a tie picks the preceding verb.
            let (_, verb) = candidates.iter().min_by_key(|(j, _)| j.abs_diff(i)).expect("nonempty");
            pairs.insert((t.base(), verb.clone()));
        }
    }
    pairs
}

/// The sets a response is compared against, extracted once from the
/// question or the passage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub content: BTreeSet<String>,
    pub nouns: BTreeSet<String>,
    pub arguments: BTreeSet<(String, String)>,
}

impl ReferenceProfile {
    pub fn from_doc(doc: &TaggedDoc, stopwords: &Stopwords) -> Self {
        ReferenceProfile {
            content: content_lemmas(doc, stopwords),
            nouns: noun_lemmas(doc),
            arguments: argument_pairs(doc),
        }
    }
}

fn covered<T: Ord>(reference: &BTreeSet<T>, response: &BTreeSet<T>) -> f64 {
    if reference.is_empty() {
        return 0.0;
    }
    reference.intersection(response).count() as f64 / reference.len() as f64
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PromptOverlap {
    pub coverage: f64,
    pub jaccard: f64,
}

/// Share of the question's content lemmas found in the response, and the
/// Jaccard index of the two content-lemma sets.
pub fn prompt_overlap(doc: &TaggedDoc, question: &ReferenceProfile, stopwords: &Stopwords) -> PromptOverlap {
    let response = content_lemmas(doc, stopwords);
    let union = question.content.union(&response).count();
    PromptOverlap {
        coverage: covered(&question.content, &response),
        jaccard: if union == 0 {
            0.0
        } else {
            question.content.intersection(&response).count() as f64 / union as f64
        },
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LexicalOverlap {
    pub noun: f64,
    pub argument: f64,
    pub content: f64,
}

/// Overlap with the reading passage, each as the share of the passage's
/// items found in the response. All zero when the prompt has no passage.
pub fn lexical_overlap(
    doc: &TaggedDoc,
    passage: Option<&ReferenceProfile>,
    synonyms: Option<&SynonymLexicon>,
    stopwords: &Stopwords,
) -> LexicalOverlap {
    let Some(passage) = passage else {
        return LexicalOverlap::default();
    };
    let mut content = content_lemmas(doc, stopwords);
    if let Some(syn) = synonyms {
        let expanded: Vec<String> = content.iter().flat_map(|w| syn.synonyms(w)).map(str::to_string).collect();
        content.extend(expanded);
    }
    LexicalOverlap {
        noun: covered(&passage.nouns, &noun_lemmas(doc)),
        argument: covered(&passage.arguments, &argument_pairs(doc)),
        content: covered(&passage.content, &content),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{Preprocessor, Tag};

    fn doc(text: &str) -> TaggedDoc {
        Preprocessor::default().process(text)
    }

    fn profile(text: &str) -> ReferenceProfile {
        ReferenceProfile::from_doc(&doc(text), &Stopwords::default())
    }

    #[test]
    fn three_of_five_passage_nouns() {
        let p = profile("The dog chased the cat across the garden to the fence by the river.");
        assert_eq!(p.nouns.len(), 5);
        let r = doc("A dog and a cat sat in a garden.");
        let o = lexical_overlap(&r, Some(&p), None, &Stopwords::default());
        assert!((o.noun - 0.6).abs() < 1e-12);
    }

    #[test]
    fn four_of_five_named_nouns() {
        let p = profile("Leonard went back to school. Leonard was a runner, and Paul watched him at the track.");
        assert_eq!(p.nouns, ["leonard", "paul", "runner", "school", "track"].map(String::from).into());
        let r = doc("Paul learned that Leonard was a runner when he was in school.");
        let o = lexical_overlap(&r, Some(&p), None, &Stopwords::default());
        assert!((o.noun - 0.8).abs() < 1e-12);
    }

    #[test]
    fn response_equal_to_passage_is_full_overlap() {
        let text = "Plants absorb water through their roots. The leaves release oxygen.";
        let o = lexical_overlap(&doc(text), Some(&profile(text)), None, &Stopwords::default());
        assert_eq!((o.noun, o.argument, o.content), (1.0, 1.0, 1.0));
    }

    #[test]
    fn missing_passage_is_zero() {
        assert_eq!(lexical_overlap(&doc("Anything."), None, None, &Stopwords::default()), LexicalOverlap::default());
    }

    #[test]
    fn synonyms_extend_content_overlap() {
        let p = profile("The big house.");
        let r = doc("The large house.");
        let sw = Stopwords::default();
        let plain = lexical_overlap(&r, Some(&p), None, &sw);
        let syn = SynonymLexicon::from_pairs([("large", "big")]);
        let expanded = lexical_overlap(&r, Some(&p), Some(&syn), &sw);
        assert!((plain.content - 0.5).abs() < 1e-12);
        assert_eq!(expanded.content, 1.0);
    }

    #[test]
    fn coverage_by_set_arithmetic() {
        let question = ReferenceProfile {
            content: ["rose", "conversation", "character", "describe"].map(String::from).into(),
            ..ReferenceProfile::default()
        };
        let mut r = crate::textproc::tokenize_and_split("rose character");
        for t in &mut r.tokens {
            t.pos = Some(Tag::NN);
        }
        let o = prompt_overlap(&r, &question, &Stopwords::default());
        assert_eq!(o.coverage, 0.5);
        assert_eq!(o.jaccard, 0.5);
    }

    #[test]
    fn verbatim_and_disjoint_prompt_overlap() {
        let q = "Describe how the author develops the main character.";
        let sw = Stopwords::default();
        assert_eq!(prompt_overlap(&doc(q), &profile(q), &sw).coverage, 1.0);
        assert_eq!(prompt_overlap(&doc("Bananas grow quickly."), &profile(q), &sw), PromptOverlap::default());
    }

    #[test]
    fn arguments_pair_nouns_with_nearest_main_verb() {
        let args = argument_pairs(&doc("The students have measured the water."));
        assert!(args.contains(&("student".into(), "measure".into())));
        assert!(args.contains(&("water".into(), "measure".into())));
        assert_eq!(args.len(), 2);
    }
}
