use crate::textproc::{Tag, TaggedDoc, Token};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TemporalFeatures {
    pub past: f64,
    pub present: f64,
    pub future: f64,
    pub progressive: f64,
    pub perfect: f64,
    pub tense_switches: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tense {
    Past,
    Present,
    Future,
}

fn is_future_marker(t: &Token) -> bool {
    let w = t.lower();
    matches!(w.as_str(), "will" | "shall" | "'ll" | "won't" | "shan't") || w.ends_with("'ll")
}

/// The next token after `i` that is not an adverb or negation.
fn next_content(sentence: &[Token], i: usize) -> Option<&Token> {
    sentence[i + 1..]
        .iter()
        .find(|t| !(t.pos.is_some_and(Tag::is_adverb) || t.lower() == "not" || t.lower() == "n't"))
}

/// The tense of a sentence is taken from its first finite verb or future
/// marker; sentences without one have none.
fn sentence_tense(sentence: &[Token]) -> Option<Tense> {
    sentence.iter().find_map(|t| match t.pos? {
        Tag::VBD => Some(Tense::Past),
        Tag::VBP | Tag::VBZ => Some(Tense::Present),
        Tag::MD if is_future_marker(t) => Some(Tense::Future),
        _ => None,
    })
}

/// Tense and aspect counts. Past is VBD or VBN, present VBP or VBZ; future
/// is a will/shall marker followed by a base verb; progressive is a form of
/// "be" followed by VBG and perfect a form of "have" followed by VBN, with
/// adverbs and negation skipped in between. Tense switches count changes
/// between consecutive sentences that carry a tense.
pub fn temporal_features(doc: &TaggedDoc) -> TemporalFeatures {
    let mut out = TemporalFeatures::default();
    let mut last: Option<Tense> = None;
    for sentence in doc.sentences() {
        for (i, t) in sentence.iter().enumerate() {
            let Some(tag) = t.pos else { continue };
            match tag {
                Tag::VBD | Tag::VBN => out.past += 1.0,
                Tag::VBP | Tag::VBZ => out.present += 1.0,
                _ => {}
            }
            let next = next_content(sentence, i).and_then(|n| n.pos);
            if is_future_marker(t) && next == Some(Tag::VB) {
                out.future += 1.0;
            }
            let base = t.base();
            if base == "be" && next == Some(Tag::VBG) {
                out.progressive += 1.0;
            }
            if base == "have" && next == Some(Tag::VBN) {
                out.perfect += 1.0;
            }
        }
        if let Some(tense) = sentence_tense(sentence) {
            if last.is_some_and(|l| l != tense) {
                out.tense_switches += 1.0;
            }
            last = Some(tense);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::Preprocessor;

    fn features(text: &str) -> TemporalFeatures {
        temporal_features(&Preprocessor::default().process(text))
    }

    #[test]
    fn all_past_doc() {
        let f = features("The water evaporated. The salt stayed behind.");
        assert!(f.past >= 2.0);
        assert_eq!((f.present, f.future), (0.0, 0.0));
    }

    #[test]
    fn progressive_aspect() {
        assert!(features("He is passing judgement on the boy.").progressive >= 1.0);
    }

    #[test]
    fn perfect_and_future() {
        let f = features("They have finished. It will not rain.");
        assert_eq!(f.perfect, 1.0);
        assert_eq!(f.future, 1.0);
    }

    #[test]
    fn alternating_sentences_switch_each_time() {
        let f = features("The plant grew. It needs water. The roots dried. They need care.");
        assert_eq!(f.tense_switches, 3.0);
        let f = features("The plant grew. It needed water.");
        assert_eq!(f.tense_switches, 0.0);
    }
}
