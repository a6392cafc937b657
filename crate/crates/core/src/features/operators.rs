use crate::textproc::TaggedDoc;

pub const OPERATORS: [&str; 10] = ["and", "or", "not", "if", "else", "then", "unless", "whether", "although", "but"];

/// How far past an `if`, in words, a `then` or `else` may appear to form a
/// pair.
pub const PAIR_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OperatorCounts {
    /// Aligned with [`OPERATORS`].
    pub single: [f64; 10],
    pub if_then: f64,
    pub if_else: f64,
}

impl OperatorCounts {
    pub fn total(&self) -> f64 {
        self.single.iter().sum()
    }
}

fn operator_index(word: &str) -> Option<usize> {
    if word == "cannot" || word.ends_with("n't") {
        return Some(2);
    }
    OPERATORS.iter().position(|&o| o == word)
}

/// Counts each operator word (contractions ending in "n't" count as "not")
/// and the pairs formed by an `if` followed within [`PAIR_WINDOW`] words by
/// `then` or `else`. The window closes early at the next `if`.
pub fn logical_operator_counts(doc: &TaggedDoc) -> OperatorCounts {
    let words: Vec<String> = doc.words().map(|t| t.lower()).collect();
    let mut out = OperatorCounts::default();
    for (i, w) in words.iter().enumerate() {
        if let Some(k) = operator_index(w) {
            out.single[k] += 1.0;
        }
        if w != "if" {
            continue;
        }
        let window = words[i + 1..].iter().take(PAIR_WINDOW).take_while(|w| *w != "if");
        let (mut then, mut otherwise) = (false, false);
        for w in window {
            then |= w == "then";
            otherwise |= w == "else";
        }
        out.if_then += f64::from(u8::from(then));
        out.if_else += f64::from(u8::from(otherwise));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize_and_split;

    fn counts(text: &str) -> OperatorCounts {
        logical_operator_counts(&tokenize_and_split(text))
    }

    #[test]
    fn if_then_else_by_hand() {
        let c = counts("if x then y else z");
        assert_eq!(c.single[3], 1.0);
        assert_eq!(c.single[4], 1.0);
        assert_eq!(c.single[5], 1.0);
        assert_eq!((c.if_then, c.if_else), (1.0, 1.0));
        assert_eq!(c.total(), 3.0);
    }

    #[test]
    fn conditional_response() {
        let c = counts("If I used different amounts of water when washing the samples, the results would change.");
        assert!(c.single[3] >= 1.0);
    }

    #[test]
    fn operator_free_doc_is_zero() {
        assert_eq!(counts("The sample dried quickly."), OperatorCounts::default());
    }

    #[test]
    fn contractions_count_as_not() {
        let c = counts("It didn't work and we cannot repeat it, not today.");
        assert_eq!(c.single[2], 3.0);
        assert_eq!(c.single[0], 1.0);
    }

    #[test]
    fn window_limits() {
        let far = format!("if {} then", vec!["w"; PAIR_WINDOW].join(" "));
        assert_eq!(counts(&far).if_then, 0.0);
        let near = format!("if {} then", vec!["w"; PAIR_WINDOW - 1].join(" "));
        assert_eq!(counts(&near).if_then, 1.0);
        assert_eq!(counts("if a if b then c").if_then, 1.0);
    }
}
