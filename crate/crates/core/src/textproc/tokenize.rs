use super::{TaggedDoc, Token};

/// Lowercased abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "no", "fig", "gen", "col", "lt", "sgt", "capt",
    "rev", "hon", "gov", "sen", "rep", "inc", "ltd", "co", "corp", "dept", "approx", "e.g", "i.e", "cf", "al",
];

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '’' | '-')
}

fn is_numeric_joiner(c: char) -> bool {
    matches!(c, '.' | ',')
}

fn is_terminator(surface: &str) -> bool {
    !surface.is_empty() && surface.chars().all(|c| matches!(c, '.' | '!' | '?'))
}

fn is_closer(surface: &str) -> bool {
    matches!(surface, "\"" | "”" | "'" | "’" | ")" | "]" | "''")
}

/// Splits text into word and punctuation tokens and groups them into
/// sentences.
///
/// Words are maximal alphanumeric runs, allowing internal apostrophes and
/// hyphens (`couldn't`, `well-known`) and internal `.`/`,` between digits
/// (`3.5`, `1,000`). Every other non-space character forms a token, with runs
/// of the same character kept together (`...`). A sentence ends at a `.`, `!`
/// or `?` token followed by whitespace and an uppercase letter, unless the
/// period follows a known abbreviation or a single letter.
pub fn tokenize_and_split(text: &str) -> TaggedDoc {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        if c.is_alphanumeric() {
            while j < chars.len() {
                let cj = chars[j].1;
                let next_alnum = chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphanumeric());
                if cj.is_alphanumeric() {
                    j += 1;
                } else if (is_joiner(cj) && next_alnum)
                    || (is_numeric_joiner(cj)
                        && chars[j - 1].1.is_ascii_digit()
                        && chars.get(j + 1).is_some_and(|&(_, n)| n.is_ascii_digit()))
                {
                    j += 2;
                } else {
                    break;
                }
            }
        } else {
            while j < chars.len() && chars[j].1 == c {
                j += 1;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        spans.push((start, end));
        i = j;
    }

    let mut tokens: Vec<Token> = spans
        .iter()
        .enumerate()
        .map(|(position, &(s, e))| Token {
            surface: text[s..e].to_string(),
            lemma: String::new(),
            pos: None,
            sentence_index: 0,
            position,
            offset: s,
        })
        .collect();

    let mut bounds = Vec::new();
    let mut start = 0;
    let mut k = 0;
    while k < tokens.len() {
        if is_terminator(&tokens[k].surface) && !guarded(&tokens, k) {
            let mut end = k + 1;
            while end < tokens.len() && is_closer(&tokens[end].surface) && spans[end].0 == spans[end - 1].1 {
                end += 1;
            }
            if let Some(next) = tokens.get(end) {
                let spaced = spans[end].0 > spans[end - 1].1;
                if spaced && next.surface.chars().next().is_some_and(char::is_uppercase) {
                    bounds.push((start, end));
                    start = end;
                    k = end;
                    continue;
                }
            }
        }
        k += 1;
    }
    if start < tokens.len() {
        bounds.push((start, tokens.len()));
    }
    for (si, &(s, e)) in bounds.iter().enumerate() {
        for t in &mut tokens[s..e] {
            t.sentence_index = si;
        }
    }
    TaggedDoc {
        tokens,
        sentence_bounds: bounds,
    }
}

/// A period directly after an abbreviation or a single letter (an initial).
fn guarded(tokens: &[Token], k: usize) -> bool {
    if tokens[k].surface != "." || k == 0 {
        return false;
    }
    let prev = &tokens[k - 1];
    if prev.offset + prev.surface.len() != tokens[k].offset {
        return false;
    }
    let lower = prev.surface.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str()) || (lower.chars().count() == 1 && lower.chars().all(char::is_alphabetic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(doc: &TaggedDoc) -> Vec<&str> {
        doc.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn two_short_sentences() {
        let doc = tokenize_and_split("Paul ran. He won!");
        assert_eq!(surfaces(&doc), ["Paul", "ran", ".", "He", "won", "!"]);
        assert_eq!(doc.sentence_bounds, [(0, 3), (3, 6)]);
        assert_eq!(doc.tokens[4].sentence_index, 1);
    }

    #[test]
    fn empty_text() {
        let doc = tokenize_and_split("");
        assert!(doc.tokens.is_empty());
        assert!(doc.sentence_bounds.is_empty());
        assert!(tokenize_and_split("  \n\t ").tokens.is_empty());
    }

    #[test]
    fn abbreviation_guard() {
        let doc = tokenize_and_split("Mr. Leonard ran.");
        assert_eq!(surfaces(&doc), ["Mr", ".", "Leonard", "ran", "."]);
        assert_eq!(doc.sentence_bounds.len(), 1);
        let doc = tokenize_and_split("J. K. Rowling wrote it. Then she rested.");
        assert_eq!(doc.sentence_bounds.len(), 2);
    }

    #[test]
    fn lowercase_after_period_does_not_split() {
        assert_eq!(tokenize_and_split("the pH was 7. then it rose").sentence_bounds.len(), 1);
    }

    #[test]
    fn words_with_internal_punctuation() {
        let doc = tokenize_and_split("It couldn't cost $1,000.50 -- a well-known fact...");
        assert_eq!(
            surfaces(&doc),
            ["It", "couldn't", "cost", "$", "1,000.50", "--", "a", "well-known", "fact", "..."]
        );
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        let doc = tokenize_and_split("He said \"stop.\" Then he left.");
        assert_eq!(doc.sentence_bounds, [(0, 6), (6, 10)]);
    }

    proptest! {
        #[test]
        fn tokens_partition_non_whitespace(text in "[a-zA-Z0-9 .,!?'\"()\\-\n]{0,80}") {
            let doc = tokenize_and_split(&text);
            let joined: String = doc.tokens.iter().map(|t| t.surface.as_str()).collect();
            let stripped: String = text.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(joined, stripped);
            let mut expect = 0;
            for &(s, e) in &doc.sentence_bounds {
                prop_assert_eq!(s, expect);
                prop_assert!(e > s);
                expect = e;
            }
            prop_assert_eq!(expect, doc.tokens.len());
            for (i, t) in doc.tokens.iter().enumerate() {
                prop_assert_eq!(t.position, i);
                prop_assert_eq!(&text[t.offset..t.offset + t.surface.len()], t.surface.as_str());
            }
        }
    }
}
