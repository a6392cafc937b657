use std::collections::HashMap;

use super::{shape_tag, Tag};

/// Closed-class words and frequent irregular forms, as `word TAG` pairs.
const BUILTIN: &str = "
the DT a DT an DT this DT that DT these DT those DT each DT every DT no DT another DT some DT any DT either DT neither DT
all PDT both PDT half PDT
and CC or CC but CC nor CC yet CC plus CC
of IN in IN on IN at IN by IN for IN with IN from IN into IN onto IN about IN above IN below IN under IN over IN
through IN during IN before IN after IN between IN among IN against IN without IN within IN upon IN toward IN towards IN
across IN along IN around IN behind IN beside IN beyond IN near IN since IN until IN unless IN although IN though IN
because IN if IN whether IN while IN than IN like IN per IN via IN as IN so IN out IN off RP up RP down RP
to TO
i PRP you PRP he PRP she PRP it PRP we PRP they PRP me PRP him PRP her PRP$ us PRP them PRP myself PRP yourself PRP
himself PRP herself PRP itself PRP ourselves PRP themselves PRP one CD
my PRP$ your PRP$ his PRP$ its PRP$ our PRP$ their PRP$
who WP whom WP what WP whose WP$ which WDT whatever WDT where WRB when WRB why WRB how WRB
there EX
can MD could MD will MD would MD shall MD should MD may MD might MD must MD cannot MD 'll MD wo MD ca MD
is VBZ was VBD are VBP were VBD am VBP be VB been VBN being VBG 's VBZ 're VBP 'm VBP
has VBZ have VBP had VBD having VBG 've VBP 'd MD
does VBZ do VBP did VBD done VBN doing VBG
not RB n't RB never RB very RB also RB too RB then RB now RB just RB only RB even RB still RB already RB again RB
always RB often RB sometimes RB usually RB here RB however RB therefore RB thus RB instead RB else RB maybe RB perhaps RB
back RB almost RB quite RB rather RB really RB probably RB finally RB first RB later RB soon RB ever RB together RB away RB
more RBR less RBR most RBS least RBS better JJR worse JJR best JJS worst JJS
good JJ bad JJ new JJ old JJ big JJ small JJ large JJ different JJ same JJ other JJ important JJ many JJ much JJ few JJ
high JJ low JJ long JJ short JJ great JJ little JJ able JJ own JJ such JJ main JJ possible JJ clear JJ easy JJ hard JJ
several JJ certain JJ whole JJ true JJ happy JJ sure JJ real JJ free JJ full JJ open JJ human JJ dark JJ hot JJ cold JJ
two CD three CD four CD five CD six CD seven CD eight CD nine CD ten CD hundred CD thousand CD million CD
went VBD gone VBN came VBD saw VBD seen VBN took VBD taken VBN made VBD gave VBD given VBN got VBD gotten VBN
knew VBD known VBN thought VBD told VBD said VBD found VBD became VBD began VBD begun VBN wrote VBD written VBN
ran VBD felt VBD left VBD kept VBD brought VBD bought VBD held VBD stood VBD meant VBD met VBD paid VBD sat VBD
spoke VBD spoken VBN ate VBD eaten VBN grew VBD grown VBN drew VBD drawn VBN threw VBD thrown VBN broke VBD broken VBN
chose VBD chosen VBN fell VBD fallen VBN led VBD lost VBD sent VBD built VBD understood VBD taught VBD caught VBD
fought VBD won VBD wore VBD worn VBN drove VBD driven VBN rose VBD risen VBN flew VBD flown VBN hid VBD hidden VBN
shook VBD shaken VBN sang VBD sung VBN swam VBD heard VBD
get VB make VB take VB give VB go VB see VB know VB think VB say VB come VB find VB tell VB use VB want VB need VB
show VB help VB keep VB let VB put VB seem VB try VB leave VB call VB feel VB become VB believe VB mean VB
people NNS children NNS men NNS women NNS data NNS
yes UH oh UH well RB
";

/// Most-frequent-tag tagger with shape, suffix and short-context rules. Used
/// when no trained perceptron model is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconTagger {
    lexicon: HashMap<String, Tag>,
}

impl LexiconTagger {
    pub fn builtin() -> Self {
        let mut lexicon = HashMap::new();
        let mut it = BUILTIN.split_whitespace();
        while let (Some(w), Some(t)) = (it.next(), it.next()) {
            lexicon.entry(w.to_string()).or_insert_with(|| t.parse().expect("builtin tag"));
        }
        LexiconTagger { lexicon }
    }

    /// Built-in lexicon overlaid with the most frequent tag of every word in
    /// a tagged corpus (ties go to the lower tag index).
    pub fn from_corpus<'a>(sentences: impl IntoIterator<Item = &'a [(String, Tag)]>) -> Self {
        let mut counts: HashMap<String, [u32; 45]> = HashMap::new();
        for sent in sentences {
            for (w, t) in sent {
                counts.entry(w.to_lowercase()).or_insert([0; 45])[t.index()] += 1;
            }
        }
        let mut tagger = Self::builtin();
        for (w, c) in counts {
            let mut best = 0;
            for i in 1..c.len() {
                if c[i] > c[best] {
                    best = i;
                }
            }
            tagger.lexicon.insert(w, Tag::ALL[best]);
        }
        tagger
    }

    pub fn lookup(&self, word: &str) -> Option<Tag> {
        self.lexicon.get(word).copied()
    }

    pub fn tag_words(&self, words: &[&str]) -> Vec<Tag> {
        let mut tags: Vec<Tag> = Vec::with_capacity(words.len());
        let mut guessed = Vec::with_capacity(words.len());
        for (i, &w) in words.iter().enumerate() {
            let prev = tags.last().copied();
            let (tag, guess) = self.tag_one(w, i == 0 || prev == Some(Tag::OpenQuote), prev, &tags);
            tags.push(tag);
            guessed.push(guess);
        }
        revise_with_next(&mut tags, &guessed);
        tags
    }

    /// The tag, and whether it was guessed from the word's shape rather
    /// than looked up.
    fn tag_one(&self, word: &str, sentence_start: bool, prev: Option<Tag>, history: &[Tag]) -> (Tag, bool) {
        if let Some(t) = shape_tag(word) {
            return (t, false);
        }
        let lower = word.to_lowercase();
        let capitalized = word.chars().next().is_some_and(char::is_uppercase);
        if let Some(t) = self.lookup(&lower) {
            if capitalized && !sentence_start && !is_function_tag(t) {
                return (Tag::NNP, false);
            }
            return (after_context(t, prev, history), false);
        }
        if capitalized && !sentence_start {
            return (Tag::NNP, true);
        }
        let t = suffix_guess(&lower, prev, history);
        (after_context(t, prev, history), true)
    }
}

/// Right-context fixes for guessed nouns that read as verbs: an imperative
/// opening a sentence ("Explain how"), and a verb after a noun subject and
/// before its object ("the cell needs a", "the roots draw the").
fn revise_with_next(tags: &mut [Tag], guessed: &[bool]) {
    for i in 0..tags.len() {
        if !guessed[i] {
            continue;
        }
        let next = tags.get(i + 1).copied();
        let prev = i.checked_sub(1).map(|j| tags[j]);
        let object_follows = matches!(next, Some(Tag::DT | Tag::PRPS | Tag::PRP | Tag::CD));
        tags[i] = match (tags[i], prev) {
            (Tag::NN, None) if object_follows || matches!(next, Some(Tag::WRB | Tag::WP)) => Tag::VB,
            (Tag::NNS, Some(Tag::NN | Tag::NNP)) if object_follows => Tag::VBZ,
            (Tag::NN, Some(Tag::NN | Tag::NNS)) if object_follows || next == Some(Tag::TO) => Tag::VBP,
            (t, _) => t,
        };
    }
}

fn is_function_tag(t: Tag) -> bool {
    !(t.is_open_class() || t == Tag::CD)
}

fn suffix_guess(w: &str, prev: Option<Tag>, history: &[Tag]) -> Tag {
    let n = w.chars().count();
    if w.contains('-') {
        return Tag::JJ;
    }
    if n > 4 && w.ends_with("ing") {
        return Tag::VBG;
    }
    if n > 3 && w.ends_with("ed") {
        return if has_auxiliary(history) { Tag::VBN } else { Tag::VBD };
    }
    if n > 3 && w.ends_with("ly") {
        return Tag::RB;
    }
    for suf in ["tion", "sion", "ment", "ness", "ity", "ance", "ence", "ism", "ist", "ship", "hood", "er", "or"] {
        if n > suf.len() + 2 && w.ends_with(suf) {
            return Tag::NN;
        }
    }
    for suf in ["ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ary", "ish"] {
        if n > suf.len() + 2 && w.ends_with(suf) {
            return Tag::JJ;
        }
    }
    if n > 2 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return match prev {
            Some(Tag::PRP | Tag::NNP | Tag::WDT | Tag::WP) => Tag::VBZ,
            _ => Tag::NNS,
        };
    }
    // An unknown bare word right after a plural subject reads as a verb.
    if prev == Some(Tag::NNS) {
        return Tag::VBP;
    }
    Tag::NN
}

/// A `have` or `be` form among the last two tags.
fn has_auxiliary(history: &[Tag]) -> bool {
    history.iter().rev().take(2).any(|t| matches!(t, Tag::VBZ | Tag::VBP | Tag::VBD | Tag::VB | Tag::VBN))
}

fn after_context(t: Tag, prev: Option<Tag>, history: &[Tag]) -> Tag {
    let modal_before_adverbs = prev.is_some_and(Tag::is_adverb)
        && history.iter().rev().find(|h| !h.is_adverb()) == Some(&Tag::MD);
    if modal_before_adverbs && matches!(t, Tag::NN | Tag::VBP) {
        return Tag::VB;
    }
    match (t, prev) {
        (Tag::NN, Some(Tag::MD)) | (Tag::VBP, Some(Tag::TO | Tag::MD)) => Tag::VB,
        (Tag::VBD, Some(Tag::VBZ | Tag::VBP | Tag::VBD | Tag::VB | Tag::VBN | Tag::VBG)) => Tag::VBN,
        (Tag::VB, Some(Tag::DT | Tag::JJ | Tag::PRPS)) => Tag::NN,
        (Tag::VB, Some(Tag::PRP)) => Tag::VBP,
        (Tag::NN, Some(Tag::PRP)) if !history.is_empty() => Tag::VBP,
        _ => t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(s: &str) -> Vec<&'static str> {
        let words: Vec<&str> = s.split_whitespace().collect();
        LexiconTagger::builtin().tag_words(&words).into_iter().map(Tag::as_str).collect()
    }

    #[test]
    fn closed_class_and_shapes() {
        assert_eq!(tags("the 42 cats ran ."), ["DT", "CD", "NNS", "VBD", "."]);
        assert_eq!(tags("He is passing judgement"), ["PRP", "VBZ", "VBG", "NN"]);
        assert_eq!(tags("they will explain it"), ["PRP", "MD", "VB", "PRP"]);
        assert_eq!(tags("she has walked"), ["PRP", "VBZ", "VBN"]);
        assert_eq!(tags("I met Paul"), ["PRP", "VBD", "NNP"]);
        assert_eq!(tags("it will not rain"), ["PRP", "MD", "RB", "VB"]);
        assert_eq!(tags("plants absorb water"), ["NNS", "VBP", "NN"]);
    }

    #[test]
    fn verbs_recognised_from_what_follows() {
        assert_eq!(tags("Explain how cells divide ."), ["VB", "WRB", "NNS", "VBP", "."]);
        assert_eq!(tags("the evidence supports every claim"), ["DT", "NN", "VBZ", "DT", "NN"]);
        assert_eq!(tags("the solute and the gradient relate to the cell"), ["DT", "NN", "CC", "DT", "NN", "VBP", "TO", "DT", "NN"]);
        assert_eq!(tags("the cell membrane ."), ["DT", "NN", "NN", "."]);
    }

    #[test]
    fn corpus_overrides_builtin() {
        let sent: Vec<(String, Tag)> = vec![("blue".into(), Tag::NN), ("blue".into(), Tag::NN), ("blue".into(), Tag::JJ)];
        let t = LexiconTagger::from_corpus([sent.as_slice()]);
        assert_eq!(t.lookup("blue"), Some(Tag::NN));
        assert_eq!(t.lookup("the"), Some(Tag::DT));
    }
}
