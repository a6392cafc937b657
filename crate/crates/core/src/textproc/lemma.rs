use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{Tag, TaggedDoc};
use crate::error::{Error, Result};

/// Coarse word class used to key the exception list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosClass {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

impl PosClass {
    pub fn of(tag: Option<Tag>) -> Self {
        match tag {
            Some(t) if t.is_noun() => PosClass::Noun,
            Some(t) if t.is_verb() || t == Tag::MD => PosClass::Verb,
            Some(t) if t.is_adjective() => PosClass::Adjective,
            Some(t) if t.is_adverb() => PosClass::Adverb,
            _ => PosClass::Other,
        }
    }
}

impl FromStr for PosClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "noun" => PosClass::Noun,
            "verb" => PosClass::Verb,
            "adj" => PosClass::Adjective,
            "adv" => PosClass::Adverb,
            "other" => PosClass::Other,
            _ => return Err(format!("unknown word class {s:?}")),
        })
    }
}

/// The inflection a suffix rule undoes, selected by tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inflection {
    Plural,
    ThirdPerson,
    Past,
    Gerund,
    Comparative,
    Superlative,
}

impl Inflection {
    pub fn of(tag: Option<Tag>) -> Option<Self> {
        Some(match tag? {
            Tag::NNS | Tag::NNPS => Inflection::Plural,
            Tag::VBZ => Inflection::ThirdPerson,
            Tag::VBD | Tag::VBN => Inflection::Past,
            Tag::VBG => Inflection::Gerund,
            Tag::JJR | Tag::RBR => Inflection::Comparative,
            Tag::JJS | Tag::RBS => Inflection::Superlative,
            _ => return None,
        })
    }
}

impl FromStr for Inflection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "plural" => Inflection::Plural,
            "third" => Inflection::ThirdPerson,
            "past" => Inflection::Past,
            "gerund" => Inflection::Gerund,
            "comparative" => Inflection::Comparative,
            "superlative" => Inflection::Superlative,
            _ => return Err(format!("unknown inflection {s:?}")),
        })
    }
}

/// Replace `suffix` with `replacement`. With `restore` set the stem is then
/// repaired: a doubled final consonant is undoubled (`runn` -> `run`) or a
/// dropped final `e` is put back (`mak` -> `make`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub inflection: Inflection,
    pub suffix: String,
    pub replacement: String,
    pub restore: bool,
}

/// Suffix rules and exceptions. Rules for an inflection are tried in order
/// and the first matching suffix wins, unless a vocabulary is attached, in
/// which case the first candidate found in the vocabulary wins.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRules {
    rules: Vec<SuffixRule>,
    exceptions: BTreeMap<(PosClass, String), String>,
    vocabulary: Option<BTreeSet<String>>,
}

const BUILTIN_RULES: &str = "
plural ss ss -
plural us us -
plural is is -
plural ies y -
plural sses ss -
plural ches ch -
plural shes sh -
plural xes x -
plural zes z -
plural s - -
third ies y -
third sses ss -
third ches ch -
third shes sh -
third xes x -
third zes z -
third oes o -
third ss ss -
third s - -
past ied y -
past eed ee -
past ed - restore
gerund eing ee -
gerund ing - restore
comparative ier y -
comparative er - restore
superlative iest y -
superlative est - restore
";

const BUILTIN_EXCEPTIONS: &str = "
verb is be|verb was be|verb were be|verb am be|verb are be|verb been be|verb being be|verb 's be|verb 're be|verb 'm be
verb has have|verb had have|verb having have|verb 've have|verb does do|verb did do|verb done do
verb went go|verb gone go|verb going go|verb goes go|verb said say|verb made make|verb ran run|verb saw see|verb seen see
verb took take|verb taken take|verb came come|verb gave give|verb given give|verb found find|verb thought think
verb knew know|verb known know|verb told tell|verb became become|verb began begin|verb begun begin|verb wrote write
verb written write|verb got get|verb gotten get|verb felt feel|verb left leave|verb kept keep|verb brought bring
verb bought buy|verb held hold|verb stood stand|verb meant mean|verb met meet|verb paid pay|verb sat sit|verb spoke speak
verb spoken speak|verb ate eat|verb eaten eat|verb grew grow|verb grown grow|verb drew draw|verb drawn draw
verb threw throw|verb thrown throw|verb broke break|verb broken break|verb chose choose|verb chosen choose
verb fell fall|verb fallen fall|verb led lead|verb lost lose|verb sent send|verb built build|verb understood understand
verb taught teach|verb caught catch|verb fought fight|verb won win|verb wore wear|verb worn wear|verb drove drive
verb driven drive|verb rose rise|verb risen rise|verb flew fly|verb flown fly|verb hid hide|verb hidden hide
verb shook shake|verb shaken shake|verb sang sing|verb sung sing|verb swam swim|verb heard hear|verb added add
verb adding add|verb dying die|verb lying lie|verb tying tie|verb needed need|verb seemed seem|verb used use|verb using use|verb caused cause|verb causing cause
verb 'd would|verb 'll will|verb ca can|verb wo will|verb n't not
noun men man|noun women woman|noun children child|noun feet foot|noun teeth tooth|noun mice mouse|noun geese goose
noun leaves leaf|noun lives life|noun knives knife|noun wives wife|noun halves half|noun wolves wolf|noun shelves shelf
noun analyses analysis|noun species species|noun series series|noun people people|noun data data|noun news news
noun bus bus|noun gas gas|noun class class|noun glass glass|noun process process
adj better good|adj best good|adj worse bad|adj worst bad|adj more more|adj most most|adj less less|adj least least
adv better well|adv best well|adv more more|adv most most|adv less less|adv least least
";

impl Default for LemmaRules {
    fn default() -> Self {
        Self::builtin()
    }
}

impl LemmaRules {
    pub fn builtin() -> Self {
        let rules = BUILTIN_RULES
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let c: Vec<&str> = l.split_whitespace().collect();
                SuffixRule {
                    inflection: c[0].parse().expect("builtin inflection"),
                    suffix: c[1].to_string(),
                    replacement: if c[2] == "-" { String::new() } else { c[2].to_string() },
                    restore: c[3] == "restore",
                }
            })
            .collect();
        let exceptions = BUILTIN_EXCEPTIONS
            .split(['|', '\n'])
            .filter(|e| !e.trim().is_empty())
            .map(|e| {
                let c: Vec<&str> = e.split_whitespace().collect();
                ((c[0].parse().expect("builtin class"), c[1].to_string()), c[2].to_string())
            })
            .collect();
        LemmaRules {
            rules,
            exceptions,
            vocabulary: None,
        }
    }

    pub fn new(rules: Vec<SuffixRule>, exceptions: impl IntoIterator<Item = (PosClass, String, String)>) -> Self {
        LemmaRules {
            rules,
            exceptions: exceptions.into_iter().map(|(c, w, l)| ((c, w), l)).collect(),
            vocabulary: None,
        }
    }

    /// Reads a rule file with tab-separated lines
    /// `rule <inflection> <suffix> <replacement> [restore]` and
    /// `exception <class> <word> <lemma>`. `#` starts a comment line.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rules = Vec::new();
        let mut exceptions = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| Error::parse(path, i + 1, m);
            let c: Vec<&str> = line.split('\t').collect();
            match c.as_slice() {
                ["rule", infl, suffix, repl, rest @ ..] if rest.len() <= 1 => rules.push(SuffixRule {
                    inflection: infl.parse().map_err(bad)?,
                    suffix: suffix.to_string(),
                    replacement: repl.to_string(),
                    restore: rest.first() == Some(&"restore"),
                }),
                ["exception", class, word, lemma] => {
                    exceptions.push((class.parse().map_err(bad)?, word.to_lowercase(), lemma.to_string()))
                }
                _ => return Err(bad(format!("unrecognised rule line {line:?}"))),
            }
        }
        Ok(Self::new(rules, exceptions))
    }

    /// Attaches a vocabulary used to choose between candidate lemmas.
    pub fn with_vocabulary(mut self, words: impl IntoIterator<Item = String>) -> Self {
        self.vocabulary = Some(words.into_iter().collect());
        self
    }

    pub fn lemma(&self, word: &str, tag: Option<Tag>) -> String {
        let lower = word.to_lowercase();
        let class = PosClass::of(tag);
        if let Some(l) = self.exceptions.get(&(class, lower.clone())) {
            return l.clone();
        }
        if matches!(tag, Some(Tag::NNP)) {
            return lower;
        }
        let Some(infl) = Inflection::of(tag) else {
            return lower;
        };
        let mut candidates = Vec::new();
        for rule in self.rules.iter().filter(|r| r.inflection == infl) {
            let Some(stem) = lower.strip_suffix(rule.suffix.as_str()) else {
                continue;
            };
            if stem.chars().count() < 2 && rule.suffix != rule.replacement {
                continue;
            }
            let base = format!("{stem}{}", rule.replacement);
            if rule.restore {
                candidates.push(restore_stem(&base));
                candidates.push(base.clone());
                candidates.push(format!("{base}e"));
            } else {
                candidates.push(base);
            }
            if self.vocabulary.is_none() {
                break;
            }
        }
        match &self.vocabulary {
            None => candidates.into_iter().next().unwrap_or(lower),
            Some(v) => candidates
                .iter()
                .find(|c| v.contains(*c))
                .or(candidates.first())
                .cloned()
                .unwrap_or(lower),
        }
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Repairs a stem left after removing `-ing`, `-ed`, `-er` or `-est`.
fn restore_stem(stem: &str) -> String {
    let cs: Vec<char> = stem.chars().collect();
    let n = cs.len();
    if n >= 3 && cs[n - 1] == cs[n - 2] && !is_vowel(cs[n - 1]) && !matches!(cs[n - 1], 'l' | 's' | 'z' | 'f') {
        return cs[..n - 1].iter().collect();
    }
    let ends_cvc = n >= 3
        && !is_vowel(cs[n - 1])
        && !matches!(cs[n - 1], 'w' | 'x' | 'y')
        && is_vowel(cs[n - 2])
        && !is_vowel(cs[n - 3]);
    let one_vowel_group = cs.iter().filter(|c| is_vowel(**c)).count() == 1;
    let needs_e = (ends_cvc && one_vowel_group && n <= 4)
        || (n == 2 && is_vowel(cs[0]) && !is_vowel(cs[1]))
        || matches!(cs[n - 1], 'v' | 'u')
        || (n >= 2 && matches!(cs[n - 1], 'c' | 'z') && !is_vowel(cs[n - 2]))
        || (n >= 2 && cs[n - 1] == 'g' && !is_vowel(cs[n - 2]) && cs[n - 2] != 'n')
        || (n >= 2 && cs[n - 1] == 'z' && is_vowel(cs[n - 2]))
        || (n >= 3 && cs[n - 1] == 'r' && matches!(cs[n - 2], 'u' | 'i')
            && (!is_vowel(cs[n - 3]) || (n >= 4 && cs[n - 4] == 'q' && cs[n - 3] == 'u')));
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

/// Sets every token's lemma. Tokens without a tag are lemmatized as
/// uninflected words.
pub fn lemmatize(doc: &TaggedDoc, rules: &LemmaRules) -> TaggedDoc {
    let mut out = doc.clone();
    for t in &mut out.tokens {
        t.lemma = rules.lemma(&t.surface, t.pos);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lem(word: &str, tag: Tag) -> String {
        LemmaRules::builtin().lemma(word, Some(tag))
    }

    #[test]
    fn rule_table_traces() {
        assert_eq!(lem("running", Tag::VBG), "run");
        assert_eq!(lem("measured", Tag::VBN), "measure");
        assert_eq!(lem("required", Tag::VBD), "require");
        assert_eq!(lem("poured", Tag::VBD), "pour");
        assert_eq!(lem("occurred", Tag::VBD), "occur");
        assert_eq!(lem("pandas", Tag::NNS), "panda");
        assert_eq!(lem("went", Tag::VBD), "go");
        assert_eq!(lem("making", Tag::VBG), "make");
        assert_eq!(lem("stopped", Tag::VBD), "stop");
        assert_eq!(lem("called", Tag::VBD), "call");
        assert_eq!(lem("studies", Tag::VBZ), "study");
        assert_eq!(lem("boxes", Tag::NNS), "box");
        assert_eq!(lem("glass", Tag::NN), "glass");
        assert_eq!(lem("dying", Tag::VBG), "die");
        assert_eq!(lem("bigger", Tag::JJR), "big");
        assert_eq!(lem("happiest", Tag::JJS), "happy");
        assert_eq!(lem("Paris", Tag::NNP), "paris");
        assert_eq!(lem("walking", Tag::VBG), "walk");
        assert_eq!(lem("realized", Tag::VBN), "realize");
        assert_eq!(lem("continued", Tag::VBD), "continue");
        assert_eq!(lem("having", Tag::VBG), "have");
        assert_eq!(lem("studying", Tag::VBG), "study");
        assert_eq!(lem("playing", Tag::VBG), "play");
        assert_eq!(lem("dancing", Tag::VBG), "dance");
        assert_eq!(lem("agreed", Tag::VBD), "agree");
        assert_eq!(lem("classes", Tag::NNS), "class");
    }

    #[test]
    fn exception_list_takes_precedence() {
        let rules = LemmaRules::new(
            vec![SuffixRule {
                inflection: Inflection::Past,
                suffix: "ent".into(),
                replacement: "ant".into(),
                restore: false,
            }],
            [(PosClass::Verb, "went".to_string(), "go".to_string())],
        );
        assert_eq!(rules.lemma("went", Some(Tag::VBD)), "go");
        assert_eq!(rules.lemma("spent", Some(Tag::VBD)), "spant");
    }

    #[test]
    fn vocabulary_picks_the_known_candidate() {
        let rules = LemmaRules::builtin().with_vocabulary(["create".to_string(), "decide".to_string()]);
        assert_eq!(rules.lemma("created", Some(Tag::VBD)), "create");
        assert_eq!(rules.lemma("deciding", Some(Tag::VBG)), "decide");
        assert_eq!(LemmaRules::builtin().lemma("created", Some(Tag::VBD)), "creat");
    }

    #[test]
    fn load_rule_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rules.tsv");
        fs::write(&p, "# test\nrule\tplural\ts\t\nexception\tverb\twent\tgo\n").unwrap();
        let r = LemmaRules::load(&p).unwrap();
        assert_eq!(r.lemma("cats", Some(Tag::NNS)), "cat");
        assert_eq!(r.lemma("went", Some(Tag::VBD)), "go");
        fs::write(&p, "rule\tdual\ts\t\n").unwrap();
        assert!(LemmaRules::load(&p).is_err());
    }
}
