use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

macro_rules! penn_tags {
    ($($variant:ident => $s:literal),+ $(,)?) => {
        /// The Penn Treebank part-of-speech tagset.
        #[allow(clippy::upper_case_acronyms)]
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Tag {
            $($variant),+
        }

        impl Tag {
            pub const ALL: &'static [Tag] = &[$(Tag::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Tag::$variant => $s),+
                }
            }
        }

        impl FromStr for Tag {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($s => Ok(Tag::$variant),)+
                    "-LRB-" => Ok(Tag::LeftParen),
                    "-RRB-" => Ok(Tag::RightParen),
                    _ => Err(format!("unknown part-of-speech tag {s:?}")),
                }
            }
        }
    };
}

penn_tags! {
    CC => "CC", CD => "CD", DT => "DT", EX => "EX", FW => "FW", IN => "IN",
    JJ => "JJ", JJR => "JJR", JJS => "JJS", LS => "LS", MD => "MD",
    NN => "NN", NNS => "NNS", NNP => "NNP", NNPS => "NNPS", PDT => "PDT",
    POS => "POS", PRP => "PRP", PRPS => "PRP$", RB => "RB", RBR => "RBR",
    RBS => "RBS", RP => "RP", SYM => "SYM", TO => "TO", UH => "UH",
    VB => "VB", VBD => "VBD", VBG => "VBG", VBN => "VBN", VBP => "VBP",
    VBZ => "VBZ", WDT => "WDT", WP => "WP", WPS => "WP$", WRB => "WRB",
    Hash => "#", Dollar => "$", OpenQuote => "``", CloseQuote => "''",
    LeftParen => "(", RightParen => ")", Comma => ",", Period => ".", Colon => ":",
}

impl Tag {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_noun(self) -> bool {
        matches!(self, Tag::NN | Tag::NNS | Tag::NNP | Tag::NNPS)
    }

    pub fn is_verb(self) -> bool {
        matches!(self, Tag::VB | Tag::VBD | Tag::VBG | Tag::VBN | Tag::VBP | Tag::VBZ)
    }

    pub fn is_adjective(self) -> bool {
        matches!(self, Tag::JJ | Tag::JJR | Tag::JJS)
    }

    pub fn is_adverb(self) -> bool {
        matches!(self, Tag::RB | Tag::RBR | Tag::RBS)
    }

    /// Nouns, verbs, adjectives and adverbs.
    pub fn is_open_class(self) -> bool {
        self.is_noun() || self.is_verb() || self.is_adjective() || self.is_adverb()
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_every_tag() {
        assert_eq!(Tag::ALL.len(), 45);
        for (i, &t) in Tag::ALL.iter().enumerate() {
            assert_eq!(t.index(), i);
            assert_eq!(t.as_str().parse::<Tag>().unwrap(), t);
        }
        assert_eq!("-LRB-".parse::<Tag>().unwrap(), Tag::LeftParen);
        assert!("XYZ".parse::<Tag>().is_err());
    }
}
