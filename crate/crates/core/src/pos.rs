//! Coarse word classes and punctuation detection over PTB tags.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosClass {
    Noun,
    Adjective,
    Verb,
    Adverb,
    Other,
}

impl PosClass {
    pub fn from_tag(tag: &str) -> PosClass {
        match tag {
            "NN" | "NNS" | "NNP" | "NNPS" => PosClass::Noun,
            "JJ" | "JJR" | "JJS" => PosClass::Adjective,
            "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" | "MD" => PosClass::Verb,
            "RB" | "RBR" | "RBS" => PosClass::Adverb,
            _ => PosClass::Other,
        }
    }

    /// Noun, adjective, verb or adverb.
    pub fn is_content(self) -> bool {
        self != PosClass::Other
    }
}

const PUNCT_TAGS: [&str; 7] = [".", ",", ":", "''", "``", "-LRB-", "-RRB-"];

fn is_punct_char(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'..='\u{201F}' | '\u{2026}' | '\u{2013}' | '\u{2014}' | '\u{00A1}' | '\u{00BF}'
        )
}

/// A token is punctuation if its tag is a PTB punctuation tag or its surface
/// is made only of punctuation characters.
pub fn is_punctuation(surface: &str, pos: &str) -> bool {
    PUNCT_TAGS.contains(&pos) || (!surface.is_empty() && surface.chars().all(is_punct_char))
}
