//! Rule lexicons: negation cues, neg-raising/copula verbs, prune connectives,
//! and the antonym dictionary.
//!
//! Word lists are plain text, one entry per line; blank lines and lines
//! starting with `#` are skipped. Antonym files are two tab-separated columns.
//! The default inventories are compiled in from `data/`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::sentence::{normalize, Token};

const DEFAULT_CUES: &str = include_str!("../data/cues.txt");
const DEFAULT_NRP_COPULA: &str = include_str!("../data/nrp_copula.txt");
const DEFAULT_CONNECTIVES: &str = include_str!("../data/connectives.txt");
const DEFAULT_ANTONYMS: &str = include_str!("../data/antonyms.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected 2 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {word:?} is listed as its own antonym")]
    SelfAntonym { line: usize, word: String },
    #[error("line {line}: empty entry")]
    EmptyEntry { line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    Cue,
    NrpCopula,
    Connective,
    Antonym,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn read(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })
}

/// A set of normalized single-token forms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordList {
    entries: BTreeSet<String>,
}

impl WordList {
    pub fn parse(text: &str) -> WordList {
        let entries = content_lines(text).map(|(_, l)| normalize(l.trim())).collect();
        WordList { entries }
    }

    pub fn from_words<I, S>(words: I) -> WordList
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        WordList { entries: words.into_iter().map(|w| normalize(w.as_ref())).collect() }
    }

    pub fn contains(&self, norm: &str) -> bool {
        self.entries.contains(norm)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }
}

macro_rules! word_list_type {
    ($(#[$doc:meta])* $name:ident, $default:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq)]
        pub struct $name(pub WordList);

        impl $name {
            pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
                Ok(Self(WordList::parse(&read(path.as_ref())?)))
            }

            pub fn parse(text: &str) -> Self {
                Self(WordList::parse(text))
            }

            pub fn contains(&self, norm: &str) -> bool {
                self.0.contains(norm)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn iter(&self) -> impl Iterator<Item = &str> {
                self.0.iter()
            }
        }

        impl Default for $name {
            fn default() -> Self {
                Self::parse($default)
            }
        }
    };
}

word_list_type!(
    /// Explicit negation cues, matched against [`Token::norm`].
    CueLexicon,
    DEFAULT_CUES
);
word_list_type!(
    /// Neg-raising predicates and copula verbs skipped during anchor search.
    NrpCopulaList,
    DEFAULT_NRP_COPULA
);
word_list_type!(
    /// Contrast and coordination connectives that delimit a scope.
    ConnectiveList,
    DEFAULT_CONNECTIVES
);

impl CueLexicon {
    pub fn is_cue(&self, token: &Token) -> bool {
        self.contains(&token.norm)
    }
}

/// Maps a normalized word to a single antonym.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AntonymDict {
    pairs: BTreeMap<String, String>,
}

impl AntonymDict {
    pub fn load(path: impl AsRef<Path>) -> Result<AntonymDict, LexiconError> {
        AntonymDict::parse(&read(path.as_ref())?)
    }

    /// Parses `word<TAB>antonym` lines. When a word is listed more than once
    /// the first antonym is kept.
    pub fn parse(text: &str) -> Result<AntonymDict, LexiconError> {
        let mut pairs = BTreeMap::new();
        for (line, content) in content_lines(text) {
            let fields: Vec<&str> = content.split('\t').collect();
            if fields.len() != 2 {
                return Err(LexiconError::FieldCount { line, found: fields.len() });
            }
            let key = normalize(fields[0].trim());
            let value = fields[1].trim();
            if key.is_empty() || value.is_empty() {
                return Err(LexiconError::EmptyEntry { line });
            }
            if normalize(value) == key {
                return Err(LexiconError::SelfAntonym { line, word: key });
            }
            match pairs.get(&key) {
                Some(existing) => {
                    log::warn!("line {line}: duplicate antonym for {key:?}; keeping {existing:?}")
                }
                None => {
                    pairs.insert(key, value.to_string());
                }
            }
        }
        Ok(AntonymDict { pairs })
    }

    pub fn get(&self, norm: &str) -> Option<&str> {
        self.pairs.get(norm).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// The small sample dictionary bundled with the crate.
    pub fn bundled() -> AntonymDict {
        AntonymDict::parse(DEFAULT_ANTONYMS).expect("bundled antonym file is well formed")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lexicon {
    Cue(CueLexicon),
    NrpCopula(NrpCopulaList),
    Connective(ConnectiveList),
    Antonym(AntonymDict),
}

impl Lexicon {
    pub fn len(&self) -> usize {
        match self {
            Lexicon::Cue(l) => l.len(),
            Lexicon::NrpCopula(l) => l.len(),
            Lexicon::Connective(l) => l.len(),
            Lexicon::Antonym(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn load_lexicon(path: impl AsRef<Path>, kind: LexiconKind) -> Result<Lexicon, LexiconError> {
    let path = path.as_ref();
    Ok(match kind {
        LexiconKind::Cue => Lexicon::Cue(CueLexicon::load(path)?),
        LexiconKind::NrpCopula => Lexicon::NrpCopula(NrpCopulaList::load(path)?),
        LexiconKind::Connective => Lexicon::Connective(ConnectiveList::load(path)?),
        LexiconKind::Antonym => Lexicon::Antonym(AntonymDict::load(path)?),
    })
}

/// All lexicons the scope pipeline consults.
#[derive(Debug, Clone, Default)]
pub struct Lexicons {
    pub cues: CueLexicon,
    pub nrp: NrpCopulaList,
    pub connectives: ConnectiveList,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn default_cue_inventory() {
        let cues = CueLexicon::default();
        assert_eq!(cues.len(), 37);
        for w in ["dont", "never", "without", "rather", "shant", "hardly"] {
            assert!(cues.contains(w), "{w}");
        }
        assert!(cues.iter().all(|e| !e.is_empty() && !e.contains('\'') && e == e.to_lowercase()));
    }

    #[test]
    fn default_nrp_and_connectives() {
        let nrp = NrpCopulaList::default();
        assert_eq!(nrp.len(), 20);
        for w in ["think", "become", "was", "might"] {
            assert!(nrp.contains(w));
        }
        let conn = ConnectiveList::default();
        assert_eq!(conn.len(), 19);
        assert!(conn.contains("&") && conn.contains("but") && conn.contains("nowhere"));
    }

    #[test]
    fn is_cue_uses_norm() {
        let cues = CueLexicon::default();
        for (w, expected) in [("don't", true), ("Don't", true), ("dont", true), ("Never", true), ("knot", false)] {
            assert_eq!(cues.is_cue(&Token::new(0, w, None, "RB")), expected, "{w}");
        }
    }

    #[test]
    fn antonym_parsing() {
        let d = AntonymDict::parse("# c\nable\tincapable\n\nAble\tunable\n").unwrap();
        assert_eq!(d.get("able"), Some("incapable"));
        assert_eq!(d.len(), 1);
        assert!(matches!(
            AntonymDict::parse("able incapable").unwrap_err(),
            LexiconError::FieldCount { line: 1, found: 1 }
        ));
        assert!(matches!(
            AntonymDict::parse("x\ty\tz").unwrap_err(),
            LexiconError::FieldCount { line: 1, found: 3 }
        ));
        assert!(matches!(
            AntonymDict::parse("good\tGood").unwrap_err(),
            LexiconError::SelfAntonym { line: 1, .. }
        ));
        assert_eq!(AntonymDict::bundled().get("able"), Some("incapable"));
    }

    #[test]
    fn load_from_file() {
        let dir = std::env::temp_dir().join(format!("negscope-lex-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cues.txt");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "# comment\nDon't\ndont\nnever\n").unwrap();
        match load_lexicon(&path, LexiconKind::Cue).unwrap() {
            Lexicon::Cue(c) => {
                assert_eq!(c.len(), 2);
                assert!(c.contains("dont"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_lexicon(dir.join("missing.txt"), LexiconKind::Connective),
            Err(LexiconError::Io { .. })
        ));
        fs::remove_dir_all(&dir).ok();
    }
}
