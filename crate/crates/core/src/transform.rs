//! Negation-aware rewriting of token sequences for sentiment models.
//!
//! Tweet cleaning ([`normalize_tweet`]) is a fixed sequence of regex
//! rewrites, applied in this order:
//!
//! | pattern                          | replacement |
//! |----------------------------------|-------------|
//! | `#+(\w+)`                        | `$1`        |
//! | `https?://\S+` or `www\.\S+`     | `URL`       |
//! | `@+\w+` not preceded by `\w`/`@` | `MENTION`   |
//!
//! [`apply_transform`] then rewrites in-scope tokens either by `NOT_`
//! prefixing or by antonym substitution.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::AntonymDict;
use crate::scope::ScopeResult;
use crate::sentence::Sentence;

fn hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#+(\w+)").unwrap())
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S+").unwrap())
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(^|[^\w@])@+\w+").unwrap())
}

/// Replaces links with `URL`, user handles with `MENTION`, and strips `#`
/// from hashtags.
pub fn normalize_tweet(raw: &str) -> String {
    let mut text = raw.to_string();
    // a rewrite can expose a new match for an earlier pattern ("h#ttp://"),
    // so iterate to a fixpoint
    loop {
        let step = hashtag_re().replace_all(&text, "$1");
        let step = url_re().replace_all(&step, "URL");
        let step = mention_re().replace_all(&step, "${1}MENTION").into_owned();
        if step == text {
            return text;
        }
        text = step;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformMode {
    NotPrefix,
    /// Substitute the first in-scope word that has an antonym.
    Antonym,
    /// Substitute every in-scope word that has an antonym.
    AntonymAll,
}

impl std::str::FromStr for TransformMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "not-prefix" => Ok(TransformMode::NotPrefix),
            "antonym" => Ok(TransformMode::Antonym),
            "antonym-all" => Ok(TransformMode::AntonymAll),
            other => Err(format!("unknown transform mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub mode: TransformMode,
    /// When false, cue tokens are dropped in every mode.
    pub keep_cue: bool,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig { mode: TransformMode::NotPrefix, keep_cue: true }
    }
}

/// What happened to one input token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Unchanged,
    /// In scope but left as is (antonym modes only).
    InScope,
    Prefixed,
    Substituted { original: String },
    /// A cue removed because its negation was folded into a substitution.
    CueDeleted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformedSentence {
    pub tokens: Vec<String>,
    /// One entry per input token.
    pub provenance: Vec<Provenance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TransformedSentence {
    /// Input index of every output token.
    pub fn source_positions(&self) -> Vec<usize> {
        self.provenance
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Provenance::CueDeleted)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("scope index {index} out of range for sentence of {len} tokens")]
    InvalidIndex { index: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Action {
    Keep,
    InScope,
    Prefix,
    Substitute(String),
    Delete,
}

pub fn apply_transform(
    sentence: &Sentence,
    scopes: &[ScopeResult],
    antonyms: &AntonymDict,
    config: &TransformConfig,
) -> Result<TransformedSentence, TransformError> {
    let tokens = sentence.tokens();
    let n = tokens.len();
    for s in scopes {
        for &i in std::iter::once(&s.cue_index).chain(&s.scope) {
            if i >= n {
                return Err(TransformError::InvalidIndex { index: i, len: n });
            }
        }
    }

    let mut actions = vec![Action::Keep; n];
    let mut warnings = Vec::new();
    let mut ordered: Vec<&ScopeResult> = scopes.iter().collect();
    ordered.sort_by_key(|s| s.cue_index);

    let prefix_scope = |actions: &mut Vec<Action>, scope: &ScopeResult| {
        for &i in &scope.scope {
            if matches!(actions[i], Action::Keep | Action::InScope) {
                actions[i] = Action::Prefix;
            }
        }
    };

    match config.mode {
        TransformMode::NotPrefix => {
            for s in &ordered {
                prefix_scope(&mut actions, s);
            }
        }
        TransformMode::Antonym | TransformMode::AntonymAll => {
            let mut claimed: BTreeSet<usize> = BTreeSet::new();
            for s in &ordered {
                let mut hits = Vec::new();
                for &i in &s.scope {
                    let Some(antonym) = antonyms.get(&tokens[i].norm) else { continue };
                    if claimed.contains(&i) {
                        warnings.push(format!(
                            "cue {}: token {} already rewritten by an earlier cue",
                            s.cue_index, i
                        ));
                        continue;
                    }
                    hits.push((i, antonym));
                    if config.mode == TransformMode::Antonym {
                        break;
                    }
                }
                if hits.is_empty() {
                    prefix_scope(&mut actions, s);
                    continue;
                }
                for &i in &s.scope {
                    if actions[i] == Action::Keep {
                        actions[i] = Action::InScope;
                    }
                }
                for (i, antonym) in hits {
                    claimed.insert(i);
                    actions[i] = Action::Substitute(antonym.to_string());
                }
                if claimed.contains(&s.cue_index) {
                    warnings.push(format!(
                        "cue {} was rewritten by an earlier cue and is kept",
                        s.cue_index
                    ));
                } else {
                    claimed.insert(s.cue_index);
                    actions[s.cue_index] = Action::Delete;
                }
            }
        }
    }

    if !config.keep_cue {
        for s in &ordered {
            if actions[s.cue_index] == Action::Keep {
                actions[s.cue_index] = Action::Delete;
            }
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for (tok, action) in tokens.iter().zip(actions) {
        match action {
            Action::Keep => {
                out.push(tok.surface.clone());
                provenance.push(Provenance::Unchanged);
            }
            Action::InScope => {
                out.push(tok.surface.clone());
                provenance.push(Provenance::InScope);
            }
            Action::Prefix => {
                out.push(format!("NOT_{}", tok.surface));
                provenance.push(Provenance::Prefixed);
            }
            Action::Substitute(antonym) => {
                out.push(antonym);
                provenance.push(Provenance::Substituted { original: tok.surface.clone() });
            }
            Action::Delete => provenance.push(Provenance::CueDeleted),
        }
    }
    Ok(TransformedSentence { tokens: out, provenance, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope(cue: usize, idx: &[usize]) -> ScopeResult {
        ScopeResult { cue_index: cue, scope: idx.to_vec(), trace: Vec::new() }
    }

    fn words(ws: &[&str]) -> Sentence {
        let tagged: Vec<(&str, &str)> = ws.iter().map(|w| (*w, "X")).collect();
        Sentence::from_tagged("x", &tagged)
    }

    #[test]
    fn tweet_cleaning() {
        assert_eq!(normalize_tweet("see https://t.co/abc #Misleading"), "see URL Misleading");
        assert_eq!(normalize_tweet("@Username thanks"), "MENTION thanks");
        assert_eq!(normalize_tweet("no markup here"), "no markup here");
        assert_eq!(normalize_tweet("mail me at a@b.com"), "mail me at a@b.com");
        assert_eq!(normalize_tweet("go to www.example.com/x now"), "go to URL now");
        assert_eq!(normalize_tweet("h#ttps://x.y"), "URL");
        assert_eq!(normalize_tweet("##tag @@who"), "tag MENTION");
    }

    #[test]
    fn antonym_substitution_deletes_cue() {
        let s = words(&["won't", "be", "able", "to", "vote"]);
        let dict = AntonymDict::parse("able\tincapable").unwrap();
        let cfg = TransformConfig { mode: TransformMode::Antonym, keep_cue: true };
        let t = apply_transform(&s, &[scope(0, &[1, 2, 3, 4])], &dict, &cfg).unwrap();
        assert_eq!(t.tokens, ["be", "incapable", "to", "vote"]);
        assert_eq!(t.provenance[0], Provenance::CueDeleted);
        assert_eq!(t.provenance[2], Provenance::Substituted { original: "able".into() });
        assert_eq!(t.provenance[1], Provenance::InScope);
    }

    #[test]
    fn not_prefix() {
        let s = words(&["do", "not", "want", "to", "update", "it", "anymore"]);
        let cfg = TransformConfig::default();
        let t = apply_transform(&s, &[scope(1, &[2, 3, 4, 5, 6])], &AntonymDict::default(), &cfg).unwrap();
        assert_eq!(
            t.tokens.join(" "),
            "do not NOT_want NOT_to NOT_update NOT_it NOT_anymore"
        );
        // applying twice stacks prefixes
        let again = Sentence::from_tagged(
            "x",
            &t.tokens.iter().map(|w| (w.as_str(), "X")).collect::<Vec<_>>(),
        );
        let t2 = apply_transform(&again, &[scope(1, &[2])], &AntonymDict::default(), &cfg).unwrap();
        assert_eq!(t2.tokens[2], "NOT_NOT_want");
    }

    #[test]
    fn empty_scopes_are_identity() {
        let s = words(&["a", "b"]);
        let t = apply_transform(&s, &[], &AntonymDict::bundled(), &TransformConfig::default()).unwrap();
        assert_eq!(t.tokens, ["a", "b"]);
        assert!(t.provenance.iter().all(|p| *p == Provenance::Unchanged));
    }

    #[test]
    fn antonym_modes_and_fallback() {
        let dict = AntonymDict::parse("good\tbad\nhappy\tunhappy").unwrap();
        let s = words(&["not", "good", "or", "happy", ";", "never", "fine"]);
        let scopes = [scope(0, &[1, 2, 3]), scope(5, &[6])];
        let first = TransformConfig { mode: TransformMode::Antonym, keep_cue: true };
        let t = apply_transform(&s, &scopes, &dict, &first).unwrap();
        assert_eq!(t.tokens, ["bad", "or", "happy", ";", "never", "NOT_fine"]);
        let all = TransformConfig { mode: TransformMode::AntonymAll, keep_cue: true };
        let t = apply_transform(&s, &scopes, &dict, &all).unwrap();
        assert_eq!(t.tokens, ["bad", "or", "unhappy", ";", "never", "NOT_fine"]);
    }

    #[test]
    fn conflicting_substitution_first_cue_wins() {
        let dict = AntonymDict::parse("good\tbad").unwrap();
        let s = words(&["not", "never", "good"]);
        let cfg = TransformConfig { mode: TransformMode::Antonym, keep_cue: true };
        let t = apply_transform(&s, &[scope(1, &[2]), scope(0, &[1, 2])], &dict, &cfg).unwrap();
        // cue 0 claims "good"; cue 1 finds nothing left and falls back to prefixing
        assert_eq!(t.tokens, ["never", "bad"]);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn drop_cues_when_not_kept() {
        let s = words(&["not", "fine"]);
        let cfg = TransformConfig { mode: TransformMode::NotPrefix, keep_cue: false };
        let t = apply_transform(&s, &[scope(0, &[1])], &AntonymDict::default(), &cfg).unwrap();
        assert_eq!(t.tokens, ["NOT_fine"]);
    }

    #[test]
    fn invalid_index() {
        let s = words(&["not"]);
        assert_eq!(
            apply_transform(&s, &[scope(0, &[1])], &AntonymDict::default(), &TransformConfig::default())
                .unwrap_err(),
            TransformError::InvalidIndex { index: 1, len: 1 }
        );
    }
}
