//! Tokens and sentences, optionally paired with an aligned parse tree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::ParseTree;

/// Lowercases and removes ASCII and typographic apostrophes, so "Don't",
/// "don’t" and "dont" all normalize to "dont".
pub fn normalize(surface: &str) -> String {
    surface
        .chars()
        .filter(|&c| c != '\'' && c != '\u{2019}')
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub norm: String,
    pub lemma: String,
    pub pos: String,
}

impl Token {
    /// Builds a token; without a corpus lemma the normalized surface stands in.
    pub fn new(index: usize, surface: &str, lemma: Option<&str>, pos: &str) -> Token {
        let norm = normalize(surface);
        let lemma = match lemma {
            Some(l) if !l.is_empty() => l.to_string(),
            _ => norm.clone(),
        };
        Token { index, surface: surface.to_string(), norm, lemma, pos: pos.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("tree has {leaves} leaves but sentence has {tokens} tokens")]
    CountMismatch { leaves: usize, tokens: usize },
    #[error("leaf {index} is {leaf:?} but token is {token:?}")]
    SurfaceMismatch { index: usize, leaf: String, token: String },
    #[error("token at position {position} carries index {index}")]
    BadIndex { position: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
    tree: Option<ParseTree>,
    source_id: String,
}

impl Sentence {
    /// A sentence without a tree. Token indices must run 0..n.
    pub fn new(source_id: impl Into<String>, tokens: Vec<Token>) -> Result<Sentence, AlignError> {
        for (position, t) in tokens.iter().enumerate() {
            if t.index != position {
                return Err(AlignError::BadIndex { position, index: t.index });
            }
        }
        Ok(Sentence { tokens, tree: None, source_id: source_id.into() })
    }

    /// Convenience constructor from `(surface, pos)` pairs.
    pub fn from_tagged(source_id: impl Into<String>, tagged: &[(&str, &str)]) -> Sentence {
        let tokens = tagged
            .iter()
            .enumerate()
            .map(|(i, (w, p))| Token::new(i, w, None, p))
            .collect();
        Sentence { tokens, tree: None, source_id: source_id.into() }
    }

    /// Builds a sentence from a tree alone, taking tokens and tags from its leaves.
    pub fn from_tree(source_id: impl Into<String>, tree: ParseTree) -> Sentence {
        let tokens = tree
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, &leaf)| {
                let node = tree.node(leaf);
                Token::new(i, node.leaf_text.as_deref().unwrap_or(""), None, &node.label)
            })
            .collect();
        Sentence { tokens, tree: Some(tree), source_id: source_id.into() }
    }

    pub fn with_tree(self, tree: ParseTree) -> Result<Sentence, AlignError> {
        align(tree, self.tokens, self.source_id)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token(&self, index: usize) -> Option<&Token> {
        self.tokens.get(index)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tree(&self) -> Option<&ParseTree> {
        self.tree.as_ref()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }
}

/// Pairs a tree with a token sequence. Leaf text must equal token surface
/// byte for byte; no normalization is applied here.
pub fn align(
    tree: ParseTree,
    tokens: Vec<Token>,
    source_id: impl Into<String>,
) -> Result<Sentence, AlignError> {
    if tree.leaf_count() != tokens.len() {
        return Err(AlignError::CountMismatch { leaves: tree.leaf_count(), tokens: tokens.len() });
    }
    for (index, (leaf, token)) in tree.leaf_texts().zip(&tokens).enumerate() {
        if leaf.as_bytes() != token.surface.as_bytes() {
            return Err(AlignError::SurfaceMismatch {
                index,
                leaf: leaf.to_string(),
                token: token.surface.clone(),
            });
        }
    }
    let mut sentence = Sentence::new(source_id, tokens)?;
    sentence.tree = Some(tree);
    Ok(sentence)
}
