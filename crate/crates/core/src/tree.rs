//! Penn-Treebank style constituency trees.
//!
//! Trees are read from labeled bracketings such as
//! `(S (NP (PRP I)) (VP (VBP agree)))`. A pre-terminal `(TAG word)` becomes a
//! single leaf node carrying both the POS tag (as its label) and the word, so
//! every leaf spans exactly one token.
//!
//! Nodes live in an arena owned by [`ParseTree`]; [`NodeId`] indexes into it.
//! Parent links, leaf order and spans are computed once at parse time.

use std::fmt;

use thiserror::Error;

/// Errors produced while reading a bracketed tree. Offsets are byte offsets
/// into the input string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty input")]
    EmptyInput,
    #[error("unbalanced parentheses at offset {offset}")]
    Unbalanced { offset: usize },
    #[error("empty constituent at offset {offset}")]
    EmptyConstituent { offset: usize },
    #[error("constituent without label at offset {offset}")]
    MissingLabel { offset: usize },
    #[error("unexpected token {token:?} at offset {offset}")]
    UnexpectedToken { offset: usize, token: String },
    #[error("tree has no leaves after removing empty elements")]
    NoLeaves,
    #[error("leaf index {index} out of range for tree with {len} leaves")]
    InvalidLeaf { index: usize, len: usize },
}

/// Index of a node inside its [`ParseTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// Half-open token interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    /// Bare constituent or POS tag (functional suffixes stripped).
    pub label: String,
    pub children: Vec<NodeId>,
    /// Surface word; present exactly on leaves.
    pub leaf_text: Option<String>,
    pub span: Span,
}

impl ParseNode {
    pub fn is_leaf(&self) -> bool {
        self.leaf_text.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    nodes: Vec<ParseNode>,
    parents: Vec<Option<NodeId>>,
    leaves: Vec<NodeId>,
    root: NodeId,
}

/// A tag pattern accepted by [`ParseTree::ancestor_with_tag`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TagPattern {
    Exact(String),
    /// `SBAR*`: SBAR and SBARQ.
    SbarClass,
    /// `S*`: S, SQ and SINV.
    ClauseClass,
    /// Any other `X*` pattern: plain prefix match.
    Prefix(String),
}

impl TagPattern {
    /// Parses `"NP"`, `"SBAR*"`, `"S*"` or a generic `"X*"` prefix pattern.
    pub fn parse(pattern: &str) -> TagPattern {
        match pattern {
            "SBAR*" => TagPattern::SbarClass,
            "S*" => TagPattern::ClauseClass,
            p => match p.strip_suffix('*') {
                Some(prefix) => TagPattern::Prefix(prefix.to_string()),
                None => TagPattern::Exact(p.to_string()),
            },
        }
    }

    pub fn matches(&self, tag: &str) -> bool {
        match self {
            TagPattern::Exact(t) => t == tag,
            TagPattern::SbarClass => matches!(tag, "SBAR" | "SBARQ"),
            TagPattern::ClauseClass => matches!(tag, "S" | "SQ" | "SINV"),
            TagPattern::Prefix(p) => tag.starts_with(p.as_str()),
        }
    }
}

impl fmt::Display for TagPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagPattern::Exact(t) => f.write_str(t),
            TagPattern::SbarClass => f.write_str("SBAR*"),
            TagPattern::ClauseClass => f.write_str("S*"),
            TagPattern::Prefix(p) => write!(f, "{p}*"),
        }
    }
}

/// Builds a pattern set from string forms, e.g. `patterns(&["NP", "S*"])`.
pub fn patterns(forms: &[&str]) -> Vec<TagPattern> {
    forms.iter().map(|f| TagPattern::parse(f)).collect()
}

/// Strips functional tags and indices: `NP-SBJ-1` → `NP`, `NP=2` → `NP`.
/// Labels that start with `-` (`-NONE-`, `-LRB-`) are kept whole.
pub fn bare_tag(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(0) | None => label,
        Some(i) => &label[..i],
    }
}

// Intermediate tree produced by the reader before arena layout.
#[derive(Debug)]
enum Raw {
    Leaf { tag: String, word: String },
    Inner { label: String, children: Vec<Raw> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(text: &str) -> Vec<(usize, Lexeme<'_>)> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push((i, Lexeme::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Lexeme::Close));
                i += 1;
            }
            b if b.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !matches!(bytes[i], b'(' | b')')
                    && !bytes[i].is_ascii_whitespace()
                {
                    i += 1;
                }
                out.push((start, Lexeme::Atom(&text[start..i])));
            }
        }
    }
    out
}

struct Reader<'a> {
    lexemes: Vec<(usize, Lexeme<'a>)>,
    pos: usize,
    // offset reported when input ends inside an open constituent
    eof_offset: usize,
}

impl<'a> Reader<'a> {
    fn peek(&self) -> Option<&(usize, Lexeme<'a>)> {
        self.lexemes.get(self.pos)
    }

    fn next(&mut self) -> Result<(usize, Lexeme<'a>), TreeError> {
        let item = self
            .lexemes
            .get(self.pos)
            .cloned()
            .ok_or(TreeError::Unbalanced { offset: self.eof_offset })?;
        self.pos += 1;
        Ok(item)
    }

    /// Reads one labeled constituent; the opening paren is already consumed.
    fn constituent(&mut self, open_offset: usize) -> Result<Option<Raw>, TreeError> {
        let label = match self.next()? {
            (_, Lexeme::Atom(a)) => a,
            (off, Lexeme::Open) => return Err(TreeError::MissingLabel { offset: off }),
            (_, Lexeme::Close) => return Err(TreeError::EmptyConstituent { offset: open_offset }),
        };
        match self.next()? {
            (_, Lexeme::Atom(word)) => {
                match self.next()? {
                    (_, Lexeme::Close) => {}
                    (off, Lexeme::Atom(a)) => {
                        return Err(TreeError::UnexpectedToken { offset: off, token: a.to_string() })
                    }
                    (off, Lexeme::Open) => {
                        return Err(TreeError::UnexpectedToken { offset: off, token: "(".into() })
                    }
                }
                if label == "-NONE-" {
                    return Ok(None);
                }
                Ok(Some(Raw::Leaf { tag: bare_tag(label).to_string(), word: word.to_string() }))
            }
            (_, Lexeme::Close) => Err(TreeError::EmptyConstituent { offset: open_offset }),
            (off, Lexeme::Open) => {
                let mut children = Vec::new();
                if let Some(child) = self.constituent(off)? {
                    children.push(child);
                }
                loop {
                    match self.next()? {
                        (_, Lexeme::Close) => break,
                        (off, Lexeme::Open) => {
                            if let Some(child) = self.constituent(off)? {
                                children.push(child);
                            }
                        }
                        (off, Lexeme::Atom(a)) => {
                            return Err(TreeError::UnexpectedToken {
                                offset: off,
                                token: a.to_string(),
                            })
                        }
                    }
                }
                if children.is_empty() {
                    // only empty elements below: drop the whole constituent
                    return Ok(None);
                }
                Ok(Some(Raw::Inner { label: bare_tag(label).to_string(), children }))
            }
        }
    }
}

impl ParseTree {
    /// Reads a single bracketed tree.
    ///
    /// An unlabeled outer wrapper `( ... )` is accepted: with one child it is
    /// stripped, with several it becomes a node labeled `ROOT`. Empty elements
    /// tagged `-NONE-` are dropped together with any constituent left empty.
    pub fn parse(text: &str) -> Result<ParseTree, TreeError> {
        let lexemes = lex(text);
        if lexemes.is_empty() {
            return Err(TreeError::EmptyInput);
        }
        let eof_offset = text.trim_end().len().saturating_sub(1);
        let mut reader = Reader { lexemes, pos: 0, eof_offset };

        let raw = match reader.next()? {
            (open, Lexeme::Open) => match reader.peek() {
                Some((_, Lexeme::Open)) => {
                    let mut children = Vec::new();
                    loop {
                        match reader.next()? {
                            (_, Lexeme::Close) => break,
                            (off, Lexeme::Open) => {
                                if let Some(c) = reader.constituent(off)? {
                                    children.push(c);
                                }
                            }
                            (off, Lexeme::Atom(a)) => {
                                return Err(TreeError::UnexpectedToken {
                                    offset: off,
                                    token: a.to_string(),
                                })
                            }
                        }
                    }
                    match children.len() {
                        0 => return Err(TreeError::NoLeaves),
                        1 => children.pop().unwrap(),
                        _ => Raw::Inner { label: "ROOT".into(), children },
                    }
                }
                _ => reader.constituent(open)?.ok_or(TreeError::NoLeaves)?,
            },
            (off, Lexeme::Close) => return Err(TreeError::Unbalanced { offset: off }),
            (off, Lexeme::Atom(a)) => {
                return Err(TreeError::UnexpectedToken { offset: off, token: a.to_string() })
            }
        };
        if let Some((off, lexeme)) = reader.peek() {
            return Err(match lexeme {
                Lexeme::Close => TreeError::Unbalanced { offset: *off },
                Lexeme::Open => TreeError::UnexpectedToken { offset: *off, token: "(".into() },
                Lexeme::Atom(a) => TreeError::UnexpectedToken { offset: *off, token: a.to_string() },
            });
        }
        Ok(Self::layout(raw))
    }

    fn layout(raw: Raw) -> ParseTree {
        let mut tree = ParseTree {
            nodes: Vec::new(),
            parents: Vec::new(),
            leaves: Vec::new(),
            root: NodeId(0),
        };
        tree.root = tree.push(raw, None);
        tree
    }

    fn push(&mut self, raw: Raw, parent: Option<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len());
        let start = self.leaves.len();
        match raw {
            Raw::Leaf { tag, word } => {
                self.nodes.push(ParseNode {
                    label: tag,
                    children: Vec::new(),
                    leaf_text: Some(word),
                    span: Span { start, end: start + 1 },
                });
                self.parents.push(parent);
                self.leaves.push(id);
            }
            Raw::Inner { label, children } => {
                self.nodes.push(ParseNode {
                    label,
                    children: Vec::new(),
                    leaf_text: None,
                    span: Span { start, end: start },
                });
                self.parents.push(parent);
                let kids: Vec<NodeId> = children.into_iter().map(|c| self.push(c, Some(id))).collect();
                let node = &mut self.nodes[id.0];
                node.children = kids;
                node.span.end = self.leaves.len();
            }
        }
        id
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ParseNode {
        &self.nodes[id.0]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parents[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf nodes in left-to-right order.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf(&self, index: usize) -> Result<NodeId, TreeError> {
        self.leaves
            .get(index)
            .copied()
            .ok_or(TreeError::InvalidLeaf { index, len: self.leaves.len() })
    }

    pub fn leaf_texts(&self) -> impl Iterator<Item = &str> + '_ {
        self.leaves.iter().map(|&l| self.nodes[l.0].leaf_text.as_deref().unwrap_or(""))
    }

    /// Iterator over the strict ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors { tree: self, next: self.parent(id) }
    }

    /// Nearest strict ancestor of leaf `leaf_index` whose label matches any of
    /// `accepted`.
    pub fn ancestor_with_tag(
        &self,
        leaf_index: usize,
        accepted: &[TagPattern],
    ) -> Result<Option<NodeId>, TreeError> {
        let leaf = self.leaf(leaf_index)?;
        Ok(self
            .ancestors(leaf)
            .find(|&a| accepted.iter().any(|p| p.matches(&self.node(a).label))))
    }

    /// The child of `ancestor` whose span contains `leaf_index`.
    pub fn child_containing(&self, ancestor: NodeId, leaf_index: usize) -> Option<NodeId> {
        self.node(ancestor)
            .children
            .iter()
            .copied()
            .find(|&c| self.node(c).span.contains(leaf_index))
    }

    /// Canonical bracketing: `(LABEL child ...)`, leaves as `(TAG word)`.
    pub fn to_bracketed(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        let node = self.node(id);
        out.push('(');
        out.push_str(&node.label);
        if let Some(word) = &node.leaf_text {
            out.push(' ');
            out.push_str(word);
        }
        for &c in &node.children {
            out.push(' ');
            self.write_node(c, out);
        }
        out.push(')');
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bracketed())
    }
}

impl std::str::FromStr for ParseTree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParseTree::parse(s)
    }
}

pub struct Ancestors<'a> {
    tree: &'a ParseTree,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let cur = self.next?;
        self.next = self.tree.parent(cur);
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(tree: &ParseTree, ids: &[NodeId]) -> Vec<String> {
        ids.iter().map(|&i| tree.node(i).label.clone()).collect()
    }

    #[test]
    fn parses_two_leaf_sentence() {
        let tree = ParseTree::parse("(S (NP (PRP I)) (VP (VBP agree)))").unwrap();
        assert_eq!(tree.leaf_count(), 2);
        assert_eq!(tree.node(tree.root()).span, Span { start: 0, end: 2 });
        assert_eq!(tree.leaf_texts().collect::<Vec<_>>(), ["I", "agree"]);
    }

    #[test]
    fn preterminals_are_leaves() {
        let tree = ParseTree::parse("(NP (DT no) (NNS details))").unwrap();
        let root = tree.node(tree.root());
        assert_eq!(root.label, "NP");
        assert_eq!(labels(&tree, &root.children), ["DT", "NNS"]);
        assert!(root.children.iter().all(|&c| tree.node(c).is_leaf()));
    }

    #[test]
    fn unbalanced_reports_offset() {
        assert_eq!(
            ParseTree::parse("((S (NP (PRP I))").unwrap_err(),
            TreeError::Unbalanced { offset: 15 }
        );
        assert_eq!(
            ParseTree::parse("(NP (DT a)))").unwrap_err(),
            TreeError::Unbalanced { offset: 11 }
        );
    }

    #[test]
    fn structural_errors() {
        assert_eq!(ParseTree::parse("   ").unwrap_err(), TreeError::EmptyInput);
        assert_eq!(
            ParseTree::parse("(S (NP) (VP (VB go)))").unwrap_err(),
            TreeError::EmptyConstituent { offset: 3 }
        );
        assert_eq!(
            ParseTree::parse("(S ((NP (PRP I))))").unwrap_err(),
            TreeError::MissingLabel { offset: 4 }
        );
        assert_eq!(
            ParseTree::parse("(S ())").unwrap_err(),
            TreeError::EmptyConstituent { offset: 3 }
        );
        assert!(matches!(
            ParseTree::parse("(NP the dog)").unwrap_err(),
            TreeError::UnexpectedToken { offset: 8, .. }
        ));
    }

    #[test]
    fn wrapper_is_stripped_or_rooted() {
        let t = ParseTree::parse("( (S (NP (PRP I)) (VP (VBP agree))) )").unwrap();
        assert_eq!(t.node(t.root()).label, "S");
        let t = ParseTree::parse("((NP (PRP I)) (VP (VBP agree)))").unwrap();
        assert_eq!(t.node(t.root()).label, "ROOT");
        let t = ParseTree::parse("(ROOT (S (VP (VB go))))").unwrap();
        assert_eq!(t.node(t.root()).label, "ROOT");
    }

    #[test]
    fn functional_tags_stripped_and_empty_elements_dropped() {
        let t = ParseTree::parse(
            "(S (NP-SBJ-1 (PRP I)) (VP (VBD left) (NP (-NONE- *T*-1))) (. .))",
        )
        .unwrap();
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(t.to_bracketed(), "(S (NP (PRP I)) (VP (VBD left)) (. .))");
        assert_eq!(bare_tag("-LRB-"), "-LRB-");
        assert_eq!(bare_tag("NP=2"), "NP");
        assert_eq!(bare_tag("PRP$"), "PRP$");
    }

    #[test]
    fn ancestor_lookup() {
        let t = ParseTree::parse("(NP (DT no) (NNS details))").unwrap();
        let np = t.ancestor_with_tag(1, &patterns(&["NP"])).unwrap();
        assert_eq!(np, Some(t.root()));
        assert_eq!(t.ancestor_with_tag(1, &patterns(&["VP"])).unwrap(), None);
        assert_eq!(
            t.ancestor_with_tag(2, &patterns(&["NP"])).unwrap_err(),
            TreeError::InvalidLeaf { index: 2, len: 2 }
        );
    }

    #[test]
    fn ancestor_for_adjective_in_worked_example() {
        let t = ParseTree::parse(
            "(S (S (VP (TO To) (VP (VB be) (ADJP (JJ honest))))) (NP (PRP I)) \
             (VP (VBP am) (RB not) (ADJP (JJ angry) (CC but) (JJ upset))))",
        )
        .unwrap();
        let accepted = patterns(&["NP", "VP", "ADJP", "SBAR*", "S*"]);
        let adjp = t.ancestor_with_tag(6, &accepted).unwrap().unwrap();
        assert_eq!(t.node(adjp).label, "ADJP");
        assert_eq!(t.node(adjp).span, Span { start: 6, end: 9 });
    }

    #[test]
    fn tag_classes() {
        assert!(TagPattern::parse("SBAR*").matches("SBARQ"));
        assert!(!TagPattern::parse("S*").matches("SBAR"));
        assert!(TagPattern::parse("S*").matches("SINV"));
        assert!(TagPattern::parse("NN*").matches("NNS"));
        assert!(!TagPattern::parse("NP").matches("NPS"));
    }
}
