//! Negation scope resolution over constituency trees.
//!
//! For a true cue the resolver:
//!
//! 1. scans right of the cue for the first noun, adjective, verb or adverb,
//!    skipping neg-raising predicates and copulas ([`find_anchor`]);
//! 2. climbs from that anchor to the nearest ancestor whose tag is accepted
//!    for the anchor's word class and prunes trailing clausal or modifier
//!    children of it ([`raw_scope`]);
//! 3. aligns the resulting leaf set with six ordered post-processing rules
//!    ([`post_process`]).
//!
//! Accepted ancestors: adjectives `NP VP ADJP SBAR* S*`, nouns `NP SBAR* S*`,
//! verbs and adverbs `VP SBAR* S*`. Pruned right children: for nouns and
//! adjectives `PP VP ADVP SQ SINV SBAR*`, for verbs and adverbs
//! `SBAR* SQ SINV`. `SBAR*` covers SBAR and SBARQ; `S*` covers S, SQ, SINV.
//!
//! Every resolved scope is a contiguous run of token indices starting right
//! after the cue, and never contains the cue. The [`ScopeResult::trace`]
//! records each step, so replaying it from the raw leaf set reproduces the
//! final scope.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cue::CueOccurrence;
use crate::lexicon::{ConnectiveList, CueLexicon, Lexicons, NrpCopulaList};
use crate::pos::{is_punctuation, PosClass};
use crate::sentence::Sentence;
use crate::tree::{NodeId, ParseTree, TagPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Cue classified as false; no scope.
    FalseCue,
    /// No content word to the right of the cue.
    NoAnchor,
    /// No accepted ancestor above the anchor.
    NoAncestor,
    /// Leaves under the chosen ancestor after pruning.
    Raw,
    Connective,
    Punctuation,
    RemoveCue,
    RemoveBeforeCue,
    DefaultScope,
    FillGap,
    /// Punctuation baseline scope.
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub rule: Rule,
    pub before: Vec<usize>,
    pub after: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeResult {
    pub cue_index: usize,
    pub scope: Vec<usize>,
    pub trace: Vec<TraceRecord>,
}

impl ScopeResult {
    fn empty(cue_index: usize, rule: Rule, note: Option<String>) -> ScopeResult {
        ScopeResult {
            cue_index,
            scope: Vec::new(),
            trace: vec![TraceRecord { rule, before: Vec::new(), after: Vec::new(), note }],
        }
    }

    /// Contiguous, cue-free, and starting at `cue_index + 1` when non-empty.
    pub fn is_well_formed(&self, sentence_len: usize) -> bool {
        if self.scope.is_empty() {
            return true;
        }
        let first = self.scope[0];
        first == self.cue_index + 1
            && self.scope.windows(2).all(|w| w[1] == w[0] + 1)
            && *self.scope.last().unwrap() < sentence_len
    }

    /// Walks the trace from `start`, checking that each record begins where
    /// the previous one ended. Returns the final state.
    pub fn replay(&self, start: &[usize]) -> Option<Vec<usize>> {
        let mut current = start.to_vec();
        for record in &self.trace {
            if record.before != current {
                return None;
            }
            current = record.after.clone();
        }
        Some(current)
    }

    /// The leaf set the trace starts from: the `raw` record when present.
    pub fn trace_start(&self) -> Vec<usize> {
        self.trace.first().map(|r| r.before.clone()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScopeError {
    #[error("cue index {index} out of range for sentence of {len} tokens")]
    InvalidIndex { index: usize, len: usize },
    #[error("sentence {0:?} has no parse tree")]
    MissingTree(String),
    #[error("no accepted ancestor above token {anchor}")]
    NoAncestor { anchor: usize },
}

fn check_index(sentence: &Sentence, index: usize) -> Result<(), ScopeError> {
    if index < sentence.len() {
        Ok(())
    } else {
        Err(ScopeError::InvalidIndex { index, len: sentence.len() })
    }
}

/// First content word after the cue, skipping neg-raising and copula verbs
/// (matched on lowercased surface).
pub fn find_anchor(
    sentence: &Sentence,
    cue_index: usize,
    nrp: &NrpCopulaList,
) -> Result<Option<(usize, PosClass)>, ScopeError> {
    check_index(sentence, cue_index)?;
    for tok in &sentence.tokens()[cue_index + 1..] {
        let class = PosClass::from_tag(&tok.pos);
        if !class.is_content() {
            continue;
        }
        if class == PosClass::Verb && nrp.contains(&tok.surface.to_lowercase()) {
            continue;
        }
        return Ok(Some((tok.index, class)));
    }
    Ok(None)
}

fn accepted_ancestors(class: PosClass) -> Vec<TagPattern> {
    let forms: &[&str] = match class {
        PosClass::Adjective => &["NP", "VP", "ADJP", "SBAR*", "S*"],
        PosClass::Noun => &["NP", "SBAR*", "S*"],
        _ => &["VP", "SBAR*", "S*"],
    };
    crate::tree::patterns(forms)
}

fn pruned_children(class: PosClass) -> Vec<TagPattern> {
    let forms: &[&str] = match class {
        PosClass::Noun | PosClass::Adjective => &["PP", "VP", "ADVP", "SQ", "SINV", "SBAR*"],
        _ => &["SBAR*", "SQ", "SINV"],
    };
    crate::tree::patterns(forms)
}

/// The ancestor chosen for `anchor_index` together with the leaf indices
/// that remain after pruning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawScope {
    pub ancestor: NodeId,
    pub indices: Vec<usize>,
    /// Label of the first pruned child, if any.
    pub pruned_at: Option<String>,
}

/// Climbs from the anchor leaf to its class-specific ancestor and collects
/// its leaves. A prunable child to the right of the anchor's child ends the
/// scope there, together with all later siblings.
pub fn raw_scope(
    sentence: &Sentence,
    anchor_index: usize,
    class: PosClass,
) -> Result<RawScope, ScopeError> {
    let tree = sentence
        .tree()
        .ok_or_else(|| ScopeError::MissingTree(sentence.source_id().to_string()))?;
    check_index(sentence, anchor_index)?;
    raw_scope_in_tree(tree, anchor_index, class)
}

fn raw_scope_in_tree(
    tree: &ParseTree,
    anchor_index: usize,
    class: PosClass,
) -> Result<RawScope, ScopeError> {
    let ancestor = tree
        .ancestor_with_tag(anchor_index, &accepted_ancestors(class))
        .map_err(|_| ScopeError::InvalidIndex { index: anchor_index, len: tree.leaf_count() })?
        .ok_or(ScopeError::NoAncestor { anchor: anchor_index })?;
    let node = tree.node(ancestor);
    let anchor_child = tree
        .child_containing(ancestor, anchor_index)
        .expect("ancestor dominates the anchor");
    let anchor_end = tree.node(anchor_child).span.end;
    let prunable = pruned_children(class);

    let mut end = node.span.end;
    let mut pruned_at = None;
    for &child in &node.children {
        let c = tree.node(child);
        if c.span.start >= anchor_end && prunable.iter().any(|p| p.matches(&c.label)) {
            end = c.span.start;
            pruned_at = Some(c.label.clone());
            break;
        }
    }
    Ok(RawScope { ancestor, indices: (node.span.start..end).collect(), pruned_at })
}

struct TraceBuilder {
    records: Vec<TraceRecord>,
}

impl TraceBuilder {
    fn step(&mut self, rule: Rule, current: &mut Vec<usize>, next: Vec<usize>, note: Option<String>) {
        if next != *current {
            self.records.push(TraceRecord { rule, before: current.clone(), after: next.clone(), note });
            *current = next;
        }
    }

    fn note(&mut self, rule: Rule, current: &[usize], note: &str) {
        self.records.push(TraceRecord {
            rule,
            before: current.to_vec(),
            after: current.to_vec(),
            note: Some(note.to_string()),
        });
    }
}

/// Applies the six alignment rules, in order, to a raw leaf set.
///
/// 1. cut before the first connective after the cue (cue tokens are never
///    treated as connectives);
/// 2. cut before the first punctuation after the cue;
/// 3. drop the cue;
/// 4. drop everything before the cue;
/// 5. if nothing is left, default to the tokens after the cue up to and
///    including the first noun, adjective or verb;
/// 6. fill from the cue up to the scope, and any gaps inside it.
///
/// Only delimiters that follow the cue cut the scope; rules 3 and 4 remove
/// anything before it.
pub fn post_process(
    sentence: &Sentence,
    cue_index: usize,
    raw: &[usize],
    connectives: &ConnectiveList,
    cues: &CueLexicon,
) -> Result<ScopeResult, ScopeError> {
    let mut trace = TraceBuilder { records: Vec::new() };
    let mut current = raw.to_vec();
    post_process_into(sentence, cue_index, &mut current, connectives, cues, &mut trace)?;
    Ok(ScopeResult { cue_index, scope: current, trace: trace.records })
}

fn post_process_into(
    sentence: &Sentence,
    cue_index: usize,
    current: &mut Vec<usize>,
    connectives: &ConnectiveList,
    cues: &CueLexicon,
    trace: &mut TraceBuilder,
) -> Result<(), ScopeError> {
    check_index(sentence, cue_index)?;
    let tokens = sentence.tokens();
    for &i in current.iter() {
        check_index(sentence, i)?;
    }
    current.sort_unstable();
    current.dedup();

    // 1. connectives
    let cut = current.iter().copied().find(|&i| {
        let t = &tokens[i];
        i > cue_index && !cues.is_cue(t) && connectives.contains(&t.norm)
    });
    if let Some(cut) = cut {
        let next = current.iter().copied().filter(|&i| i < cut).collect();
        trace.step(Rule::Connective, current, next, Some(tokens[cut].surface.clone()));
    }

    // 2. punctuation
    let cut = current
        .iter()
        .copied()
        .find(|&i| i > cue_index && is_punctuation(&tokens[i].surface, &tokens[i].pos));
    if let Some(cut) = cut {
        let next = current.iter().copied().filter(|&i| i < cut).collect();
        trace.step(Rule::Punctuation, current, next, Some(tokens[cut].surface.clone()));
    }

    // 3. cue
    let next = current.iter().copied().filter(|&i| i != cue_index).collect();
    trace.step(Rule::RemoveCue, current, next, None);

    // 4. words before the cue
    let next = current.iter().copied().filter(|&i| i > cue_index).collect();
    trace.step(Rule::RemoveBeforeCue, current, next, None);

    // 5. default scope
    if current.is_empty() {
        let stop = tokens[cue_index + 1..].iter().find(|t| {
            matches!(PosClass::from_tag(&t.pos), PosClass::Noun | PosClass::Adjective | PosClass::Verb)
        });
        match stop {
            Some(t) => {
                let next = (cue_index + 1..=t.index).collect();
                trace.step(Rule::DefaultScope, current, next, Some("inclusive".into()));
            }
            None => trace.note(Rule::DefaultScope, current, "no noun, adjective or verb after cue"),
        }
    }

    // 6. contiguity from the cue onwards
    if let Some(&last) = current.last() {
        let next: Vec<usize> = (cue_index + 1..=last).collect();
        trace.step(Rule::FillGap, current, next, None);
    }
    Ok(())
}

/// Full pipeline for one cue occurrence.
pub fn detect_scope(
    sentence: &Sentence,
    occ: &CueOccurrence,
    lexicons: &Lexicons,
) -> Result<ScopeResult, ScopeError> {
    let cue_index = occ.token_index;
    check_index(sentence, cue_index)?;
    let tree = sentence
        .tree()
        .ok_or_else(|| ScopeError::MissingTree(sentence.source_id().to_string()))?;
    if !occ.is_true_cue {
        return Ok(ScopeResult::empty(cue_index, Rule::FalseCue, None));
    }

    let mut trace = TraceBuilder { records: Vec::new() };
    let mut current = Vec::new();
    match find_anchor(sentence, cue_index, &lexicons.nrp)? {
        None => trace.note(Rule::NoAnchor, &current, "no content word after cue"),
        Some((anchor, class)) => match raw_scope_in_tree(tree, anchor, class) {
            Ok(raw) => {
                let note = format!(
                    "anchor {} ({:?}) -> {}{}",
                    anchor,
                    class,
                    tree.node(raw.ancestor).label,
                    raw.pruned_at.map(|l| format!(", pruned at {l}")).unwrap_or_default()
                );
                trace.step(Rule::Raw, &mut current, raw.indices, Some(note));
            }
            Err(ScopeError::NoAncestor { .. }) => {
                trace.note(Rule::NoAncestor, &current, &format!("anchor {anchor} ({class:?})"))
            }
            Err(e) => return Err(e),
        },
    }
    post_process_into(
        sentence,
        cue_index,
        &mut current,
        &lexicons.connectives,
        &lexicons.cues,
        &mut trace,
    )?;
    Ok(ScopeResult { cue_index, scope: current, trace: trace.records })
}

/// Baseline: every token after the cue up to the next punctuation mark.
/// False cues get an empty scope unless `all_cues` is set.
pub fn punctuation_scope(sentence: &Sentence, occ: &CueOccurrence, all_cues: bool) -> ScopeResult {
    let cue_index = occ.token_index;
    if !occ.is_true_cue && !all_cues {
        return ScopeResult::empty(cue_index, Rule::FalseCue, None);
    }
    let scope: Vec<usize> = sentence
        .tokens()
        .iter()
        .skip(cue_index + 1)
        .take_while(|t| !is_punctuation(&t.surface, &t.pos))
        .map(|t| t.index)
        .collect();
    let trace = if scope.is_empty() {
        Vec::new()
    } else {
        vec![TraceRecord { rule: Rule::Baseline, before: Vec::new(), after: scope.clone(), note: None }]
    };
    ScopeResult { cue_index, scope, trace }
}
