//! JSONL corpus and prediction records, and conversion to and from
//! *SEM 2012 style column files.
//!
//! A corpus line looks like
//!
//! ```json
//! {"id":"t1","tokens":[{"surface":"I","pos":"PRP"},{"surface":"do","pos":"VBP"}],
//!  "parse":"(S (NP (PRP I)) (VP (VBP do)))",
//!  "gold_cues":[{"index":2,"is_true_cue":true}],
//!  "gold_scopes":[{"cue_index":2,"token_indices":[3,4]}]}
//! ```
//!
//! `parse`, `gold_cues` and `gold_scopes` are optional. Fields this crate does
//! not know are kept in [`CorpusRecord::extra`] and written back unchanged.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::eval::{Annotation, CueLabel, GoldCue, PredictedScope};
use crate::scope::{ScopeResult, TraceRecord};
use crate::sentence::{align, AlignError, Sentence, Token};
use crate::tree::{ParseTree, TreeError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    pub pos: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldCueRecord {
    pub index: usize,
    pub is_true_cue: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldScopeRecord {
    pub cue_index: usize,
    pub token_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub tokens: Vec<TokenRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_cues: Option<Vec<GoldCueRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_scopes: Option<Vec<GoldScopeRecord>>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad parse tree: {0}")]
    Tree(#[from] TreeError),
    #[error("tree does not match tokens: {0}")]
    Align(#[from] AlignError),
    #[error("{field} index {index} out of range for {len} tokens")]
    IndexOutOfRange { field: &'static str, index: usize, len: usize },
    #[error("missing tree")]
    MissingTree,
    #[error("line {line}: {message}")]
    Columns { line: usize, message: String },
}

impl CorpusRecord {
    pub fn from_json_line(line: &str) -> Result<CorpusRecord, CorpusError> {
        let record: CorpusRecord = serde_json::from_str(line)?;
        record.validate()?;
        Ok(record)
    }

    /// Checks every gold index against the token count.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let len = self.tokens.len();
        let check = |field: &'static str, index: usize| {
            if index < len {
                Ok(())
            } else {
                Err(CorpusError::IndexOutOfRange { field, index, len })
            }
        };
        for c in self.gold_cues.iter().flatten() {
            check("gold_cues", c.index)?;
        }
        for s in self.gold_scopes.iter().flatten() {
            check("gold_scopes.cue_index", s.cue_index)?;
            for &i in &s.token_indices {
                check("gold_scopes.token_indices", i)?;
            }
        }
        Ok(())
    }

    pub fn to_tokens(&self) -> Vec<Token> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| Token::new(i, &t.surface, t.lemma.as_deref(), &t.pos))
            .collect()
    }

    /// The sentence with its tree attached when `parse` is present.
    pub fn sentence(&self) -> Result<Sentence, CorpusError> {
        let tokens = self.to_tokens();
        match &self.parse {
            Some(p) => Ok(align(ParseTree::parse(p)?, tokens, self.id.clone())?),
            None => Ok(Sentence::new(self.id.clone(), tokens)?),
        }
    }

    /// Gold cue sites. Without `gold_cues`, every annotated scope counts as a
    /// true cue.
    pub fn gold_cue_sites(&self) -> Vec<GoldCueRecord> {
        match &self.gold_cues {
            Some(c) => c.clone(),
            None => self
                .gold_scopes
                .iter()
                .flatten()
                .map(|s| GoldCueRecord { index: s.cue_index, is_true_cue: true })
                .collect(),
        }
    }

    fn gold_scope_for(&self, cue_index: usize) -> Vec<usize> {
        self.gold_scopes
            .iter()
            .flatten()
            .find(|s| s.cue_index == cue_index)
            .map(|s| {
                let mut v = s.token_indices.clone();
                v.sort_unstable();
                v.dedup();
                v
            })
            .unwrap_or_default()
    }

    pub fn gold_for_eval(&self) -> Vec<GoldCue> {
        self.gold_cue_sites()
            .into_iter()
            .map(|c| GoldCue {
                sentence_id: self.id.clone(),
                cue_index: c.index,
                sentence_len: self.tokens.len(),
                is_true_cue: c.is_true_cue,
                scope: if c.is_true_cue { self.gold_scope_for(c.index) } else { Vec::new() },
            })
            .collect()
    }

    pub fn gold_cue_labels(&self) -> Vec<CueLabel> {
        self.gold_cues
            .iter()
            .flatten()
            .map(|c| CueLabel { sentence_id: self.id.clone(), token_index: c.index, is_true_cue: c.is_true_cue })
            .collect()
    }

    /// This record's scopes viewed as one annotator's annotation.
    pub fn annotations(&self) -> Vec<Annotation> {
        self.gold_cue_sites()
            .into_iter()
            .filter(|c| c.is_true_cue)
            .map(|c| Annotation {
                sentence_id: self.id.clone(),
                cue_index: c.index,
                sentence_len: self.tokens.len(),
                scope: self.gold_scope_for(c.index),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Rules,
    Punctuation,
}

/// One detect output line: a cue occurrence with its scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeRecord {
    pub id: String,
    pub cue_index: usize,
    pub cue_form: String,
    pub is_true_cue: bool,
    pub score: f64,
    pub engine: Engine,
    pub scope: Vec<usize>,
    pub scope_tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

impl ScopeRecord {
    pub fn to_predicted(&self) -> PredictedScope {
        PredictedScope { sentence_id: self.id.clone(), cue_index: self.cue_index, scope: self.scope.clone() }
    }

    pub fn to_cue_label(&self) -> CueLabel {
        CueLabel { sentence_id: self.id.clone(), token_index: self.cue_index, is_true_cue: self.is_true_cue }
    }

    pub fn to_scope_result(&self) -> ScopeResult {
        ScopeResult { cue_index: self.cue_index, scope: self.scope.clone(), trace: Vec::new() }
    }
}

/// Rejected input line, written to the rejects file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectRecord {
    pub line: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub error: String,
}

/// Splits each leaf's constituent brackets into the per-token syntax column
/// used by *SEM files: `(S(NP*`, `*)`, ...
pub fn syntax_fragments(tree: &ParseTree) -> Vec<String> {
    tree.leaves()
        .iter()
        .enumerate()
        .map(|(i, &leaf)| {
            let ancestors: Vec<_> = tree.ancestors(leaf).collect();
            let mut frag = String::new();
            for &a in ancestors.iter().rev() {
                if tree.node(a).span.start == i {
                    frag.push('(');
                    frag.push_str(&tree.node(a).label);
                }
            }
            frag.push('*');
            for &a in &ancestors {
                if tree.node(a).span.end == i + 1 {
                    frag.push(')');
                }
            }
            frag
        })
        .collect()
}

/// Reads *SEM 2012 style column data: blank-line separated sentences,
/// tab-separated columns `chapter sentence token word lemma pos syntax`
/// followed by `cue scope event` triples per negation, or `***` when the
/// sentence has none. Multi-token cues are anchored at their first token.
pub fn read_starsem(text: &str) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut block: Vec<(usize, Vec<&str>)> = Vec::new();
    let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    for (line_no, line) in lines.chain(std::iter::once((0, ""))) {
        if line.trim().is_empty() {
            if !block.is_empty() {
                records.push(starsem_block(&block)?);
                block.clear();
            }
            continue;
        }
        block.push((line_no, line.split('\t').collect()));
    }
    Ok(records)
}

fn starsem_block(block: &[(usize, Vec<&str>)]) -> Result<CorpusRecord, CorpusError> {
    let (first_line, first) = &block[0];
    if first.len() < 8 {
        return Err(CorpusError::Columns { line: *first_line, message: format!("expected at least 8 columns, found {}", first.len()) });
    }
    let id = format!("{}/{}", first[0], first[1]);
    let no_negation = first.len() == 8 && first[7] == "***";
    let negations = if no_negation { 0 } else { (first.len() - 7) / 3 };
    if !no_negation && (first.len() - 7) % 3 != 0 {
        return Err(CorpusError::Columns { line: *first_line, message: "negation columns must come in triples".into() });
    }

    let mut tokens = Vec::new();
    let mut parse = String::new();
    let mut parse_ok = true;
    let mut cues: Vec<Option<usize>> = vec![None; negations];
    let mut scopes: Vec<Vec<usize>> = vec![Vec::new(); negations];
    for (i, (line_no, cols)) in block.iter().enumerate() {
        if cols.len() != first.len() {
            return Err(CorpusError::Columns { line: *line_no, message: format!("expected {} columns, found {}", first.len(), cols.len()) });
        }
        let (word, lemma, pos, syntax) = (cols[3], cols[4], cols[5], cols[6]);
        tokens.push(TokenRecord { surface: word.to_string(), lemma: Some(lemma.to_string()), pos: pos.to_string() });
        if word.contains(['(', ')']) || pos.contains(['(', ')']) || !syntax.contains('*') {
            parse_ok = false;
        } else {
            parse.push_str(&syntax.replacen('*', &format!("({pos} {word})"), 1));
        }
        for k in 0..negations {
            let (cue, scope) = (cols[7 + 3 * k], cols[8 + 3 * k]);
            if cue != "_" && cues[k].is_none() {
                cues[k] = Some(i);
            }
            if scope != "_" {
                scopes[k].push(i);
            }
        }
    }
    let mut gold_cues = Vec::new();
    let mut gold_scopes = Vec::new();
    for (k, cue) in cues.into_iter().enumerate() {
        let Some(cue) = cue else { continue };
        gold_cues.push(GoldCueRecord { index: cue, is_true_cue: true });
        let indices: Vec<usize> = scopes[k].iter().copied().filter(|&i| i != cue).collect();
        gold_scopes.push(GoldScopeRecord { cue_index: cue, token_indices: indices });
    }
    let parse = if parse_ok && !parse.is_empty() {
        match ParseTree::parse(&parse) {
            Ok(t) => Some(t.to_bracketed()),
            Err(e) => {
                log::warn!("{id}: syntax column does not form a tree ({e}); parse dropped");
                None
            }
        }
    } else {
        None
    };
    Ok(CorpusRecord {
        id,
        tokens,
        parse,
        gold_cues: Some(gold_cues),
        gold_scopes: Some(gold_scopes),
        extra: Map::new(),
    })
}

/// Writes records as *SEM style columns. Only true gold cues are exported.
pub fn write_starsem(records: &[CorpusRecord]) -> Result<String, CorpusError> {
    let mut out = String::new();
    for r in records {
        r.validate()?;
        let (chapter, sent) = match r.id.rsplit_once('/') {
            Some((c, s)) => (c.to_string(), s.to_string()),
            None => (r.id.clone(), "0".to_string()),
        };
        let syntax = match &r.parse {
            Some(p) => {
                let tree = ParseTree::parse(p)?;
                if tree.leaf_count() != r.tokens.len() {
                    return Err(AlignError::CountMismatch { leaves: tree.leaf_count(), tokens: r.tokens.len() }.into());
                }
                syntax_fragments(&tree)
            }
            None => vec!["*".to_string(); r.tokens.len()],
        };
        let negations: Vec<(usize, Vec<usize>)> = r
            .gold_cue_sites()
            .into_iter()
            .filter(|c| c.is_true_cue)
            .map(|c| (c.index, r.gold_scope_for(c.index)))
            .collect();
        for (i, t) in r.tokens.iter().enumerate() {
            let lemma = t.lemma.clone().unwrap_or_else(|| t.surface.to_lowercase());
            let mut cols = vec![chapter.clone(), sent.clone(), i.to_string(), t.surface.clone(), lemma, t.pos.clone(), syntax[i].clone()];
            if negations.is_empty() {
                cols.push("***".into());
            }
            for (cue, scope) in &negations {
                cols.push(if *cue == i { t.surface.clone() } else { "_".into() });
                cols.push(if scope.contains(&i) { t.surface.clone() } else { "_".into() });
                cols.push("_".into());
            }
            out.push_str(&cols.join("\t"));
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"t1","tokens":[{"surface":"I","pos":"PRP"},{"surface":"do","pos":"VBP"},{"surface":"not","pos":"RB"},{"surface":"want","pos":"VB","lemma":"want"},{"surface":"it","pos":"PRP"}],"parse":"(S (NP (PRP I)) (VP (VBP do) (RB not) (VP (VB want) (NP (PRP it)))))","gold_cues":[{"index":2,"is_true_cue":true}],"gold_scopes":[{"cue_index":2,"token_indices":[3,4]}],"lang":"en"}"#;

    #[test]
    fn reads_record_and_keeps_unknown_fields() {
        let r = CorpusRecord::from_json_line(LINE).unwrap();
        assert_eq!(r.tokens.len(), 5);
        assert_eq!(r.extra.get("lang"), Some(&Value::String("en".into())));
        let back = serde_json::to_string(&r).unwrap();
        assert!(back.contains(r#""lang":"en""#));
        let s = r.sentence().unwrap();
        assert!(s.tree().is_some());
        assert_eq!(r.gold_for_eval()[0].scope, [3, 4]);
    }

    #[test]
    fn rejects_bad_indices() {
        let bad = LINE.replace(r#""token_indices":[3,4]"#, r#""token_indices":[3,9]"#);
        assert!(matches!(
            CorpusRecord::from_json_line(&bad),
            Err(CorpusError::IndexOutOfRange { index: 9, .. })
        ));
    }

    #[test]
    fn misaligned_parse_is_an_error() {
        let bad = LINE.replace("(PRP it)", "(PRP It)");
        let r = CorpusRecord::from_json_line(&bad).unwrap();
        assert!(matches!(r.sentence(), Err(CorpusError::Align(_))));
    }

    #[test]
    fn syntax_column_round_trip() {
        let tree = ParseTree::parse("(S (NP (PRP I)) (VP (VBP do) (RB not) (VP (VB want) (NP (PRP it)))))").unwrap();
        let frags = syntax_fragments(&tree);
        assert_eq!(frags, ["(S(NP*)", "(VP*", "*", "(VP*", "(NP*))))"]);
    }

    #[test]
    fn starsem_round_trip() {
        let mut r = CorpusRecord::from_json_line(LINE).unwrap();
        r.id = "ch1/7".into();
        r.extra.clear();
        let text = write_starsem(std::slice::from_ref(&r)).unwrap();
        let back = read_starsem(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].id, "ch1/7");
        assert_eq!(back[0].parse, r.parse);
        assert_eq!(back[0].gold_scopes, r.gold_scopes);
        assert_eq!(back[0].gold_cues, r.gold_cues);
        assert_eq!(
            back[0].tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>(),
            ["I", "do", "not", "want", "it"]
        );
    }

    #[test]
    fn starsem_without_negation() {
        let text = "c\t1\t0\tHello\thello\tUH\t(INTJ*)\t***\n";
        let recs = read_starsem(text).unwrap();
        assert_eq!(recs[0].gold_cues.as_deref(), Some(&[][..]));
        assert_eq!(recs[0].parse.as_deref(), Some("(INTJ (UH Hello))"));
        assert!(matches!(read_starsem("a\tb\n"), Err(CorpusError::Columns { line: 1, .. })));
    }
}
