//! Scoring of cue classification and scope prediction, plus inter-annotator
//! agreement.
//!
//! Scope scores are micro-averaged over cue instances: every gold cue labels
//! every token of its sentence in-scope or out-of-scope, and the token
//! decisions of all cues are pooled. PCS is the share of gold true cues whose
//! predicted index set equals the gold set exactly. Gold false cues count
//! towards the token tallies (any predicted scope on them is a false
//! positive) but not towards PCS.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("duplicate {side} entry for sentence {sentence:?} cue {cue}")]
    Duplicate { side: &'static str, sentence: String, cue: usize },
    #[error("prediction for sentence {sentence:?} cue {cue} has no gold counterpart")]
    UnknownCue { sentence: String, cue: usize },
    #[error("gold true cue at sentence {sentence:?} index {cue} has no prediction")]
    MissingPrediction { sentence: String, cue: usize },
    #[error("index {index} out of range for sentence {sentence:?} of {len} tokens")]
    IndexOutOfRange { sentence: String, index: usize, len: usize },
    #[error("annotation sites differ: {0}")]
    SiteMismatch(String),
}

/// One annotated cue with its scope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldCue {
    pub sentence_id: String,
    pub cue_index: usize,
    pub sentence_len: usize,
    pub is_true_cue: bool,
    pub scope: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedScope {
    pub sentence_id: String,
    pub cue_index: usize,
    pub scope: Vec<usize>,
}

/// A cue label keyed by sentence and token position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueLabel {
    pub sentence_id: String,
    pub token_index: usize,
    pub is_true_cue: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        Prf::new(ratio(tp, tp + fp), ratio(tp, tp + fn_))
    }

    /// F1 is the harmonic mean, or 0 when both rates are 0.
    pub fn new(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TokenCounts {
    /// Gold in, predicted in.
    pub in_in: usize,
    /// Gold in, predicted out.
    pub in_out: usize,
    /// Gold out, predicted in.
    pub out_in: usize,
    /// Gold out, predicted out.
    pub out_out: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeReport {
    pub in_scope: Prf,
    pub out_scope: Prf,
    pub pcs: f64,
    pub pcs_correct: usize,
    pub pcs_total: usize,
    pub counts: TokenCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueReport {
    pub cue_false: ClassReport,
    pub cue_true: ClassReport,
    /// `[gold][pred]` with index 0 = false cue, 1 = true cue.
    pub confusion: [[usize; 2]; 2],
}

/// Full evaluation output; either section may be absent when the input lacks
/// the corresponding annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<ScopeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cues: Option<CueReport>,
}

fn check_indices(sentence: &str, indices: &[usize], len: usize) -> Result<(), EvalError> {
    match indices.iter().find(|&&i| i >= len) {
        Some(&index) => Err(EvalError::IndexOutOfRange { sentence: sentence.to_string(), index, len }),
        None => Ok(()),
    }
}

pub fn score_scopes(gold: &[GoldCue], pred: &[PredictedScope]) -> Result<ScopeReport, EvalError> {
    let mut gold_by_key: BTreeMap<(&str, usize), &GoldCue> = BTreeMap::new();
    for g in gold {
        check_indices(&g.sentence_id, &g.scope, g.sentence_len)?;
        if gold_by_key.insert((&g.sentence_id, g.cue_index), g).is_some() {
            return Err(EvalError::Duplicate { side: "gold", sentence: g.sentence_id.clone(), cue: g.cue_index });
        }
    }
    let mut pred_by_key: BTreeMap<(&str, usize), &PredictedScope> = BTreeMap::new();
    for p in pred {
        let key = (p.sentence_id.as_str(), p.cue_index);
        let Some(g) = gold_by_key.get(&key) else {
            return Err(EvalError::UnknownCue { sentence: p.sentence_id.clone(), cue: p.cue_index });
        };
        check_indices(&p.sentence_id, &p.scope, g.sentence_len)?;
        if pred_by_key.insert(key, p).is_some() {
            return Err(EvalError::Duplicate { side: "prediction", sentence: p.sentence_id.clone(), cue: p.cue_index });
        }
    }

    let mut counts = TokenCounts::default();
    let mut pcs_correct = 0;
    let mut pcs_total = 0;
    for (key, g) in &gold_by_key {
        let predicted: BTreeSet<usize> = match pred_by_key.get(key) {
            Some(p) => p.scope.iter().copied().collect(),
            None if !g.is_true_cue => BTreeSet::new(),
            None => {
                return Err(EvalError::MissingPrediction { sentence: g.sentence_id.clone(), cue: g.cue_index })
            }
        };
        let gold_set: BTreeSet<usize> = if g.is_true_cue { g.scope.iter().copied().collect() } else { BTreeSet::new() };
        let both = gold_set.intersection(&predicted).count();
        counts.in_in += both;
        counts.in_out += gold_set.len() - both;
        counts.out_in += predicted.len() - both;
        counts.out_out += g.sentence_len + both - gold_set.len() - predicted.len();
        if g.is_true_cue {
            pcs_total += 1;
            if gold_set == predicted {
                pcs_correct += 1;
            }
        }
    }
    Ok(ScopeReport {
        in_scope: Prf::from_counts(counts.in_in, counts.out_in, counts.in_out),
        out_scope: Prf::from_counts(counts.out_out, counts.in_out, counts.out_in),
        pcs: ratio(pcs_correct, pcs_total),
        pcs_correct,
        pcs_total,
        counts,
    })
}

pub fn score_cues(gold: &[CueLabel], pred: &[CueLabel]) -> Result<CueReport, EvalError> {
    let mut gold_by_key = BTreeMap::new();
    for g in gold {
        if gold_by_key.insert((g.sentence_id.as_str(), g.token_index), g.is_true_cue).is_some() {
            return Err(EvalError::Duplicate { side: "gold", sentence: g.sentence_id.clone(), cue: g.token_index });
        }
    }
    let mut confusion = [[0usize; 2]; 2];
    let mut seen = BTreeSet::new();
    for p in pred {
        let key = (p.sentence_id.as_str(), p.token_index);
        let Some(&g) = gold_by_key.get(&key) else {
            return Err(EvalError::UnknownCue { sentence: p.sentence_id.clone(), cue: p.token_index });
        };
        if !seen.insert(key) {
            return Err(EvalError::Duplicate { side: "prediction", sentence: p.sentence_id.clone(), cue: p.token_index });
        }
        confusion[usize::from(g)][usize::from(p.is_true_cue)] += 1;
    }
    if let Some((s, i)) = gold_by_key.keys().find(|k| !seen.contains(*k)) {
        return Err(EvalError::MissingPrediction { sentence: s.to_string(), cue: *i });
    }
    let class = |c: usize| {
        let other = 1 - c;
        let tp = confusion[c][c];
        let prf = Prf::from_counts(tp, confusion[other][c], confusion[c][other]);
        ClassReport { precision: prf.precision, recall: prf.recall, f1: prf.f1, support: confusion[c][0] + confusion[c][1] }
    };
    Ok(CueReport { cue_false: class(0), cue_true: class(1), confusion })
}

/// One annotator's scope for one cue site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub sentence_id: String,
    pub cue_index: usize,
    pub sentence_len: usize,
    pub scope: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub token_agreement: f64,
    pub full_scope_agreement: f64,
    pub tokens: usize,
    pub sites: usize,
}

pub fn agreement(a: &[Annotation], b: &[Annotation]) -> Result<AgreementReport, EvalError> {
    fn index<'a>(side: &'static str, xs: &'a [Annotation]) -> Result<BTreeMap<(&'a str, usize), &'a Annotation>, EvalError> {
        let mut map = BTreeMap::new();
        for x in xs {
            check_indices(&x.sentence_id, &x.scope, x.sentence_len)?;
            if map.insert((x.sentence_id.as_str(), x.cue_index), x).is_some() {
                return Err(EvalError::Duplicate { side, sentence: x.sentence_id.clone(), cue: x.cue_index });
            }
        }
        Ok(map)
    }
    let a = index("first", a)?;
    let b = index("second", b)?;
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        let only: Vec<String> = a
            .keys()
            .filter(|k| !b.contains_key(*k))
            .chain(b.keys().filter(|k| !a.contains_key(*k)))
            .map(|(s, i)| format!("{s}#{i}"))
            .collect();
        return Err(EvalError::SiteMismatch(only.join(", ")));
    }
    let mut agreed_tokens = 0;
    let mut tokens = 0;
    let mut exact = 0;
    for (key, x) in &a {
        let y = b[key];
        if x.sentence_len != y.sentence_len {
            return Err(EvalError::SiteMismatch(format!(
                "{}#{} has {} vs {} tokens",
                key.0, key.1, x.sentence_len, y.sentence_len
            )));
        }
        let xs: BTreeSet<usize> = x.scope.iter().copied().collect();
        let ys: BTreeSet<usize> = y.scope.iter().copied().collect();
        tokens += x.sentence_len;
        agreed_tokens += x.sentence_len - xs.symmetric_difference(&ys).count();
        if xs == ys {
            exact += 1;
        }
    }
    Ok(AgreementReport {
        token_agreement: ratio(agreed_tokens, tokens),
        full_scope_agreement: ratio(exact, a.len()),
        tokens,
        sites: a.len(),
    })
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = &self.cues {
            writeln!(f, "Cue classification")?;
            writeln!(f, "{:<14}{:>10}{:>10}{:>10}{:>10}", "", "Precision", "Recall", "F-Score", "Support")?;
            for (name, r) in [("False cues", &c.cue_false), ("Actual cues", &c.cue_true)] {
                writeln!(f, "{:<14}{:>10.2}{:>10.2}{:>10.2}{:>10}", name, r.precision, r.recall, r.f1, r.support)?;
            }
        }
        if let Some(s) = &self.scope {
            if self.cues.is_some() {
                writeln!(f)?;
            }
            writeln!(f, "Scope detection")?;
            writeln!(f, "{:<14}{:>10}{:>10}{:>10}", "", "Precision", "Recall", "F-Score")?;
            writeln!(f, "{:<14}{:>10.2}{:>10.2}{:>10.2}", "In-scope", s.in_scope.precision, s.in_scope.recall, s.in_scope.f1)?;
            writeln!(f, "{:<14}{:>10.2}{:>10.2}{:>10.2}", "Out-scope", s.out_scope.precision, s.out_scope.recall, s.out_scope.f1)?;
            writeln!(f, "{:<14}{:>10.2}  ({}/{})", "PCS", s.pcs, s.pcs_correct, s.pcs_total)?;
        }
        Ok(())
    }
}
