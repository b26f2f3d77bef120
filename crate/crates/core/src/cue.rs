//! Cue detection and true/false cue disambiguation.
//!
//! Cues form a closed class: only tokens matching the cue lexicon are ever
//! considered. Each match is then scored by an L2-regularized logistic
//! regression over sparse string features (word form, POS, lemma, context
//! lemmas, relative position, POS bigrams, sentence-final flag).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::CueLexicon;
use crate::pos::is_punctuation;
use crate::sentence::Sentence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueOccurrence {
    pub token_index: usize,
    pub cue_form: String,
    pub is_true_cue: bool,
    pub score: f64,
}

/// Every lexicon match in index order, provisionally marked true.
pub fn find_cues(sentence: &Sentence, lex: &CueLexicon) -> Vec<CueOccurrence> {
    sentence
        .tokens()
        .iter()
        .filter(|t| lex.is_cue(t))
        .map(|t| CueOccurrence {
            token_index: t.index,
            cue_form: t.norm.clone(),
            is_true_cue: true,
            score: 1.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    features: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn new() -> FeatureVector {
        FeatureVector::default()
    }

    /// Adds a feature; a repeated name overwrites the earlier value.
    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        let name = name.into();
        match self.features.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.features.push((name, value)),
        }
    }

    pub fn indicator(&mut self, name: impl Into<String>) {
        self.set(name, 1.0);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.features.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.features.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        let mut v = FeatureVector::new();
        for (n, x) in iter {
            v.set(n, x);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CueError {
    #[error("cue index {index} out of range for sentence of {len} tokens")]
    InvalidIndex { index: usize, len: usize },
}

const BOS: &str = "BOS";
const EOS: &str = "EOS";

/// Feature templates for the cue at `occ.token_index`.
pub fn extract_features(sentence: &Sentence, occ: &CueOccurrence) -> Result<FeatureVector, CueError> {
    let tokens = sentence.tokens();
    let n = tokens.len();
    let i = occ.token_index;
    let tok = tokens.get(i).ok_or(CueError::InvalidIndex { index: i, len: n })?;
    let prev = i.checked_sub(1).map(|j| &tokens[j]);
    let next = tokens.get(i + 1);

    let mut fv = FeatureVector::new();
    fv.indicator(format!("wf={}", tok.surface.to_lowercase()));
    fv.indicator(format!("pos={}", tok.pos));
    fv.indicator(format!("lemma={}", tok.lemma));
    fv.indicator(format!("prev_lemma={}", prev.map_or(BOS, |t| t.lemma.as_str())));
    fv.indicator(format!("next_lemma={}", next.map_or(EOS, |t| t.lemma.as_str())));
    let relpos = if n <= 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    fv.set("relpos", relpos);
    fv.indicator(format!("posbi_prev={}|{}", prev.map_or(BOS, |t| t.pos.as_str()), tok.pos));
    fv.indicator(format!("posbi_next={}|{}", tok.pos, next.map_or(EOS, |t| t.pos.as_str())));
    let last_word = tokens.iter().rposition(|t| !is_punctuation(&t.surface, &t.pos));
    let final_flag = u8::from(last_word == Some(i));
    fv.indicator(format!("sent_final={final_flag}"));
    Ok(fv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
    /// Loss weight for examples labeled as true cues.
    pub true_weight: f64,
    /// Loss weight for examples labeled as false cues.
    pub false_weight: f64,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 200,
            batch_size: 16,
            l2: 1e-3,
            seed: 42,
            true_weight: 1.0,
            false_weight: 1.0,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("training corpus is empty")]
    Empty,
    #[error("training corpus contains only {0} cues")]
    SingleClass(&'static str),
    #[error("loss became non-finite at epoch {epoch}; learning rate {learning_rate} diverges")]
    Diverged { epoch: usize, learning_rate: f64 },
    #[error("invalid training config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: BTreeMap<String, f64>,
    pub bias: f64,
    pub threshold: f64,
    pub metadata: BTreeMap<String, String>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LinearModel {
    /// Probability that the features describe a true negation cue.
    pub fn score(&self, features: &FeatureVector) -> f64 {
        let z: f64 = features
            .iter()
            .map(|(name, value)| self.weights.get(name).map_or(0.0, |w| w * value))
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }

    pub fn predict(&self, features: &FeatureVector) -> bool {
        self.score(features) >= self.threshold
    }
}

/// Scores one occurrence with `model`.
pub fn classify(
    model: &LinearModel,
    sentence: &Sentence,
    occ: &CueOccurrence,
) -> Result<CueOccurrence, CueError> {
    let features = extract_features(sentence, occ)?;
    let score = model.score(&features);
    Ok(CueOccurrence { score, is_true_cue: score >= model.threshold, ..occ.clone() })
}

/// Sparse features, target, class weight.
type Sample = (Vec<(usize, f64)>, f64, f64);

fn weighted_loss(
    samples: &[Sample],
    w: &[f64],
    bias: f64,
    l2: f64,
) -> f64 {
    let total_weight: f64 = samples.iter().map(|s| s.2).sum();
    let data: f64 = samples
        .iter()
        .map(|(x, y, cw)| {
            let z = x.iter().map(|&(j, v)| w[j] * v).sum::<f64>() + bias;
            // log(1 + e^z) - y z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            cw * (softplus - y * z)
        })
        .sum();
    data / total_weight + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Fits a logistic regression by seeded mini-batch gradient descent. The
/// label is `true` for a true negation cue.
pub fn train(corpus: &[(FeatureVector, bool)], config: &TrainConfig) -> Result<LinearModel, TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::Empty);
    }
    if !corpus.iter().any(|(_, y)| *y) {
        return Err(TrainError::SingleClass("false"));
    }
    if !corpus.iter().any(|(_, y)| !*y) {
        return Err(TrainError::SingleClass("true"));
    }
    if config.threshold.is_nan() || config.threshold <= 0.0 || config.threshold >= 1.0 {
        return Err(TrainError::Config(format!("threshold {} not in (0,1)", config.threshold)));
    }
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(TrainError::Config("batch_size and epochs must be positive".into()));
    }
    if config.learning_rate.is_nan() || config.learning_rate <= 0.0 || config.l2 < 0.0 {
        return Err(TrainError::Config("learning_rate must be > 0 and l2 >= 0".into()));
    }

    let mut vocab: BTreeMap<&str, usize> = BTreeMap::new();
    for (fv, _) in corpus {
        for (name, _) in fv.iter() {
            vocab.entry(name).or_insert(0);
        }
    }
    for (i, slot) in vocab.values_mut().enumerate() {
        *slot = i;
    }
    let samples: Vec<Sample> = corpus
        .iter()
        .map(|(fv, y)| {
            let x = fv.iter().map(|(n, v)| (vocab[n], v)).collect();
            let cw = if *y { config.true_weight } else { config.false_weight };
            (x, if *y { 1.0 } else { 0.0 }, cw)
        })
        .collect();

    let mut w = vec![0.0; vocab.len()];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut grad = vec![0.0; w.len()];

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_bias = 0.0;
            let batch_weight: f64 = batch.iter().map(|&k| samples[k].2).sum();
            if batch_weight <= 0.0 {
                continue;
            }
            for &k in batch {
                let (x, y, cw) = &samples[k];
                let z = x.iter().map(|&(j, v)| w[j] * v).sum::<f64>() + bias;
                let err = cw * (sigmoid(z) - y);
                for &(j, v) in x {
                    grad[j] += err * v;
                }
                grad_bias += err;
            }
            for (wj, gj) in w.iter_mut().zip(&grad) {
                *wj -= config.learning_rate * (gj / batch_weight + config.l2 * *wj);
            }
            bias -= config.learning_rate * grad_bias / batch_weight;
        }
        let loss = weighted_loss(&samples, &w, bias, config.l2);
        if !loss.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(TrainError::Diverged { epoch, learning_rate: config.learning_rate });
        }
    }

    let final_loss = weighted_loss(&samples, &w, bias, config.l2);
    let mut metadata = BTreeMap::new();
    metadata.insert("learning_rate".into(), config.learning_rate.to_string());
    metadata.insert("epochs".into(), config.epochs.to_string());
    metadata.insert("batch_size".into(), config.batch_size.to_string());
    metadata.insert("l2".into(), config.l2.to_string());
    metadata.insert("seed".into(), config.seed.to_string());
    metadata.insert("true_weight".into(), config.true_weight.to_string());
    metadata.insert("false_weight".into(), config.false_weight.to_string());
    metadata.insert("examples".into(), corpus.len().to_string());
    metadata.insert("final_loss".into(), final_loss.to_string());

    let weights = vocab.into_iter().map(|(name, j)| (name.to_string(), w[j])).collect();
    Ok(LinearModel { weights, bias, threshold: config.threshold, metadata })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFormatError {
    #[error("missing header line")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing {0} line")]
    Missing(&'static str),
}

const MODEL_HEADER: &str = "negscope-linear-model\t1";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next()? {
            '\\' => '\\',
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            _ => return None,
        });
    }
    Some(out)
}

impl LinearModel {
    /// Text form: a header, then `threshold`, `bias`, `meta` and `weight`
    /// lines, tab separated, with names sorted. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MODEL_HEADER}").unwrap();
        writeln!(out, "threshold\t{}", self.threshold).unwrap();
        writeln!(out, "bias\t{}", self.bias).unwrap();
        for (k, v) in &self.metadata {
            writeln!(out, "meta\t{}\t{}", escape(k), escape(v)).unwrap();
        }
        for (name, w) in &self.weights {
            writeln!(out, "weight\t{}\t{}", escape(name), w).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<LinearModel, ModelFormatError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l == MODEL_HEADER => {}
            _ => return Err(ModelFormatError::MissingHeader),
        }
        let mut threshold = None;
        let mut bias = None;
        let mut weights = BTreeMap::new();
        let mut metadata = BTreeMap::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| ModelFormatError::Line { line: line_no, message: message.into() };
            let fields: Vec<&str> = line.split('\t').collect();
            let float = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            match fields.as_slice() {
                ["threshold", v] => threshold = Some(float(v)?),
                ["bias", v] => bias = Some(float(v)?),
                ["meta", k, v] => {
                    let k = unescape(k).ok_or_else(|| err("bad escape"))?;
                    let v = unescape(v).ok_or_else(|| err("bad escape"))?;
                    metadata.insert(k, v);
                }
                ["weight", name, v] => {
                    let name = unescape(name).ok_or_else(|| err("bad escape"))?;
                    weights.insert(name, float(v)?);
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        let threshold = threshold.ok_or(ModelFormatError::Missing("threshold"))?;
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(ModelFormatError::Line { line: 2, message: "threshold not in (0,1)".into() });
        }
        Ok(LinearModel {
            weights,
            bias: bias.ok_or(ModelFormatError::Missing("bias"))?,
            threshold,
            metadata,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ParseTree;

    fn occ(i: usize) -> CueOccurrence {
        CueOccurrence { token_index: i, cue_form: String::new(), is_true_cue: true, score: 1.0 }
    }

    fn tweet2() -> Sentence {
        Sentence::from_tagged(
            "t2",
            &[
                ("If", "IN"), ("not", "RB"), (",", ","), ("we", "PRP"), ("can", "MD"),
                ("look", "VB"), ("into", "IN"), ("options", "NNS"), (":", ":"),
            ],
        )
    }

    #[test]
    fn finds_cues_in_order() {
        let lex = CueLexicon::default();
        let s = tweet2();
        let found = find_cues(&s, &lex);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].token_index, 1);
        assert_eq!(found[0].cue_form, "not");

        let s = Sentence::from_tagged(
            "t1",
            &[("I", "PRP"), ("don't", "VBP"), ("think", "VB"), ("you", "PRP"), ("do", "VBP"), ("understand", "VB")],
        );
        let found = find_cues(&s, &lex);
        assert_eq!(found.iter().map(|o| o.token_index).collect::<Vec<_>>(), [1]);
        assert_eq!(found[0].cue_form, "dont");

        let s = Sentence::from_tagged("x", &[("All", "DT"), ("good", "JJ"), ("here", "RB")]);
        assert!(find_cues(&s, &lex).is_empty());
    }

    #[test]
    fn features_for_if_not() {
        let s = tweet2();
        let fv = extract_features(&s, &occ(1)).unwrap();
        assert_eq!(fv.get("prev_lemma=if"), Some(1.0));
        assert_eq!(fv.get("next_lemma=,"), Some(1.0));
        assert_eq!(fv.get("posbi_next=RB|,"), Some(1.0));
        assert_eq!(fv.get("posbi_prev=IN|RB"), Some(1.0));
        assert_eq!(fv.get("wf=not"), Some(1.0));
        assert_eq!(fv.get("sent_final=0"), Some(1.0));
        // index 1 of 9 tokens
        assert_eq!(fv.get("relpos"), Some(0.125));
        assert_eq!(fv.len(), 9);
    }

    #[test]
    fn features_for_single_token() {
        let s = Sentence::from_tagged("x", &[("No", "DT")]);
        let fv = extract_features(&s, &occ(0)).unwrap();
        assert_eq!(fv.get("relpos"), Some(0.0));
        assert_eq!(fv.get("prev_lemma=BOS"), Some(1.0));
        assert_eq!(fv.get("next_lemma=EOS"), Some(1.0));
        assert_eq!(fv.get("wf=no"), Some(1.0));
        assert_eq!(fv.get("sent_final=1"), Some(1.0));
        assert_eq!(
            extract_features(&s, &occ(1)).unwrap_err(),
            CueError::InvalidIndex { index: 1, len: 1 }
        );
    }

    #[test]
    fn sentence_final_ignores_trailing_punctuation() {
        let s = Sentence::from_tagged("x", &[("why", "WRB"), ("not", "RB"), ("?", ".")]);
        let fv = extract_features(&s, &occ(1)).unwrap();
        assert_eq!(fv.get("sent_final=1"), Some(1.0));
    }

    #[test]
    fn features_use_tree_independent_tokens() {
        let tree = ParseTree::parse("(S (NP (DT No)))").unwrap();
        let s = Sentence::from_tree("x", tree);
        assert!(extract_features(&s, &occ(0)).is_ok());
    }

    #[test]
    fn empty_overlap_scores_bias() {
        let model = LinearModel {
            weights: [("wf=zzz".to_string(), 3.0)].into_iter().collect(),
            bias: -0.7,
            threshold: 0.5,
            metadata: BTreeMap::new(),
        };
        let scored = classify(&model, &tweet2(), &occ(1)).unwrap();
        assert_eq!(scored.score, sigmoid(-0.7));
        assert!(!scored.is_true_cue);
    }

    #[test]
    fn training_rejects_bad_corpora() {
        let fv: FeatureVector = [("a", 1.0)].into_iter().collect();
        assert_eq!(train(&[], &TrainConfig::default()).unwrap_err(), TrainError::Empty);
        assert!(matches!(
            train(&[(fv.clone(), true), (fv.clone(), true)], &TrainConfig::default()),
            Err(TrainError::SingleClass(_))
        ));
        let diverging = TrainConfig { learning_rate: 1e308, l2: 1.0, ..TrainConfig::default() };
        let corpus = vec![(fv.clone(), true), ([("b", 1.0)].into_iter().collect(), false)];
        assert!(matches!(train(&corpus, &diverging), Err(TrainError::Diverged { .. })));
    }

    #[test]
    fn model_text_round_trip() {
        let mut weights = BTreeMap::new();
        weights.insert("wf=don't".to_string(), 0.1 + 0.2);
        weights.insert("odd\tname\\x".to_string(), -1e-300);
        let mut metadata = BTreeMap::new();
        metadata.insert("seed".to_string(), "7".to_string());
        let m = LinearModel { weights, bias: std::f64::consts::PI, threshold: 0.35, metadata };
        let back = LinearModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), m.to_text());
        assert_eq!(LinearModel::from_text("nope").unwrap_err(), ModelFormatError::MissingHeader);
    }
}
