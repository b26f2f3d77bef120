//! Negation analysis for conversational text.
//!
//! The pipeline runs per sentence:
//!
//! * [`cue::find_cues`] matches tokens against the cue lexicon;
//! * [`cue::classify`] separates true negation cues from false ones;
//! * [`scope::detect_scope`] resolves each true cue's scope on the sentence's
//!   constituency tree ([`scope::punctuation_scope`] is the baseline);
//! * [`transform::apply_transform`] rewrites in-scope tokens for downstream
//!   sentiment models;
//! * [`eval`] scores predictions against gold annotations.

pub mod corpus;
pub mod cue;
pub mod eval;
pub mod lexicon;
pub mod pos;
pub mod scope;
pub mod sentence;
pub mod transform;
pub mod tree;

pub use cue::{classify, extract_features, find_cues, train, CueOccurrence, FeatureVector, LinearModel, TrainConfig};
pub use eval::{agreement, score_cues, score_scopes, AgreementReport, EvalReport};
pub use lexicon::{AntonymDict, ConnectiveList, CueLexicon, Lexicons, NrpCopulaList};
pub use pos::PosClass;
pub use scope::{detect_scope, find_anchor, post_process, punctuation_scope, raw_scope, ScopeResult};
pub use sentence::{align, Sentence, Token};
pub use transform::{apply_transform, normalize_tweet, TransformConfig, TransformMode};
pub use tree::{ParseNode, ParseTree, TagPattern};
