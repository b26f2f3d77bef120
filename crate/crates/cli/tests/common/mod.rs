#![allow(dead_code)]

use negscope::{ParseTree, Sentence};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

pub const LEX: &[(&str, &str)] = &[
    ("NN", "price"), ("NN", "order"), ("NNS", "details"), ("NNP", "Amazon"), ("NN", "nothing"),
    ("JJ", "good"), ("JJ", "able"), ("JJ", "happy"), ("JJR", "better"),
    ("VB", "want"), ("VB", "help"), ("VBD", "said"), ("VBZ", "is"), ("VBP", "think"), ("VBP", "am"),
    ("MD", "might"), ("MD", "can't"), ("VBG", "working"), ("VBN", "shipped"),
    ("RB", "not"), ("RB", "never"), ("RB", "really"), ("RB", "anymore"), ("DT", "no"), ("DT", "the"),
    ("CC", "but"), ("CC", "&"), ("IN", "because"), ("IN", "on"), ("IN", "without"), ("WP", "what"),
    ("PRP", "it"), ("PRP", "I"), ("TO", "to"), ("UH", "lol"),
    (",", ","), (".", "."), (".", "!"), (":", ":"), ("NFP", "..."),
];

pub const PHRASES: &[&str] = &[
    "S", "SBAR", "SBARQ", "SQ", "SINV", "NP", "NP-SBJ", "VP", "ADJP", "ADVP", "PP", "FRAG", "PRN", "INTJ", "WHNP",
];

fn node<R: Rng>(rng: &mut R, leaves: usize, depth: usize, out: &mut String) {
    if leaves == 1 && (depth >= 5 || rng.gen_bool(0.6)) {
        let (tag, word) = LEX.choose(rng).unwrap();
        out.push_str(&format!("({tag} {word})"));
        return;
    }
    out.push('(');
    out.push_str(PHRASES.choose(rng).unwrap());
    let k = if depth >= 5 { leaves } else { rng.gen_range(1..=leaves.min(4)) };
    // split `leaves` into k positive parts
    let mut cuts: Vec<usize> = (1..leaves).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(leaves)) {
        out.push(' ');
        node(rng, c - prev, depth + 1, out);
        prev = c;
    }
    out.push(')');
}

/// Random bracketed tree with exactly `leaves` tokens under an `S` root.
pub fn random_tree<R: Rng>(rng: &mut R, leaves: usize) -> String {
    let mut body = String::new();
    node(rng, leaves, 1, &mut body);
    format!("(S {body})")
}

pub fn random_sentence<R: Rng>(rng: &mut R, id: &str, max_leaves: usize) -> Sentence {
    let n = rng.gen_range(1..=max_leaves);
    Sentence::from_tree(id, ParseTree::parse(&random_tree(rng, n)).unwrap())
}

/// Corpus JSONL line for a tree, tokens taken from its leaves.
pub fn corpus_line(id: &str, tree_text: &str, extra: Option<Value>) -> String {
    let tree = ParseTree::parse(tree_text).unwrap();
    let tokens: Vec<Value> = tree
        .leaves()
        .iter()
        .map(|&l| {
            let n = tree.node(l);
            json!({"surface": n.leaf_text.as_deref().unwrap(), "pos": n.label})
        })
        .collect();
    let mut v = json!({"id": id, "tokens": tokens, "parse": tree_text});
    if let Some(Value::Object(m)) = extra {
        v.as_object_mut().unwrap().extend(m);
    }
    v.to_string()
}

/// Tagged sentence as a corpus line without a parse.
pub fn tagged_line(id: &str, tagged: &[(&str, &str)], extra: Value) -> String {
    let tokens: Vec<Value> = tagged.iter().map(|(w, p)| json!({"surface": w, "pos": p})).collect();
    let mut v = json!({"id": id, "tokens": tokens});
    if let Value::Object(m) = extra {
        v.as_object_mut().unwrap().extend(m);
    }
    v.to_string()
}
