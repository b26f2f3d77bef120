use negscope::cue::CueOccurrence;
use negscope::lexicon::Lexicons;
use negscope::scope::{detect_scope, punctuation_scope};
use negscope::{ParseTree, Sentence};

const GOLDEN: &[(&str, usize, &[usize])] = &[
    (
        "(S (NP (EX There)) (VP (VBP are) (NP (NP (DT no) (NNS details)) (PP (IN on) (NP (DT the) (NN return) (NN page))))))",
        2,
        &[3],
    ),
    (
        "(S (NP (PRP I)) (VP (VBP do) (RB not) (VP (VB want) (S (VP (TO to) (VP (VB update) (NP (PRP it)) (ADVP (RB anymore))))))))",
        2,
        &[3, 4, 5, 6, 7],
    ),
    (
        "(S (S (VP (TO To) (VP (VB be) (ADJP (JJ honest))))) (NP (PRP I)) (VP (VBP am) (RB not) (ADJP (JJ angry) (CC but) (JJ upset))))",
        5,
        &[6],
    ),
    (
        "(S (NP (PRP I)) (VP (VBP do) (RB not) (VP (VB want) (NP (PRP it)))) (, ,) (NP (NNS thanks)))",
        2,
        &[3, 4],
    ),
];

fn occ(i: usize) -> CueOccurrence {
    CueOccurrence { token_index: i, cue_form: String::new(), is_true_cue: true, score: 1.0 }
}

#[test]
fn golden_scopes_are_exact() {
    let lex = Lexicons::default();
    for (text, cue, gold) in GOLDEN {
        let s = Sentence::from_tree("g", ParseTree::parse(text).unwrap());
        assert_eq!(detect_scope(&s, &occ(*cue), &lex).unwrap().scope, *gold, "{text}");
    }
}

#[test]
fn rule_scope_is_a_prefix_of_the_baseline_scope() {
    let lex = Lexicons::default();
    for (text, cue, _) in GOLDEN {
        let s = Sentence::from_tree("g", ParseTree::parse(text).unwrap());
        let rules = detect_scope(&s, &occ(*cue), &lex).unwrap().scope;
        let base = punctuation_scope(&s, &occ(*cue), false).scope;
        assert_eq!(rules.first(), base.first(), "{text}");
        assert!(rules.last() <= base.last(), "{text}");
    }
}

#[test]
fn final_cue_has_empty_scope_with_no_anchor_trace() {
    let s = Sentence::from_tree("e", ParseTree::parse("(S (NP (PRP I)) (VP (VBP did) (RB not)))").unwrap());
    let r = detect_scope(&s, &occ(2), &Lexicons::default()).unwrap();
    assert!(r.scope.is_empty());
    let rules: Vec<_> = r.trace.iter().map(|t| serde_json::to_string(&t.rule).unwrap()).collect();
    assert!(rules.contains(&"\"no-anchor\"".to_string()), "{rules:?}");
}
