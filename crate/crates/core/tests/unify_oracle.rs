mod common;

use std::collections::HashSet;

use common::*;
use hopl_core::unify::MatchOrder;
use hopl_core::Term;

/// Engine and oracle on one corpus problem; the engine must not hit its
/// depth limit and the oracle must expand the whole tree.
fn compare(text: &str, order: MatchOrder) -> usize {
    let mut p = unify_program();
    let prob = parse_problem(&mut p, text);
    let (brute, truncated) = brute_force_unifiers(&p.sig, &prob.pairs, &prob.var_tys, 12);
    assert!(!truncated, "{text}: oracle tree deeper than 12");
    let (engine, cut) = engine_unifiers(&p.sig, &prob.pairs, &prob.var_tys, 32, order);
    assert!(!cut, "{text}: engine hit the depth limit");
    let set: HashSet<Vec<Term>> = engine.iter().cloned().collect();
    assert_eq!(set.len(), engine.len(), "{text}: duplicate unifiers");
    assert_eq!(set, brute, "{text}");
    set.len()
}

#[test]
fn small_matching_tree() {
    let mut p = unify_program();
    let prob = parse_problem(&mut p, "eq (F a) (g a a)");
    let (brute, truncated) = brute_force_unifiers(&p.sig, &prob.pairs, &prob.var_tys, 3);
    assert!(!truncated);
    let mut expected = HashSet::new();
    for t in ["x\\ g a a", "x\\ g x a", "x\\ g x x", "x\\ g a x"] {
        let mut q = unify_program();
        let e = parse_problem(&mut q, &format!("eq1 F ({t})"));
        expected.insert(vec![naive_normalize(&e.pairs[0].1)]);
    }
    assert_eq!(brute, expected);
    let (engine, _) = engine_unifiers(&p.sig, &prob.pairs, &prob.var_tys, 32, MatchOrder::ImitationFirst);
    assert_eq!(engine.into_iter().collect::<HashSet<_>>(), expected);
}

#[test]
fn example_pair_has_a_unique_unifier() {
    assert_eq!(compare("eq (F a) (g a a), eq (F b) (g a b)", MatchOrder::ImitationFirst), 1);
}

#[test]
fn empty_problem_has_the_empty_unifier() {
    let p = unify_program();
    let (brute, _) = brute_force_unifiers(&p.sig, &[], &[], 3);
    assert_eq!(brute.len(), 1);
}

#[test]
fn corpus_matches_brute_force() {
    let corpus = flex_rigid_corpus();
    assert!(corpus.len() >= 50);
    let counts: Vec<usize> = corpus.iter().map(|t| compare(t, MatchOrder::ImitationFirst)).collect();
    // most problems have several unifiers; a few have none
    assert!(counts.iter().sum::<usize>() > 2 * corpus.len());
}

#[test]
fn corpus_matches_brute_force_projection_first() {
    for text in &flex_rigid_corpus() {
        compare(text, MatchOrder::ProjectionFirst);
    }
}

#[test]
fn unsatisfiable_extra_pair_fails_totally() {
    assert_eq!(compare("eq (F a) (g a a), eq (F b) (g b c)", MatchOrder::ImitationFirst), 0);
}
