use super::*;

const MAPFUN: &str = "
kind i type.
type nil list i.
type :: i -> list i -> list i.
type g i -> i -> i.
type a, b i.
type mapfun list i -> (i -> i) -> list i -> o.
mapfun nil F nil.
mapfun (X :: L1) F ((F X) :: L2) :- mapfun L1 F L2.
";

const FAMILY: &str = "
kind i type.
type nil list i.
type :: i -> list i -> list i.
type bob, john, mary, sue, dick, kate i.
type parent, grandparent i -> i -> o.
type mappred list i -> (i -> i -> o) -> list i -> o.
mappred nil P nil.
mappred (X :: L1) P (Y :: L2) :- (P X Y), (mappred L1 P L2).
parent bob john.
parent john mary.
parent sue dick.
parent dick kate.
grandparent X Y :- sigma Z\\ parent X Z, parent Z Y.
";

fn run(src: &str, q: &str, limit: usize) -> (Program, Vec<String>) {
    let (mut p, _) = Program::from_source(src).unwrap();
    let q = p.query(q).unwrap();
    let out = answers(&p, &q, Config::default(), limit)
        .unwrap()
        .iter()
        .map(|a| a.display(&p.sig))
        .collect();
    (p, out)
}

#[test]
fn mapfun_forward() {
    let (_, out) = run(MAPFUN, "mapfun (a :: b :: nil) (x\\ g a x) L", 5);
    assert_eq!(out, vec!["L = (g a a) :: (g a b) :: nil"]);
}

#[test]
fn mapfun_reverse_enumerates_functions() {
    let (_, out) = run(MAPFUN, "mapfun (a :: b :: nil) F ((g a a) :: (g a b) :: nil)", 10);
    assert_eq!(out, vec!["F = g a"]);
    let (_, out) = run(MAPFUN, "mapfun (a :: nil) F ((g a a) :: nil)", 10);
    assert_eq!(
        out,
        vec![
            "F = x1\\ g a a",
            "F = g a",
            "F = x1\\ g x1 a",
            "F = x1\\ g x1 x1",
        ]
    );
}

#[test]
fn family_queries() {
    let (_, out) = run(FAMILY, "grandparent bob Y", 5);
    assert_eq!(out, vec!["Y = mary"]);
    let (_, out) = run(FAMILY, "mappred (bob :: sue :: nil) parent L", 5);
    assert_eq!(out, vec!["L = john :: dick :: nil"]);
    let (_, out) = run(FAMILY, "mappred (bob :: sue :: nil) (x\\ y\\ sigma z\\ parent x z, parent z y) L", 5);
    assert_eq!(out, vec!["L = mary :: kate :: nil"]);
}

#[test]
fn predicate_variable_gets_the_weakest_solution_first() {
    let (_, out) = run(FAMILY, "mappred (bob :: sue :: nil) P (john :: dick :: nil)", 2);
    assert_eq!(out[0], "P = x1\\ x2\\ true");
}

#[test]
fn disjunction_and_failure() {
    let (_, out) = run(FAMILY, "parent bob X ; parent sue X", 5);
    assert_eq!(out, vec!["X = john", "X = dick"]);
    let (_, out) = run(FAMILY, "parent mary X", 5);
    assert!(out.is_empty());
}

#[test]
fn flex_flex_pairs_are_reported() {
    let src = "kind i type. type a i. type p (i -> i) -> (i -> i) -> o. p F F.";
    let (_, out) = run(src, "p (x\\ G x) (x\\ H x)", 5);
    assert_eq!(out, vec!["H = G"]);
    let src = "kind i type. type a i. type q i -> i -> o. q X X.";
    let (_, out) = run(src, "q (G a) (H a)", 5);
    assert_eq!(out, vec!["G a ?= H a"]);
}

#[test]
fn store_is_restored_after_exhaustion() {
    let (mut p, _) = Program::from_source(MAPFUN).unwrap();
    let q = p.query("mapfun (a :: nil) F ((g a a) :: nil)").unwrap();
    let store = Store::new(p.sig.clone());
    let before = store.mark();
    let mut s = Solver::with_store(&p, &q, Config::default(), store);
    assert_eq!(s.by_ref().count(), 4);
    let store = s.into_store();
    assert_eq!(store.mark(), before);
}

#[test]
fn depth_limit_is_reported() {
    let (mut p, _) = Program::from_source(MAPFUN).unwrap();
    let q = p.query("mapfun (a :: nil) F ((g a a) :: nil)").unwrap();
    let config = Config {
        depth: 0,
        ..Config::default()
    };
    let mut s = solve_query(&p, &q, config);
    assert!(s.next().is_none());
    assert!(s.depth_exceeded());
}
