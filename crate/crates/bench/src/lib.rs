//! Fixtures shared by the benchmarks.

use hopl_core::{vm, Answers, Config, Engine, Program, Query, Store, Term};

pub const NREV: &str = include_str!("../../core/tests/programs/nrev.hopl");
pub const MAPFUN: &str = include_str!("../../core/tests/programs/mapfun.hopl");

/// A program with its compiled code and one query.
pub struct Fixture {
    pub program: Program,
    pub code: vm::Code,
    pub query: Query,
}

impl Fixture {
    pub fn new(src: &str, query: &str) -> Fixture {
        let (mut program, _) = Program::from_source(src).expect("fixture program");
        let query = program.query(query).expect("fixture query");
        let code = vm::compile(&program);
        Fixture { program, code, query }
    }

    /// Runs the query to exhaustion on a recycled store and returns the
    /// answer count.
    pub fn exhaust(&self, engine: Engine, store: &mut Option<Store>) -> usize {
        let s = store.take().unwrap_or_else(|| Store::new(self.program.sig.clone()));
        let mut answers = Answers::new(engine, &self.program, &self.code, &self.query, Config::default(), s);
        let n = answers.by_ref().count();
        *store = Some(answers.into_store());
        n
    }
}

/// The Church numeral two squared `depth` times, applied to `f` and `a`. Its
/// normal form is `f` applied 2^(2^depth) times.
pub fn church_tower(program: &Program, depth: u32) -> Term {
    let f = Term::Const(program.sig.lookup("f").expect("f declared"));
    let a = Term::Const(program.sig.lookup("a").expect("a declared"));
    // two = \s\z s (s z)
    let two = Term::lams(2, Term::app(Term::Index(2), vec![Term::app(Term::Index(2), vec![Term::Index(1)])]));
    // each layer squares: \n\s\z n (n s) z
    let square = Term::lams(
        3,
        Term::app(Term::Index(3), vec![Term::app(Term::Index(3), vec![Term::Index(2)]), Term::Index(1)]),
    );
    let mut n = two;
    for _ in 0..depth {
        n = Term::app(square.clone(), vec![n]);
    }
    Term::app(n, vec![f, a])
}

pub const CHURCH_SIG: &str = "kind i type. type f i -> i. type a i.";

/// Normalizes a closed term in a fresh store.
pub fn normalize(program: &Program, t: &Term) -> Term {
    let mut store = Store::new(program.sig.clone());
    let r = store.import(t, &mut |_, _| unreachable!("closed term"));
    store.nf(r).expect("fuel")
}
