//! Test oracles and fixtures shared by the integration tests. The oracles
//! work on owned terms with textbook substitution and share nothing with
//! the heap, the suspension machinery or the unifier.

#![allow(dead_code)]

use std::collections::{HashSet, HashMap, VecDeque};
use std::path::PathBuf;
use std::rc::Rc;

use hopl_core::term::{Logical, AND, TOP};
use hopl_core::unify::{solve_unify, Eqn, MatchOrder};
use hopl_core::{vm, Answers, Config, ConstId, Engine, Program, Query, Signature, Slot, Store, Term, TermRef, Ty};
use rand::rngs::StdRng;
use rand::Rng;

// ---------------------------------------------------------------------------
// naive normalization

/// Adds `d` to every index above `cutoff`.
pub fn shift(t: &Term, d: i64, cutoff: u32) -> Term {
    match t {
        Term::Index(k) if *k > cutoff => Term::Index((*k as i64 + d) as u32),
        Term::App(h, args) => Term::App(Box::new(shift(h, d, cutoff)), args.iter().map(|a| shift(a, d, cutoff)).collect()),
        Term::Lam(b) => Term::Lam(Box::new(shift(b, d, cutoff + 1))),
        t => t.clone(),
    }
}

/// Replaces index `n` by `s` (lifted past the `n - 1` binders crossed) and
/// closes the gap left by the removed binder.
fn sub(t: &Term, n: u32, s: &Term) -> Term {
    match t {
        Term::Index(k) if *k == n => shift(s, n as i64 - 1, 0),
        Term::Index(k) if *k > n => Term::Index(k - 1),
        Term::App(h, args) => mk_app(sub(h, n, s), args.iter().map(|a| sub(a, n, s)).collect()),
        Term::Lam(b) => Term::Lam(Box::new(sub(b, n + 1, s))),
        t => t.clone(),
    }
}

fn mk_app(h: Term, mut args: Vec<Term>) -> Term {
    if args.is_empty() {
        return h;
    }
    match h {
        Term::App(h, mut a) => {
            a.append(&mut args);
            Term::App(h, a)
        }
        h => Term::App(Box::new(h), args),
    }
}

/// `(\ body) arg` contracted.
pub fn beta(body: &Term, arg: &Term) -> Term {
    sub(body, 1, arg)
}

fn norm(t: &Term, fuel: &mut u64) -> Option<Term> {
    match t {
        Term::Lam(b) => Some(Term::Lam(Box::new(norm(b, fuel)?))),
        Term::App(h, args) => match &**h {
            Term::Lam(b) => {
                *fuel = fuel.checked_sub(1)?;
                let r = mk_app(beta(b, &args[0]), args[1..].to_vec());
                norm(&r, fuel)
            }
            Term::App(..) => norm(&mk_app((**h).clone(), args.clone()), fuel),
            h => {
                let args = args.iter().map(|a| norm(a, fuel)).collect::<Option<Vec<_>>>()?;
                Some(Term::App(Box::new(h.clone()), args))
            }
        },
        t => Some(t.clone()),
    }
}

fn free_in(t: &Term, i: u32) -> bool {
    match t {
        Term::Index(k) => *k == i,
        Term::App(h, args) => free_in(h, i) || args.iter().any(|a| free_in(a, i)),
        Term::Lam(b) => free_in(b, i + 1),
        _ => false,
    }
}

fn eta(t: &Term) -> Term {
    match t {
        Term::Lam(b) => {
            let b = eta(b);
            if let Term::App(h, args) = &b {
                let (last, rest) = args.split_last().unwrap();
                if *last == Term::Index(1) && !free_in(h, 1) && !rest.iter().any(|a| free_in(a, 1)) {
                    return shift(&mk_app((**h).clone(), rest.to_vec()), -1, 1);
                }
            }
            Term::Lam(Box::new(b))
        }
        Term::App(h, args) => Term::App(Box::new(eta(h)), args.iter().map(eta).collect()),
        t => t.clone(),
    }
}

/// Beta-normal, eta-short form by leftmost-outermost contraction.
pub fn naive_normalize(t: &Term) -> Term {
    let mut fuel = 1_000_000;
    eta(&norm(t, &mut fuel).expect("naive normalization ran out of fuel"))
}

// ---------------------------------------------------------------------------
// random well-typed terms

pub struct TermGen {
    pub sig: Rc<Signature>,
    consts: Vec<(ConstId, Ty)>,
    types: Vec<Ty>,
    /// Logic variables the terms may mention, by slot.
    pub var_tys: Vec<Ty>,
}

pub fn i() -> Ty {
    Ty::sort("i")
}

impl TermGen {
    pub fn new() -> TermGen {
        let mut sig = Signature::new();
        sig.add_sort("i").unwrap();
        let i1 = Ty::arrow(i(), i());
        let types = vec![
            i(),
            i1.clone(),
            Ty::arrows(&[i(), i()], i()),
            Ty::arrow(i1.clone(), i()),
            Ty::arrow(Ty::arrow(i1.clone(), i()), i()),
        ];
        let decls = [
            ("a", i()),
            ("b", i()),
            ("f", i1.clone()),
            ("g", Ty::arrows(&[i(), i()], i())),
            ("h", Ty::arrow(i1.clone(), i())),
            ("k", Ty::arrows(&[Ty::arrows(&[i(), i()], i()), i()], i())),
            ("q", Ty::arrow(Ty::arrow(i1.clone(), i()), i())),
        ];
        let consts = decls.iter().map(|(n, t)| (sig.declare(n, t.clone()).unwrap(), t.clone())).collect();
        TermGen {
            sig: Rc::new(sig),
            consts,
            types,
            var_tys: vec![i1, i()],
        }
    }

    /// A term of type `ty` in a context of binder types (innermost last).
    pub fn gen(&self, rng: &mut StdRng, ty: &Ty, ctx: &mut Vec<Ty>, size: i32) -> Term {
        if ty.is_arrow() && (size <= 2 || rng.gen_bool(0.7)) {
            let (args, _) = ty.split();
            let rest = ty.drop_args(1).unwrap();
            ctx.push(args[0].clone());
            let b = self.gen(rng, &rest, ctx, size - 1);
            ctx.pop();
            return Term::lam(b);
        }
        if size > 3 && rng.gen_bool(0.4) {
            // a redex
            let sty = self.types[rng.gen_range(0..3)].clone();
            ctx.push(sty.clone());
            let body = self.gen(rng, ty, ctx, size / 2);
            ctx.pop();
            let arg = self.gen(rng, &sty, ctx, size / 2);
            return Term::App(Box::new(Term::lam(body)), vec![arg]);
        }
        let mut heads: Vec<(Term, Ty)> = Vec::new();
        for (c, t) in &self.consts {
            heads.push((Term::Const(*c), t.clone()));
        }
        for (j, t) in ctx.iter().rev().enumerate() {
            heads.push((Term::Index(j as u32 + 1), t.clone()));
        }
        for (s, t) in self.var_tys.iter().enumerate() {
            heads.push((Term::Var(Slot(s as u32)), t.clone()));
        }
        let fits: Vec<(Term, Vec<Ty>)> = heads
            .into_iter()
            .filter_map(|(h, t)| {
                let (args, _) = t.split();
                (0..=args.len())
                    .find(|&p| t.drop_args(p).as_ref() == Some(ty))
                    .map(|p| (h, args[..p].to_vec()))
            })
            .filter(|(_, args)| size > 1 || args.is_empty())
            .collect();
        if fits.is_empty() {
            // only arrow types can lack an atom
            let (args, _) = ty.split();
            let rest = ty.drop_args(1).unwrap();
            ctx.push(args[0].clone());
            let b = self.gen(rng, &rest, ctx, size - 1);
            ctx.pop();
            return Term::lam(b);
        }
        let (h, arg_tys) = fits[rng.gen_range(0..fits.len())].clone();
        let share = (size - 1) * 3 / (2 * arg_tys.len().max(1) as i32);
        let args = arg_tys.iter().map(|t| self.gen(rng, t, ctx, share.max(1))).collect();
        mk_app(h, args)
    }

    /// A closed-context random term of size at most `max` and type order
    /// at most 3.
    pub fn term(&self, rng: &mut StdRng, max: usize) -> (Term, Ty) {
        loop {
            let ty = self.types[rng.gen_range(0..self.types.len())].clone();
            let size = rng.gen_range((max as i32 / 4).max(1)..=max as i32);
            let t = self.gen(rng, &ty, &mut Vec::new(), size);
            if t.size() <= max && t.size() >= max / 5 {
                return (t, ty);
            }
        }
    }

    /// Engine normal form of `t`, with variables mapped back to their slots.
    pub fn engine_nf(&self, t: &Term) -> Term {
        let mut store = Store::new(self.sig.clone());
        let vars: Vec<TermRef> = self.var_tys.iter().map(|t| store.mk_var(t.clone(), None)).collect();
        let ids: HashMap<u32, u32> = vars
            .iter()
            .enumerate()
            .map(|(s, &v)| {
                let (_, id) = store.unbound_var(v).unwrap();
                (id.0, s as u32)
            })
            .collect();
        let r = store.import(t, &mut |_, s| vars[s.0 as usize]);
        let n = store.nf(r).unwrap();
        n.map_vars(&mut |s| Term::Var(Slot(ids[&s.0])))
    }
}

// ---------------------------------------------------------------------------
// brute-force unifiers

/// Renames variables to `Slot(0)`, `Slot(1)`, ... in order of first
/// appearance across the tuple.
pub fn canonical(ts: &[Term]) -> Vec<Term> {
    let mut map: HashMap<u32, u32> = HashMap::new();
    ts.iter()
        .map(|t| {
            t.map_vars(&mut |s| {
                let n = map.len() as u32;
                Term::Var(Slot(*map.entry(s.0).or_insert(n)))
            })
        })
        .collect()
}

fn instantiate(t: &Term, subst: &[Option<Term>]) -> Term {
    match t {
        Term::Var(s) => match &subst[s.0 as usize] {
            Some(v) => instantiate(v, subst),
            None => t.clone(),
        },
        Term::App(h, args) => mk_app(instantiate(h, subst), args.iter().map(|a| instantiate(a, subst)).collect()),
        Term::Lam(b) => Term::Lam(Box::new(instantiate(b, subst))),
        t => t.clone(),
    }
}

fn strip(t: &Term) -> (u32, &Term) {
    let mut n = 0;
    let mut t = t;
    while let Term::Lam(b) = t {
        n += 1;
        t = b;
    }
    (n, t)
}

/// The body of `t` seen under `n` binders (eta-expanding as needed).
fn body_under(t: &Term, n: u32) -> Term {
    let (k, b) = strip(t);
    let extra = n - k;
    if extra == 0 {
        return b.clone();
    }
    let args = (1..=extra).rev().map(Term::Index).collect();
    mk_app(shift(b, extra as i64, 0), args)
}

fn head_args(t: &Term) -> (&Term, &[Term]) {
    match t {
        Term::App(h, args) => (h, args),
        t => (t, &[]),
    }
}

struct Node {
    subst: Vec<Option<Term>>,
    tys: Vec<Ty>,
    depth: u32,
}

enum Simpl {
    Fail,
    /// All remaining pairs are flex-flex.
    Solved,
    /// The first flex-rigid pair: the variable and the rigid head.
    FlexRigid(Slot, Term),
}

fn simpl(pairs: &[(Term, Term)], subst: &[Option<Term>]) -> Simpl {
    let mut work: Vec<(Term, Term)> = pairs
        .iter()
        .map(|(l, r)| (naive_normalize(&instantiate(l, subst)), naive_normalize(&instantiate(r, subst))))
        .collect();
    work.reverse();
    let mut first = None;
    while let Some((l, r)) = work.pop() {
        let n = strip(&l).0.max(strip(&r).0);
        let (bl, br) = (naive_normalize(&body_under(&l, n)), naive_normalize(&body_under(&r, n)));
        let (hl, al) = head_args(&bl);
        let (hr, ar) = head_args(&br);
        match (hl, hr) {
            (Term::Var(_), Term::Var(_)) => {}
            (Term::Var(v), h) | (h, Term::Var(v)) => {
                if first.is_none() {
                    first = Some((*v, h.clone()));
                }
            }
            (h1, h2) => {
                if h1 != h2 || al.len() != ar.len() {
                    return Simpl::Fail;
                }
                for (x, y) in al.iter().zip(ar).rev() {
                    work.push((Term::lams(n as usize, x.clone()), Term::lams(n as usize, y.clone())));
                }
            }
        }
    }
    match first {
        Some((v, h)) => Simpl::FlexRigid(v, h),
        None => Simpl::Solved,
    }
}

/// Breadth-first expansion of the matching tree of `pairs` to `depth`
/// substitution steps. Returns the canonical solutions for the first
/// `var_tys.len()` slots and whether some branch was cut off.
pub fn brute_force_unifiers(sig: &Signature, pairs: &[(Term, Term)], var_tys: &[Ty], depth: u32) -> (HashSet<Vec<Term>>, bool) {
    let n = var_tys.len();
    let mut out = HashSet::new();
    let mut truncated = false;
    let mut queue = VecDeque::from([Node {
        subst: vec![None; n],
        tys: var_tys.to_vec(),
        depth: 0,
    }]);
    while let Some(node) = queue.pop_front() {
        match simpl(pairs, &node.subst) {
            Simpl::Fail => {}
            Simpl::Solved => {
                let sol: Vec<Term> = (0..n)
                    .map(|s| naive_normalize(&instantiate(&Term::Var(Slot(s as u32)), &node.subst)))
                    .collect();
                out.insert(canonical(&sol));
            }
            Simpl::FlexRigid(v, head) => {
                if node.depth == depth {
                    truncated = true;
                    continue;
                }
                let fty = node.tys[v.0 as usize].clone();
                let (xs, target) = fty.split();
                let k = xs.len();
                let mut bodies: Vec<(Term, Vec<Ty>)> = Vec::new();
                if let Term::Const(c) = head {
                    let (cargs, ctarget) = sig.ty(c).split();
                    if ctarget == target {
                        bodies.push((Term::Const(c), cargs));
                    }
                }
                for (i, xt) in xs.iter().enumerate() {
                    let (pargs, ptarget) = xt.split();
                    if ptarget == target {
                        bodies.push((Term::Index((k - i) as u32), pargs));
                    }
                }
                for (h, arg_tys) in bodies {
                    let mut tys = node.tys.clone();
                    let mut subst = node.subst.clone();
                    let args = arg_tys
                        .iter()
                        .map(|at| {
                            let slot = Slot(tys.len() as u32);
                            tys.push(Ty::arrows(&xs, at.clone()));
                            subst.push(None);
                            mk_app(Term::Var(slot), (1..=k as u32).rev().map(Term::Index).collect())
                        })
                        .collect();
                    subst[v.0 as usize] = Some(Term::lams(k, mk_app(h, args)));
                    queue.push_back(Node {
                        subst,
                        tys,
                        depth: node.depth + 1,
                    });
                }
            }
        }
    }
    (out, truncated)
}

/// The engine's preunifiers for the same problem, canonicalized.
pub fn engine_unifiers(sig: &Rc<Signature>, pairs: &[(Term, Term)], var_tys: &[Ty], depth: u32, order: MatchOrder) -> (Vec<Vec<Term>>, bool) {
    let mut store = Store::new(sig.clone());
    let vars: Vec<TermRef> = var_tys.iter().map(|t| store.mk_var(t.clone(), None)).collect();
    let eqs = pairs
        .iter()
        .map(|(l, r)| {
            let l = store.import(l, &mut |_, s| vars[s.0 as usize]);
            let r = store.import(r, &mut |_, s| vars[s.0 as usize]);
            Eqn::new(l, r)
        })
        .collect();
    let (sols, cut) = solve_unify(&mut store, eqs, &vars, depth, order).unwrap();
    (sols.iter().map(|s| canonical(s)).collect(), cut)
}

/// A unification problem written as a query `eq L1 R1, eq L2 R2, ...`
/// over the corpus signature.
pub struct Problem {
    pub text: String,
    pub pairs: Vec<(Term, Term)>,
    pub var_tys: Vec<Ty>,
}

pub const UNIFY_SIG: &str = "
kind i type.
type a, b, c i.
type f i -> i.
type g i -> i -> i.
type h i -> i -> i -> i.
type p (i -> i) -> i.
type eq i -> i -> o.
type eq1 (i -> i) -> (i -> i) -> o.
type eq2 (i -> i -> i) -> (i -> i -> i) -> o.
";

fn conjuncts(sig: &Signature, t: &Term, out: &mut Vec<(Term, Term)>) {
    let (h, args) = head_args(t);
    if let Term::Const(c) = h {
        if *c == AND {
            conjuncts(sig, &args[0], out);
            conjuncts(sig, &args[1], out);
            return;
        }
        assert!(sig.name(*c).starts_with("eq") && args.len() == 2, "not a pair: {t:?}");
        out.push((args[0].clone(), args[1].clone()));
    }
}

pub fn parse_problem(program: &mut Program, text: &str) -> Problem {
    let q = program.query(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    let mut pairs = Vec::new();
    conjuncts(&program.sig, &q.goal, &mut pairs);
    Problem {
        text: text.to_string(),
        pairs,
        var_tys: q.vars.tys.clone(),
    }
}

pub fn unify_program() -> Program {
    Program::from_source(UNIFY_SIG).unwrap().0
}

/// The checked-in flex-rigid corpus: one problem per non-comment line.
pub fn flex_rigid_corpus() -> Vec<String> {
    let src = std::fs::read_to_string(data_dir().join("corpus").join("flex_rigid.txt")).unwrap();
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'))
        .map(String::from)
        .collect()
}

// ---------------------------------------------------------------------------
// programs and engines

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

/// Every program file of the regression corpus with its embedded queries.
pub fn corpus() -> Vec<(String, Program, Vec<Query>)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(data_dir().join("programs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "hopl"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let src = std::fs::read_to_string(&f).unwrap();
            let name = f.file_stem().unwrap().to_string_lossy().into_owned();
            let (p, qs) = Program::from_source(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, p, qs)
        })
        .collect()
}

pub fn load(name: &str) -> Program {
    let src = std::fs::read_to_string(data_dir().join("programs").join(format!("{name}.hopl"))).unwrap();
    Program::from_source(&src).unwrap().0
}

/// Displayed answers (at most `limit`) and the final depth flag.
pub fn run(engine: Engine, program: &Program, query: &Query, limit: usize) -> (Vec<String>, bool) {
    let code = vm::compile(program);
    let mut s = Answers::new(engine, program, &code, query, Config::default(), Store::new(program.sig.clone()));
    let out = s.by_ref().take(limit).map(|a| a.unwrap().display(&program.sig)).collect();
    (out, s.depth_exceeded())
}

pub fn run_text(engine: Engine, program: &mut Program, query: &str, limit: usize) -> Vec<String> {
    let q = program.query(query).unwrap();
    run(engine, program, &q, limit).0
}

/// `[e1, ..., en]` as a `::` list of constants named `c1`, `c2`, ...
pub fn list_source(n: usize) -> String {
    let mut s = String::from("nil");
    for k in (1..=n).rev() {
        s = format!("c{k} :: {s}");
    }
    s
}

// ---------------------------------------------------------------------------
// first-order resolution

type Bindings = HashMap<u32, Term>;

fn fo_walk(t: &Term, b: &Bindings) -> Term {
    match t {
        Term::Var(s) => match b.get(&s.0) {
            Some(v) => fo_walk(v, b),
            None => t.clone(),
        },
        Term::App(h, args) => Term::App(h.clone(), args.iter().map(|a| fo_walk(a, b)).collect()),
        t => t.clone(),
    }
}

fn fo_occurs(v: u32, t: &Term) -> bool {
    match t {
        Term::Var(s) => s.0 == v,
        Term::App(_, args) => args.iter().any(|a| fo_occurs(v, a)),
        _ => false,
    }
}

fn fo_unify(x: &Term, y: &Term, b: &mut Bindings) -> bool {
    let (x, y) = (fo_walk(x, b), fo_walk(y, b));
    match (&x, &y) {
        (Term::Var(s), Term::Var(t)) if s == t => true,
        (Term::Var(s), t) | (t, Term::Var(s)) => {
            if fo_occurs(s.0, t) {
                return false;
            }
            b.insert(s.0, t.clone());
            true
        }
        (Term::Const(c), Term::Const(d)) => c == d,
        (Term::App(h1, a1), Term::App(h2, a2)) => h1 == h2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(p, q)| fo_unify(p, q, b)),
        _ => false,
    }
}

fn fo_rename(t: &Term, base: u32) -> Term {
    t.map_vars(&mut |s| Term::Var(Slot(s.0 + base)))
}

fn fo_goals(t: &Term, out: &mut Vec<Term>) {
    let (h, args) = head_args(t);
    match h {
        Term::Const(c) if *c == AND => {
            fo_goals(&args[0], out);
            fo_goals(&args[1], out);
        }
        Term::Const(c) if *c == TOP => {}
        _ => out.push(t.clone()),
    }
}

/// SLD resolution with occurs check, depth-first and left to right, for
/// first-order programs whose bodies are conjunctions of atoms. Returns the
/// canonical instances of the named query variables.
pub fn fo_answers(program: &Program, query: &Query, limit: usize) -> Vec<Vec<Term>> {
    struct St<'a> {
        p: &'a Program,
        next: u32,
        out: Vec<Vec<Term>>,
        limit: usize,
        qvars: Vec<Slot>,
    }
    fn solve(st: &mut St, goals: Vec<Term>, b: Bindings) {
        if st.out.len() >= st.limit {
            return;
        }
        let Some((g, rest)) = goals.split_first() else {
            let sol: Vec<Term> = st.qvars.iter().map(|s| fo_walk(&Term::Var(*s), &b)).collect();
            st.out.push(canonical(&sol));
            return;
        };
        let (h, args) = head_args(g);
        let Term::Const(pred) = h else { panic!("not first-order: {g:?}") };
        assert!(st.p.sig.logical(*pred).is_none() || st.p.sig.logical(*pred) == Some(Logical::Top));
        for c in st.p.clauses_for(*pred) {
            let base = st.next;
            st.next += c.vars.len() as u32;
            let mut b2 = b.clone();
            let ok = c.args.iter().zip(args).all(|(ca, ga)| fo_unify(&fo_rename(ca, base), ga, &mut b2));
            if ok {
                let mut gs = Vec::new();
                if let Some(body) = &c.body {
                    fo_goals(&fo_rename(body, base), &mut gs);
                }
                gs.extend_from_slice(rest);
                solve(st, gs, b2);
            }
        }
    }
    let mut st = St {
        p: program,
        next: query.vars.len() as u32,
        out: Vec::new(),
        limit,
        qvars: query.answer_vars().into_iter().map(|(s, _)| s).collect(),
    };
    let mut goals = Vec::new();
    fo_goals(&query.goal, &mut goals);
    solve(&mut st, goals, Bindings::new());
    st.out
}

/// The engine's answers to the same query, as canonical binding tuples.
pub fn engine_tuples(engine: Engine, program: &Program, query: &Query, limit: usize) -> Vec<Vec<Term>> {
    let code = vm::compile(program);
    Answers::new(engine, program, &code, query, Config::default(), Store::new(program.sig.clone()))
        .take(limit)
        .map(|a| {
            let a = a.unwrap();
            assert!(a.residual.is_empty());
            canonical(&a.bindings.iter().map(|(_, t)| t.clone()).collect::<Vec<_>>())
        })
        .collect()
}
