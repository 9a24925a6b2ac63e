//! Clause compiler.
//!
//! Registers follow the usual WAM conventions: a clause's head arguments
//! arrive in A1..An; variables occurring in more than one chunk (the head
//! with the first goal, then each further goal) live in the environment as
//! Y registers, numbered by first occurrence in the body; the others are
//! kept in A registers, preferably the one they are passed in to the
//! first goal. Registers needed to set up the first goal's arguments are
//! not used for temporaries during head unification.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{Addr, Callee, Code, Instr, Reg, TyId, FAIL, HALT, SOLVE, SOLVE_AND};
use crate::frontend::{Clause, Program};
use crate::term::{ConstId, Logical, Signature, Slot, Term, Ty};

/// Compiles every declared predicate of `program`.
pub fn compile(program: &Program) -> Code {
    let sig = &*program.sig;
    let mut c = Compiler {
        sig,
        instrs: vec![
            Instr::Fail,
            Instr::Halt,
            Instr::Solve,
            Instr::PutValue(Reg::Y(1), 1),
            Instr::Deallocate,
            Instr::Execute(Callee::Solve),
        ],
        types: Vec::new(),
        labels: HashMap::new(),
    };
    debug_assert_eq!(c.instrs[FAIL], Instr::Fail);
    debug_assert_eq!(c.instrs[HALT], Instr::Halt);
    debug_assert_eq!(c.instrs[SOLVE], Instr::Solve);
    debug_assert!(matches!(c.instrs[SOLVE_AND], Instr::PutValue(..)));
    let mut entries = HashMap::new();
    let mut preds = Vec::new();
    for pred in program.predicates() {
        let start = c.instrs.len();
        let clauses: Vec<&Clause> = program.clauses_for(pred).collect();
        c.predicate(pred, &clauses);
        entries.insert(pred, start);
        preds.push((pred, start..c.instrs.len()));
    }
    Code {
        instrs: c.instrs,
        entries,
        preds,
        labels: c.labels,
        types: c.types,
    }
}

struct Compiler<'a> {
    sig: &'a Signature,
    instrs: Vec<Instr>,
    types: Vec<Ty>,
    labels: HashMap<Addr, String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum FirstArg {
    Any,
    Const,
    List,
}

impl Compiler<'_> {
    fn emit(&mut self, i: Instr) -> Addr {
        self.instrs.push(i);
        self.instrs.len() - 1
    }

    fn is_cons(&self, c: ConstId, n: usize) -> bool {
        n == 2 && self.sig.name(c) == "::"
    }

    fn first_arg(&self, c: &Clause, ty: &Ty) -> FirstArg {
        if ty.is_arrow() {
            return FirstArg::Any;
        }
        match &c.args[0] {
            Term::Const(_) => FirstArg::Const,
            Term::App(h, args) => match **h {
                Term::Const(f) if self.is_cons(f, args.len()) => FirstArg::List,
                Term::Const(_) => FirstArg::Const,
                _ => FirstArg::Any,
            },
            _ => FirstArg::Any,
        }
    }

    fn predicate(&mut self, pred: ConstId, clauses: &[&Clause]) {
        let (arg_tys, _) = self.sig.ty(pred).split();
        let arity = arg_tys.len() as u32;
        match clauses {
            [] => {
                if arity > 0 {
                    self.emit(Instr::SwitchOnTerm([None; 4]));
                } else {
                    self.emit(Instr::Fail);
                }
            }
            [c] => self.clause(c),
            _ => {
                let switch = (arity > 0).then(|| self.emit(Instr::SwitchOnTerm([None; 4])));
                let mut chain = Vec::new();
                let mut bodies = Vec::new();
                let n = clauses.len();
                for (k, c) in clauses.iter().enumerate() {
                    let at = self.emit(match k {
                        0 => Instr::TryMeElse(FAIL, arity),
                        _ if k + 1 == n => Instr::TrustMe(arity),
                        _ => Instr::RetryMeElse(FAIL, arity),
                    });
                    self.labels.insert(at, format!("L{}", 2 + 2 * k));
                    let body = self.instrs.len();
                    self.labels.insert(body, format!("L{}", 3 + 2 * k));
                    chain.push(at);
                    bodies.push(body);
                    self.clause(c);
                }
                for k in 0..n - 1 {
                    match &mut self.instrs[chain[k]] {
                        Instr::TryMeElse(l, _) | Instr::RetryMeElse(l, _) => *l = chain[k + 1],
                        _ => {}
                    }
                }
                if let Some(s) = switch {
                    let kinds: Vec<FirstArg> = clauses.iter().map(|c| self.first_arg(c, &arg_tys[0])).collect();
                    let pick = |want: Option<FirstArg>| {
                        let cands: Vec<usize> = (0..n)
                            .filter(|&k| kinds[k] == FirstArg::Any || Some(kinds[k]) == want)
                            .collect();
                        match cands.as_slice() {
                            [] => None,
                            [k] => Some(bodies[*k]),
                            _ => Some(chain[0]),
                        }
                    };
                    let targets = [
                        Some(chain[0]),
                        pick(Some(FirstArg::Const)),
                        pick(Some(FirstArg::List)),
                        pick(None),
                    ];
                    self.instrs[s] = Instr::SwitchOnTerm(targets);
                }
            }
        }
    }

    fn ty_id(&mut self, ty: &Ty) -> TyId {
        let i = match self.types.iter().position(|t| t == ty) {
            Some(i) => i,
            None => {
                self.types.push(ty.clone());
                self.types.len() - 1
            }
        };
        TyId(i as u32)
    }

    fn clause(&mut self, clause: &Clause) {
        let start = self.instrs.len();
        let mut vars = clause.vars.tys.clone();
        let mut goals = Vec::new();
        if let Some(b) = &clause.body {
            flatten(self.sig, b, &mut vars, &mut goals);
        }
        let mut cc = ClauseCompiler::new(self, clause, vars, &goals);
        cc.run();
        let max_reg = self.instrs[start..].iter().map(max_a_reg).max().unwrap_or(0);
        for i in &mut self.instrs[start..] {
            match i {
                Instr::ExecuteFinishUnify { save, .. } | Instr::CallFinishUnify { save, .. } => *save = max_reg,
                _ => {}
            }
        }
    }
}

fn max_a_reg(i: &Instr) -> u32 {
    use Instr::*;
    let r = |r: &Reg| match r {
        Reg::A(a) => *a,
        Reg::Y(_) => 0,
    };
    match i {
        PutVariable(v, a, _) | PutValue(v, a) | GetVariable(v, a) | GetValue(v, a) => r(v).max(*a),
        PutConstant(_, a) | PutIndex(a, _) | GetConstant(_, a) | GetNil(_, a) | GetList(_, a) => *a,
        PutCapp(a, x, _) | PutFapp(a, x, _) | PutClambda(a, x) | PutFlambda(a, x) => (*a).max(*x),
        GlobalizeY(_, x) | UnifyClambda(x) | UnifyFlambda(x) => *x,
        GetStructure(a, _, _) => *a,
        UnifyVariable(v, _) | UnifyValue(v, _) | SetValue(v) => r(v),
        _ => 0,
    }
}

enum Goal {
    Rigid(ConstId, Vec<Term>),
    /// A goal whose head is a variable, or any other goal the builtin has
    /// to take apart at run time.
    Solve(Term),
}

impl Goal {
    fn call_arity(&self) -> usize {
        match self {
            Goal::Rigid(_, args) => args.len(),
            Goal::Solve(_) => 1,
        }
    }

    fn for_each_var(&self, f: &mut impl FnMut(Slot)) {
        match self {
            Goal::Rigid(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
            Goal::Solve(t) => t.for_each_var(f),
        }
    }
}

/// Splits a body into its sequence of goals. Existential variables become
/// clause variables; disjunctions are left to `solve`.
fn flatten(sig: &Signature, t: &Term, vars: &mut Vec<Ty>, out: &mut Vec<Goal>) {
    match t {
        Term::Const(c) if sig.logical(*c) == Some(Logical::Top) => {}
        Term::Const(c) if sig.logical(*c).is_none() => out.push(Goal::Rigid(*c, Vec::new())),
        Term::App(h, args) => match **h {
            Term::Const(c) => match sig.logical(c) {
                Some(Logical::And) => {
                    flatten(sig, &args[0], vars, out);
                    flatten(sig, &args[1], vars, out);
                }
                Some(Logical::Sigma) if matches!(args[0], Term::Lam(_)) => {
                    let Term::Lam(body) = &args[0] else { unreachable!() };
                    let (tys, _) = sig.ty(c).split();
                    let (binder, _) = tys[0].split();
                    let slot = Slot(vars.len() as u32);
                    vars.push(binder[0].clone());
                    flatten(sig, &body.instantiate(&Term::Var(slot)), vars, out);
                }
                None => out.push(Goal::Rigid(c, args.clone())),
                _ => out.push(Goal::Solve(t.clone())),
            },
            _ => out.push(Goal::Solve(t.clone())),
        },
        _ => out.push(Goal::Solve(t.clone())),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Occ {
    Free,
    /// An incoming argument not yet unified.
    HeadArg,
    Var(Slot),
    Busy,
}

enum Shape<'t> {
    Var(Slot),
    Const(ConstId),
    Struct(ConstId, &'t [Term]),
    /// Abstractions, applied variables and arguments of function type:
    /// built on the heap and unified interpretively.
    Higher,
}

struct ClauseCompiler<'c, 'a> {
    c: &'c mut Compiler<'a>,
    clause: &'c Clause,
    vars: Vec<Ty>,
    goals: &'c [Goal],
    perm: HashMap<Slot, u32>,
    loc: HashMap<Slot, Reg>,
    seen: HashSet<Slot>,
    occ: Vec<Occ>,
    reserved: u32,
    prefer: HashMap<Slot, u32>,
}

impl<'c, 'a> ClauseCompiler<'c, 'a> {
    fn new(c: &'c mut Compiler<'a>, clause: &'c Clause, vars: Vec<Ty>, goals: &'c [Goal]) -> Self {
        let mut chunks: HashMap<Slot, HashSet<usize>> = HashMap::new();
        for a in &clause.args {
            a.for_each_var(&mut |s| {
                chunks.entry(s).or_default().insert(0);
            });
        }
        for (k, g) in goals.iter().enumerate() {
            g.for_each_var(&mut |s| {
                chunks.entry(s).or_default().insert(k);
            });
        }
        let mut perm = HashMap::new();
        for g in goals {
            g.for_each_var(&mut |s| {
                if chunks[&s].len() > 1 && !perm.contains_key(&s) {
                    let n = perm.len() as u32 + 1;
                    perm.insert(s, n);
                }
            });
        }
        let mut prefer = HashMap::new();
        if let Some(Goal::Rigid(_, args)) = goals.first() {
            for (j, a) in args.iter().enumerate() {
                if let Term::Var(s) = a {
                    prefer.entry(*s).or_insert(j as u32 + 1);
                }
            }
        }
        let reserved = goals.first().map_or(0, |g| g.call_arity() as u32);
        ClauseCompiler {
            c,
            clause,
            vars,
            goals,
            perm,
            loc: HashMap::new(),
            seen: HashSet::new(),
            occ: vec![Occ::Free],
            reserved,
            prefer,
        }
    }

    fn emit(&mut self, i: Instr) {
        self.c.emit(i);
    }

    fn var_ty(&mut self, s: Slot) -> TyId {
        let t = self.vars[s.0 as usize].clone();
        self.c.ty_id(&t)
    }

    fn occ_at(&mut self, r: u32) -> &mut Occ {
        let r = r as usize;
        if self.occ.len() <= r {
            self.occ.resize(r + 1, Occ::Free);
        }
        &mut self.occ[r]
    }

    fn alloc(&mut self, avoid_reserved: bool) -> u32 {
        let mut r = 1;
        loop {
            if *self.occ_at(r) == Occ::Free && !(avoid_reserved && r <= self.reserved) {
                return r;
            }
            r += 1;
        }
    }

    fn release(&mut self, r: u32) {
        if *self.occ_at(r) == Occ::Busy {
            *self.occ_at(r) = Occ::Free;
        }
    }

    fn shape<'t>(&self, t: &'t Term, ty: &Ty) -> Shape<'t> {
        match t {
            Term::Var(s) => Shape::Var(*s),
            _ if ty.is_arrow() => Shape::Higher,
            Term::Const(c) => Shape::Const(*c),
            Term::App(h, args) => match **h {
                Term::Const(c) => Shape::Struct(c, args),
                _ => Shape::Higher,
            },
            _ => Shape::Higher,
        }
    }

    fn run(&mut self) {
        let goals = self.goals;
        let (arg_tys, _) = self.c.sig.ty(self.clause.pred).split();
        let arity = arg_tys.len() as u32;
        if goals.len() > 1 {
            self.emit(Instr::Allocate);
        }
        self.head(&arg_tys);

        let distinct_vars = {
            let mut seen = HashSet::new();
            self.clause
                .args
                .iter()
                .all(|a| matches!(a, Term::Var(s) if seen.insert(*s)))
        };
        let perms = self.perm.len() as u32;
        match goals.len() {
            0 => self.emit(if distinct_vars {
                Instr::Proceed
            } else {
                Instr::ProceedFinishUnify
            }),
            1 if !distinct_vars => self.emit(Instr::ExecuteFinishUnify { n: arity, save: 0 }),
            _ if !distinct_vars => self.emit(Instr::CallFinishUnify {
                n: arity,
                perms,
                save: 0,
            }),
            _ => {}
        }
        self.reserved = 0;
        for (k, g) in goals.iter().enumerate() {
            if k > 0 {
                self.occ = vec![Occ::Free];
            }
            let callee = self.goal_args(g);
            if k + 1 == goals.len() {
                if goals.len() > 1 {
                    self.emit(Instr::Deallocate);
                }
                self.emit(Instr::Execute(callee));
            } else {
                self.emit(Instr::Call(callee, perms));
            }
        }
    }

    fn head(&mut self, arg_tys: &[Ty]) {
        let clause = self.clause;
        for i in 1..=arg_tys.len() as u32 {
            *self.occ_at(i) = Occ::HeadArg;
        }
        let mut deferred = Vec::new();
        for (i, (a, ty)) in clause.args.iter().zip(arg_tys).enumerate() {
            let r = i as u32 + 1;
            let mut queue = VecDeque::new();
            match self.shape(a, ty) {
                Shape::Var(s) => {
                    if self.seen.insert(s) {
                        if let Some(&y) = self.perm.get(&s) {
                            self.loc.insert(s, Reg::Y(y));
                            self.emit(Instr::GetVariable(Reg::Y(y), r));
                            *self.occ_at(r) = Occ::Free;
                        } else {
                            self.loc.insert(s, Reg::A(r));
                            *self.occ_at(r) = Occ::Var(s);
                        }
                    } else {
                        let v = self.loc[&s];
                        self.emit(Instr::GetValue(v, r));
                        *self.occ_at(r) = Occ::Free;
                    }
                }
                Shape::Const(c) => {
                    self.get_constant(c, r);
                    *self.occ_at(r) = Occ::Free;
                }
                Shape::Struct(f, args) => queue.push_back((r, f, args)),
                Shape::Higher => deferred.push((r, a)),
            }
            while let Some((r, f, args)) = queue.pop_front() {
                self.get_structure(r, f, args, &mut queue, &mut deferred);
            }
        }
        for (r, t) in deferred {
            let b = self.build(t, None, true);
            self.emit(Instr::GetValue(Reg::A(b), r));
            self.release(b);
            *self.occ_at(r) = Occ::Free;
        }
    }

    fn get_constant(&mut self, c: ConstId, r: u32) {
        if self.c.sig.name(c) == "nil" {
            self.emit(Instr::GetNil(c, r));
        } else {
            self.emit(Instr::GetConstant(c, r));
        }
    }

    fn get_structure<'t>(
        &mut self,
        r: u32,
        f: ConstId,
        args: &'t [Term],
        queue: &mut VecDeque<(u32, ConstId, &'t [Term])>,
        deferred: &mut Vec<(u32, &'t Term)>,
    ) {
        if self.c.is_cons(f, args.len()) {
            self.emit(Instr::GetList(f, r));
        } else {
            self.emit(Instr::GetStructure(r, f, args.len() as u32));
        }
        *self.occ_at(r) = Occ::Free;
        let (tys, _) = self.c.sig.ty(f).split();
        for (a, ty) in args.iter().zip(&tys) {
            match self.shape(a, ty) {
                Shape::Var(s) => {
                    if self.seen.contains(&s) {
                        let v = self.loc[&s];
                        let t = self.var_ty(s);
                        self.emit(Instr::UnifyValue(v, t));
                    } else {
                        let v = self.first_var_reg(s);
                        let t = self.var_ty(s);
                        self.emit(Instr::UnifyVariable(v, t));
                    }
                }
                Shape::Const(c) => self.emit(Instr::UnifyConstant(c)),
                shape => {
                    let x = self.alloc(true);
                    *self.occ_at(x) = Occ::Busy;
                    let t = self.c.ty_id(ty);
                    self.emit(Instr::UnifyVariable(Reg::A(x), t));
                    match shape {
                        Shape::Struct(g, sub) => queue.push_back((x, g, sub)),
                        _ => deferred.push((x, a)),
                    }
                }
            }
        }
    }

    /// Home of a variable at its first occurrence during head unification.
    fn first_var_reg(&mut self, s: Slot) -> Reg {
        self.seen.insert(s);
        let v = if let Some(&y) = self.perm.get(&s) {
            Reg::Y(y)
        } else {
            let r = match self.prefer.get(&s).copied() {
                Some(p) if *self.occ_at(p) == Occ::Free => p,
                _ => self.alloc(true),
            };
            *self.occ_at(r) = Occ::Var(s);
            Reg::A(r)
        };
        self.loc.insert(s, v);
        v
    }

    /// A fresh temporary for a variable first met in the body.
    fn body_var_reg(&mut self, s: Slot, target: Option<u32>) -> Reg {
        self.seen.insert(s);
        let v = if let Some(&y) = self.perm.get(&s) {
            Reg::Y(y)
        } else {
            let r = match target {
                Some(t) => t,
                None => {
                    let r = self.alloc(self.reserved > 0);
                    *self.occ_at(r) = Occ::Var(s);
                    r
                }
            };
            Reg::A(r)
        };
        self.loc.insert(s, v);
        v
    }

    /// Emits code leaving `t` in a register (the target if given) and
    /// returns that register.
    fn build(&mut self, t: &Term, target: Option<u32>, avoid: bool) -> u32 {
        let take = |this: &mut Self| match target {
            Some(r) => r,
            None => {
                let r = this.alloc(avoid);
                *this.occ_at(r) = Occ::Busy;
                r
            }
        };
        match t {
            Term::Var(s) => {
                if !self.seen.contains(s) {
                    let ty = self.var_ty(*s);
                    match self.body_var_reg(*s, target) {
                        Reg::A(r) => {
                            self.emit(Instr::PutVariable(Reg::A(r), r, ty));
                            r
                        }
                        y => {
                            let r = take(self);
                            self.emit(Instr::PutVariable(y, r, ty));
                            r
                        }
                    }
                } else {
                    match (self.loc[s], target) {
                        (Reg::A(q), None) => q,
                        (Reg::A(q), Some(r)) if q == r => r,
                        (v, _) => {
                            let r = take(self);
                            self.emit(Instr::PutValue(v, r));
                            r
                        }
                    }
                }
            }
            Term::Const(c) => {
                let r = take(self);
                self.emit(Instr::PutConstant(*c, r));
                r
            }
            Term::Index(n) => {
                let r = take(self);
                self.emit(Instr::PutIndex(r, *n));
                r
            }
            Term::Lam(b) => {
                let rb = self.build(b, None, avoid);
                let r = take(self);
                if t.max_free_index() == 0 {
                    self.emit(Instr::PutClambda(r, rb));
                } else {
                    self.emit(Instr::PutFlambda(r, rb));
                }
                self.release(rb);
                r
            }
            Term::App(h, args) => self.build_app(t, h, args, target, avoid),
        }
    }

    fn build_app(&mut self, t: &Term, h: &Term, args: &[Term], target: Option<u32>, avoid: bool) -> u32 {
        enum Part {
            Reg(u32),
            Lam(u32, bool),
        }
        let mut parts = HashMap::new();
        for (k, a) in args.iter().enumerate() {
            match a {
                Term::App(..) => {
                    let r = self.build(a, None, avoid);
                    parts.insert(k, Part::Reg(r));
                }
                Term::Lam(b) => {
                    let r = self.build(b, None, avoid);
                    parts.insert(k, Part::Lam(r, a.max_free_index() == 0));
                }
                _ => {}
            }
        }
        let hr = match h {
            Term::Var(s) if self.seen.contains(s) => match self.loc[s] {
                Reg::A(q) => q,
                Reg::Y(y) => {
                    let r = self.alloc(avoid);
                    *self.occ_at(r) = Occ::Busy;
                    self.emit(Instr::GlobalizeY(y, r));
                    r
                }
            },
            _ => self.build(h, None, avoid),
        };
        let r = match target {
            Some(r) => r,
            None => {
                let r = self.alloc(avoid);
                *self.occ_at(r) = Occ::Busy;
                r
            }
        };
        let n = args.len() as u32;
        if t.max_free_index() == 0 {
            self.emit(Instr::PutCapp(r, hr, n));
        } else {
            self.emit(Instr::PutFapp(r, hr, n));
        }
        for (k, a) in args.iter().enumerate() {
            match (a, parts.get(&k)) {
                (_, Some(Part::Reg(x))) => self.emit(Instr::SetValue(Reg::A(*x))),
                (_, Some(Part::Lam(x, closed))) => self.emit(if *closed {
                    Instr::UnifyClambda(*x)
                } else {
                    Instr::UnifyFlambda(*x)
                }),
                (Term::Var(s), _) if self.seen.contains(s) => {
                    let v = self.loc[s];
                    self.emit(Instr::SetValue(v));
                }
                (Term::Var(s), _) => {
                    let ty = self.var_ty(*s);
                    let v = self.body_var_reg(*s, None);
                    self.emit(Instr::UnifyVariable(v, ty));
                }
                (Term::Const(c), _) => self.emit(Instr::UnifyConstant(*c)),
                (Term::Index(i), _) => self.emit(Instr::UnifyIndex(*i)),
                _ => unreachable!("compound arguments are built first"),
            }
        }
        for p in parts.values() {
            let (Part::Reg(x) | Part::Lam(x, _)) = p;
            self.release(*x);
        }
        if hr != r {
            self.release(hr);
        }
        r
    }

    /// Loads the arguments of a body goal into A1..An.
    fn goal_args(&mut self, g: &Goal) -> Callee {
        let (callee, args): (Callee, Vec<&Term>) = match g {
            Goal::Rigid(c, args) => (Callee::Pred(*c), args.iter().collect()),
            Goal::Solve(t) => (Callee::Solve, vec![t]),
        };
        for i in 0..args.len() {
            let r = i as u32 + 1;
            self.evict(r, &args[i..]);
            *self.occ_at(r) = Occ::Busy;
            self.build(args[i], Some(r), false);
        }
        callee
    }

    /// Moves a variable out of `r` if a later argument still needs it.
    fn evict(&mut self, r: u32, rest: &[&Term]) {
        let Occ::Var(s) = *self.occ_at(r) else {
            *self.occ_at(r) = Occ::Free;
            return;
        };
        if matches!(rest[0], Term::Var(v) if *v == s) {
            return;
        }
        let mut needed = false;
        for t in rest {
            t.for_each_var(&mut |v| needed |= v == s);
        }
        // r stays taken so that the new home is a different register
        *self.occ_at(r) = Occ::Busy;
        if needed {
            let q = self.alloc(false);
            *self.occ_at(q) = Occ::Var(s);
            self.loc.insert(s, Reg::A(q));
            self.emit(Instr::GetVariable(Reg::A(q), r));
        }
    }
}
