//! The machine: registers, environments and the instruction loop.
//!
//! Choice points and unification branch points share the record stack of
//! [`Search`]; both save the continuation (`P`, `CP`, `E`) and the argument
//! registers that are live when the record is resumed.

use std::cell::RefCell;
use std::rc::Rc;

use super::{Addr, Callee, Code, Instr, Reg, SOLVE, SOLVE_AND, HALT};
use crate::answer::Answer;
use crate::error::EngineError;
use crate::frontend::{Program, Query};
use crate::interp::{load_query, Config};
use crate::reduce::{ArgSeq, HeadKind};
use crate::term::{ArgsRef, ConstId, Logical, Mark, Node, Store, TermRef, TOP};
use crate::unify::{Eqn, Resume, Search};

struct Env {
    ce: Option<Rc<Env>>,
    cp: Addr,
    ys: RefCell<Vec<TermRef>>,
}

/// Where execution resumes after backtracking.
pub struct Frame {
    p: Addr,
    cp: Addr,
    e: Option<Rc<Env>>,
    regs: Vec<TermRef>,
}

enum Mode {
    Read { args: ArgSeq, next: usize },
    Write { args: ArgsRef, next: u32 },
}

enum State {
    Run,
    Backtrack,
    Done,
}

enum Step {
    Next,
    Fail,
    Answer,
}

/// A lazy stream of answers computed by the machine.
pub struct VmSolver<'c> {
    code: &'c Code,
    store: Store,
    search: Search<Frame>,
    x: Vec<TermRef>,
    p: Addr,
    cp: Addr,
    e: Option<Rc<Env>>,
    mode: Mode,
    /// An application under construction, whose annotation is settled
    /// once its arguments are in.
    building: Option<TermRef>,
    /// A pair `<built, incoming>` to simplify once the structure is built.
    pending: Option<(TermRef, TermRef)>,
    qvars: Vec<(String, TermRef)>,
    state: State,
    root: Mark,
}

pub fn solve_query<'c>(code: &'c Code, program: &Program, query: &Query, config: Config) -> VmSolver<'c> {
    VmSolver::with_store(code, query, config, Store::new(program.sig.clone()))
}

impl<'c> VmSolver<'c> {
    /// The query goal is handed to `solve`; everything allocated is
    /// reclaimed once the answers are exhausted.
    pub fn with_store(code: &'c Code, query: &Query, config: Config, mut store: Store) -> VmSolver<'c> {
        store.fuel = config.fuel;
        store.tracer = config.tracer;
        let root = store.mark();
        store.hb = root.cells;
        let (goal, qvars) = load_query(&mut store, query);
        VmSolver {
            code,
            store,
            search: Search::new(config.depth, config.order),
            x: vec![goal, goal],
            p: SOLVE,
            cp: HALT,
            e: None,
            mode: Mode::Write {
                args: ArgsRef(0),
                next: 0,
            },
            building: None,
            pending: None,
            qvars,
            state: State::Run,
            root,
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn into_store(self) -> Store {
        self.store
    }

    pub fn depth_exceeded(&self) -> bool {
        self.search.depth_exceeded
    }

    fn finish(&mut self) {
        self.search.cut_to(&mut self.store, 0);
        self.store.undo_to(self.root);
        self.store.hb = self.root.cells;
        self.state = State::Done;
    }

    fn reg(&self, r: Reg) -> TermRef {
        match r {
            Reg::A(i) => self.x[i as usize],
            Reg::Y(k) => self.e.as_ref().expect("no environment").ys.borrow()[k as usize - 1],
        }
    }

    fn set(&mut self, r: Reg, t: TermRef) {
        match r {
            Reg::A(i) => self.set_x(i, t),
            Reg::Y(k) => {
                let mut ys = self.e.as_ref().expect("no environment").ys.borrow_mut();
                let k = k as usize;
                if ys.len() < k {
                    ys.resize(k, t);
                }
                ys[k - 1] = t;
            }
        }
    }

    fn set_x(&mut self, i: u32, t: TermRef) {
        let i = i as usize;
        if self.x.len() <= i {
            self.x.resize(i + 1, t);
        }
        self.x[i] = t;
    }

    fn frame(&self, p: Addr, save: u32) -> Frame {
        Frame {
            p,
            cp: self.cp,
            e: self.e.clone(),
            regs: (1..=save as usize).map(|i| self.x.get(i).copied().unwrap_or(self.x[0])).collect(),
        }
    }

    fn restore(&mut self, f: &Frame) {
        for (i, &t) in f.regs.iter().enumerate() {
            self.set_x(i as u32 + 1, t);
        }
        self.p = f.p;
        self.cp = f.cp;
        self.e = f.e.clone();
        self.building = None;
        self.pending = None;
    }

    fn simpl(&mut self, lhs: TermRef, rhs: TermRef) -> Result<Step, EngineError> {
        Ok(if self.store.simpl(vec![Eqn::new(lhs, rhs)], false)? {
            Step::Next
        } else {
            Step::Fail
        })
    }

    fn flush(&mut self) -> Result<Step, EngineError> {
        if let Some(app) = self.building.take() {
            self.store.refresh_app_mfi(app);
        }
        match self.pending.take() {
            Some((built, incoming)) => self.simpl(built, incoming),
            None => Ok(Step::Next),
        }
    }

    /// Runs the interpretive phase of unification if the live list is not
    /// empty, then continues at `f.p`.
    fn finish_unify(&mut self, f: Frame) -> Result<Step, EngineError> {
        if self.store.has_live() {
            if !self.store.simpl(Vec::new(), true)? {
                return Ok(Step::Fail);
            }
            if self.store.has_live() {
                let f = Rc::new(f);
                if !self.search.unify_steps(&mut self.store, &f)? {
                    return Ok(Step::Fail);
                }
                self.p = f.p;
                return Ok(Step::Next);
            }
        }
        self.p = f.p;
        Ok(Step::Next)
    }

    fn jump(&mut self, c: Callee) -> Step {
        match c {
            Callee::Solve => {
                self.p = SOLVE;
                Step::Next
            }
            Callee::Pred(pred) => match self.code.entry(pred) {
                Some(a) => {
                    self.store.counters.backchains += 1;
                    self.p = a;
                    Step::Next
                }
                None => Step::Fail,
            },
        }
    }

    fn get_constant(&mut self, t: TermRef, c: ConstId) -> Result<Step, EngineError> {
        let v = self.store.hnf(t)?;
        if v.binder == 0 && v.args.is_empty() {
            match self.store.node(v.head) {
                Node::Const(d) => return Ok(if c == d { Step::Next } else { Step::Fail }),
                Node::Var(_) => {
                    let k = self.store.mk_const(c);
                    self.store.bind(v.head, k);
                    return Ok(Step::Next);
                }
                _ => {}
            }
        }
        let k = self.store.mk_const(c);
        self.simpl(k, t)
    }

    fn get_structure(&mut self, t: TermRef, f: ConstId, n: u32) -> Result<Step, EngineError> {
        let v = self.store.hnf(t)?;
        if v.binder == 0 {
            match v.head_kind(&self.store) {
                HeadKind::Const => {
                    let Node::Const(g) = self.store.node(v.head) else { unreachable!() };
                    if g != f || v.args.len() != n as usize {
                        return Ok(Step::Fail);
                    }
                    self.mode = Mode::Read { args: v.args, next: 0 };
                    return Ok(Step::Next);
                }
                HeadKind::Index(_) => return Ok(Step::Fail),
                HeadKind::Var => {}
            }
        }
        // an unbound or flexible incoming term: build the structure and
        // leave the pair to the simplifier
        let head = self.store.mk_const(f);
        let args = self.store.alloc_args(n, head);
        let app = self.store.mk_app_raw(head, args, n, 0);
        self.mode = Mode::Write { args, next: 0 };
        self.building = Some(app);
        self.pending = Some((app, t));
        Ok(Step::Next)
    }

    fn start_app(&mut self, target: u32, head: u32, n: u32) {
        let h = self.x[head as usize];
        let args = self.store.alloc_args(n, h);
        let app = self.store.mk_app_raw(h, args, n, 0);
        self.set_x(target, app);
        self.mode = Mode::Write { args, next: 0 };
        self.building = Some(app);
    }

    /// Writes the next argument in write mode.
    fn put_arg(&mut self, t: TermRef) {
        let Mode::Write { args, next } = &mut self.mode else {
            panic!("write-only instruction in read mode");
        };
        self.store.set_arg(*args, *next, t);
        *next += 1;
    }

    /// The next argument in read mode, or `None` in write mode.
    fn read_arg(&mut self) -> Option<TermRef> {
        match &mut self.mode {
            Mode::Read { args, next } => {
                let t = args.get(&self.store, *next);
                *next += 1;
                Some(t)
            }
            Mode::Write { .. } => None,
        }
    }

    fn solve(&mut self) -> Result<Step, EngineError> {
        let goal = self.x[1];
        let v = self.store.hnf(goal)?;
        match v.head_kind(&self.store) {
            HeadKind::Const => {
                let Node::Const(c) = self.store.node(v.head) else { unreachable!() };
                let args = v.args.to_vec(&self.store);
                match self.store.sig.logical(c) {
                    Some(Logical::Top) => {
                        self.p = self.cp;
                    }
                    Some(Logical::And) => {
                        self.e = Some(Rc::new(Env {
                            ce: self.e.take(),
                            cp: self.cp,
                            ys: RefCell::new(vec![args[1]]),
                        }));
                        self.cp = SOLVE_AND;
                        self.x[1] = args[0];
                    }
                    Some(Logical::Or) => {
                        let mut f = self.frame(SOLVE, 0);
                        f.regs.push(args[1]);
                        self.search.push_choice(&mut self.store, f);
                        self.x[1] = args[0];
                    }
                    Some(Logical::Sigma) => {
                        let (tys, _) = self.store.sig.ty(c).split();
                        let (binder, _) = tys[0].split();
                        let x = self.store.mk_var(binder[0].clone(), None);
                        self.x[1] = self.store.mk_app(args[0], &[x]);
                    }
                    Some(Logical::Imp | Logical::Pi) => {
                        return Err(EngineError::UnsupportedGoal(self.store.sig.name(c).to_string()));
                    }
                    None => {
                        for (i, a) in args.into_iter().enumerate() {
                            self.set_x(i as u32 + 1, a);
                        }
                        return Ok(self.jump(Callee::Pred(c)));
                    }
                }
                Ok(Step::Next)
            }
            HeadKind::Var => {
                self.store.counters.flex_goals += 1;
                let Node::Var(id) = self.store.node(v.head) else { unreachable!() };
                let n = self.store.var_info(id).ty.arity() as u32;
                let top = self.store.mk_const(TOP);
                let value = self.store.mk_lams(n, top);
                self.store.bind(v.head, value);
                let f = self.frame(self.cp, 0);
                self.finish_unify(f)
            }
            HeadKind::Index(_) => unreachable!("goals are closed terms"),
        }
    }

    fn trace(&self, i: &Instr) {
        if self.store.tracer.vm {
            let mode = match (&self.mode, i.is_unify()) {
                (Mode::Read { .. }, true) => "read",
                (Mode::Write { .. }, true) => "write",
                _ => "-",
            };
            self.store.tracer.emit(format_args!(
                "vm P={} {} mode={mode} B={}",
                self.p,
                self.code.show(&self.store.sig, i),
                self.search.len()
            ));
        }
    }

    fn step(&mut self) -> Result<Step, EngineError> {
        use Instr::*;
        let i = &self.code.instrs[self.p];
        self.trace(i);
        if !i.is_unify() {
            if let Step::Fail = self.flush()? {
                return Ok(Step::Fail);
            }
        }
        let here = self.p;
        self.p += 1;
        match *i {
            PutVariable(v, a, ty) => {
                let t = self.code.types[ty.0 as usize].clone();
                let var = self.store.mk_var(t, None);
                self.set(v, var);
                self.set_x(a, var);
            }
            PutValue(v, a) => {
                let t = self.reg(v);
                self.set_x(a, t);
            }
            PutConstant(c, a) => {
                let t = self.store.mk_const(c);
                self.set_x(a, t);
            }
            PutIndex(a, n) => {
                let t = self.store.mk_index(n);
                self.set_x(a, t);
            }
            PutCapp(a, x, n) | PutFapp(a, x, n) => self.start_app(a, x, n),
            PutClambda(a, x) | PutFlambda(a, x) => {
                let t = self.store.mk_lam(self.x[x as usize]);
                self.set_x(a, t);
            }
            GlobalizeY(y, x) => {
                let t = self.store.deref(self.reg(Reg::Y(y)));
                self.set_x(x, t);
            }
            GetVariable(v, a) => {
                let t = self.x[a as usize];
                self.set(v, t);
            }
            GetValue(v, a) => return self.simpl(self.reg(v), self.x[a as usize]),
            GetConstant(c, a) | GetNil(c, a) => return self.get_constant(self.x[a as usize], c),
            GetList(f, a) => return self.get_structure(self.x[a as usize], f, 2),
            GetStructure(a, f, n) => return self.get_structure(self.x[a as usize], f, n),
            UnifyVariable(v, ty) => match self.read_arg() {
                Some(t) => self.set(v, t),
                None => {
                    let t = self.code.types[ty.0 as usize].clone();
                    let var = self.store.mk_var(t, None);
                    self.put_arg(var);
                    self.set(v, var);
                }
            },
            UnifyValue(v, _) => match self.read_arg() {
                Some(t) => return self.simpl(self.reg(v), t),
                None => self.put_arg(self.reg(v)),
            },
            SetValue(v) => self.put_arg(self.reg(v)),
            UnifyConstant(c) => match self.read_arg() {
                Some(t) => return self.get_constant(t, c),
                None => {
                    let t = self.store.mk_const(c);
                    self.put_arg(t);
                }
            },
            UnifyIndex(n) => {
                let t = self.store.mk_index(n);
                self.put_arg(t);
            }
            UnifyClambda(x) | UnifyFlambda(x) => {
                let t = self.store.mk_lam(self.x[x as usize]);
                self.put_arg(t);
            }
            SwitchOnTerm(targets) => {
                let v = self.store.hnf(self.x[1])?;
                let k = match v.head_kind(&self.store) {
                    HeadKind::Var => 0,
                    HeadKind::Const => {
                        let Node::Const(c) = self.store.node(v.head) else { unreachable!() };
                        if v.args.len() == 2 && self.store.sig.name(c) == "::" {
                            2
                        } else {
                            1
                        }
                    }
                    HeadKind::Index(_) => 3,
                };
                match targets[k] {
                    Some(a) => self.p = a,
                    None => return Ok(Step::Fail),
                }
            }
            TryMeElse(alt, n) | RetryMeElse(alt, n) => {
                let f = self.frame(alt, n);
                self.search.push_choice(&mut self.store, f);
            }
            TrustMe(_) => {}
            Allocate => {
                self.e = Some(Rc::new(Env {
                    ce: self.e.take(),
                    cp: self.cp,
                    ys: RefCell::new(Vec::new()),
                }));
            }
            Deallocate => {
                let e = self.e.take().expect("deallocate without environment");
                self.cp = e.cp;
                self.e = e.ce.clone();
            }
            Call(c, _) => {
                self.cp = here + 1;
                return Ok(self.jump(c));
            }
            Execute(c) => return Ok(self.jump(c)),
            Proceed => self.p = self.cp,
            ProceedFinishUnify => {
                let f = self.frame(self.cp, 0);
                return self.finish_unify(f);
            }
            ExecuteFinishUnify { save, .. } | CallFinishUnify { save, .. } => {
                let f = self.frame(here + 1, save);
                return self.finish_unify(f);
            }
            Fail => return Ok(Step::Fail),
            Halt => {
                self.p = here;
                return Ok(Step::Answer);
            }
            Solve => {
                self.p = here;
                return self.solve();
            }
        }
        Ok(Step::Next)
    }

    fn backtrack(&mut self) -> Result<bool, EngineError> {
        loop {
            match self.search.backtrack(&mut self.store)? {
                None => return Ok(false),
                Some(Resume::Choice(f)) => {
                    self.restore(&f);
                    return Ok(true);
                }
                Some(Resume::Unify(f)) => {
                    self.restore(&f);
                    if self.search.unify_steps(&mut self.store, &f)? {
                        return Ok(true);
                    }
                }
            }
        }
    }
}

impl Iterator for VmSolver<'_> {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let r = match self.state {
                State::Done => return None,
                State::Backtrack => match self.backtrack() {
                    Ok(true) => {
                        self.state = State::Run;
                        continue;
                    }
                    Ok(false) => {
                        self.finish();
                        return None;
                    }
                    Err(e) => Err(e),
                },
                State::Run => self.step(),
            };
            match r {
                Ok(Step::Next) => {}
                Ok(Step::Fail) => self.state = State::Backtrack,
                Ok(Step::Answer) => {
                    self.state = State::Backtrack;
                    let a = Answer::extract(&mut self.store, &self.qvars, self.search.depth_exceeded);
                    if a.is_err() {
                        self.finish();
                    }
                    return Some(a);
                }
                Err(e) => {
                    self.finish();
                    return Some(Err(e));
                }
            }
        }
    }
}
