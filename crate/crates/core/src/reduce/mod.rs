//! Head and full normalization over the suspension notation.
//!
//! `hnf` walks the spine of a term keeping the current environment in
//! registers, spreading pending arguments on the SL stack, and recording the
//! application and suspension nodes it enters so that their values can be
//! written back once known.

use crate::error::EngineError;
use crate::term::{EnvItem, EnvRef, Node, Slot, Store, Term, TermRef};

/// Arguments of a head normal form: either an argument vector already on
/// the heap or a vector collected off the SL stack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgSeq {
    Heap { start: crate::term::ArgsRef, len: u32 },
    Sl(Vec<TermRef>),
}

impl ArgSeq {
    pub fn len(&self) -> usize {
        match self {
            ArgSeq::Heap { len, .. } => *len as usize,
            ArgSeq::Sl(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, store: &Store, i: usize) -> TermRef {
        match self {
            ArgSeq::Heap { start, .. } => store.arg(*start, i as u32),
            ArgSeq::Sl(v) => v[i],
        }
    }

    pub fn to_vec(&self, store: &Store) -> Vec<TermRef> {
        match self {
            ArgSeq::Heap { start, len } => store.args_slice(*start, *len).to_vec(),
            ArgSeq::Sl(v) => v.clone(),
        }
    }
}

/// `\x1..\xn (head args)` with an atomic head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnfView {
    pub binder: u32,
    pub head: TermRef,
    pub args: ArgSeq,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HeadKind {
    Const,
    Var,
    Index(u32),
}

impl HnfView {
    pub fn head_kind(&self, store: &Store) -> HeadKind {
        match store.node(self.head) {
            Node::Const(_) => HeadKind::Const,
            Node::Var(_) => HeadKind::Var,
            Node::Index(i) => HeadKind::Index(i),
            n => unreachable!("non-atomic head {n:?}"),
        }
    }

    /// Rigid when the head is a constant or a bound variable.
    pub fn rigid(&self, store: &Store) -> bool {
        !matches!(self.head_kind(store), HeadKind::Var)
    }
}

/// A node entered with an empty environment whose value is written back
/// when the normalizer learns it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Frame {
    node: TermRef,
    sl_base: u32,
    binder: u32,
    beta: u64,
    susp: bool,
}

#[derive(Clone, Copy, Debug)]
struct EnvReg {
    ol: u32,
    nl: u32,
    env: EnvRef,
}

impl EnvReg {
    const EMPTY: EnvReg = EnvReg {
        ol: 0,
        nl: 0,
        env: EnvRef::NIL,
    };

    fn trivial(&self) -> bool {
        self.ol == 0 && self.nl == 0
    }
}

impl Store {
    fn trace_rule(&self, rule: &str, node: TermRef) {
        if self.tracer.reduce {
            self.tracer.emit(format_args!(
                "reduce {rule} node={} size={}",
                node.0,
                self.graph_size(node)
            ));
        }
    }

    /// Node count of a term graph (suspensions count as one node each).
    pub fn graph_size(&self, r: TermRef) -> usize {
        match self.node(r) {
            Node::Bound(_, t) | Node::Ref(t) => self.graph_size(t),
            Node::App { head, args, arity } => {
                1 + self.graph_size(head)
                    + self
                        .args_slice(args, arity)
                        .iter()
                        .map(|&a| self.graph_size(a))
                        .sum::<usize>()
            }
            Node::Lam(b) => 1 + self.graph_size(b),
            Node::Susp { skel, .. } => 1 + self.graph_size(skel),
            _ => 1,
        }
    }

    fn wrap(&mut self, t: TermRef, e: EnvReg) -> TermRef {
        if e.trivial() || self.is_closed(t) {
            t
        } else {
            self.mk_susp(t, e.ol, e.nl, e.env)
        }
    }

    /// Head normal form. Beta contractions are committed to the redex nodes
    /// (trailed below the backtrack watermark) so later calls share them.
    pub fn hnf(&mut self, t: TermRef) -> Result<HnfView, EngineError> {
        self.counters.hnf_calls += 1;
        let t = self.deref(t);
        match self.node(t) {
            Node::Const(_) | Node::Var(_) | Node::Index(_) => {
                self.counters.hnf_fast += 1;
                return Ok(HnfView {
                    binder: 0,
                    head: t,
                    args: ArgSeq::Sl(Vec::new()),
                });
            }
            Node::App { head, args, arity } => {
                let h = self.deref(head);
                if matches!(self.node(h), Node::Const(_) | Node::Var(_) | Node::Index(_)) {
                    self.counters.hnf_fast += 1;
                    return Ok(HnfView {
                        binder: 0,
                        head: h,
                        args: ArgSeq::Heap { start: args, len: arity },
                    });
                }
            }
            _ => {}
        }
        self.counters.sl_reductions += 1;
        self.hnf_slow(t)
    }

    fn hnf_slow(&mut self, t: TermRef) -> Result<HnfView, EngineError> {
        let base = self.sl.len() as u32;
        let frames_base = self.apps.len();
        let mut e = EnvReg::EMPTY;
        let mut cur = t;
        let mut binder = 0u32;
        let mut steps = 0u64;
        let mut beta = 0u64;
        let head = loop {
            steps += 1;
            if steps > self.fuel {
                self.sl.truncate(base as usize);
                self.apps.truncate(frames_base);
                return Err(EngineError::NonTerminating(self.fuel));
            }
            cur = self.deref(cur);
            match self.node(cur) {
                Node::Const(_) | Node::Var(_) => {
                    if !e.trivial() {
                        self.counters.rewrites += 1;
                        self.trace_rule("r1/r2", cur);
                    }
                    break cur;
                }
                Node::Index(i) => {
                    if e.trivial() {
                        break cur;
                    }
                    self.counters.rewrites += 1;
                    if i > e.ol {
                        self.trace_rule("r3", cur);
                        break self.mk_index(i - e.ol + e.nl);
                    }
                    match self.env_nth(e.env, i) {
                        EnvItem::Dum(l) => {
                            self.trace_rule("r4", cur);
                            break self.mk_index(e.nl - l);
                        }
                        EnvItem::Bind(s, l) => {
                            // r5, with r8/r9 folded in by the suspension case
                            self.trace_rule("r5", cur);
                            cur = s;
                            e = EnvReg {
                                ol: 0,
                                nl: e.nl - l,
                                env: EnvRef::NIL,
                            };
                        }
                    }
                }
                Node::App { head, args, arity } => {
                    if e.trivial() {
                        self.apps.push(Frame {
                            node: cur,
                            sl_base: self.sl.len() as u32,
                            binder,
                            beta,
                            susp: false,
                        });
                    } else {
                        self.counters.rewrites += 1;
                        self.trace_rule("r6", cur);
                    }
                    for k in (0..arity).rev() {
                        let a = self.arg(args, k);
                        let a = self.wrap(a, e);
                        self.sl.push(a);
                    }
                    cur = head;
                }
                Node::Lam(body) => {
                    if self.sl.len() as u32 > base {
                        let a = self.sl.pop().unwrap();
                        beta += 1;
                        self.counters.beta += 1;
                        self.counters.rewrites += 1;
                        if e.trivial() {
                            self.trace_rule("beta_s", cur);
                            let env = self.env_cons(EnvItem::Bind(a, 0), EnvRef::NIL);
                            e = EnvReg { ol: 1, nl: 0, env };
                        } else {
                            self.trace_rule("beta_s'", cur);
                            let env = self.env_cons(EnvItem::Bind(a, e.nl), e.env);
                            e = EnvReg {
                                ol: e.ol + 1,
                                nl: e.nl,
                                env,
                            };
                        }
                        cur = body;
                        self.commit_consumed(frames_base, cur, e);
                    } else {
                        binder += 1;
                        if !e.trivial() {
                            self.counters.rewrites += 1;
                            self.trace_rule("r7", cur);
                            let env = self.env_cons(EnvItem::Dum(e.nl), e.env);
                            e = EnvReg {
                                ol: e.ol + 1,
                                nl: e.nl + 1,
                                env,
                            };
                        }
                        cur = body;
                    }
                }
                Node::Susp { skel, ol, nl, env } => {
                    if e.trivial() {
                        self.apps.push(Frame {
                            node: cur,
                            sl_base: self.sl.len() as u32,
                            binder,
                            beta,
                            susp: true,
                        });
                        e = EnvReg { ol, nl, env };
                        cur = skel;
                    } else if e.ol == 0 {
                        self.counters.rewrites += 1;
                        self.trace_rule("r8", cur);
                        e = EnvReg {
                            ol,
                            nl: nl + e.nl,
                            env,
                        };
                        cur = skel;
                    } else {
                        // expose the inner suspension's top-level structure
                        let saved = self.fuel;
                        self.fuel = saved.saturating_sub(steps);
                        let r = self.hnf_slow(cur);
                        self.fuel = saved;
                        r?;
                    }
                }
                Node::Bound(..) | Node::Ref(_) => unreachable!(),
            }
        };

        let args: Vec<TermRef> = self.sl[base as usize..].iter().rev().copied().collect();
        // commit what is left: suspensions always, applications if reduced
        while self.apps.len() > frames_base {
            let f = self.apps.pop().unwrap();
            if !f.susp && f.beta == beta {
                continue;
            }
            let n = (self.sl.len() as u32 - f.sl_base) as usize;
            let value = if n == 0 {
                head
            } else {
                let a = args[..n].to_vec();
                self.mk_app(head, &a)
            };
            let value = self.mk_lams(binder - f.binder, value);
            if value != f.node {
                self.overwrite(f.node, Node::Ref(value));
            }
        }
        self.sl.truncate(base as usize);
        Ok(HnfView {
            binder,
            head,
            args: ArgSeq::Sl(args),
        })
    }

    /// After a beta contraction, writes back every application whose
    /// arguments have all been consumed.
    fn commit_consumed(&mut self, frames_base: usize, cur: TermRef, e: EnvReg) {
        let len = self.sl.len() as u32;
        while self.apps.len() > frames_base {
            let f = *self.apps.last().unwrap();
            if f.sl_base > len {
                // an argument from outside this node was consumed; its value
                // is no longer what the spine describes
                self.apps.pop();
                continue;
            }
            if f.susp || f.sl_base != len {
                break;
            }
            self.apps.pop();
            let value = self.wrap(cur, e);
            if value != f.node {
                self.overwrite(f.node, Node::Ref(value));
            }
        }
    }

    /// Materializes a head normal form view as a heap term.
    pub fn view_term(&mut self, v: &HnfView) -> TermRef {
        let body = if v.args.is_empty() {
            v.head
        } else {
            let a = v.args.to_vec(self);
            self.mk_app(v.head, &a)
        };
        self.mk_lams(v.binder, body)
    }

    /// Raises a view by `k` binders: the body moves under `k` new
    /// abstractions and receives them as trailing arguments.
    pub fn raise_view(&mut self, v: &HnfView, k: u32) -> HnfView {
        if k == 0 {
            return v.clone();
        }
        let head = match self.node(v.head) {
            Node::Index(j) => self.mk_index(j + k),
            _ => v.head,
        };
        let mut args = Vec::with_capacity(v.args.len() + k as usize);
        for i in 0..v.args.len() {
            let a = v.args.get(self, i);
            let a = if self.is_closed(a) {
                a
            } else {
                self.mk_susp(a, 0, k, EnvRef::NIL)
            };
            args.push(a);
        }
        for j in (1..=k).rev() {
            let ix = self.mk_index(j);
            args.push(ix);
        }
        HnfView {
            binder: v.binder + k,
            head,
            args: ArgSeq::Sl(args),
        }
    }

    /// Brings two views relative to a common outer depth to the same binder
    /// length by raising the shorter one.
    pub fn eta_adjust(&mut self, v1: &HnfView, v2: &HnfView) -> (HnfView, HnfView) {
        use std::cmp::Ordering::*;
        match v1.binder.cmp(&v2.binder) {
            Equal => (v1.clone(), v2.clone()),
            Less => (self.raise_view(v1, v2.binder - v1.binder), v2.clone()),
            Greater => (v1.clone(), self.raise_view(v2, v1.binder - v2.binder)),
        }
    }

    /// Beta-normal, eta-short form as an owned term. Unbound variables are
    /// given the slot of their variable id.
    pub fn nf(&mut self, t: TermRef) -> Result<Term, EngineError> {
        let v = self.hnf(t)?;
        let head = match self.node(v.head) {
            Node::Const(c) => Term::Const(c),
            Node::Var(id) => Term::Var(Slot(id.0)),
            Node::Index(i) => Term::Index(i),
            _ => unreachable!(),
        };
        let mut args = Vec::with_capacity(v.args.len());
        for i in 0..v.args.len() {
            let a = v.args.get(self, i);
            args.push(self.nf(a)?);
        }
        Ok(eta_reduce(v.binder, Term::app(head, args)))
    }

    /// Applies one rewrite rule at the top of `t`, if one matches.
    pub fn rewrite_step(&mut self, t: TermRef) -> Option<TermRef> {
        let t = self.deref(t);
        match self.node(t) {
            Node::App { head, args, arity } => {
                let h = self.deref(head);
                let Node::Lam(body) = self.node(h) else {
                    return None;
                };
                let a0 = self.arg(args, 0);
                let contracted = match self.node(self.deref(body)) {
                    Node::Susp { skel, ol, nl, env }
                        if ol >= 1 && nl >= 1 && {
                            let c = self.env_cell(env);
                            c.item == EnvItem::Dum(nl - 1)
                        } =>
                    {
                        let rest = self.env_cell(env).next;
                        let env = self.env_cons(EnvItem::Bind(a0, nl - 1), rest);
                        self.mk_susp_raw(skel, ol, nl - 1, env)
                    }
                    _ => {
                        let env = self.env_cons(EnvItem::Bind(a0, 0), EnvRef::NIL);
                        self.mk_susp_raw(body, 1, 0, env)
                    }
                };
                if arity == 1 {
                    Some(contracted)
                } else {
                    let rest = self.args_slice(args, arity)[1..].to_vec();
                    Some(self.mk_app(contracted, &rest))
                }
            }
            Node::Susp { skel, ol, nl, env } => {
                if ol == 0 && nl == 0 {
                    return Some(skel); // r9
                }
                if self.is_closed(skel) {
                    return Some(skel);
                }
                let s = self.deref(skel);
                match self.node(s) {
                    Node::Const(_) | Node::Var(_) => Some(s),
                    Node::Index(i) if i > ol => Some(self.mk_index(i - ol + nl)),
                    Node::Index(i) => match self.env_nth(env, i) {
                        EnvItem::Dum(l) => Some(self.mk_index(nl - l)),
                        EnvItem::Bind(u, l) => Some(self.r5_folded(u, nl - l)),
                    },
                    Node::App { head, args, arity } => {
                        let h = self.mk_susp_raw(head, ol, nl, env);
                        let a: Vec<TermRef> = (0..arity)
                            .map(|k| {
                                let x = self.arg(args, k);
                                self.mk_susp_raw(x, ol, nl, env)
                            })
                            .collect();
                        Some(self.mk_app(h, &a))
                    }
                    Node::Lam(b) => {
                        let env = self.env_cons(EnvItem::Dum(nl), env);
                        let inner = self.mk_susp_raw(b, ol + 1, nl + 1, env);
                        Some(self.mk_lam(inner))
                    }
                    Node::Susp {
                        skel: s2,
                        ol: ol2,
                        nl: nl2,
                        env: e2,
                    } if ol == 0 => Some(self.mk_susp_raw(s2, ol2, nl2 + nl, e2)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Rule r5 with r8 and r9 folded in: the result of looking up a binding
    /// that must be renumbered by `k`.
    fn r5_folded(&mut self, u: TermRef, k: u32) -> TermRef {
        if k == 0 || self.is_closed(u) {
            return u;
        }
        let u = self.deref(u);
        match self.node(u) {
            Node::Susp { skel, ol, nl, env } => self.mk_susp_raw(skel, ol, nl + k, env),
            _ => self.mk_susp_raw(u, 0, k, EnvRef::NIL),
        }
    }

    /// A suspension node without the closed-skeleton short cut, so that
    /// single rule applications stay observable.
    pub fn mk_susp_raw(&mut self, skel: TermRef, ol: u32, nl: u32, env: EnvRef) -> TermRef {
        if ol == 0 && nl == 0 {
            return skel;
        }
        self.mk_susp(skel, ol, nl, env)
    }

    /// Leftmost-outermost single rewrite anywhere in the term.
    pub fn rewrite_anywhere(&mut self, t: TermRef) -> Option<TermRef> {
        let t = self.deref(t);
        if let Some(r) = self.rewrite_step(t) {
            return Some(r);
        }
        match self.node(t) {
            Node::App { head, args, arity } => {
                let all = self.args_slice(args, arity).to_vec();
                if let Some(h) = self.rewrite_anywhere(head) {
                    return Some(self.mk_app(h, &all));
                }
                for i in 0..all.len() {
                    if let Some(a) = self.rewrite_anywhere(all[i]) {
                        let mut na = all.clone();
                        na[i] = a;
                        return Some(self.mk_app(head, &na));
                    }
                }
                None
            }
            Node::Lam(b) => self.rewrite_anywhere(b).map(|b| self.mk_lam(b)),
            Node::Susp { skel, ol, nl, env } => {
                // only the skeleton is rewritten; environments stay shared
                self.rewrite_anywhere(skel)
                    .map(|s| self.mk_susp_raw(s, ol, nl, env))
            }
            _ => None,
        }
    }
}

/// Eta-reduces `\^binder body` where `body` is already in normal form.
pub fn eta_reduce(mut binder: u32, mut body: Term) -> Term {
    while binder > 0 {
        let Term::App(h, args) = &body else { break };
        if args.last() != Some(&Term::Index(1)) {
            break;
        }
        let rest = &args[..args.len() - 1];
        if occurs_index(h, 1) || rest.iter().any(|a| occurs_index(a, 1)) {
            break;
        }
        let h = shift_down(h, 0);
        let rest: Vec<Term> = rest.iter().map(|a| shift_down(a, 0)).collect();
        body = Term::app(h, rest);
        binder -= 1;
    }
    Term::lams(binder as usize, body)
}

/// Whether the index referring `i` binders out (at depth 0) occurs free.
pub fn occurs_index(t: &Term, i: u32) -> bool {
    match t {
        Term::Index(j) => *j == i,
        Term::App(h, args) => occurs_index(h, i) || args.iter().any(|a| occurs_index(a, i)),
        Term::Lam(b) => occurs_index(b, i + 1),
        _ => false,
    }
}

/// Lowers free indices above `depth + 1` by one (index `depth + 1` must not occur).
fn shift_down(t: &Term, depth: u32) -> Term {
    match t {
        Term::Index(j) if *j > depth + 1 => Term::Index(j - 1),
        Term::App(h, args) => Term::app(
            shift_down(h, depth),
            args.iter().map(|a| shift_down(a, depth)).collect(),
        ),
        Term::Lam(b) => Term::lam(shift_down(b, depth + 1)),
        t => t.clone(),
    }
}
