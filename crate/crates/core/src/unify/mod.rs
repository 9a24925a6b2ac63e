//! Higher-order unification over the heap.
//!
//! `simpl` brings a set of disagreement pairs to solved form: rigid-rigid
//! pairs are decomposed, bindable pairs are solved by destructive binding
//! and the remaining flexible pairs are kept in the store's live list.
//! Flex-rigid pairs are then resolved one substitution at a time by the
//! branching search in [`search`].

pub mod search;

use crate::error::EngineError;
use crate::reduce::{ArgSeq, HeadKind, HnfView};
use crate::term::{ConstId, Node, PairId, Store, TermRef, Ty, VarId};

pub use search::{solve_unify, MatchOrder, Record, Resume, Search, DEFAULT_DEPTH};

/// A disagreement pair `<\^depth lhs, \^depth rhs>`. By convention the
/// left side comes from the clause and the right side from the goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Eqn {
    pub lhs: TermRef,
    pub rhs: TermRef,
    pub depth: u32,
}

impl Eqn {
    pub fn new(lhs: TermRef, rhs: TermRef) -> Eqn {
        Eqn { lhs, rhs, depth: 0 }
    }
}

/// Outcome of checking whether a bare variable can be bound to a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// No occurrence of the variable or of a protected index: bind.
    Bind,
    /// An occurrence on a rigid path: no unifier exists.
    Fail,
    /// Occurrences only below flexible heads, under a rigid root: bind to
    /// the rigid section and emit new pairs for the flexible parts.
    Residual,
    /// Occurrences only below flexible heads of a flexible term: keep the
    /// pair as flex-flex.
    Keep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Occ {
    None,
    Flex,
    Rigid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RigidHead {
    Const(ConstId),
    /// A bound variable; only projections can match it.
    Bound,
}

/// A flex-rigid pair chosen for the next branching step.
#[derive(Clone, Debug)]
pub struct FlexRigid {
    pub pair: PairId,
    pub flex: TermRef,
    pub flex_ty: Ty,
    pub rigid: RigidHead,
}

/// One of the substitutions generated for a flex-rigid pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alt {
    Imitate,
    /// Projection on the i-th argument (0-based).
    Project(u32),
}

enum Step {
    Done,
    Bound,
    Fail,
}

impl Store {
    fn var_label(&self, v: VarId) -> String {
        match &self.var_info(v).name {
            Some(n) => n.to_string(),
            None => format!("_V{}", v.0),
        }
    }

    /// Simplifies `new` together with the live list (when `rescan`) to solved
    /// form. Returns `false` on failure; surviving flexible pairs end up in
    /// the live list.
    pub fn simpl(&mut self, new: Vec<Eqn>, rescan: bool) -> Result<bool, EngineError> {
        let mut list1 = new;
        list1.reverse();
        let mut list2 = Vec::new();
        if rescan {
            self.pull_live(&mut list1);
        }
        loop {
            let mut bound = false;
            while let Some(q) = list1.pop() {
                match self.simpl_pair(q, &mut list1, &mut list2)? {
                    Step::Done => {}
                    Step::Bound => bound = true,
                    Step::Fail => {
                        if self.tracer.unify {
                            self.tracer.emit("unify fail");
                        }
                        return Ok(false);
                    }
                }
            }
            if !bound {
                break;
            }
            // a binding may have turned kept pairs into reducible ones
            list1 = std::mem::take(&mut list2);
            list1.reverse();
            self.pull_live(&mut list1);
        }
        for q in list2 {
            self.add_pair(q.lhs, q.rhs, q.depth);
        }
        Ok(true)
    }

    fn pull_live(&mut self, into: &mut Vec<Eqn>) {
        for p in self.live_pairs() {
            let pr = self.pair(p);
            self.delete_pair(p);
            into.push(Eqn {
                lhs: pr.lhs,
                rhs: pr.rhs,
                depth: pr.depth,
            });
        }
    }

    fn simpl_pair(&mut self, q: Eqn, list1: &mut Vec<Eqn>, list2: &mut Vec<Eqn>) -> Result<Step, EngineError> {
        let l = self.deref(q.lhs);
        let r = self.deref(q.rhs);
        if l == r {
            return Ok(Step::Done);
        }
        let v1 = self.hnf(l)?;
        let v2 = self.hnf(r)?;
        let k1 = v1.head_kind(self);
        let k2 = v2.head_kind(self);
        let flex1 = k1 == HeadKind::Var;
        let flex2 = k2 == HeadKind::Var;

        if !flex1 && !flex2 {
            let (a, b) = self.eta_adjust(&v1, &v2);
            let same_head = match (self.node(a.head), self.node(b.head)) {
                (Node::Const(c1), Node::Const(c2)) => c1 == c2,
                (Node::Index(i), Node::Index(j)) => i == j,
                _ => false,
            };
            if !same_head || a.args.len() != b.args.len() {
                return Ok(Step::Fail);
            }
            let depth = q.depth + a.binder;
            for i in (0..a.args.len()).rev() {
                list1.push(Eqn {
                    lhs: a.args.get(self, i),
                    rhs: b.args.get(self, i),
                    depth,
                });
            }
            return Ok(Step::Done);
        }

        if flex1 && flex2 && v1.head == v2.head {
            // same flexible head: equal if the raised argument lists agree
            let (a, b) = self.eta_adjust(&v1, &v2);
            if self.args_identical(&a, &b)? {
                return Ok(Step::Done);
            }
            list2.push(q);
            return Ok(Step::Done);
        }

        // an eta-expanded variable counts as the bare variable
        let v1 = if flex1 { self.eta_contract(v1)? } else { v1 };
        let v2 = if flex2 { self.eta_contract(v2)? } else { v2 };
        let n1 = q.depth + v1.binder;
        let n2 = q.depth + v2.binder;
        let bare1 = flex1 && v1.args.is_empty() && n1 <= n2;
        let bare2 = flex2 && v2.args.is_empty() && n2 <= n1;
        let pick_left = match (bare1, bare2) {
            (true, true) => {
                if n1 != n2 {
                    n1 < n2
                } else {
                    // bind the younger variable to the older one
                    self.var_of(v1.head) > self.var_of(v2.head)
                }
            }
            (true, false) => true,
            (false, true) => false,
            (false, false) => {
                list2.push(q);
                return Ok(Step::Done);
            }
        };
        let (x, nx, other, no, other_t, x_binder) = if pick_left {
            (v1.head, n1, v2, n2, r, v1.binder)
        } else {
            (v2.head, n2, v1, n1, l, v2.binder)
        };
        let k = no - nx;
        match self.check_view(x, k, no, &other)? {
            Check::Bind => {
                let value = if x_binder == 0 {
                    other_t
                } else {
                    let body = self.view_body(&other);
                    self.mk_lams(k, body)
                };
                let value = self.close_value(value)?;
                self.trace_bind(x, value);
                self.bind(x, value);
                Ok(Step::Bound)
            }
            Check::Fail => Ok(Step::Fail),
            Check::Keep => {
                list2.push(q);
                Ok(Step::Done)
            }
            Check::Residual => {
                let xty = self.var_info(self.var_of(x)).ty.clone();
                let (xargs, _) = xty.split();
                let mut ctx: Vec<Ty> = xargs[..k as usize].to_vec();
                let body_ty = xty
                    .drop_args(k as usize)
                    .expect("binder count exceeds the variable's arity");
                let mut out = Vec::new();
                let body = self.view_body(&other);
                let sec = self.section(body, &body_ty, &mut ctx, x, k, no, &mut out)?;
                let value = self.mk_lams(k, sec);
                let value = self.close_value(value)?;
                self.trace_bind(x, value);
                self.bind(x, value);
                list1.extend(out.into_iter().rev());
                Ok(Step::Bound)
            }
        }
    }

    /// `\x1..\xn (X x1 .. xn)` becomes `X`.
    fn eta_contract(&mut self, v: HnfView) -> Result<HnfView, EngineError> {
        let n = v.binder;
        if n == 0 || v.args.len() != n as usize {
            return Ok(v);
        }
        for i in 0..v.args.len() {
            let a = v.args.get(self, i);
            let av = self.hnf(a)?;
            if av.binder != 0 || !av.args.is_empty() || self.node(av.head) != Node::Index(n - i as u32) {
                return Ok(v);
            }
        }
        Ok(HnfView {
            binder: 0,
            head: v.head,
            args: ArgSeq::Sl(Vec::new()),
        })
    }

    fn var_of(&self, r: TermRef) -> VarId {
        match self.node(r) {
            Node::Var(v) => v,
            n => panic!("expected an unbound variable, found {n:?}"),
        }
    }

    fn trace_bind(&mut self, x: TermRef, value: TermRef) {
        if self.tracer.unify {
            let name = self.var_label(self.var_of(x));
            let shown = match self.nf(value) {
                Ok(t) => format!("{t:?}"),
                Err(_) => "?".into(),
            };
            self.tracer.emit(format_args!("unify bind {name} := {shown}"));
        }
    }

    fn view_body(&mut self, v: &HnfView) -> TermRef {
        if v.args.is_empty() {
            v.head
        } else {
            let a = v.args.to_vec(self);
            self.mk_app(v.head, &a)
        }
    }

    /// A binding must be closed; annotations of suspensions are only upper
    /// bounds, so a value that is not visibly closed is normalized.
    fn close_value(&mut self, t: TermRef) -> Result<TermRef, EngineError> {
        if self.is_closed(t) {
            return Ok(t);
        }
        let nf = self.nf(t)?;
        debug_assert_eq!(nf.max_free_index(), 0);
        Ok(self.import(&nf, &mut |s: &mut Store, slot| s.var_info(VarId(slot.0)).cell))
    }

    fn args_identical(&mut self, a: &HnfView, b: &HnfView) -> Result<bool, EngineError> {
        if a.args.len() != b.args.len() {
            return Ok(false);
        }
        for i in 0..a.args.len() {
            let x = a.args.get(self, i);
            let y = b.args.get(self, i);
            if self.deref(x) != self.deref(y) && self.nf(x)? != self.nf(y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Decides how the bare variable `x` (at binder depth `nx`) can be bound
    /// to `t` (at binder depth `nt >= nx`), both relative to depth `depth`.
    pub fn check_binding(&mut self, x: TermRef, t: TermRef, depth: u32) -> Result<Check, EngineError> {
        let x = self.deref(x);
        let v = self.hnf(t)?;
        let nt = depth + v.binder;
        self.check_view(x, v.binder, nt, &v)
    }

    fn check_view(&mut self, x: TermRef, k: u32, nt: u32, v: &HnfView) -> Result<Check, EngineError> {
        let occ = self.occ_view(v, 0, x, k, nt, true)?;
        Ok(match occ {
            Occ::None => Check::Bind,
            Occ::Rigid => Check::Fail,
            Occ::Flex if v.head_kind(self) == HeadKind::Var => Check::Keep,
            Occ::Flex => Check::Residual,
        })
    }

    fn occ(&mut self, t: TermRef, local: u32, x: TermRef, lo: u32, hi: u32, rigid: bool) -> Result<Occ, EngineError> {
        let v = self.hnf(t)?;
        let dd = local + v.binder;
        self.occ_view(&v, dd, x, lo, hi, rigid)
    }

    /// Occurrences of `x` or of a protected index in `(lo, hi]` (relative to
    /// the body top) inside a view whose body sits `dd` binders deep.
    fn occ_view(&mut self, v: &HnfView, dd: u32, x: TermRef, lo: u32, hi: u32, rigid: bool) -> Result<Occ, EngineError> {
        let hit = if rigid { Occ::Rigid } else { Occ::Flex };
        let args_rigid = match self.node(v.head) {
            Node::Var(_) if v.head == x => return Ok(hit),
            Node::Var(_) => false,
            Node::Index(j) if j > dd && j - dd > lo && j - dd <= hi => return Ok(hit),
            _ => rigid,
        };
        let mut found = Occ::None;
        for i in 0..v.args.len() {
            let a = v.args.get(self, i);
            match self.occ(a, dd, x, lo, hi, args_rigid)? {
                Occ::None => {}
                Occ::Rigid => return Ok(Occ::Rigid),
                Occ::Flex => {
                    if !args_rigid {
                        return Ok(Occ::Flex);
                    }
                    found = Occ::Flex;
                }
            }
        }
        Ok(found)
    }

    /// Copies the rigid part of `t` (of type `ty`), replacing each flexible
    /// subterm that mentions `x` or a protected index by a fresh variable
    /// applied to the binders in scope, and records a pair for each.
    #[allow(clippy::too_many_arguments)]
    fn section(
        &mut self,
        t: TermRef,
        ty: &Ty,
        ctx: &mut Vec<Ty>,
        x: TermRef,
        lo: u32,
        hi: u32,
        out: &mut Vec<Eqn>,
    ) -> Result<TermRef, EngineError> {
        let v = self.hnf(t)?;
        let (tys, _) = ty.split();
        let b = v.binder as usize;
        let saved = ctx.len();
        ctx.extend_from_slice(&tys[..b]);
        let body_ty = ty.drop_args(b).expect("ill-typed term in section");
        let dd = (ctx.len() as u32) - lo;
        let head_ty = match self.node(v.head) {
            Node::Var(_) => {
                let result = if self.occ_view(&v, dd, x, lo, hi, false)? == Occ::None {
                    t
                } else {
                    let m = ctx.len() as u32;
                    let yty = Ty::arrows(ctx, body_ty);
                    let y = self.mk_var(yty, None);
                    let repl = if m == 0 {
                        y
                    } else {
                        let ix: Vec<TermRef> = (1..=m).rev().map(|j| self.mk_index(j)).collect();
                        self.mk_app(y, &ix)
                    };
                    let body = self.view_body(&v);
                    out.push(Eqn {
                        lhs: repl,
                        rhs: body,
                        depth: hi + dd,
                    });
                    self.mk_lams(v.binder, repl)
                };
                ctx.truncate(saved);
                return Ok(result);
            }
            Node::Const(c) => self.sig.ty(c).clone(),
            Node::Index(j) => ctx[ctx.len() - j as usize].clone(),
            n => unreachable!("non-atomic head {n:?}"),
        };
        let (arg_tys, _) = head_ty.split();
        let mut args = Vec::with_capacity(v.args.len());
        for (i, ty) in arg_tys.iter().enumerate().take(v.args.len()) {
            let a = v.args.get(self, i);
            args.push(self.section(a, ty, ctx, x, lo, hi, out)?);
        }
        ctx.truncate(saved);
        let body = if args.is_empty() {
            v.head
        } else {
            self.mk_app(v.head, &args)
        };
        Ok(self.mk_lams(v.binder, body))
    }

    /// The oldest flex-rigid pair of the live list, if any.
    pub fn select_flex_rigid(&mut self) -> Result<Option<FlexRigid>, EngineError> {
        for p in self.live_pairs().into_iter().rev() {
            let pr = self.pair(p);
            let v1 = self.hnf(pr.lhs)?;
            let v2 = self.hnf(pr.rhs)?;
            let (flex, rigid) = match (v1.rigid(self), v2.rigid(self)) {
                (false, true) => (v1, v2),
                (true, false) => (v2, v1),
                _ => continue,
            };
            let rigid = match self.node(rigid.head) {
                Node::Const(c) => RigidHead::Const(c),
                _ => RigidHead::Bound,
            };
            let flex_ty = self.var_info(self.var_of(flex.head)).ty.clone();
            return Ok(Some(FlexRigid {
                pair: p,
                flex: flex.head,
                flex_ty,
                rigid,
            }));
        }
        Ok(None)
    }

    /// The substitutions for a flex-rigid pair, in the given order.
    pub fn match_alts(&self, fr: &FlexRigid, order: MatchOrder) -> Vec<Alt> {
        let (alphas, beta) = fr.flex_ty.split();
        let imitation = match fr.rigid {
            RigidHead::Const(c) if self.sig.ty(c).target() == beta => Some(Alt::Imitate),
            _ => None,
        };
        let projections = alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| a.target() == beta)
            .map(|(i, _)| Alt::Project(i as u32));
        match order {
            MatchOrder::ImitationFirst => imitation.into_iter().chain(projections).collect(),
            MatchOrder::ProjectionFirst => {
                let mut v: Vec<Alt> = projections.collect();
                v.extend(imitation);
                v
            }
        }
    }

    /// Builds the general term for `alt` and binds the flexible head to it.
    pub fn apply_alt(&mut self, fr: &FlexRigid, alt: Alt) {
        let (alphas, _) = fr.flex_ty.split();
        let p = alphas.len() as u32;
        let (head, head_ty) = match (alt, fr.rigid) {
            (Alt::Imitate, RigidHead::Const(c)) => (self.mk_const(c), self.sig.ty(c).clone()),
            (Alt::Project(i), _) => (self.mk_index(p - i), alphas[i as usize].clone()),
            (Alt::Imitate, RigidHead::Bound) => unreachable!("imitation of a bound variable"),
        };
        let (gammas, _) = head_ty.split();
        let ws: Vec<TermRef> = (1..=p).rev().map(|j| self.mk_index(j)).collect();
        let mut hs = Vec::with_capacity(gammas.len());
        for g in &gammas {
            let hty = Ty::arrows(&alphas, g.clone());
            let h = self.mk_var(hty, None);
            hs.push(if p == 0 { h } else { self.mk_app(h, &ws) });
        }
        let body = if hs.is_empty() { head } else { self.mk_app(head, &hs) };
        let value = self.mk_lams(p, body);
        if self.tracer.unify {
            let name = self.var_label(self.var_of(fr.flex));
            self.tracer.emit(format_args!("unify match {name} {alt:?}"));
        }
        self.bind(fr.flex, value);
    }
}
