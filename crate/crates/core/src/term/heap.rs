use std::rc::Rc;

use super::owned::{Slot, Term};
use super::signature::{ConstId, Signature};
use super::types::Ty;
use crate::trace::Tracer;

/// Handle to a heap cell.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct TermRef(pub u32);

/// Start of a contiguous argument vector in the argument area.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ArgsRef(pub u32);

/// Handle to an environment cell; `EnvRef::NIL` is the empty environment.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct EnvRef(pub u32);

impl EnvRef {
    pub const NIL: EnvRef = EnvRef(u32::MAX);

    pub fn is_nil(self) -> bool {
        self == EnvRef::NIL
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PairId(pub u32);

impl PairId {
    pub const NIL: PairId = PairId(u32::MAX);

    pub fn is_nil(self) -> bool {
        self == PairId::NIL
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EnvItem {
    /// A dummy entry for an abstraction that was pushed under, at level `l`.
    Dum(u32),
    /// A pending substitution of `t`, built at embedding level `l`.
    Bind(TermRef, u32),
}

#[derive(Clone, Copy, Debug)]
pub struct EnvCell {
    pub item: EnvItem,
    pub next: EnvRef,
    pub len: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Node {
    Const(ConstId),
    /// Unbound logic variable.
    Var(VarId),
    /// Instantiated logic variable.
    Bound(VarId, TermRef),
    Index(u32),
    App {
        head: TermRef,
        args: ArgsRef,
        arity: u32,
    },
    Lam(TermRef),
    Susp {
        skel: TermRef,
        ol: u32,
        nl: u32,
        env: EnvRef,
    },
    /// A reduced redex, overwritten with a pointer to its value.
    Ref(TermRef),
}

/// A heap cell: the node plus its largest free de Bruijn index (0 = closed).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Cell {
    pub node: Node,
    pub mfi: u32,
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub ty: Ty,
    pub name: Option<Rc<str>>,
    pub cell: TermRef,
}

/// A disagreement pair `<\^depth lhs, \^depth rhs>` linked into the live list.
#[derive(Clone, Copy, Debug)]
pub struct Pair {
    pub lhs: TermRef,
    pub rhs: TermRef,
    pub depth: u32,
    pub prev: PairId,
    pub next: PairId,
}

#[derive(Clone, Copy, Debug)]
pub enum TrailEntry {
    Bind(TermRef),
    Overwrite(TermRef, Cell),
    PairDeleted(PairId),
}

/// Snapshot of every growable area, used as a backtracking watermark.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Mark {
    pub cells: u32,
    pub args: u32,
    pub envs: u32,
    pub vars: u32,
    pub pairs: u32,
    pub trail: u32,
    pub ll: u32,
}

#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct Counters {
    pub rewrites: u64,
    pub beta: u64,
    pub hnf_calls: u64,
    pub hnf_fast: u64,
    pub sl_reductions: u64,
    pub bindings: u64,
    pub trail_entries: u64,
    pub branch_points: u64,
    pub flex_goals: u64,
    pub backchains: u64,
    pub choice_points: u64,
}

impl std::fmt::Display for Counters {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rewrites={} beta={} hnf={} hnf_fast={} sl_reductions={} bindings={} trail={} \
             branch_points={} flex_goals={} backchains={} choice_points={}",
            self.rewrites,
            self.beta,
            self.hnf_calls,
            self.hnf_fast,
            self.sl_reductions,
            self.bindings,
            self.trail_entries,
            self.branch_points,
            self.flex_goals,
            self.backchains,
            self.choice_points
        )
    }
}

/// The term heap together with the trail and the live list of disagreement
/// pairs. Everything allocated here is reclaimed by `undo_to`.
pub struct Store {
    cells: Vec<Cell>,
    args: Vec<TermRef>,
    envs: Vec<EnvCell>,
    vars: Vec<VarInfo>,
    pub(crate) pairs: Vec<Pair>,
    pub(crate) ll: PairId,
    trail: Vec<TrailEntry>,
    /// Cells at or above this watermark need no trailing.
    pub hb: u32,
    pub counters: Counters,
    pub fuel: u64,
    pub sig: Rc<Signature>,
    pub tracer: Tracer,
    pub(crate) sl: Vec<TermRef>,
    pub(crate) apps: Vec<crate::reduce::Frame>,
}

pub const DEFAULT_FUEL: u64 = 1_000_000;

impl Store {
    pub fn new(sig: Rc<Signature>) -> Store {
        Store {
            cells: Vec::with_capacity(1024),
            args: Vec::with_capacity(1024),
            envs: Vec::new(),
            vars: Vec::new(),
            pairs: Vec::new(),
            ll: PairId::NIL,
            trail: Vec::new(),
            hb: 0,
            counters: Counters::default(),
            fuel: DEFAULT_FUEL,
            sig,
            tracer: Tracer::default(),
            sl: Vec::new(),
            apps: Vec::new(),
        }
    }

    fn push(&mut self, node: Node, mfi: u32) -> TermRef {
        let r = TermRef(self.cells.len() as u32);
        self.cells.push(Cell { node, mfi });
        r
    }

    pub fn cell(&self, r: TermRef) -> Cell {
        self.cells[r.0 as usize]
    }

    pub fn node(&self, r: TermRef) -> Node {
        self.cells[r.0 as usize].node
    }

    pub fn mfi(&self, r: TermRef) -> u32 {
        self.cells[r.0 as usize].mfi
    }

    pub fn is_closed(&self, r: TermRef) -> bool {
        self.mfi(r) == 0
    }

    pub fn heap_top(&self) -> u32 {
        self.cells.len() as u32
    }

    pub fn mk_const(&mut self, c: ConstId) -> TermRef {
        self.push(Node::Const(c), 0)
    }

    pub fn mk_var(&mut self, ty: Ty, name: Option<Rc<str>>) -> TermRef {
        let id = VarId(self.vars.len() as u32);
        let cell = TermRef(self.cells.len() as u32);
        self.vars.push(VarInfo { ty, name, cell });
        self.push(Node::Var(id), 0)
    }

    pub fn mk_index(&mut self, i: u32) -> TermRef {
        assert!(i >= 1, "de Bruijn indices start at 1");
        self.push(Node::Index(i), i)
    }

    /// Application node; a head that is itself an application is flattened.
    pub fn mk_app(&mut self, head: TermRef, args: &[TermRef]) -> TermRef {
        assert!(!args.is_empty(), "application needs at least one argument");
        if let Node::App {
            head: h,
            args: a,
            arity,
        } = self.node(head)
        {
            let mut all: Vec<TermRef> = self.args_slice(a, arity).to_vec();
            all.extend_from_slice(args);
            return self.mk_app(h, &all);
        }
        let start = ArgsRef(self.args.len() as u32);
        let mut mfi = self.mfi(head);
        for &a in args {
            mfi = mfi.max(self.mfi(a));
            self.args.push(a);
        }
        self.push(
            Node::App {
                head,
                args: start,
                arity: args.len() as u32,
            },
            mfi,
        )
    }

    pub fn mk_lam(&mut self, body: TermRef) -> TermRef {
        let mfi = self.mfi(body).saturating_sub(1);
        self.push(Node::Lam(body), mfi)
    }

    pub fn mk_lams(&mut self, n: u32, mut body: TermRef) -> TermRef {
        for _ in 0..n {
            body = self.mk_lam(body);
        }
        body
    }

    /// Suspension node. A closed skeleton is returned as is, and the empty
    /// suspension collapses to its skeleton.
    pub fn mk_susp(&mut self, skel: TermRef, ol: u32, nl: u32, env: EnvRef) -> TermRef {
        debug_assert_eq!(self.env_len(env), ol);
        let sm = self.mfi(skel);
        if sm == 0 || (ol == 0 && nl == 0) {
            return skel;
        }
        let mfi = self.susp_mfi(sm, ol, nl, env);
        self.push(Node::Susp { skel, ol, nl, env }, mfi)
    }

    fn susp_mfi(&self, skel_mfi: u32, ol: u32, nl: u32, env: EnvRef) -> u32 {
        let mut m = if skel_mfi > ol { skel_mfi - ol + nl } else { 0 };
        let mut e = env;
        let mut i = 1;
        while i <= skel_mfi.min(ol) {
            let c = self.env_cell(e);
            let contrib = match c.item {
                EnvItem::Dum(l) => nl - l,
                EnvItem::Bind(t, l) => {
                    let tm = self.mfi(t);
                    if tm == 0 {
                        0
                    } else {
                        tm + nl - l
                    }
                }
            };
            m = m.max(contrib);
            e = c.next;
            i += 1;
        }
        m
    }

    pub fn env_cons(&mut self, item: EnvItem, next: EnvRef) -> EnvRef {
        let len = self.env_len(next) + 1;
        let r = EnvRef(self.envs.len() as u32);
        self.envs.push(EnvCell { item, next, len });
        r
    }

    pub fn env_cell(&self, e: EnvRef) -> EnvCell {
        self.envs[e.0 as usize]
    }

    pub fn env_len(&self, e: EnvRef) -> u32 {
        if e.is_nil() {
            0
        } else {
            self.envs[e.0 as usize].len
        }
    }

    /// The i-th item (1-based) of an environment.
    pub fn env_nth(&self, mut e: EnvRef, i: u32) -> EnvItem {
        for _ in 1..i {
            e = self.env_cell(e).next;
        }
        self.env_cell(e).item
    }

    pub fn env_items(&self, mut e: EnvRef) -> Vec<EnvItem> {
        let mut out = Vec::new();
        while !e.is_nil() {
            let c = self.env_cell(e);
            out.push(c.item);
            e = c.next;
        }
        out
    }

    pub fn args_slice(&self, a: ArgsRef, arity: u32) -> &[TermRef] {
        &self.args[a.0 as usize..(a.0 + arity) as usize]
    }

    pub fn arg(&self, a: ArgsRef, i: u32) -> TermRef {
        self.args[(a.0 + i) as usize]
    }

    /// Reserves an argument vector to be filled in by `set_arg`.
    pub fn alloc_args(&mut self, n: u32, fill: TermRef) -> ArgsRef {
        let start = ArgsRef(self.args.len() as u32);
        self.args.extend(std::iter::repeat_n(fill, n as usize));
        start
    }

    pub fn set_arg(&mut self, a: ArgsRef, i: u32, t: TermRef) {
        self.args[(a.0 + i) as usize] = t;
    }

    /// Application over a pre-filled argument vector; the annotation is
    /// supplied by the caller (compiled code knows it statically).
    pub fn mk_app_raw(&mut self, head: TermRef, args: ArgsRef, arity: u32, mfi: u32) -> TermRef {
        self.push(Node::App { head, args, arity }, mfi)
    }

    /// Recomputes the annotation of an application whose arguments were
    /// filled in after allocation.
    pub fn refresh_app_mfi(&mut self, r: TermRef) {
        if let Node::App { head, args, arity } = self.node(r) {
            let mut m = self.mfi(head);
            for i in 0..arity {
                m = m.max(self.mfi(self.arg(args, i)));
            }
            self.cells[r.0 as usize].mfi = m;
        }
    }

    pub fn var_info(&self, v: VarId) -> &VarInfo {
        &self.vars[v.0 as usize]
    }

    pub fn var_count(&self) -> u32 {
        self.vars.len() as u32
    }

    /// Follows variable bindings and reduction references.
    pub fn deref(&self, mut r: TermRef) -> TermRef {
        loop {
            match self.node(r) {
                Node::Bound(_, t) | Node::Ref(t) => r = t,
                _ => return r,
            }
        }
    }

    /// If `r` dereferences to an unbound variable, returns it.
    pub fn unbound_var(&self, r: TermRef) -> Option<(TermRef, VarId)> {
        let r = self.deref(r);
        match self.node(r) {
            Node::Var(v) => Some((r, v)),
            _ => None,
        }
    }

    /// Instantiates the unbound variable cell `var` to `t`, trailing when
    /// the cell predates the latest backtrack point.
    pub fn bind(&mut self, var: TermRef, t: TermRef) {
        let Node::Var(id) = self.node(var) else {
            panic!("bind on a non-variable cell");
        };
        debug_assert_eq!(self.mfi(t), 0, "bindings must be closed terms");
        debug_assert!(self.deref(t) != var, "binding a variable to itself");
        self.counters.bindings += 1;
        if var.0 < self.hb {
            self.trail.push(TrailEntry::Bind(var));
            self.counters.trail_entries += 1;
        }
        self.cells[var.0 as usize].node = Node::Bound(id, t);
    }

    /// Destructively replaces a cell, trailing the old value when needed.
    pub fn overwrite(&mut self, r: TermRef, node: Node) {
        let old = self.cell(r);
        if r.0 < self.hb {
            self.trail.push(TrailEntry::Overwrite(r, old));
            self.counters.trail_entries += 1;
        }
        // both values denote the same term; keep the tighter annotation
        let mfi = match node {
            Node::Ref(t) => self.mfi(t).min(old.mfi),
            _ => old.mfi,
        };
        self.cells[r.0 as usize] = Cell { node, mfi };
    }

    pub(crate) fn trail_pair_deleted(&mut self, p: PairId) {
        self.trail.push(TrailEntry::PairDeleted(p));
        self.counters.trail_entries += 1;
    }

    pub fn trail_len(&self) -> u32 {
        self.trail.len() as u32
    }

    pub fn mark(&self) -> Mark {
        Mark {
            cells: self.cells.len() as u32,
            args: self.args.len() as u32,
            envs: self.envs.len() as u32,
            vars: self.vars.len() as u32,
            pairs: self.pairs.len() as u32,
            trail: self.trail.len() as u32,
            ll: self.ll.0,
        }
    }

    /// Unwinds the trail to `m` and reclaims everything allocated since.
    pub fn undo_to(&mut self, m: Mark) {
        while self.trail.len() as u32 > m.trail {
            match self.trail.pop().unwrap() {
                TrailEntry::Bind(r) => {
                    if let Node::Bound(id, _) = self.node(r) {
                        self.cells[r.0 as usize].node = Node::Var(id);
                    }
                }
                TrailEntry::Overwrite(r, old) => self.cells[r.0 as usize] = old,
                TrailEntry::PairDeleted(p) => self.relink_pair(p),
            }
        }
        self.cells.truncate(m.cells as usize);
        self.args.truncate(m.args as usize);
        self.envs.truncate(m.envs as usize);
        self.vars.truncate(m.vars as usize);
        self.pairs.truncate(m.pairs as usize);
        self.ll = PairId(m.ll);
        if !self.ll.is_nil() {
            self.pairs[self.ll.0 as usize].prev = PairId::NIL;
        }
    }

    fn relink_pair(&mut self, p: PairId) {
        let Pair { prev, next, .. } = self.pairs[p.0 as usize];
        if prev.is_nil() {
            self.ll = p;
        } else {
            self.pairs[prev.0 as usize].next = p;
        }
        if !next.is_nil() {
            self.pairs[next.0 as usize].prev = p;
        }
    }

    /// Copies an owned term onto the heap. `var` supplies the cell for each
    /// variable slot (typically a fresh variable per slot).
    pub fn import(&mut self, t: &Term, var: &mut impl FnMut(&mut Store, Slot) -> TermRef) -> TermRef {
        match t {
            Term::Const(c) => self.mk_const(*c),
            Term::Var(s) => var(self, *s),
            Term::Index(i) => self.mk_index(*i),
            Term::App(h, args) => {
                let h = self.import(h, var);
                let args: Vec<TermRef> = args.iter().map(|a| self.import(a, var)).collect();
                self.mk_app(h, &args)
            }
            Term::Lam(b) => {
                let b = self.import(b, var);
                self.mk_lam(b)
            }
        }
    }

    /// Reads back a suspension-free heap term. Unbound variables are handed
    /// to `var`, which chooses their slots.
    pub fn export(&self, r: TermRef, var: &mut impl FnMut(VarId) -> Slot) -> Term {
        let r = self.deref(r);
        match self.node(r) {
            Node::Const(c) => Term::Const(c),
            Node::Var(v) => Term::Var(var(v)),
            Node::Index(i) => Term::Index(i),
            Node::App { head, args, arity } => {
                let h = self.export(head, var);
                let a = self
                    .args_slice(args, arity)
                    .to_vec()
                    .into_iter()
                    .map(|x| self.export(x, var))
                    .collect();
                Term::app(h, a)
            }
            Node::Lam(b) => Term::lam(self.export(b, var)),
            Node::Susp { .. } => panic!("export of a suspension; normalize first"),
            Node::Bound(..) | Node::Ref(_) => unreachable!(),
        }
    }

    /// Reference scanner: the largest free index, computed by traversal
    /// rather than from annotations. Suspensions are not expanded.
    pub fn scan_free_index(&self, r: TermRef) -> u32 {
        match self.node(r) {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Bound(_, t) | Node::Ref(t) => self.scan_free_index(t),
            Node::Index(i) => i,
            Node::App { head, args, arity } => self
                .args_slice(args, arity)
                .iter()
                .map(|&a| self.scan_free_index(a))
                .fold(self.scan_free_index(head), u32::max),
            Node::Lam(b) => self.scan_free_index(b).saturating_sub(1),
            Node::Susp { .. } => self.mfi(r),
        }
    }

    /// Well-formedness of a suspension node, checked recursively through
    /// nested suspensions in the skeleton and the environment.
    pub fn susp_wf(&self, r: TermRef) -> Result<bool, crate::error::UsageError> {
        match self.node(r) {
            Node::Susp { .. } => Ok(self.wf_deep(r)),
            _ => Err(crate::error::UsageError::NotASuspension),
        }
    }

    fn wf_deep(&self, r: TermRef) -> bool {
        match self.node(r) {
            Node::Susp { skel, ol, nl, env } => {
                if self.env_len(env) != ol {
                    return false;
                }
                let items_ok = self.env_items(env).into_iter().all(|it| match it {
                    EnvItem::Dum(l) => l < nl,
                    EnvItem::Bind(t, l) => l <= nl && self.wf_deep(t),
                });
                items_ok && self.wf_deep(skel)
            }
            Node::App { head, args, arity } => {
                self.wf_deep(head) && self.args_slice(args, arity).iter().all(|&a| self.wf_deep(a))
            }
            Node::Lam(b) | Node::Bound(_, b) | Node::Ref(b) => self.wf_deep(b),
            _ => true,
        }
    }

    pub fn has_live(&self) -> bool {
        !self.ll.is_nil()
    }

    /// Number of pairs currently in the live list.
    pub fn live_len(&self) -> usize {
        self.live_pairs().len()
    }

    pub fn live_pairs(&self) -> Vec<PairId> {
        let mut out = Vec::new();
        let mut p = self.ll;
        while !p.is_nil() {
            out.push(p);
            p = self.pairs[p.0 as usize].next;
        }
        out
    }

    pub fn pair(&self, p: PairId) -> Pair {
        self.pairs[p.0 as usize]
    }

    /// Adds a pair at the front of the live list.
    pub fn add_pair(&mut self, lhs: TermRef, rhs: TermRef, depth: u32) -> PairId {
        let id = PairId(self.pairs.len() as u32);
        self.pairs.push(Pair {
            lhs,
            rhs,
            depth,
            prev: PairId::NIL,
            next: self.ll,
        });
        if !self.ll.is_nil() {
            self.pairs[self.ll.0 as usize].prev = id;
        }
        self.ll = id;
        id
    }

    /// Unlinks a pair from the live list; the removal is trailed.
    pub fn delete_pair(&mut self, p: PairId) {
        let Pair { prev, next, .. } = self.pairs[p.0 as usize];
        if prev.is_nil() {
            self.ll = next;
        } else {
            self.pairs[prev.0 as usize].next = next;
        }
        if !next.is_nil() {
            self.pairs[next.0 as usize].prev = prev;
        }
        self.trail_pair_deleted(p);
    }

    pub fn const_ty(&self, c: ConstId) -> &Ty {
        self.sig.ty(c)
    }
}
