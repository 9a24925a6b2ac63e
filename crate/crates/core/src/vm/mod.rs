//! A WAM-style bytecode machine for the same language.
//!
//! Head unification over first-order structure is compiled into get and
//! unify instructions; abstractions and applied variables are built on the
//! heap and handed to the interpretive simplifier. The `*_finish_unify`
//! instructions bridge into the branching flex-rigid search, and flexible
//! body goals go through the hard-wired `solve` builtin.

mod compile;
mod machine;

use std::collections::HashMap;
use std::fmt::{self, Write};

use crate::term::{ConstId, Signature, Ty};

pub use compile::compile;
pub use machine::{solve_query, VmSolver};

/// A register: `A`/`X` registers share one file, `Y` slots live in the
/// current environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reg {
    A(u32),
    Y(u32),
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reg::A(i) => write!(f, "A{i}"),
            Reg::Y(i) => write!(f, "Y{i}"),
        }
    }
}

/// Index into the program's type table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TyId(pub u32);

pub type Addr = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Callee {
    Pred(ConstId),
    Solve,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    PutVariable(Reg, u32, TyId),
    PutValue(Reg, u32),
    PutConstant(ConstId, u32),
    PutIndex(u32, u32),
    /// `put_capp Ai,Xj,n`: a closed application of arity `n` headed by `Xj`.
    PutCapp(u32, u32, u32),
    PutFapp(u32, u32, u32),
    PutClambda(u32, u32),
    PutFlambda(u32, u32),
    GlobalizeY(u32, u32),

    GetVariable(Reg, u32),
    GetValue(Reg, u32),
    GetConstant(ConstId, u32),
    GetNil(ConstId, u32),
    GetList(ConstId, u32),
    GetStructure(u32, ConstId, u32),

    UnifyVariable(Reg, TyId),
    UnifyValue(Reg, TyId),
    SetValue(Reg),
    UnifyConstant(ConstId),
    UnifyIndex(u32),
    UnifyClambda(u32),
    UnifyFlambda(u32),

    /// Targets for a flexible, constant-headed, list and bound-variable
    /// headed first argument.
    SwitchOnTerm([Option<Addr>; 4]),
    TryMeElse(Addr, u32),
    RetryMeElse(Addr, u32),
    TrustMe(u32),
    Allocate,
    Deallocate,
    Call(Callee, u32),
    Execute(Callee),
    Proceed,
    ProceedFinishUnify,
    /// The shown count is the head arity; `save` is the number of argument
    /// registers actually live when the search resumes.
    ExecuteFinishUnify { n: u32, save: u32 },
    CallFinishUnify { n: u32, perms: u32, save: u32 },
    Fail,

    /// Query success.
    Halt,
    /// Entry of the `solve` builtin; the goal is in A1.
    Solve,
}

impl Instr {
    pub fn opcode(&self) -> &'static str {
        use Instr::*;
        match self {
            PutVariable(..) => "put_variable",
            PutValue(..) => "put_value",
            PutConstant(..) => "put_constant",
            PutIndex(..) => "put_index",
            PutCapp(..) => "put_capp",
            PutFapp(..) => "put_fapp",
            PutClambda(..) => "put_clambda",
            PutFlambda(..) => "put_flambda",
            GlobalizeY(..) => "globalize",
            GetVariable(..) => "get_variable",
            GetValue(..) => "get_value",
            GetConstant(..) => "get_constant",
            GetNil(..) => "get_nil",
            GetList(..) => "get_list",
            GetStructure(..) => "get_structure",
            UnifyVariable(..) => "unify_variable",
            UnifyValue(..) => "unify_value",
            SetValue(..) => "set_value",
            UnifyConstant(..) => "unify_constant",
            UnifyIndex(..) => "unify_index",
            UnifyClambda(..) => "unify_clambda",
            UnifyFlambda(..) => "unify_flambda",
            SwitchOnTerm(..) => "switch_on_term",
            TryMeElse(..) => "try_me_else",
            RetryMeElse(..) => "retry_me_else",
            TrustMe(..) => "trust_me",
            Allocate => "allocate",
            Deallocate => "deallocate",
            Call(..) => "call",
            Execute(..) => "execute",
            Proceed => "proceed",
            ProceedFinishUnify => "proceed_finish_unify",
            ExecuteFinishUnify { .. } => "execute_finish_unify",
            CallFinishUnify { .. } => "call_finish_unify",
            Fail => "fail",
            Halt => "halt",
            Solve => "solve",
        }
    }

    /// Instructions that continue a structure being read or built.
    fn is_unify(&self) -> bool {
        use Instr::*;
        matches!(
            self,
            UnifyVariable(..) | UnifyValue(..) | SetValue(..) | UnifyConstant(_) | UnifyIndex(_) | UnifyClambda(_) | UnifyFlambda(_)
        )
    }
}

/// Compiled code for a whole program.
pub struct Code {
    pub instrs: Vec<Instr>,
    entries: HashMap<ConstId, Addr>,
    /// Predicates in declaration order with their code ranges.
    preds: Vec<(ConstId, std::ops::Range<Addr>)>,
    labels: HashMap<Addr, String>,
    pub types: Vec<Ty>,
}

pub(crate) const FAIL: Addr = 0;
pub(crate) const HALT: Addr = 1;
pub(crate) const SOLVE: Addr = 2;
/// Continuation of a conjunction inside `solve`: the right conjunct is in
/// Y1 of a fresh environment.
pub(crate) const SOLVE_AND: Addr = 3;

impl Code {
    pub fn entry(&self, pred: ConstId) -> Option<Addr> {
        self.entries.get(&pred).copied()
    }

    pub fn predicates(&self) -> impl Iterator<Item = ConstId> + '_ {
        self.preds.iter().map(|(p, _)| *p)
    }

    fn target(&self, a: Option<Addr>) -> String {
        match a {
            None | Some(FAIL) => "fail".into(),
            Some(a) => self.labels.get(&a).cloned().unwrap_or_else(|| format!("@{a}")),
        }
    }

    pub fn show(&self, sig: &Signature, i: &Instr) -> String {
        use Instr::*;
        let op = i.opcode();
        let name = |c: &ConstId| sig.name(*c).to_string();
        let callee = |c: &Callee| match c {
            Callee::Pred(p) => name(p),
            Callee::Solve => "solve".into(),
        };
        match i {
            PutVariable(v, a, t) => format!("{op} {v},A{a},ty{}", t.0 + 1),
            PutValue(v, a) => format!("{op} {v},A{a}"),
            PutConstant(c, a) => format!("{op} {},A{a}", name(c)),
            PutIndex(a, n) => format!("{op} A{a},{n}"),
            PutCapp(a, x, n) | PutFapp(a, x, n) => format!("{op} A{a},A{x},{n}"),
            PutClambda(a, x) | PutFlambda(a, x) => format!("{op} A{a},A{x}"),
            GlobalizeY(y, x) => format!("{op} Y{y},A{x}"),
            GetVariable(v, a) | GetValue(v, a) => format!("{op} {v},A{a}"),
            GetConstant(c, a) => format!("{op} {},A{a}", name(c)),
            GetNil(_, a) | GetList(_, a) => format!("{op} A{a}"),
            GetStructure(a, c, n) => format!("{op} A{a},{},{n}", name(c)),
            UnifyVariable(v, t) | UnifyValue(v, t) => format!("{op} {v},ty{}", t.0 + 1),
            SetValue(v) => format!("{op} {v}"),
            UnifyConstant(c) => format!("{op} {}", name(c)),
            UnifyIndex(n) => format!("{op} {n}"),
            UnifyClambda(x) | UnifyFlambda(x) => format!("{op} A{x}"),
            SwitchOnTerm(ts) => {
                let ts: Vec<String> = ts.iter().map(|t| self.target(*t)).collect();
                format!("{op} {}", ts.join(","))
            }
            TryMeElse(l, n) | RetryMeElse(l, n) => format!("{op} {},{n}", self.target(Some(*l))),
            TrustMe(n) => format!("{op} {n}"),
            Call(c, n) => format!("{op} {},{n}", callee(c)),
            Execute(c) => format!("{op} {}", callee(c)),
            ExecuteFinishUnify { n, .. } => format!("{op} {n}"),
            CallFinishUnify { n, perms, .. } => format!("{op} {n},{perms}"),
            _ => op.to_string(),
        }
    }

    /// Listing of one predicate's code, labels in the left column.
    pub fn disassemble(&self, sig: &Signature, pred: ConstId) -> Option<String> {
        let (_, range) = self.preds.iter().find(|(p, _)| *p == pred)?;
        let mut out = String::new();
        for a in range.clone() {
            let label = if a == range.start {
                format!("{}:", sig.name(pred))
            } else {
                self.labels.get(&a).map(|l| format!("{l}:")).unwrap_or_default()
            };
            let _ = writeln!(out, "{label:<7} {}", self.show(sig, &self.instrs[a]));
        }
        Some(out)
    }

    /// The type table, as referenced by `tyN` operands.
    pub fn type_table(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.types.iter().enumerate() {
            let _ = writeln!(out, "ty{} = {t}", i + 1);
        }
        out
    }
}
