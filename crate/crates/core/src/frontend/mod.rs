//! Surface syntax: parsing, type checking and printing of programs,
//! queries and answers.

mod check;
pub mod lexer;
pub mod parser;
pub mod pretty;

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, TypeError};
use crate::term::{ConstId, Signature, Slot, Term, Ty};

pub use parser::{parse_program, parse_query, parse_type, Item, Surface};

/// Names and types of the variables of a clause or query, by slot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    pub names: Vec<Option<String>>,
    pub tys: Vec<Ty>,
}

impl VarTable {
    pub fn len(&self) -> usize {
        self.tys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tys.is_empty()
    }
}

/// A program clause `p t1 .. tn :- body`, universally closed over its
/// variable slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub pred: ConstId,
    pub args: Vec<Term>,
    pub body: Option<Term>,
    pub vars: VarTable,
}

impl Clause {
    pub fn head(&self) -> Term {
        Term::app(Term::Const(self.pred), self.args.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub goal: Term,
    pub vars: VarTable,
}

impl Query {
    /// The named variables, whose bindings make up an answer.
    pub fn answer_vars(&self) -> Vec<(Slot, String)> {
        self.vars
            .names
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n {
                Some(n) if !n.starts_with('_') => Some((Slot(i as u32), n.clone())),
                _ => None,
            })
            .collect()
    }
}

/// A loaded program: the signature and the clauses of each predicate in
/// presentation order.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub sig: Rc<Signature>,
    pub clauses: Vec<Clause>,
    by_pred: HashMap<ConstId, Vec<usize>>,
}

impl Program {
    pub fn new() -> Program {
        Program::default()
    }

    /// Parses and checks a whole source text; returns it with the queries
    /// that appeared in it.
    pub fn from_source(src: &str) -> Result<(Program, Vec<Query>), Error> {
        let mut p = Program::new();
        let qs = p.consult(src)?;
        Ok((p, qs))
    }

    /// Adds the declarations and clauses of `src`, in order.
    pub fn consult(&mut self, src: &str) -> Result<Vec<Query>, Error> {
        let items = parse_program(src)?;
        let mut queries = Vec::new();
        for item in items {
            match item {
                Item::Kind { names, arity, .. } => {
                    let sig = Rc::make_mut(&mut self.sig);
                    for n in names {
                        sig.add_constructor(&n, arity).map_err(TypeError::from)?;
                    }
                }
                Item::Type { names, ty, .. } => {
                    let sig = Rc::make_mut(&mut self.sig);
                    for n in names {
                        sig.declare(&n, ty.clone()).map_err(TypeError::from)?;
                    }
                }
                Item::Clause { head, body, .. } => {
                    let sig = Rc::make_mut(&mut self.sig);
                    let c = check::clause(sig, &head, body.as_ref())?;
                    self.add_clause(Clause {
                        pred: c.pred,
                        args: c.args,
                        body: c.body,
                        vars: c.vars,
                    });
                }
                Item::Query { goal, .. } => {
                    let sig = Rc::make_mut(&mut self.sig);
                    let (goal, vars) = check::query(sig, &goal)?;
                    queries.push(Query { goal, vars });
                }
            }
        }
        Ok(queries)
    }

    pub fn add_clause(&mut self, c: Clause) {
        self.by_pred.entry(c.pred).or_default().push(self.clauses.len());
        self.clauses.push(c);
    }

    /// Parses and checks a query against the program's signature.
    pub fn query(&mut self, src: &str) -> Result<Query, Error> {
        let s = parse_query(src)?;
        let sig = Rc::make_mut(&mut self.sig);
        let (goal, vars) = check::query(sig, &s)?;
        Ok(Query { goal, vars })
    }

    /// Clauses for `pred` in presentation order.
    pub fn clauses_for(&self, pred: ConstId) -> impl Iterator<Item = &Clause> {
        self.by_pred
            .get(&pred)
            .into_iter()
            .flatten()
            .map(|&i| &self.clauses[i])
    }

    pub fn clause_count(&self, pred: ConstId) -> usize {
        self.by_pred.get(&pred).map_or(0, Vec::len)
    }

    pub fn clause_ids(&self, pred: ConstId) -> &[usize] {
        self.by_pred.get(&pred).map_or(&[], Vec::as_slice)
    }

    /// Declared predicate constants, in declaration order.
    pub fn predicates(&self) -> Vec<ConstId> {
        self.sig
            .consts()
            .filter(|(_, d)| d.logical.is_none() && d.ty.target().is_o())
            .map(|(c, _)| c)
            .collect()
    }
}
