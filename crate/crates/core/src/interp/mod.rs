//! The abstract interpreter: depth-first search over derivations whose
//! states are a goal list, the disagreement pairs in the live list and the
//! bindings made so far.
//!
//! Goals are heap terms of type `o`, dispatched on their head normal form.
//! Unification steps are taken eagerly, before the next goal is looked at.

use std::rc::Rc;

use crate::answer::Answer;
use crate::error::EngineError;
use crate::frontend::{Clause, Program, Query};
use crate::reduce::HeadKind;
use crate::term::{ConstId, Logical, Mark, Node, Slot, Store, TermRef, DEFAULT_FUEL};
use crate::trace::Tracer;
use crate::unify::{Eqn, MatchOrder, Resume, Search, DEFAULT_DEPTH};

/// Search limits and options shared by both engines.
#[derive(Clone)]
pub struct Config {
    pub depth: u32,
    pub fuel: u64,
    pub order: MatchOrder,
    pub tracer: Tracer,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            depth: DEFAULT_DEPTH,
            fuel: DEFAULT_FUEL,
            order: MatchOrder::default(),
            tracer: Tracer::default(),
        }
    }
}

/// Persistent goal list; alternatives share their tails.
pub type Goals = Option<Rc<GoalNode>>;

pub struct GoalNode {
    pub goal: TermRef,
    pub next: Goals,
}

fn push(goal: TermRef, next: Goals) -> Goals {
    Some(Rc::new(GoalNode { goal, next }))
}

pub enum Cont {
    Goals(Goals),
    /// Remaining clauses for an atom.
    Clauses {
        pred: ConstId,
        args: Rc<[TermRef]>,
        next: usize,
        rest: Goals,
    },
}

enum State {
    Run(Goals),
    Backtrack,
    Done,
}

enum Flow {
    Next(Goals),
    Fail,
}

/// Copies a clause onto the heap with fresh variables.
pub(crate) fn rename(store: &mut Store, c: &Clause) -> (Vec<TermRef>, Option<TermRef>) {
    let vars: Vec<TermRef> = c.vars.tys.iter().map(|t| store.mk_var(t.clone(), None)).collect();
    let mut var = |_: &mut Store, s: Slot| vars[s.0 as usize];
    let args = c.args.iter().map(|a| store.import(a, &mut var)).collect();
    let body = c.body.as_ref().map(|b| store.import(b, &mut var));
    (args, body)
}

/// Copies a query onto the heap; returns the goal and the named variables.
pub(crate) fn load_query(store: &mut Store, q: &Query) -> (TermRef, Vec<(String, TermRef)>) {
    let vars: Vec<TermRef> = q
        .vars
        .tys
        .iter()
        .zip(&q.vars.names)
        .map(|(t, n)| store.mk_var(t.clone(), n.as_deref().map(Into::into)))
        .collect();
    let goal = store.import(&q.goal, &mut |_, s| vars[s.0 as usize]);
    let named = q
        .answer_vars()
        .into_iter()
        .map(|(s, n)| (n, vars[s.0 as usize]))
        .collect();
    (goal, named)
}

/// A lazy stream of answers to one query.
pub struct Solver<'p> {
    program: &'p Program,
    store: Store,
    search: Search<Cont>,
    qvars: Vec<(String, TermRef)>,
    state: State,
    root: Mark,
}

pub fn solve_query<'p>(program: &'p Program, query: &Query, config: Config) -> Solver<'p> {
    Solver::with_store(program, query, config, Store::new(program.sig.clone()))
}

impl<'p> Solver<'p> {
    /// Runs the query on an existing store; everything the query allocates
    /// is reclaimed once the answers are exhausted.
    pub fn with_store(program: &'p Program, query: &Query, config: Config, mut store: Store) -> Solver<'p> {
        store.fuel = config.fuel;
        store.tracer = config.tracer;
        let root = store.mark();
        store.hb = root.cells;
        let (goal, qvars) = load_query(&mut store, query);
        Solver {
            program,
            store,
            search: Search::new(config.depth, config.order),
            qvars,
            state: State::Run(push(goal, None)),
            root,
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn into_store(self) -> Store {
        self.store
    }

    /// Whether some branch was cut off by the depth limit so far.
    pub fn depth_exceeded(&self) -> bool {
        self.search.depth_exceeded
    }

    fn finish(&mut self) {
        self.search.cut_to(&mut self.store, 0);
        self.store.undo_to(self.root);
        self.store.hb = self.root.cells;
        self.state = State::Done;
    }

    fn unify_then(&mut self, goals: Goals) -> Result<Flow, EngineError> {
        if !self.store.has_live() {
            return Ok(Flow::Next(goals));
        }
        let cont = Rc::new(Cont::Goals(goals.clone()));
        Ok(if self.search.unify_steps(&mut self.store, &cont)? {
            Flow::Next(goals)
        } else {
            Flow::Fail
        })
    }

    fn step(&mut self, node: &GoalNode) -> Result<Flow, EngineError> {
        let rest = node.next.clone();
        let v = self.store.hnf(node.goal)?;
        match v.head_kind(&self.store) {
            HeadKind::Const => {
                let Node::Const(c) = self.store.node(v.head) else { unreachable!() };
                let args = v.args.to_vec(&self.store);
                match self.store.sig.logical(c) {
                    Some(Logical::Top) => Ok(Flow::Next(rest)),
                    Some(Logical::And) => Ok(Flow::Next(push(args[0], push(args[1], rest)))),
                    Some(Logical::Or) => {
                        let right = push(args[1], rest.clone());
                        self.search.push_choice(&mut self.store, Cont::Goals(right));
                        Ok(Flow::Next(push(args[0], rest)))
                    }
                    Some(Logical::Sigma) => {
                        let (tys, _) = self.store.sig.ty(c).split();
                        let (binder, _) = tys[0].split();
                        let x = self.store.mk_var(binder[0].clone(), None);
                        let body = self.store.mk_app(args[0], &[x]);
                        Ok(Flow::Next(push(body, rest)))
                    }
                    Some(Logical::Imp | Logical::Pi) => {
                        Err(EngineError::UnsupportedGoal(self.store.sig.name(c).to_string()))
                    }
                    None => self.backchain(c, args.into(), 0, rest),
                }
            }
            HeadKind::Var => {
                // the weakest solution: the head becomes \..\ true
                self.store.counters.flex_goals += 1;
                let Node::Var(id) = self.store.node(v.head) else { unreachable!() };
                let n = self.store.var_info(id).ty.arity() as u32;
                let top = self.store.mk_const(crate::term::TOP);
                let value = self.store.mk_lams(n, top);
                self.store.bind(v.head, value);
                if !self.store.simpl(Vec::new(), true)? {
                    return Ok(Flow::Fail);
                }
                self.unify_then(rest)
            }
            HeadKind::Index(_) => unreachable!("goals are closed terms"),
        }
    }

    fn backchain(&mut self, pred: ConstId, args: Rc<[TermRef]>, start: usize, rest: Goals) -> Result<Flow, EngineError> {
        let ids = self.program.clause_ids(pred);
        if start >= ids.len() {
            return Ok(Flow::Fail);
        }
        if start + 1 < ids.len() {
            let alt = Cont::Clauses {
                pred,
                args: args.clone(),
                next: start + 1,
                rest: rest.clone(),
            };
            self.search.push_choice(&mut self.store, alt);
        }
        self.store.counters.backchains += 1;
        let clause = &self.program.clauses[ids[start]];
        let (cargs, body) = rename(&mut self.store, clause);
        let eqs = cargs
            .into_iter()
            .zip(args.iter())
            .map(|(l, &r)| Eqn::new(l, r))
            .collect();
        if !self.store.simpl(eqs, false)? {
            return Ok(Flow::Fail);
        }
        let goals = match body {
            Some(b) => push(b, rest),
            None => rest,
        };
        self.unify_then(goals)
    }

    fn answer(&mut self) -> Result<Answer, EngineError> {
        Answer::extract(&mut self.store, &self.qvars, self.search.depth_exceeded)
    }
}

impl Iterator for Solver<'_> {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let r = match std::mem::replace(&mut self.state, State::Backtrack) {
                State::Done => {
                    self.state = State::Done;
                    return None;
                }
                State::Run(None) => {
                    let a = self.answer();
                    if a.is_err() {
                        self.finish();
                    }
                    return Some(a);
                }
                State::Run(Some(node)) => self.step(&node),
                State::Backtrack => match self.search.backtrack(&mut self.store) {
                    Ok(None) => {
                        self.finish();
                        return None;
                    }
                    Ok(Some(Resume::Choice(Cont::Goals(g)))) => Ok(Flow::Next(g)),
                    Ok(Some(Resume::Choice(Cont::Clauses { pred, args, next, rest }))) => {
                        self.backchain(pred, args, next, rest)
                    }
                    Ok(Some(Resume::Unify(cont))) => {
                        let Cont::Goals(g) = &*cont else { unreachable!() };
                        self.unify_then(g.clone())
                    }
                    Err(e) => Err(e),
                },
            };
            match r {
                Ok(Flow::Next(g)) => self.state = State::Run(g),
                Ok(Flow::Fail) => self.state = State::Backtrack,
                Err(e) => {
                    self.finish();
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Convenience: all answers (up to `limit`) of a query.
pub fn answers(program: &Program, query: &Query, config: Config, limit: usize) -> Result<Vec<Answer>, EngineError> {
    solve_query(program, query, config).take(limit).collect()
}

#[cfg(test)]
mod tests;
