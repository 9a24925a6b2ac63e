//! Running a query on either backend behind one interface.

use std::fmt;
use std::str::FromStr;

use crate::answer::Answer;
use crate::error::EngineError;
use crate::frontend::{Program, Query};
use crate::interp::{Config, Solver};
use crate::term::Store;
use crate::unify::MatchOrder;
use crate::vm::{Code, VmSolver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Interp,
    Vm,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Engine, String> {
        match s {
            "interp" => Ok(Engine::Interp),
            "vm" => Ok(Engine::Vm),
            _ => Err(format!("unknown engine `{s}` (expected interp or vm)")),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Interp => "interp",
            Engine::Vm => "vm",
        })
    }
}

impl FromStr for MatchOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<MatchOrder, String> {
        match s {
            "imitation-first" => Ok(MatchOrder::ImitationFirst),
            "projection-first" => Ok(MatchOrder::ProjectionFirst),
            _ => Err(format!("unknown order `{s}` (expected imitation-first or projection-first)")),
        }
    }
}

/// The answer stream of one query on the chosen engine.
pub enum Answers<'a> {
    Interp(Solver<'a>),
    Vm(VmSolver<'a>),
}

impl<'a> Answers<'a> {
    /// `code` must be `vm::compile(program)` when the engine is the VM.
    pub fn new(engine: Engine, program: &'a Program, code: &'a Code, query: &Query, config: Config, store: Store) -> Answers<'a> {
        match engine {
            Engine::Interp => Answers::Interp(Solver::with_store(program, query, config, store)),
            Engine::Vm => Answers::Vm(VmSolver::with_store(code, query, config, store)),
        }
    }

    pub fn store(&self) -> &Store {
        match self {
            Answers::Interp(s) => s.store(),
            Answers::Vm(s) => s.store(),
        }
    }

    pub fn into_store(self) -> Store {
        match self {
            Answers::Interp(s) => s.into_store(),
            Answers::Vm(s) => s.into_store(),
        }
    }

    pub fn depth_exceeded(&self) -> bool {
        match self {
            Answers::Interp(s) => s.depth_exceeded(),
            Answers::Vm(s) => s.depth_exceeded(),
        }
    }
}

impl Iterator for Answers<'_> {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Answers::Interp(s) => s.next(),
            Answers::Vm(s) => s.next(),
        }
    }
}
