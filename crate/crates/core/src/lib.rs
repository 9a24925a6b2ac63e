//! A higher-order Horn clause engine.
//!
//! Terms are de Bruijn lambda terms with explicit suspensions and
//! closedness annotations. Unification follows Huet's procedure over an
//! explicit, trailed disagreement set. Programs run either on an abstract
//! interpreter of derivations or on a WAM-style bytecode machine.

pub mod answer;
pub mod engine;
pub mod error;
pub mod frontend;
pub mod interp;
pub mod reduce;
pub mod term;
pub mod trace;
pub mod unify;
pub mod vm;

pub use answer::Answer;
pub use engine::{Answers, Engine};
pub use frontend::{Program, Query};
pub use interp::Config;
pub use error::Error;
pub use term::{ConstId, Signature, Slot, Store, Term, TermRef, Ty};
