//! Typed lambda terms: simple types, signatures, owned de Bruijn trees and
//! the mutable term heap with suspensions and closedness annotations.

mod heap;
mod owned;
mod signature;
mod types;

pub use heap::{
    ArgsRef, Cell, Counters, EnvCell, EnvItem, EnvRef, Mark, Node, Pair, PairId, Store, TermRef,
    TrailEntry, VarId, VarInfo, DEFAULT_FUEL,
};
pub use owned::{Slot, Term};
pub use signature::{ConstDecl, ConstId, Logical, Signature, AND, IMP, OR, TOP};
pub use types::{Ty, TyKind};

/// Structural equality of normal forms; with de Bruijn indices this is
/// alpha-equivalence.
pub fn struct_eq_nf(a: &Term, b: &Term) -> bool {
    a == b
}

/// Encodes a substitution for the outermost binders of `body` as a redex:
/// `(\x1..\xn body) t1 .. tn`. With no replacements `body` is returned.
pub fn subst_as_redexes(body: Term, replacements: Vec<Term>) -> Term {
    let n = replacements.len();
    Term::app(Term::lams(n, body), replacements)
}
