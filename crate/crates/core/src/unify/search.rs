//! Backtracking over goal alternatives and unification branch points.
//!
//! Both engines keep one stack of records. A choice record holds an
//! engine-specific alternative; a branch record holds a flex-rigid pair's
//! remaining substitutions and the continuation to resume once one of them
//! has been applied. Branch records created in the same unification phase
//! share that continuation.

use std::rc::Rc;

use super::{Alt, FlexRigid};
use crate::error::EngineError;
use crate::term::{Mark, Store};

pub const DEFAULT_DEPTH: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MatchOrder {
    #[default]
    ImitationFirst,
    ProjectionFirst,
}

pub struct Branch<K> {
    mark: Mark,
    cont: Rc<K>,
    pair: FlexRigid,
    alts: Vec<Alt>,
    tried: usize,
}

pub enum Record<K> {
    Choice { mark: Mark, alt: K },
    Branch(Branch<K>),
}

/// What to do after backtracking.
pub enum Resume<K> {
    /// Resume an engine alternative.
    Choice(K),
    /// A new substitution was applied; finish unification, then continue.
    Unify(Rc<K>),
}

pub struct Search<K> {
    records: Vec<Record<K>>,
    branches: u32,
    pub depth_limit: u32,
    pub order: MatchOrder,
    /// Set when a branch was cut off by the depth limit; failure is then
    /// no longer a proof that no answer exists.
    pub depth_exceeded: bool,
}

impl<K> Default for Search<K> {
    fn default() -> Self {
        Search::new(DEFAULT_DEPTH, MatchOrder::default())
    }
}

impl<K> Search<K> {
    pub fn new(depth_limit: u32, order: MatchOrder) -> Search<K> {
        Search {
            records: Vec::new(),
            branches: 0,
            depth_limit,
            order,
            depth_exceeded: false,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of branch records on the current path.
    pub fn branch_depth(&self) -> u32 {
        self.branches
    }

    fn top_mark_cells(&self) -> u32 {
        match self.records.last() {
            Some(Record::Choice { mark, .. }) => mark.cells,
            Some(Record::Branch(b)) => b.mark.cells,
            None => 0,
        }
    }

    pub fn push_choice(&mut self, store: &mut Store, alt: K) {
        let mark = store.mark();
        store.hb = mark.cells;
        store.counters.choice_points += 1;
        self.records.push(Record::Choice { mark, alt });
    }

    /// Drops every record above `len` (used to cut away alternatives).
    pub fn cut_to(&mut self, store: &mut Store, len: usize) {
        while self.records.len() > len {
            if let Some(Record::Branch(_)) = self.records.pop() {
                self.branches -= 1;
            }
        }
        store.hb = self.top_mark_cells();
    }

    /// Resolves flex-rigid pairs until none is left. Returns `false` when
    /// the current path fails; the caller then backtracks.
    pub fn unify_steps(&mut self, store: &mut Store, cont: &Rc<K>) -> Result<bool, EngineError> {
        loop {
            let Some(fr) = store.select_flex_rigid()? else {
                return Ok(true);
            };
            if self.branches >= self.depth_limit {
                self.depth_exceeded = true;
                if store.tracer.unify {
                    store.tracer.emit("unify depth limit reached");
                }
                return Ok(false);
            }
            let alts = store.match_alts(&fr, self.order);
            let Some(&first) = alts.first() else {
                return Ok(false);
            };
            let mark = store.mark();
            store.hb = mark.cells;
            store.counters.branch_points += 1;
            if store.tracer.unify {
                store
                    .tracer
                    .emit(format_args!("unify branch depth={} alternatives={}", self.branches + 1, alts.len()));
            }
            store.apply_alt(&fr, first);
            self.records.push(Record::Branch(Branch {
                mark,
                cont: cont.clone(),
                pair: fr,
                alts,
                tried: 1,
            }));
            self.branches += 1;
            if !store.simpl(Vec::new(), true)? {
                return Ok(false);
            }
        }
    }

    /// Restores the most recent record with an untried alternative.
    /// `None` means the search space is exhausted.
    pub fn backtrack(&mut self, store: &mut Store) -> Result<Option<Resume<K>>, EngineError> {
        loop {
            let Some(top) = self.records.last_mut() else {
                store.hb = 0;
                return Ok(None);
            };
            match top {
                Record::Choice { mark, .. } => {
                    let mark = *mark;
                    store.undo_to(mark);
                    let Some(Record::Choice { alt, .. }) = self.records.pop() else {
                        unreachable!()
                    };
                    store.hb = self.top_mark_cells();
                    return Ok(Some(Resume::Choice(alt)));
                }
                Record::Branch(b) => {
                    store.undo_to(b.mark);
                    if b.tried == b.alts.len() {
                        self.records.pop();
                        self.branches -= 1;
                        continue;
                    }
                    let alt = b.alts[b.tried];
                    b.tried += 1;
                    store.hb = b.mark.cells;
                    let pair = b.pair.clone();
                    let cont = b.cont.clone();
                    store.apply_alt(&pair, alt);
                    if store.simpl(Vec::new(), true)? {
                        return Ok(Some(Resume::Unify(cont)));
                    }
                }
            }
        }
    }
}

/// Every preunifier of `eqs` reachable within `depth` branch points, as the
/// normal forms of `vars`, in search order. The store is left as it was.
/// The flag tells whether some branch was cut off by the depth limit.
pub fn solve_unify(
    store: &mut Store,
    eqs: Vec<super::Eqn>,
    vars: &[crate::term::TermRef],
    depth: u32,
    order: MatchOrder,
) -> Result<(Vec<Vec<crate::term::Term>>, bool), EngineError> {
    let start = store.mark();
    let hb = store.hb;
    store.hb = start.cells;
    let mut search: Search<()> = Search::new(depth, order);
    let cont = Rc::new(());
    let mut ok = store.simpl(eqs, false)?;
    let mut out = Vec::new();
    loop {
        if ok && search.unify_steps(store, &cont)? {
            out.push(vars.iter().map(|&v| store.nf(v)).collect::<Result<_, _>>()?);
        }
        match search.backtrack(store)? {
            None => break,
            Some(_) => ok = true,
        }
    }
    store.undo_to(start);
    store.hb = hb;
    Ok((out, search.depth_exceeded))
}
