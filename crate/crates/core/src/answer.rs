//! Answers: query variable bindings and residual flex-flex constraints as
//! owned normal forms, with engine-independent variable naming.

use std::collections::HashMap;

use crate::error::EngineError;
use crate::frontend::pretty::Printer;
use crate::term::{Signature, Slot, Store, Term, TermRef, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub bindings: Vec<(String, Term)>,
    /// Flex-flex pairs left over, as closed normal forms.
    pub residual: Vec<(Term, Term)>,
    /// Some branch of the search was cut off by the depth limit.
    pub incomplete: bool,
    /// Names of the variables occurring in the terms, by slot. Query
    /// variables keep their names; the others are `_G1`, `_G2`, ... in order
    /// of appearance.
    pub names: Vec<String>,
}

struct Namer {
    map: HashMap<u32, Slot>,
    names: Vec<String>,
    fresh: usize,
}

impl Namer {
    fn rename(&mut self, t: &Term) -> Term {
        t.map_vars(&mut |s| {
            let slot = *self.map.entry(s.0).or_insert_with(|| {
                self.fresh += 1;
                self.names.push(format!("_G{}", self.fresh));
                Slot(self.names.len() as u32 - 1)
            });
            Term::Var(slot)
        })
    }

    /// Names known variables and blanks the others, for ordering.
    fn key(&self, t: &Term) -> String {
        let t = t.map_vars(&mut |s| match self.map.get(&s.0) {
            Some(&slot) => Term::Var(slot),
            None => Term::Var(Slot(u32::MAX)),
        });
        format!("{t:?}")
    }
}

impl Answer {
    /// Reads the current bindings of `qvars` and the live list off the store.
    pub fn extract(store: &mut Store, qvars: &[(String, TermRef)], incomplete: bool) -> Result<Answer, EngineError> {
        let mut namer = Namer {
            map: HashMap::new(),
            names: qvars.iter().map(|(n, _)| n.clone()).collect(),
            fresh: 0,
        };
        for (i, (_, r)) in qvars.iter().enumerate() {
            if let Some((_, VarId(id))) = store.unbound_var(*r) {
                namer.map.entry(id).or_insert(Slot(i as u32));
            }
        }
        let mut raw = Vec::with_capacity(qvars.len());
        for (_, r) in qvars {
            raw.push(store.nf(*r)?);
        }
        let bindings = qvars
            .iter()
            .zip(&raw)
            .map(|((n, _), t)| (n.clone(), namer.rename(t)))
            .collect();

        let mut pairs = Vec::new();
        for p in store.live_pairs().into_iter().rev() {
            let pr = store.pair(p);
            let l = store.mk_lams(pr.depth, pr.lhs);
            let r = store.mk_lams(pr.depth, pr.rhs);
            pairs.push((store.nf(l)?, store.nf(r)?));
        }
        pairs.sort_by_cached_key(|(l, r)| (namer.key(l), namer.key(r)));
        let residual = pairs
            .iter()
            .map(|(l, r)| (namer.rename(l), namer.rename(r)))
            .collect();
        Ok(Answer {
            bindings,
            residual,
            incomplete,
            names: namer.names,
        })
    }

    pub fn term_string(&self, sig: &Signature, t: &Term) -> String {
        let var = |s: Slot| {
            self.names
                .get(s.0 as usize)
                .cloned()
                .unwrap_or_else(|| format!("_V{}", s.0))
        };
        Printer::new(sig, &var).term(t)
    }

    /// One line per non-trivial binding, then one per residual pair; `yes`
    /// when there is nothing to show.
    pub fn display(&self, sig: &Signature) -> String {
        let mut lines = Vec::new();
        for (i, (n, t)) in self.bindings.iter().enumerate() {
            if *t == Term::Var(Slot(i as u32)) {
                continue;
            }
            lines.push(format!("{n} = {}", self.term_string(sig, t)));
        }
        for (l, r) in &self.residual {
            lines.push(format!("{} ?= {}", self.term_string(sig, l), self.term_string(sig, r)));
        }
        if lines.is_empty() {
            "yes".into()
        } else {
            lines.join("\n")
        }
    }

    pub fn binding(&self, name: &str) -> Option<&Term> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}
