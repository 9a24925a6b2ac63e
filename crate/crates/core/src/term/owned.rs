use super::signature::ConstId;

/// A variable slot in an owned term: a clause variable, a query variable or
/// an answer variable, depending on who owns the term.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Slot(pub u32);

/// Tree-shaped, suspension-free de Bruijn term. Programs, queries and
/// answers are stored in this form; the machines copy them onto their heap.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Const(ConstId),
    Var(Slot),
    Index(u32),
    App(Box<Term>, Vec<Term>),
    Lam(Box<Term>),
}

impl Term {
    /// Application with flattening of nested heads; `args` may be empty.
    pub fn app(head: Term, mut args: Vec<Term>) -> Term {
        if args.is_empty() {
            return head;
        }
        match head {
            Term::App(h, mut inner) => {
                inner.append(&mut args);
                Term::App(h, inner)
            }
            h => Term::App(Box::new(h), args),
        }
    }

    pub fn lam(body: Term) -> Term {
        Term::Lam(Box::new(body))
    }

    pub fn lams(n: usize, body: Term) -> Term {
        (0..n).fold(body, |b, _| Term::lam(b))
    }

    /// Largest de Bruijn index free in the term (0 when closed).
    pub fn max_free_index(&self) -> u32 {
        match self {
            Term::Const(_) | Term::Var(_) => 0,
            Term::Index(i) => *i,
            Term::App(h, args) => args
                .iter()
                .map(Term::max_free_index)
                .fold(h.max_free_index(), u32::max),
            Term::Lam(b) => b.max_free_index().saturating_sub(1),
        }
    }

    pub fn head(&self) -> &Term {
        match self {
            Term::App(h, _) => h,
            t => t,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, a) => a,
            _ => &[],
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(h, args) => 1 + h.size() + args.iter().map(Term::size).sum::<usize>(),
            Term::Lam(b) => 1 + b.size(),
            _ => 1,
        }
    }

    /// Applies `f` to every variable slot, left to right.
    pub fn for_each_var(&self, f: &mut impl FnMut(Slot)) {
        match self {
            Term::Var(v) => f(*v),
            Term::App(h, args) => {
                h.for_each_var(f);
                for a in args {
                    a.for_each_var(f);
                }
            }
            Term::Lam(b) => b.for_each_var(f),
            _ => {}
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Slot) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::App(h, args) => {
                let h = h.map_vars(f);
                let args = args.iter().map(|a| a.map_vars(f)).collect();
                Term::app(h, args)
            }
            Term::Lam(b) => Term::lam(b.map_vars(f)),
            t => t.clone(),
        }
    }

    /// Replaces the index bound by an enclosing abstraction (`#1` at depth 0)
    /// with the closed term `by`, lowering the remaining free indices.
    pub fn instantiate(&self, by: &Term) -> Term {
        fn go(t: &Term, depth: u32, by: &Term) -> Term {
            match t {
                Term::Index(i) if *i == depth + 1 => by.clone(),
                Term::Index(i) if *i > depth + 1 => Term::Index(i - 1),
                Term::App(h, args) => Term::app(
                    go(h, depth, by),
                    args.iter().map(|a| go(a, depth, by)).collect(),
                ),
                Term::Lam(b) => Term::lam(go(b, depth + 1, by)),
                t => t.clone(),
            }
        }
        go(self, 0, by)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn app_flattens() {
        let g = Term::Const(ConstId(9));
        let t = Term::app(Term::app(g.clone(), vec![Term::Index(1)]), vec![Term::Index(2)]);
        assert_eq!(t, Term::App(Box::new(g), vec![Term::Index(1), Term::Index(2)]));
    }

    #[test]
    fn free_index_through_binders() {
        let t = Term::lam(Term::lam(Term::app(Term::Index(2), vec![Term::Index(3)])));
        assert_eq!(t.max_free_index(), 1);
        assert_eq!(Term::lam(Term::Index(1)).max_free_index(), 0);
    }

    #[test]
    fn instantiate_binder() {
        let c = Term::Const(ConstId(7));
        let body = Term::app(Term::Index(1), vec![Term::lam(Term::Index(2)), Term::Index(2)]);
        let r = body.instantiate(&c);
        assert_eq!(r, Term::app(c.clone(), vec![Term::lam(c), Term::Index(1)]));
    }
}
