use std::fmt;
use std::rc::Rc;

/// A simple type: a sort, an applied type constructor, or an arrow.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ty(Rc<TyKind>);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TyKind {
    Sort(Rc<str>),
    Con(Rc<str>, Vec<Ty>),
    Arrow(Ty, Ty),
}

impl Ty {
    pub fn sort(name: &str) -> Ty {
        Ty(Rc::new(TyKind::Sort(name.into())))
    }

    pub fn con(name: &str, args: Vec<Ty>) -> Ty {
        Ty(Rc::new(TyKind::Con(name.into(), args)))
    }

    pub fn arrow(arg: Ty, result: Ty) -> Ty {
        Ty(Rc::new(TyKind::Arrow(arg, result)))
    }

    /// Builds `args[0] -> ... -> args[n-1] -> target`.
    pub fn arrows(args: &[Ty], target: Ty) -> Ty {
        args.iter()
            .rev()
            .fold(target, |acc, a| Ty::arrow(a.clone(), acc))
    }

    pub fn o() -> Ty {
        Ty::sort("o")
    }

    pub fn kind(&self) -> &TyKind {
        &self.0
    }

    pub fn is_arrow(&self) -> bool {
        matches!(*self.0, TyKind::Arrow(..))
    }

    pub fn is_o(&self) -> bool {
        matches!(&*self.0, TyKind::Sort(s) if &**s == "o")
    }

    /// Number of arrows before the target type.
    pub fn arity(&self) -> usize {
        let mut n = 0;
        let mut t = self;
        while let TyKind::Arrow(_, r) = &*t.0 {
            n += 1;
            t = r;
        }
        n
    }

    /// Splits `a1 -> ... -> an -> b` into `([a1..an], b)` with `b` atomic.
    pub fn split(&self) -> (Vec<Ty>, Ty) {
        let mut args = Vec::new();
        let mut t = self;
        while let TyKind::Arrow(a, r) = &*t.0 {
            args.push(a.clone());
            t = r;
        }
        (args, t.clone())
    }

    pub fn target(&self) -> Ty {
        let mut t = self;
        while let TyKind::Arrow(_, r) = &*t.0 {
            t = r;
        }
        t.clone()
    }

    /// The type left after applying `n` arguments.
    pub fn drop_args(&self, n: usize) -> Option<Ty> {
        let mut t = self;
        for _ in 0..n {
            match &*t.0 {
                TyKind::Arrow(_, r) => t = r,
                _ => return None,
            }
        }
        Some(t.clone())
    }

    /// Whether `o` occurs anywhere in the type.
    pub fn mentions_o(&self) -> bool {
        match &*self.0 {
            TyKind::Sort(s) => &**s == "o",
            TyKind::Con(_, args) => args.iter().any(Ty::mentions_o),
            TyKind::Arrow(a, r) => a.mentions_o() || r.mentions_o(),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            TyKind::Sort(s) => write!(f, "{s}"),
            TyKind::Con(c, args) => {
                write!(f, "{c}")?;
                for a in args {
                    if matches!(a.kind(), TyKind::Sort(_)) {
                        write!(f, " {a}")?;
                    } else {
                        write!(f, " ({a})")?;
                    }
                }
                Ok(())
            }
            TyKind::Arrow(a, r) => {
                if a.is_arrow() {
                    write!(f, "({a}) -> {r}")
                } else {
                    write!(f, "{a} -> {r}")
                }
            }
        }
    }
}

impl fmt::Debug for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_and_arity() {
        let i = Ty::sort("i");
        let t = Ty::arrows(&[i.clone(), Ty::arrow(i.clone(), i.clone())], Ty::o());
        assert_eq!(t.arity(), 2);
        let (args, target) = t.split();
        assert_eq!(args.len(), 2);
        assert!(target.is_o());
        assert_eq!(t.to_string(), "i -> (i -> i) -> o");
        assert_eq!(t.drop_args(1).unwrap().to_string(), "(i -> i) -> o");
    }

    #[test]
    fn constructor_display() {
        let l = Ty::con("list", vec![Ty::sort("i")]);
        assert_eq!(Ty::arrow(l.clone(), l).to_string(), "list i -> list i");
    }
}
