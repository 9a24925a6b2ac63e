use std::collections::HashMap;

use super::types::{Ty, TyKind};
use crate::error::SigError;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct ConstId(pub u32);

/// The logical constants of the goal language.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Logical {
    Top,
    And,
    Or,
    /// Existential quantifier at a fixed binder type.
    Sigma,
    /// Recognised only to reject it: implications are not goals here.
    Imp,
    /// Recognised only to reject it: universal goals are out of scope.
    Pi,
}

#[derive(Clone, Debug)]
pub struct ConstDecl {
    pub name: String,
    pub ty: Ty,
    pub logical: Option<Logical>,
}

/// Sorts, type constructors and typed constants.
#[derive(Clone, Debug)]
pub struct Signature {
    sorts: Vec<String>,
    constructors: HashMap<String, usize>,
    consts: Vec<ConstDecl>,
    by_name: HashMap<String, ConstId>,
    sigma: Vec<(Ty, ConstId)>,
    pi: Vec<(Ty, ConstId)>,
}

pub const TOP: ConstId = ConstId(0);
pub const AND: ConstId = ConstId(1);
pub const OR: ConstId = ConstId(2);
pub const IMP: ConstId = ConstId(3);

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

impl Signature {
    pub fn new() -> Signature {
        let mut sig = Signature {
            sorts: vec!["o".into()],
            constructors: HashMap::from([("list".to_string(), 1)]),
            consts: Vec::new(),
            by_name: HashMap::new(),
            sigma: Vec::new(),
            pi: Vec::new(),
        };
        let o = Ty::o();
        let oo = Ty::arrows(&[o.clone(), o.clone()], o.clone());
        sig.push_const("true", o, Some(Logical::Top));
        sig.push_const(",", oo.clone(), Some(Logical::And));
        sig.push_const(";", oo.clone(), Some(Logical::Or));
        sig.push_const("=>", oo, Some(Logical::Imp));
        sig
    }

    fn push_const(&mut self, name: &str, ty: Ty, logical: Option<Logical>) -> ConstId {
        let id = ConstId(self.consts.len() as u32);
        self.consts.push(ConstDecl {
            name: name.into(),
            ty,
            logical,
        });
        if !matches!(logical, Some(Logical::Sigma | Logical::Pi)) {
            self.by_name.insert(name.into(), id);
        }
        id
    }

    pub fn add_sort(&mut self, name: &str) -> Result<(), SigError> {
        if self.constructors.contains_key(name) {
            return Err(SigError::KindClash(name.into()));
        }
        if !self.sorts.iter().any(|s| s == name) {
            self.sorts.push(name.into());
        }
        Ok(())
    }

    pub fn add_constructor(&mut self, name: &str, arity: usize) -> Result<(), SigError> {
        if arity == 0 {
            return self.add_sort(name);
        }
        if self.sorts.iter().any(|s| s == name) {
            return Err(SigError::KindClash(name.into()));
        }
        match self.constructors.get(name) {
            Some(&a) if a != arity => Err(SigError::KindClash(name.into())),
            _ => {
                self.constructors.insert(name.into(), arity);
                Ok(())
            }
        }
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s == name)
    }

    pub fn constructor_arity(&self, name: &str) -> Option<usize> {
        self.constructors.get(name).copied()
    }

    /// Checks that a type mentions only declared sorts and constructors.
    pub fn check_type(&self, ty: &Ty) -> Result<(), SigError> {
        match ty.kind() {
            TyKind::Sort(s) => {
                if self.has_sort(s) {
                    Ok(())
                } else {
                    Err(SigError::UnknownSort(s.to_string()))
                }
            }
            TyKind::Con(c, args) => match self.constructor_arity(c) {
                Some(n) if n == args.len() => args.iter().try_for_each(|a| self.check_type(a)),
                Some(n) => Err(SigError::ConstructorArity {
                    name: c.to_string(),
                    expected: n,
                    found: args.len(),
                }),
                None => Err(SigError::UnknownSort(c.to_string())),
            },
            TyKind::Arrow(a, r) => {
                self.check_type(a)?;
                self.check_type(r)
            }
        }
    }

    /// Declares a non-logical constant. Redeclaring at the same type is allowed.
    pub fn declare(&mut self, name: &str, ty: Ty) -> Result<ConstId, SigError> {
        self.check_type(&ty)?;
        if let Some(&id) = self.by_name.get(name) {
            let d = &self.consts[id.0 as usize];
            if d.logical.is_some() {
                return Err(SigError::Reserved(name.into()));
            }
            if d.ty != ty {
                return Err(SigError::Redeclared {
                    name: name.into(),
                    old: d.ty.to_string(),
                    new: ty.to_string(),
                });
            }
            return Ok(id);
        }
        if !ty.target().is_o() && ty.split().0.iter().any(Ty::mentions_o) {
            return Err(SigError::PropositionalArgument(name.into()));
        }
        Ok(self.push_const(name, ty, None))
    }

    pub fn lookup(&self, name: &str) -> Option<ConstId> {
        self.by_name.get(name).copied()
    }

    /// The existential quantifier over binder type `ty`, created on demand.
    pub fn sigma(&mut self, ty: &Ty) -> ConstId {
        if let Some((_, id)) = self.sigma.iter().find(|(t, _)| t == ty) {
            return *id;
        }
        let qty = Ty::arrow(Ty::arrow(ty.clone(), Ty::o()), Ty::o());
        let id = self.push_const("sigma", qty, Some(Logical::Sigma));
        self.sigma.push((ty.clone(), id));
        id
    }

    /// The universal quantifier over binder type `ty` (only ever rejected).
    pub fn pi(&mut self, ty: &Ty) -> ConstId {
        if let Some((_, id)) = self.pi.iter().find(|(t, _)| t == ty) {
            return *id;
        }
        let qty = Ty::arrow(Ty::arrow(ty.clone(), Ty::o()), Ty::o());
        let id = self.push_const("pi", qty, Some(Logical::Pi));
        self.pi.push((ty.clone(), id));
        id
    }

    pub fn decl(&self, c: ConstId) -> &ConstDecl {
        &self.consts[c.0 as usize]
    }

    pub fn name(&self, c: ConstId) -> &str {
        &self.consts[c.0 as usize].name
    }

    pub fn ty(&self, c: ConstId) -> &Ty {
        &self.consts[c.0 as usize].ty
    }

    pub fn logical(&self, c: ConstId) -> Option<Logical> {
        self.consts[c.0 as usize].logical
    }

    pub fn consts(&self) -> impl Iterator<Item = (ConstId, &ConstDecl)> {
        self.consts
            .iter()
            .enumerate()
            .map(|(i, d)| (ConstId(i as u32), d))
    }

    /// Whether `name` is taken by a constant (used to avoid clashes when printing).
    pub fn is_const_name(&self, name: &str) -> bool {
        self.by_name.contains_key(name) || name == "sigma" || name == "pi"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predeclared() {
        let sig = Signature::new();
        assert!(sig.has_sort("o"));
        assert_eq!(sig.constructor_arity("list"), Some(1));
        assert_eq!(sig.logical(TOP), Some(Logical::Top));
        assert_eq!(sig.lookup(","), Some(AND));
    }

    #[test]
    fn declarations_are_checked() {
        let mut sig = Signature::new();
        sig.add_sort("i").unwrap();
        let i = Ty::sort("i");
        assert!(sig.declare("a", i.clone()).is_ok());
        assert!(sig.declare("a", i.clone()).is_ok());
        assert!(sig.declare("a", Ty::o()).is_err());
        assert!(sig.declare("b", Ty::sort("j")).is_err());
        assert!(sig.declare("l", Ty::con("list", vec![])).is_err());
        assert!(sig.declare("f", Ty::arrow(Ty::o(), i.clone())).is_err());
        assert!(sig.declare("p", Ty::arrow(Ty::arrow(i.clone(), Ty::o()), Ty::o())).is_ok());
    }

    #[test]
    fn sigma_instances_are_shared() {
        let mut sig = Signature::new();
        let a = sig.sigma(&Ty::o());
        let b = sig.sigma(&Ty::o());
        assert_eq!(a, b);
        assert_eq!(sig.name(a), "sigma");
        assert_eq!(sig.logical(a), Some(Logical::Sigma));
    }
}
