//! Type inference and conversion of surface terms to de Bruijn terms.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use super::parser::Surface;
use super::VarTable;
use crate::error::TypeError;
use crate::term::{ConstId, Logical, Signature, Slot, Term, Ty, TyKind, AND, OR};

/// A type under inference.
#[derive(Clone, Debug, PartialEq, Eq)]
enum M {
    Meta(u32),
    Con(Rc<str>, Vec<M>),
    Arrow(Box<M>, Box<M>),
}

impl M {
    fn from_ty(t: &Ty) -> M {
        match t.kind() {
            TyKind::Sort(s) => M::Con(s.clone(), Vec::new()),
            TyKind::Con(c, args) => M::Con(c.clone(), args.iter().map(M::from_ty).collect()),
            TyKind::Arrow(a, r) => M::Arrow(Box::new(M::from_ty(a)), Box::new(M::from_ty(r))),
        }
    }

    fn o() -> M {
        M::Con("o".into(), Vec::new())
    }
}

/// Placeholder ids for quantifier instances whose binder type is not yet
/// known; they are replaced once inference is complete.
const PENDING: u32 = u32::MAX / 2;

struct Infer<'a> {
    sig: &'a Signature,
    metas: Vec<Option<M>>,
    vars: VarTable,
    var_metas: Vec<M>,
    by_name: HashMap<String, u32>,
    binders: Vec<(String, M)>,
    lambdas: Vec<(String, M)>,
    sigmas: Vec<M>,
}

struct Shown<'a, 'b>(&'a Infer<'b>, &'a M);

impl fmt::Display for Shown<'_, '_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.zonk(self.1) {
            Some(t) => write!(f, "{t}"),
            None => match self.0.walk(self.1) {
                M::Arrow(..) => write!(f, "a function type"),
                _ => write!(f, "an unknown type"),
            },
        }
    }
}

impl<'a> Infer<'a> {
    fn new(sig: &'a Signature) -> Infer<'a> {
        Infer {
            sig,
            metas: Vec::new(),
            vars: VarTable::default(),
            var_metas: Vec::new(),
            by_name: HashMap::new(),
            binders: Vec::new(),
            lambdas: Vec::new(),
            sigmas: Vec::new(),
        }
    }

    fn fresh(&mut self) -> M {
        self.metas.push(None);
        M::Meta(self.metas.len() as u32 - 1)
    }

    fn walk(&self, m: &M) -> M {
        let mut m = m.clone();
        while let M::Meta(i) = m {
            match &self.metas[i as usize] {
                Some(t) => m = t.clone(),
                None => break,
            }
        }
        m
    }

    fn occurs(&self, i: u32, m: &M) -> bool {
        match self.walk(m) {
            M::Meta(j) => i == j,
            M::Con(_, args) => args.iter().any(|a| self.occurs(i, a)),
            M::Arrow(a, r) => self.occurs(i, &a) || self.occurs(i, &r),
        }
    }

    fn unify(&mut self, a: &M, b: &M) -> bool {
        let (a, b) = (self.walk(a), self.walk(b));
        match (a, b) {
            (M::Meta(i), M::Meta(j)) if i == j => true,
            (M::Meta(i), t) | (t, M::Meta(i)) => {
                if self.occurs(i, &t) {
                    return false;
                }
                self.metas[i as usize] = Some(t);
                true
            }
            (M::Con(c, xs), M::Con(d, ys)) => {
                c == d && xs.len() == ys.len() && xs.iter().zip(&ys).all(|(x, y)| self.unify(x, y))
            }
            (M::Arrow(a1, r1), M::Arrow(a2, r2)) => self.unify(&a1, &a2) && self.unify(&r1, &r2),
            _ => false,
        }
    }

    fn zonk(&self, m: &M) -> Option<Ty> {
        match self.walk(m) {
            M::Meta(_) => None,
            M::Con(c, args) if args.is_empty() => Some(Ty::sort(&c)),
            M::Con(c, args) => {
                let args = args.iter().map(|a| self.zonk(a)).collect::<Option<Vec<_>>>()?;
                Some(Ty::con(&c, args))
            }
            M::Arrow(a, r) => Some(Ty::arrow(self.zonk(&a)?, self.zonk(&r)?)),
        }
    }

    fn mismatch(&self, s: &Surface, expected: &M, found: &M) -> TypeError {
        TypeError::Mismatch {
            term: s.to_string(),
            expected: Shown(self, expected).to_string(),
            found: Shown(self, found).to_string(),
        }
    }

    fn slot(&mut self, name: &str) -> (Slot, M) {
        if name != "_" {
            if let Some(&i) = self.by_name.get(name) {
                return (Slot(i), self.var_metas[i as usize].clone());
            }
        }
        let i = self.vars.names.len() as u32;
        let m = self.fresh();
        self.vars.names.push(if name == "_" { None } else { Some(name.to_string()) });
        self.var_metas.push(m.clone());
        if name != "_" {
            self.by_name.insert(name.to_string(), i);
        }
        (Slot(i), m)
    }

    fn binder(&self, name: &str) -> Option<(u32, M)> {
        self.binders
            .iter()
            .rev()
            .position(|(n, _)| n == name)
            .map(|k| (k as u32 + 1, self.binders[self.binders.len() - 1 - k].1.clone()))
    }

    fn constant(&mut self, name: &str, s: &Surface) -> Result<(Term, M), TypeError> {
        match name {
            "sigma" => {
                let a = self.fresh();
                self.sigmas.push(a.clone());
                let ty = M::Arrow(Box::new(M::Arrow(Box::new(a), Box::new(M::o()))), Box::new(M::o()));
                Ok((Term::Const(ConstId(PENDING + self.sigmas.len() as u32 - 1)), ty))
            }
            "pi" | "=>" => Err(TypeError::UnsupportedGoal(s.to_string())),
            _ => match self.sig.lookup(name) {
                Some(c) => Ok((Term::Const(c), M::from_ty(self.sig.ty(c)))),
                None => Err(TypeError::UnknownConstant(name.to_string())),
            },
        }
    }

    fn apply(&mut self, s: &Surface, head: (Term, M), args: Vec<(Term, M, &Surface)>) -> Result<(Term, M), TypeError> {
        let (h, mut ty) = head;
        let mut out = Vec::with_capacity(args.len());
        for (a, aty, asrc) in args {
            let r = match self.walk(&ty) {
                M::Arrow(d, r) => {
                    if !self.unify(&d, &aty) {
                        return Err(self.mismatch(asrc, &d, &aty));
                    }
                    *r
                }
                M::Meta(_) => {
                    let r = self.fresh();
                    let f = M::Arrow(Box::new(aty), Box::new(r.clone()));
                    if !self.unify(&ty, &f) {
                        return Err(self.mismatch(s, &f, &ty));
                    }
                    r
                }
                other => {
                    let want = M::Arrow(Box::new(aty), Box::new(self.fresh()));
                    return Err(self.mismatch(s, &want, &other));
                }
            };
            out.push(a);
            ty = r;
        }
        Ok((Term::app(h, out), ty))
    }

    fn infer(&mut self, s: &Surface) -> Result<(Term, M), TypeError> {
        match s {
            Surface::Name(n, _) | Surface::Var(n, _) => {
                if let Some((i, m)) = self.binder(n) {
                    return Ok((Term::Index(i), m));
                }
                if matches!(s, Surface::Var(..)) {
                    let (slot, m) = self.slot(n);
                    return Ok((Term::Var(slot), m));
                }
                self.constant(n, s)
            }
            Surface::App(h, args) => {
                let head = self.infer(h)?;
                let mut xs = Vec::with_capacity(args.len());
                for a in args {
                    let (t, m) = self.infer(a)?;
                    xs.push((t, m, a));
                }
                self.apply(s, head, xs)
            }
            Surface::Lam(x, body, _) => {
                let a = self.fresh();
                self.binders.push((x.clone(), a.clone()));
                let r = self.infer(body);
                self.binders.pop();
                let (b, bty) = r?;
                self.lambdas.push((x.clone(), a.clone()));
                Ok((Term::lam(b), M::Arrow(Box::new(a), Box::new(bty))))
            }
            Surface::Infix(op, l, r, _) => {
                let head = match *op {
                    ";" => (Term::Const(OR), M::from_ty(self.sig.ty(OR))),
                    "," => (Term::Const(AND), M::from_ty(self.sig.ty(AND))),
                    "=>" => return Err(TypeError::UnsupportedGoal(s.to_string())),
                    _ => self.constant(op, s)?,
                };
                let lt = self.infer(l)?;
                let rt = self.infer(r)?;
                self.apply(s, head, vec![(lt.0, lt.1, l), (rt.0, rt.1, r)])
            }
        }
    }

    fn expect_o(&mut self, s: &Surface, m: &M) -> Result<(), TypeError> {
        if self.unify(m, &M::o()) {
            Ok(())
        } else {
            Err(self.mismatch(s, &M::o(), m))
        }
    }

    /// Grounds every inferred type; returns the variable table and the
    /// binder types of the quantifier instances.
    fn ground(self) -> Result<(VarTable, Vec<Ty>), TypeError> {
        let mut vars = self.vars.clone();
        for (i, m) in self.var_metas.iter().enumerate() {
            let ty = self.zonk(m).ok_or_else(|| {
                TypeError::Unconstrained(vars.names[i].clone().unwrap_or_else(|| "_".into()))
            })?;
            vars.tys.push(ty);
        }
        for (x, m) in &self.lambdas {
            if self.zonk(m).is_none() {
                return Err(TypeError::Unconstrained(x.clone()));
            }
        }
        let sigmas = self
            .sigmas
            .iter()
            .map(|m| self.zonk(m).ok_or_else(|| TypeError::Unconstrained("sigma".into())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((vars, sigmas))
    }
}

fn instantiate_sigmas(sig: &mut Signature, tys: &[Ty], terms: &mut [&mut Term]) {
    let ids: Vec<ConstId> = tys.iter().map(|t| sig.sigma(t)).collect();
    for t in terms.iter_mut() {
        **t = replace_pending(t, &ids);
    }
}

fn replace_pending(t: &Term, sigmas: &[ConstId]) -> Term {
    match t {
        Term::Const(ConstId(c)) if *c >= PENDING => Term::Const(sigmas[(c - PENDING) as usize]),
        Term::App(h, args) => Term::app(
            replace_pending(h, sigmas),
            args.iter().map(|a| replace_pending(a, sigmas)).collect(),
        ),
        Term::Lam(b) => Term::lam(replace_pending(b, sigmas)),
        t => t.clone(),
    }
}

/// Whether the only logical constants in `t` are conjunction, disjunction
/// and existential quantifiers.
fn positive(sig: &Signature, t: &Term) -> bool {
    match t {
        Term::Const(c) => matches!(sig.logical(*c), None | Some(Logical::And | Logical::Or | Logical::Sigma)),
        Term::App(h, args) => positive(sig, h) && args.iter().all(|a| positive(sig, a)),
        Term::Lam(b) => positive(sig, b),
        _ => true,
    }
}

fn check_args(sig: &Signature, args: &[Term], src: &Surface) -> Result<(), TypeError> {
    match args.iter().find(|a| !positive(sig, a)) {
        Some(_) => Err(TypeError::NonPositive(src.to_string())),
        None => Ok(()),
    }
}

/// Goal formulas: true, atoms, conjunctions, disjunctions, existentials.
fn check_goal(sig: &Signature, t: &Term, src: &Surface) -> Result<(), TypeError> {
    let args = t.args();
    match t.head() {
        Term::Const(c) => match sig.logical(*c) {
            Some(Logical::Top) => Ok(()),
            Some(Logical::And | Logical::Or) if args.len() == 2 => {
                check_goal(sig, &args[0], src)?;
                check_goal(sig, &args[1], src)
            }
            Some(Logical::Sigma) if args.len() == 1 => match &args[0] {
                Term::Lam(body) => check_goal(sig, body, src),
                a => check_args(sig, std::slice::from_ref(a), src),
            },
            Some(Logical::Imp | Logical::Pi) => Err(TypeError::UnsupportedGoal(src.to_string())),
            Some(_) => Err(TypeError::NotAGoal(src.to_string())),
            None => check_args(sig, args, src),
        },
        Term::Var(_) | Term::Index(_) => check_args(sig, args, src),
        _ => Err(TypeError::NotAGoal(src.to_string())),
    }
}

pub(super) struct CheckedClause {
    pub pred: ConstId,
    pub args: Vec<Term>,
    pub body: Option<Term>,
    pub vars: VarTable,
}

pub(super) fn clause(sig: &mut Signature, head: &Surface, body: Option<&Surface>) -> Result<CheckedClause, TypeError> {
    let mut inf = Infer::new(sig);
    let (mut h, hty) = inf.infer(head)?;
    inf.expect_o(head, &hty)?;
    let mut b = match body {
        Some(s) => {
            let (t, m) = inf.infer(s)?;
            inf.expect_o(s, &m)?;
            Some(t)
        }
        None => None,
    };
    let (vars, sigmas) = inf.ground()?;
    {
        let mut terms: Vec<&mut Term> = vec![&mut h];
        if let Some(b) = b.as_mut() {
            terms.push(b);
        }
        instantiate_sigmas(sig, &sigmas, &mut terms);
    }
    let pred = match h.head() {
        Term::Const(c) if sig.logical(*c).is_none() => *c,
        _ => return Err(TypeError::FlexibleHead(head.to_string())),
    };
    check_args(sig, h.args(), head)?;
    if let (Some(b), Some(src)) = (&b, body) {
        check_goal(sig, b, src)?;
    }
    let args = h.args().to_vec();
    Ok(CheckedClause {
        pred,
        args,
        body: b,
        vars,
    })
}

pub(super) fn query(sig: &mut Signature, goal: &Surface) -> Result<(Term, VarTable), TypeError> {
    let mut inf = Infer::new(sig);
    let (mut g, m) = inf.infer(goal)?;
    inf.expect_o(goal, &m)?;
    let (vars, sigmas) = inf.ground()?;
    instantiate_sigmas(sig, &sigmas, &mut [&mut g]);
    check_goal(sig, &g, goal)?;
    Ok((g, vars))
}
