//! Printing of normal forms in the surface syntax.

use crate::term::{Logical, Signature, Slot, Term, AND, OR, TOP};

const LAM: u8 = 0;
const APP: u8 = 5;
const ATOM: u8 = 6;

fn infix(sig: &Signature, t: &Term) -> Option<(&'static str, u8)> {
    let Term::App(h, args) = t else { return None };
    let Term::Const(c) = **h else { return None };
    if args.len() != 2 {
        return None;
    }
    match c {
        OR => Some((";", 1)),
        AND => Some((",", 2)),
        _ if sig.name(c) == "::" && sig.logical(c).is_none() => Some(("::", 4)),
        _ => None,
    }
}

fn is_sigma(sig: &Signature, t: &Term) -> bool {
    matches!(t, Term::App(h, args) if args.len() == 1
        && matches!(args[0], Term::Lam(_))
        && matches!(**h, Term::Const(c) if sig.logical(c) == Some(Logical::Sigma)))
}

pub struct Printer<'a> {
    sig: &'a Signature,
    var: &'a dyn Fn(Slot) -> String,
}

impl<'a> Printer<'a> {
    pub fn new(sig: &'a Signature, var: &'a dyn Fn(Slot) -> String) -> Printer<'a> {
        Printer { sig, var }
    }

    pub fn term(&self, t: &Term) -> String {
        let mut out = String::new();
        self.go(t, LAM, &mut Vec::new(), &mut out);
        out
    }

    fn fresh(&self, binders: &[String]) -> String {
        let mut k = binders.len() + 1;
        loop {
            let n = format!("x{k}");
            if !self.sig.is_const_name(&n) && !binders.contains(&n) {
                return n;
            }
            k += 1;
        }
    }

    fn go(&self, t: &Term, ctx: u8, binders: &mut Vec<String>, out: &mut String) {
        let (prec, parens_ok) = match t {
            Term::Lam(_) => (LAM, true),
            _ if is_sigma(self.sig, t) => (LAM, true),
            _ => match infix(self.sig, t) {
                Some((_, p)) => (p, true),
                None if matches!(t, Term::App(..)) => (APP, true),
                None => (ATOM, false),
            },
        };
        let paren = parens_ok && prec < ctx;
        if paren {
            out.push('(');
        }
        match t {
            Term::Lam(b) => {
                let x = self.fresh(binders);
                out.push_str(&x);
                out.push_str("\\ ");
                binders.push(x);
                self.go(b, LAM, binders, out);
                binders.pop();
            }
            Term::App(h, args) => {
                if is_sigma(self.sig, t) {
                    out.push_str("sigma ");
                    self.go(&args[0], LAM, binders, out);
                } else if let Some((op, p)) = infix(self.sig, t) {
                    // operands that are applications are bracketed for legibility
                    let operand = |a: &Term| if infix(self.sig, a).is_some() { p + 1 } else { ATOM };
                    self.go(&args[0], operand(&args[0]), binders, out);
                    out.push(' ');
                    out.push_str(op);
                    out.push(' ');
                    let right = if infix(self.sig, &args[1]).map(|(o, _)| o) == Some(op) {
                        p
                    } else {
                        operand(&args[1])
                    };
                    self.go(&args[1], right, binders, out);
                } else {
                    self.go(h, ATOM, binders, out);
                    for a in args {
                        out.push(' ');
                        self.go(a, ATOM, binders, out);
                    }
                }
            }
            Term::Const(c) if *c == TOP => out.push_str("true"),
            Term::Const(c) => {
                let n = self.sig.name(*c);
                if n == "::" || n == "," || n == ";" {
                    out.push_str(&format!("({n})"));
                } else {
                    out.push_str(n);
                }
            }
            Term::Var(s) => out.push_str(&(self.var)(*s)),
            Term::Index(i) => {
                let i = *i as usize;
                if i <= binders.len() {
                    out.push_str(&binders[binders.len() - i]);
                } else {
                    out.push_str(&format!("#{i}"));
                }
            }
        }
        if paren {
            out.push(')');
        }
    }
}

/// Prints a term whose variables are named `_V<slot>`.
pub fn show(sig: &Signature, t: &Term) -> String {
    let var = |s: Slot| format!("_V{}", s.0);
    Printer::new(sig, &var).term(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Ty;

    fn sig() -> (Signature, [crate::term::ConstId; 4]) {
        let mut s = Signature::new();
        s.add_sort("i").unwrap();
        let i = Ty::sort("i");
        let li = Ty::con("list", vec![i.clone()]);
        let g = s.declare("g", Ty::arrows(&[i.clone(), i.clone()], i.clone())).unwrap();
        let a = s.declare("a", i.clone()).unwrap();
        let nil = s.declare("nil", li.clone()).unwrap();
        let cons = s.declare("::", Ty::arrows(&[i, li.clone()], li)).unwrap();
        (s, [g, a, nil, cons])
    }

    #[test]
    fn abstraction_names() {
        let (s, [g, a, ..]) = sig();
        let t = Term::lam(Term::app(Term::Const(g), vec![Term::Const(a), Term::Index(1)]));
        assert_eq!(show(&s, &t), "x1\\ g a x1");
        let t = Term::lam(Term::lam(Term::app(Term::Index(2), vec![Term::Index(3)])));
        assert_eq!(show(&s, &t), "x1\\ x2\\ x1 #3");
    }

    #[test]
    fn lists_bracket_applications() {
        let (s, [g, a, nil, cons]) = sig();
        let gaa = Term::app(Term::Const(g), vec![Term::Const(a), Term::Const(a)]);
        let l = Term::app(
            Term::Const(cons),
            vec![gaa.clone(), Term::app(Term::Const(cons), vec![gaa, Term::Const(nil)])],
        );
        assert_eq!(show(&s, &l), "(g a a) :: (g a a) :: nil");
    }

    #[test]
    fn goals() {
        let (mut s, [g, a, ..]) = sig();
        let sg = s.sigma(&Ty::sort("i"));
        let body = Term::app(Term::Const(g), vec![Term::Index(1), Term::Const(a)]);
        let t = Term::app(Term::Const(AND), vec![Term::app(Term::Const(sg), vec![Term::lam(body)]), Term::Const(TOP)]);
        assert_eq!(show(&s, &t), "(sigma x1\\ g x1 a) , true");
    }
}
