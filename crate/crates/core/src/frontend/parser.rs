use std::fmt;

use super::lexer::{tokenize, TokKind, Token};
use crate::error::ParseError;
use crate::term::Ty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Parse tree with named binders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Surface {
    Name(String, Pos),
    Var(String, Pos),
    App(Box<Surface>, Vec<Surface>),
    Lam(String, Box<Surface>, Pos),
    /// One of `;`, `,`, `=>`, `::`.
    Infix(&'static str, Box<Surface>, Box<Surface>, Pos),
}

impl Surface {
    pub fn pos(&self) -> Pos {
        match self {
            Surface::Name(_, p) | Surface::Var(_, p) | Surface::Lam(_, _, p) | Surface::Infix(_, _, _, p) => *p,
            Surface::App(h, _) => h.pos(),
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surface::Name(n, _) | Surface::Var(n, _) => write!(f, "{n}"),
            Surface::App(h, args) => {
                write!(f, "{h}")?;
                for a in args {
                    match a {
                        Surface::Name(..) | Surface::Var(..) => write!(f, " {a}")?,
                        _ => write!(f, " ({a})")?,
                    }
                }
                Ok(())
            }
            Surface::Lam(x, b, _) => write!(f, "{x}\\ {b}"),
            Surface::Infix(op, l, r, _) => write!(f, "({l}) {op} ({r})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Kind { names: Vec<String>, arity: usize, pos: Pos },
    Type { names: Vec<String>, ty: Ty, pos: Pos },
    Clause { head: Surface, body: Option<Surface>, pos: Pos },
    Query { goal: Surface, pos: Pos },
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

pub fn parse_program(src: &str) -> Result<Vec<Item>, ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        i: 0,
    };
    let mut items = Vec::new();
    while p.peek() != &TokKind::End {
        items.push(p.item()?);
    }
    Ok(items)
}

/// A query, with or without the leading `?-` and the final period.
pub fn parse_query(src: &str) -> Result<Surface, ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        i: 0,
    };
    p.eat("?-");
    let t = p.term()?;
    p.eat(".");
    if p.peek() != &TokKind::End {
        return Err(p.error("unexpected input after the query"));
    }
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Ty, ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        i: 0,
    };
    let t = p.ty()?;
    if p.peek() != &TokKind::End {
        return Err(p.error("unexpected input after the type"));
    }
    Ok(t)
}

impl Parser {
    fn peek(&self) -> &TokKind {
        &self.toks[self.i].kind
    }

    fn peek2(&self) -> &TokKind {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].kind
    }

    fn pos(&self) -> Pos {
        let t = &self.toks[self.i];
        Pos {
            line: t.line,
            col: t.col,
        }
    }

    fn error(&self, msg: &str) -> ParseError {
        let t = &self.toks[self.i];
        let found = match &t.kind {
            TokKind::Name(n) | TokKind::Var(n) => format!("`{n}`"),
            TokKind::Punct(p) => format!("`{p}`"),
            TokKind::End => "end of input".into(),
        };
        ParseError {
            line: t.line,
            col: t.col,
            msg: format!("{msg} (found {found})"),
        }
    }

    fn bump(&mut self) -> TokKind {
        let k = self.toks[self.i].kind.clone();
        if k != TokKind::End {
            self.i += 1;
        }
        k
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), TokKind::Punct(q) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{p}`")))
        }
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            TokKind::Name(k) if k == "kind" && !matches!(self.peek2(), TokKind::Punct(_)) => {
                self.bump();
                let names = self.decl_names()?;
                let mut arity = 0;
                self.expect_word("type")?;
                while self.eat("->") {
                    self.expect_word("type")?;
                    arity += 1;
                }
                self.expect(".")?;
                Ok(Item::Kind { names, arity, pos })
            }
            TokKind::Name(k) if k == "type" && !matches!(self.peek2(), TokKind::Punct(p) if *p != "::") => {
                self.bump();
                let names = self.decl_names()?;
                let ty = self.ty()?;
                self.expect(".")?;
                Ok(Item::Type { names, ty, pos })
            }
            TokKind::Punct("?-") => {
                self.bump();
                let goal = self.term()?;
                self.expect(".")?;
                Ok(Item::Query { goal, pos })
            }
            _ => {
                let head = self.term()?;
                let body = if self.eat(":-") { Some(self.term()?) } else { None };
                self.expect(".")?;
                Ok(Item::Clause { head, body, pos })
            }
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        match self.peek() {
            TokKind::Name(n) if n == w => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(&format!("expected `{w}`"))),
        }
    }

    fn decl_names(&mut self) -> Result<Vec<String>, ParseError> {
        let mut names = Vec::new();
        loop {
            match self.bump() {
                TokKind::Name(n) => names.push(n),
                TokKind::Punct("::") => names.push("::".into()),
                _ => {
                    self.i -= 1;
                    return Err(self.error("expected a name to declare"));
                }
            }
            if !self.eat(",") {
                return Ok(names);
            }
        }
    }

    fn ty(&mut self) -> Result<Ty, ParseError> {
        let a = self.ty_app()?;
        if self.eat("->") {
            Ok(Ty::arrow(a, self.ty()?))
        } else {
            Ok(a)
        }
    }

    fn ty_app(&mut self) -> Result<Ty, ParseError> {
        if self.eat("(") {
            let t = self.ty()?;
            self.expect(")")?;
            return Ok(t);
        }
        let TokKind::Name(head) = self.bump() else {
            self.i -= 1;
            return Err(self.error("expected a type"));
        };
        let mut args = Vec::new();
        loop {
            match self.peek().clone() {
                TokKind::Name(n) => {
                    self.bump();
                    args.push(Ty::sort(&n));
                }
                TokKind::Punct("(") => {
                    self.bump();
                    args.push(self.ty()?);
                    self.expect(")")?;
                }
                _ => break,
            }
        }
        Ok(if args.is_empty() {
            Ty::sort(&head)
        } else {
            Ty::con(&head, args)
        })
    }

    fn term(&mut self) -> Result<Surface, ParseError> {
        self.infix(0)
    }

    /// Operators from loosest to tightest; all are right associative.
    fn infix(&mut self, level: usize) -> Result<Surface, ParseError> {
        const OPS: [&str; 4] = [";", ",", "=>", "::"];
        if level == OPS.len() {
            return self.app();
        }
        let l = self.infix(level + 1)?;
        let pos = self.pos();
        if self.eat(OPS[level]) {
            let r = self.infix(level)?;
            Ok(Surface::Infix(OPS[level], Box::new(l), Box::new(r), pos))
        } else {
            Ok(l)
        }
    }

    fn starts_prim(&self) -> bool {
        matches!(self.peek(), TokKind::Name(_) | TokKind::Var(_) | TokKind::Punct("(") | TokKind::Punct("["))
    }

    fn app(&mut self) -> Result<Surface, ParseError> {
        if !self.starts_prim() {
            return Err(self.error("expected a term"));
        }
        let (head, mut open) = self.prim()?;
        let mut args = Vec::new();
        while open && self.starts_prim() {
            let (a, o) = self.prim()?;
            args.push(a);
            open = o;
        }
        Ok(if args.is_empty() {
            head
        } else {
            Surface::App(Box::new(head), args)
        })
    }

    /// A primary term, and whether an application may continue after it
    /// (an abstraction extends as far right as possible).
    fn prim(&mut self) -> Result<(Surface, bool), ParseError> {
        let pos = self.pos();
        match self.bump() {
            TokKind::Name(n) | TokKind::Var(n) if self.is("\\") => {
                self.bump();
                let body = self.term()?;
                Ok((Surface::Lam(n, Box::new(body), pos), false))
            }
            TokKind::Name(n) => Ok((Surface::Name(n, pos), true)),
            TokKind::Var(n) => Ok((Surface::Var(n, pos), true)),
            TokKind::Punct("(") => {
                let t = self.term()?;
                self.expect(")")?;
                Ok((t, true))
            }
            TokKind::Punct("[") => Ok((self.list(pos)?, true)),
            _ => {
                self.i -= 1;
                Err(self.error("expected a term"))
            }
        }
    }

    /// `[a, b | t]` is sugar for `a :: b :: t`, `[]` for `nil`.
    fn list(&mut self, pos: Pos) -> Result<Surface, ParseError> {
        let mut elems = Vec::new();
        let mut tail = Surface::Name("nil".into(), pos);
        if !self.eat("]") {
            loop {
                elems.push(self.infix(2)?);
                if self.eat(",") {
                    continue;
                }
                if self.eat("|") {
                    tail = self.term()?;
                }
                self.expect("]")?;
                break;
            }
        }
        Ok(elems.into_iter().rev().fold(tail, |t, e| {
            let p = e.pos();
            Surface::Infix("::", Box::new(e), Box::new(t), p)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn show(s: &str) -> String {
        parse_query(s).unwrap().to_string()
    }

    #[test]
    fn empty_program() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("% nothing\n").unwrap().is_empty());
    }

    #[test]
    fn mapfun_clause() {
        let items = parse_program("mapfun (X::L1) F ((F X)::L2) :- mapfun L1 F L2.").unwrap();
        let [Item::Clause { head, body: Some(b), .. }] = &items[..] else {
            panic!("expected one clause, got {items:?}")
        };
        assert_eq!(head.to_string(), "mapfun ((X) :: (L1)) F ((F X) :: (L2))");
        assert_eq!(b.to_string(), "mapfun L1 F L2");
    }

    #[test]
    fn abstraction_scope_is_maximal() {
        assert_eq!(
            show("x\\ y\\ sigma z\\ (parent x z), (parent z y)"),
            "x\\ y\\ sigma (z\\ (parent x z) , (parent z y))"
        );
        assert_eq!(show("f x\\ g x, h"), "f (x\\ (g x) , (h))");
    }

    #[test]
    fn operator_precedence() {
        assert_eq!(show("a ; b , c"), "(a) ; ((b) , (c))");
        assert_eq!(show("a :: b :: nil"), "(a) :: ((b) :: (nil))");
        assert_eq!(show("[a, b | T]"), "(a) :: ((b) :: (T))");
        assert_eq!(show("[]"), "nil");
    }

    #[test]
    fn declarations() {
        let items = parse_program("kind list type -> type. type :: i -> list i -> list i. type a, b i.").unwrap();
        assert!(matches!(&items[0], Item::Kind { arity: 1, .. }));
        let Item::Type { names, ty, .. } = &items[1] else { panic!() };
        assert_eq!(names, &vec!["::".to_string()]);
        assert_eq!(ty.to_string(), "i -> list i -> list i");
        let Item::Type { names, .. } = &items[2] else { panic!() };
        assert_eq!(names.len(), 2);
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_program("p a :- .").unwrap_err();
        assert_eq!((e.line, e.col), (1, 8));
        let e = parse_program("p (a.").unwrap_err();
        assert_eq!(e.line, 1);
    }
}
