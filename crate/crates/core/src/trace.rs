use std::cell::RefCell;
use std::fmt::Display;
use std::io::Write;
use std::rc::Rc;

/// Line-oriented trace output for the reducer, the unifier and the VM.
#[derive(Clone, Default)]
pub struct Tracer {
    pub reduce: bool,
    pub unify: bool,
    pub vm: bool,
    sink: Option<Rc<RefCell<dyn Write>>>,
}

impl Tracer {
    pub fn new(sink: Rc<RefCell<dyn Write>>) -> Tracer {
        Tracer {
            sink: Some(sink),
            ..Tracer::default()
        }
    }

    pub fn emit(&self, line: impl Display) {
        if let Some(s) = &self.sink {
            let _ = writeln!(s.borrow_mut(), "{line}");
        }
    }
}
