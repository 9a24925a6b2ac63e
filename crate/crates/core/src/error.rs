use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SigError {
    #[error("unknown sort or type constructor `{0}`")]
    UnknownSort(String),
    #[error("type constructor `{name}` expects {expected} arguments, found {found}")]
    ConstructorArity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is already declared with a different kind")]
    KindClash(String),
    #[error("`{name}` redeclared: was `{old}`, now `{new}`")]
    Redeclared { name: String, old: String, new: String },
    #[error("`{0}` is a logical constant")]
    Reserved(String),
    #[error("`{0}`: o may only occur in argument types of predicates")]
    PropositionalArgument(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UsageError {
    #[error("expected a suspension")]
    NotASuspension,
    #[error("substitution arity or type mismatch")]
    SubstMismatch,
}

/// Runtime failures of the engines (as opposed to logical failure).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("reduction did not terminate within {0} steps")]
    NonTerminating(u64),
    #[error("unsupported goal: {0}")]
    UnsupportedGoal(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("type mismatch in `{term}`: expected `{expected}`, found `{found}`")]
    Mismatch {
        term: String,
        expected: String,
        found: String,
    },
    #[error("cannot determine the type of `{0}`")]
    Unconstrained(String),
    #[error("argument `{0}` is not a positive term")]
    NonPositive(String),
    #[error("clause head `{0}` is not a rigid atom with a predicate constant at its head")]
    FlexibleHead(String),
    #[error("`{0}` is not a goal")]
    NotAGoal(String),
    #[error("unsupported goal `{0}`: implications and universal goals are out of scope")]
    UnsupportedGoal(String),
    #[error(transparent)]
    Signature(#[from] SigError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Io(String),
}
