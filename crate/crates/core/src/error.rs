use thiserror::Error;

/// First violated category law found by [`crate::fincat::check_fincat`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawViolation {
    #[error("duplicate object label `{0}`")]
    DuplicateObject(String),
    #[error("duplicate arrow label `{0}`")]
    DuplicateArrow(String),
    #[error("arrow `{arrow}` refers to unknown object `{object}`")]
    DanglingEndpoint { arrow: String, object: String },
    #[error("unknown arrow `{0}` in composition table")]
    UnknownArrow(String),
    #[error("identity of `{object}` is `{arrow}`, which is not an endomorphism of it")]
    BadIdentity { object: String, arrow: String },
    #[error("missing composite {g} . {f}")]
    MissingComposite { g: String, f: String },
    #[error("composite {g} . {f} given twice")]
    DuplicateComposite { g: String, f: String },
    #[error("composite {g} . {f} given but {g} and {f} are not composable")]
    NotComposable { g: String, f: String },
    #[error("composite {g} . {f} = {h} has the wrong endpoints")]
    WrongEndpoints { g: String, f: String, h: String },
    #[error("identity law fails at `{0}`")]
    Identity(String),
    #[error("associativity fails at ({h} . {g}) . {f}")]
    Associativity { h: String, g: String, f: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatError {
    #[error("category law violated: {0}")]
    Law(#[from] LawViolation),
    #[error("size bound exceeded while building {what}: more than {limit}")]
    Size { what: String, limit: usize },
    #[error("functor law violated: {0}")]
    Functor(String),
    #[error("naturality fails: {0}")]
    Naturality(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not a groupoid: arrow `{0}` is not invertible")]
    NotGroupoid(String),
    #[error("subcategory predicate not closed: {0}")]
    NotClosed(String),
}

pub type Result<T, E = CatError> = std::result::Result<T, E>;
