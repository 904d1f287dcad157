use std::fmt;

/// Entry-type name that is compatible with every entry type. Used by
/// theorem universals and by `empty_string` before its element type is known.
pub const ANY_ENTRY: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    /// Mathematical string over the named entry type.
    Str(String),
    /// A value of the named (generic) entry type.
    Entry(String),
}

impl Sort {
    pub fn any_str() -> Sort {
        Sort::Str(ANY_ENTRY.to_string())
    }

    pub fn any_entry() -> Sort {
        Sort::Entry(ANY_ENTRY.to_string())
    }

    /// Sort equality where the `_` entry type acts as a wildcard.
    pub fn compatible(&self, other: &Sort) -> bool {
        fn same(a: &str, b: &str) -> bool {
            a == ANY_ENTRY || b == ANY_ENTRY || a == b
        }
        match (self, other) {
            (Sort::Bool, Sort::Bool) | (Sort::Int, Sort::Int) => true,
            (Sort::Str(a), Sort::Str(b)) | (Sort::Entry(a), Sort::Entry(b)) => same(a, b),
            _ => false,
        }
    }

    pub fn is_str(&self) -> bool {
        matches!(self, Sort::Str(_))
    }

    /// Element sort of a string sort.
    pub fn element(&self) -> Option<Sort> {
        match self {
            Sort::Str(t) => Some(Sort::Entry(t.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "B"),
            Sort::Int => write!(f, "Z"),
            Sort::Str(t) if t == ANY_ENTRY => write!(f, "Str"),
            Sort::Str(t) => write!(f, "Str({t})"),
            Sort::Entry(t) if t == ANY_ENTRY => write!(f, "Entry"),
            Sort::Entry(t) => write!(f, "{t}"),
        }
    }
}
