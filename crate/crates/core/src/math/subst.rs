use std::collections::BTreeMap;

use thiserror::Error;

use super::exp::{Key, MathExp};
use super::sort::Sort;

pub type Bindings = BTreeMap<Key, MathExp>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MathError {
    #[error("substitution for `{key}` has sort {found}, expected {expected}")]
    SortMismatch {
        key: String,
        expected: Sort,
        found: String,
    },
}

fn key_of(e: &MathExp) -> Option<Key> {
    match e {
        MathExp::Var(v) => Some(Key::Var(v.name.clone(), v.prime)),
        MathExp::Old(v) => Some(Key::Old(v.name.clone())),
        MathExp::Bound(v) => Some(Key::Bound(v.name.clone())),
        _ => None,
    }
}

/// Simultaneous substitution. The result is in canonical form.
pub fn substitute(exp: &MathExp, bindings: &Bindings) -> Result<MathExp, MathError> {
    if bindings.is_empty() {
        return Ok(exp.canonical());
    }
    if let Some(key) = key_of(exp) {
        if let Some(rep) = bindings.get(&key) {
            let expected = match exp {
                MathExp::Var(v) | MathExp::Old(v) | MathExp::Bound(v) => &v.sort,
                _ => unreachable!(),
            };
            return match rep.sort() {
                Some(found) if found.compatible(expected) => Ok(rep.canonical()),
                found => Err(MathError::SortMismatch {
                    key: format!("{key:?}"),
                    expected: expected.clone(),
                    found: found.map_or("<ill-sorted>".to_string(), |s| s.to_string()),
                }),
            };
        }
        return Ok(exp.clone());
    }
    let mut err = None;
    let out = exp.map_children(&mut |c| match substitute(c, bindings) {
        Ok(e) => e,
        Err(e) => {
            err.get_or_insert(e);
            c.clone()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
