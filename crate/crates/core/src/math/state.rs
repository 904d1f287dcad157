use std::collections::BTreeMap;

use super::exp::{Key, MathExp, Var};
use super::sort::Sort;
use super::subst::Bindings;

/// Current prime level of every program variable along one execution path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValueState {
    vars: BTreeMap<String, (Sort, u32)>,
    formals: Vec<String>,
}

impl ValueState {
    pub fn new() -> ValueState {
        ValueState::default()
    }

    /// Registers a formal parameter at level 0; that level is the
    /// denotation of `#name`.
    pub fn declare_formal(&mut self, name: &str, sort: Sort) {
        self.vars.insert(name.to_string(), (sort, 0));
        self.formals.push(name.to_string());
    }

    /// Registers a variable; a redeclaration (e.g. a local declared inside a
    /// loop body) advances it instead so earlier values stay distinct.
    pub fn declare(&mut self, name: &str, sort: Sort) -> Var {
        if self.vars.contains_key(name) {
            return self.advance(name);
        }
        self.vars.insert(name.to_string(), (sort.clone(), 0));
        Var::new(name, sort)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn level(&self, name: &str) -> Option<u32> {
        self.vars.get(name).map(|(_, l)| *l)
    }

    pub fn current(&self, name: &str) -> Option<Var> {
        self.vars
            .get(name)
            .map(|(s, l)| Var::primed(name, *l, s.clone()))
    }

    pub fn entry(&self, name: &str) -> Option<Var> {
        self.vars.get(name).map(|(s, _)| Var::new(name, s.clone()))
    }

    /// Moves `name` to a fresh level and returns the variable for it.
    ///
    /// Panics if `name` was never declared; the type checker guarantees
    /// every assigned name is.
    pub fn advance(&mut self, name: &str) -> Var {
        let (sort, level) = self
            .vars
            .get_mut(name)
            .unwrap_or_else(|| panic!("advance of undeclared variable {name}"));
        *level += 1;
        Var::primed(name, *level, sort.clone())
    }

    /// Bindings that map every unprimed template variable to its current
    /// value and every `#x` to the entry value of formal `x`.
    pub fn bindings(&self) -> Bindings {
        let mut b = Bindings::new();
        for (name, (sort, level)) in &self.vars {
            b.insert(
                Key::Var(name.clone(), 0),
                MathExp::Var(Var::primed(name, *level, sort.clone())),
            );
        }
        for f in &self.formals {
            let (sort, _) = &self.vars[f];
            b.insert(Key::Old(f.clone()), MathExp::Var(Var::new(f, sort.clone())));
        }
        b
    }
}
