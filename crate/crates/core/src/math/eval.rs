//! Exhaustive evaluation of expressions in a small finite model: strings over
//! a tiny alphabet with bounded length and integers from a bounded window.
//!
//! This is deliberately independent of the prover; it serves as the ground
//! truth for theorem validity and for soundness fuzzing.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::exp::{Key, MathExp};
use super::sort::Sort;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    pub alphabet: u8,
    pub max_len: u8,
    pub int_lo: i64,
    pub int_hi: i64,
    pub min_int: i64,
    pub max_int: i64,
}

impl Default for FiniteModel {
    fn default() -> Self {
        FiniteModel {
            alphabet: 3,
            max_len: 4,
            int_lo: -8,
            int_hi: 8,
            min_int: -8,
            max_int: 7,
        }
    }
}

/// A string of at most 32 symbols, two bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    len: u8,
    bits: u64,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, bits: 0 };

    pub fn from_symbols(syms: &[u8]) -> Word {
        let mut w = Word::EMPTY;
        for &s in syms {
            w = w.concat(Word::singleton(s)).expect("word too long");
        }
        w
    }

    pub fn singleton(sym: u8) -> Word {
        Word {
            len: 1,
            bits: u64::from(sym & 3),
        }
    }

    pub fn len(self) -> u8 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn symbol(self, i: u8) -> u8 {
        ((self.bits >> (2 * i)) & 3) as u8
    }

    pub fn concat(self, other: Word) -> Option<Word> {
        let len = self.len + other.len;
        if len > 32 {
            return None;
        }
        let shifted = if self.len == 32 { 0 } else { other.bits << (2 * self.len) };
        Some(Word {
            len,
            bits: self.bits | shifted,
        })
    }

    pub fn reverse(self) -> Word {
        let mut bits = 0u64;
        for i in 0..self.len {
            bits |= u64::from(self.symbol(i)) << (2 * (self.len - 1 - i));
        }
        Word {
            len: self.len,
            bits,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Entry(u8),
    Str(Word),
}

#[derive(Debug)]
enum Node {
    Const(Value),
    Slot(usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Eq(Box<Node>, Box<Node>),
    Ne(Box<Node>, Box<Node>),
    Le(Box<Node>, Box<Node>),
    Lt(Box<Node>, Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Concat(Vec<Node>),
    Reverse(Box<Node>),
    Len(Box<Node>),
    Singleton(Box<Node>),
}

impl Node {
    fn eval(&self, env: &[Value]) -> Option<Value> {
        use Node::*;
        let int = |n: &Node| match n.eval(env)? {
            Value::Int(i) => Some(i),
            _ => None,
        };
        let boolean = |n: &Node| match n.eval(env)? {
            Value::Bool(b) => Some(b),
            _ => None,
        };
        let word = |n: &Node| match n.eval(env)? {
            Value::Str(w) => Some(w),
            _ => None,
        };
        Some(match self {
            Const(v) => *v,
            Slot(i) => env[*i],
            Not(a) => Value::Bool(!boolean(a)?),
            And(a, b) => Value::Bool(boolean(a)? && boolean(b)?),
            Implies(a, b) => Value::Bool(!boolean(a)? || boolean(b)?),
            Eq(a, b) => Value::Bool(a.eval(env)? == b.eval(env)?),
            Ne(a, b) => Value::Bool(a.eval(env)? != b.eval(env)?),
            Le(a, b) => Value::Bool(int(a)? <= int(b)?),
            Lt(a, b) => Value::Bool(int(a)? < int(b)?),
            Add(a, b) => Value::Int(int(a)?.checked_add(int(b)?)?),
            Sub(a, b) => Value::Int(int(a)?.checked_sub(int(b)?)?),
            Concat(parts) => {
                let mut w = Word::EMPTY;
                for p in parts {
                    w = w.concat(word(p)?)?;
                }
                Value::Str(w)
            }
            Reverse(a) => Value::Str(word(a)?.reverse()),
            Len(a) => Value::Int(i64::from(word(a)?.len())),
            Singleton(a) => match a.eval(env)? {
                Value::Entry(e) => Value::Str(Word::singleton(e)),
                _ => return None,
            },
        })
    }

    fn truth(&self, env: &[Value]) -> Option<bool> {
        match self.eval(env)? {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }
}

fn key_and_sort(e: &MathExp) -> Option<(Key, Sort)> {
    match e {
        MathExp::Var(v) => Some((Key::Var(v.name.clone(), v.prime), v.sort.clone())),
        MathExp::Old(v) => Some((Key::Old(v.name.clone()), v.sort.clone())),
        MathExp::Bound(v) => Some((Key::Bound(v.name.clone()), v.sort.clone())),
        _ => None,
    }
}

struct Compiler<'a> {
    model: &'a FiniteModel,
    slots: BTreeMap<Key, (usize, Sort)>,
}

impl Compiler<'_> {
    fn slot(&mut self, key: Key, sort: Sort) -> usize {
        let next = self.slots.len();
        self.slots.entry(key).or_insert((next, sort)).0
    }

    fn compile(&mut self, e: &MathExp) -> Option<Node> {
        use MathExp as M;
        let mut bx = |c: &MathExp| self.compile(c).map(Box::new);
        Some(match e {
            M::Bool(b) => Node::Const(Value::Bool(*b)),
            M::Int(n) => Node::Const(Value::Int(n.to_i64()?)),
            M::MinInt => Node::Const(Value::Int(self.model.min_int)),
            M::MaxInt => Node::Const(Value::Int(self.model.max_int)),
            M::Empty => Node::Const(Value::Str(Word::EMPTY)),
            M::Var(_) | M::Old(_) | M::Bound(_) => {
                let (k, s) = key_and_sort(e)?;
                Node::Slot(self.slot(k, s))
            }
            M::Not(a) => Node::Not(bx(a)?),
            M::And(a, b) => Node::And(bx(a)?, bx(b)?),
            M::Implies(a, b) => Node::Implies(bx(a)?, bx(b)?),
            M::Eq(a, b) => Node::Eq(bx(a)?, bx(b)?),
            M::Ne(a, b) => Node::Ne(bx(a)?, bx(b)?),
            M::Le(a, b) => Node::Le(bx(a)?, bx(b)?),
            M::Lt(a, b) => Node::Lt(bx(a)?, bx(b)?),
            M::Add(a, b) => Node::Add(bx(a)?, bx(b)?),
            M::Sub(a, b) => Node::Sub(bx(a)?, bx(b)?),
            M::Concat(parts) => {
                Node::Concat(parts.iter().map(|p| self.compile(p)).collect::<Option<_>>()?)
            }
            M::Reverse(a) => Node::Reverse(bx(a)?),
            M::Len(a) => Node::Len(bx(a)?),
            M::Singleton(a) => Node::Singleton(bx(a)?),
        })
    }
}

impl FiniteModel {
    /// Every value of `sort` in the model.
    pub fn domain(&self, sort: &Sort) -> Vec<Value> {
        match sort {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::Int => (self.int_lo..=self.int_hi).map(Value::Int).collect(),
            Sort::Entry(_) => (0..self.alphabet).map(Value::Entry).collect(),
            Sort::Str(_) => {
                let mut out = vec![Word::EMPTY];
                let mut frontier = vec![Word::EMPTY];
                for _ in 0..self.max_len {
                    let mut next = Vec::new();
                    for w in &frontier {
                        for s in 0..self.alphabet {
                            next.push(w.concat(Word::singleton(s)).expect("bounded"));
                        }
                    }
                    out.extend(next.iter().copied());
                    frontier = next;
                }
                out.into_iter().map(Value::Str).collect()
            }
        }
    }

    /// Searches for an assignment that satisfies every hypothesis but
    /// falsifies `goal`. Hypotheses are checked as soon as all their
    /// variables are assigned, which prunes the search.
    ///
    /// Returns `None` when the implication holds throughout the model.
    /// Expressions the model cannot evaluate (e.g. non-literal integers
    /// out of `i64`) make the search return `None` as well.
    pub fn countermodel(&self, hyps: &[MathExp], goal: &MathExp) -> Option<Vec<(Key, Value)>> {
        let mut c = Compiler {
            model: self,
            slots: BTreeMap::new(),
        };
        let hyp_nodes: Vec<Node> = hyps.iter().map(|h| c.compile(h)).collect::<Option<_>>()?;
        let goal_node = c.compile(goal)?;

        // Slot order: variables of the smallest hypotheses first.
        let slot_sets: Vec<Vec<usize>> = hyps
            .iter()
            .map(|h| {
                let mut v = Vec::new();
                h.collect(&mut |e| {
                    if let Some((k, _)) = key_and_sort(e) {
                        let s = c.slots[&k].0;
                        if !v.contains(&s) {
                            v.push(s);
                        }
                    }
                });
                v
            })
            .collect();
        let mut by_size: Vec<usize> = (0..hyps.len()).collect();
        by_size.sort_by_key(|&i| slot_sets[i].len());
        let mut order: Vec<usize> = Vec::new();
        for &i in &by_size {
            for &s in &slot_sets[i] {
                if !order.contains(&s) {
                    order.push(s);
                }
            }
        }
        let mut sorts: Vec<(Key, Sort)> = vec![(Key::Bound(String::new()), Sort::Bool); c.slots.len()];
        for (k, (i, s)) in &c.slots {
            sorts[*i] = (k.clone(), s.clone());
        }
        for s in 0..sorts.len() {
            if !order.contains(&s) {
                order.push(s);
            }
        }
        // Hypotheses become checkable at the depth of their last variable.
        let mut checks: Vec<Vec<usize>> = vec![Vec::new(); order.len() + 1];
        for (i, set) in slot_sets.iter().enumerate() {
            let depth = set
                .iter()
                .map(|s| order.iter().position(|o| o == s).unwrap() + 1)
                .max()
                .unwrap_or(0);
            checks[depth].push(i);
        }
        let domains: Vec<Vec<Value>> = order.iter().map(|&s| self.domain(&sorts[s].1)).collect();

        let mut env = vec![Value::Bool(false); sorts.len()];
        let search = Search {
            order: &order,
            domains: &domains,
            checks: &checks,
            hyps: &hyp_nodes,
            goal: &goal_node,
        };
        if search.run(0, &mut env) {
            Some(
                sorts
                    .into_iter()
                    .enumerate()
                    .map(|(i, (k, _))| (k, env[i]))
                    .collect(),
            )
        } else {
            None
        }
    }
}

struct Search<'a> {
    order: &'a [usize],
    domains: &'a [Vec<Value>],
    checks: &'a [Vec<usize>],
    hyps: &'a [Node],
    goal: &'a Node,
}

impl Search<'_> {
    fn admissible(&self, depth: usize, env: &[Value]) -> bool {
        self.checks[depth]
            .iter()
            .all(|&h| self.hyps[h].truth(env) == Some(true))
    }

    /// True when a countermodel was found; `env` then holds it.
    fn run(&self, depth: usize, env: &mut [Value]) -> bool {
        if depth == 0 && !self.admissible(0, env) {
            return false;
        }
        if depth == self.order.len() {
            return self.goal.truth(env) == Some(false);
        }
        let slot = self.order[depth];
        for v in &self.domains[depth] {
            env[slot] = *v;
            if self.admissible(depth + 1, env) && self.run(depth + 1, env) {
                return true;
            }
        }
        false
    }
}
