use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::sort::Sort;

/// A program variable at a particular prime level. Level 0 is the value the
/// variable had on entry to the procedure (or at its declaration).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub prime: u32,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Var {
        Var {
            name: name.into(),
            prime: 0,
            sort,
        }
    }

    pub fn primed(name: impl Into<String>, prime: u32, sort: Sort) -> Var {
        Var {
            name: name.into(),
            prime,
            sort,
        }
    }

    /// Display name: the base name followed by one `'` per level.
    pub fn display_name(&self) -> String {
        let mut s = self.name.clone();
        for _ in 0..self.prime {
            s.push('\'');
        }
        s
    }
}

/// Mathematical expression tree shared by contracts, VCs, theorems and the
/// prover.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MathExp {
    Bool(bool),
    Int(BigInt),
    MinInt,
    MaxInt,
    Empty,
    Var(Var),
    /// `#x`: incoming value of formal `x`.
    Old(Var),
    /// Universally quantified variable of a theorem.
    Bound(Var),
    Not(Box<MathExp>),
    And(Box<MathExp>, Box<MathExp>),
    Implies(Box<MathExp>, Box<MathExp>),
    Eq(Box<MathExp>, Box<MathExp>),
    Ne(Box<MathExp>, Box<MathExp>),
    Le(Box<MathExp>, Box<MathExp>),
    Lt(Box<MathExp>, Box<MathExp>),
    Add(Box<MathExp>, Box<MathExp>),
    Sub(Box<MathExp>, Box<MathExp>),
    /// n-ary concatenation; in canonical form it has at least two operands,
    /// none of which is `Empty` or another `Concat`.
    Concat(Vec<MathExp>),
    Reverse(Box<MathExp>),
    Len(Box<MathExp>),
    Singleton(Box<MathExp>),
}

/// Identifies what a substitution replaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    Var(String, u32),
    Old(String),
    Bound(String),
}

impl MathExp {
    pub fn var(v: Var) -> MathExp {
        MathExp::Var(v)
    }

    pub fn int(n: i64) -> MathExp {
        MathExp::Int(BigInt::from(n))
    }

    pub fn tt() -> MathExp {
        MathExp::Bool(true)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: MathExp) -> MathExp {
        MathExp::Not(Box::new(e))
    }

    pub fn and(a: MathExp, b: MathExp) -> MathExp {
        MathExp::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: MathExp, b: MathExp) -> MathExp {
        MathExp::Implies(Box::new(a), Box::new(b))
    }

    pub fn eq(a: MathExp, b: MathExp) -> MathExp {
        MathExp::Eq(Box::new(a), Box::new(b))
    }

    pub fn ne(a: MathExp, b: MathExp) -> MathExp {
        MathExp::Ne(Box::new(a), Box::new(b))
    }

    pub fn le(a: MathExp, b: MathExp) -> MathExp {
        MathExp::Le(Box::new(a), Box::new(b))
    }

    pub fn lt(a: MathExp, b: MathExp) -> MathExp {
        MathExp::Lt(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: MathExp, b: MathExp) -> MathExp {
        MathExp::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: MathExp, b: MathExp) -> MathExp {
        MathExp::Sub(Box::new(a), Box::new(b))
    }

    pub fn reverse(a: MathExp) -> MathExp {
        MathExp::Reverse(Box::new(a))
    }

    pub fn len(a: MathExp) -> MathExp {
        MathExp::Len(Box::new(a))
    }

    pub fn singleton(a: MathExp) -> MathExp {
        MathExp::Singleton(Box::new(a))
    }

    /// Canonical concatenation of `parts`: nested concatenations are
    /// flattened and `empty_string` operands dropped.
    pub fn concat(parts: Vec<MathExp>) -> MathExp {
        fn push_flat(p: MathExp, flat: &mut Vec<MathExp>) {
            match p {
                MathExp::Concat(inner) => inner.into_iter().for_each(|q| push_flat(q, flat)),
                MathExp::Empty => {}
                other => flat.push(other),
            }
        }
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            push_flat(p, &mut flat);
        }
        match flat.len() {
            0 => MathExp::Empty,
            1 => flat.pop().unwrap(),
            _ => MathExp::Concat(flat),
        }
    }

    /// Conjunction of a list; `true` for the empty list.
    pub fn conjoin(items: Vec<MathExp>) -> MathExp {
        let mut it = items.into_iter();
        match it.next() {
            None => MathExp::tt(),
            Some(first) => it.fold(first, MathExp::and),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, MathExp::Bool(true))
    }

    /// Sort of the expression, or `None` when it is ill-sorted.
    pub fn sort(&self) -> Option<Sort> {
        use MathExp::*;
        match self {
            Bool(_) => Some(Sort::Bool),
            Int(_) | MinInt | MaxInt => Some(Sort::Int),
            Empty => Some(Sort::any_str()),
            Var(v) | Old(v) | Bound(v) => Some(v.sort.clone()),
            Not(a) => (a.sort()? == Sort::Bool).then_some(Sort::Bool),
            And(a, b) | Implies(a, b) => {
                (a.sort()? == Sort::Bool && b.sort()? == Sort::Bool).then_some(Sort::Bool)
            }
            Eq(a, b) | Ne(a, b) => a.sort()?.compatible(&b.sort()?).then_some(Sort::Bool),
            Le(a, b) | Lt(a, b) => {
                (a.sort()? == Sort::Int && b.sort()? == Sort::Int).then_some(Sort::Bool)
            }
            Add(a, b) | Sub(a, b) => {
                (a.sort()? == Sort::Int && b.sort()? == Sort::Int).then_some(Sort::Int)
            }
            Concat(parts) => {
                let mut acc = Sort::any_str();
                for p in parts {
                    let s = p.sort()?;
                    if !s.is_str() || !s.compatible(&acc) {
                        return None;
                    }
                    if acc == Sort::any_str() {
                        acc = s;
                    }
                }
                Some(acc)
            }
            Reverse(a) => a.sort().filter(Sort::is_str),
            Len(a) => a.sort().filter(Sort::is_str).map(|_| Sort::Int),
            Singleton(a) => match a.sort()? {
                Sort::Entry(t) => Some(Sort::Str(t)),
                _ => None,
            },
        }
    }

    pub fn children(&self) -> Vec<&MathExp> {
        use MathExp::*;
        match self {
            Bool(_) | Int(_) | MinInt | MaxInt | Empty | Var(_) | Old(_) | Bound(_) => vec![],
            Not(a) | Reverse(a) | Len(a) | Singleton(a) => vec![a],
            And(a, b) | Implies(a, b) | Eq(a, b) | Ne(a, b) | Le(a, b) | Lt(a, b) | Add(a, b)
            | Sub(a, b) => vec![a, b],
            Concat(parts) => parts.iter().collect(),
        }
    }

    /// Rebuilds the node with `f` applied to every child, restoring
    /// canonical concatenation form.
    pub fn map_children(&self, f: &mut impl FnMut(&MathExp) -> MathExp) -> MathExp {
        use MathExp::*;
        let b = |e: &MathExp, f: &mut dyn FnMut(&MathExp) -> MathExp| Box::new(f(e));
        match self {
            Bool(_) | Int(_) | MinInt | MaxInt | Empty | Var(_) | Old(_) | Bound(_) => self.clone(),
            Not(a) => Not(b(a, f)),
            Reverse(a) => Reverse(b(a, f)),
            Len(a) => Len(b(a, f)),
            Singleton(a) => Singleton(b(a, f)),
            And(x, y) => And(b(x, f), b(y, f)),
            Implies(x, y) => Implies(b(x, f), b(y, f)),
            Eq(x, y) => Eq(b(x, f), b(y, f)),
            Ne(x, y) => Ne(b(x, f), b(y, f)),
            Le(x, y) => Le(b(x, f), b(y, f)),
            Lt(x, y) => Lt(b(x, f), b(y, f)),
            Add(x, y) => Add(b(x, f), b(y, f)),
            Sub(x, y) => Sub(b(x, f), b(y, f)),
            Concat(parts) => MathExp::concat(parts.iter().map(&mut *f).collect()),
        }
    }

    /// Canonical form: every concatenation flattened, empties dropped.
    pub fn canonical(&self) -> MathExp {
        self.map_children(&mut |c| c.canonical())
    }

    pub fn is_canonical(&self) -> bool {
        if let MathExp::Concat(parts) = self {
            if parts.len() < 2
                || parts
                    .iter()
                    .any(|p| matches!(p, MathExp::Empty | MathExp::Concat(_)))
            {
                return false;
            }
        }
        self.children().into_iter().all(MathExp::is_canonical)
    }

    /// Splits top-level `and` chains left to right.
    pub fn split_conjuncts(&self) -> Vec<MathExp> {
        let mut out = Vec::new();
        fn walk(e: &MathExp, out: &mut Vec<MathExp>) {
            match e {
                MathExp::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other.clone()),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn any(&self, pred: &impl Fn(&MathExp) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn contains_old(&self) -> bool {
        self.any(&|e| matches!(e, MathExp::Old(_)))
    }

    pub fn contains_bound(&self) -> bool {
        self.any(&|e| matches!(e, MathExp::Bound(_)))
    }

    /// Program variables (at their levels) occurring in the expression.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect(&mut |e| {
            if let MathExp::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn collect(&self, f: &mut impl FnMut(&MathExp)) {
        f(self);
        for c in self.children() {
            c.collect(f);
        }
    }
}
