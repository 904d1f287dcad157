//! Hash-consed congruence closure.
//!
//! Every node keeps the argument ids it was created with; classes are
//! tracked by a union-find over node ids. After a union the parents of the
//! absorbed class are re-signed, and a signature collision queues the
//! congruent pair for merging.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::math::Sort;

pub type Id = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Bool,
    Int,
    Str,
    Entry,
}

impl Kind {
    pub fn of(sort: &Sort) -> Kind {
        match sort {
            Sort::Bool => Kind::Bool,
            Sort::Int => Kind::Int,
            Sort::Str(_) => Kind::Str,
            Sort::Entry(_) => Kind::Entry,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Var(String, u32, Kind),
    Int(BigInt),
    Bool(bool),
    MinInt,
    MaxInt,
    Empty,
    Not,
    And,
    Implies,
    Eq,
    Ne,
    Le,
    Lt,
    Add,
    Sub,
    Concat,
    Reverse,
    Len,
    Singleton,
}

impl Op {
    fn kind(&self) -> Kind {
        match self {
            Op::Var(_, _, k) => *k,
            Op::Int(_) | Op::MinInt | Op::MaxInt | Op::Add | Op::Sub | Op::Len => Kind::Int,
            Op::Bool(_) | Op::Not | Op::And | Op::Implies | Op::Eq | Op::Ne | Op::Le | Op::Lt => {
                Kind::Bool
            }
            Op::Empty | Op::Concat | Op::Reverse | Op::Singleton => Kind::Str,
        }
    }

    /// Interpreted constants: two different ones in a class is a conflict.
    fn is_literal(&self) -> bool {
        matches!(self, Op::Int(_) | Op::Bool(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub op: Op,
    pub args: Vec<Id>,
}

#[derive(Clone, Debug, Default)]
pub struct EGraph {
    nodes: Vec<Node>,
    parent: Vec<Id>,
    /// Per root: the nodes of the class, in creation order.
    members: Vec<Vec<Id>>,
    /// Per root: nodes with an argument in the class.
    uses: Vec<Vec<Id>>,
    /// Per root: a literal member, if any.
    literal: Vec<Option<Id>>,
    sigs: HashMap<(Op, Vec<Id>), Id>,
    pending: Vec<(Id, Id)>,
    unions: usize,
    /// Nodes that carry linear meaning (`+`, `-`, integer literals).
    arith: usize,
    conflict: bool,
}

impl EGraph {
    pub fn new() -> EGraph {
        EGraph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: Id) -> &Node {
        &self.nodes[id]
    }

    pub fn kind(&self, id: Id) -> Kind {
        self.nodes[id].op.kind()
    }

    /// Changes whenever a node is added or two classes merge.
    pub fn version(&self) -> (usize, usize) {
        (self.nodes.len(), self.unions)
    }

    /// Changes whenever a linear node is added or two classes merge.
    pub fn arith_version(&self) -> (usize, usize) {
        (self.arith, self.unions)
    }

    /// Two distinct literals ended up in one class.
    pub fn conflict(&self) -> bool {
        self.conflict
    }

    pub fn find(&self, mut id: Id) -> Id {
        while self.parent[id] != id {
            id = self.parent[id];
        }
        id
    }

    pub fn same(&self, a: Id, b: Id) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn members(&self, id: Id) -> &[Id] {
        &self.members[self.find(id)]
    }

    /// The literal member of `id`'s class.
    pub fn literal(&self, id: Id) -> Option<&Op> {
        self.literal[self.find(id)].map(|n| &self.nodes[n].op)
    }

    pub fn has_op(&self, id: Id, op: &Op) -> bool {
        self.members(id).iter().any(|&n| self.nodes[n].op == *op)
    }

    /// Current class roots, ascending.
    pub fn roots(&self) -> Vec<Id> {
        (0..self.nodes.len()).filter(|&i| self.parent[i] == i).collect()
    }

    fn signature(&self, op: &Op, args: &[Id]) -> (Op, Vec<Id>) {
        (op.clone(), args.iter().map(|&a| self.find(a)).collect())
    }

    /// Existing node congruent to `op(args)`, without creating one.
    pub fn lookup(&self, op: &Op, args: &[Id]) -> Option<Id> {
        self.sigs.get(&self.signature(op, args)).copied()
    }

    pub fn add(&mut self, op: Op, args: Vec<Id>) -> Id {
        let sig = self.signature(&op, &args);
        if let Some(&id) = self.sigs.get(&sig) {
            return id;
        }
        let id = self.nodes.len();
        let literal = op.is_literal().then_some(id);
        if matches!(op, Op::Add | Op::Sub | Op::Int(_)) {
            self.arith += 1;
        }
        for a in &sig.1 {
            self.uses[*a].push(id);
        }
        self.nodes.push(Node { op, args });
        self.parent.push(id);
        self.members.push(vec![id]);
        self.uses.push(Vec::new());
        self.literal.push(literal);
        self.sigs.insert(sig, id);
        id
    }

    /// Queues a merge; call [`EGraph::rebuild`] to restore congruence.
    pub fn merge(&mut self, a: Id, b: Id) {
        if !self.same(a, b) {
            self.pending.push((a, b));
        }
    }

    pub fn rebuild(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (mut ra, mut rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            if self.members[ra].len() < self.members[rb].len() {
                std::mem::swap(&mut ra, &mut rb);
            }
            self.parent[rb] = ra;
            self.unions += 1;
            let moved = std::mem::take(&mut self.members[rb]);
            self.members[ra].extend(moved);
            match (self.literal[ra], self.literal[rb]) {
                (Some(x), Some(y)) if self.nodes[x].op != self.nodes[y].op => self.conflict = true,
                (None, Some(y)) => self.literal[ra] = Some(y),
                _ => {}
            }
            let moved_uses = std::mem::take(&mut self.uses[rb]);
            for &n in &moved_uses {
                let sig = self.signature(&self.nodes[n].op, &self.nodes[n].args);
                match self.sigs.get(&sig) {
                    Some(&m) if !self.same(m, n) => self.pending.push((m, n)),
                    Some(_) => {}
                    None => {
                        self.sigs.insert(sig, n);
                    }
                }
            }
            self.uses[ra].extend(moved_uses);
        }
    }
}
