//! Saturation prover for VCs.
//!
//! The givens are asserted into a congruence-closure e-graph extended with
//! associative concatenation and linear integer arithmetic. Each round the
//! library theorems are instantiated wherever a trigger matches (modulo
//! the current equalities) and the instance's hypotheses already hold.
//! The goal's terms are seeded so triggers can fire on them, but the goal
//! itself is never assumed: a VC is proved only when every goal conjunct
//! is entailed by what has been derived. Contradictory givens are noted in
//! the result but never used to close a goal.

mod egraph;
mod linear;

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

pub use egraph::{EGraph, Id, Kind, Node, Op};
pub use linear::{check as check_linear, Constraint, Lin, Sat};

use crate::math::{substitute, Bindings, Key, MathExp, Sort, Var};
use crate::theory::Theorem;
use crate::vcgen::{negate, Vc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proved,
    Unprovable,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Proved => "proved",
            Status::Unprovable => "unprovable",
            Status::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProverOptions {
    /// Instantiation rounds after the initial closure.
    pub rounds: usize,
    pub timeout_ms: u64,
    /// Hard cap on e-graph size; matching stops creating terms beyond it.
    pub max_nodes: usize,
    /// Record every asserted literal in [`ProofResult::facts`].
    pub record_facts: bool,
}

impl Default for ProverOptions {
    fn default() -> Self {
        ProverOptions {
            rounds: 3,
            timeout_ms: 5000,
            max_nodes: 20_000,
            record_facts: false,
        }
    }
}

/// One fired theorem instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub theorem: String,
    pub bindings: Vec<(String, String)>,
    pub fact: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofResult {
    pub status: Status,
    pub ms: u64,
    /// Instantiation rounds actually run.
    pub rounds: usize,
    /// Theorems instantiated, in order of first use.
    pub theorems: Vec<String>,
    /// For a proved VC: the instances fired, in order, then a final `goal`
    /// step. Empty otherwise.
    pub trace: Vec<TraceStep>,
    /// The givens (with what was derived from them) are contradictory.
    pub contradictory: bool,
    /// Asserted literals over e-node ids, in order; empty unless requested.
    pub facts: Vec<String>,
}

pub fn prove_vc(vc: &Vc, theorems: &[Theorem], opts: &ProverOptions) -> ProofResult {
    prove(&vc.givens, &vc.goal, theorems, opts)
}

pub fn prove(givens: &[MathExp], goal: &MathExp, theorems: &[Theorem], opts: &ProverOptions) -> ProofResult {
    let start = Instant::now();
    let mut s = Session::new(theorems, opts, start + Duration::from_millis(opts.timeout_ms));
    let status = s.run(givens, goal, opts.rounds).unwrap_or(Status::Timeout);
    let contradictory = status != Status::Timeout && s.inconsistent();
    let mut trace = Vec::new();
    if status == Status::Proved {
        trace = std::mem::take(&mut s.steps);
        trace.push(TraceStep {
            theorem: "goal".to_string(),
            bindings: Vec::new(),
            fact: goal.to_string(),
        });
    }
    ProofResult {
        status,
        ms: start.elapsed().as_millis() as u64,
        rounds: s.rounds,
        theorems: s.used,
        trace,
        contradictory,
        facts: s.facts,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rel {
    Eq,
    Ne,
    Le,
    Lt,
}

fn relation(e: &MathExp) -> Option<(Rel, &MathExp, &MathExp)> {
    match e {
        MathExp::Eq(a, b) => Some((Rel::Eq, a, b)),
        MathExp::Ne(a, b) => Some((Rel::Ne, a, b)),
        MathExp::Le(a, b) => Some((Rel::Le, a, b)),
        MathExp::Lt(a, b) => Some((Rel::Lt, a, b)),
        _ => None,
    }
}

/// Operator and operands of `e`, or the id a bound variable stands for.
fn shape<'e>(e: &'e MathExp, env: Option<(&[Var], &[Id])>) -> Result<(Op, Vec<&'e MathExp>), Id> {
    use MathExp as M;
Ok(match e {
        M::Bool(b) => (Op::Bool(*b), vec![]),
        M::Int(n) => (Op::Int(n.clone()), vec![]),
        M::MinInt => (Op::MinInt, vec![]),
        M::MaxInt => (Op::MaxInt, vec![]),
        M::Empty => (Op::Empty, vec![]),
        M::Var(v) => (Op::Var(v.name.clone(), v.prime, Kind::of(&v.sort)), vec![]),
        M::Bound(v) => {
            let (univ, ids) = env.expect("bound variable outside a theorem instance");
            let i = univ.iter().position(|u| u.name == v.name).expect("bound variable is quantified");
            return Err(ids[i]);
        }
        M::Old(v) => panic!("#{} reached the prover", v.name),
        M::Not(a) => (Op::Not, vec![a]),
        M::And(a, b) => (Op::And, vec![a, b]),
        M::Implies(a, b) => (Op::Implies, vec![a, b]),
        M::Eq(a, b) => (Op::Eq, vec![a, b]),
        M::Ne(a, b) => (Op::Ne, vec![a, b]),
        M::Le(a, b) => (Op::Le, vec![a, b]),
        M::Lt(a, b) => (Op::Lt, vec![a, b]),
        M::Add(a, b) => (Op::Add, vec![a, b]),
        M::Sub(a, b) => (Op::Sub, vec![a, b]),
        M::Concat(ps) => (Op::Concat, ps.iter().collect()),
        M::Reverse(a) => (Op::Reverse, vec![a]),
        M::Len(a) => (Op::Len, vec![a]),
        M::Singleton(a) => (Op::Singleton, vec![a]),
})
}

const MAX_ARITY: usize = 8;
const CLOSE_PASSES: usize = 6;

type Binding = Vec<Option<Id>>;

/// Marker error: the deadline passed.
struct OutOfTime;

#[derive(Clone)]
struct Session<'t> {
    eg: EGraph,
    theorems: &'t [Theorem],
    tt: Id,
    ff: Id,
    diseqs: Vec<(Id, Id)>,
    les: Vec<(Id, Id, bool)>,
    implications: Vec<(MathExp, MathExp, bool)>,
    propagated: HashSet<Id>,
    done: HashSet<(usize, Vec<Id>)>,
    used: Vec<String>,
    base: Option<((usize, usize, usize), Vec<Constraint>)>,
    lin_cache: HashMap<Lin, bool>,
    deadline: Instant,
    max_nodes: usize,
    contradiction: bool,
    rounds: usize,
    steps: Vec<TraceStep>,
    record_facts: bool,
    facts: Vec<String>,
}

impl<'t> Session<'t> {
    fn new(theorems: &'t [Theorem], opts: &ProverOptions, deadline: Instant) -> Session<'t> {
        let mut eg = EGraph::new();
        let tt = eg.add(Op::Bool(true), vec![]);
        let ff = eg.add(Op::Bool(false), vec![]);
        Session {
            eg,
            theorems,
            tt,
            ff,
            diseqs: Vec::new(),
            les: Vec::new(),
            implications: Vec::new(),
            propagated: HashSet::new(),
            done: HashSet::new(),
            used: Vec::new(),
            base: None,
            lin_cache: HashMap::new(),
            deadline,
            max_nodes: opts.max_nodes,
            contradiction: false,
            rounds: 0,
            steps: Vec::new(),
            record_facts: opts.record_facts,
            facts: Vec::new(),
        }
    }

    fn tick(&self) -> Result<(), OutOfTime> {
        if Instant::now() > self.deadline {
            Err(OutOfTime)
        } else {
            Ok(())
        }
    }

    fn run(&mut self, givens: &[MathExp], goal: &MathExp, rounds: usize) -> Option<Status> {
        for g in givens {
            self.assert(g);
        }
        self.seed(goal);
        self.close().ok()?;
        if self.proves(goal) {
            return Some(Status::Proved);
        }
        for _ in 0..rounds {
            self.tick().ok()?;
            self.rounds += 1;
            let fired = self.instantiate().ok()?;
            self.close().ok()?;
            if self.proves(goal) {
                return Some(Status::Proved);
            }
            if fired == 0 {
                break;
            }
        }
        Some(Status::Unprovable)
    }

    fn proves(&mut self, goal: &MathExp) -> bool {
        !self.inconsistent() && self.entails(goal)
    }

    // ---- terms ----

    fn build(&mut self, e: &MathExp, env: Option<(&[Var], &[Id])>) -> Id {
        match shape(e, env) {
            Err(id) => id,
            Ok((op, kids)) => {
                let args = kids.into_iter().map(|k| self.build(k, env)).collect();
                self.eg.add(op, args)
            }
        }
    }

    /// Like [`Session::build`], but only finds terms that already exist.
    fn existing(&self, e: &MathExp, env: Option<(&[Var], &[Id])>) -> Option<Id> {
        match shape(e, env) {
            Err(id) => Some(id),
            Ok((op, kids)) => {
                let args: Vec<Id> = kids.into_iter().map(|k| self.existing(k, env)).collect::<Option<_>>()?;
                self.eg.lookup(&op, &args)
            }
        }
    }

    /// Interns the terms of the goal without asserting anything about them.
    fn seed(&mut self, goal: &MathExp) {
        match goal {
            MathExp::And(a, b) | MathExp::Implies(a, b) => {
                self.seed(a);
                self.seed(b);
            }
            MathExp::Not(a) => self.seed(a),
            other => match relation(other) {
                Some((_, a, b)) => {
                    self.build(a, None);
                    self.build(b, None);
                }
                None => {
                    self.build(other, None);
                }
            },
        }
    }

    // ---- facts ----

    fn assert(&mut self, e: &MathExp) {
        match e {
            MathExp::Bool(true) => {}
            MathExp::Bool(false) => self.contradiction = true,
            MathExp::And(a, b) => {
                self.assert(a);
                self.assert(b);
            }
            MathExp::Not(a) if relation(a).is_some() => self.assert(&negate(a)),
            MathExp::Not(a) => {
                let id = self.build(a, None);
                self.eg.merge(id, self.ff);
            }
            MathExp::Implies(a, b) => self.implications.push(((**a).clone(), (**b).clone(), false)),
            other => match relation(other) {
                Some((rel, a, b)) => {
                    let (a, b) = (self.build(a, None), self.build(b, None));
                    self.assert_rel(rel, a, b);
                }
                None => {
                    let id = self.build(other, None);
                    self.eg.merge(id, self.tt);
                }
            },
        }
    }

    fn assert_rel(&mut self, rel: Rel, a: Id, b: Id) {
        if self.record_facts {
            self.facts.push(format!("{rel:?} {a} {b}"));
        }
        match rel {
            Rel::Eq => self.eg.merge(a, b),
            Rel::Ne => self.diseqs.push((a, b)),
            Rel::Le => self.les.push((a, b, false)),
            Rel::Lt => self.les.push((a, b, true)),
        }
    }

    /// Restores congruence and pushes derived truths around until nothing
    /// changes (or the pass limit is hit).
    fn close(&mut self) -> Result<(), OutOfTime> {
        for _ in 0..CLOSE_PASSES {
            self.tick()?;
            self.eg.rebuild();
            let before = (self.eg.version(), self.diseqs.len(), self.les.len());
            self.propagate_truth();
            self.normalize_concats()?;
            self.fire_implications();
            self.eg.rebuild();
            if before == (self.eg.version(), self.diseqs.len(), self.les.len()) {
                break;
            }
        }
        Ok(())
    }

    /// Boolean terms known to be true or false yield their literals.
    fn propagate_truth(&mut self) {
        for (class, value) in [(self.tt, true), (self.ff, false)] {
            let members = self.eg.members(class).to_vec();
            for n in members {
                if !self.propagated.insert(n) {
                    continue;
                }
                let node = self.eg.node(n).clone();
                let rel = match node.op {
                    Op::Eq => Rel::Eq,
                    Op::Ne => Rel::Ne,
                    Op::Le => Rel::Le,
                    Op::Lt => Rel::Lt,
                    Op::Not => {
                        let target = if value { self.ff } else { self.tt };
                        self.eg.merge(node.args[0], target);
                        continue;
                    }
                    Op::And if value => {
                        self.eg.merge(node.args[0], self.tt);
                        self.eg.merge(node.args[1], self.tt);
                        continue;
                    }
                    _ => continue,
                };
                let (a, b) = (node.args[0], node.args[1]);
                match (rel, value) {
                    (r, true) => self.assert_rel(r, a, b),
                    (Rel::Eq, false) => self.assert_rel(Rel::Ne, a, b),
                    (Rel::Ne, false) => self.assert_rel(Rel::Eq, a, b),
                    (Rel::Le, false) => self.assert_rel(Rel::Lt, b, a),
                    (Rel::Lt, false) => self.assert_rel(Rel::Le, b, a),
                }
            }
        }
    }

    fn fire_implications(&mut self) {
        for i in 0..self.implications.len() {
            if self.implications[i].2 {
                continue;
            }
            let (a, b, _) = self.implications[i].clone();
            if self.entails(&a) {
                self.implications[i].2 = true;
                self.assert(&b);
            }
        }
    }

    /// Concatenation modulo associativity and `empty_string`: operands that
    /// are empty are dropped, operands equal to a concatenation are spliced
    /// in, and segments that already exist as terms are folded up.
    fn normalize_concats(&mut self) -> Result<(), OutOfTime> {
        let concats: Vec<Id> = (0..self.eg.len())
            .filter(|&n| self.eg.node(n).op == Op::Concat)
            .collect();
        for n in concats {
            if self.eg.len() >= self.max_nodes {
                break;
            }
            self.tick()?;
            let args: Vec<Id> = self.eg.node(n).args.iter().map(|&a| self.eg.find(a)).collect();

            // `x = u o x o v` forces `u` and `v` empty (lengths are natural).
            if let Some(i) = args.iter().position(|&a| self.eg.same(a, n)) {
                let empty = self.eg.add(Op::Empty, vec![]);
                for (j, &a) in args.iter().enumerate() {
                    if j != i {
                        self.eg.merge(a, empty);
                    }
                }
                self.eg.rebuild();
                continue;
            }

            let kept: Vec<Id> = args
                .iter()
                .copied()
                .filter(|&a| !self.eg.has_op(a, &Op::Empty))
                .collect();
            if kept.len() < args.len() {
                let target = match kept.len() {
                    0 => self.eg.add(Op::Empty, vec![]),
                    1 => kept[0],
                    _ => self.eg.add(Op::Concat, kept),
                };
                self.eg.merge(n, target);
                continue;
            }

            for i in 0..args.len() {
                let inner: Vec<Vec<Id>> = self
                    .eg
                    .members(args[i])
                    .iter()
                    .filter(|&&m| self.eg.node(m).op == Op::Concat)
                    .map(|&m| self.eg.node(m).args.clone())
                    .collect();
                for parts in inner {
                    if args.len() - 1 + parts.len() > MAX_ARITY
                        || parts.iter().any(|&p| self.eg.same(p, n))
                    {
                        continue;
                    }
                    let mut flat = args[..i].to_vec();
                    flat.extend(parts);
                    flat.extend_from_slice(&args[i + 1..]);
                    let id = self.eg.add(Op::Concat, flat);
                    self.eg.merge(n, id);
                }
            }

            for i in 0..args.len() {
                for j in i + 2..=args.len() {
                    if j - i == args.len() {
                        continue;
                    }
                    if let Some(seg) = self.eg.lookup(&Op::Concat, &args[i..j]) {
                        let mut folded = args[..i].to_vec();
                        folded.push(seg);
                        folded.extend_from_slice(&args[j..]);
                        let id = self.eg.add(Op::Concat, folded);
                        self.eg.merge(n, id);
                    }
                }
            }
        }
        Ok(())
    }

    // ---- entailment ----

    fn inconsistent(&mut self) -> bool {
        if self.contradiction || self.eg.conflict() {
            return true;
        }
        if self.diseqs.iter().any(|&(a, b)| self.eg.same(a, b)) {
            return true;
        }
        let base = self.base_constraints();
        if linear::check(base, linear::DEFAULT_CAP) == Sat::Infeasible {
            self.contradiction = true;
        }
        self.contradiction
    }

    fn entails(&mut self, e: &MathExp) -> bool {
        match e {
            MathExp::Bool(b) => *b,
            MathExp::And(a, b) => self.entails(a) && self.entails(b),
            MathExp::Not(a) if relation(a).is_some() => self.entails(&negate(a)),
            MathExp::Not(a) => {
                let id = self.build(a, None);
                self.eg.same(id, self.ff)
            }
            MathExp::Implies(a, b) => {
                let mut hyp = self.clone();
                hyp.assert(a);
                if hyp.close().is_err() {
                    return false;
                }
                // An antecedent that contradicts consistent facts is false.
                (hyp.inconsistent() && !self.inconsistent()) || hyp.entails(b)
            }
            other => match relation(other) {
                Some((rel, a, b)) => {
                    let (a, b) = (self.build(a, None), self.build(b, None));
                    self.holds(rel, a, b)
                }
                None => {
                    let id = self.build(other, None);
                    self.eg.same(id, self.tt)
                }
            },
        }
    }

    fn holds(&mut self, rel: Rel, a: Id, b: Id) -> bool {
        let int = self.eg.kind(a) == Kind::Int;
        match rel {
            Rel::Eq => self.eg.same(a, b) || (int && self.lin_le(a, b, false) && self.lin_le(b, a, false)),
            Rel::Ne => {
                if self
                    .diseqs
                    .iter()
                    .any(|&(x, y)| (self.eg.same(x, a) && self.eg.same(y, b)) || (self.eg.same(x, b) && self.eg.same(y, a)))
                {
                    return true;
                }
                if let (Some(x), Some(y)) = (self.eg.literal(a), self.eg.literal(b)) {
                    if x != y {
                        return true;
                    }
                }
                if int {
                    return self.lin_le(a, b, true) || self.lin_le(b, a, true);
                }
                if self.eg.kind(a) == Kind::Str {
                    if let (Some(la), Some(lb)) = (self.eg.lookup(&Op::Len, &[a]), self.eg.lookup(&Op::Len, &[b])) {
                        return self.holds(Rel::Ne, la, lb);
                    }
                }
                false
            }
            Rel::Le => self.eg.same(a, b) || self.lin_le(a, b, false),
            Rel::Lt => self.lin_le(a, b, true),
        }
    }

    fn base_constraints(&mut self) -> Vec<Constraint> {
        let (arith, unions) = self.eg.arith_version();
        let version = (arith, unions, self.les.len());
        if let Some((v, cs)) = &self.base {
            if *v == version {
                return cs.clone();
            }
        }
        let mut set = std::collections::BTreeSet::new();
        for n in 0..self.eg.len() {
            let node = self.eg.node(n);
            let c = Lin::atom(self.eg.find(n));
            let arg = |i: usize| Lin::atom(self.eg.find(node.args[i]));
            let def = match &node.op {
                Op::Add => {
                    let mut l = c.sub(&arg(0));
                    l = l.sub(&arg(1));
                    l
                }
                Op::Sub => {
                    let mut l = c.sub(&arg(0));
                    l.add_scaled(&arg(1), &BigInt::one());
                    l
                }
                Op::Int(k) => c.sub(&Lin::constant(k.clone())),
                _ => continue,
            };
            set.insert(Constraint::Eq(def));
        }
        for &(a, b, strict) in &self.les {
            let mut l = Lin::atom(self.eg.find(a)).sub(&Lin::atom(self.eg.find(b)));
            if strict {
                l.constant += 1;
            }
            set.insert(Constraint::Le(l));
        }
        let cs: Vec<Constraint> = set.into_iter().collect();
        self.lin_cache.clear();
        self.base = Some((version, cs.clone()));
        cs
    }

    /// Whether the facts entail `a <= b` (`a < b` when strict).
    fn lin_le(&mut self, a: Id, b: Id, strict: bool) -> bool {
        let base = self.base_constraints();
        let mut negated = Lin::atom(self.eg.find(b)).sub(&Lin::atom(self.eg.find(a)));
        if !strict {
            negated.constant += 1;
        }
        if let Some(&r) = self.lin_cache.get(&negated) {
            return r;
        }
        let mut cs = linear::relevant(&base, &negated);
        cs.push(Constraint::Le(negated.clone()));
        let r = linear::check(cs, linear::DEFAULT_CAP) == Sat::Infeasible;
        self.lin_cache.insert(negated, r);
        r
    }

    // ---- instantiation ----

    fn instantiate(&mut self) -> Result<usize, OutOfTime> {
        let mut candidates: Vec<(usize, Vec<Id>)> = Vec::new();
        let mut seen = HashSet::new();
        for ti in 0..self.theorems.len() {
            let th = &self.theorems[ti];
            for trig in &th.triggers {
                self.tick()?;
                for b in self.trigger_matches(th, trig) {
                    let ids: Vec<Id> = b.iter().map(|x| self.eg.find(x.expect("triggers bind every universal"))).collect();
                    let key = (ti, ids);
                    if !self.done.contains(&key) && seen.insert(key.clone()) {
                        candidates.push(key);
                    }
                }
            }
        }
        // Hypotheses are all judged against the state at the start of the
        // round; asserting as we go would keep invalidating the linear cache.
        let mut firing = Vec::new();
        for (ti, ids) in candidates {
            self.tick()?;
            let th = &self.theorems[ti];
            let env = Some((th.universals.as_slice(), ids.as_slice()));
            if let Some((Rel::Eq, a, b)) = relation(&th.conclusion) {
                if let (Some(a), Some(b)) = (self.existing(a, env), self.existing(b, env)) {
                    if self.eg.same(a, b) {
                        self.done.insert((ti, ids));
                        continue;
                    }
                }
            }
            let mut ok = true;
            for h in th.hypotheses() {
                let (rel, a, b) = relation(&h).expect("hypotheses are relational");
                let (a, b) = (self.build(a, env), self.build(b, env));
                if !self.holds(rel, a, b) {
                    ok = false;
                    break;
                }
            }
            if ok {
                firing.push((ti, ids));
            }
        }
        let fired = firing.len();
        for (ti, ids) in firing {
            let th = &self.theorems[ti];
            let env = Some((th.universals.as_slice(), ids.as_slice()));
            let (rel, a, b) = relation(&th.conclusion).expect("conclusions are relational");
            let (a, b) = (self.build(a, env), self.build(b, env));
            self.assert_rel(rel, a, b);
            let step = self.step(th, &ids);
            self.steps.push(step);
            self.done.insert((ti, ids));
            if !self.used.contains(&th.name) {
                self.used.push(th.name.clone());
            }
        }
        Ok(fired)
    }

    fn step(&self, th: &Theorem, ids: &[Id]) -> TraceStep {
        let mut bindings = Bindings::new();
        let mut shown = Vec::new();
        for (u, &id) in th.universals.iter().zip(ids) {
            let t = self.term(id);
            shown.push((u.name.clone(), t.to_string()));
            bindings.insert(Key::Bound(u.name.clone()), t);
        }
        let fact = substitute(&th.conclusion, &bindings).map_or_else(|_| th.conclusion.to_string(), |f| f.to_string());
        TraceStep {
            theorem: th.name.clone(),
            bindings: shown,
            fact,
        }
    }

    /// The term a node was built from.
    fn term(&self, id: Id) -> MathExp {
        use MathExp as M;
        let node = self.eg.node(id);
        let arg = |i: usize| Box::new(self.term(node.args[i]));
        match &node.op {
            Op::Var(name, prime, kind) => {
                let sort = match kind {
                    Kind::Bool => Sort::Bool,
                    Kind::Int => Sort::Int,
                    Kind::Str => Sort::any_str(),
                    Kind::Entry => Sort::any_entry(),
                };
                M::Var(Var::primed(name.clone(), *prime, sort))
            }
            Op::Int(n) => M::Int(n.clone()),
            Op::Bool(b) => M::Bool(*b),
            Op::MinInt => M::MinInt,
            Op::MaxInt => M::MaxInt,
            Op::Empty => M::Empty,
            Op::Not => M::Not(arg(0)),
            Op::And => M::And(arg(0), arg(1)),
            Op::Implies => M::Implies(arg(0), arg(1)),
            Op::Eq => M::Eq(arg(0), arg(1)),
            Op::Ne => M::Ne(arg(0), arg(1)),
            Op::Le => M::Le(arg(0), arg(1)),
            Op::Lt => M::Lt(arg(0), arg(1)),
            Op::Add => M::Add(arg(0), arg(1)),
            Op::Sub => M::Sub(arg(0), arg(1)),
            Op::Concat => M::concat(node.args.iter().map(|&a| self.term(a)).collect()),
            Op::Reverse => M::Reverse(arg(0)),
            Op::Len => M::Len(arg(0)),
            Op::Singleton => M::Singleton(arg(0)),
        }
    }

    fn trigger_matches(&mut self, th: &Theorem, trig: &MathExp) -> Vec<Binding> {
        let univ = &th.universals;
        let fresh = vec![None; univ.len()];
        let mut out = Vec::new();
        match relation(trig) {
            Some((Rel::Eq, p, q)) => {
                for c in self.eg.roots() {
                    for b in self.match_at(p, c, univ, fresh.clone()) {
                        out.extend(self.match_at(q, c, univ, b));
                    }
                }
            }
            Some((Rel::Ne, p, q)) => {
                let pairs: Vec<(Id, Id)> = self.diseqs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
                for (a, b) in pairs {
                    for m in self.match_at(p, a, univ, fresh.clone()) {
                        out.extend(self.match_at(q, b, univ, m));
                    }
                }
            }
            Some((rel, p, q)) => {
                let strict = rel == Rel::Lt;
                let pairs: Vec<(Id, Id)> = self.les.iter().filter(|l| l.2 == strict).map(|l| (l.0, l.1)).collect();
                for (a, b) in pairs {
                    for m in self.match_at(p, a, univ, fresh.clone()) {
                        out.extend(self.match_at(q, b, univ, m));
                    }
                }
            }
            None => {
                for c in self.eg.roots() {
                    out.extend(self.match_at(trig, c, univ, fresh.clone()));
                }
            }
        }
        out
    }

    /// Bindings extending `b` under which `pat` denotes class `c`.
    fn match_at(&mut self, pat: &MathExp, c: Id, univ: &[Var], b: Binding) -> Vec<Binding> {
        use MathExp as M;
        let op = match pat {
            M::Bound(v) => {
                let i = univ.iter().position(|u| u.name == v.name).expect("bound variable is quantified");
                return match b[i] {
                    Some(x) if self.eg.same(x, c) => vec![b],
                    Some(_) => vec![],
                    None if Kind::of(&v.sort) == self.eg.kind(c) => {
                        let mut b = b;
                        b[i] = Some(self.eg.find(c));
                        vec![b]
                    }
                    None => vec![],
                };
            }
            M::Concat(parts) => return self.match_concat(parts, c, univ, b),
            M::Bool(x) => Op::Bool(*x),
            M::Int(n) => Op::Int(n.clone()),
            M::MinInt => Op::MinInt,
            M::MaxInt => Op::MaxInt,
            M::Empty => Op::Empty,
            M::Var(v) => Op::Var(v.name.clone(), v.prime, Kind::of(&v.sort)),
            M::Old(_) => return vec![],
            M::Not(_) => Op::Not,
            M::And(..) => Op::And,
            M::Implies(..) => Op::Implies,
            M::Eq(..) => Op::Eq,
            M::Ne(..) => Op::Ne,
            M::Le(..) => Op::Le,
            M::Lt(..) => Op::Lt,
            M::Add(..) => Op::Add,
            M::Sub(..) => Op::Sub,
            M::Reverse(_) => Op::Reverse,
            M::Len(_) => Op::Len,
            M::Singleton(_) => Op::Singleton,
        };
        let kids = pat.children();
        let candidates: Vec<Vec<Id>> = self
            .eg
            .members(c)
            .iter()
            .map(|&n| self.eg.node(n))
            .filter(|n| n.op == op && n.args.len() == kids.len())
            .map(|n| n.args.clone())
            .collect();
        let mut out = Vec::new();
        for args in candidates {
            out.extend(self.match_list(&kids, &args, univ, b.clone()));
        }
        out
    }

    fn match_list(&mut self, pats: &[&MathExp], classes: &[Id], univ: &[Var], b: Binding) -> Vec<Binding> {
        let mut states = vec![b];
        for (p, &c) in pats.iter().zip(classes) {
            let mut next = Vec::new();
            for s in states {
                next.extend(self.match_at(p, c, univ, s));
            }
            if next.is_empty() {
                return next;
            }
            states = next;
        }
        states
    }

    /// Matches a k-part concatenation pattern against every way of cutting
    /// an n-ary concatenation of the class into k non-empty segments.
    fn match_concat(&mut self, parts: &[MathExp], c: Id, univ: &[Var], b: Binding) -> Vec<Binding> {
        let k = parts.len();
        let nodes: Vec<Vec<Id>> = self
            .eg
            .members(c)
            .iter()
            .map(|&n| self.eg.node(n))
            .filter(|n| n.op == Op::Concat && n.args.len() >= k)
            .map(|n| n.args.clone())
            .collect();
        let pats: Vec<&MathExp> = parts.iter().collect();
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for args in nodes {
            for cuts in compositions(args.len(), k) {
                let mut classes = Vec::with_capacity(k);
                let mut at = 0;
                for len in cuts {
                    let seg = &args[at..at + len];
                    at += len;
                    let id = if len == 1 {
                        Some(seg[0])
                    } else if let Some(id) = self.eg.lookup(&Op::Concat, seg) {
                        Some(id)
                    } else if self.eg.len() < self.max_nodes {
                        Some(self.eg.add(Op::Concat, seg.to_vec()))
                    } else {
                        None
                    };
                    match id {
                        Some(id) => classes.push(self.eg.find(id)),
                        None => break,
                    }
                }
                if classes.len() == k && seen.insert(classes.clone()) {
                    out.extend(self.match_list(&pats, &classes, univ, b.clone()));
                }
            }
        }
        out
    }
}

/// Ordered ways of writing `n` as a sum of `k` positive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Sort;
    use crate::theory::Library;

    fn int(n: &str, p: u32) -> MathExp {
        MathExp::Var(Var::primed(n, p, Sort::Int))
    }

    fn st(n: &str, p: u32) -> MathExp {
        MathExp::Var(Var::primed(n, p, Sort::Str("Entry".into())))
    }

    fn ent(n: &str, p: u32) -> MathExp {
        MathExp::Var(Var::primed(n, p, Sort::Entry("Entry".into())))
    }

    fn lib_prove(givens: &[MathExp], goal: &MathExp) -> Status {
        let th: Vec<Theorem> = Library::shared().theorems().cloned().collect();
        prove(givens, goal, &th, &ProverOptions::default()).status
    }

    #[test]
    fn compositions_enumerate_cuts() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(2, 3), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn exchange_arithmetic() {
        let i1 = MathExp::eq(int("I", 1), MathExp::add(int("I", 0), int("J", 0)));
        let j1 = MathExp::eq(int("J", 1), MathExp::sub(int("I", 1), int("J", 0)));
        let i2 = MathExp::eq(int("I", 2), MathExp::sub(int("I", 1), int("J", 1)));
        let g = [i1, j1, i2];
        assert_eq!(lib_prove(&g, &MathExp::eq(int("I", 2), int("J", 0))), Status::Proved);
        assert_eq!(lib_prove(&g, &MathExp::eq(int("J", 1), int("I", 0))), Status::Proved);
        assert_eq!(lib_prove(&g, &MathExp::eq(int("J", 1), int("J", 0))), Status::Unprovable);
    }

    #[test]
    fn reverse_of_cons_is_snoc() {
        // Q = <E> o Q1, Q2 = Reverse(Q1)
        let g = [
            MathExp::eq(st("Q", 0), MathExp::concat(vec![MathExp::singleton(ent("E", 1)), st("Q", 1)])),
            MathExp::eq(st("Q", 2), MathExp::reverse(st("Q", 1))),
        ];
        let snoc = MathExp::concat(vec![st("Q", 2), MathExp::singleton(ent("E", 1))]);
        let cons = MathExp::concat(vec![MathExp::singleton(ent("E", 1)), st("Q", 2)]);
        let goal = |t: MathExp| MathExp::eq(t, MathExp::reverse(st("Q", 0)));
        assert_eq!(lib_prove(&g, &goal(snoc)), Status::Proved);
        assert_eq!(lib_prove(&g, &goal(cons)), Status::Unprovable);
    }

    #[test]
    fn contradictory_givens_are_noted_not_used() {
        let th: Vec<Theorem> = Library::shared().theorems().cloned().collect();
        let g = [MathExp::lt(int("x", 0), int("y", 0)), MathExp::lt(int("y", 0), int("x", 0))];
        let r = prove(&g, &MathExp::eq(int("a", 0), int("b", 0)), &th, &ProverOptions::default());
        assert_eq!(r.status, Status::Unprovable);
        assert!(r.contradictory);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn proofs_end_with_the_goal() {
        let th: Vec<Theorem> = Library::shared().theorems().cloned().collect();
        let goal = MathExp::eq(MathExp::len(MathExp::reverse(st("S", 0))), MathExp::len(st("S", 0)));
        let r = prove(&[], &goal, &th, &ProverOptions::default());
        assert_eq!(r.status, Status::Proved);
        let names: Vec<&str> = r.trace.iter().map(|t| t.theorem.as_str()).collect();
        assert!(names.contains(&"LEN_REV"), "{names:?}");
        let last = r.trace.last().unwrap();
        assert_eq!((last.theorem.as_str(), last.fact.as_str()), ("goal", "|Reverse(S)| = |S|"));
        let len_rev = r.trace.iter().find(|t| t.theorem == "LEN_REV").unwrap();
        assert_eq!(len_rev.bindings, vec![("u".to_string(), "S".to_string())]);
        assert_eq!(len_rev.fact, "|Reverse(S)| = |S|");
    }

    #[test]
    fn goal_is_never_assumed() {
        let goal = MathExp::eq(st("S", 0), MathExp::reverse(st("S", 0)));
        assert_eq!(lib_prove(&[], &goal), Status::Unprovable);
    }
}
