//! Forward verification-condition generation.
//!
//! Execution paths are followed symbolically from procedure entry. Each
//! assignment gives the affected variable a fresh prime level and records
//! what is known about it as a given; each obligation (a callee's
//! precondition, a loop invariant, a termination metric, the procedure's
//! own ensures clause) becomes a VC carrying the givens of its path.
//! Branches split the path and the halves are never merged again.
//!
//! VC ids are `g_c`: `g` is the block the obligation arises in (0 for the
//! procedure body, `2k+1` for the body of the k-th loop in source order and
//! `2k+2` for the code after it) and `c` counts VCs within that block.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::lang::{
    initial_value, CallArg, Contract, Loop, Mode, PExp, TStmt, TStmtKind, TypedModule,
    TypedProcedure,
};
use crate::math::{substitute, Bindings, Key, MathExp, Sort, ValueState, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VcKind {
    OperationPrecondition,
    LoopInvariantBase,
    LoopInvariantPreservation,
    TerminationProgress,
    TerminationBound,
    ProcedureEnsures,
    RestoresObligation,
}

impl VcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VcKind::OperationPrecondition => "operation-precondition",
            VcKind::LoopInvariantBase => "loop-invariant-base",
            VcKind::LoopInvariantPreservation => "loop-invariant-preservation",
            VcKind::TerminationProgress => "termination-progress",
            VcKind::TerminationBound => "termination-bound",
            VcKind::ProcedureEnsures => "procedure-ensures",
            VcKind::RestoresObligation => "restores-obligation",
        }
    }
}

/// One verification condition: the goal must follow from the givens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vc {
    pub id: String,
    /// Operation whose body produced the VC.
    pub operation: String,
    pub line: u32,
    pub kind: VcKind,
    pub goal: MathExp,
    /// In the order introduced; displayed numbered from 1.
    pub givens: Vec<MathExp>,
    pub description: String,
}

/// Logical negation, pushed through relations so givens stay readable.
pub fn negate(e: &MathExp) -> MathExp {
    match e {
        MathExp::Bool(b) => MathExp::Bool(!b),
        MathExp::Not(a) => (**a).clone(),
        MathExp::Eq(a, b) => MathExp::Ne(a.clone(), b.clone()),
        MathExp::Ne(a, b) => MathExp::Eq(a.clone(), b.clone()),
        MathExp::Le(a, b) => MathExp::Lt(b.clone(), a.clone()),
        MathExp::Lt(a, b) => MathExp::Le(b.clone(), a.clone()),
        other => MathExp::not(other.clone()),
    }
}

fn inst(e: &MathExp, b: &Bindings) -> MathExp {
    substitute(e, b).expect("checked contracts instantiate with well-sorted values")
}

fn range_facts(v: &Var) -> [MathExp; 2] {
    let x = MathExp::Var(v.clone());
    [
        MathExp::le(MathExp::MinInt, x.clone()),
        MathExp::le(x, MathExp::MaxInt),
    ]
}

#[derive(Clone)]
struct Path {
    state: ValueState,
    givens: Vec<MathExp>,
    block: usize,
}

impl Path {
    fn assume(&mut self, fact: MathExp) {
        for c in fact.split_conjuncts() {
            if !c.is_true() && !self.givens.contains(&c) {
                self.givens.push(c);
            }
        }
    }

    fn current(&self, name: &str) -> MathExp {
        MathExp::Var(
            self.state
                .current(name)
                .unwrap_or_else(|| panic!("`{name}` used before declaration")),
        )
    }

    /// Moves `name` to a fresh level; integer values get range facts.
    fn advance(&mut self, name: &str) -> Var {
        let v = self.state.advance(name);
        if v.sort == Sort::Int {
            for f in range_facts(&v) {
                self.assume(f);
            }
        }
        v
    }
}

#[derive(Clone)]
enum Frame<'a> {
    Stmts(&'a [TStmt]),
    LoopEnd {
        lp: &'a Loop,
        metric_before: MathExp,
    },
    ProcEnd,
}

struct Gen<'a> {
    proc: &'a TypedProcedure,
    loop_index: HashMap<*const Loop, usize>,
    counters: BTreeMap<usize, u32>,
    out: Vec<Vc>,
}

/// VCs for every procedure of a module, procedure by procedure.
pub fn generate_vcs(module: &TypedModule) -> Vec<Vc> {
    module
        .procedures
        .iter()
        .flat_map(|p| generate_procedure(module, p))
        .collect()
}

/// VCs for one procedure, in generation order.
pub fn generate_procedure(module: &TypedModule, proc: &TypedProcedure) -> Vec<Vc> {
    let mut g = Gen {
        proc,
        loop_index: HashMap::new(),
        counters: BTreeMap::new(),
        out: Vec::new(),
    };
    number_loops(&proc.body, &mut g.loop_index);

    let mut path = Path {
        state: ValueState::new(),
        givens: Vec::new(),
        block: 0,
    };
    let contract = &proc.contract;
    for c in &module.constants {
        path.state.declare(&c.name, c.sort.clone());
    }
    for f in &contract.formals {
        path.state.declare_formal(&f.name, f.sort.clone());
    }
    path.assume(contract.requires.clone());
    for c in &module.constraints {
        path.assume(c.clone());
    }
    for c in &module.constants {
        range_facts(c).into_iter().for_each(|f| path.assume(f));
    }
    for f in contract.formals.iter().filter(|f| f.sort == Sort::Int) {
        range_facts(&Var::new(&f.name, Sort::Int))
            .into_iter()
            .for_each(|x| path.assume(x));
    }
    g.run(path, vec![Frame::ProcEnd, Frame::Stmts(&proc.body)]);
    g.out
}

fn number_loops(stmts: &[TStmt], out: &mut HashMap<*const Loop, usize>) {
    for s in stmts {
        match &s.kind {
            TStmtKind::While(lp) => {
                let k = out.len();
                out.insert(&**lp as *const Loop, k);
                number_loops(&lp.body, out);
            }
            TStmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                number_loops(then_branch, out);
                number_loops(else_branch, out);
            }
            _ => {}
        }
    }
}

impl<'a> Gen<'a> {
    fn emit(&mut self, path: &Path, line: u32, kind: VcKind, goal: MathExp, description: String) {
        let n = self.counters.entry(path.block).or_insert(0);
        *n += 1;
        self.out.push(Vc {
            id: format!("{}_{}", path.block, n),
            operation: self.proc.contract.name.clone(),
            line,
            kind,
            goal,
            givens: path.givens.clone(),
            description,
        });
    }

    /// Value of a program expression plus the preconditions of the calls
    /// needed to compute it.
    fn eval(&self, e: &PExp, path: &Path) -> (Vec<(MathExp, String)>, MathExp) {
        match e {
            PExp::Lit(m) => (vec![], m.clone()),
            PExp::Var(n) => (vec![], path.current(n)),
            PExp::Call { contract, args } => {
                let mut obligations = Vec::new();
                let mut b = Bindings::new();
                for (f, a) in contract.formals.iter().zip(args) {
                    let (mut o, v) = self.eval(a, path);
                    obligations.append(&mut o);
                    b.insert(Key::Var(f.name.clone(), 0), v.clone());
                    b.insert(Key::Old(f.name.clone()), v);
                }
                for r in contract.requires.split_conjuncts() {
                    let goal = inst(&r, &b);
                    if !goal.is_true() {
                        let d = format!("requires clause of {} ({goal})", contract.name);
                        obligations.push((goal, d));
                    }
                }
                let value = contract
                    .value
                    .as_ref()
                    .expect("only functions appear in expressions");
                (obligations, inst(value, &b))
            }
        }
    }

    fn obligations(&mut self, path: &Path, line: u32, obls: Vec<(MathExp, String)>) {
        for (goal, d) in obls {
            self.emit(path, line, VcKind::OperationPrecondition, goal, d);
        }
    }

    fn run(&mut self, mut path: Path, mut stack: Vec<Frame<'a>>) {
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::ProcEnd => {
                    self.finalize(&path);
                    return;
                }
                Frame::LoopEnd { lp, metric_before } => {
                    self.loop_end(&path, lp, metric_before);
                    return;
                }
                Frame::Stmts([]) => {}
                Frame::Stmts([s, rest @ ..]) => {
                    stack.push(Frame::Stmts(rest));
                    match &s.kind {
                        TStmtKind::If {
                            cond,
                            then_branch,
                            else_branch,
                        } => {
                            let (obls, c) = self.eval(cond, &path);
                            self.obligations(&path, s.line, obls);
                            let mut then_path = path.clone();
                            then_path.assume(c.clone());
                            let mut then_stack = stack.clone();
                            then_stack.push(Frame::Stmts(then_branch));
                            self.run(then_path, then_stack);
                            path.assume(negate(&c));
                            stack.push(Frame::Stmts(else_branch));
                        }
                        TStmtKind::While(lp) => {
                            let (body, body_stack) = self.loop_start(&mut path, s.line, lp);
                            self.run(body, body_stack);
                        }
                        _ => self.simple(&mut path, s),
                    }
                }
            }
        }
    }

    fn simple(&mut self, path: &mut Path, s: &TStmt) {
        match &s.kind {
            TStmtKind::Var { name, sort } => {
                let v = path.state.declare(name, sort.clone());
                if let Some(init) = initial_value(sort) {
                    path.assume(MathExp::eq(MathExp::Var(v), init));
                }
            }
            TStmtKind::Swap(a, b) => {
                let (va, vb) = (path.current(a), path.current(b));
                let na = path.advance(a);
                let nb = path.advance(b);
                path.assume(MathExp::eq(MathExp::Var(na), vb));
                path.assume(MathExp::eq(MathExp::Var(nb), va));
            }
            TStmtKind::Assign { target, value } => {
                let (obls, v) = self.eval(value, path);
                self.obligations(path, s.line, obls);
                let t = path.advance(target);
                path.assume(MathExp::eq(MathExp::Var(t), v));
            }
            TStmtKind::Call {
                contract,
                args,
                recursive,
            } => self.call(path, s.line, contract, args, *recursive),
            TStmtKind::If { .. } | TStmtKind::While(_) => unreachable!("handled by run"),
        }
    }

    fn call(&mut self, path: &mut Path, line: u32, c: &Contract, args: &[CallArg], recursive: bool) {
        let mut pre = Bindings::new();
        let mut obls = Vec::new();
        for (f, a) in c.formals.iter().zip(args) {
            let v = match a {
                CallArg::Var(n) => path.current(n),
                CallArg::Exp(e) => {
                    let (mut o, v) = self.eval(e, path);
                    obls.append(&mut o);
                    v
                }
            };
            pre.insert(Key::Var(f.name.clone(), 0), v);
        }
        for r in c.requires.split_conjuncts() {
            let goal = inst(&r, &pre);
            if !goal.is_true() {
                obls.push((goal.clone(), format!("requires clause of {} ({goal})", c.name)));
            }
        }
        self.obligations(path, line, obls);
        if recursive {
            if let Some(metric) = &self.proc.decreasing {
                let goal = MathExp::lt(inst(metric, &pre), metric.clone());
                let d = format!("termination of recursive call to {} ({goal})", c.name);
                self.emit(path, line, VcKind::TerminationProgress, goal, d);
            }
        }
        let mut post = Bindings::new();
        let mut cleared = Vec::new();
        for (f, a) in c.formals.iter().zip(args) {
            let before = pre[&Key::Var(f.name.clone(), 0)].clone();
            let after = match a {
                CallArg::Var(n) if f.mode.mutates() => MathExp::Var(path.advance(n)),
                _ => before.clone(),
            };
            if f.mode == Mode::Clears {
                cleared.push((after.clone(), f.sort.clone()));
            }
            post.insert(Key::Old(f.name.clone()), before);
            post.insert(Key::Var(f.name.clone(), 0), after);
        }
        path.assume(inst(&c.ensures, &post));
        for (v, sort) in cleared {
            if let Some(init) = initial_value(&sort) {
                path.assume(MathExp::eq(v, init));
            }
        }
    }

    /// Emits the base VCs and returns the body path; `path` becomes the
    /// exit path.
    fn loop_start(&mut self, path: &mut Path, line: u32, lp: &'a Loop) -> (Path, Vec<Frame<'a>>) {
        let k = self.loop_index[&(lp as *const Loop)];
        let b = path.state.bindings();
        for c in lp.invariant.split_conjuncts() {
            let goal = inst(&c, &b);
            let d = format!("loop invariant holds on entry ({goal})");
            self.emit(path, lp.invariant_line, VcKind::LoopInvariantBase, goal, d);
        }

        let mut head = path.clone();
        for v in &lp.changing {
            head.advance(v);
        }
        head.assume(inst(&lp.invariant, &head.state.bindings()));
        let (obls, cond) = self.eval(&lp.cond, &head);

        let mut body = head.clone();
        body.block = 2 * k + 1;
        self.obligations(&body, line, obls);
        body.assume(cond.clone());
        let metric_before = inst(&lp.decreasing, &body.state.bindings());

        *path = head;
        path.block = 2 * k + 2;
        path.assume(negate(&cond));
        let stack = vec![Frame::LoopEnd { lp, metric_before }, Frame::Stmts(&lp.body)];
        (body, stack)
    }

    fn loop_end(&mut self, path: &Path, lp: &Loop, metric_before: MathExp) {
        let b = path.state.bindings();
        for c in lp.invariant.split_conjuncts() {
            let goal = inst(&c, &b);
            let d = format!("loop invariant is maintained by the body ({goal})");
            self.emit(path, lp.invariant_line, VcKind::LoopInvariantPreservation, goal, d);
        }
        let metric = inst(&lp.decreasing, &b);
        let goal = MathExp::lt(metric.clone(), metric_before);
        let d = format!("decreasing metric drops in each iteration ({goal})");
        self.emit(path, lp.decreasing_line, VcKind::TerminationProgress, goal, d);
        let goal = MathExp::le(MathExp::int(0), metric);
        let d = format!("decreasing metric stays non-negative ({goal})");
        self.emit(path, lp.decreasing_line, VcKind::TerminationBound, goal, d);
    }

    fn finalize(&mut self, path: &Path) {
        let c = &self.proc.contract;
        let b = path.state.bindings();
        let conjuncts = c.ensures.split_conjuncts();
        for e in &conjuncts {
            let goal = inst(e, &b);
            let d = format!("ensures clause of {} ({goal})", c.name);
            self.emit(path, c.ensures_line, VcKind::ProcedureEnsures, goal, d);
        }
        for f in c.formals.iter().filter(|f| f.mode == Mode::Restores) {
            let stated = MathExp::eq(
                MathExp::Var(Var::new(&f.name, f.sort.clone())),
                MathExp::Old(Var::new(&f.name, f.sort.clone())),
            );
            if conjuncts.contains(&stated) {
                continue;
            }
            let goal = MathExp::eq(path.current(&f.name), b[&Key::Old(f.name.clone())].clone());
            let d = format!("restores parameter {} is unchanged ({goal})", f.name);
            self.emit(path, f.line, VcKind::RestoresObligation, goal, d);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{check_module, parse};
    use crate::theory::Library;

    fn vcs(src: &str) -> Vec<Vc> {
        let m = parse(src).unwrap();
        let t = check_module(&m, Library::shared()).unwrap();
        generate_vcs(&t)
    }

    const EXCHANGE: &str = "\
Facility Int_Swap_Example_Fac;
    Operation Exchange(updates I, J: Integer);
        ensures I = #J and J = #I;
    Procedure
        I := I + J;
        J := I - J;
        I := I - J;
    end Exchange;
end Int_Swap_Example_Fac;
";

    #[test]
    fn exchange_has_eight_vcs() {
        let v = vcs(EXCHANGE);
        let ids: Vec<&str> = v.iter().map(|v| v.id.as_str()).collect();
        assert_eq!(ids, ["0_1", "0_2", "0_3", "0_4", "0_5", "0_6", "0_7", "0_8"]);
        assert_eq!(v[0].goal.to_string(), "min_int <= I + J");
        assert_eq!(v[1].goal.to_string(), "I + J <= max_int");
        assert_eq!(v[0].line, 5);
        assert_eq!(v[6].goal.to_string(), "I'' = J");
        assert_eq!(v[7].goal.to_string(), "J' = I");
        assert_eq!(v[7].kind, VcKind::ProcedureEnsures);
        assert!(v[6]
            .givens
            .iter()
            .any(|g| g.to_string() == "I' = I + J"));
    }

    #[test]
    fn trivial_ensures_gives_one_true_vc() {
        let v = vcs("Facility F;\n Operation Nop();\n ensures true;\n Procedure\n end Nop;\nend F;\n");
        assert_eq!(v.len(), 1);
        assert!(v[0].goal.is_true());
    }

    #[test]
    fn nested_if_in_loop_splits_paths() {
        let v = vcs("\
Facility F;
    Operation P(updates N: Integer);
        requires 0 <= N;
    Procedure
        While N /= 0
            maintaining 0 <= N;
            decreasing N;
        do
            If N <= 5 then
                If N <= 2 then N := N - 1; else N := N - 1; end;
            else
                N := N - 1;
            end;
        end;
    end P;
end F;
");
        let preserved = v
            .iter()
            .filter(|v| v.kind == VcKind::LoopInvariantPreservation)
            .count();
        assert_eq!(preserved, 3);
        assert!(v.iter().all(|v| !v.goal.contains_old()));
    }

    #[test]
    fn negation_is_pushed_into_relations() {
        let a = MathExp::int(1);
        let b = MathExp::int(2);
        assert_eq!(negate(&MathExp::ne(a.clone(), b.clone())), MathExp::eq(a.clone(), b.clone()));
        assert_eq!(negate(&MathExp::le(a.clone(), b.clone())), MathExp::lt(b, a));
    }
}
