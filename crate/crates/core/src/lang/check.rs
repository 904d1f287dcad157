//! Name resolution, sort checking and desugaring of executable code into
//! contract-bearing calls.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::ast::*;
use super::diag::Diagnostic;
use crate::math::{MathExp, Sort, Var};
use crate::theory::Library;

/// A formal parameter of an operation contract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractFormal {
    pub mode: Mode,
    pub name: String,
    pub ty: String,
    pub sort: Sort,
    pub line: u32,
}

/// Everything a caller may rely on about an operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contract {
    pub name: String,
    /// Component that declares the operation.
    pub owner: String,
    pub formals: Vec<ContractFormal>,
    /// Result type and sort of a function operation.
    pub result: Option<(String, Sort)>,
    /// Over formals at level 0 (their incoming values).
    pub requires: MathExp,
    /// Formals at level 0 denote outgoing values and `#x` incoming ones.
    pub ensures: MathExp,
    /// For functions: the right-hand side of `Name = e`.
    pub value: Option<MathExp>,
    pub line: u32,
    pub requires_line: u32,
    pub ensures_line: u32,
}

impl Contract {
    pub fn is_function(&self) -> bool {
        self.result.is_some()
    }

    pub fn formal(&self, name: &str) -> Option<&ContractFormal> {
        self.formals.iter().find(|f| f.name == name)
    }
}

/// Typed program expression: every operator is a call to a contract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PExp {
    Lit(MathExp),
    Var(String),
    Call {
        contract: Arc<Contract>,
        args: Vec<PExp>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CallArg {
    /// A variable passed to a non-`evaluates` formal.
    Var(String),
    Exp(PExp),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub cond: PExp,
    pub changing: Vec<String>,
    pub invariant: MathExp,
    pub invariant_line: u32,
    pub decreasing: MathExp,
    pub decreasing_line: u32,
    pub body: Vec<TStmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TStmtKind {
    Var { name: String, sort: Sort },
    Swap(String, String),
    Assign { target: String, value: PExp },
    Call {
        contract: Arc<Contract>,
        args: Vec<CallArg>,
        recursive: bool,
    },
    If {
        cond: PExp,
        then_branch: Vec<TStmt>,
        else_branch: Vec<TStmt>,
    },
    While(Box<Loop>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TStmt {
    pub kind: TStmtKind,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedProcedure {
    pub contract: Arc<Contract>,
    pub recursive: bool,
    /// Progress metric over the formals' entry values.
    pub decreasing: Option<MathExp>,
    pub body: Vec<TStmt>,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedModule {
    pub module: SourceModule,
    /// Program type → mathematical model.
    pub types: BTreeMap<String, Sort>,
    /// Every callable operation in scope, imported ones first.
    pub contracts: Vec<Arc<Contract>>,
    /// Module-level integer constants such as `Max_Depth`.
    pub constants: Vec<Var>,
    /// Concept constraints, available as givens.
    pub constraints: Vec<MathExp>,
    pub procedures: Vec<TypedProcedure>,
}

impl TypedModule {
    pub fn name(&self) -> &str {
        &self.module.name.name
    }

    pub fn contract(&self, name: &str) -> Option<&Arc<Contract>> {
        self.contracts.iter().find(|c| c.name == name)
    }
}

/// Initial value of a freshly declared variable, if the model fixes one.
pub fn initial_value(sort: &Sort) -> Option<MathExp> {
    match sort {
        Sort::Int => Some(MathExp::int(0)),
        Sort::Bool => Some(MathExp::Bool(false)),
        Sort::Str(_) => Some(MathExp::Empty),
        Sort::Entry(_) => None,
    }
}

fn err(msg: impl Into<String>, pos: Pos) -> Diagnostic {
    Diagnostic::error(msg, pos.line, pos.col)
}

// ---- assertions -----------------------------------------------------------

/// Names visible inside an assertion.
#[derive(Clone, Debug, Default)]
pub struct MathScope {
    /// What each name denotes.
    pub names: BTreeMap<String, MathExp>,
    /// Names that may carry `#`, with their sorts.
    pub olds: BTreeMap<String, Sort>,
    /// Explains where `#` is legal, for the diagnostic.
    pub old_hint: &'static str,
}

impl MathScope {
    pub fn bind(&mut self, name: &str, sort: Sort) {
        self.names
            .insert(name.to_string(), MathExp::Var(Var::new(name, sort)));
    }
}

fn sort_text(e: &MathExp) -> String {
    e.sort().map_or("?".to_string(), |s| s.to_string())
}

/// Lowers an assertion to a sort-checked mathematical expression.
pub fn lower_math(e: &Expr, scope: &MathScope) -> Result<MathExp, Diagnostic> {
    let out = match &e.kind {
        ExprKind::Int(n) => MathExp::Int(n.clone()),
        ExprKind::Bool(b) => MathExp::Bool(*b),
        ExprKind::Name(n) => match n.as_str() {
            "min_int" => MathExp::MinInt,
            "max_int" => MathExp::MaxInt,
            "empty_string" => MathExp::Empty,
            _ => scope
                .names
                .get(n)
                .cloned()
                .ok_or_else(|| err(format!("unresolved name `{n}`"), e.pos))?,
        },
        ExprKind::Old(n) => match scope.olds.get(n) {
            Some(sort) => MathExp::Old(Var::new(n, sort.clone())),
            None => {
                return Err(err(
                    format!("`#{n}` is not allowed here; {}", scope.old_hint),
                    e.pos,
                ))
            }
        },
        ExprKind::Call(name, args) if name == "Reverse" && args.len() == 1 => {
            MathExp::reverse(lower_math(&args[0], scope)?)
        }
        ExprKind::Call(name, _) => {
            return Err(err(
                format!("`{name}(...)` cannot be used in an assertion; only Reverse is a mathematical function"),
                e.pos,
            ))
        }
        ExprKind::Not(a) => MathExp::not(lower_math(a, scope)?),
        ExprKind::Len(a) => MathExp::len(lower_math(a, scope)?),
        ExprKind::Singleton(a) => MathExp::singleton(lower_math(a, scope)?),
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (lower_math(a, scope)?, lower_math(b, scope)?);
            match op {
                BinOp::Implies => MathExp::implies(a, b),
                BinOp::And => MathExp::and(a, b),
                BinOp::Eq => MathExp::eq(a, b),
                BinOp::Ne => MathExp::ne(a, b),
                BinOp::Le => MathExp::le(a, b),
                BinOp::Lt => MathExp::lt(a, b),
                BinOp::Add => MathExp::add(a, b),
                BinOp::Sub => MathExp::sub(a, b),
                BinOp::Concat => MathExp::concat(vec![a, b]),
            }
        }
    };
    if out.sort().is_none() {
        let detail = match &out {
            MathExp::Not(a) => format!("`not` needs a boolean, found {}", sort_text(a)),
            MathExp::And(a, b) | MathExp::Implies(a, b) => format!(
                "connective needs booleans, found {} and {}",
                sort_text(a),
                sort_text(b)
            ),
            MathExp::Eq(a, b) | MathExp::Ne(a, b) => {
                format!("cannot compare {} with {}", sort_text(a), sort_text(b))
            }
            MathExp::Reverse(a) | MathExp::Len(a) => {
                format!("expected a string, found {}", sort_text(a))
            }
            MathExp::Singleton(a) => format!("expected an entry, found {}", sort_text(a)),
            MathExp::Concat(_) => "concatenation needs strings of one entry type".to_string(),
            _ => "integer operator applied to a non-integer".to_string(),
        };
        return Err(err(format!("sort mismatch: {detail}"), e.pos));
    }
    Ok(out)
}

fn lower_bool(e: &Expr, scope: &MathScope, what: &str) -> Result<MathExp, Diagnostic> {
    let m = lower_math(e, scope)?;
    if m.sort() != Some(Sort::Bool) {
        return Err(err(format!("{what} must be a boolean assertion"), e.pos));
    }
    Ok(m)
}

// ---- modules ---------------------------------------------------------------

const INTEGER_COMPONENT: &str = "Integer_Template";

struct Checker<'a> {
    lib: &'a Library,
    errors: Vec<Diagnostic>,
    types: BTreeMap<String, Sort>,
    contracts: Vec<Arc<Contract>>,
    constants: Vec<Var>,
    constraints: Vec<MathExp>,
}

/// Resolves and checks one module against the library.
pub fn check_module(module: &SourceModule, lib: &Library) -> Result<TypedModule, Vec<Diagnostic>> {
    let mut ck = Checker {
        lib,
        errors: vec![],
        types: BTreeMap::new(),
        contracts: vec![],
        constants: vec![],
        constraints: vec![],
    };
    ck.imports(module);
    let procedures = ck.declarations(module);
    if !ck.errors.is_empty() {
        ck.errors.sort_by_key(|d| (d.line, d.column));
        ck.errors.dedup();
        return Err(ck.errors);
    }
    Ok(TypedModule {
        module: module.clone(),
        types: ck.types,
        contracts: ck.contracts,
        constants: ck.constants,
        constraints: ck.constraints,
        procedures,
    })
}

impl<'a> Checker<'a> {
    fn import(&mut self, comp: &TypedModule) {
        for (k, v) in &comp.types {
            self.types.entry(k.clone()).or_insert_with(|| v.clone());
        }
        for c in &comp.contracts {
            if !self
                .contracts
                .iter()
                .any(|d| d.owner == c.owner && d.name == c.name)
            {
                self.contracts.push(c.clone());
            }
        }
        for v in &comp.constants {
            if !self.constants.contains(v) {
                self.constants.push(v.clone());
            }
        }
        for c in &comp.constraints {
            if !self.constraints.contains(c) {
                self.constraints.push(c.clone());
            }
        }
    }

    fn imports(&mut self, m: &SourceModule) {
        if m.name.name != INTEGER_COMPONENT {
            if let Some(int) = self.lib.component(INTEGER_COMPONENT) {
                self.import(int);
            }
        }
        if let Some(c) = &m.concept {
            match self.lib.component(&c.name) {
                Some(comp) if comp.module.kind == ModuleKind::Concept => self.import(comp),
                Some(_) => self
                    .errors
                    .push(err(format!("`{}` is not a concept", c.name), c.pos)),
                None => self
                    .errors
                    .push(err(format!("unknown concept `{}`", c.name), c.pos)),
            }
        }
        for u in &m.uses {
            if let Some(comp) = self.lib.component(&u.name) {
                self.import(comp);
            } else if !self.lib.has_theory(&u.name) {
                self.errors.push(err(
                    format!("`uses {}`: no such theory or component in the library", u.name),
                    u.pos,
                ));
            }
        }
        for p in &m.params {
            match p {
                Param::Type(t) => {
                    self.types
                        .insert(t.name.clone(), Sort::Entry(t.name.clone()));
                }
                Param::Constant { name, ty } => match self.types.get(&ty.name) {
                    Some(Sort::Int) => self.constants.push(Var::new(&name.name, Sort::Int)),
                    _ => self.errors.push(err(
                        format!("constant `{}` must be an Integer", name.name),
                        ty.pos,
                    )),
                },
            }
        }
        for d in &m.decls {
            if let Decl::TypeModel { name, model } = d {
                let sort = match model {
                    ModelType::Int => Sort::Int,
                    ModelType::Bool => Sort::Bool,
                    ModelType::Str(t) | ModelType::Entry(t) => {
                        if !matches!(self.types.get(&t.name), Some(Sort::Entry(_))) {
                            self.errors
                                .push(err(format!("`{}` is not a type parameter", t.name), t.pos));
                        }
                        match model {
                            ModelType::Str(_) => Sort::Str(t.name.clone()),
                            _ => Sort::Entry(t.name.clone()),
                        }
                    }
                };
                self.types.insert(name.name.clone(), sort);
            }
        }
    }

    fn constant_scope(&self) -> MathScope {
        let mut s = MathScope {
            old_hint: "`#x` may only appear in ensures and maintaining clauses, for formal parameters",
            ..MathScope::default()
        };
        for c in &self.constants {
            s.bind(&c.name, c.sort.clone());
        }
        s
    }

    fn declarations(&mut self, m: &SourceModule) -> Vec<TypedProcedure> {
        for d in &m.decls {
            if let Decl::Constraint(e) = d {
                match lower_bool(e, &self.constant_scope(), "a constraint") {
                    Ok(c) => self.constraints.push(c),
                    Err(d) => self.errors.push(d),
                }
            }
        }
        let mut local = Vec::new();
        for op in m.operations() {
            if m.operations().filter(|o| o.name.name == op.name.name).count() > 1 {
                self.errors.push(err(
                    format!("operation `{}` is declared more than once", op.name.name),
                    op.name.pos,
                ));
                continue;
            }
            if let Some(c) = self.contract(op, &m.name.name) {
                let c = Arc::new(c);
                self.contracts.push(c.clone());
                local.push((op, c));
            }
        }
        let mut procs = Vec::new();
        for (op, contract) in local {
            let Some(body) = &op.body else { continue };
            match m.kind {
                ModuleKind::Concept | ModuleKind::Enhancement => {
                    self.errors.push(err(
                        format!("a {} cannot contain procedure bodies", m.kind),
                        body.pos,
                    ));
                }
                _ if contract.is_function() => self.errors.push(err(
                    "procedures for function operations are not supported",
                    body.pos,
                )),
                _ => {
                    if let Some(p) = self.procedure(contract, body) {
                        procs.push(p);
                    }
                }
            }
        }
        procs
    }

    fn resolve_type(&mut self, ty: &Ident) -> Option<Sort> {
        match self.types.get(&ty.name) {
            Some(s) => Some(s.clone()),
            None => {
                self.errors
                    .push(err(format!("unknown type `{}`", ty.name), ty.pos));
                None
            }
        }
    }

    fn contract(&mut self, op: &Operation, owner: &str) -> Option<Contract> {
        let before = self.errors.len();
        let mut formals = Vec::new();
        for f in &op.formals {
            if formals.iter().any(|g: &ContractFormal| g.name == f.name.name)
                || self.constants.iter().any(|c| c.name == f.name.name)
            {
                self.errors.push(err(
                    format!("parameter `{}` is declared twice", f.name.name),
                    f.name.pos,
                ));
            }
            if let Some(sort) = self.resolve_type(&f.ty) {
                formals.push(ContractFormal {
                    mode: f.mode,
                    name: f.name.name.clone(),
                    ty: f.ty.name.clone(),
                    sort,
                    line: f.name.pos.line,
                });
            }
        }
        let result = match &op.result {
            Some(t) => self.resolve_type(t).map(|s| Some((t.name.clone(), s))),
            None => Some(None),
        };
        if self.errors.len() > before {
            return None;
        }
        let result = result.unwrap();

        let mut scope = self.constant_scope();
        for f in &formals {
            scope.bind(&f.name, f.sort.clone());
        }
        let requires = match &op.requires {
            Some(e) => lower_bool(e, &scope, "a requires clause"),
            None => Ok(MathExp::tt()),
        };
        for f in &formals {
            scope.olds.insert(f.name.clone(), f.sort.clone());
        }
        if let Some((_, sort)) = &result {
            scope.bind(&op.name.name, sort.clone());
        }
        let ensures = match &op.ensures {
            Some(e) => lower_bool(e, &scope, "an ensures clause"),
            None => Ok(MathExp::tt()),
        };
        let (requires, ensures) = match (requires, ensures) {
            (Ok(r), Ok(e)) => (r, e),
            (r, e) => {
                self.errors.extend(r.err());
                self.errors.extend(e.err());
                return None;
            }
        };

        let mut value = None;
        if let Some((_, sort)) = &result {
            for f in &formals {
                if !matches!(f.mode, Mode::Restores | Mode::Preserves | Mode::Evaluates) {
                    self.errors.push(err(
                        format!(
                            "function `{}` may only take restores, preserves or evaluates parameters",
                            op.name.name
                        ),
                        op.name.pos,
                    ));
                    return None;
                }
            }
            let me = MathExp::Var(Var::new(&op.name.name, sort.clone()));
            match &ensures {
                MathExp::Eq(l, r) if **l == me && !r.any(&|x| *x == me) => {
                    value = Some((**r).clone())
                }
                _ => {
                    self.errors.push(err(
                        format!(
                            "a function's ensures clause must have the form `{} = <expression>`",
                            op.name.name
                        ),
                        op.ensures.as_ref().map_or(op.name.pos, |e| e.pos),
                    ));
                    return None;
                }
            }
        }
        Some(Contract {
            name: op.name.name.clone(),
            owner: owner.to_string(),
            formals,
            result,
            requires,
            ensures,
            value,
            line: op.name.pos.line,
            requires_line: op.requires.as_ref().map_or(op.name.pos.line, |e| e.pos.line),
            ensures_line: op.ensures.as_ref().map_or(op.name.pos.line, |e| e.pos.line),
        })
    }

    fn procedure(&mut self, contract: Arc<Contract>, body: &Procedure) -> Option<TypedProcedure> {
        let before = self.errors.len();
        let mut env = Env::default();
        for c in &self.constants {
            env.declare(&c.name, VarInfo::constant(c.sort.clone()));
        }
        for f in &contract.formals {
            env.declare(
                &f.name,
                VarInfo {
                    sort: f.sort.clone(),
                    ty: f.ty.clone(),
                    constant: false,
                },
            );
        }
        let decreasing = match (&body.decreasing, body.recursive) {
            (Some(d), true) => {
                let mut scope = env.math_scope(&contract, false);
                scope.olds.clear();
                match lower_math(d, &scope) {
                    Ok(m) if m.sort() == Some(Sort::Int) => Some(m),
                    Ok(_) => {
                        self.errors
                            .push(err("a decreasing metric must be an integer", d.pos));
                        None
                    }
                    Err(e) => {
                        self.errors.push(e);
                        None
                    }
                }
            }
            (None, true) => {
                self.errors.push(err(
                    "a recursive procedure needs a `decreasing` clause",
                    body.pos,
                ));
                None
            }
            (Some(d), false) => {
                self.errors.push(err(
                    "only a `Recursive Procedure` may carry a decreasing clause",
                    d.pos,
                ));
                None
            }
            (None, false) => None,
        };
        let mut cx = ProcCx {
            ck: self,
            contract: contract.clone(),
            recursive: body.recursive,
            env,
        };
        let stmts = cx.block(&body.stmts);
        if self.errors.len() > before {
            return None;
        }
        Some(TypedProcedure {
            contract,
            recursive: body.recursive,
            decreasing,
            body: stmts,
            line: body.pos.line,
        })
    }
}

// ---- procedure bodies --------------------------------------------------------

#[derive(Clone, Debug)]
struct VarInfo {
    sort: Sort,
    ty: String,
    constant: bool,
}

impl VarInfo {
    fn constant(sort: Sort) -> VarInfo {
        VarInfo {
            sort,
            ty: "Integer".into(),
            constant: true,
        }
    }
}

#[derive(Default)]
struct Env {
    scopes: Vec<BTreeMap<String, VarInfo>>,
    /// Every name ever declared in the procedure; names are never reused.
    all: BTreeSet<String>,
}

impl Env {
    fn declare(&mut self, name: &str, info: VarInfo) -> bool {
        if self.scopes.is_empty() {
            self.scopes.push(BTreeMap::new());
        }
        if !self.all.insert(name.to_string()) {
            return false;
        }
        self.scopes.last_mut().unwrap().insert(name.to_string(), info);
        true
    }

    fn get(&self, name: &str) -> Option<&VarInfo> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn math_scope(&self, contract: &Contract, with_olds: bool) -> MathScope {
        let mut s = MathScope {
            old_hint: "`#x` may only appear in ensures and maintaining clauses, for formal parameters",
            ..MathScope::default()
        };
        for scope in &self.scopes {
            for (n, info) in scope {
                s.bind(n, info.sort.clone());
            }
        }
        if with_olds {
            for f in &contract.formals {
                s.olds.insert(f.name.clone(), f.sort.clone());
            }
        }
        s
    }
}

struct ProcCx<'c, 'a> {
    ck: &'c mut Checker<'a>,
    contract: Arc<Contract>,
    recursive: bool,
    env: Env,
}

type CResult<T> = Result<T, Diagnostic>;

impl ProcCx<'_, '_> {
    fn block(&mut self, stmts: &[Stmt]) -> Vec<TStmt> {
        self.env.scopes.push(BTreeMap::new());
        let mut out = Vec::new();
        for s in stmts {
            match self.stmt(s) {
                Ok(mut t) => out.append(&mut t),
                Err(d) => self.ck.errors.push(d),
            }
        }
        self.env.scopes.pop();
        out
    }

    fn variable(&self, id: &Ident) -> CResult<VarInfo> {
        match self.env.get(&id.name) {
            Some(v) if v.constant => Err(err(
                format!("`{}` is a constant and cannot be modified", id.name),
                id.pos,
            )),
            Some(v) => Ok(v.clone()),
            None => Err(err(format!("unresolved variable `{}`", id.name), id.pos)),
        }
    }

    /// Candidate contracts named `name` whose formal types match `tys`.
    fn resolve(&self, name: &str, tys: &[Option<String>], pos: Pos) -> CResult<Arc<Contract>> {
        let named: Vec<&Arc<Contract>> = self
            .ck
            .contracts
            .iter()
            .filter(|c| c.name == name)
            .collect();
        if named.is_empty() {
            return Err(err(format!("unresolved operation `{name}`"), pos));
        }
        let fits: Vec<&&Arc<Contract>> = named
            .iter()
            .filter(|c| {
                c.formals.len() == tys.len()
                    && c
                        .formals
                        .iter()
                        .zip(tys)
                        .all(|(f, t)| t.as_ref().is_none_or(|t| *t == f.ty))
            })
            .collect();
        match fits.as_slice() {
            [one] => Ok((**one).clone()),
            [] => {
                let c = named[0];
                if c.formals.len() != tys.len() {
                    Err(err(
                        format!(
                            "`{name}` takes {} argument(s), {} given",
                            c.formals.len(),
                            tys.len()
                        ),
                        pos,
                    ))
                } else {
                    let sig: Vec<&str> = c.formals.iter().map(|f| f.ty.as_str()).collect();
                    Err(err(
                        format!("argument types do not match `{name}({})`", sig.join(", ")),
                        pos,
                    ))
                }
            }
            _ => Err(err(format!("call to `{name}` is ambiguous"), pos)),
        }
    }

    /// Program type of an expression without lowering it, where cheap.
    fn type_hint(&self, e: &Expr) -> Option<String> {
        match &e.kind {
            ExprKind::Name(n) => self.env.get(n).map(|v| v.ty.clone()),
            ExprKind::Int(_) => Some("Integer".into()),
            ExprKind::Bool(_) => Some("Boolean".into()),
            ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => Some("Integer".into()),
            ExprKind::Binary(..) => Some("Boolean".into()),
            ExprKind::Call(name, _) => self
                .ck
                .contracts
                .iter()
                .filter(|c| c.name == *name)
                .filter_map(|c| c.result.as_ref().map(|(t, _)| t.clone()))
                .next(),
            _ => None,
        }
    }

    /// Lowers an executable expression, returning it with its program type.
    fn prog(&self, e: &Expr) -> CResult<(PExp, String)> {
        match &e.kind {
            ExprKind::Int(n) => Ok((PExp::Lit(MathExp::Int(n.clone())), "Integer".into())),
            ExprKind::Bool(b) => Ok((PExp::Lit(MathExp::Bool(*b)), "Boolean".into())),
            ExprKind::Name(n) => match self.env.get(n) {
                Some(v) => Ok((PExp::Var(n.clone()), v.ty.clone())),
                None => Err(err(format!("unresolved variable `{n}`"), e.pos)),
            },
            ExprKind::Call(name, args) => self.function_call(name, args, e.pos),
            ExprKind::Binary(op, a, b) => {
                let name = match op {
                    BinOp::Add => "Sum",
                    BinOp::Sub => "Difference",
                    BinOp::Eq => "Are_Equal",
                    BinOp::Ne => "Are_Not_Equal",
                    BinOp::Le => "Less_Or_Equal",
                    BinOp::Lt => "Less",
                    _ => {
                        return Err(err(
                            format!("`{}` is not available in executable code", op.symbol()),
                            e.pos,
                        ))
                    }
                };
                let (pa, ta) = self.prog(a)?;
                let (pb, tb) = self.prog(b)?;
                let contract = self.resolve(name, &[Some(ta.clone()), Some(tb.clone())], e.pos)
                    .map_err(|_| {
                        err(
                            format!("`{}` is not defined for {ta} and {tb}", op.symbol()),
                            e.pos,
                        )
                    })?;
                let ty = contract.result.as_ref().unwrap().0.clone();
                Ok((
                    PExp::Call {
                        contract,
                        args: vec![pa, pb],
                    },
                    ty,
                ))
            }
            _ => Err(err("unsupported expression in executable code", e.pos)),
        }
    }

    fn function_call(&self, name: &str, args: &[Expr], pos: Pos) -> CResult<(PExp, String)> {
        let tys: Vec<Option<String>> = args.iter().map(|a| self.type_hint(a)).collect();
        let contract = self.resolve(name, &tys, pos)?;
        let Some((ty, _)) = &contract.result else {
            return Err(err(
                format!("`{name}` is a procedure and has no value"),
                pos,
            ));
        };
        if contract.name == self.contract.name && contract.owner == self.contract.owner {
            return Err(err("recursive function calls are not supported", pos));
        }
        let mut lowered = Vec::new();
        for (f, a) in contract.formals.iter().zip(args) {
            let (p, t) = self.prog(a)?;
            if t != f.ty {
                return Err(err(
                    format!("`{}` expects {} for `{}`, found {t}", name, f.ty, f.name),
                    a.pos,
                ));
            }
            if f.mode != Mode::Evaluates && !matches!(p, PExp::Var(_)) {
                return Err(err(
                    format!(
                        "argument for {} parameter `{}` must be a variable",
                        f.mode.keyword(),
                        f.name
                    ),
                    a.pos,
                ));
            }
            lowered.push(p);
        }
        Ok((
            PExp::Call {
                contract: contract.clone(),
                args: lowered,
            },
            ty.clone(),
        ))
    }

    fn stmt(&mut self, s: &Stmt) -> CResult<Vec<TStmt>> {
        let line = s.pos.line;
        let one = |kind| Ok(vec![TStmt { kind, line }]);
        match &s.kind {
            StmtKind::Var { names, ty } => {
                let sort = self
                    .ck
                    .types
                    .get(&ty.name)
                    .cloned()
                    .ok_or_else(|| err(format!("unknown type `{}`", ty.name), ty.pos))?;
                let mut out = Vec::new();
                for n in names {
                    let info = VarInfo {
                        sort: sort.clone(),
                        ty: ty.name.clone(),
                        constant: false,
                    };
                    if !self.env.declare(&n.name, info) {
                        return Err(err(format!("`{}` is already declared", n.name), n.pos));
                    }
                    out.push(TStmt {
                        kind: TStmtKind::Var {
                            name: n.name.clone(),
                            sort: sort.clone(),
                        },
                        line,
                    });
                }
                Ok(out)
            }
            StmtKind::Swap(a, b) => {
                let (va, vb) = (self.variable(a)?, self.variable(b)?);
                if a.name == b.name {
                    return Err(err("cannot swap a variable with itself", s.pos));
                }
                if va.ty != vb.ty {
                    return Err(err(
                        format!("cannot swap {} with {}", va.ty, vb.ty),
                        s.pos,
                    ));
                }
                one(TStmtKind::Swap(a.name.clone(), b.name.clone()))
            }
            StmtKind::Assign { target, value } => {
                let vt = self.variable(target)?;
                let (mut p, ty) = self.prog(value)?;
                if ty != vt.ty {
                    return Err(err(
                        format!("cannot assign {ty} to `{}` of type {}", target.name, vt.ty),
                        value.pos,
                    ));
                }
                if let PExp::Var(_) = p {
                    let replica = self.resolve("Replica", &[Some(ty.clone())], value.pos)
                        .map_err(|_| {
                            err(
                                format!("no Replica operation for {ty}; use `:=:` to move the value"),
                                value.pos,
                            )
                        })?;
                    p = PExp::Call {
                        contract: replica,
                        args: vec![p],
                    };
                }
                one(TStmtKind::Assign {
                    target: target.name.clone(),
                    value: p,
                })
            }
            StmtKind::Call { name, args } => {
                let tys: Vec<Option<String>> = args.iter().map(|a| self.type_hint(a)).collect();
                let contract = self.resolve(&name.name, &tys, name.pos)?;
                if contract.is_function() {
                    return Err(err(
                        format!("function `{}` cannot be called as a statement", name.name),
                        name.pos,
                    ));
                }
                let recursive =
                    contract.name == self.contract.name && contract.owner == self.contract.owner;
                if recursive && !self.recursive {
                    return Err(err(
                        format!(
                            "`{}` calls itself; declare it as a `Recursive Procedure` with a decreasing clause",
                            name.name
                        ),
                        name.pos,
                    ));
                }
                let mut out = Vec::new();
                let mut seen = BTreeSet::new();
                for (f, a) in contract.formals.iter().zip(args) {
                    if f.mode == Mode::Evaluates {
                        let (p, t) = self.prog(a)?;
                        if t != f.ty {
                            return Err(err(
                                format!("`{}` expects {} for `{}`, found {t}", name.name, f.ty, f.name),
                                a.pos,
                            ));
                        }
                        out.push(CallArg::Exp(p));
                        continue;
                    }
                    let ExprKind::Name(n) = &a.kind else {
                        return Err(err(
                            format!(
                                "argument for {} parameter `{}` must be a variable",
                                f.mode.keyword(),
                                f.name
                            ),
                            a.pos,
                        ));
                    };
                    let v = self.variable(&Ident::new(n.clone(), a.pos))?;
                    if v.ty != f.ty {
                        return Err(err(
                            format!("`{}` expects {} for `{}`, found {}", name.name, f.ty, f.name, v.ty),
                            a.pos,
                        ));
                    }
                    if !seen.insert(n.clone()) {
                        return Err(err(
                            format!("`{n}` is passed twice; arguments must be distinct variables"),
                            a.pos,
                        ));
                    }
                    out.push(CallArg::Var(n.clone()));
                }
                one(TStmtKind::Call {
                    contract,
                    args: out,
                    recursive,
                })
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let (c, ty) = self.prog(cond)?;
                if ty != "Boolean" {
                    return Err(err("an If condition must be a Boolean", cond.pos));
                }
                let then_branch = self.block(then_branch);
                let else_branch = match else_branch {
                    Some(b) => self.block(b),
                    None => vec![],
                };
                one(TStmtKind::If {
                    cond: c,
                    then_branch,
                    else_branch,
                })
            }
            StmtKind::While {
                cond,
                changing,
                maintaining,
                decreasing,
                body,
            } => {
                let (c, ty) = self.prog(cond)?;
                if ty != "Boolean" {
                    return Err(err("a While condition must be a Boolean", cond.pos));
                }
                let scope = self.env.math_scope(&self.contract, true);
                let (invariant, invariant_line) = match maintaining {
                    Some(m) => (lower_bool(m, &scope, "a maintaining clause")?, m.pos.line),
                    None => (MathExp::tt(), line),
                };
                let Some(d) = decreasing else {
                    return Err(err(
                        "a While loop needs a `decreasing` clause so termination can be stated",
                        s.pos,
                    ));
                };
                let mut dscope = scope.clone();
                dscope.olds.clear();
                let metric = lower_math(d, &dscope)?;
                if metric.sort() != Some(Sort::Int) {
                    return Err(err("a decreasing metric must be an integer", d.pos));
                }
                let body = self.block(body);
                let mut assigned = BTreeSet::new();
                assigned_vars(&body, &mut assigned);
                let changing = match changing {
                    Some(names) => {
                        let mut listed = Vec::new();
                        for n in names {
                            self.variable(n)?;
                            if !listed.contains(&n.name) {
                                listed.push(n.name.clone());
                            }
                        }
                        let missing: Vec<&String> =
                            assigned.iter().filter(|a| !listed.contains(a)).collect();
                        if !missing.is_empty() {
                            let names: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
                            return Err(err(
                                format!(
                                    "changing clause omits {} which the loop modifies",
                                    names.join(", ")
                                ),
                                names_pos(changing.as_deref(), s.pos),
                            ));
                        }
                        listed
                    }
                    None => assigned.into_iter().collect(),
                };
                one(TStmtKind::While(Box::new(Loop {
                    cond: c,
                    changing,
                    invariant,
                    invariant_line,
                    decreasing: metric,
                    decreasing_line: d.pos.line,
                    body,
                })))
            }
        }
    }
}

fn names_pos(names: Option<&[Ident]>, fallback: Pos) -> Pos {
    names.and_then(|n| n.first()).map_or(fallback, |n| n.pos)
}

/// Variables a statement list may modify, excluding ones it declares.
pub fn assigned_vars(stmts: &[TStmt], out: &mut BTreeSet<String>) {
    let mut local = BTreeSet::new();
    let mut touched = BTreeSet::new();
    for s in stmts {
        match &s.kind {
            TStmtKind::Var { name, .. } => {
                local.insert(name.clone());
            }
            TStmtKind::Swap(a, b) => {
                touched.insert(a.clone());
                touched.insert(b.clone());
            }
            TStmtKind::Assign { target, .. } => {
                touched.insert(target.clone());
            }
            TStmtKind::Call { contract, args, .. } => {
                for (f, a) in contract.formals.iter().zip(args) {
                    if let (true, CallArg::Var(n)) = (f.mode.mutates(), a) {
                        touched.insert(n.clone());
                    }
                }
            }
            TStmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                assigned_vars(then_branch, &mut touched);
                assigned_vars(else_branch, &mut touched);
            }
            TStmtKind::While(l) => {
                touched.extend(l.changing.iter().cloned());
            }
        }
    }
    out.extend(touched.into_iter().filter(|n| !local.contains(n)));
}
