//! Surface syntax tree. Names are unresolved and expressions untyped; the
//! checker turns this into a [`TypedModule`](super::TypedModule).

use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Pos {
        Pos { line, col }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

impl Ident {
    pub fn new(name: impl Into<String>, pos: Pos) -> Ident {
        Ident {
            name: name.into(),
            pos,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Concept,
    Enhancement,
    Realization,
    Facility,
}

impl ModuleKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ModuleKind::Concept => "Concept",
            ModuleKind::Enhancement => "Enhancement",
            ModuleKind::Realization => "Realization",
            ModuleKind::Facility => "Facility",
        }
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.keyword().to_lowercase())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Updates,
    Replaces,
    Restores,
    Preserves,
    Evaluates,
    Alters,
    Clears,
}

impl Mode {
    pub fn keyword(self) -> &'static str {
        match self {
            Mode::Updates => "updates",
            Mode::Replaces => "replaces",
            Mode::Restores => "restores",
            Mode::Preserves => "preserves",
            Mode::Evaluates => "evaluates",
            Mode::Alters => "alters",
            Mode::Clears => "clears",
        }
    }

    /// Whether a call may leave the argument with a different value.
    pub fn mutates(self) -> bool {
        matches!(
            self,
            Mode::Updates | Mode::Replaces | Mode::Alters | Mode::Clears
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    Type(Ident),
    Constant { name: Ident, ty: Ident },
}

/// Mathematical model named in `Type X is modeled by ...;`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelType {
    Int,
    Bool,
    Str(Ident),
    Entry(Ident),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceModule {
    pub kind: ModuleKind,
    pub name: Ident,
    pub params: Vec<Param>,
    /// Realization: the enhancement it implements.
    pub enhancement: Option<Ident>,
    /// Enhancement / realization: the concept it extends.
    pub concept: Option<Ident>,
    pub uses: Vec<Ident>,
    pub decls: Vec<Decl>,
    pub source_text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Decl {
    TypeModel { name: Ident, model: ModelType },
    Constraint(Expr),
    Operation(Operation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formal {
    pub mode: Mode,
    pub name: Ident,
    pub ty: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    pub name: Ident,
    pub formals: Vec<Formal>,
    pub result: Option<Ident>,
    pub requires: Option<Expr>,
    pub ensures: Option<Expr>,
    pub body: Option<Procedure>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Procedure {
    pub recursive: bool,
    pub decreasing: Option<Expr>,
    pub stmts: Vec<Stmt>,
    pub pos: Pos,
    pub end_pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Var {
        names: Vec<Ident>,
        ty: Ident,
    },
    Swap(Ident, Ident),
    Assign {
        target: Ident,
        value: Expr,
    },
    Call {
        name: Ident,
        args: Vec<Expr>,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        changing: Option<Vec<Ident>>,
        maintaining: Option<Expr>,
        decreasing: Option<Expr>,
        body: Vec<Stmt>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Implies,
    And,
    Eq,
    Ne,
    Le,
    Lt,
    Add,
    Sub,
    Concat,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "implies",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Concat => "o",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Le | BinOp::Lt => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Concat => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(BigInt),
    Bool(bool),
    Name(String),
    /// `#x`
    Old(String),
    Call(String, Vec<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `|x|`
    Len(Box<Expr>),
    /// `<x>`
    Singleton(Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Expr {
        Expr { kind, pos }
    }
}

/// Position-free copy used to compare trees structurally.
pub trait ClearPositions {
    fn clear_positions(&mut self);
}

impl ClearPositions for Ident {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
    }
}

impl<T: ClearPositions> ClearPositions for Vec<T> {
    fn clear_positions(&mut self) {
        self.iter_mut().for_each(T::clear_positions);
    }
}

impl<T: ClearPositions> ClearPositions for Option<T> {
    fn clear_positions(&mut self) {
        if let Some(x) = self {
            x.clear_positions();
        }
    }
}

impl ClearPositions for Expr {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
        match &mut self.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Name(_) | ExprKind::Old(_) => {}
            ExprKind::Call(_, args) => args.clear_positions(),
            ExprKind::Not(a) | ExprKind::Len(a) | ExprKind::Singleton(a) => a.clear_positions(),
            ExprKind::Binary(_, a, b) => {
                a.clear_positions();
                b.clear_positions();
            }
        }
    }
}

impl ClearPositions for Stmt {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
        match &mut self.kind {
            StmtKind::Var { names, ty } => {
                names.clear_positions();
                ty.clear_positions();
            }
            StmtKind::Swap(a, b) => {
                a.clear_positions();
                b.clear_positions();
            }
            StmtKind::Assign { target, value } => {
                target.clear_positions();
                value.clear_positions();
            }
            StmtKind::Call { name, args } => {
                name.clear_positions();
                args.clear_positions();
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                cond.clear_positions();
                then_branch.clear_positions();
                else_branch.clear_positions();
            }
            StmtKind::While {
                cond,
                changing,
                maintaining,
                decreasing,
                body,
            } => {
                cond.clear_positions();
                changing.clear_positions();
                maintaining.clear_positions();
                decreasing.clear_positions();
                body.clear_positions();
            }
        }
    }
}

impl ClearPositions for Param {
    fn clear_positions(&mut self) {
        match self {
            Param::Type(n) => n.clear_positions(),
            Param::Constant { name, ty } => {
                name.clear_positions();
                ty.clear_positions();
            }
        }
    }
}

impl ClearPositions for Formal {
    fn clear_positions(&mut self) {
        self.name.clear_positions();
        self.ty.clear_positions();
    }
}

impl ClearPositions for Procedure {
    fn clear_positions(&mut self) {
        self.pos = Pos::default();
        self.end_pos = Pos::default();
        self.decreasing.clear_positions();
        self.stmts.clear_positions();
    }
}

impl ClearPositions for Operation {
    fn clear_positions(&mut self) {
        self.name.clear_positions();
        self.formals.clear_positions();
        self.result.clear_positions();
        self.requires.clear_positions();
        self.ensures.clear_positions();
        self.body.clear_positions();
    }
}

impl ClearPositions for Decl {
    fn clear_positions(&mut self) {
        match self {
            Decl::TypeModel { name, model } => {
                name.clear_positions();
                if let ModelType::Str(t) | ModelType::Entry(t) = model {
                    t.clear_positions();
                }
            }
            Decl::Constraint(e) => e.clear_positions(),
            Decl::Operation(op) => op.clear_positions(),
        }
    }
}

impl ClearPositions for SourceModule {
    /// Also drops the source text, which the printer cannot reproduce.
    fn clear_positions(&mut self) {
        self.name.clear_positions();
        self.params.clear_positions();
        self.enhancement.clear_positions();
        self.concept.clear_positions();
        self.uses.clear_positions();
        self.decls.clear_positions();
        self.source_text.clear();
    }
}

impl SourceModule {
    pub fn operations(&self) -> impl Iterator<Item = &Operation> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Operation(op) => Some(op),
            _ => None,
        })
    }

    /// Number of lines in the source text (at least 1).
    pub fn line_count(&self) -> u32 {
        (self.source_text.lines().count() as u32).max(1)
    }
}
