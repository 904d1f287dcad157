//! Recursive-descent parser. The grammar is documented in
//! `docs/grammar.ebnf`; every production here is named after its rule there.

use super::ast::*;
use super::diag::Diagnostic;
use super::lexer::{tokenize, Kw, Sym, Tok, Token};

type PResult<T> = Result<T, Diagnostic>;

/// Names that only make sense in mathematical assertions.
const MATH_NAMES: [&str; 4] = ["min_int", "max_int", "empty_string", "Reverse"];

/// Tokenizes and parses one module.
pub fn parse(src: &str) -> Result<SourceModule, Vec<Diagnostic>> {
    let toks = tokenize(src)?;
    parse_module(&toks, src)
}

pub fn parse_module(tokens: &[Token], source_text: &str) -> Result<SourceModule, Vec<Diagnostic>> {
    let mut p = Parser::new(tokens);
    let mut m = p.module().map_err(|d| vec![d])?;
    m.source_text = source_text.to_string();
    Ok(m)
}

pub(crate) struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: &'a [Token]) -> Parser<'a> {
        Parser { toks, i: 0 }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.i + k).map(|t| &t.tok)
    }

    pub(crate) fn pos(&self) -> Pos {
        match self.toks.get(self.i) {
            Some(t) => Pos::new(t.line, t.col),
            None => self
                .toks
                .last()
                .map(|t| Pos::new(t.line, t.col + 1))
                .unwrap_or(Pos::new(1, 1)),
        }
    }

    pub(crate) fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let p = self.pos();
        Err(Diagnostic::error(msg, p.line, p.col))
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(Tok::Kw(k)) => format!("`{}`", k.as_str()),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(n)) => format!("`{n}`"),
            Some(Tok::Sym(s)) => format!("`{}`", s.as_str()),
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.describe()))
    }

    pub(crate) fn is_kw(&self, k: Kw) -> bool {
        self.peek() == Some(&Tok::Kw(k))
    }

    pub(crate) fn is_sym(&self, s: Sym) -> bool {
        self.peek() == Some(&Tok::Sym(s))
    }

    pub(crate) fn eat_kw(&mut self, k: Kw) -> bool {
        let hit = self.is_kw(k);
        if hit {
            self.i += 1;
        }
        hit
    }

    pub(crate) fn eat_sym(&mut self, s: Sym) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.i += 1;
        }
        hit
    }

    pub(crate) fn expect_kw(&mut self, k: Kw) -> PResult<Pos> {
        let p = self.pos();
        if self.eat_kw(k) {
            Ok(p)
        } else {
            self.unexpected(&format!("`{}`", k.as_str()))
        }
    }

    pub(crate) fn expect_sym(&mut self, s: Sym) -> PResult<Pos> {
        let p = self.pos();
        if self.eat_sym(s) {
            Ok(p)
        } else {
            self.unexpected(&format!("`{}`", s.as_str()))
        }
    }

    pub(crate) fn ident(&mut self) -> PResult<Ident> {
        let p = self.pos();
        match self.peek() {
            Some(Tok::Ident(name)) => {
                if name.contains('\'') {
                    return self.error(format!(
                        "`{name}`: prime characters are reserved for displaying values in VCs"
                    ));
                }
                self.i += 1;
                Ok(Ident::new(name.clone(), p))
            }
            _ => self.unexpected("an identifier"),
        }
    }

    pub(crate) fn ident_list(&mut self) -> PResult<Vec<Ident>> {
        let mut out = vec![self.ident()?];
        while self.eat_sym(Sym::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    // ---- modules -------------------------------------------------------

    fn module(&mut self) -> PResult<SourceModule> {
        let kind = match self.peek() {
            Some(Tok::Kw(Kw::Concept)) => ModuleKind::Concept,
            Some(Tok::Kw(Kw::Enhancement)) => ModuleKind::Enhancement,
            Some(Tok::Kw(Kw::Realization)) => ModuleKind::Realization,
            Some(Tok::Kw(Kw::Facility)) => ModuleKind::Facility,
            _ => {
                return self.unexpected("`Concept`, `Enhancement`, `Realization` or `Facility`")
            }
        };
        self.i += 1;
        let name = self.ident()?;
        let mut m = SourceModule {
            kind,
            name,
            params: vec![],
            enhancement: None,
            concept: None,
            uses: vec![],
            decls: vec![],
            source_text: String::new(),
        };
        match kind {
            ModuleKind::Concept => {
                if self.eat_sym(Sym::LParen) {
                    m.params.push(self.param()?);
                    while self.eat_sym(Sym::Semi) {
                        m.params.push(self.param()?);
                    }
                    self.expect_sym(Sym::RParen)?;
                }
            }
            ModuleKind::Enhancement => {
                self.expect_kw(Kw::For)?;
                m.concept = Some(self.ident()?);
            }
            ModuleKind::Realization => {
                self.expect_kw(Kw::For)?;
                m.enhancement = Some(self.ident()?);
                self.expect_kw(Kw::Of)?;
                m.concept = Some(self.ident()?);
            }
            ModuleKind::Facility => {}
        }
        self.expect_sym(Sym::Semi)?;
        while self.eat_kw(Kw::Uses) {
            m.uses.extend(self.ident_list()?);
            self.expect_sym(Sym::Semi)?;
        }
        loop {
            match self.peek() {
                Some(Tok::Kw(Kw::Operation)) => m.decls.push(Decl::Operation(self.operation()?)),
                Some(Tok::Kw(Kw::Type)) if kind == ModuleKind::Concept => {
                    m.decls.push(self.type_model()?)
                }
                Some(Tok::Kw(Kw::Constraint)) if kind == ModuleKind::Concept => {
                    self.i += 1;
                    let e = self.expr(true)?;
                    self.expect_sym(Sym::Semi)?;
                    m.decls.push(Decl::Constraint(e));
                }
                Some(Tok::Kw(Kw::End)) => break,
                _ => return self.unexpected("`Operation` or `end`"),
            }
        }
        self.end_named(&m.name.name)?;
        if !self.at_end() {
            return self.unexpected("end of input after the module");
        }
        Ok(m)
    }

    fn end_named(&mut self, name: &str) -> PResult<Pos> {
        let p = self.expect_kw(Kw::End)?;
        let closing = self.ident()?;
        if closing.name != name {
            return Err(Diagnostic::error(
                format!("`end {}` does not match `{name}`", closing.name),
                closing.pos.line,
                closing.pos.col,
            ));
        }
        self.expect_sym(Sym::Semi)?;
        Ok(p)
    }

    fn param(&mut self) -> PResult<Param> {
        if self.eat_kw(Kw::TypeParam) {
            return Ok(Param::Type(self.ident()?));
        }
        self.expect_kw(Kw::Evaluates)?;
        let name = self.ident()?;
        self.expect_sym(Sym::Colon)?;
        let ty = self.ident()?;
        Ok(Param::Constant { name, ty })
    }

    fn type_model(&mut self) -> PResult<Decl> {
        self.expect_kw(Kw::Type)?;
        let name = self.ident()?;
        self.expect_kw(Kw::Is)?;
        self.expect_kw(Kw::Modeled)?;
        self.expect_kw(Kw::By)?;
        let head = self.ident()?;
        let model = match head.name.as_str() {
            "Z" => ModelType::Int,
            "B" => ModelType::Bool,
            "Str" => {
                self.expect_sym(Sym::LParen)?;
                let t = self.ident()?;
                self.expect_sym(Sym::RParen)?;
                ModelType::Str(t)
            }
            _ => ModelType::Entry(head),
        };
        self.expect_sym(Sym::Semi)?;
        Ok(Decl::TypeModel { name, model })
    }

    fn operation(&mut self) -> PResult<Operation> {
        self.expect_kw(Kw::Operation)?;
        let name = self.ident()?;
        self.expect_sym(Sym::LParen)?;
        let mut formals = vec![];
        if !self.is_sym(Sym::RParen) {
            loop {
                let mode = self.mode()?;
                let names = self.ident_list()?;
                self.expect_sym(Sym::Colon)?;
                let ty = self.ident()?;
                for n in names {
                    formals.push(Formal {
                        mode,
                        name: n,
                        ty: ty.clone(),
                    });
                }
                if !self.eat_sym(Sym::Semi) {
                    break;
                }
            }
        }
        self.expect_sym(Sym::RParen)?;
        let result = if self.eat_sym(Sym::Colon) {
            Some(self.ident()?)
        } else {
            None
        };
        self.expect_sym(Sym::Semi)?;
        let requires = self.clause(Kw::Requires)?;
        let ensures = self.clause(Kw::Ensures)?;
        let body = if self.is_kw(Kw::Procedure) || self.is_kw(Kw::Recursive) {
            Some(self.procedure(&name.name)?)
        } else {
            None
        };
        Ok(Operation {
            name,
            formals,
            result,
            requires,
            ensures,
            body,
        })
    }

    fn clause(&mut self, kw: Kw) -> PResult<Option<Expr>> {
        if !self.eat_kw(kw) {
            return Ok(None);
        }
        let e = self.expr(true)?;
        self.expect_sym(Sym::Semi)?;
        Ok(Some(e))
    }

    fn mode(&mut self) -> PResult<Mode> {
        let m = match self.peek() {
            Some(Tok::Kw(Kw::Updates)) => Mode::Updates,
            Some(Tok::Kw(Kw::Replaces)) => Mode::Replaces,
            Some(Tok::Kw(Kw::Restores)) => Mode::Restores,
            Some(Tok::Kw(Kw::Preserves)) => Mode::Preserves,
            Some(Tok::Kw(Kw::Evaluates)) => Mode::Evaluates,
            Some(Tok::Kw(Kw::Alters)) => Mode::Alters,
            Some(Tok::Kw(Kw::Clears)) => Mode::Clears,
            _ => return self.unexpected("a parameter mode"),
        };
        self.i += 1;
        Ok(m)
    }

    fn procedure(&mut self, op_name: &str) -> PResult<Procedure> {
        let pos = self.pos();
        let recursive = self.eat_kw(Kw::Recursive);
        self.expect_kw(Kw::Procedure)?;
        let decreasing = self.clause(Kw::Decreasing)?;
        let stmts = self.stmts()?;
        let end_pos = self.end_named(op_name)?;
        Ok(Procedure {
            recursive,
            decreasing,
            stmts,
            pos,
            end_pos,
        })
    }

    // ---- statements ----------------------------------------------------

    fn stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = vec![];
        while !(self.is_kw(Kw::End) || self.is_kw(Kw::Else) || self.at_end()) {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let kind = match self.peek() {
            Some(Tok::Kw(Kw::Var)) => {
                self.i += 1;
                let names = self.ident_list()?;
                self.expect_sym(Sym::Colon)?;
                let ty = self.ident()?;
                StmtKind::Var { names, ty }
            }
            Some(Tok::Kw(Kw::If)) => {
                self.i += 1;
                let cond = self.expr(false)?;
                self.expect_kw(Kw::Then)?;
                let then_branch = self.stmts()?;
                let else_branch = if self.eat_kw(Kw::Else) {
                    Some(self.stmts()?)
                } else {
                    None
                };
                self.expect_kw(Kw::End)?;
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Some(Tok::Kw(Kw::While)) => {
                self.i += 1;
                let cond = self.expr(false)?;
                let changing = if self.eat_kw(Kw::Changing) {
                    let names = self.ident_list()?;
                    self.expect_sym(Sym::Semi)?;
                    Some(names)
                } else {
                    None
                };
                let maintaining = self.clause(Kw::Maintaining)?;
                let decreasing = self.clause(Kw::Decreasing)?;
                self.expect_kw(Kw::Do)?;
                let body = self.stmts()?;
                self.expect_kw(Kw::End)?;
                StmtKind::While {
                    cond,
                    changing,
                    maintaining,
                    decreasing,
                    body,
                }
            }
            Some(Tok::Ident(_)) => {
                let target = self.ident()?;
                if self.eat_sym(Sym::Swap) {
                    StmtKind::Swap(target, self.ident()?)
                } else if self.eat_sym(Sym::Assign) {
                    StmtKind::Assign {
                        target,
                        value: self.expr(false)?,
                    }
                } else if self.is_sym(Sym::LParen) {
                    let args = self.args(false)?;
                    StmtKind::Call { name: target, args }
                } else {
                    return self.unexpected("`:=:`, `:=` or `(`");
                }
            }
            _ => return self.unexpected("a statement"),
        };
        self.expect_sym(Sym::Semi)?;
        Ok(Stmt { kind, pos })
    }

    fn args(&mut self, math: bool) -> PResult<Vec<Expr>> {
        self.expect_sym(Sym::LParen)?;
        let mut args = vec![];
        if !self.is_sym(Sym::RParen) {
            args.push(self.expr(math)?);
            while self.eat_sym(Sym::Comma) {
                args.push(self.expr(math)?);
            }
        }
        self.expect_sym(Sym::RParen)?;
        Ok(args)
    }

    // ---- expressions ---------------------------------------------------

    /// Parses an expression. With `math` false the expression is in an
    /// executable position and assertion-only notation is rejected.
    pub(crate) fn expr(&mut self, math: bool) -> PResult<Expr> {
        self.implies(math)
    }

    fn math_only(&self, what: &str, math: bool) -> PResult<()> {
        if math {
            Ok(())
        } else {
            self.error(format!(
                "`{what}` is mathematical notation and may only appear in assertions"
            ))
        }
    }

    fn implies(&mut self, math: bool) -> PResult<Expr> {
        let lhs = self.and(math)?;
        if self.is_kw(Kw::Implies) {
            self.math_only("implies", math)?;
            let pos = self.pos();
            self.i += 1;
            let rhs = self.implies(math)?;
            return Ok(Expr::new(
                ExprKind::Binary(BinOp::Implies, Box::new(lhs), Box::new(rhs)),
                pos,
            ));
        }
        Ok(lhs)
    }

    fn and(&mut self, math: bool) -> PResult<Expr> {
        let mut lhs = self.relation(math)?;
        while self.is_kw(Kw::And) {
            self.math_only("and", math)?;
            let pos = self.pos();
            self.i += 1;
            let rhs = self.relation(math)?;
            lhs = Expr::new(ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    fn rel_op(&self) -> Option<BinOp> {
        match self.peek() {
            Some(Tok::Sym(Sym::Eq)) => Some(BinOp::Eq),
            Some(Tok::Sym(Sym::Ne)) => Some(BinOp::Ne),
            Some(Tok::Sym(Sym::Le)) => Some(BinOp::Le),
            Some(Tok::Sym(Sym::Lt)) => Some(BinOp::Lt),
            _ => None,
        }
    }

    fn relation(&mut self, math: bool) -> PResult<Expr> {
        let lhs = self.additive(math)?;
        let Some(op) = self.rel_op() else {
            return Ok(lhs);
        };
        let pos = self.pos();
        self.i += 1;
        let rhs = self.additive(math)?;
        if self.rel_op().is_some() {
            return self.error("comparisons do not chain; use `and`");
        }
        Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos))
    }

    fn additive(&mut self, math: bool) -> PResult<Expr> {
        let mut lhs = self.concat(math)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(Sym::Plus)) => BinOp::Add,
                Some(Tok::Sym(Sym::Minus)) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.i += 1;
            let rhs = self.concat(math)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn concat(&mut self, math: bool) -> PResult<Expr> {
        let mut lhs = self.unary(math)?;
        while self.is_sym(Sym::Concat) {
            self.math_only("o", math)?;
            let pos = self.pos();
            self.i += 1;
            let rhs = self.unary(math)?;
            lhs = Expr::new(
                ExprKind::Binary(BinOp::Concat, Box::new(lhs), Box::new(rhs)),
                pos,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self, math: bool) -> PResult<Expr> {
        if self.is_kw(Kw::Not) {
            self.math_only("not", math)?;
            let pos = self.pos();
            self.i += 1;
            let inner = self.unary(math)?;
            return Ok(Expr::new(ExprKind::Not(Box::new(inner)), pos));
        }
        self.primary(math)
    }

    fn primary(&mut self, math: bool) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Int(n)) => {
                self.i += 1;
                Ok(Expr::new(ExprKind::Int(n.clone()), pos))
            }
            Some(Tok::Sym(Sym::Minus)) => match self.peek_at(1) {
                Some(Tok::Int(n)) => {
                    self.i += 2;
                    Ok(Expr::new(ExprKind::Int(-n.clone()), pos))
                }
                _ => self.error("unary minus applies only to integer literals"),
            },
            Some(Tok::Kw(Kw::True)) => {
                self.i += 1;
                Ok(Expr::new(ExprKind::Bool(true), pos))
            }
            Some(Tok::Kw(Kw::False)) => {
                self.i += 1;
                Ok(Expr::new(ExprKind::Bool(false), pos))
            }
            Some(Tok::Ident(name)) => {
                if MATH_NAMES.contains(&name.as_str()) {
                    self.math_only(name, math)?;
                }
                let id = self.ident()?;
                if self.is_sym(Sym::LParen) {
                    let args = self.args(math)?;
                    Ok(Expr::new(ExprKind::Call(id.name, args), pos))
                } else {
                    Ok(Expr::new(ExprKind::Name(id.name), pos))
                }
            }
            Some(Tok::Sym(Sym::Hash)) => {
                self.math_only("#", math)?;
                self.i += 1;
                let id = self.ident()?;
                Ok(Expr::new(ExprKind::Old(id.name), pos))
            }
            Some(Tok::Sym(Sym::LParen)) => {
                self.i += 1;
                let inner = self.expr(math)?;
                self.expect_sym(Sym::RParen)?;
                Ok(inner)
            }
            Some(Tok::Sym(Sym::Bar)) => {
                self.math_only("| |", math)?;
                self.i += 1;
                let inner = self.concat(math)?;
                self.expect_sym(Sym::Bar)?;
                Ok(Expr::new(ExprKind::Len(Box::new(inner)), pos))
            }
            Some(Tok::Sym(Sym::Lt)) => {
                self.math_only("< >", math)?;
                self.i += 1;
                let inner = self.concat(math)?;
                self.expect_sym(Sym::Gt)?;
                Ok(Expr::new(ExprKind::Singleton(Box::new(inner)), pos))
            }
            _ => self.unexpected("an expression"),
        }
    }

    // ---- helpers for theory files ---------------------------------------

    /// True when the upcoming tokens are `x, y, ... :` — a group of
    /// sorted variable names rather than the start of an expression.
    pub(crate) fn at_sorted_group(&self) -> bool {
        let mut k = 0;
        loop {
            match self.peek_at(k) {
                Some(Tok::Ident(_)) => {}
                _ => return false,
            }
            match self.peek_at(k + 1) {
                Some(Tok::Sym(Sym::Colon)) => return true,
                Some(Tok::Sym(Sym::Comma)) => k += 2,
                _ => return false,
            }
        }
    }
}
