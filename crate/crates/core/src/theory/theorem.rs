use std::collections::BTreeSet;
use std::fmt;

use crate::lang::lexer::{tokenize, Kw, Sym};
use crate::lang::parser::Parser;
use crate::lang::{lower_math, Diagnostic, MathScope};
use crate::math::{MathExp, Sort, Var};

/// A universally quantified fact, instantiated by matching its triggers
/// against ground terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theorem {
    pub name: String,
    pub universals: Vec<Var>,
    pub hypothesis: Option<MathExp>,
    pub conclusion: MathExp,
    /// Alternative patterns; each one binds every universal on its own.
    pub triggers: Vec<MathExp>,
    pub line: u32,
}

impl Theorem {
    /// Hypothesis conjuncts (empty when there is none).
    pub fn hypotheses(&self) -> Vec<MathExp> {
        self.hypothesis
            .as_ref()
            .map_or_else(Vec::new, MathExp::split_conjuncts)
    }

    pub fn is_ground(&self) -> bool {
        self.universals.is_empty()
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Theorem {}: ", self.name)?;
        if !self.universals.is_empty() {
            write!(f, "For all ")?;
            let mut i = 0;
            while i < self.universals.len() {
                let sort = &self.universals[i].sort;
                let mut j = i;
                while j < self.universals.len() && self.universals[j].sort == *sort {
                    j += 1;
                }
                let names: Vec<&str> = self.universals[i..j]
                    .iter()
                    .map(|v| v.name.as_str())
                    .collect();
                write!(f, "{} : {}, ", names.join(", "), sort_name(sort))?;
                i = j;
            }
        }
        if let Some(h) = &self.hypothesis {
            write!(f, "if {h} then ")?;
        }
        write!(f, "{}", self.conclusion)?;
        if !self.triggers.is_empty() {
            let ts: Vec<String> = self.triggers.iter().map(|t| t.to_string()).collect();
            write!(f, " triggers {}", ts.join(", "))?;
        }
        write!(f, ";")
    }
}

fn sort_name(s: &Sort) -> &'static str {
    match s {
        Sort::Bool => "B",
        Sort::Int => "Z",
        Sort::Str(_) => "Str",
        Sort::Entry(_) => "Entry",
    }
}

fn parse_sort(name: &str) -> Option<Sort> {
    match name {
        "B" => Some(Sort::Bool),
        "Z" => Some(Sort::Int),
        "Str" => Some(Sort::any_str()),
        "Entry" => Some(Sort::any_entry()),
        _ => None,
    }
}

fn is_relational(e: &MathExp) -> bool {
    matches!(
        e,
        MathExp::Eq(..) | MathExp::Ne(..) | MathExp::Le(..) | MathExp::Lt(..)
    )
}

fn bound_names(e: &MathExp) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    e.collect(&mut |x| {
        if let MathExp::Bound(v) = x {
            out.insert(v.name.clone());
        }
    });
    out
}

/// Default triggers: the first application subterm (pre-order over the
/// conclusion, then the hypothesis) that mentions every universal. A
/// ground theorem with no applications is triggered by its first constant.
fn auto_trigger(universals: &[Var], hyp: Option<&MathExp>, concl: &MathExp) -> Option<MathExp> {
    let all: BTreeSet<String> = universals.iter().map(|v| v.name.clone()).collect();
    let mut found = None;
    let mut leaf = None;
    let mut visit = |e: &MathExp| {
        let app = matches!(
            e,
            MathExp::Reverse(_)
                | MathExp::Len(_)
                | MathExp::Singleton(_)
                | MathExp::Concat(_)
                | MathExp::Add(..)
                | MathExp::Sub(..)
        );
        if found.is_none() && app && bound_names(e) == all {
            found = Some(e.clone());
        }
        if leaf.is_none() && all.is_empty() && matches!(e, MathExp::MinInt | MathExp::MaxInt | MathExp::Empty) {
            leaf = Some(e.clone());
        }
    };
    concl.collect(&mut visit);
    if let Some(h) = hyp {
        h.collect(&mut visit);
    }
    found.or(leaf)
}

/// Parses a theory file: a sequence of `Theorem` stanzas.
pub fn parse_theory(src: &str) -> Result<Vec<Theorem>, Vec<Diagnostic>> {
    let toks = tokenize(src)?;
    let mut p = Parser::new(&toks);
    let mut out: Vec<Theorem> = Vec::new();
    let mut errors = Vec::new();
    while !p.at_end() {
        match theorem(&mut p) {
            Ok(t) => {
                if out.iter().any(|o| o.name == t.name) {
                    errors.push(Diagnostic::error(
                        format!("theorem `{}` is defined twice", t.name),
                        t.line,
                        1,
                    ));
                }
                out.push(t);
            }
            Err(d) => {
                errors.push(d);
                break;
            }
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

fn theorem(p: &mut Parser<'_>) -> Result<Theorem, Diagnostic> {
    let start = p.expect_kw(Kw::Theorem)?;
    let name = p.ident()?;
    p.expect_sym(Sym::Colon)?;
    let mut universals: Vec<Var> = Vec::new();
    if p.eat_kw(Kw::ForAll) {
        p.expect_kw(Kw::All)?;
        loop {
            let names = p.ident_list()?;
            p.expect_sym(Sym::Colon)?;
            let sort_id = p.ident()?;
            let Some(sort) = parse_sort(&sort_id.name) else {
                return Err(Diagnostic::error(
                    format!("unknown sort `{}`; expected Str, Entry, Z or B", sort_id.name),
                    sort_id.pos.line,
                    sort_id.pos.col,
                ));
            };
            for n in names {
                if universals.iter().any(|u| u.name == n.name) {
                    return Err(Diagnostic::error(
                        format!("`{}` is quantified twice", n.name),
                        n.pos.line,
                        n.pos.col,
                    ));
                }
                universals.push(Var::new(n.name, sort.clone()));
            }
            p.expect_sym(Sym::Comma)?;
            if !p.at_sorted_group() {
                break;
            }
        }
    }
    let mut scope = MathScope {
        old_hint: "theorems cannot refer to incoming values",
        ..MathScope::default()
    };
    for u in &universals {
        scope
            .names
            .insert(u.name.clone(), MathExp::Bound(u.clone()));
    }
    let hyp_expr = if p.eat_kw(Kw::IfMath) {
        let h = p.expr(true)?;
        p.expect_kw(Kw::Then)?;
        Some(h)
    } else {
        None
    };
    let concl_expr = p.expr(true)?;
    let mut trigger_exprs = Vec::new();
    if p.eat_kw(Kw::Triggers) {
        trigger_exprs.push(p.expr(true)?);
        while p.eat_sym(Sym::Comma) {
            trigger_exprs.push(p.expr(true)?);
        }
    }
    p.expect_sym(Sym::Semi)?;

    let fail = |msg: String, line: u32, col: u32| Err(Diagnostic::error(msg, line, col));
    let hypothesis = match &hyp_expr {
        Some(h) => {
            let m = lower_math(h, &scope)?;
            if m.split_conjuncts().iter().any(|c| !is_relational(c)) {
                return fail(
                    "a hypothesis must be a conjunction of (in)equalities".into(),
                    h.pos.line,
                    h.pos.col,
                );
            }
            Some(m)
        }
        None => None,
    };
    let conclusion = lower_math(&concl_expr, &scope)?;
    if !is_relational(&conclusion) {
        return fail(
            "a conclusion must be a single equality or relation".into(),
            concl_expr.pos.line,
            concl_expr.pos.col,
        );
    }
    let all: BTreeSet<String> = universals.iter().map(|v| v.name.clone()).collect();
    for u in &all {
        let used = bound_names(&conclusion).contains(u)
            || hypothesis.as_ref().is_some_and(|h| bound_names(h).contains(u));
        if !used {
            return fail(format!("`{u}` is quantified but never used"), start.line, start.col);
        }
    }
    let mut triggers = Vec::new();
    for t in &trigger_exprs {
        let m = lower_math(t, &scope)?;
        if matches!(m, MathExp::Bound(_)) {
            return fail(
                "a trigger cannot be a lone variable; it would match every term".into(),
                t.pos.line,
                t.pos.col,
            );
        }
        let missing: Vec<String> = all.difference(&bound_names(&m)).cloned().collect();
        if !missing.is_empty() {
            return fail(
                format!("trigger `{m}` does not bind {}", missing.join(", ")),
                t.pos.line,
                t.pos.col,
            );
        }
        triggers.push(m);
    }
    if triggers.is_empty() {
        match auto_trigger(&universals, hypothesis.as_ref(), &conclusion) {
            Some(t) => triggers.push(t),
            None => {
                return fail(
                    format!("no subterm of `{}` can serve as a trigger; add a triggers list", name.name),
                    start.line,
                    start.col,
                )
            }
        }
    }
    Ok(Theorem {
        name: name.name,
        universals,
        hypothesis,
        conclusion,
        triggers,
        line: start.line,
    })
}
