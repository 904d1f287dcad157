//! Pretty-printer for the surface syntax. Re-parsing the output yields the
//! same tree up to source positions.

use std::fmt::Write;

use num_traits::Signed;

use super::ast::*;

const PRIMARY: u8 = 7;
const CONCAT: u8 = 6;

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(e, 0, &mut s);
    s
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Int(n) if n.is_negative() => PRIMARY,
        _ => PRIMARY,
    }
}

/// Writes `e`, parenthesized when its precedence is below `min`.
fn expr(e: &Expr, min: u8, out: &mut String) {
    let p = prec(e);
    if p < min {
        out.push('(');
        expr(e, 0, out);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Int(n) if n.is_negative() => write!(out, "({n})").unwrap(),
        ExprKind::Int(n) => write!(out, "{n}").unwrap(),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::Old(n) => write!(out, "#{n}").unwrap(),
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(a, 0, out);
            }
            out.push(')');
        }
        ExprKind::Not(a) => {
            out.push_str("not ");
            expr(a, PRIMARY, out);
        }
        ExprKind::Len(a) => {
            out.push('|');
            expr(a, CONCAT, out);
            out.push('|');
        }
        ExprKind::Singleton(a) => {
            out.push('<');
            expr(a, CONCAT, out);
            out.push('>');
        }
        ExprKind::Binary(op, a, b) => {
            let (lmin, rmin) = match op {
                BinOp::Implies => (p + 1, p),
                BinOp::Eq | BinOp::Ne | BinOp::Le | BinOp::Lt => (p + 1, p + 1),
                _ => (p, p + 1),
            };
            expr(a, lmin, out);
            write!(out, " {} ", op.symbol()).unwrap();
            expr(b, rmin, out);
        }
    }
}

pub fn print_module(m: &SourceModule) -> String {
    let mut out = String::new();
    write!(out, "{} {}", m.kind.keyword(), m.name.name).unwrap();
    if !m.params.is_empty() {
        let ps: Vec<String> = m
            .params
            .iter()
            .map(|p| match p {
                Param::Type(n) => format!("type {}", n.name),
                Param::Constant { name, ty } => format!("evaluates {}: {}", name.name, ty.name),
            })
            .collect();
        write!(out, "({})", ps.join("; ")).unwrap();
    }
    if let Some(e) = &m.enhancement {
        write!(out, " for {}", e.name).unwrap();
        if let Some(c) = &m.concept {
            write!(out, " of {}", c.name).unwrap();
        }
    } else if let Some(c) = &m.concept {
        write!(out, " for {}", c.name).unwrap();
    }
    out.push_str(";\n");
    if !m.uses.is_empty() {
        let names: Vec<&str> = m.uses.iter().map(|u| u.name.as_str()).collect();
        writeln!(out, "    uses {};", names.join(", ")).unwrap();
    }
    for d in &m.decls {
        out.push('\n');
        match d {
            Decl::TypeModel { name, model } => {
                let model = match model {
                    ModelType::Int => "Z".to_string(),
                    ModelType::Bool => "B".to_string(),
                    ModelType::Str(t) => format!("Str({})", t.name),
                    ModelType::Entry(t) => t.name.clone(),
                };
                writeln!(out, "    Type {} is modeled by {model};", name.name).unwrap();
            }
            Decl::Constraint(e) => writeln!(out, "    constraint {};", print_expr(e)).unwrap(),
            Decl::Operation(op) => operation(op, &mut out),
        }
    }
    writeln!(out, "end {};", m.name.name).unwrap();
    out
}

fn operation(op: &Operation, out: &mut String) {
    let formals: Vec<String> = op
        .formals
        .iter()
        .map(|f| format!("{} {}: {}", f.mode.keyword(), f.name.name, f.ty.name))
        .collect();
    write!(out, "    Operation {}({})", op.name.name, formals.join("; ")).unwrap();
    if let Some(r) = &op.result {
        write!(out, ": {}", r.name).unwrap();
    }
    out.push_str(";\n");
    if let Some(e) = &op.requires {
        writeln!(out, "        requires {};", print_expr(e)).unwrap();
    }
    if let Some(e) = &op.ensures {
        writeln!(out, "        ensures {};", print_expr(e)).unwrap();
    }
    if let Some(body) = &op.body {
        out.push_str("    ");
        if body.recursive {
            out.push_str("Recursive ");
        }
        out.push_str("Procedure\n");
        if let Some(d) = &body.decreasing {
            writeln!(out, "        decreasing {};", print_expr(d)).unwrap();
        }
        stmts(&body.stmts, 2, out);
        writeln!(out, "    end {};", op.name.name).unwrap();
    }
}

fn stmts(list: &[Stmt], depth: usize, out: &mut String) {
    for s in list {
        stmt(s, depth, out);
    }
}

fn stmt(s: &Stmt, depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    match &s.kind {
        StmtKind::Var { names, ty } => {
            let names: Vec<&str> = names.iter().map(|n| n.name.as_str()).collect();
            writeln!(out, "{pad}Var {}: {};", names.join(", "), ty.name).unwrap();
        }
        StmtKind::Swap(a, b) => writeln!(out, "{pad}{} :=: {};", a.name, b.name).unwrap(),
        StmtKind::Assign { target, value } => {
            writeln!(out, "{pad}{} := {};", target.name, print_expr(value)).unwrap()
        }
        StmtKind::Call { name, args } => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            writeln!(out, "{pad}{}({});", name.name, args.join(", ")).unwrap();
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            writeln!(out, "{pad}If {} then", print_expr(cond)).unwrap();
            stmts(then_branch, depth + 1, out);
            if let Some(e) = else_branch {
                writeln!(out, "{pad}else").unwrap();
                stmts(e, depth + 1, out);
            }
            writeln!(out, "{pad}end;").unwrap();
        }
        StmtKind::While {
            cond,
            changing,
            maintaining,
            decreasing,
            body,
        } => {
            writeln!(out, "{pad}While {}", print_expr(cond)).unwrap();
            if let Some(c) = changing {
                let names: Vec<&str> = c.iter().map(|n| n.name.as_str()).collect();
                writeln!(out, "{pad}    changing {};", names.join(", ")).unwrap();
            }
            if let Some(m) = maintaining {
                writeln!(out, "{pad}    maintaining {};", print_expr(m)).unwrap();
            }
            if let Some(d) = decreasing {
                writeln!(out, "{pad}    decreasing {};", print_expr(d)).unwrap();
            }
            writeln!(out, "{pad}do").unwrap();
            stmts(body, depth + 1, out);
            writeln!(out, "{pad}end;").unwrap();
        }
    }
}
