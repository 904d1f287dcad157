//! Infix rendering of [`MathExp`], parenthesized only where precedence
//! requires it. The output re-parses with the assertion grammar.

use std::fmt;

use super::exp::MathExp;

const IMPLIES: u8 = 1;
const AND: u8 = 2;
const REL: u8 = 4;
const ADD: u8 = 5;
const CONCAT: u8 = 6;
const PRIMARY: u8 = 7;

fn level(e: &MathExp) -> u8 {
    use MathExp::*;
    match e {
        Implies(..) => IMPLIES,
        And(..) => AND,
        Eq(..) | Ne(..) | Le(..) | Lt(..) => REL,
        Add(..) | Sub(..) => ADD,
        Concat(_) => CONCAT,
        _ => PRIMARY,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &MathExp, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "(")?;
        write_exp(f, e)?;
        write!(f, ")")
    } else {
        write_exp(f, e)
    }
}

fn write_exp(f: &mut fmt::Formatter<'_>, e: &MathExp) -> fmt::Result {
    use MathExp::*;
    let binary = |f: &mut fmt::Formatter<'_>, a: &MathExp, op: &str, b: &MathExp, l: u8, r: u8| {
        write_at(f, a, l)?;
        write!(f, " {op} ")?;
        write_at(f, b, r)
    };
    match e {
        Bool(b) => write!(f, "{b}"),
        Int(n) => write!(f, "{n}"),
        MinInt => write!(f, "min_int"),
        MaxInt => write!(f, "max_int"),
        Empty => write!(f, "empty_string"),
        Var(v) | Bound(v) => write!(f, "{}", v.display_name()),
        Old(v) => write!(f, "#{}", v.name),
        Not(a) => {
            write!(f, "not ")?;
            write_at(f, a, PRIMARY)
        }
        Implies(a, b) => binary(f, a, "implies", b, AND, IMPLIES),
        And(a, b) => binary(f, a, "and", b, AND, AND + 1),
        Eq(a, b) => binary(f, a, "=", b, ADD, ADD),
        Ne(a, b) => binary(f, a, "/=", b, ADD, ADD),
        Le(a, b) => binary(f, a, "<=", b, ADD, ADD),
        Lt(a, b) => binary(f, a, "<", b, ADD, ADD),
        Add(a, b) => binary(f, a, "+", b, ADD, CONCAT),
        Sub(a, b) => binary(f, a, "-", b, ADD, CONCAT),
        Concat(parts) => {
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, " o ")?;
                }
                write_at(f, p, PRIMARY)?;
            }
            Ok(())
        }
        Reverse(a) => {
            write!(f, "Reverse(")?;
            write_exp(f, a)?;
            write!(f, ")")
        }
        Len(a) => {
            write!(f, "|")?;
            write_exp(f, a)?;
            write!(f, "|")
        }
        Singleton(a) => {
            write!(f, "<")?;
            write_at(f, a, ADD)?;
            write!(f, ">")
        }
    }
}

impl fmt::Display for MathExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_exp(f, self)
    }
}
