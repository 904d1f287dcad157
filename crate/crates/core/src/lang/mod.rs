//! Front end: lexing, parsing, pretty-printing and checking of source
//! modules.

mod ast;
mod check;
mod diag;
pub mod lexer;
pub(crate) mod parser;
mod printer;

pub use ast::*;
pub use check::{
    assigned_vars, check_module, initial_value, lower_math, CallArg, Contract, ContractFormal,
    Loop, MathScope, PExp, TStmt, TStmtKind, TypedModule, TypedProcedure,
};
pub use diag::{Diagnostic, Severity};
pub use lexer::tokenize;
pub use parser::{parse, parse_module};
pub use printer::{print_expr, print_module};
