//! MiniLang: the small imperative language programs are repaired in.
//!
//! A program is a list of modules holding globals and functions. Statements
//! are numbered in source order and the canonical printer puts each one on
//! its own line. See `docs/minilang.md` for the grammar.

pub mod ast;
pub mod interp;
pub mod parser;
pub mod printer;
pub mod suite;
pub mod validate;

pub use ast::*;
pub use interp::{execute_test, ExecutionOutcome, TestRunner, Value, Verdict, DEFAULT_STEP_LIMIT};
pub use parser::{parse_expr, parse_program, parse_statement, SyntaxError};
pub use printer::{print_program, print_stmt, stmt_inline};
pub use suite::{parse_suite, print_suite, validate_suite, Expectation, SuiteError, TestCase};
pub use validate::{validate_program, FunctionIndex, StaticError};
