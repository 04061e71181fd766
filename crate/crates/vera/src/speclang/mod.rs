//! Restricted Python-like language for generator and verifier programs.
//!
//! A program is a single `def generator(rng):` or `def verifier(assign):`
//! function over a closed construct set: literals, arithmetic, comparisons,
//! boolean logic, single assignment, `if`/`elif`/`else`, `for` over explicit
//! integer ranges, budgeted `while`, indexing, `assert`, and `return`.
//! Callables are a fixed builtin whitelist plus `rng.*` sampling methods
//! (generators only). Everything outside the subset is a diagnostic, not an
//! extension point.

mod ast;
mod check;
mod lexer;
mod parser;
mod pretty;

pub use ast::{BinOp, BoolOp, CmpOp, Expr, Line, Program, Role, Stmt, UnaryOp};

use std::fmt;

use crate::model::SlotSpec;

/// Diagnostic category, fixed across the toolchain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Syntax,
    Name,
    Arity,
    Construct,
    ReturnShape,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Syntax => "syntax",
            Category::Name => "name",
            Category::Arity => "arity",
            Category::Construct => "construct",
            Category::ReturnShape => "return-shape",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: u32,
    pub category: Category,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: u32, category: Category, message: impl Into<String>) -> Self {
        Diagnostic { line, category, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.category, self.message)
    }
}

/// Names callable from any program, with their accepted argument counts.
pub const BUILTINS: &[(&str, usize, usize)] = &[
    ("abs", 1, 1),
    ("min", 1, usize::MAX),
    ("max", 1, usize::MAX),
    ("len", 1, 1),
    ("floor", 1, 1),
    ("ceil", 1, 1),
    ("sqrt", 1, 1),
    ("gcd", 2, 2),
    ("round", 1, 2),
    ("pow", 2, 2),
    ("fraction", 2, 2),
    ("str", 1, 1),
    ("int", 1, 1),
    ("float", 1, 1),
];

/// Sampling methods available on the generator's `rng` parameter.
pub const RNG_METHODS: &[(&str, usize, usize)] = &[
    ("random", 0, 0),
    ("randint", 2, 2),
    ("uniform", 2, 2),
    ("choice", 1, 1),
    ("shuffle", 1, 1),
    ("gauss", 2, 2),
    ("gammavariate", 2, 2),
];

/// Parse `source` as a program of the given role. Syntax and structural
/// violations come back as diagnostics with 1-based line numbers.
pub fn parse_program(source: &str, role: Role) -> Result<Program, Vec<Diagnostic>> {
    parser::parse(source, role)
}

/// Validate names, arities, role restrictions, slot coverage, and return
/// shapes. An empty list means the program is accepted.
pub fn check_program(program: &Program, slots: &[SlotSpec]) -> Vec<Diagnostic> {
    check::check(program, slots)
}

/// Parse and check in one step.
pub fn compile_program(
    source: &str,
    role: Role,
    slots: &[SlotSpec],
) -> Result<Program, Vec<Diagnostic>> {
    let program = parse_program(source, role)?;
    let diags = check_program(&program, slots);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(diags)
    }
}

/// Render a program back to canonical source: 4-space indents, one
/// statement per line, explicit parentheses around compound operands.
pub fn pretty(program: &Program) -> String {
    pretty::pretty(program)
}

#[cfg(test)]
mod tests;
