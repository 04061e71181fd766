//! Syntax tree for generator and verifier programs.

use std::fmt;

/// 1-based source line. Carried for diagnostics and runtime errors but
/// ignored by equality, so trees compare structurally across reformatting.
#[derive(Debug, Clone, Copy, Default)]
pub struct Line(pub u32);

impl PartialEq for Line {
    fn eq(&self, _other: &Line) -> bool {
        true
    }
}

impl Eq for Line {}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Generator,
    Verifier,
}

impl Role {
    pub fn function_name(&self) -> &'static str {
        match self {
            Role::Generator => "generator",
            Role::Verifier => "verifier",
        }
    }

    pub fn param_name(&self) -> &'static str {
        match self {
            Role::Generator => "rng",
            Role::Verifier => "assign",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.function_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int { line: Line, value: i64 },
    Real { line: Line, value: f64 },
    Str { line: Line, value: String },
    Bool { line: Line, value: bool },
    NoneLit { line: Line },
    Name { line: Line, id: String },
    List { line: Line, items: Vec<Expr> },
    MapLit { line: Line, entries: Vec<(String, Expr)> },
    /// Parenthesized pair, e.g. `(False, None)`; legal only as the sole
    /// value of a `return`.
    Tuple { line: Line, items: Vec<Expr> },
    Unary { line: Line, op: UnaryOp, operand: Box<Expr> },
    Binary { line: Line, op: BinOp, left: Box<Expr>, right: Box<Expr> },
    /// Short-circuit `and`/`or` chain with two or more operands.
    BoolChain { line: Line, op: BoolOp, operands: Vec<Expr> },
    /// Comparison chain `a < b <= c`; each operand evaluates once.
    Compare { line: Line, first: Box<Expr>, rest: Vec<(CmpOp, Expr)> },
    Call { line: Line, func: String, args: Vec<Expr> },
    /// `base.method(args)`; only `rng.*` passes the checker.
    MethodCall { line: Line, base: Box<Expr>, method: String, args: Vec<Expr> },
    Index { line: Line, base: Box<Expr>, index: Box<Expr> },
}

impl Expr {
    pub fn line(&self) -> u32 {
        match self {
            Expr::Int { line, .. }
            | Expr::Real { line, .. }
            | Expr::Str { line, .. }
            | Expr::Bool { line, .. }
            | Expr::NoneLit { line }
            | Expr::Name { line, .. }
            | Expr::List { line, .. }
            | Expr::MapLit { line, .. }
            | Expr::Tuple { line, .. }
            | Expr::Unary { line, .. }
            | Expr::Binary { line, .. }
            | Expr::BoolChain { line, .. }
            | Expr::Compare { line, .. }
            | Expr::Call { line, .. }
            | Expr::MethodCall { line, .. }
            | Expr::Index { line, .. } => line.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    /// `a = e` or `a, b = e1, e2` (also unpacking one list-valued rhs).
    Assign { line: Line, targets: Vec<String>, values: Vec<Expr> },
    AugAssign { line: Line, target: String, op: BinOp, value: Expr },
    If { line: Line, arms: Vec<(Expr, Vec<Stmt>)>, orelse: Vec<Stmt> },
    For { line: Line, var: String, range_args: Vec<Expr>, body: Vec<Stmt> },
    While { line: Line, cond: Expr, body: Vec<Stmt> },
    Return { line: Line, values: Vec<Expr> },
    /// In a verifier a failed assert returns `(False, None)`; in a
    /// generator it is a runtime error.
    Assert { line: Line, cond: Expr, message: Option<Expr> },
    ExprStmt { line: Line, expr: Expr },
}

impl Stmt {
    pub fn line(&self) -> u32 {
        match self {
            Stmt::Assign { line, .. }
            | Stmt::AugAssign { line, .. }
            | Stmt::If { line, .. }
            | Stmt::For { line, .. }
            | Stmt::While { line, .. }
            | Stmt::Return { line, .. }
            | Stmt::Assert { line, .. }
            | Stmt::ExprStmt { line, .. } => line.0,
        }
    }
}

/// One parsed program: a single function of the expected role.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub role: Role,
    pub name: String,
    pub param: String,
    pub body: Vec<Stmt>,
}
