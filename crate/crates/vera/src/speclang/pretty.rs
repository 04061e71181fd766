//! Canonical source renderer. Compound operands are always parenthesized,
//! so the output is unambiguous and reparses to a structurally identical
//! tree.

use super::ast::*;

pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    out.push_str(&format!("def {}({}):\n", program.name, program.param));
    write_stmts(&mut out, &program.body, 1);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn write_stmts(out: &mut String, stmts: &[Stmt], level: usize) {
    for stmt in stmts {
        write_stmt(out, stmt, level);
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    match stmt {
        Stmt::Assign { targets, values, .. } => {
            out.push_str(&targets.join(", "));
            out.push_str(" = ");
            out.push_str(&exprs(values));
            out.push('\n');
        }
        Stmt::AugAssign { target, op, value, .. } => {
            out.push_str(&format!("{target} {}= {}\n", op.symbol(), expr(value)));
        }
        Stmt::If { arms, orelse, .. } => {
            for (i, (cond, body)) in arms.iter().enumerate() {
                if i > 0 {
                    indent(out, level);
                }
                out.push_str(if i == 0 { "if " } else { "elif " });
                out.push_str(&expr(cond));
                out.push_str(":\n");
                write_stmts(out, body, level + 1);
            }
            if !orelse.is_empty() {
                indent(out, level);
                out.push_str("else:\n");
                write_stmts(out, orelse, level + 1);
            }
        }
        Stmt::For { var, range_args, body, .. } => {
            out.push_str(&format!("for {var} in range({}):\n", exprs(range_args)));
            write_stmts(out, body, level + 1);
        }
        Stmt::While { cond, body, .. } => {
            out.push_str(&format!("while {}:\n", expr(cond)));
            write_stmts(out, body, level + 1);
        }
        Stmt::Return { values, .. } => {
            if values.is_empty() {
                out.push_str("return\n");
            } else {
                out.push_str(&format!("return {}\n", exprs(values)));
            }
        }
        Stmt::Assert { cond, message, .. } => {
            out.push_str("assert ");
            out.push_str(&expr(cond));
            if let Some(m) = message {
                out.push_str(", ");
                out.push_str(&expr(m));
            }
            out.push('\n');
        }
        Stmt::ExprStmt { expr: e, .. } => {
            out.push_str(&expr(e));
            out.push('\n');
        }
    }
}

fn exprs(list: &[Expr]) -> String {
    list.iter().map(expr).collect::<Vec<_>>().join(", ")
}

/// True for expressions that never need wrapping as an operand.
fn is_primary(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Int { .. }
            | Expr::Real { .. }
            | Expr::Str { .. }
            | Expr::Bool { .. }
            | Expr::NoneLit { .. }
            | Expr::Name { .. }
            | Expr::List { .. }
            | Expr::MapLit { .. }
            | Expr::Call { .. }
            | Expr::MethodCall { .. }
            | Expr::Index { .. }
    )
}

fn operand(e: &Expr) -> String {
    if is_primary(e) {
        expr(e)
    } else {
        format!("({})", expr(e))
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn real_literal(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.1}")
    } else {
        v.to_string()
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int { value, .. } => value.to_string(),
        Expr::Real { value, .. } => real_literal(*value),
        Expr::Str { value, .. } => quote(value),
        Expr::Bool { value, .. } => if *value { "True" } else { "False" }.to_string(),
        Expr::NoneLit { .. } => "None".to_string(),
        Expr::Name { id, .. } => id.clone(),
        Expr::List { items, .. } => format!("[{}]", exprs(items)),
        Expr::MapLit { entries, .. } => {
            let body = entries
                .iter()
                .map(|(k, v)| format!("{}: {}", quote(k), expr(v)))
                .collect::<Vec<_>>()
                .join(", ");
            format!("{{{body}}}")
        }
        Expr::Tuple { items, .. } => format!("({})", exprs(items)),
        Expr::Unary { op, operand: inner, .. } => match op {
            UnaryOp::Neg => format!("-{}", operand(inner)),
            UnaryOp::Not => format!("not {}", operand(inner)),
        },
        Expr::Binary { op, left, right, .. } => {
            format!("{} {} {}", operand(left), op.symbol(), operand(right))
        }
        Expr::BoolChain { op, operands, .. } => {
            let sep = match op {
                BoolOp::And => " and ",
                BoolOp::Or => " or ",
            };
            operands.iter().map(operand).collect::<Vec<_>>().join(sep)
        }
        Expr::Compare { first, rest, .. } => {
            let mut out = operand(first);
            for (op, e) in rest {
                out.push_str(&format!(" {} {}", op.symbol(), operand(e)));
            }
            out
        }
        Expr::Call { func, args, .. } => format!("{func}({})", exprs(args)),
        Expr::MethodCall { base, method, args, .. } => {
            format!("{}.{method}({})", operand(base), exprs(args))
        }
        Expr::Index { base, index, .. } => format!("{}[{}]", operand(base), expr(index)),
    }
}
