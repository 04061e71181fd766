//! Static checks beyond syntax: whitelist and arity enforcement, role
//! restrictions on `rng`, slot coverage of generator returns, declared-slot
//! reads in verifiers, and per-role return shapes.

use std::collections::BTreeSet;

use super::ast::*;
use super::{Category, Diagnostic, BUILTINS, RNG_METHODS};
use crate::model::SlotSpec;

pub fn check(program: &Program, slots: &[SlotSpec]) -> Vec<Diagnostic> {
    let slot_names: BTreeSet<String> = slots.iter().map(|s| s.name.clone()).collect();
    let mut assigned = BTreeSet::new();
    collect_assigned(&program.body, &mut assigned);

    let mut cx = Checker {
        role: program.role,
        param: program.param.clone(),
        slot_names,
        assigned,
        diags: Vec::new(),
        saw_return: false,
    };
    cx.check_stmts(&program.body);
    if !cx.saw_return {
        cx.diags.push(Diagnostic::new(
            1,
            Category::ReturnShape,
            "program has no return statement".to_string(),
        ));
    }
    cx.diags
}

fn collect_assigned(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for stmt in stmts {
        match stmt {
            Stmt::Assign { targets, .. } => out.extend(targets.iter().cloned()),
            Stmt::AugAssign { target, .. } => {
                out.insert(target.clone());
            }
            Stmt::For { var, body, .. } => {
                out.insert(var.clone());
                collect_assigned(body, out);
            }
            Stmt::While { body, .. } => collect_assigned(body, out),
            Stmt::If { arms, orelse, .. } => {
                for (_, body) in arms {
                    collect_assigned(body, out);
                }
                collect_assigned(orelse, out);
            }
            _ => {}
        }
    }
}

struct Checker {
    role: Role,
    param: String,
    slot_names: BTreeSet<String>,
    assigned: BTreeSet<String>,
    diags: Vec<Diagnostic>,
    saw_return: bool,
}

impl Checker {
    fn push(&mut self, line: u32, category: Category, message: String) {
        self.diags.push(Diagnostic::new(line, category, message));
    }

    fn check_stmts(&mut self, stmts: &[Stmt]) {
        for stmt in stmts {
            self.check_stmt(stmt);
        }
    }

    fn check_stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::Assign { line, targets, values } => {
                for t in targets {
                    if *t == self.param {
                        self.push(
                            line.0,
                            Category::Construct,
                            format!("cannot rebind parameter '{}'", self.param),
                        );
                    }
                }
                for v in values {
                    self.check_expr(v);
                }
            }
            Stmt::AugAssign { line, target, value, .. } => {
                if *target == self.param {
                    self.push(
                        line.0,
                        Category::Construct,
                        format!("cannot rebind parameter '{}'", self.param),
                    );
                }
                self.check_expr(value);
            }
            Stmt::If { arms, orelse, .. } => {
                for (cond, body) in arms {
                    self.check_expr(cond);
                    self.check_stmts(body);
                }
                self.check_stmts(orelse);
            }
            Stmt::For { range_args, body, .. } => {
                for a in range_args {
                    self.check_expr(a);
                }
                self.check_stmts(body);
            }
            Stmt::While { cond, body, .. } => {
                self.check_expr(cond);
                self.check_stmts(body);
            }
            Stmt::Return { line, values } => {
                self.saw_return = true;
                self.check_return(line.0, values);
                for v in values {
                    self.check_expr(v);
                }
            }
            Stmt::Assert { cond, message, .. } => {
                self.check_expr(cond);
                if let Some(m) = message {
                    self.check_expr(m);
                }
            }
            Stmt::ExprStmt { expr, .. } => self.check_expr(expr),
        }
    }

    fn check_return(&mut self, line: u32, values: &[Expr]) {
        match self.role {
            Role::Generator => {
                if values.len() != 1 {
                    self.push(
                        line,
                        Category::ReturnShape,
                        "generator must return a single slot map".to_string(),
                    );
                    return;
                }
                if let Expr::MapLit { entries, .. } = &values[0] {
                    let mut seen: BTreeSet<String> = BTreeSet::new();
                    let mut diags = Vec::new();
                    for (key, _) in entries {
                        if !seen.insert(key.clone()) {
                            diags.push((Category::Construct, format!("duplicate key '{key}' in returned map")));
                        }
                        if !self.slot_names.contains(key) {
                            diags.push((Category::Name, format!("unknown slot '{key}'")));
                        }
                    }
                    for slot in &self.slot_names {
                        if !seen.contains(slot) {
                            diags.push((Category::ReturnShape, format!("slot '{slot}' never assigned")));
                        }
                    }
                    for (category, message) in diags {
                        self.push(line, category, message);
                    }
                }
            }
            Role::Verifier => {
                if values.len() != 2 {
                    self.push(
                        line,
                        Category::ReturnShape,
                        "verifier must return (valid, answer)".to_string(),
                    );
                }
            }
        }
    }

    fn check_expr(&mut self, expr: &Expr) {
        match expr {
            Expr::Int { .. }
            | Expr::Real { .. }
            | Expr::Str { .. }
            | Expr::Bool { .. }
            | Expr::NoneLit { .. } => {}
            Expr::Name { line, id } => {
                let known = *id == self.param
                    || id == "pi"
                    || id == "e"
                    || self.assigned.contains(id);
                if !known {
                    self.push(line.0, Category::Name, format!("unknown name '{id}'"));
                }
            }
            Expr::List { items, .. } => {
                for i in items {
                    self.check_expr(i);
                }
            }
            Expr::MapLit { entries, .. } => {
                for (_, v) in entries {
                    self.check_expr(v);
                }
            }
            Expr::Tuple { line, items } => {
                self.push(
                    line.0,
                    Category::Construct,
                    "tuple expressions are only allowed as a return value".to_string(),
                );
                for i in items {
                    self.check_expr(i);
                }
            }
            Expr::Unary { operand, .. } => self.check_expr(operand),
            Expr::Binary { left, right, .. } => {
                self.check_expr(left);
                self.check_expr(right);
            }
            Expr::BoolChain { operands, .. } => {
                for o in operands {
                    self.check_expr(o);
                }
            }
            Expr::Compare { first, rest, .. } => {
                self.check_expr(first);
                for (_, e) in rest {
                    self.check_expr(e);
                }
            }
            Expr::Call { line, func, args } => {
                match BUILTINS.iter().find(|(name, _, _)| name == func) {
                    Some((_, lo, hi)) => {
                        if args.len() < *lo || args.len() > *hi {
                            let expected = if lo == hi {
                                format!("{lo}")
                            } else if *hi == usize::MAX {
                                format!("at least {lo}")
                            } else {
                                format!("{lo} to {hi}")
                            };
                            self.push(
                                line.0,
                                Category::Arity,
                                format!("{func} takes {expected} arguments, got {}", args.len()),
                            );
                        }
                    }
                    None => {
                        self.push(line.0, Category::Name, format!("unknown function '{func}'"));
                    }
                }
                for a in args {
                    self.check_expr(a);
                }
            }
            Expr::MethodCall { line, base, method, args } => {
                match base.as_ref() {
                    Expr::Name { id, .. } if id == "rng" => {
                        if self.role == Role::Verifier {
                            self.push(
                                line.0,
                                Category::Name,
                                format!("rng.{method} is not available in a verifier"),
                            );
                        } else {
                            match RNG_METHODS.iter().find(|(name, _, _)| name == method) {
                                Some((_, lo, hi)) => {
                                    if args.len() < *lo || args.len() > *hi {
                                        self.push(
                                            line.0,
                                            Category::Arity,
                                            format!(
                                                "rng.{method} takes {lo} to {hi} arguments, got {}",
                                                args.len()
                                            ),
                                        );
                                    }
                                }
                                None => self.push(
                                    line.0,
                                    Category::Name,
                                    format!("unknown rng method '{method}'"),
                                ),
                            }
                        }
                    }
                    Expr::Name { id, .. } => {
                        self.push(
                            line.0,
                            Category::Name,
                            format!("'{id}' has no methods; only rng.* calls are supported"),
                        );
                    }
                    _ => {
                        self.push(
                            line.0,
                            Category::Construct,
                            "method calls are only supported on rng".to_string(),
                        );
                    }
                }
                for a in args {
                    self.check_expr(a);
                }
            }
            Expr::Index { line, base, index } => {
                if self.role == Role::Verifier {
                    if let (Expr::Name { id, .. }, Expr::Str { value, .. }) =
                        (base.as_ref(), index.as_ref())
                    {
                        if id == "assign" && !self.slot_names.contains(value.as_str()) {
                            self.push(line.0, Category::Name, format!("unknown slot '{value}'"));
                        }
                    }
                }
                self.check_expr(base);
                self.check_expr(index);
            }
        }
    }
}
