//! Budgeted tree-walking interpreter. Every syntax-tree node evaluation
//! costs one step; composite allocations cost cells; a wall-clock backstop
//! is polled every 4096 steps. Integer overflow is a runtime error, never a
//! wrap, and reals are kept finite.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::time::Instant;

use crate::model::Rational;
use crate::speclang::{BinOp, BoolOp, CmpOp, Expr, Program, Role, Stmt, UnaryOp};

use super::rng::SpecRng;
use super::value::Value;
use super::Budget;

pub(super) enum Halt {
    Step,
    Memory,
    Timeout,
    Error(u32, String),
    Return(Vec<Value>),
}

pub(super) struct RawOutcome {
    /// `Ok(Some(values))` on an executed return, `Ok(None)` when the body
    /// fell through without returning.
    pub result: Result<Option<Vec<Value>>, Halt>,
    pub steps: u64,
    pub elapsed_sec: f64,
}

pub(super) fn run_program(
    program: &Program,
    rng: Option<&mut SpecRng>,
    budget: &Budget,
    param_value: Option<Value>,
) -> RawOutcome {
    let start = Instant::now();
    let mut env: HashMap<String, Value> = HashMap::new();
    env.insert("pi".to_string(), Value::Real(std::f64::consts::PI));
    env.insert("e".to_string(), Value::Real(std::f64::consts::E));
    if let Some(v) = param_value {
        env.insert(program.param.clone(), v);
    }
    let mut interp = Interp {
        role: program.role,
        rng,
        env,
        steps: 0,
        step_limit: budget.step_limit,
        cells: 0,
        cell_limit: budget.memory_cells,
        start,
        wall_limit: budget.wall_clock_sec,
    };
    let result = match interp.exec_block(&program.body) {
        Ok(()) => Ok(None),
        Err(Halt::Return(values)) => Ok(Some(values)),
        Err(halt) => Err(halt),
    };
    RawOutcome { result, steps: interp.steps, elapsed_sec: start.elapsed().as_secs_f64() }
}

struct Interp<'a> {
    role: Role,
    rng: Option<&'a mut SpecRng>,
    env: HashMap<String, Value>,
    steps: u64,
    step_limit: u64,
    cells: u64,
    cell_limit: u64,
    start: Instant,
    wall_limit: f64,
}

type EResult<T> = Result<T, Halt>;

fn rt(line: u32, message: impl Into<String>) -> Halt {
    Halt::Error(line, message.into())
}

impl<'a> Interp<'a> {
    fn tick(&mut self) -> EResult<()> {
        if self.steps >= self.step_limit {
            return Err(Halt::Step);
        }
        self.steps += 1;
        if self.steps & 0xFFF == 0 && self.start.elapsed().as_secs_f64() > self.wall_limit {
            return Err(Halt::Timeout);
        }
        Ok(())
    }

    fn alloc(&mut self, n: u64) -> EResult<()> {
        self.cells = self.cells.saturating_add(n);
        if self.cells > self.cell_limit {
            Err(Halt::Memory)
        } else {
            Ok(())
        }
    }

    fn exec_block(&mut self, stmts: &[Stmt]) -> EResult<()> {
        for stmt in stmts {
            self.exec_stmt(stmt)?;
        }
        Ok(())
    }

    fn exec_stmt(&mut self, stmt: &Stmt) -> EResult<()> {
        self.tick()?;
        match stmt {
            Stmt::Assign { line, targets, values } => {
                let vals: Vec<Value> =
                    values.iter().map(|e| self.eval(e)).collect::<EResult<_>>()?;
                if vals.len() == targets.len() {
                    for (t, v) in targets.iter().zip(vals) {
                        self.env.insert(t.clone(), v);
                    }
                } else {
                    // One value unpacked into several targets.
                    let items: Vec<Value> = match &vals[0] {
                        Value::List(xs) => xs.borrow().clone(),
                        Value::Tuple(xs) => xs.as_ref().clone(),
                        other => {
                            return Err(rt(
                                line.0,
                                format!("cannot unpack a {} value", other.type_name()),
                            ))
                        }
                    };
                    if items.len() != targets.len() {
                        return Err(rt(
                            line.0,
                            format!(
                                "cannot unpack {} values into {} targets",
                                items.len(),
                                targets.len()
                            ),
                        ));
                    }
                    for (t, v) in targets.iter().zip(items) {
                        self.env.insert(t.clone(), v);
                    }
                }
                Ok(())
            }
            Stmt::AugAssign { line, target, op, value } => {
                let current = self.env.get(target).cloned().ok_or_else(|| {
                    rt(line.0, format!("name '{target}' is not defined"))
                })?;
                let rhs = self.eval(value)?;
                let updated = self.binop(*op, current, rhs, line.0)?;
                self.env.insert(target.clone(), updated);
                Ok(())
            }
            Stmt::If { arms, orelse, .. } => {
                for (cond, body) in arms {
                    if self.eval_bool(cond)? {
                        return self.exec_block(body);
                    }
                }
                self.exec_block(orelse)
            }
            Stmt::For { line, var, range_args, body } => {
                let bounds: Vec<i64> = range_args
                    .iter()
                    .map(|e| {
                        let v = self.eval(e)?;
                        self.expect_int(&v, line.0, "range bound")
                    })
                    .collect::<EResult<_>>()?;
                let (start, stop, step) = match bounds.as_slice() {
                    [stop] => (0, *stop, 1),
                    [start, stop] => (*start, *stop, 1),
                    [start, stop, step] => (*start, *stop, *step),
                    _ => unreachable!("parser bounds range arity"),
                };
                if step == 0 {
                    return Err(rt(line.0, "range step must not be zero"));
                }
                let mut i = start;
                loop {
                    let done = if step > 0 { i >= stop } else { i <= stop };
                    if done {
                        break;
                    }
                    self.env.insert(var.clone(), Value::Int(i));
                    self.exec_block(body)?;
                    i = match i.checked_add(step) {
                        Some(next) => next,
                        None => break,
                    };
                }
                Ok(())
            }
            Stmt::While { cond, body, .. } => {
                while self.eval_bool(cond)? {
                    self.exec_block(body)?;
                }
                Ok(())
            }
            Stmt::Return { values, .. } => {
                let vals: Vec<Value> =
                    values.iter().map(|e| self.eval(e)).collect::<EResult<_>>()?;
                Err(Halt::Return(vals))
            }
            Stmt::Assert { line, cond, message } => {
                if self.eval_bool(cond)? {
                    return Ok(());
                }
                match self.role {
                    // A failed verifier assertion means "this assignment is
                    // invalid", not "this program is broken".
                    Role::Verifier => {
                        Err(Halt::Return(vec![Value::Bool(false), Value::None]))
                    }
                    Role::Generator => {
                        let detail = match message {
                            Some(m) => {
                                let v = self.eval(m)?;
                                v.scalar_text().map(|t| format!(": {t}")).unwrap_or_default()
                            }
                            None => String::new(),
                        };
                        Err(rt(line.0, format!("assertion failed{detail}")))
                    }
                }
            }
            Stmt::ExprStmt { expr, .. } => {
                self.eval(expr)?;
                Ok(())
            }
        }
    }

    fn eval_bool(&mut self, e: &Expr) -> EResult<bool> {
        let v = self.eval(e)?;
        match v {
            Value::Bool(b) => Ok(b),
            other => Err(rt(
                e.line(),
                format!("condition must be a boolean, got {}", other.type_name()),
            )),
        }
    }

    fn expect_int(&self, v: &Value, line: u32, what: &str) -> EResult<i64> {
        match v {
            Value::Int(i) => Ok(*i),
            other => Err(rt(line, format!("{what} must be an integer, got {}", other.type_name()))),
        }
    }

    fn expect_f64(&self, v: &Value, line: u32, what: &str) -> EResult<f64> {
        v.as_f64()
            .ok_or_else(|| rt(line, format!("{what} must be numeric, got {}", v.type_name())))
    }

    fn eval(&mut self, e: &Expr) -> EResult<Value> {
        self.tick()?;
        match e {
            Expr::Int { value, .. } => Ok(Value::Int(*value)),
            Expr::Real { value, .. } => Ok(Value::Real(*value)),
            Expr::Str { value, .. } => Ok(Value::str(value)),
            Expr::Bool { value, .. } => Ok(Value::Bool(*value)),
            Expr::NoneLit { .. } => Ok(Value::None),
            Expr::Name { line, id } => match self.env.get(id) {
                Some(v) => Ok(v.clone()),
                None if id == "rng" => {
                    Err(rt(line.0, "'rng' can only be used for method calls"))
                }
                None => Err(rt(line.0, format!("name '{id}' is not defined"))),
            },
            Expr::List { items, .. } => {
                let vals: Vec<Value> =
                    items.iter().map(|i| self.eval(i)).collect::<EResult<_>>()?;
                self.alloc(vals.len() as u64 + 1)?;
                Ok(Value::list(vals))
            }
            Expr::MapLit { entries, .. } => {
                let mut map = BTreeMap::new();
                for (k, v) in entries {
                    let val = self.eval(v)?;
                    map.insert(k.clone(), val);
                }
                self.alloc(map.len() as u64 + 1)?;
                Ok(Value::Map(Rc::new(map)))
            }
            Expr::Tuple { items, .. } => {
                let vals: Vec<Value> =
                    items.iter().map(|i| self.eval(i)).collect::<EResult<_>>()?;
                self.alloc(vals.len() as u64)?;
                Ok(Value::Tuple(Rc::new(vals)))
            }
            Expr::Unary { line, op, operand } => {
                let v = self.eval(operand)?;
                match op {
                    UnaryOp::Neg => match v {
                        Value::Int(i) => i
                            .checked_neg()
                            .map(Value::Int)
                            .ok_or_else(|| rt(line.0, "integer overflow")),
                        Value::Rational(r) => r
                            .neg()
                            .map(Value::from_rational)
                            .map_err(|_| rt(line.0, "rational overflow")),
                        Value::Real(x) => Ok(Value::Real(-x)),
                        other => Err(rt(
                            line.0,
                            format!("bad operand type for unary -: {}", other.type_name()),
                        )),
                    },
                    UnaryOp::Not => match v {
                        Value::Bool(b) => Ok(Value::Bool(!b)),
                        other => Err(rt(
                            line.0,
                            format!("bad operand type for 'not': {}", other.type_name()),
                        )),
                    },
                }
            }
            Expr::Binary { line, op, left, right } => {
                let l = self.eval(left)?;
                let r = self.eval(right)?;
                self.binop(*op, l, r, line.0)
            }
            Expr::BoolChain { op, operands, .. } => {
                for operand in operands {
                    let b = self.eval_bool(operand)?;
                    match op {
                        BoolOp::And if !b => return Ok(Value::Bool(false)),
                        BoolOp::Or if b => return Ok(Value::Bool(true)),
                        _ => {}
                    }
                }
                Ok(Value::Bool(matches!(op, BoolOp::And)))
            }
            Expr::Compare { line, first, rest } => {
                let mut prev = self.eval(first)?;
                for (op, rhs) in rest {
                    let cur = self.eval(rhs)?;
                    if !self.compare(*op, &prev, &cur, line.0)? {
                        return Ok(Value::Bool(false));
                    }
                    prev = cur;
                }
                Ok(Value::Bool(true))
            }
            Expr::Call { line, func, args } => {
                let vals: Vec<Value> =
                    args.iter().map(|a| self.eval(a)).collect::<EResult<_>>()?;
                self.builtin(func, vals, line.0)
            }
            Expr::MethodCall { line, base, method, args } => {
                match base.as_ref() {
                    Expr::Name { id, .. } if id == "rng" => {}
                    _ => return Err(rt(line.0, "method calls are only supported on rng")),
                }
                if self.role != Role::Generator || self.rng.is_none() {
                    return Err(rt(line.0, format!("rng.{method} is not available here")));
                }
                let vals: Vec<Value> =
                    args.iter().map(|a| self.eval(a)).collect::<EResult<_>>()?;
                self.rng_method(method, vals, line.0)
            }
            Expr::Index { line, base, index } => {
                let b = self.eval(base)?;
                let i = self.eval(index)?;
                self.index(&b, &i, line.0)
            }
        }
    }

    fn index(&self, base: &Value, idx: &Value, line: u32) -> EResult<Value> {
        let int_index = |len: usize, raw: i64| -> EResult<usize> {
            let adjusted = if raw < 0 { raw + len as i64 } else { raw };
            if adjusted < 0 || adjusted >= len as i64 {
                Err(rt(line, format!("index {raw} out of range for length {len}")))
            } else {
                Ok(adjusted as usize)
            }
        };
        match (base, idx) {
            (Value::List(xs), Value::Int(i)) => {
                let xs = xs.borrow();
                let at = int_index(xs.len(), *i)?;
                Ok(xs[at].clone())
            }
            (Value::Tuple(xs), Value::Int(i)) => {
                let at = int_index(xs.len(), *i)?;
                Ok(xs[at].clone())
            }
            (Value::Str(s), Value::Int(i)) => {
                let chars: Vec<char> = s.chars().collect();
                let at = int_index(chars.len(), *i)?;
                Ok(Value::str(chars[at].to_string()))
            }
            (Value::Map(m), Value::Str(k)) => m
                .get(k.as_ref())
                .cloned()
                .ok_or_else(|| rt(line, format!("key '{k}' not found"))),
            (Value::Map(_), other) => {
                Err(rt(line, format!("map keys are strings, got {}", other.type_name())))
            }
            (other, _) => Err(rt(line, format!("{} is not indexable", other.type_name()))),
        }
    }

    fn binop(&mut self, op: BinOp, l: Value, r: Value, line: u32) -> EResult<Value> {
        match (&l, &r) {
            (Value::Str(a), Value::Str(b)) if op == BinOp::Add => {
                let mut s = String::with_capacity(a.len() + b.len());
                s.push_str(a);
                s.push_str(b);
                self.alloc(s.len() as u64 / 16 + 1)?;
                return Ok(Value::Str(Rc::from(s)));
            }
            (Value::List(a), Value::List(b)) if op == BinOp::Add => {
                let mut xs = a.borrow().clone();
                xs.extend(b.borrow().iter().cloned());
                self.alloc(xs.len() as u64 + 1)?;
                return Ok(Value::list(xs));
            }
            _ => {}
        }
        match (&l, &r) {
            (Value::Int(a), Value::Int(b)) => int_binop(op, *a, *b, line),
            (Value::Rational(a), Value::Rational(b)) => rational_binop(op, *a, *b, line),
            (Value::Int(a), Value::Rational(b)) => {
                rational_binop(op, Rational::from_int(*a), *b, line)
            }
            (Value::Rational(a), Value::Int(b)) => {
                rational_binop(op, *a, Rational::from_int(*b), line)
            }
            _ if l.is_numeric() && r.is_numeric() => {
                let x = l.as_f64().expect("numeric");
                let y = r.as_f64().expect("numeric");
                real_binop(op, x, y, line)
            }
            _ => Err(rt(
                line,
                format!(
                    "unsupported operand types for {}: {} and {}",
                    op.symbol(),
                    l.type_name(),
                    r.type_name()
                ),
            )),
        }
    }

    fn compare(&self, op: CmpOp, l: &Value, r: &Value, line: u32) -> EResult<bool> {
        use std::cmp::Ordering;
        match op {
            CmpOp::Eq => return Ok(l.loose_eq(r)),
            CmpOp::Ne => return Ok(!l.loose_eq(r)),
            _ => {}
        }
        let ordering: Ordering = match (l, r) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Int(a), Value::Rational(b)) => Rational::from_int(*a).cmp_exact(b),
            (Value::Rational(a), Value::Int(b)) => a.cmp_exact(&Rational::from_int(*b)),
            (Value::Rational(a), Value::Rational(b)) => a.cmp_exact(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ if l.is_numeric() && r.is_numeric() => {
                let x = l.as_f64().expect("numeric");
                let y = r.as_f64().expect("numeric");
                x.partial_cmp(&y)
                    .ok_or_else(|| rt(line, "invalid floating-point comparison"))?
            }
            _ => {
                return Err(rt(
                    line,
                    format!(
                        "'{}' not supported between {} and {}",
                        op.symbol(),
                        l.type_name(),
                        r.type_name()
                    ),
                ))
            }
        };
        Ok(match op {
            CmpOp::Lt => ordering == Ordering::Less,
            CmpOp::Le => ordering != Ordering::Greater,
            CmpOp::Gt => ordering == Ordering::Greater,
            CmpOp::Ge => ordering != Ordering::Less,
            CmpOp::Eq | CmpOp::Ne => unreachable!("handled above"),
        })
    }

    fn builtin(&mut self, func: &str, args: Vec<Value>, line: u32) -> EResult<Value> {
        let arity = |n: usize| -> EResult<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(rt(line, format!("{func} takes {n} arguments, got {}", args.len())))
            }
        };
        match func {
            "abs" => {
                arity(1)?;
                match &args[0] {
                    Value::Int(v) => v
                        .checked_abs()
                        .map(Value::Int)
                        .ok_or_else(|| rt(line, "integer overflow")),
                    Value::Rational(r) => r
                        .abs()
                        .map(Value::from_rational)
                        .map_err(|_| rt(line, "rational overflow")),
                    Value::Real(x) => Ok(Value::Real(x.abs())),
                    other => {
                        Err(rt(line, format!("abs() of {} is not supported", other.type_name())))
                    }
                }
            }
            "min" | "max" => {
                let candidates: Vec<Value> = if args.len() == 1 {
                    match &args[0] {
                        Value::List(xs) => xs.borrow().clone(),
                        other => {
                            return Err(rt(
                                line,
                                format!("{func}() of a single {} value", other.type_name()),
                            ))
                        }
                    }
                } else {
                    args
                };
                if candidates.is_empty() {
                    return Err(rt(line, format!("{func}() of an empty sequence")));
                }
                let pick_lt = func == "min";
                let mut best = candidates[0].clone();
                for cand in &candidates[1..] {
                    let wins = if pick_lt {
                        self.compare(CmpOp::Lt, cand, &best, line)?
                    } else {
                        self.compare(CmpOp::Gt, cand, &best, line)?
                    };
                    if wins {
                        best = cand.clone();
                    }
                }
                Ok(best)
            }
            "len" => {
                arity(1)?;
                let n = match &args[0] {
                    Value::List(xs) => xs.borrow().len(),
                    Value::Map(m) => m.len(),
                    Value::Tuple(t) => t.len(),
                    Value::Str(s) => s.chars().count(),
                    other => {
                        return Err(rt(
                            line,
                            format!("len() of {} is not supported", other.type_name()),
                        ))
                    }
                };
                Ok(Value::Int(n as i64))
            }
            "floor" | "ceil" => {
                arity(1)?;
                let down = func == "floor";
                match &args[0] {
                    Value::Int(v) => Ok(Value::Int(*v)),
                    Value::Rational(r) => Ok(Value::Int(if down { r.floor() } else { r.ceil() })),
                    Value::Real(x) => {
                        let y = if down { x.floor() } else { x.ceil() };
                        int_from_f64(y, line)
                    }
                    other => Err(rt(
                        line,
                        format!("{func}() of {} is not supported", other.type_name()),
                    )),
                }
            }
            "sqrt" => {
                arity(1)?;
                let x = self.expect_f64(&args[0], line, "sqrt() argument")?;
                if x < 0.0 {
                    return Err(rt(line, "math domain error: sqrt of a negative number"));
                }
                Ok(Value::Real(x.sqrt()))
            }
            "gcd" => {
                arity(2)?;
                let a = self.expect_int(&args[0], line, "gcd() argument")?;
                let b = self.expect_int(&args[1], line, "gcd() argument")?;
                let mut x = a.unsigned_abs();
                let mut y = b.unsigned_abs();
                while y != 0 {
                    let t = x % y;
                    x = y;
                    y = t;
                }
                i64::try_from(x).map(Value::Int).map_err(|_| rt(line, "integer overflow"))
            }
            "round" => {
                if args.len() == 1 {
                    match &args[0] {
                        Value::Int(v) => Ok(Value::Int(*v)),
                        Value::Rational(r) => Ok(Value::Int(round_half_even_rational(r))),
                        Value::Real(x) => int_from_f64(x.round_ties_even(), line),
                        other => Err(rt(
                            line,
                            format!("round() of {} is not supported", other.type_name()),
                        )),
                    }
                } else if args.len() == 2 {
                    let x = self.expect_f64(&args[0], line, "round() argument")?;
                    let digits = self.expect_int(&args[1], line, "round() digits")?;
                    if digits.abs() > 308 {
                        return Err(rt(line, "round() digits out of range"));
                    }
                    // `+ 0.0` folds a negative zero into plain zero.
                    finite(round_real_digits(x, digits) + 0.0, line)
                } else {
                    Err(rt(line, format!("round takes 1 to 2 arguments, got {}", args.len())))
                }
            }
            "pow" => {
                arity(2)?;
                let mut it = args.into_iter();
                let a = it.next().expect("arity checked");
                let b = it.next().expect("arity checked");
                self.binop(BinOp::Pow, a, b, line)
            }
            "fraction" => {
                arity(2)?;
                let p = self.expect_int(&args[0], line, "fraction() numerator")?;
                let q = self.expect_int(&args[1], line, "fraction() denominator")?;
                Rational::new(p, q)
                    .map(Value::from_rational)
                    .map_err(|_| rt(line, "fraction() denominator must not be zero"))
            }
            "str" => {
                arity(1)?;
                args[0]
                    .scalar_text()
                    .map(Value::str)
                    .ok_or_else(|| {
                        rt(line, format!("str() of {} is not supported", args[0].type_name()))
                    })
            }
            "int" => {
                arity(1)?;
                match &args[0] {
                    Value::Int(v) => Ok(Value::Int(*v)),
                    Value::Rational(r) => Ok(Value::Int(r.trunc())),
                    Value::Real(x) => int_from_f64(x.trunc(), line),
                    Value::Bool(b) => Ok(Value::Int(*b as i64)),
                    Value::Str(s) => s
                        .trim()
                        .parse::<i64>()
                        .map(Value::Int)
                        .map_err(|_| rt(line, format!("invalid literal for int(): '{s}'"))),
                    other => Err(rt(
                        line,
                        format!("int() of {} is not supported", other.type_name()),
                    )),
                }
            }
            "float" => {
                arity(1)?;
                match &args[0] {
                    Value::Bool(b) => Ok(Value::Real(*b as i64 as f64)),
                    Value::Str(s) => {
                        let parsed: f64 = s.trim().parse().map_err(|_| {
                            rt(line, format!("invalid literal for float(): '{s}'"))
                        })?;
                        finite(parsed, line)
                    }
                    v if v.is_numeric() => Ok(Value::Real(v.as_f64().expect("numeric"))),
                    other => Err(rt(
                        line,
                        format!("float() of {} is not supported", other.type_name()),
                    )),
                }
            }
            _ => Err(rt(line, format!("unknown function '{func}'"))),
        }
    }

    fn rng_method(&mut self, method: &str, args: Vec<Value>, line: u32) -> EResult<Value> {
        let arity = |n: usize| -> EResult<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(rt(line, format!("rng.{method} takes {n} arguments, got {}", args.len())))
            }
        };
        match method {
            "random" => {
                arity(0)?;
                let rng = self.rng.as_mut().expect("checked by caller");
                Ok(Value::Real(rng.random()))
            }
            "randint" => {
                arity(2)?;
                let a = self.expect_int(&args[0], line, "randint bound")?;
                let b = self.expect_int(&args[1], line, "randint bound")?;
                let rng = self.rng.as_mut().expect("checked by caller");
                rng.randint(a, b).map(Value::Int).map_err(|m| rt(line, m))
            }
            "uniform" => {
                arity(2)?;
                let a = self.expect_f64(&args[0], line, "uniform bound")?;
                let b = self.expect_f64(&args[1], line, "uniform bound")?;
                let rng = self.rng.as_mut().expect("checked by caller");
                finite(rng.uniform(a, b), line)
            }
            "choice" => {
                arity(1)?;
                let items = match &args[0] {
                    Value::List(xs) => xs.borrow().clone(),
                    other => {
                        return Err(rt(
                            line,
                            format!("rng.choice needs a list, got {}", other.type_name()),
                        ))
                    }
                };
                if items.is_empty() {
                    return Err(rt(line, "rng.choice of an empty sequence"));
                }
                let rng = self.rng.as_mut().expect("checked by caller");
                let at = rng.randint(0, items.len() as i64 - 1).map_err(|m| rt(line, m))?;
                Ok(items[at as usize].clone())
            }
            "shuffle" => {
                arity(1)?;
                match &args[0] {
                    Value::List(xs) => {
                        let rng = self.rng.as_mut().expect("checked by caller");
                        rng.shuffle(&mut xs.borrow_mut());
                        Ok(args[0].clone())
                    }
                    other => Err(rt(
                        line,
                        format!("rng.shuffle needs a list, got {}", other.type_name()),
                    )),
                }
            }
            "gauss" => {
                arity(2)?;
                let mu = self.expect_f64(&args[0], line, "gauss mean")?;
                let sigma = self.expect_f64(&args[1], line, "gauss sigma")?;
                let rng = self.rng.as_mut().expect("checked by caller");
                finite(rng.gauss(mu, sigma), line)
            }
            "gammavariate" => {
                arity(2)?;
                let alpha = self.expect_f64(&args[0], line, "gammavariate alpha")?;
                let beta = self.expect_f64(&args[1], line, "gammavariate beta")?;
                let rng = self.rng.as_mut().expect("checked by caller");
                let v = rng.gammavariate(alpha, beta).map_err(|m| rt(line, m))?;
                finite(v, line)
            }
            _ => Err(rt(line, format!("unknown rng method '{method}'"))),
        }
    }
}

fn finite(v: f64, line: u32) -> EResult<Value> {
    if v.is_nan() {
        Err(rt(line, "invalid floating-point result"))
    } else if v.is_infinite() {
        Err(rt(line, "floating-point overflow"))
    } else {
        Ok(Value::Real(v))
    }
}

fn int_from_f64(v: f64, line: u32) -> EResult<Value> {
    if !v.is_finite() || v < i64::MIN as f64 || v >= i64::MAX as f64 {
        Err(rt(line, "integer result out of range"))
    } else {
        Ok(Value::Int(v as i64))
    }
}

/// Round a real to `digits` decimal places against its exact binary value:
/// the full decimal expansion is cut with ties to even, and the result is
/// re-read as the nearest representable real. Scaling by a power of ten
/// would mis-round values such as 2.675, whose expansion ends in ...749999.
fn round_real_digits(x: f64, digits: i64) -> f64 {
    if x == 0.0 {
        return x;
    }
    // 1100 fractional places cover the longest expansion a binary64 value has.
    let exact = format!("{:.1100}", x.abs());
    let (int_part, frac_part) = exact.split_once('.').expect("fixed-point format");
    let mut ds: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
    let mut point = int_part.len() as i64;
    let mut keep = point + digits;
    if keep < 1 {
        let pad = (1 - keep) as usize;
        ds.splice(0..0, std::iter::repeat(0).take(pad));
        point += pad as i64;
        keep = 1;
    }
    let keep = keep as usize;
    if keep >= ds.len() {
        return x;
    }
    let first_dropped = ds[keep];
    let rest_nonzero = ds[keep + 1..].iter().any(|&d| d != 0);
    ds.truncate(keep);
    let round_up = first_dropped > 5
        || (first_dropped == 5 && (rest_nonzero || ds.last().is_some_and(|d| d % 2 == 1)));
    if round_up {
        let mut i = ds.len();
        loop {
            if i == 0 {
                ds.insert(0, 1);
                point += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    let point = point as usize;
    let mut text = String::with_capacity(point.max(ds.len()) + 1);
    for &d in &ds[..point.min(ds.len())] {
        text.push((b'0' + d) as char);
    }
    for _ in ds.len()..point {
        text.push('0');
    }
    if ds.len() > point {
        text.push('.');
        for &d in &ds[point..] {
            text.push((b'0' + d) as char);
        }
    }
    let magnitude: f64 = text.parse().expect("decimal digits parse");
    if x < 0.0 { -magnitude } else { magnitude }
}

/// Round an exact rational to the nearest integer, ties to even.
fn round_half_even_rational(r: &Rational) -> i64 {
    let f = r.floor();
    // fraction = r - f compared against 1/2, exactly: 2*(p - f*q) vs q.
    let twice_frac = 2 * (r.numer() as i128 - f as i128 * r.denom() as i128);
    match twice_frac.cmp(&(r.denom() as i128)) {
        std::cmp::Ordering::Less => f,
        std::cmp::Ordering::Greater => f + 1,
        std::cmp::Ordering::Equal => {
            if f % 2 == 0 {
                f
            } else {
                f + 1
            }
        }
    }
}

fn int_binop(op: BinOp, a: i64, b: i64, line: u32) -> EResult<Value> {
    let overflow = || rt(line, "integer overflow");
    match op {
        BinOp::Add => a.checked_add(b).map(Value::Int).ok_or_else(overflow),
        BinOp::Sub => a.checked_sub(b).map(Value::Int).ok_or_else(overflow),
        BinOp::Mul => a.checked_mul(b).map(Value::Int).ok_or_else(overflow),
        BinOp::Div => {
            if b == 0 {
                return Err(rt(line, "division by zero"));
            }
            Rational::new(a, b).map(Value::from_rational).map_err(|_| overflow())
        }
        BinOp::FloorDiv => {
            if b == 0 {
                return Err(rt(line, "division by zero"));
            }
            let (big_a, big_b) = (a as i128, b as i128);
            let mut q = big_a / big_b;
            if big_a % big_b != 0 && ((big_a < 0) != (big_b < 0)) {
                q -= 1;
            }
            i64::try_from(q).map(Value::Int).map_err(|_| overflow())
        }
        BinOp::Mod => {
            if b == 0 {
                return Err(rt(line, "division by zero"));
            }
            let (big_a, big_b) = (a as i128, b as i128);
            let mut m = big_a % big_b;
            if m != 0 && ((m < 0) != (big_b < 0)) {
                m += big_b;
            }
            i64::try_from(m).map(Value::Int).map_err(|_| overflow())
        }
        BinOp::Pow => int_pow(a, b, line),
    }
}

fn int_pow(a: i64, b: i64, line: u32) -> EResult<Value> {
    if b >= 0 {
        match a {
            0 => return Ok(Value::Int(if b == 0 { 1 } else { 0 })),
            1 => return Ok(Value::Int(1)),
            -1 => return Ok(Value::Int(if b % 2 == 0 { 1 } else { -1 })),
            _ => {}
        }
        let exp = u32::try_from(b).map_err(|_| rt(line, "integer overflow"))?;
        a.checked_pow(exp).map(Value::Int).ok_or_else(|| rt(line, "integer overflow"))
    } else {
        if a == 0 {
            return Err(rt(line, "0 cannot be raised to a negative power"));
        }
        rational_pow(Rational::from_int(a), b, line)
    }
}

fn rational_binop(op: BinOp, a: Rational, b: Rational, line: u32) -> EResult<Value> {
    let map = |r: Result<Rational, crate::model::ModelError>| -> EResult<Value> {
        r.map(Value::from_rational).map_err(|e| match e {
            crate::model::ModelError::ZeroDenominator => rt(line, "division by zero"),
            _ => rt(line, "rational overflow"),
        })
    };
    match op {
        BinOp::Add => map(a.add(&b)),
        BinOp::Sub => map(a.sub(&b)),
        BinOp::Mul => map(a.mul(&b)),
        BinOp::Div => {
            if b.numer() == 0 {
                return Err(rt(line, "division by zero"));
            }
            map(a.div(&b))
        }
        BinOp::FloorDiv => {
            if b.numer() == 0 {
                return Err(rt(line, "division by zero"));
            }
            let q = a.div(&b).map_err(|_| rt(line, "rational overflow"))?;
            Ok(Value::Int(q.floor()))
        }
        BinOp::Mod => {
            if b.numer() == 0 {
                return Err(rt(line, "division by zero"));
            }
            let q = a.div(&b).map_err(|_| rt(line, "rational overflow"))?;
            let whole = Rational::from_int(q.floor());
            map(a.sub(&b.mul(&whole).map_err(|_| rt(line, "rational overflow"))?))
        }
        BinOp::Pow => {
            if b.is_integer() {
                rational_pow(a, b.numer(), line)
            } else {
                real_binop(BinOp::Pow, a.to_f64(), b.to_f64(), line)
            }
        }
    }
}

/// Exponentiation by squaring with checked rational products.
fn rational_pow(base: Rational, exp: i64, line: u32) -> EResult<Value> {
    if exp == 0 {
        return Ok(Value::Int(1));
    }
    let invert = exp < 0;
    if invert && base.numer() == 0 {
        return Err(rt(line, "0 cannot be raised to a negative power"));
    }
    let mut remaining = exp.unsigned_abs();
    let mut factor = base;
    let mut acc = Rational::from_int(1);
    let overflow = || rt(line, "rational overflow");
    while remaining > 0 {
        if remaining & 1 == 1 {
            acc = acc.mul(&factor).map_err(|_| overflow())?;
        }
        remaining >>= 1;
        if remaining > 0 {
            factor = factor.mul(&factor).map_err(|_| overflow())?;
        }
    }
    if invert {
        acc = Rational::from_int(1).div(&acc).map_err(|_| overflow())?;
    }
    Ok(Value::from_rational(acc))
}

fn real_binop(op: BinOp, x: f64, y: f64, line: u32) -> EResult<Value> {
    match op {
        BinOp::Add => finite(x + y, line),
        BinOp::Sub => finite(x - y, line),
        BinOp::Mul => finite(x * y, line),
        BinOp::Div => {
            if y == 0.0 {
                return Err(rt(line, "division by zero"));
            }
            finite(x / y, line)
        }
        BinOp::FloorDiv => {
            if y == 0.0 {
                return Err(rt(line, "division by zero"));
            }
            finite((x / y).floor(), line)
        }
        BinOp::Mod => {
            if y == 0.0 {
                return Err(rt(line, "division by zero"));
            }
            finite(x - y * (x / y).floor(), line)
        }
        BinOp::Pow => {
            let v = x.powf(y);
            if v.is_nan() {
                Err(rt(line, "math domain error in '**'"))
            } else {
                finite(v, line)
            }
        }
    }
}
