use proptest::prelude::*;

use super::*;
use crate::model::{SlotKind, SlotSpec};

const GEN_SRC: &str = "\
def generator(rng):
    a = rng.randint(2, 20)
    b = rng.randint(2, 20)
    if a == b:
        if b == 20:
            b = 2
        else:
            b += 1
    c = rng.randint(1, 10)
    return {\"a\": a, \"b\": b, \"c\": c}
";

const VER_SRC: &str = "\
def verifier(assign):
    a = assign[\"a\"]
    b = assign[\"b\"]
    c = assign[\"c\"]
    if a == b:
        return (False, None)
    return (True, a * b + c)
";

fn slot(name: &str) -> SlotSpec {
    SlotSpec {
        name: name.to_string(),
        kind: SlotKind::Int,
        bounds: None,
        choices: None,
        description: String::new(),
        harder_than_seed: false,
    }
}

fn abc_slots() -> Vec<SlotSpec> {
    vec![slot("a"), slot("b"), slot("c")]
}

fn parse_err(src: &str, role: Role) -> Diagnostic {
    match parse_program(src, role) {
        Ok(_) => panic!("expected a parse failure:\n{src}"),
        Err(mut diags) => diags.remove(0),
    }
}

fn check_msgs(src: &str, role: Role, slots: &[SlotSpec]) -> Vec<String> {
    let program = parse_program(src, role).expect("source parses");
    check_program(&program, slots).into_iter().map(|d| d.message).collect()
}

#[test]
fn the_worked_pair_compiles_cleanly() {
    let slots = abc_slots();
    compile_program(GEN_SRC, Role::Generator, &slots).expect("generator accepted");
    compile_program(VER_SRC, Role::Verifier, &slots).expect("verifier accepted");
}

#[test]
fn return_pair_forms_are_equivalent() {
    let a = parse_program(
        "def verifier(assign):\n    return (False, None)\n",
        Role::Verifier,
    )
    .unwrap();
    let b = parse_program(
        "def verifier(assign):\n    return False, None\n",
        Role::Verifier,
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn rejected_keywords_are_construct_diagnostics() {
    for kw in ["import", "lambda", "pass", "break", "continue", "is", "try", "yield"] {
        let src = format!("def generator(rng):\n    {kw} x\n    return {{\"a\": 1}}\n");
        let d = parse_err(&src, Role::Generator);
        assert_eq!(d.category, Category::Construct, "{kw}");
        assert!(
            d.message.contains(&format!("keyword '{kw}'")),
            "{kw} -> {}",
            d.message
        );
        assert_eq!(d.line, 2, "{kw}");
    }
}

#[test]
fn indentation_is_strict() {
    let tab = "def generator(rng):\n\treturn {\"a\": 1}\n";
    assert!(parse_err(tab, Role::Generator).message.contains("tab in indentation"));

    let three = "def generator(rng):\n   return {\"a\": 1}\n";
    assert!(parse_err(three, Role::Generator).message.contains("not a multiple of 4"));

    let jump = "def generator(rng):\n    x = 1\n            y = 2\n    return {\"a\": x}\n";
    assert!(parse_err(jump, Role::Generator).message.contains("more than one level"));

    let src = "def generator(rng):\n    if 1 < 2:\n        x = 1\n      y = 2\n";
    let d = parse_err(src, Role::Generator);
    assert!(
        d.message.contains("not a multiple of 4")
            || d.message.contains("unindent does not match"),
        "{}",
        d.message
    );
}

#[test]
fn the_function_signature_is_pinned() {
    let d = parse_err("def gen(rng):\n    return {\"a\": 1}\n", Role::Generator);
    assert_eq!(d.category, Category::Construct);
    assert!(d.message.contains("must define 'generator'"), "{}", d.message);
    assert_eq!(d.line, 1);

    let d = parse_err("def generator(seed):\n    return {\"a\": 1}\n", Role::Generator);
    assert!(d.message.contains("parameter named 'rng'"), "{}", d.message);

    let d = parse_err("def verifier(rng):\n    return (True, 1)\n", Role::Verifier);
    assert!(d.message.contains("parameter named 'assign'"), "{}", d.message);

    let two = "def generator(rng):\n    return {\"a\": 1}\ndef generator(rng):\n    return {\"a\": 2}\n";
    let d = parse_err(two, Role::Generator);
    assert!(d.message.contains("only one top-level function"), "{}", d.message);
}

#[test]
fn assignment_targets_are_plain_names() {
    let src = "def generator(rng):\n    xs = [1, 2]\n    xs[0] = 3\n    return {\"a\": xs[0]}\n";
    let d = parse_err(src, Role::Generator);
    assert_eq!(d.category, Category::Construct);
    assert!(d.message.contains("plain names"), "{}", d.message);

    let chained = "def generator(rng):\n    a = b = 1\n    return {\"a\": a}\n";
    let d = parse_err(chained, Role::Generator);
    assert!(d.message.contains("chained assignment"), "{}", d.message);

    let arity = "def generator(rng):\n    a, b = 1, 2, 3\n    return {\"a\": a}\n";
    let d = parse_err(arity, Role::Generator);
    assert_eq!(d.category, Category::Arity);
    assert!(d.message.contains("cannot unpack 3 values into 2 targets"), "{}", d.message);
}

#[test]
fn map_keys_must_be_string_literals() {
    let src = "def generator(rng):\n    return {a: 1}\n";
    let d = parse_err(src, Role::Generator);
    assert!(d.message.contains("string literals"), "{}", d.message);
}

#[test]
fn brackets_join_lines_implicitly() {
    let src = "\
def generator(rng):
    xs = [1,
          2,
          3]
    return {\"a\": xs[0] + xs[1] + xs[2]}
";
    let program = parse_program(src, Role::Generator).expect("multi-line list parses");
    assert!(check_program(&program, &[slot("a")]).is_empty());
}

#[test]
fn malformed_literals_are_reported() {
    let big = "def generator(rng):\n    return {\"a\": 99999999999999999999}\n";
    assert!(parse_err(big, Role::Generator).message.contains("out of range"));

    let dot = "def generator(rng):\n    return {\"a\": 1.}\n";
    assert!(parse_err(dot, Role::Generator).message.contains("digits after '.'"));

    let unterminated = "def generator(rng):\n    s = \"abc\n    return {\"a\": 1}\n";
    assert!(parse_err(unterminated, Role::Generator).message.contains("unterminated"));

    let at = "def generator(rng):\n    x = 1 @ 2\n    return {\"a\": x}\n";
    assert!(parse_err(at, Role::Generator).message.contains("unexpected character"));
}

#[test]
fn for_loops_require_an_explicit_range() {
    let src = "def generator(rng):\n    for x in [1, 2]:\n        y = x\n    return {\"a\": 1}\n";
    let d = parse_err(src, Role::Generator);
    assert_eq!(d.category, Category::Construct);
    assert!(d.message.contains("range"), "{}", d.message);

    let src = "def generator(rng):\n    for x in range():\n        y = x\n    return {\"a\": 1}\n";
    let d = parse_err(src, Role::Generator);
    assert_eq!(d.category, Category::Arity);
    assert!(d.message.contains("range takes 1 to 3 arguments"), "{}", d.message);
}

#[test]
fn rng_is_rejected_inside_verifiers() {
    let src = "def verifier(assign):\n    x = rng.randint(1, 2)\n    return (True, x)\n";
    let msgs = check_msgs(src, Role::Verifier, &abc_slots());
    assert!(
        msgs.iter().any(|m| m.contains("rng.randint is not available in a verifier")),
        "{msgs:?}"
    );
}

#[test]
fn unknown_names_and_functions_are_flagged() {
    let src = "def generator(rng):\n    x = q + 1\n    return {\"a\": x}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("unknown name 'q'")), "{msgs:?}");

    let src = "def generator(rng):\n    x = sin(1)\n    return {\"a\": x}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("unknown function 'sin'")), "{msgs:?}");

    let src = "def generator(rng):\n    x = rng.gamma(1, 2)\n    return {\"a\": x}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("unknown rng method 'gamma'")), "{msgs:?}");
}

#[test]
fn builtin_and_rng_arities_are_enforced() {
    let src = "def generator(rng):\n    x = gcd(4)\n    return {\"a\": x}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("gcd takes 2 arguments, got 1")), "{msgs:?}");

    let src = "def generator(rng):\n    x = min()\n    return {\"a\": x}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("at least 1")), "{msgs:?}");

    let src = "def generator(rng):\n    x = rng.randint(5)\n    return {\"a\": x}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(
        msgs.iter().any(|m| m.contains("rng.randint takes 2 to 2 arguments, got 1")),
        "{msgs:?}"
    );
}

#[test]
fn parameters_cannot_be_rebound() {
    let src = "def generator(rng):\n    rng = 1\n    return {\"a\": rng}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("cannot rebind parameter 'rng'")), "{msgs:?}");

    let src = "def verifier(assign):\n    assign = 1\n    return (True, assign)\n";
    let msgs = check_msgs(src, Role::Verifier, &abc_slots());
    assert!(msgs.iter().any(|m| m.contains("cannot rebind parameter 'assign'")), "{msgs:?}");
}

#[test]
fn tuples_live_only_in_return_position() {
    let src = "def generator(rng):\n    x = (1, 2)\n    return {\"a\": 1}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(
        msgs.iter().any(|m| m.contains("only allowed as a return value")),
        "{msgs:?}"
    );
}

#[test]
fn method_calls_are_rng_only() {
    let src = "def generator(rng):\n    xs = [1]\n    xs.append(2)\n    return {\"a\": xs[0]}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(
        msgs.iter().any(|m| m.contains("'xs' has no methods; only rng.* calls are supported")),
        "{msgs:?}"
    );

    let src = "def generator(rng):\n    xs = [1]\n    xs[0].append(2)\n    return {\"a\": xs[0]}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(
        msgs.iter().any(|m| m.contains("method calls are only supported on rng")),
        "{msgs:?}"
    );
}

#[test]
fn return_shapes_are_checked() {
    let src = "def generator(rng):\n    return 1, 2\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("single slot map")), "{msgs:?}");

    let src = "def generator(rng):\n    return {\"a\": 1, \"a\": 2}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("duplicate key 'a'")), "{msgs:?}");

    let src = "def generator(rng):\n    return {\"zz\": 1}\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("unknown slot 'zz'")), "{msgs:?}");
    assert!(msgs.iter().any(|m| m.contains("slot 'a' never assigned")), "{msgs:?}");

    let src = "def generator(rng):\n    x = 1\n";
    let msgs = check_msgs(src, Role::Generator, &[slot("a")]);
    assert!(msgs.iter().any(|m| m.contains("no return statement")), "{msgs:?}");

    let src = "def verifier(assign):\n    return True\n";
    let msgs = check_msgs(src, Role::Verifier, &abc_slots());
    assert!(msgs.iter().any(|m| m.contains("(valid, answer)")), "{msgs:?}");

    let src = "def verifier(assign):\n    return (True, assign[\"zz\"])\n";
    let msgs = check_msgs(src, Role::Verifier, &abc_slots());
    assert!(msgs.iter().any(|m| m.contains("unknown slot 'zz'")), "{msgs:?}");
}

#[test]
fn pretty_output_is_canonical_and_stable() {
    let program = parse_program(GEN_SRC, Role::Generator).unwrap();
    let rendered = pretty(&program);
    assert_eq!(rendered, GEN_SRC, "the worked example is already canonical");
    let reparsed = parse_program(&rendered, Role::Generator).unwrap();
    assert_eq!(program, reparsed);
    assert_eq!(pretty(&reparsed), rendered, "pretty is idempotent");
}

#[test]
fn pretty_parenthesizes_compound_operands() {
    let src = "def verifier(assign):\n    return (True, 2 + 3 * 4 ** 2)\n";
    let program = parse_program(src, Role::Verifier).unwrap();
    let rendered = pretty(&program);
    assert!(rendered.contains("2 + (3 * (4 ** 2))"), "{rendered}");
    assert_eq!(parse_program(&rendered, Role::Verifier).unwrap(), program);
}

#[test]
fn diagnostics_render_with_line_and_category() {
    let d = Diagnostic::new(3, Category::ReturnShape, "bad shape");
    assert_eq!(d.to_string(), "line 3: return-shape: bad shape");
}

// --- property tests ------------------------------------------------------

/// Identifiers that can never collide with keywords or the parameter names.
fn ident_pool() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "x".to_string(),
        "y".to_string(),
        "z0".to_string(),
        "total".to_string(),
        "acc".to_string(),
        "items".to_string(),
        "left7".to_string(),
        "v_1".to_string(),
    ])
}

fn literal_string() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-zA-Z0-9 _,.:\\-]{0,12}").expect("valid regex")
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..=i64::MAX).prop_map(|value| Expr::Int { line: Line(0), value }),
        (0.0f64..1e9).prop_map(|value| Expr::Real { line: Line(0), value }),
        literal_string().prop_map(|value| Expr::Str { line: Line(0), value }),
        any::<bool>().prop_map(|value| Expr::Bool { line: Line(0), value }),
        Just(Expr::NoneLit { line: Line(0) }),
        ident_pool().prop_map(|id| Expr::Name { line: Line(0), id }),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        let bin_op = prop::sample::select(vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::FloorDiv,
            BinOp::Mod,
            BinOp::Pow,
        ]);
        let cmp_op = prop::sample::select(vec![
            CmpOp::Eq,
            CmpOp::Ne,
            CmpOp::Lt,
            CmpOp::Le,
            CmpOp::Gt,
            CmpOp::Ge,
        ]);
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3)
                .prop_map(|items| Expr::List { line: Line(0), items }),
            prop::collection::vec((literal_string(), inner.clone()), 0..3).prop_map(
                |entries| Expr::MapLit { line: Line(0), entries }
            ),
            (bin_op, inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::Binary {
                line: Line(0),
                op,
                left: Box::new(l),
                right: Box::new(r),
            }),
            inner.clone().prop_map(|e| Expr::Unary {
                line: Line(0),
                op: UnaryOp::Neg,
                operand: Box::new(e),
            }),
            inner.clone().prop_map(|e| Expr::Unary {
                line: Line(0),
                op: UnaryOp::Not,
                operand: Box::new(e),
            }),
            (
                prop::sample::select(vec![BoolOp::And, BoolOp::Or]),
                prop::collection::vec(inner.clone(), 2..4)
            )
                .prop_map(|(op, operands)| Expr::BoolChain { line: Line(0), op, operands }),
            (cmp_op, inner.clone(), inner.clone()).prop_map(|(op, first, second)| {
                Expr::Compare { line: Line(0), first: Box::new(first), rest: vec![(op, second)] }
            }),
            (
                prop::sample::select(vec!["abs", "len", "gcd", "min", "floor"]),
                prop::collection::vec(inner.clone(), 1..3)
            )
                .prop_map(|(func, args)| Expr::Call {
                    line: Line(0),
                    func: func.to_string(),
                    args
                }),
            (
                prop::sample::select(vec!["random", "randint", "choice"]),
                prop::collection::vec(inner.clone(), 0..3)
            )
                .prop_map(|(method, args)| Expr::MethodCall {
                    line: Line(0),
                    base: Box::new(Expr::Name { line: Line(0), id: "rng".to_string() }),
                    method: method.to_string(),
                    args,
                }),
            (inner.clone(), inner).prop_map(|(base, index)| Expr::Index {
                line: Line(0),
                base: Box::new(base),
                index: Box::new(index),
            }),
        ]
    })
}

fn arb_stmt(depth: u32) -> BoxedStrategy<Stmt> {
    let assign = (
        prop::collection::vec(ident_pool(), 1..3),
        prop::collection::vec(arb_expr(), 1..3),
    )
        .prop_filter_map("target/value arity", |(targets, values)| {
            if values.len() == 1 || values.len() == targets.len() {
                Some(Stmt::Assign { line: Line(0), targets, values })
            } else {
                None
            }
        });
    let aug = (
        ident_pool(),
        prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Pow]),
        arb_expr(),
    )
        .prop_map(|(target, op, value)| Stmt::AugAssign { line: Line(0), target, op, value });
    let ret = prop::collection::vec(arb_expr(), 0..3)
        .prop_map(|values| Stmt::Return { line: Line(0), values });
    let assert_stmt = (arb_expr(), prop::option::of(arb_expr()))
        .prop_map(|(cond, message)| Stmt::Assert { line: Line(0), cond, message });
    let expr_stmt = arb_expr().prop_map(|expr| Stmt::ExprStmt { line: Line(0), expr });

    if depth == 0 {
        prop_oneof![assign, aug, ret, assert_stmt, expr_stmt].boxed()
    } else {
        let body = || prop::collection::vec(arb_stmt(depth - 1), 1..3);
        let if_stmt = (
            prop::collection::vec((arb_expr(), body()), 1..3),
            prop_oneof![Just(Vec::new()), body()],
        )
            .prop_map(|(arms, orelse)| Stmt::If { line: Line(0), arms, orelse });
        let for_stmt = (
            ident_pool(),
            prop::collection::vec(arb_expr(), 1..4),
            body(),
        )
            .prop_map(|(var, range_args, body)| Stmt::For {
                line: Line(0),
                var,
                range_args,
                body,
            });
        let while_stmt = (arb_expr(), body())
            .prop_map(|(cond, body)| Stmt::While { line: Line(0), cond, body });
        prop_oneof![assign, aug, ret, assert_stmt, expr_stmt, if_stmt, for_stmt, while_stmt]
            .boxed()
    }
}

fn arb_program() -> impl Strategy<Value = Program> {
    (any::<bool>(), prop::collection::vec(arb_stmt(2), 1..4)).prop_map(|(gen, body)| {
        let role = if gen { Role::Generator } else { Role::Verifier };
        Program {
            role,
            name: role.function_name().to_string(),
            param: role.param_name().to_string(),
            body,
        }
    })
}

proptest! {
    /// Rendering and reparsing yields a structurally identical tree.
    #[test]
    fn pretty_then_parse_is_identity(program in arb_program()) {
        let rendered = pretty(&program);
        let reparsed = parse_program(&rendered, program.role)
            .unwrap_or_else(|d| panic!("render must reparse: {d:?}\n{rendered}"));
        prop_assert_eq!(&reparsed, &program);
        prop_assert_eq!(pretty(&reparsed), rendered);
    }

    /// Function names outside the whitelist never pass the checker.
    #[test]
    fn non_whitelisted_calls_are_rejected(name in "[a-z][a-z0-9_]{0,8}") {
        prop_assume!(BUILTINS.iter().all(|(b, _, _)| *b != name));
        prop_assume!(name != "range");
        let src = format!(
            "def generator(rng):\n    x = {name}(1)\n    return {{\"a\": x}}\n"
        );
        match parse_program(&src, Role::Generator) {
            // Keyword-colliding names fail at parse time; anything else
            // must be flagged by the checker.
            Err(_) => {}
            Ok(program) => {
                let slots = [slot("a")];
                let diags = check_program(&program, &slots);
                prop_assert!(
                    diags.iter().any(|d| d.message.contains(&format!("'{name}'"))),
                    "{name} slipped through: {diags:?}"
                );
            }
        }
    }

    /// The front end never panics, whatever bytes arrive.
    #[test]
    fn parsing_never_panics(src in "(?s).{0,200}") {
        let _ = parse_program(&src, Role::Generator);
        let _ = parse_program(&src, Role::Verifier);
    }
}
