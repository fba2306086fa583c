use proptest::prelude::*;

use super::*;

const PENDULUM: &str = include_str!("../../listings/pendulum.acm");
const DOUBLE_PENDULUM: &str = include_str!("../../listings/double_pendulum.acm");
const QUADCOPTER: &str = include_str!("../../listings/quadcopter.acm");

fn expr(src: &str) -> Expr {
    parse_expression(src).unwrap()
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn var(name: &str) -> Expr {
    Expr::Var(VarRef::new(name, 0))
}

#[test]
fn pendulum_listing_shape() {
    let m = parse_model(PENDULUM).unwrap();
    assert_eq!(m.classes.len(), 1);
    let c = &m.classes[0];
    assert_eq!(c.name, "pendulum");
    assert_eq!(c.params, vec!["l"]);
    assert_eq!(c.private_inits.len(), 4);
    assert_eq!(c.continuous_count(), 1);
}

#[test]
fn quadcopter_listing_shape() {
    let m = parse_model(QUADCOPTER).unwrap();
    let c = m.class("QuadCopter").unwrap();
    assert_eq!(c.params, vec!["P", "phi", "theta", "psi"]);
    // T, 4 x (f_i, TM_i), wT, 7 trig shorthands, P'', p' q' r', phi'' theta'' psi''
    assert_eq!(c.continuous_count(), 24);
    assert_eq!(c.body.len(), 24);
    let targets: Vec<String> = c
        .body
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Continuous { lhs, .. } => Some(lhs.to_string()),
            _ => None,
        })
        .collect();
    for name in ["T", "f1", "TM4", "wT", "Ch", "Tt", "P''", "p'", "q'", "r'", "phi''", "theta''", "psi''"] {
        assert!(targets.iter().any(|t| t == name), "missing continuous target `{name}` in {targets:?}");
    }
}

#[test]
fn double_pendulum_listing_parses() {
    let m = parse_model(DOUBLE_PENDULUM).unwrap();
    let c = m.class("double_pendulum").unwrap();
    assert_eq!(c.params.len(), 4);
    assert_eq!(c.continuous_count(), 2);
}

#[test]
fn minimal_class() {
    let m = parse_model("class A () private end end").unwrap();
    assert_eq!(m.classes.len(), 1);
    assert!(m.classes[0].params.is_empty());
    assert!(m.classes[0].private_inits.is_empty());
    assert!(m.classes[0].body.is_empty());
}

#[test]
fn power_binds_tighter_than_negation() {
    assert_eq!(expr("-x^2"), Expr::Unary(UnaryOp::Neg, Box::new(Expr::binary(BinaryOp::Pow, var("x"), num(2.0)))));
}

#[test]
fn power_is_right_associative() {
    assert_eq!(expr("a^b^c"), Expr::binary(BinaryOp::Pow, var("a"), Expr::binary(BinaryOp::Pow, var("b"), var("c"))));
    assert_eq!(expr("10^(-5)"), Expr::binary(BinaryOp::Pow, num(10.0), Expr::Unary(UnaryOp::Neg, Box::new(num(5.0)))));
}

#[test]
fn arithmetic_and_logic_levels() {
    assert_eq!(
        expr("a + b * c"),
        Expr::binary(BinaryOp::Add, var("a"), Expr::binary(BinaryOp::Mul, var("b"), var("c")))
    );
    assert_eq!(
        expr("a - b - c"),
        Expr::binary(BinaryOp::Sub, Expr::binary(BinaryOp::Sub, var("a"), var("b")), var("c"))
    );
    assert_eq!(
        expr("a < 1 || b && c == 2"),
        Expr::binary(
            BinaryOp::Or,
            Expr::binary(BinaryOp::Lt, var("a"), num(1.0)),
            Expr::binary(BinaryOp::And, var("b"), Expr::binary(BinaryOp::Eq, var("c"), num(2.0)))
        )
    );
}

#[test]
fn literals() {
    assert_eq!(expr("[[1,2],[3,4]]"), Expr::Matrix(vec![vec![num(1.0), num(2.0)], vec![num(3.0), num(4.0)]]));
    assert_eq!(expr("\"Hello\""), Expr::Str("Hello".into()));
    assert_eq!(expr("True"), Expr::Bool(true));
    assert_eq!(expr("s.p'"), Expr::Var(VarRef { path: vec!["s".into(), "p".into()], order: 1 }));
}

#[test]
fn ragged_matrix_and_empty_vector_rejected() {
    assert!(matches!(parse_expression("[[1,2],[3]]"), Err(LangError::Parse { .. })));
    assert!(matches!(parse_expression("[]"), Err(LangError::Parse { .. })));
}

#[test]
fn builtin_arity_checked() {
    assert!(parse_expression("dot([1],[2])").is_ok());
    assert!(matches!(parse_expression("dot([1])"), Err(LangError::Parse { .. })));
    assert!(matches!(parse_expression("sin(1, 2)"), Err(LangError::Parse { .. })));
    assert!(matches!(parse_expression("frob(1)"), Err(LangError::Parse { .. })));
}

#[test]
fn parse_error_is_positioned() {
    let err = parse_model("class A ()\nprivate x := 1 end\n  x = ;\nend").unwrap_err();
    match err {
        LangError::Parse { pos, .. } => assert_eq!(pos, Pos { line: 3, col: 7 }),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn missing_separator_is_an_error() {
    let err = parse_model("class A () private x := 0; y := 0 end x = 1 y = 2 end").unwrap_err();
    assert!(matches!(err, LangError::Parse { .. }));
}

#[test]
fn if_switch_and_else() {
    let src = "class A (k)
private x := 0; x' := 0; mode := 1 end
  if x > 1 x' := 0 else x' = 1 end
  switch mode
    case 1 x' = 2;
    case -2 x' = 3
  end;
end";
    let m = parse_model(src).unwrap();
    let body = &m.classes[0].body;
    assert_eq!(body.len(), 2);
    match &body[1].kind {
        StmtKind::Switch { cases, .. } => {
            assert_eq!(cases.len(), 2);
            assert_eq!(cases[1].0, CaseLabel::Num(-2.0));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn block_statements_need_no_separator() {
    let src = "class A () private x := 0 end
  if x < 0 x := 1 end
  x := x
end";
    assert_eq!(parse_model(src).unwrap().classes[0].body.len(), 2);
}

#[test]
fn create_and_child_access() {
    let src = "class mass_1d (m, p0)
private p := p0; p' := 0; p'' := 0; f := 0 end
  p'' = f/m;
end
class example ()
private b := create mass_1d (10, 3) end
  b.f = b.m * -9.8;
  if (b.p < 0 && b.p' < 0)
    b.p' := -0.9 * b.p'
  end
end";
    let m = parse_model(src).unwrap();
    assert_eq!(m.classes.len(), 2);
}

#[test]
fn create_only_in_private() {
    let src = "class B () private end end
class A () private x := 0 end x := create B() end";
    assert!(matches!(parse_model(src), Err(LangError::Parse { .. })));
}

#[test]
fn load_errors() {
    let dup = "class A () private end end class A () private end end";
    assert!(matches!(parse_model(dup), Err(LangError::Load(p)) if p[0].contains("duplicate class")));

    let undefined = "class A () private x := 0 end x = y end";
    assert!(matches!(parse_model(undefined), Err(LangError::Load(p)) if p[0].contains("undefined variable `y`")));

    let bad_create = "class A () private b := create Nope() end end";
    assert!(matches!(parse_model(bad_create), Err(LangError::Load(p)) if p[0].contains("undefined class")));

    let cyclic = "class A () private b := create B() end end class B () private a := create A() end end";
    assert!(matches!(parse_model(cyclic), Err(LangError::Load(p)) if p.iter().any(|m| m.contains("cyclic"))));

    let clash = "class A (x) private x := 1 end end";
    assert!(matches!(parse_model(clash), Err(LangError::Load(_))));

    let two_orders = "class A () private x := 0; x' := 0 end x' = 1; x'' = 2 end";
    assert!(matches!(parse_model(two_orders), Err(LangError::Load(p)) if p[0].contains("several derivative orders")));

    let bad_child = "class B () private v := 0 end end class A () private b := create B() end b.w = 1 end";
    assert!(matches!(parse_model(bad_child), Err(LangError::Load(_))));
}

#[test]
fn param_derivative_may_be_initialized_privately() {
    // the quadcopter listing initializes P' and P'' for parameter P
    parse_model("class A (P) private P' := 0; P'' := 0 end P'' = 1 end").unwrap();
}

#[test]
fn terminate_parses() {
    let m = parse_model("class A () private x := 0 end terminate x end").unwrap();
    assert!(matches!(m.classes[0].body[0].kind, StmtKind::Terminate { .. }));
}

fn roundtrip(src: &str) {
    let mut first = parse_model(src).unwrap();
    let printed = first.to_string();
    let mut second = parse_model(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
    first.strip_positions();
    second.strip_positions();
    assert_eq!(first, second, "{printed}");
}

#[test]
fn listings_roundtrip() {
    roundtrip(PENDULUM);
    roundtrip(DOUBLE_PENDULUM);
    roundtrip(QUADCOPTER);
    roundtrip(
        "class A (k) private x := [[1,2],[3,4]]; s := \"hi\"; b := !true end
  if -(k - 1)^2 < 2^-1 && b x := (x) else x := -x end;
  switch s case \"hi\" k = (1 - 2) - (3 - 4) end
end",
    );
}

// random expression sources for the totality/round-trip properties
fn arb_expr_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..100).prop_map(|n| n.to_string()),
        Just("x".to_string()),
        Just("y'".to_string()),
        Just("1.5".to_string()),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^", "<", "&&", "||", "=="]), inner.clone())
                .prop_map(|(a, op, b)| format!("{a} {op} {b}")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("[{a}, {b}]")),
        ]
    })
}

proptest! {
    #[test]
    fn parsing_is_total(src in "\\PC{0,80}") {
        // any input yields a model or a positioned error
        match parse_model(&src) {
            Ok(_) => {}
            Err(LangError::Load(p)) => prop_assert!(!p.is_empty()),
            Err(e) => prop_assert!(e.pos().is_some()),
        }
    }

    #[test]
    fn parsing_is_total_on_near_miss_sources(cut in 0usize..400) {
        let src: String = QUADCOPTER.chars().take(cut).collect();
        let _ = parse_model(&src);
    }

    #[test]
    fn expression_print_reparses(src in arb_expr_src()) {
        let e = parse_expression(&src).unwrap();
        let printed = e.to_string();
        prop_assert_eq!(parse_expression(&printed).unwrap(), e);
    }
}
