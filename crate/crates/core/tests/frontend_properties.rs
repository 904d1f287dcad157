//! Parser, printer and checker properties over random syntax trees and the
//! fixture corpus.

use proptest::prelude::*;
use vcbench_core::lang::*;
use vcbench_core::theory::{Library, COMPONENT_SOURCES};

fn id(name: &str) -> Ident {
    Ident::new(name, Pos::default())
}

fn e(kind: ExprKind) -> Expr {
    Expr::new(kind, Pos::default())
}

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "Q", "S", "Count"]).prop_map(str::to_string)
}

fn int() -> impl Strategy<Value = ExprKind> {
    (-3i64..20).prop_map(|n| ExprKind::Int(n.into()))
}

/// Assertion expressions: the full notation.
fn math_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        int(),
        any::<bool>().prop_map(ExprKind::Bool),
        name().prop_map(ExprKind::Name),
        name().prop_map(ExprKind::Old),
        prop::sample::select(vec!["min_int", "max_int", "empty_string"]).prop_map(|n| ExprKind::Name(n.into())),
    ]
    .prop_map(e);
    leaf.prop_recursive(4, 24, 3, |inner| {
        let op = prop::sample::select(vec![
            BinOp::Implies,
            BinOp::And,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::Le,
            BinOp::Lt,
            BinOp::Add,
            BinOp::Sub,
            BinOp::Concat,
        ]);
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| ExprKind::Binary(o, Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| ExprKind::Not(Box::new(a))),
            inner.clone().prop_map(|a| ExprKind::Len(Box::new(a))),
            inner.clone().prop_map(|a| ExprKind::Singleton(Box::new(a))),
            inner.clone().prop_map(|a| ExprKind::Call("Reverse".into(), vec![a])),
            prop::collection::vec(inner, 0..3).prop_map(|args| ExprKind::Call("F".into(), args)),
        ]
        .prop_map(e)
    })
}

/// Executable expressions: no assertion-only notation.
fn code_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![int(), any::<bool>().prop_map(ExprKind::Bool), name().prop_map(ExprKind::Name)].prop_map(e);
    leaf.prop_recursive(3, 12, 2, |inner| {
        let op = prop::sample::select(vec![BinOp::Eq, BinOp::Ne, BinOp::Le, BinOp::Lt, BinOp::Add, BinOp::Sub]);
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| ExprKind::Binary(o, Box::new(a), Box::new(b))),
            prop::collection::vec(inner, 0..3).prop_map(|args| ExprKind::Call("Depth".into(), args)),
        ]
        .prop_map(e)
    })
}

fn stmt() -> impl Strategy<Value = Stmt> {
    let simple = prop_oneof![
        (prop::collection::vec(name(), 1..3), name()).prop_map(|(ns, t)| StmtKind::Var {
            names: ns.iter().map(|n| id(n)).collect(),
            ty: id(&t),
        }),
        (name(), name()).prop_map(|(a, b)| StmtKind::Swap(id(&a), id(&b))),
        (name(), code_expr()).prop_map(|(t, v)| StmtKind::Assign { target: id(&t), value: v }),
        prop::collection::vec(code_expr(), 0..3).prop_map(|args| StmtKind::Call { name: id("Push"), args }),
    ]
    .prop_map(|kind| Stmt { kind, pos: Pos::default() });
    simple.prop_recursive(2, 12, 3, |inner| {
        let block = prop::collection::vec(inner, 0..3);
        prop_oneof![
            (code_expr(), block.clone(), prop::option::of(prop::collection::vec(stmt_leaf(), 1..3))).prop_map(
                |(cond, then_branch, else_branch)| StmtKind::If { cond, then_branch, else_branch }
            ),
            (
                code_expr(),
                prop::option::of(prop::collection::vec(name(), 1..3)),
                prop::option::of(math_expr()),
                prop::option::of(math_expr()),
                block,
            )
                .prop_map(|(cond, changing, maintaining, decreasing, body)| StmtKind::While {
                    cond,
                    changing: changing.map(|c| c.iter().map(|n| id(n)).collect()),
                    maintaining,
                    decreasing,
                    body,
                }),
        ]
        .prop_map(|kind| Stmt { kind, pos: Pos::default() })
    })
}

fn stmt_leaf() -> impl Strategy<Value = Stmt> {
    (name(), name()).prop_map(|(a, b)| Stmt {
        kind: StmtKind::Swap(id(&a), id(&b)),
        pos: Pos::default(),
    })
}

fn operation(with_body: bool) -> impl Strategy<Value = Operation> {
    let mode = prop::sample::select(vec![
        Mode::Updates,
        Mode::Replaces,
        Mode::Restores,
        Mode::Preserves,
        Mode::Evaluates,
        Mode::Alters,
        Mode::Clears,
    ]);
    let formal = (mode, name(), prop::sample::select(vec!["Integer", "Stack"]))
        .prop_map(|(mode, n, t)| Formal { mode, name: id(&n), ty: id(t) });
    let body = (any::<bool>(), math_expr(), prop::collection::vec(stmt(), 0..4)).prop_map(|(recursive, d, stmts)| {
        Procedure {
            recursive,
            decreasing: recursive.then_some(d),
            stmts,
            pos: Pos::default(),
            end_pos: Pos::default(),
        }
    });
    (
        prop::sample::select(vec!["P", "Flip", "Do_It"]),
        prop::collection::vec(formal, 0..3),
        prop::option::of(Just(id("Integer"))),
        prop::option::of(math_expr()),
        prop::option::of(math_expr()),
        (any::<bool>(), body).prop_map(move |(b, body)| (with_body && b).then_some(body)),
    )
        .prop_map(|(n, formals, result, requires, ensures, body)| Operation {
            name: id(n),
            formals,
            result,
            requires,
            ensures,
            body,
        })
}

fn module() -> impl Strategy<Value = SourceModule> {
    let concept = (prop::collection::vec(math_expr(), 0..2), prop::collection::vec(operation(false), 0..3)).prop_map(
        |(constraints, ops)| {
            let mut decls = vec![Decl::TypeModel {
                name: id("Stack"),
                model: ModelType::Str(id("Entry")),
            }];
            decls.extend(constraints.into_iter().map(Decl::Constraint));
            decls.extend(ops.into_iter().map(Decl::Operation));
            SourceModule {
                kind: ModuleKind::Concept,
                name: id("Stack_Template"),
                params: vec![Param::Type(id("Entry")), Param::Constant { name: id("Max_Depth"), ty: id("Integer") }],
                enhancement: None,
                concept: None,
                uses: vec![id("String_Theory")],
                decls,
                source_text: String::new(),
            }
        },
    );
    let realization = prop::collection::vec(operation(true), 0..3).prop_map(|ops| SourceModule {
        kind: ModuleKind::Realization,
        name: id("Iterative_Realiz"),
        params: vec![],
        enhancement: Some(id("Flipping")),
        concept: Some(id("Stack_Template")),
        uses: vec![],
        decls: ops.into_iter().map(Decl::Operation).collect(),
        source_text: String::new(),
    });
    let facility = prop::collection::vec(operation(true), 0..3).prop_map(|ops| SourceModule {
        kind: ModuleKind::Facility,
        name: id("Main_Fac"),
        params: vec![],
        enhancement: None,
        concept: None,
        uses: vec![],
        decls: ops.into_iter().map(Decl::Operation).collect(),
        source_text: String::new(),
    });
    prop_oneof![concept, realization, facility]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printed_modules_reparse_to_the_same_tree(m in module()) {
        let printed = print_module(&m);
        let mut back = parse(&printed).map_err(|d| TestCaseError::fail(format!("{d:?}\n{printed}")))?;
        back.clear_positions();
        prop_assert_eq!(&back, &m, "{}", printed);
        prop_assert_eq!(print_module(&back), printed);
    }
}

fn corpus_sources() -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "rsl"))
        .map(|p| (p.display().to_string(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out.extend(COMPONENT_SOURCES.iter().map(|s| ("<built-in>".to_string(), s.to_string())));
    out
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for (path, src) in corpus_sources() {
        let mut a = parse(&src).unwrap_or_else(|d| panic!("{path}: {d:?}"));
        let printed = print_module(&a);
        let mut b = parse(&printed).unwrap_or_else(|d| panic!("{path} reprinted: {d:?}\n{printed}"));
        a.clear_positions();
        b.clear_positions();
        assert_eq!(a, b, "{path}");
    }
}

#[test]
fn front_end_is_deterministic() {
    let lib = Library::shared();
    for (path, src) in corpus_sources() {
        let a = parse(&src).unwrap();
        let b = parse(&src).unwrap();
        assert_eq!(a, b, "{path}");
        if a.kind == ModuleKind::Concept {
            continue;
        }
        let ta = check_module(&a, lib).map(|t| format!("{t:?}"));
        let tb = check_module(&b, lib).map(|t| format!("{t:?}"));
        assert_eq!(ta, tb, "{path}");
    }
}

#[test]
fn corpus_modules_check_cleanly() {
    let lib = Library::shared();
    for (path, src) in corpus_sources().into_iter().filter(|(p, _)| p != "<built-in>") {
        let m = parse(&src).unwrap();
        if let Err(d) = check_module(&m, lib) {
            panic!("{path}: {d:?}");
        }
    }
}
