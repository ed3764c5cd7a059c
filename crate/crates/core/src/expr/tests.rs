use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;

use super::*;

fn e(s: &str) -> FieldExpr {
    parse_expression(s).unwrap()
}

fn v(s: &str) -> Box<FieldExpr> {
    Box::new(FieldExpr::var(s))
}

fn assign(pairs: &[(&str, u64)]) -> HashMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn parses_quotient_of_differences() {
    assert_eq!(
        e("(A-B)/(C-D)"),
        FieldExpr::Div(
            Box::new(FieldExpr::Sub(v("A"), v("B"))),
            Box::new(FieldExpr::Sub(v("C"), v("D")))
        )
    );
}

#[test]
fn products_bind_tighter_than_differences() {
    assert_eq!(
        e("A*B - C*D"),
        FieldExpr::Sub(
            Box::new(FieldExpr::Mul(v("A"), v("B"))),
            Box::new(FieldExpr::Mul(v("C"), v("D")))
        )
    );
}

#[test]
fn reports_syntax_error_offset() {
    let err = parse_expression("A+*B").unwrap_err();
    assert_eq!(err.offset(), Some(2));
    assert!(matches!(err, ParseError::Unexpected { .. }));
}

#[test]
fn reports_unbalanced_and_empty() {
    assert_eq!(
        parse_expression("(A+B").unwrap_err(),
        ParseError::UnclosedParen { offset: 0 }
    );
    assert_eq!(
        parse_expression("A+B)").unwrap_err(),
        ParseError::UnmatchedParen { offset: 3 }
    );
    assert_eq!(parse_expression("   ").unwrap_err(), ParseError::Empty);
}

#[test]
fn unary_minus_and_associativity() {
    assert_eq!(e("-A*B"), FieldExpr::Mul(Box::new(FieldExpr::Neg(v("A"))), v("B")));
    assert_eq!(e("A-B-C"), FieldExpr::Sub(Box::new(FieldExpr::Sub(v("A"), v("B"))), v("C")));
    assert_eq!(e("A-(B-C)").to_string(), "A-(B-C)");
    assert_eq!(e("A/(B*C)").to_string(), "A/(B*C)");
}

#[test]
fn free_variables_are_leaf_names() {
    let names = |s: &str| -> BTreeSet<String> { e(s).free_variables() };
    assert_eq!(names("(A-B)/(C-D)"), ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect());
    assert_eq!(names("A*A"), ["A".to_string()].into_iter().collect());
    assert!(names("3").is_empty());
}

#[test]
fn evaluates_over_prime_field() {
    let a = assign(&[("A", 1), ("B", 2), ("C", 3), ("D", 4)]);
    assert_eq!(evaluate(&e("(A+B)/(C+D)"), &a, 5).unwrap(), FieldValue::Finite(4));
    let b = assign(&[("A", 1), ("B", 2), ("C", 3), ("D", 3)]);
    assert_eq!(evaluate(&e("(A-B)/(C-D)"), &b, 5).unwrap(), FieldValue::Infinity);
    let c = assign(&[("A", 0), ("B", 3)]);
    assert_eq!(evaluate(&e("A*B"), &c, 5).unwrap(), FieldValue::Finite(0));
    assert_eq!(
        evaluate(&e("A+Z"), &c, 5).unwrap_err(),
        EvalError::Unbound("Z".into())
    );
}

#[test]
fn infinity_absorbs_and_constants_reduce() {
    let a = assign(&[("A", 2), ("B", 2)]);
    assert_eq!(evaluate(&e("0*(A/(A-B))"), &a, 7).unwrap(), FieldValue::Infinity);
    assert_eq!(evaluate(&e("-(1/(A-B))"), &a, 7).unwrap(), FieldValue::Infinity);
    assert_eq!(evaluate(&e("A+12"), &a, 7).unwrap(), FieldValue::Finite(0));
}

#[test]
fn compiled_matches_tree_evaluation() {
    let expr = e("(A*B - C*D)/(A+C) + -B");
    let slots: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
    let compiled = CompiledExpr::new(&expr, &slots, 7).unwrap();
    for x in 0..7u64.pow(4) {
        let vals = [x % 7, x / 7 % 7, x / 49 % 7, x / 343];
        let map: HashMap<String, u64> = slots.iter().cloned().zip(vals).collect();
        assert_eq!(compiled.eval(&vals), evaluate(&expr, &map, 7).unwrap());
    }
}

#[test]
fn canonical_form_ignores_commutation() {
    assert_eq!(e("B*A + C").canonical(), e("C + A*B").canonical());
    assert_eq!(e("(A+B)+C").canonical(), e("A+(C+B)").canonical());
    assert_ne!(e("A-B").canonical(), e("B-A").canonical());
}

#[test]
fn parses_slope_statement() {
    let s = parse_statement(
        "H((A-B)/(C-D)) + 5 H(A) <= 4 H(A*B) + 2 H(A-B) where A,B,C,D iid nonzero",
    )
    .unwrap();
    assert_eq!(s.groups.len(), 1);
    let g = &s.groups[0];
    assert_eq!(g.names, vec!["A", "B", "C", "D"]);
    assert!(g.iid && g.nonzero && !g.independent);
    assert_eq!(s.relation, Relation::Le);
    let coefs: Vec<String> = s.right.terms.iter().map(|t| t.coefficient().to_string()).collect();
    assert_eq!(coefs, vec!["4", "2"]);
}

#[test]
fn parses_triangle_and_trivial_statements() {
    let s = parse_statement("H(A-B) + H(A) <= 2 H(A+B) where A,B iid").unwrap();
    assert_eq!(s.left.terms.len(), 2);
    assert!(s.groups[0].iid);
    let t = parse_statement("H(A) <= H(A) where A").unwrap();
    assert_eq!(t.left, t.right);
    assert_eq!(t.relation, Relation::Le);
}

#[test]
fn parses_rationals_conditions_logs_and_clauses() {
    let s = parse_statement(
        "1/2 H(A | B) - 3 <= log K + H(A, B) where A, B indep; X nonzero using A+X given A-B != 0 \
         identity (A+X)-(B+X) = A-B assuming H(A+X) <= H(A) + log K",
    )
    .unwrap();
    let Term::Entropy(t) = &s.left.terms[0] else { panic!() };
    assert_eq!(t.coefficient.to_string(), "1/2");
    assert_eq!(t.conditions, vec![e("B")]);
    assert_eq!(s.left.constant().to_string(), "-3");
    assert_eq!(s.groups.len(), 2);
    assert!(s.groups[0].independent && s.groups[1].nonzero);
    assert_eq!(s.auxiliary, vec![e("A+X")]);
    assert_eq!(s.nonzero_exprs, vec![e("A-B")]);
    assert_eq!(s.identities.len(), 1);
    assert_eq!(s.hypotheses.len(), 1);
    assert_eq!(s.log_names().into_iter().collect::<Vec<_>>(), vec!["K"]);
    assert_eq!(parse_statement(&s.to_string()).unwrap(), s);
}

#[test]
fn statement_errors() {
    assert!(matches!(
        parse_statement("H(A+B) <= H(A) where A").unwrap_err(),
        ParseError::Undeclared { ref name, offset: 4 } if name == "B"
    ));
    assert!(matches!(
        parse_statement("H(A) <= H(A) where A, A").unwrap_err(),
        ParseError::DuplicateDeclaration { .. }
    ));
    assert!(matches!(
        parse_statement("H(A) <= H(A) where A sorted").unwrap_err(),
        ParseError::UnknownFlag { ref flag, .. } if flag == "sorted"
    ));
    assert!(matches!(
        parse_statement("H(A) <= H(A)").unwrap_err(),
        ParseError::UnexpectedEnd { .. }
    ));
}

#[test]
fn zero_side_round_trips() {
    let s = parse_statement("H(A) <= 0 where A").unwrap();
    assert!(s.right.terms.is_empty());
    assert_eq!(s.to_string(), "H(A) <= 0 where A");
}

fn arb_expr() -> impl Strategy<Value = FieldExpr> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["A", "B", "C", "D", "X1"]).prop_map(FieldExpr::var),
        (0u64..20).prop_map(FieldExpr::Const),
    ];
    leaf.prop_recursive(5, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| FieldExpr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FieldExpr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FieldExpr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FieldExpr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| FieldExpr::Div(Box::new(a), Box::new(b))),
        ]
    })
}

fn arb_assignment() -> impl Strategy<Value = HashMap<String, u64>> {
    prop::collection::vec(0u64..13, 5).prop_map(|vals| {
        ["A", "B", "C", "D", "X1"]
            .iter()
            .map(|s| s.to_string())
            .zip(vals)
            .collect()
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(expr in arb_expr()) {
        prop_assert!(expr.depth() <= 6);
        prop_assert_eq!(parse_expression(&expr.to_string()).unwrap(), expr);
    }

    #[test]
    fn canonical_preserves_value(expr in arb_expr(), a in arb_assignment()) {
        prop_assert_eq!(evaluate(&expr, &a, 13).unwrap(), evaluate(&expr.canonical(), &a, 13).unwrap());
    }

    #[test]
    fn multiplication_distributes(a in arb_expr(), b in arb_expr(), c in arb_expr(), x in arb_assignment()) {
        let lhs = FieldExpr::Mul(Box::new(a.clone()), Box::new(FieldExpr::Add(Box::new(b.clone()), Box::new(c.clone()))));
        let rhs = FieldExpr::Add(
            Box::new(FieldExpr::Mul(Box::new(a.clone()), Box::new(b))),
            Box::new(FieldExpr::Mul(Box::new(a), Box::new(c))),
        );
        let l = evaluate(&lhs, &x, 13).unwrap();
        let r = evaluate(&rhs, &x, 13).unwrap();
        if l != FieldValue::Infinity && r != FieldValue::Infinity {
            prop_assert_eq!(l, r);
        }
    }

    #[test]
    fn infinity_is_absorbing(a in arb_expr(), x in arb_assignment()) {
        let inf = FieldExpr::Div(Box::new(FieldExpr::Const(1)), Box::new(FieldExpr::Const(0)));
        for wrapped in [
            FieldExpr::Add(Box::new(a.clone()), Box::new(inf.clone())),
            FieldExpr::Mul(Box::new(inf.clone()), Box::new(a.clone())),
            FieldExpr::Div(Box::new(a.clone()), Box::new(inf.clone())),
            FieldExpr::Neg(Box::new(inf.clone())),
        ] {
            prop_assert_eq!(evaluate(&wrapped, &x, 13).unwrap(), FieldValue::Infinity);
        }
    }
}
