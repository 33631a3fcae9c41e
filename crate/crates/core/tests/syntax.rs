mod common;

use eqnpe::syntax::{parse_module, print_theory, show};
use eqnpe::Error;
use proptest::prelude::*;

use common::module;

const BUNDLED: [&str; 4] = ["parser", "flip-tree", "graph", "flipfix-mutated"];

#[test]
fn parser_module_shape() {
    let m = module("parser");
    assert_eq!(m.name, "Parser");
    assert_eq!(m.sorts.len(), 7);
    assert_eq!(m.theory.equations.len(), 2);
    assert!(m.theory.equations.iter().all(|e| e.variant));
}

#[test]
fn empty_module_has_no_equations() {
    let m = parse_module("fmod EMPTY is endfm").unwrap();
    assert!(m.theory.equations.is_empty());
    assert!(m.sorts.is_empty());
}

#[test]
fn missing_period_reports_position() {
    let err = parse_module("fmod M is\n  sort S\n  op a : -> S .\nendfm").unwrap_err();
    match err {
        Error::Parse { line, .. } => assert!(line >= 2, "line {line}"),
        e => panic!("expected a parse error, got {e}"),
    }
}

#[test]
fn undeclared_operator_is_rejected() {
    let m = module("flip-tree");
    assert!(m.parse_term("flop(1)").is_err());
}

#[test]
fn ill_sorted_term_is_rejected() {
    let m = module("flip-tree");
    assert!(m.parse_term("flip(1) {flip(2)} 3").is_err());
}

#[test]
fn bundled_modules_round_trip() {
    for name in BUNDLED {
        let m = module(name);
        let text = print_theory(&m.theory);
        let again = parse_module(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        assert_eq!(again.theory.equations.len(), m.theory.equations.len(), "{name}");
        let shown = |th: &eqnpe::Theory| {
            let mut v: Vec<String> =
                th.equations.iter().map(|e| format!("{} = {}", show(&th.sig, &e.lhs), show(&th.sig, &e.rhs))).collect();
            v.sort();
            v
        };
        assert_eq!(shown(&again.theory), shown(&m.theory), "{name}");
        assert_eq!(print_theory(&again.theory), text, "{name}: printing is not a fixpoint");
    }
}

#[test]
fn ac_terms_print_canonically() {
    let m = module("graph");
    let a = m.parse_term("{# 1 2} ; {# 0 1} ; mt").unwrap();
    let b = m.parse_term("{# 0 1} ; {# 1 2}").unwrap();
    assert_eq!(a, b);
    assert_eq!(show(m.sig(), &a), show(m.sig(), &b));
}

#[test]
fn identity_disappears_from_strings() {
    let m = module("parser");
    assert_eq!(m.parse_term("0 eps").unwrap(), m.parse_term("0").unwrap());
}

fn flip_tree_term() -> impl Strategy<Value = String> {
    let leaf = (0u8..5).prop_map(|n| n.to_string());
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            (inner.clone(), 0u8..5, inner.clone()).prop_map(|(l, n, r)| format!("({l}) {{{n}}} ({r})")),
            inner.prop_map(|t| format!("flip({t})")),
        ]
    })
}

proptest! {
    #[test]
    fn shown_terms_reparse(text in flip_tree_term()) {
        let m = module("flip-tree");
        let t = m.parse_term(&text).unwrap();
        let back = m.parse_term(&show(m.sig(), &t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn shown_graphs_reparse(ids in proptest::collection::vec((0u8..5, 0u8..5), 0..6)) {
        let m = module("graph");
        let text = if ids.is_empty() {
            "mt".to_string()
        } else {
            ids.iter().map(|(a, b)| format!("{{{a} {b} #}}")).collect::<Vec<_>>().join(" ; ")
        };
        let t = m.parse_term(&format!("flip({text})")).unwrap();
        let back = m.parse_term(&show(m.sig(), &t)).unwrap();
        prop_assert_eq!(back, t);
    }
}
