mod common;

use eqnpe::signature::{classify_symbols, least_sort, sort_leq};
use eqnpe::subst::{eq_modulo_renaming, fresh_rename};
use eqnpe::syntax::{parse_module, show};
use eqnpe::term::{canonicalize, replace, subterm, subterms_at, Position};
use eqnpe::Subst;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::module;
use common::oracle::{Gen, ACU_SIG, AC_SIG};

#[test]
fn least_sorts_in_parser() {
    let m = module("parser");
    let th = &m.theory;
    let s = |t: &str| m.sig().sorts.name(least_sort(&m.parse_term(t).unwrap(), th).unwrap()).to_string();
    assert_eq!(s("0"), "TSymbol");
    assert_eq!(s("0 1"), "String");
    assert_eq!(s("init"), "NSymbol");
    assert_eq!(s("init -> eps"), "Production");
    assert_eq!(s("(init -> eps) ; (S -> eps)"), "Grammar");
    assert_eq!(s("init | 0 | mt"), "Parsing");
}

#[test]
fn sort_order() {
    let m = module("parser");
    let th = &m.theory;
    assert!(sort_leq("TSymbol", "Symbol", th).unwrap());
    assert!(sort_leq("TSymbol", "String", th).unwrap());
    assert!(sort_leq("Production", "Grammar", th).unwrap());
    assert!(!sort_leq("Grammar", "Production", th).unwrap());
    assert!(!sort_leq("String", "Symbol", th).unwrap());
    assert!(sort_leq("String", "String", th).unwrap());
    assert!(sort_leq("Nope", "String", th).is_err());
}

#[test]
fn defined_symbols_are_equation_roots() {
    let m = module("flipfix-mutated");
    let (defined, ctors) = classify_symbols(&m.theory);
    let names: Vec<&str> = defined.iter().map(|&f| &*m.sig().sym(f).name).collect();
    assert_eq!(names, ["flip", "fix"]);
    assert!(ctors.iter().any(|&f| &*m.sig().sym(f).name == "_;_"));
    assert!(defined.is_disjoint(&ctors));
}

#[test]
fn undeclared_sort_in_module_is_an_error() {
    assert!(parse_module("fmod M is sort S . op a : -> T . endfm").is_err());
}

#[test]
fn assoc_symbol_accepts_flat_argument_lists() {
    let m = parse_module(AC_SIG).unwrap();
    let sig = m.sig();
    let a = sig.constant("a").unwrap();
    let b = sig.constant("b").unwrap();
    let t = sig.mk("_+_", vec![a.clone(), b.clone(), a.clone()]).unwrap();
    assert_eq!(t, m.parse_term("a + (a + b)").unwrap());
    assert_eq!(t.arity(), 3);
}

#[test]
fn identity_collapses() {
    let m = parse_module(ACU_SIG).unwrap();
    assert_eq!(m.parse_term("a * e").unwrap(), m.parse_term("a").unwrap());
    assert_eq!(m.parse_term("e * e").unwrap(), m.parse_term("e").unwrap());
}

#[test]
fn renaming_equivalence() {
    let m = parse_module(AC_SIG).unwrap();
    let sig = m.sig();
    let p = |s: &str| m.parse_term(s).unwrap();
    assert!(eq_modulo_renaming(sig, &p("X + g(Y)"), &p("Y + g(X)")).is_some());
    assert!(eq_modulo_renaming(sig, &p("h(X, Y)"), &p("h(Z, X)")).is_some());
    assert!(eq_modulo_renaming(sig, &p("X + g(X)"), &p("X + g(Y)")).is_none());
    assert!(eq_modulo_renaming(sig, &p("X + a"), &p("X + b")).is_none());
}

#[test]
fn positions() {
    let m = module("flip-tree");
    let sig = m.sig();
    let t = m.parse_term("flip(1 {2} flip(3))").unwrap();
    assert_eq!(subterm(&t, &[0, 2]).unwrap(), m.parse_term("flip(3)").unwrap());
    assert!(subterm(&t, &[5]).is_err());
    let u = replace(sig, &t, &Position::at(vec![0, 2]), m.parse_term("4").unwrap()).unwrap();
    assert_eq!(show(sig, &u), "flip(1 {2} 4)");
    // numerals are s-towers: 1 + 1 + 2 + 3 + 1 + 4 positions
    assert_eq!(subterms_at(sig, &t).len(), 12);
}

fn ac_module(acu: bool) -> eqnpe::syntax::Module {
    parse_module(if acu { ACU_SIG } else { AC_SIG }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_forms_are_stable(seed in any::<u64>(), acu in any::<bool>()) {
        let m = ac_module(acu);
        let g = Gen::new(&m);
        let t = g.term(&mut StdRng::seed_from_u64(seed), 4, true);
        let c = canonicalize(m.sig(), &t);
        prop_assert_eq!(&c, &t);
        prop_assert_eq!(canonicalize(m.sig(), &c), c);
    }

    #[test]
    fn argument_order_is_irrelevant(seed in any::<u64>()) {
        let m = ac_module(false);
        let g = Gen::new(&m);
        let mut rng = StdRng::seed_from_u64(seed);
        let xs: Vec<_> = (0..4).map(|_| g.term(&mut rng, 2, true)).collect();
        let plus = m.sig().lookup("_+_", 2).unwrap();
        let mut ys = xs.clone();
        ys.reverse();
        ys.rotate_left(1);
        prop_assert_eq!(m.sig().app(plus, xs), m.sig().app(plus, ys));
    }

    #[test]
    fn composition_applies_in_sequence(seed in any::<u64>(), acu in any::<bool>()) {
        let m = ac_module(acu);
        let sig = m.sig();
        let g = Gen::new(&m);
        let mut rng = StdRng::seed_from_u64(seed);
        let vars: Vec<_> = ["X", "Y", "Z"].iter().map(|v| m.parse_term(v).unwrap().as_var().unwrap().clone()).collect();
        let a = Subst::from_pairs(vars[..2].iter().map(|v| (v.clone(), g.term(&mut rng, 2, true))));
        let b = Subst::from_pairs(vars[1..].iter().map(|v| (v.clone(), g.term(&mut rng, 2, true))));
        let t = g.term(&mut rng, 3, true);
        prop_assert_eq!(a.compose(sig, &b).apply(sig, &t), b.apply(sig, &a.apply(sig, &t)));
    }

    #[test]
    fn replacing_a_subterm_by_itself_is_identity(seed in any::<u64>(), acu in any::<bool>()) {
        let m = ac_module(acu);
        let sig = m.sig();
        let t = Gen::new(&m).term(&mut StdRng::seed_from_u64(seed), 3, true);
        for (p, s) in subterms_at(sig, &t) {
            prop_assert_eq!(replace(sig, &t, &p, s).unwrap(), t.clone());
        }
    }

    #[test]
    fn fresh_renaming_is_a_variant(seed in any::<u64>()) {
        let m = ac_module(false);
        let t = Gen::new(&m).term(&mut StdRng::seed_from_u64(seed), 3, true);
        let (u, r) = fresh_rename(m.sig(), &t);
        prop_assert!(r.is_renaming());
        prop_assert!(eq_modulo_renaming(m.sig(), &u, &t).is_some());
        prop_assert!(u.vars().iter().all(|v| !t.vars().contains(v)));
    }
}
