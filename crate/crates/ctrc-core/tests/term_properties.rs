//! Property tests for matching and unification.

use proptest::prelude::*;

use ctrc_core::term::{match_term, unify, Signature, Subst, Symbol, SymbolKind, Term, Var};

fn sig() -> (Signature, Symbol, Symbol) {
    let mut sig = Signature::new();
    let c = sig.add("c", 0, SymbolKind::Constructor);
    let f = sig.add("f", 1, SymbolKind::Constructor);
    (sig, c, f)
}

/// Terms over the two-symbol signature {c/0, f/1} with up to three variables.
fn arb_term(depth: u32) -> impl Strategy<Value = Term> {
    let (_, c, f) = sig();
    let leaf = prop_oneof![
        Just(Term::constant(c)),
        (0..3u8).prop_map(|i| Term::Var(Var::new(&format!("v{i}")))),
    ];
    leaf.prop_recursive(depth, 16, 1, move |inner| {
        inner.prop_map(move |t| Term::App(f, vec![t]))
    })
}

/// All ground terms over {c/0, f/1} up to depth 3.
fn ground_pool() -> Vec<Term> {
    let (_, c, f) = sig();
    let mut out = vec![Term::constant(c)];
    for _ in 0..2 {
        let last = out.last().unwrap().clone();
        out.push(Term::App(f, vec![last]));
    }
    out
}

fn ground_substitutions(vars: &[Var]) -> Vec<Subst> {
    let pool = ground_pool();
    let mut out = vec![Subst::new()];
    for v in vars {
        let mut next = Vec::new();
        for sigma in &out {
            for t in &pool {
                let mut s = sigma.clone();
                s.insert(v.clone(), t.clone());
                next.push(s);
            }
        }
        out = next;
    }
    out
}

proptest! {
    /// A successful match reproduces the subject node for node.
    #[test]
    fn match_is_sound(p in arb_term(3), s in arb_term(3)) {
        if let Some(sigma) = match_term(&p, &s) {
            prop_assert_eq!(sigma.apply(&p), s);
        }
    }

    /// A unifier equates both sides; absence means no small ground unifier
    /// exists either.
    #[test]
    fn unify_is_sound_and_absence_is_real(a in arb_term(3), b in arb_term(3)) {
        match unify(&a, &b) {
            Some(mgu) => prop_assert_eq!(mgu.apply(&a), mgu.apply(&b)),
            None => {
                let vars: Vec<Var> = a.vars().union(&b.vars()).cloned().collect();
                for sigma in ground_substitutions(&vars) {
                    prop_assert_ne!(sigma.apply(&a), sigma.apply(&b));
                }
            }
        }
    }

    /// Consistently renaming the variables of both sides preserves
    /// unifiability.
    #[test]
    fn unification_is_stable_under_renaming(a in arb_term(3), b in arb_term(3)) {
        let rename = |t: &Term| -> Term {
            fn go(t: &Term) -> Term {
                match t {
                    Term::Var(x) => Term::Var(Var::new(&format!("{}_r", x.name()))),
                    Term::App(f, args) => Term::App(*f, args.iter().map(go).collect()),
                }
            }
            go(t)
        };
        let before = unify(&a, &b).is_some();
        let after = unify(&rename(&a), &rename(&b)).is_some();
        prop_assert_eq!(before, after);
    }

    /// Matching is a special case of unification on variable-disjoint sides.
    #[test]
    fn matching_implies_unifiability(p in arb_term(3), s in arb_term(3)) {
        // ground subjects are always variable-disjoint from the pattern
        if s.is_ground() && match_term(&p, &s).is_some() {
            prop_assert!(unify(&p, &s).is_some());
        }
    }
}
