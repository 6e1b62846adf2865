//! Interpretation certification against the worked tables: recipe
//! expansion, grid checking, usable replacement maps, and bounds.

use std::collections::BTreeSet;

use ctrc_core::cctrs::{Cctrs, ValidateMode};
use ctrc_core::interp::{
    bound, bound_general, build, check, derive_usable_map, is_usable, obligations, parse_interp,
    BoundMode, CheckReport, InterpError, RecipeMode, Value, Verdict,
};
use ctrc_core::labeled::{enumerate_ground_terms, label, Cost, Engine};
use ctrc_core::transform::{transform, xi, ApMode, RuleKind, Star, TransformedTrs};
use ctrc_core::SearchBudget;

fn load(name: &str) -> String {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn setup(ctrs: &str) -> (Cctrs, TransformedTrs) {
    let sys = Cctrs::parse(&load(ctrs), ValidateMode::Strong).unwrap();
    let trs = transform(&sys, ApMode::Full).unwrap();
    (sys, trs)
}

fn run_check(ctrs: &str, interp: &str, mode: RecipeMode, grid: u64) -> (CheckReport, Cctrs) {
    let (sys, trs) = setup(ctrs);
    let tables = parse_interp(&sys, &trs, &load(interp)).unwrap();
    let di = build(&sys, &trs, &tables, mode).unwrap();
    let obls = obligations(&sys, &trs, &tables, mode);
    let report = check(&di, &trs, &obls, grid).unwrap();
    (report, sys)
}

#[test]
fn even_polynomial_passes_on_the_grid() {
    let (report, _) = run_check("even.ctrs", "even_poly.interp", RecipeMode::Direct, 4);
    assert!(report.pass, "violations: {:?}", report.rules.iter().filter(|r| r.verdict == Verdict::Violated).collect::<Vec<_>>());
    assert!(report.sampled);
    // every cost-1 rule is strictly oriented
    assert!(report
        .rules
        .iter()
        .filter(|r| r.required_strict)
        .all(|r| r.verdict == Verdict::Strict));
}

#[test]
fn even_pairs_passes_on_the_grid() {
    let (report, _) = run_check("even.ctrs", "even_pairs.interp", RecipeMode::Direct, 4);
    assert!(report.pass);
}

#[test]
fn all_zero_interpretation_fails_with_a_replayable_counterexample() {
    let (sys, trs) = setup("even.ctrs");
    let tables = parse_interp(&sys, &trs, &load("even_zero.interp")).unwrap();
    let di = build(&sys, &trs, &tables, RecipeMode::Direct).unwrap();
    let obls = obligations(&sys, &trs, &tables, RecipeMode::Direct);
    let report = check(&di, &trs, &obls, 4).unwrap();
    assert!(!report.pass);
    let violated = report
        .rules
        .iter()
        .find(|r| r.verdict == Verdict::Violated)
        .expect("a violated rule");
    // replay the recorded valuation
    let valuation = violated.valuation.clone().unwrap();
    let rule = &trs.rules[violated.rule - 1];
    let env: std::collections::BTreeMap<_, _> = valuation.into_iter().collect();
    let l = di.eval_term(&rule.lhs, &env).unwrap();
    let r = di.eval_term(&rule.rhs, &env).unwrap();
    if rule.cost == 1 {
        assert!(!l.strictly_above(r));
    } else {
        assert!(!l.weakly_above(r));
    }
}

#[test]
fn recipe_a_tables_for_fg_pass() {
    let (report, _) = run_check("fg.ctrs", "fg_recipe_a.interp", RecipeMode::A, 4);
    assert!(report.pass);
}

#[test]
fn recipe_a_expansion_matches_the_handwritten_shape() {
    let (sys, trs) = setup("fg.ctrs");
    let tables = parse_interp(&sys, &trs, &load("fg_recipe_a.interp")).unwrap();
    let di = build(&sys, &trs, &tables, RecipeMode::A).unwrap();
    // I_f(x, c1) = x + c1 * 1 on the grid
    let f = trs.hsig.sig.lookup("f").unwrap();
    for x in 0..=6u64 {
        for c1 in 0..=3u64 {
            assert_eq!(
                di.apply(f, &[Value::Nat(x), Value::Nat(c1)]).unwrap(),
                Value::Nat(x + c1)
            );
        }
    }
    // fixed flag values
    assert_eq!(
        di.apply(trs.hsig.top, &[]).unwrap(),
        Value::Nat(1)
    );
    assert_eq!(di.apply(trs.hsig.bot, &[]).unwrap(), Value::Nat(0));
}

#[test]
fn even_polynomial_evaluates_like_the_handwritten_formula() {
    let (sys, trs) = setup("even.ctrs");
    let tables = parse_interp(&sys, &trs, &load("even_poly.interp")).unwrap();
    let di = build(&sys, &trs, &tables, RecipeMode::Direct).unwrap();
    let even = trs.hsig.sig.lookup("even").unwrap();
    // 1 + x + v*3^x + w*3^x at (1,1,1,1)
    let v = di
        .apply(even, &[Value::Nat(1), Value::Nat(1), Value::Nat(1), Value::Nat(1)])
        .unwrap();
    assert_eq!(v, Value::Nat(8));
}

#[test]
fn recipe_c_fixes_pair_flags() {
    let (sys, trs) = setup("fib.ctrs");
    let tables = parse_interp(&sys, &trs, &load("fib_recipe_c.interp")).unwrap();
    let di = build(&sys, &trs, &tables, RecipeMode::C).unwrap();
    assert_eq!(di.apply(trs.hsig.top, &[]).unwrap(), Value::Pair(0, 1));
    assert_eq!(di.apply(trs.hsig.bot, &[]).unwrap(), Value::Pair(0, 0));
}

#[test]
fn recipe_b_tables_for_fib_pass() {
    let (report, _) = run_check("fib.ctrs", "fib_recipe_b.interp", RecipeMode::B, 4);
    assert!(
        report.pass,
        "rule violations: {:?}; mono: {:?}",
        report
            .rules
            .iter()
            .filter(|r| r.verdict == Verdict::Violated)
            .collect::<Vec<_>>(),
        report.monotonicity.iter().filter(|m| !m.ok).collect::<Vec<_>>()
    );
}

#[test]
fn recipe_c_tables_for_fib_pass() {
    let (report, _) = run_check("fib.ctrs", "fib_recipe_c.interp", RecipeMode::C, 4);
    assert!(
        report.pass,
        "rule violations: {:?}; mono: {:?}",
        report
            .rules
            .iter()
            .filter(|r| r.verdict == Verdict::Violated)
            .collect::<Vec<_>>(),
        report.monotonicity.iter().filter(|m| !m.ok).collect::<Vec<_>>()
    );
}

#[test]
fn recipe_b_needs_full_monotonicity_without_its_map() {
    // under recipe A obligations the same fib tables violate monotonicity of
    // fib in its first argument (the table is constant there)
    let (sys, trs) = setup("fib.ctrs");
    let tables = parse_interp(&sys, &trs, &load("fib_recipe_b.interp")).unwrap();
    let di = build(&sys, &trs, &tables, RecipeMode::A).unwrap();
    let obls = obligations(&sys, &trs, &tables, RecipeMode::A);
    let report = check(&di, &trs, &obls, 3).unwrap();
    let fib = trs.hsig.sig.lookup("fib").unwrap();
    assert!(report
        .monotonicity
        .iter()
        .any(|m| m.symbol == fib && !m.ok));
}

#[test]
fn anti_pattern_rules_are_weakly_oriented_for_any_tables() {
    for (ctrs, interp, mode) in [
        ("fg.ctrs", "fg_recipe_a.interp", RecipeMode::A),
        ("fib.ctrs", "fib_recipe_b.interp", RecipeMode::B),
    ] {
        let (sys, trs) = setup(ctrs);
        let tables = parse_interp(&sys, &trs, &load(interp)).unwrap();
        let di = build(&sys, &trs, &tables, mode).unwrap();
        let obls = obligations(&sys, &trs, &tables, mode);
        let report = check(&di, &trs, &obls, 4).unwrap();
        for (idx, rule) in trs.rules.iter().enumerate() {
            if matches!(rule.kind, RuleKind::R5 | RuleKind::R6) {
                assert_ne!(
                    report.rules[idx].verdict,
                    Verdict::Violated,
                    "{ctrs} rule {}",
                    idx + 1
                );
            }
        }
    }
}

#[test]
fn missing_components_are_reported_by_name() {
    let (sys, trs) = setup("fg.ctrs");
    let partial = "FUN 0 a = 0\nFUN 0 b = 1\nFUN 0 f(x) = x\nFUN 1 f(x) = 1\nFUN 0 g(x) = x\nFUN 1 g(x) = x\n";
    let tables = parse_interp(&sys, &trs, partial).unwrap();
    match build(&sys, &trs, &tables, RecipeMode::A) {
        Err(InterpError::MissingComponent(name)) => assert_eq!(name, "COND g 1 1"),
        other => panic!("expected a missing component, got {other:?}"),
    }
}

// --- usable replacement maps ---

#[test]
fn usable_map_for_fib() {
    let (sys, _) = setup("fib.ctrs");
    let map = derive_usable_map(&sys);
    let get = |n: &str| map.get(&sys.sig.lookup(n).unwrap()).unwrap().clone();
    assert_eq!(get("s"), BTreeSet::from([1]));
    assert_eq!(get("plus"), BTreeSet::from([1, 2]));
    assert_eq!(get("pair"), BTreeSet::from([1, 2]));
    assert_eq!(get("fib"), BTreeSet::new());
    assert!(is_usable(&sys, &map));
}

#[test]
fn usable_map_for_even_is_empty() {
    let (sys, _) = setup("even.ctrs");
    let map = derive_usable_map(&sys);
    for f in sys.sig.symbols() {
        assert!(map.get(&f).unwrap().is_empty(), "{}", sys.sig.name(f));
    }
    assert!(is_usable(&sys, &map));
}

#[test]
fn usable_map_for_odd_not() {
    let sys = Cctrs::parse(&load("odd_not.ctrs"), ValidateMode::Strong).unwrap();
    let map = derive_usable_map(&sys);
    let get = |n: &str| map.get(&sys.sig.lookup(n).unwrap()).unwrap().clone();
    assert_eq!(get("not"), BTreeSet::from([1]));
    for n in ["odd", "s", "0", "true", "false"] {
        assert_eq!(get(n), BTreeSet::new(), "{n}");
    }
    assert!(is_usable(&sys, &map));
}

#[test]
fn derived_maps_are_pointwise_minimal() {
    for ctrs in ["fib.ctrs", "odd_not.ctrs"] {
        let sys = Cctrs::parse(&load(ctrs), ValidateMode::Strong).unwrap();
        let map = derive_usable_map(&sys);
        assert!(is_usable(&sys, &map));
        for (f, set) in &map {
            for &i in set {
                let mut smaller = map.clone();
                smaller.get_mut(f).unwrap().remove(&i);
                assert!(
                    !is_usable(&sys, &smaller),
                    "{ctrs}: removing {i} from {} keeps the map usable",
                    sys.sig.name(*f)
                );
            }
        }
    }
}

// --- bounds ---

#[test]
fn even_polynomial_bound_values() {
    let (sys, trs) = setup("even.ctrs");
    let tables = parse_interp(&sys, &trs, &load("even_poly.interp")).unwrap();
    for n in 2..=8usize {
        let got = bound(&sys, &trs, &tables, RecipeMode::Direct, n, BoundMode::Crc).unwrap();
        let m = (n - 1) as u64;
        let expected = m + 2 * 3u64.pow((m - 1) as u32);
        assert_eq!(got, expected, "n = {n}");
    }
}

#[test]
fn fib_recipe_b_bound_is_dominated_by_the_fib_tables() {
    let (sys, trs) = setup("fib.ctrs");
    let tables = parse_interp(&sys, &trs, &load("fib_recipe_b.interp")).unwrap();
    for n in 3..=6usize {
        let got = bound(&sys, &trs, &tables, RecipeMode::B, n, BoundMode::Crc).unwrap();
        let x = (n - 2) as u32;
        assert_eq!(got, 3 + 5 * (3u64.pow(x) - 1), "n = {n}");
    }
}

#[test]
fn general_bound_matches_the_closed_form() {
    let (sys, trs) = setup("fg.ctrs");
    let tables = parse_interp(&sys, &trs, &load("fg_recipe_a.interp")).unwrap();
    for n in 1..=10usize {
        let got = bound_general(&sys, &tables, 2, 1, n, 4).unwrap();
        assert_eq!(got, 2u64.pow(n as u32) - 1, "n = {n}");
    }
    let _ = trs;
}

#[test]
fn general_bound_rejects_a_failing_premise() {
    let (sys, trs) = setup("fg.ctrs");
    let tables = parse_interp(&sys, &trs, &load("fg_recipe_a.interp")).unwrap();
    match bound_general(&sys, &tables, 1, 1, 3, 4) {
        Err(InterpError::UnverifiedPremise { symbol, .. }) => assert_eq!(symbol, "g"),
        other => panic!("expected a premise violation, got {other:?}"),
    }
    let _ = trs;
}

#[test]
fn derivational_bounds_reject_runtime_only_recipes() {
    let (sys, trs) = setup("fib.ctrs");
    let tables = parse_interp(&sys, &trs, &load("fib_recipe_b.interp")).unwrap();
    assert!(matches!(
        bound(&sys, &trs, &tables, RecipeMode::B, 3, BoundMode::Cdc),
        Err(InterpError::DerivationalNotSupported(RecipeMode::B))
    ));
    let tables_c = parse_interp(&sys, &trs, &load("fib_recipe_c.interp")).unwrap();
    assert!(matches!(
        bound(&sys, &trs, &tables_c, RecipeMode::C, 3, BoundMode::Cdc),
        Err(InterpError::DerivationalNotSupported(RecipeMode::C))
    ));
}

#[test]
fn passing_interpretations_dominate_exact_derivation_heights() {
    let (sys, trs) = setup("even.ctrs");
    let tables = parse_interp(&sys, &trs, &load("even_poly.interp")).unwrap();
    let di = build(&sys, &trs, &tables, RecipeMode::Direct).unwrap();
    let mut engine = Engine::new(&sys, SearchBudget::default());
    for t in enumerate_ground_terms(&sys, 4, false) {
        let dh = engine.dh(&label(&sys, &t)).unwrap();
        let padded = xi(&sys, &trs.hsig, &t, Star::Top);
        // an overflowing value exceeds u64::MAX and dominates any finite dh
        let Ok(value) = di.eval_term(&padded, &std::collections::BTreeMap::new()) else {
            continue;
        };
        match (dh, value) {
            (Cost::Finite(d), Value::Nat(v)) => {
                assert!(v >= d, "interpretation {v} below dh {d} for {:?}", t)
            }
            other => panic!("unexpected combination {other:?}"),
        }
    }
}

/// Restricting the transformed system to the derived usable map preserves
/// the heights of basic-term encodings: runtime complexity may be measured
/// in the smaller system.
#[test]
fn usable_map_restriction_preserves_basic_heights() {
    use ctrc_core::cs::CsEngine;
    use ctrc_core::labeled::label;
    use ctrc_core::transform::zeta;

    for name in ["fib.ctrs", "even.ctrs", "odd_not.ctrs"] {
        let sys = Cctrs::parse(&load(name), ValidateMode::Strong).unwrap();
        let trs = transform(&sys, ApMode::Full).unwrap();
        let upsilon = derive_usable_map(&sys);
        let mut restricted = trs.clone();
        for (f, set) in &upsilon {
            restricted.hsig.mu[f.index()] = set.clone();
        }
        let budget = SearchBudget {
            max_states: 500_000,
            max_depth: 32,
        };
        let mut labeled = Engine::new(&sys, budget);
        let mut cs = CsEngine::new(&restricted, budget);
        for t in enumerate_ground_terms(&sys, 4, true) {
            let reference = labeled.dh(&label(&sys, &t)).unwrap();
            let got = cs.dh(&zeta(&sys, &trs.hsig, &label(&sys, &t)));
            assert_eq!(got, reference, "{name}: {:?}", t);
        }
    }
}

#[test]
fn bound_without_ground_terms_is_an_error() {
    let sys = Cctrs::parse("(VAR x)\n(RULES f(x) -> x)", ValidateMode::Strong).unwrap();
    let trs = transform(&sys, ApMode::Full).unwrap();
    let tables = parse_interp(&sys, &trs, "FUN 0 f(x) = x + 1\nFUN 1 f(x) = 1\n").unwrap();
    assert!(matches!(
        bound(&sys, &trs, &tables, RecipeMode::A, 3, BoundMode::Crc),
        Err(InterpError::NoGroundTerms)
    ));
}
