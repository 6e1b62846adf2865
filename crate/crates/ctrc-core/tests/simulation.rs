//! Cross-checks between the plain conditional relation and the labeled
//! relation: simulation in both directions, the normal-form trichotomy,
//! and the soundness of rule-removal and failure steps.

use ctrc_core::cctrs::{Cctrs, ValidateMode};
use ctrc_core::labeled::{
    enumerate_ground_labeled, enumerate_ground_terms, erase, is_labeled_nf, label, label_weight,
    Cost, Engine, LabeledTerm, StepKind,
};
use ctrc_core::rewrite::PlainEngine;
use ctrc_core::term::{match_term, Term};
use ctrc_core::SearchBudget;

fn load(name: &str) -> Cctrs {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    Cctrs::parse(&std::fs::read_to_string(path).unwrap(), ValidateMode::Strong).unwrap()
}

const SIZE: usize = 5;

fn budget() -> SearchBudget {
    SearchBudget {
        max_states: 10_000_000,
        max_depth: 64,
    }
}

/// Every plain step has a labeled counterpart with the same rule and position.
#[test]
fn plain_steps_lift_to_labeled_steps() {
    for name in ["even.ctrs", "fg.ctrs"] {
        let sys = load(name);
        let budget = budget();
        let mut plain = PlainEngine::new(&sys, budget);
        let mut labeled = Engine::new(&sys, budget);
        for t in enumerate_ground_terms(&sys, SIZE, false) {
            let steps = plain.steps(&t);
            assert!(steps.complete);
            let lsteps = labeled.steps(&label(&sys, &t)).unwrap().value;
            for (target, rule, pos) in steps.value {
                let expected = label(&sys, &target);
                assert!(
                    lsteps.iter().any(|s| s.kind == StepKind::Success
                        && s.rule == rule
                        && s.position == pos
                        && s.target == expected),
                    "{name}: no labeled counterpart for {:?} -> {:?} (rule {rule})",
                    t,
                    target
                );
            }
        }
    }
}

/// Every labeled step erases to a plain step, or keeps the term and strictly
/// decreases the label weight.
#[test]
fn labeled_steps_project_under_erase() {
    for name in ["even.ctrs", "fg.ctrs"] {
        let sys = load(name);
        let budget = budget();
        let mut plain = PlainEngine::new(&sys, budget);
        let mut labeled = Engine::new(&sys, budget);
        for t in enumerate_ground_terms(&sys, SIZE, false) {
            let lt = label(&sys, &t);
            check_projection(&mut plain, &mut labeled, &lt, name);
        }
    }
}

fn check_projection(
    plain: &mut PlainEngine<'_>,
    labeled: &mut Engine<'_>,
    lt: &LabeledTerm,
    name: &str,
) {
    let source = erase(lt);
    let plain_steps = plain.steps(&source).value;
    for step in labeled.steps(lt).unwrap().value {
        let target = erase(&step.target);
        if target == source {
            assert!(
                label_weight(lt) > label_weight(&step.target),
                "{name}: stationary labeled step without weight decrease"
            );
        } else {
            assert!(
                plain_steps.iter().any(|(u, _, _)| *u == target),
                "{name}: labeled step erases to a non-step {:?} -> {:?}",
                source,
                target
            );
        }
    }
}

/// Quasi-steps lift to labeled quasi-steps.
#[test]
fn quasi_steps_lift() {
    for name in ["even.ctrs", "fg.ctrs", "fib.ctrs"] {
        let sys = load(name);
        let budget = budget();
        let mut plain = PlainEngine::new(&sys, budget);
        let mut labeled = Engine::new(&sys, budget);
        for t in enumerate_ground_terms(&sys, SIZE, false) {
            let quasi = plain.quasi_steps(&t).value;
            let lquasi = labeled.quasi_steps(&label(&sys, &t)).unwrap().value;
            for q in quasi {
                assert!(
                    lquasi.contains(&label(&sys, &q)),
                    "{name}: {:?} quasi-step {:?} has no labeled counterpart",
                    t,
                    q
                );
            }
        }
    }
}

/// Every ground labeled term is a normal form, has a step, or diverges.
#[test]
fn ground_labeled_terms_satisfy_the_trichotomy() {
    let sys = load("even.ctrs");
    let mut engine = Engine::new(&sys, budget());
    for lt in enumerate_ground_labeled(&sys, SIZE) {
        let nf = is_labeled_nf(&lt);
        let has_step = !engine.steps(&lt).unwrap().value.is_empty();
        let diverges = engine.dh(&lt).unwrap() == Cost::Infinite;
        assert!(
            nf || has_step || diverges,
            "no alternative holds for {:?}",
            lt
        );
        // for this terminating system the alternatives are exclusive
        assert!(!(nf && has_step));
    }
}

/// After a rule-removal step at position p, no reduction strictly below p
/// ever makes the removed rule's left-hand side match there again.
#[test]
fn removed_rules_never_match_again() {
    for name in ["even.ctrs", "fib.ctrs"] {
        let sys = load(name);
        let budget = budget();
        let mut engine = Engine::new(&sys, budget);
        for t in enumerate_ground_terms(&sys, SIZE, false) {
            let lt = label(&sys, &t);
            for step in engine.steps(&lt).unwrap().value {
                if step.kind != StepKind::Bot {
                    continue;
                }
                let rule = &sys.rules[step.rule];
                // explore reducts of the subterm below the removal position
                let below = step.target.at(&step.position).unwrap().clone();
                let mut seen = vec![below.clone()];
                let mut frontier = vec![below];
                let mut visited = 0usize;
                while let Some(u) = frontier.pop() {
                    visited += 1;
                    if visited > 2_000 {
                        break;
                    }
                    assert!(
                        match_term(&rule.lhs, &erase(&u)).is_none(),
                        "{name}: removed rule matches again at {:?}",
                        u
                    );
                    for next in engine.steps(&u).unwrap().value {
                        if next.position.is_root() {
                            continue; // only reductions strictly below p
                        }
                        if !seen.contains(&next.target) {
                            seen.push(next.target.clone());
                            frontier.push(next.target);
                        }
                    }
                }
            }
        }
    }
}

/// Failure steps agree with plain-level inapplicability: when the labeled
/// relation fails rule ρ at position p, the plain relation has no ρ-step at
/// the erased position either.
#[test]
fn failure_steps_are_sound_for_confluent_systems() {
    for name in ["even.ctrs", "fg.ctrs", "fib.ctrs"] {
        let sys = load(name);
        let budget = budget();
        let mut plain = PlainEngine::new(&sys, budget);
        let mut labeled = Engine::new(&sys, budget);
        for t in enumerate_ground_terms(&sys, SIZE, false) {
            let lt = label(&sys, &t);
            let plain_steps = plain.steps(&t).value;
            for step in labeled.steps(&lt).unwrap().value {
                if step.kind == StepKind::Fail {
                    assert!(
                        !plain_steps
                            .iter()
                            .any(|(_, rule, pos)| *rule == step.rule && *pos == step.position),
                        "{name}: failed rule {} is plainly applicable at {} in {:?}",
                        step.rule + 1,
                        step.position,
                        t
                    );
                }
            }
        }
    }
}

/// dh responds to quasi-divergence even when no labeled step exists.
#[test]
fn divergent_condition_makes_dh_infinite() {
    let sys = load("loop.ctrs");
    let mut engine = Engine::new(&sys, budget());
    let a = label(&sys, &sys.parse_term("a").unwrap());
    assert_eq!(engine.dh(&a).unwrap(), Cost::Infinite);
    // but b is a constructor constant in normal form
    let b = label(&sys, &sys.parse_term("b").unwrap());
    assert_eq!(engine.dh(&b).unwrap(), Cost::Finite(0));
}

/// The worked reductions: the three-step labeled reduction of the doubly
/// labeled fib term costs 0 + 1 + 4, and the even reduction costs 1 + 0 + 2.
#[test]
fn worked_reductions_have_their_exact_costs() {
    let fib = load("fib.ctrs");
    let mut engine = Engine::new(&fib, budget());
    let t0 = label(&fib, &fib.parse_term("fib(plus(s(0), 0))").unwrap());
    let steps = engine.steps(&t0).unwrap().value;
    let bot = steps
        .iter()
        .find(|s| s.kind == StepKind::Bot)
        .expect("rule-removal step");
    assert_eq!(bot.cost, Cost::Finite(0));
    let t1 = bot.target.clone();
    let steps = engine.steps(&t1).unwrap().value;
    let succ1 = steps
        .iter()
        .find(|s| s.kind == StepKind::Success && s.rule == 1)
        .expect("inner addition step");
    assert_eq!(succ1.cost, Cost::Finite(1));
    let t2 = succ1.target.clone();
    let expected = label(&fib, &fib.parse_term("pair(s(0), s(0))").unwrap());
    let steps = engine.steps(&t2).unwrap().value;
    let succ2 = steps
        .iter()
        .find(|s| s.kind == StepKind::Success && s.rule == 3 && s.target == expected)
        .expect("outer fib step to the fully evaluated pair");
    assert_eq!(succ2.cost, Cost::Finite(4));

    let even = load("even.ctrs");
    let mut engine = Engine::new(&even, budget());
    let t0 = label(&even, &even.parse_term("even(s(0))").unwrap());
    let steps = engine.steps(&t0).unwrap().value;
    let fail = steps
        .iter()
        .find(|s| s.kind == StepKind::Fail && s.rule == 1)
        .expect("failing step for the first conditional rule");
    assert_eq!(fail.cost, Cost::Finite(1));
    let t1 = fail.target.clone();
    let steps = engine.steps(&t1).unwrap().value;
    let bot = steps
        .iter()
        .find(|s| s.kind == StepKind::Bot && s.rule == 0)
        .expect("removal of the base rule");
    assert_eq!(bot.cost, Cost::Finite(0));
    let t2 = bot.target.clone();
    let steps = engine.steps(&t2).unwrap().value;
    let succ = steps
        .iter()
        .find(|s| s.kind == StepKind::Success && s.rule == 2)
        .expect("final successful step");
    assert_eq!(succ.cost, Cost::Finite(2));
    assert_eq!(erase(&succ.target), even.parse_term("false").unwrap());
}

/// Labels of a fully labeled term record exactly the defining rules.
#[test]
fn label_weight_of_full_labels() {
    let sys = load("fib.ctrs");
    for t in enumerate_ground_terms(&sys, SIZE, false) {
        let lt = label(&sys, &t);
        let expected: usize = t
            .positions()
            .iter()
            .map(|p| match t.at(p).unwrap() {
                Term::App(f, _) => sys.rules_for(*f).len(),
                Term::Var(_) => 0,
            })
            .sum();
        assert_eq!(label_weight(&lt), expected);
    }
}

/// Step costs decompose into their recorded condition witnesses: rule
/// removal is free, a success costs one plus its condition evaluations, a
/// failure costs exactly its condition evaluations.
#[test]
fn step_costs_match_their_witnesses() {
    use ctrc_core::labeled::match_labeled;
    use ctrc_core::labeled::{erase as erase_l, lnf_generalization};
    use ctrc_core::term::unify;

    for name in ["even.ctrs", "fg.ctrs", "fib.ctrs"] {
        let sys = load(name);
        let mut engine = Engine::new(&sys, budget());
        let mut seen_success_with_conditions = 0usize;
        for t in enumerate_ground_terms(&sys, 4, false) {
            for step in engine.steps(&label(&sys, &t)).unwrap().value {
                let witness_sum: u64 = step.witnesses.iter().map(|w| w.cost).sum();
                let rule = &sys.rules[step.rule];
                match step.kind {
                    StepKind::Bot => {
                        assert_eq!(step.cost, Cost::Finite(0));
                        assert!(step.witnesses.is_empty());
                    }
                    StepKind::Success => {
                        assert_eq!(step.cost, Cost::Finite(1 + witness_sum), "{name}");
                        assert_eq!(step.witnesses.len(), rule.conditions.len());
                        for (w, (_, b)) in step.witnesses.iter().zip(&rule.conditions) {
                            assert!(
                                match_labeled(b, &w.result).is_some(),
                                "{name}: success witness does not instantiate the pattern"
                            );
                        }
                        if !rule.conditions.is_empty() {
                            seen_success_with_conditions += 1;
                        }
                    }
                    StepKind::Fail => {
                        assert_eq!(step.cost, Cost::Finite(witness_sum), "{name}");
                        let last = step.witnesses.last().expect("a failing witness");
                        let (pattern, _) = lnf_generalization(&last.result);
                        let failing_rhs = &rule.conditions[step.witnesses.len() - 1].1;
                        assert!(
                            unify(&erase_l(&pattern), failing_rhs).is_none(),
                            "{name}: failing witness still unifies"
                        );
                    }
                }
            }
        }
        if name != "fg.ctrs" {
            assert!(seen_success_with_conditions > 0, "{name}: no conditional successes seen");
        }
    }
}
