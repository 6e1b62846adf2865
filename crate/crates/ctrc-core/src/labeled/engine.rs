//! Search engine for the labeled relation: step enumeration, quasi-steps,
//! derivation height, and conditional complexity.
//!
//! Step sets of distinct terms depend on each other through condition
//! evaluation, so the engine computes them as a least fixpoint over an
//! interned state space. For self-referential condition nests it falls back
//! to fixpoint rounds; quasi-decreasing systems are handled in a single
//! recursive pass.

use std::collections::{BTreeMap, BTreeSet};

use crate::fnv::FnvMap;

use thiserror::Error;

use crate::cctrs::Cctrs;
use crate::rewrite::{SearchBudget, Searched};
use crate::term::{unify, FreshVars, Position, Term};

use super::{
    erase, is_labeled_nf, label, label_subst, lnf_generalize_with, match_labeled_into, CondWitness,
    Cost, LSubst, LabeledStep, LabeledTerm, StepKind,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabeledError {
    #[error("labeled reduction is only defined for ground terms")]
    NonGroundTerm,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexityError {
    #[error("the signature admits no ground terms")]
    NoGroundTerms,
    #[error(transparent)]
    Labeled(#[from] LabeledError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityMode {
    /// All ground terms of bounded size.
    Cdc,
    /// Basic ground terms only.
    Crc,
}

/// Internal cost value; `Inf` marks suprema that grow without bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CostV {
    Fin(u64),
    Inf,
}

impl CostV {
    fn add(self, other: CostV) -> CostV {
        match (self, other) {
            (CostV::Fin(a), CostV::Fin(b)) => CostV::Fin(a.saturating_add(b)),
            _ => CostV::Inf,
        }
    }

    fn gt(self, other: CostV) -> bool {
        match (self, other) {
            (CostV::Inf, CostV::Inf) => false,
            (CostV::Inf, CostV::Fin(_)) => true,
            (CostV::Fin(_), CostV::Inf) => false,
            (CostV::Fin(a), CostV::Fin(b)) => a > b,
        }
    }

    fn to_cost(self) -> Cost {
        match self {
            CostV::Fin(n) => Cost::Finite(n),
            CostV::Inf => Cost::Infinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    New,
    InProgress,
    Done,
}

#[derive(Debug, Clone, PartialEq)]
struct WitRec {
    cond: u32,
    stop: u32,
    cost: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct StepRec {
    target: u32,
    rule: usize,
    pos: Position,
    kind: StepKind,
    cost: CostV,
    wit: Vec<WitRec>,
}

#[derive(Debug, Clone)]
struct Node {
    status: Status,
    steps: Vec<StepRec>,
    quasi: Vec<u32>,
}

#[derive(Debug, Clone)]
struct CondEval {
    /// (extension of the matcher, stop term, maximal cost)
    successes: Vec<(LSubst, u32, CostV)>,
    /// Maximal cost of establishing failure, with its stop term.
    fail: Option<(CostV, u32)>,
    stamp: u64,
}

struct CState {
    sigma: LSubst,
    cost: CostV,
    wit: Vec<WitRec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DhRes {
    Fin { val: u64, exact: bool },
    Inf,
}

/// Labeled rewriting engine. Memo tables live for the lifetime of the engine,
/// so one engine can serve many queries over the same system.
pub struct Engine<'a> {
    sys: &'a Cctrs,
    budget: SearchBudget,
    terms: Vec<LabeledTerm>,
    ids: FnvMap<LabeledTerm, u32>,
    nodes: Vec<Node>,
    exceeded: bool,
    cycle_seen: bool,
    kleene_mode: bool,
    depth: usize,
    stamp: u64,
    cond_cache: FnvMap<(u32, usize, usize), CondEval>,
    dh_memo: FnvMap<u32, DhRes>,
}

impl<'a> Engine<'a> {
    pub fn new(sys: &'a Cctrs, budget: SearchBudget) -> Self {
        Engine {
            sys,
            budget,
            terms: Vec::new(),
            ids: FnvMap::default(),
            nodes: Vec::new(),
            exceeded: false,
            cycle_seen: false,
            kleene_mode: false,
            depth: 0,
            stamp: 0,
            cond_cache: FnvMap::default(),
            dh_memo: FnvMap::default(),
        }
    }

    pub fn budget_exceeded(&self) -> bool {
        self.exceeded
    }

    fn intern(&mut self, t: &LabeledTerm) -> u32 {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(t.clone());
        self.ids.insert(t.clone(), id);
        self.nodes.push(Node {
            status: Status::New,
            steps: Vec::new(),
            quasi: Vec::new(),
        });
        id
    }

    fn within_cap(&mut self, id: u32) -> bool {
        if (id as usize) < self.budget.max_states {
            true
        } else {
            self.exceeded = true;
            false
        }
    }

    fn ensure(&mut self, root: u32) {
        match self.nodes[root as usize].status {
            Status::Done => return,
            Status::InProgress => {
                self.cycle_seen = true;
                return;
            }
            Status::New => {}
        }
        if self.kleene_mode {
            return;
        }
        if !self.within_cap(root) {
            return;
        }
        self.nodes[root as usize].status = Status::InProgress;
        let mut frontier = vec![root];
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        seen.insert(root);
        while let Some(u) = frontier.pop() {
            if !self.within_cap(u) {
                continue;
            }
            let (steps, quasi) = self.compute_steps(u);
            self.nodes[u as usize].steps = steps;
            self.nodes[u as usize].quasi = quasi;
            let succ: Vec<u32> = self.nodes[u as usize]
                .steps
                .iter()
                .map(|s| s.target)
                .collect();
            for v in succ {
                if !seen.contains(&v) && self.nodes[v as usize].status == Status::New {
                    seen.insert(v);
                    frontier.push(v);
                }
            }
        }
        for u in seen {
            self.nodes[u as usize].status = Status::Done;
        }
    }

    fn ensure_nested(&mut self, id: u32) {
        if self.depth >= self.budget.max_depth {
            self.exceeded = true;
            return;
        }
        self.depth += 1;
        self.ensure(id);
        self.depth -= 1;
    }

    fn explore(&mut self, t: &LabeledTerm) -> u32 {
        let id = self.intern(t);
        self.ensure(id);
        if self.cycle_seen {
            self.kleene();
            self.cycle_seen = false;
        }
        id
    }

    fn kleene(&mut self) {
        self.kleene_mode = true;
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < self.terms.len() {
                if i < self.budget.max_states {
                    let (steps, quasi) = self.compute_steps(i as u32);
                    if steps != self.nodes[i].steps || quasi != self.nodes[i].quasi {
                        self.nodes[i].steps = steps;
                        self.nodes[i].quasi = quasi;
                        changed = true;
                    }
                } else {
                    self.exceeded = true;
                }
                i += 1;
            }
            if changed {
                self.stamp += 1; // step data moved: condition evaluations are stale
            } else {
                break;
            }
        }
        for n in &mut self.nodes {
            n.status = Status::Done;
        }
        self.kleene_mode = false;
        self.dh_memo.clear();
    }

    /// Maximal cost to reach every term in the forward closure of `root`
    /// along computed steps. Nodes on or after a cycle get `Inf`.
    fn reach_costs(&self, root: u32) -> BTreeMap<u32, CostV> {
        let mut ids: BTreeSet<u32> = BTreeSet::new();
        ids.insert(root);
        let mut frontier = vec![root];
        while let Some(u) = frontier.pop() {
            for s in &self.nodes[u as usize].steps {
                if ids.insert(s.target) {
                    frontier.push(s.target);
                }
            }
        }
        let mut cost: BTreeMap<u32, CostV> = BTreeMap::new();
        cost.insert(root, CostV::Fin(0));
        let n = ids.len();
        let mut rounds = 0usize;
        loop {
            let mut changed = false;
            for &u in &ids {
                let Some(cu) = cost.get(&u).copied() else {
                    continue;
                };
                for s in &self.nodes[u as usize].steps {
                    let cand = cu.add(s.cost);
                    let cand = if rounds >= n { CostV::Inf } else { cand };
                    let better = match cost.get(&s.target) {
                        None => true,
                        Some(&old) => cand.gt(old),
                    };
                    if better {
                        cost.insert(s.target, cand);
                        changed = true;
                    }
                }
            }
            rounds += 1;
            if !changed || rounds > 2 * n + 2 {
                break;
            }
        }
        cost
    }

    fn eval_condition(&mut self, cid: u32, rule: usize, cond: usize) -> CondEval {
        if let Some(hit) = self.cond_cache.get(&(cid, rule, cond)) {
            if hit.stamp == self.stamp {
                return hit.clone();
            }
        }
        let pattern = self.sys.rules[rule].conditions[cond].1.clone();
        let reach = self.reach_costs(cid);
        let mut successes = Vec::new();
        let mut fail: Option<(CostV, u32)> = None;
        for (&vid, &c) in &reach {
            let v = self.terms[vid as usize].clone();
            let mut tau = LSubst::new();
            if match_labeled_into(&pattern, &v, &mut tau) {
                successes.push((tau, vid, c));
            }
            // failure witness: the maximal generalization does not unify
            let mut fresh = FreshVars::new();
            let mut gen_sigma = LSubst::new();
            let gen = lnf_generalize_with(&v, &mut fresh, &mut gen_sigma);
            if unify(&erase(&gen), &pattern).is_none()
                && fail.is_none_or(|(fc, _)| c.gt(fc))
            {
                fail = Some((c, vid));
            }
        }
        let ev = CondEval {
            successes,
            fail,
            stamp: self.stamp,
        };
        self.cond_cache.insert((cid, rule, cond), ev.clone());
        ev
    }

    fn compute_steps(&mut self, u: u32) -> (Vec<StepRec>, Vec<u32>) {
        let term = self.terms[u as usize].clone();
        let mut steps: Vec<StepRec> = Vec::new();
        let mut quasi: Vec<u32> = Vec::new();
        for pos in term.positions() {
            let sub = term.at(&pos).unwrap().clone();
            let LabeledTerm::Def(f, lab, args) = &sub else {
                continue;
            };
            for local in lab.iter() {
                let rid = self.sys.rule_id(*f, local);
                let rule = self.sys.rules[rid].clone();
                // rule removal: no instance of the argument generalizations
                // can ever match the left-hand side
                let mut fresh = FreshVars::new();
                let mut gen_sigma = LSubst::new();
                let probe_args: Vec<Term> = args
                    .iter()
                    .map(|a| erase(&lnf_generalize_with(a, &mut fresh, &mut gen_sigma)))
                    .collect();
                let probe = Term::App(*f, probe_args);
                if unify(&probe, &rule.lhs).is_none() {
                    let target = term.replaced(
                        &pos,
                        LabeledTerm::Def(*f, lab.without(local), args.clone()),
                    );
                    let tid = self.intern(&target);
                    steps.push(StepRec {
                        target: tid,
                        rule: rid,
                        pos: pos.clone(),
                        kind: StepKind::Bot,
                        cost: CostV::Fin(0),
                        wit: Vec::new(),
                    });
                    continue;
                }
                // match the left-hand side arguments
                let mut sigma = LSubst::new();
                if rule.lhs_args().len() != args.len() {
                    continue;
                }
                let matched = rule
                    .lhs_args()
                    .iter()
                    .zip(args.iter())
                    .all(|(p, s)| match_labeled_into(p, s, &mut sigma));
                if !matched {
                    continue;
                }
                let k = rule.conditions.len();
                let mut states = vec![CState {
                    sigma,
                    cost: CostV::Fin(0),
                    wit: Vec::new(),
                }];
                let mut fail_best: Option<(CostV, Vec<WitRec>)> = None;
                for ci in 0..k {
                    let mut next: Vec<CState> = Vec::new();
                    for st in &states {
                        let cterm = label_subst(self.sys, &rule.conditions[ci].0, &st.sigma);
                        let cid = self.intern(&cterm);
                        quasi.push(cid);
                        self.ensure_nested(cid);
                        let ev = self.eval_condition(cid, rid, ci);
                        if let Some((fc, stop)) = ev.fail {
                            let total = st.cost.add(fc);
                            let mut wit = st.wit.clone();
                            wit.push(WitRec {
                                cond: cid,
                                stop,
                                cost: match fc {
                                    CostV::Fin(n) => n,
                                    CostV::Inf => u64::MAX,
                                },
                            });
                            if fail_best.as_ref().is_none_or(|(c, _)| total.gt(*c)) {
                                fail_best = Some((total, wit));
                            }
                        }
                        for (tau, stop, c) in &ev.successes {
                            let merged = st.sigma.union(tau);
                            let cost = st.cost.add(*c);
                            let mut wit = st.wit.clone();
                            wit.push(WitRec {
                                cond: cid,
                                stop: *stop,
                                cost: match *c {
                                    CostV::Fin(n) => n,
                                    CostV::Inf => u64::MAX,
                                },
                            });
                            match next.iter_mut().find(|s| s.sigma == merged) {
                                Some(existing) => {
                                    if cost.gt(existing.cost) {
                                        existing.cost = cost;
                                        existing.wit = wit;
                                    }
                                }
                                None => next.push(CState {
                                    sigma: merged,
                                    cost,
                                    wit,
                                }),
                            }
                        }
                    }
                    states = next;
                    if states.is_empty() {
                        break;
                    }
                }
                for st in &states {
                    if st.wit.len() != k {
                        continue;
                    }
                    let rhs = label_subst(self.sys, &rule.rhs, &st.sigma);
                    let target = term.replaced(&pos, rhs);
                    let tid = self.intern(&target);
                    let cost = CostV::Fin(1).add(st.cost);
                    match steps.iter_mut().find(|s| {
                        s.target == tid
                            && s.rule == rid
                            && s.pos == pos
                            && s.kind == StepKind::Success
                    }) {
                        Some(existing) => {
                            if cost.gt(existing.cost) {
                                existing.cost = cost;
                                existing.wit = st.wit.clone();
                            }
                        }
                        None => steps.push(StepRec {
                            target: tid,
                            rule: rid,
                            pos: pos.clone(),
                            kind: StepKind::Success,
                            cost,
                            wit: st.wit.clone(),
                        }),
                    }
                }
                if let Some((cost, wit)) = fail_best {
                    let target = term.replaced(
                        &pos,
                        LabeledTerm::Def(*f, lab.without(local), args.clone()),
                    );
                    let tid = self.intern(&target);
                    steps.push(StepRec {
                        target: tid,
                        rule: rid,
                        pos: pos.clone(),
                        kind: StepKind::Fail,
                        cost,
                        wit,
                    });
                }
            }
        }
        quasi.sort_unstable();
        quasi.dedup();
        (steps, quasi)
    }

    fn to_public_step(&self, rec: &StepRec) -> LabeledStep {
        LabeledStep {
            target: self.terms[rec.target as usize].clone(),
            kind: rec.kind,
            position: rec.pos.clone(),
            rule: rec.rule,
            cost: rec.cost.to_cost(),
            witnesses: rec
                .wit
                .iter()
                .map(|w| CondWitness {
                    condition: self.terms[w.cond as usize].clone(),
                    result: self.terms[w.stop as usize].clone(),
                    cost: w.cost,
                })
                .collect(),
        }
    }

    /// Enumerates all labeled steps of a ground term, with maximal costs.
    pub fn steps(&mut self, t: &LabeledTerm) -> Result<Searched<Vec<LabeledStep>>, LabeledError> {
        if !t.is_ground() {
            return Err(LabeledError::NonGroundTerm);
        }
        let id = self.explore(t);
        let value = self.nodes[id as usize]
            .steps
            .iter()
            .map(|r| self.to_public_step(r))
            .collect();
        Ok(Searched {
            value,
            complete: !self.exceeded,
        })
    }

    /// All quasi-step targets of a ground term.
    pub fn quasi_steps(
        &mut self,
        t: &LabeledTerm,
    ) -> Result<Searched<BTreeSet<LabeledTerm>>, LabeledError> {
        if !t.is_ground() {
            return Err(LabeledError::NonGroundTerm);
        }
        let id = self.explore(t);
        let value = self.nodes[id as usize]
            .quasi
            .iter()
            .map(|&q| self.terms[q as usize].clone())
            .collect();
        Ok(Searched {
            value,
            complete: !self.exceeded,
        })
    }

    /// Derivation height: the maximal total cost of any reduction, or
    /// `Infinite` when divergence is detected, or `AtLeast` on an exhausted
    /// budget.
    pub fn dh(&mut self, t: &LabeledTerm) -> Result<Cost, LabeledError> {
        if !t.is_ground() {
            return Err(LabeledError::NonGroundTerm);
        }
        let id = self.explore(t);
        let mut stack: Vec<u32> = Vec::new();
        let res = self.dh_value(id, &mut stack);
        Ok(match res {
            DhRes::Inf => Cost::Infinite,
            DhRes::Fin { val, exact: true } => Cost::Finite(val),
            DhRes::Fin { val, exact: false } => Cost::AtLeast(val),
        })
    }

    fn dh_value(&mut self, u: u32, stack: &mut Vec<u32>) -> DhRes {
        match self.dh_memo.get(&u) {
            Some(DhRes::Inf) => return DhRes::Inf,
            Some(&DhRes::Fin { val, exact: true }) => return DhRes::Fin { val, exact: true },
            _ => {}
        }
        // divergence check: some term on the current path embeds into this one
        let here = self.terms[u as usize].clone();
        for &s in stack.iter() {
            if here.contains(&self.terms[s as usize]) {
                self.dh_memo.insert(u, DhRes::Inf);
                return DhRes::Inf;
            }
        }
        if self.nodes[u as usize].status != Status::Done {
            return DhRes::Fin {
                val: 0,
                exact: false,
            };
        }
        stack.push(u);
        let mut val = 0u64;
        let mut exact = true;
        let mut inf = false;
        let steps = self.nodes[u as usize].steps.clone();
        let quasi = self.nodes[u as usize].quasi.clone();
        for rec in &steps {
            match rec.cost {
                CostV::Inf => inf = true,
                CostV::Fin(c) => match self.dh_value(rec.target, stack) {
                    DhRes::Inf => inf = true,
                    DhRes::Fin { val: v, exact: e } => {
                        val = val.max(c.saturating_add(v));
                        exact &= e;
                    }
                },
            }
            if inf {
                break;
            }
        }
        if !inf {
            for &q in &quasi {
                match self.dh_value(q, stack) {
                    DhRes::Inf => {
                        inf = true;
                        break;
                    }
                    DhRes::Fin { exact: e, .. } => exact &= e,
                }
            }
        }
        stack.pop();
        let res = if inf {
            DhRes::Inf
        } else {
            DhRes::Fin { val, exact }
        };
        self.dh_memo.insert(u, res);
        res
    }
}

/// Maximal derivation height over all ground (basic) terms of size at most
/// `n`, computed with a shared engine.
pub fn conditional_complexity(
    sys: &Cctrs,
    n: usize,
    mode: ComplexityMode,
    budget: SearchBudget,
) -> Result<Cost, ComplexityError> {
    let has_constant = sys
        .sig
        .symbols()
        .any(|f| sys.sig.arity(f) == 0);
    if !has_constant {
        return Err(ComplexityError::NoGroundTerms);
    }
    let terms = super::enumerate_ground_terms(sys, n, mode == ComplexityMode::Crc);
    let mut engine = Engine::new(sys, budget);
    let mut best = Cost::Finite(0);
    for t in &terms {
        let c = engine.dh(&label(sys, t))?;
        best = best.join_max(c);
        if best == Cost::Infinite {
            break;
        }
    }
    Ok(best)
}

/// One-shot derivation height.
pub fn derivation_height(
    sys: &Cctrs,
    t: &LabeledTerm,
    budget: SearchBudget,
) -> Result<Cost, LabeledError> {
    Engine::new(sys, budget).dh(t)
}

/// One-shot step enumeration.
pub fn labeled_steps(
    sys: &Cctrs,
    t: &LabeledTerm,
    budget: SearchBudget,
) -> Result<Searched<Vec<LabeledStep>>, LabeledError> {
    Engine::new(sys, budget).steps(t)
}

/// One-shot quasi-step enumeration.
pub fn quasi_steps_labeled(
    sys: &Cctrs,
    t: &LabeledTerm,
    budget: SearchBudget,
) -> Result<Searched<BTreeSet<LabeledTerm>>, LabeledError> {
    Engine::new(sys, budget).quasi_steps(t)
}

impl LabeledTerm {
    /// Convenience for tests: true when the term is a labeled normal form.
    pub fn is_nf(&self) -> bool {
        is_labeled_nf(self)
    }
}
