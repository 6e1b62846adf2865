//! Context-sensitive rewriting over the transformed system, with cost
//! accounting: the derivation height counts non-administrative steps only.

use std::collections::{BTreeSet, HashMap};

use crate::fnv::FnvMap;

use crate::labeled::Cost;
use crate::rewrite::{SearchBudget, Searched};
use crate::term::{match_term, Position, Symbol, Term};
use crate::transform::TransformedTrs;

/// One context-sensitive step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CsStep {
    pub target: Term,
    pub cost: u64,
    /// Index into the transformed rule list.
    pub rule: usize,
    pub position: Position,
}

/// Positions reachable through active argument slots only.
pub fn active_positions(trs: &TransformedTrs, t: &Term) -> Vec<Position> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn walk(trs: &TransformedTrs, t: &Term, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        if let Term::App(f, args) = t {
            let mu = trs.hsig.mu_of(*f);
            for (i, a) in args.iter().enumerate() {
                if mu.contains(&(i + 1)) {
                    path.push(i + 1);
                    walk(trs, a, path, out);
                    path.pop();
                }
            }
        }
    }
    walk(trs, t, &mut path, &mut out);
    out
}

/// All one-step reducts at active positions.
pub fn cs_steps(trs: &TransformedTrs, t: &Term) -> Vec<CsStep> {
    let mut out = Vec::new();
    for pos in active_positions(trs, t) {
        let sub = t.at(&pos).unwrap();
        for (rid, rule) in trs.rules.iter().enumerate() {
            if let Some(sigma) = match_term(&rule.lhs, sub) {
                out.push(CsStep {
                    target: t.replaced(&pos, sigma.apply(&rule.rhs)),
                    cost: rule.cost,
                    rule: rid,
                    position: pos.clone(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DhRes {
    Fin { val: u64, exact: bool },
    Inf,
}

/// Engine with a memoized state space shared between queries.
pub struct CsEngine<'a> {
    trs: &'a TransformedTrs,
    budget: SearchBudget,
    terms: Vec<Term>,
    ids: FnvMap<Term, u32>,
    steps: Vec<Option<Vec<(u32, u64)>>>,
    /// node counts, for the containment pre-check
    sizes: Vec<u32>,
    dh_memo: FnvMap<u32, DhRes>,
    by_root: HashMap<Symbol, Vec<usize>>,
    exceeded: bool,
}

fn node_count(t: &Term) -> u32 {
    match t {
        Term::Var(_) => 1,
        Term::App(_, args) => 1 + args.iter().map(node_count).sum::<u32>(),
    }
}

impl<'a> CsEngine<'a> {
    pub fn new(trs: &'a TransformedTrs, budget: SearchBudget) -> Self {
        let mut by_root: HashMap<Symbol, Vec<usize>> = HashMap::new();
        for (rid, rule) in trs.rules.iter().enumerate() {
            if let Term::App(f, _) = &rule.lhs {
                by_root.entry(*f).or_default().push(rid);
            }
        }
        CsEngine {
            trs,
            budget,
            terms: Vec::new(),
            ids: FnvMap::default(),
            steps: Vec::new(),
            sizes: Vec::new(),
            dh_memo: FnvMap::default(),
            by_root,
            exceeded: false,
        }
    }

    pub fn budget_exceeded(&self) -> bool {
        self.exceeded
    }

    /// Number of distinct terms interned so far.
    pub fn state_count(&self) -> usize {
        self.terms.len()
    }

    fn intern(&mut self, t: &Term) -> u32 {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(t.clone());
        self.ids.insert(t.clone(), id);
        self.steps.push(None);
        self.sizes.push(node_count(t));
        id
    }

    fn step_ids(&mut self, u: u32) -> Vec<(u32, u64)> {
        if let Some(s) = &self.steps[u as usize] {
            return s.clone();
        }
        if (u as usize) >= self.budget.max_states {
            self.exceeded = true;
            return Vec::new();
        }
        let term = self.terms[u as usize].clone();
        let mut out = Vec::new();
        for pos in active_positions(self.trs, &term) {
            let sub = term.at(&pos).unwrap();
            let Term::App(root, _) = sub else { continue };
            let rids = match self.by_root.get(root) {
                Some(r) => r.clone(),
                None => continue,
            };
            for rid in rids {
                let rule = &self.trs.rules[rid];
                if let Some(sigma) = match_term(&rule.lhs, sub) {
                    let target = term.replaced(&pos, sigma.apply(&rule.rhs));
                    let tid = self.intern(&target);
                    out.push((tid, rule.cost));
                }
            }
        }
        self.steps[u as usize] = Some(out.clone());
        out
    }

    /// Derivation height of `t`: maximal number of cost-1 steps on any
    /// reduction. Divergence is reported as `Infinite` when a cycle or a
    /// self-embedding at an active position is found; an exhausted budget
    /// yields `AtLeast`.
    pub fn dh(&mut self, t: &Term) -> Cost {
        let id = self.intern(t);
        let mut stack = Vec::new();
        match self.dh_value(id, &mut stack) {
            DhRes::Inf => Cost::Infinite,
            DhRes::Fin { val, exact: true } => Cost::Finite(val),
            DhRes::Fin { val, exact: false } => Cost::AtLeast(val),
        }
    }

    fn dh_value(&mut self, u: u32, stack: &mut Vec<u32>) -> DhRes {
        match self.dh_memo.get(&u) {
            Some(DhRes::Inf) => return DhRes::Inf,
            Some(&DhRes::Fin { val, exact: true }) => return DhRes::Fin { val, exact: true },
            _ => {}
        }
        // divergence: a path ancestor occurs at an active position of this term
        let here_size = self.sizes[u as usize];
        let mut embedded = false;
        for &s in stack.iter() {
            if self.sizes[s as usize] <= here_size
                && contains_active(
                    self.trs,
                    &self.terms[u as usize],
                    &self.terms[s as usize],
                )
            {
                embedded = true;
                break;
            }
        }
        if embedded {
            self.dh_memo.insert(u, DhRes::Inf);
            return DhRes::Inf;
        }
        if (u as usize) >= self.budget.max_states {
            self.exceeded = true;
            return DhRes::Fin {
                val: 0,
                exact: false,
            };
        }
        let steps = self.step_ids(u);
        stack.push(u);
        let mut val = 0u64;
        let mut exact = true;
        let mut inf = false;
        for (target, cost) in steps {
            match self.dh_value(target, stack) {
                DhRes::Inf => {
                    inf = true;
                    break;
                }
                DhRes::Fin { val: v, exact: e } => {
                    val = val.max(cost.saturating_add(v));
                    exact &= e;
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

    /// All normal forms reachable from `t` within the budget.
    pub fn normal_forms(&mut self, t: &Term) -> Searched<BTreeSet<Term>> {
        let root = self.intern(t);
        let mut seen: BTreeSet<u32> = [root].into();
        let mut frontier = vec![root];
        let mut nfs = BTreeSet::new();
        while let Some(u) = frontier.pop() {
            if (u as usize) >= self.budget.max_states {
                self.exceeded = true;
                continue;
            }
            let steps = self.step_ids(u);
            if steps.is_empty() {
                nfs.insert(self.terms[u as usize].clone());
            }
            for (v, _) in steps {
                if seen.insert(v) {
                    frontier.push(v);
                }
            }
        }
        Searched {
            value: nfs,
            complete: !self.exceeded,
        }
    }
}

/// True when `needle` occurs in `hay` at a position reachable through active
/// argument slots (including the root).
fn contains_active(trs: &TransformedTrs, hay: &Term, needle: &Term) -> bool {
    if hay == needle {
        return true;
    }
    match hay {
        Term::Var(_) => false,
        Term::App(f, args) => {
            let mu = trs.hsig.mu_of(*f);
            args.iter()
                .enumerate()
                .any(|(i, a)| mu.contains(&(i + 1)) && contains_active(trs, a, needle))
        }
    }
}

/// One-shot derivation height.
pub fn cs_derivation_height(trs: &TransformedTrs, t: &Term, budget: SearchBudget) -> Cost {
    CsEngine::new(trs, budget).dh(t)
}

/// One-shot normal-form search.
pub fn cs_normal_forms(
    trs: &TransformedTrs,
    t: &Term,
    budget: SearchBudget,
) -> Searched<BTreeSet<Term>> {
    CsEngine::new(trs, budget).normal_forms(t)
}
