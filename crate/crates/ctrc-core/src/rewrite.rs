//! The plain conditional rewrite relation and the quasi-step relation.
//!
//! Condition satisfaction needs reachability search: `a σ ->* b σ'` holds when
//! some reduct of `a σ` is an instance of `b`. Reducts of condition terms are
//! themselves conditional steps, so the engine computes a least fixpoint over
//! an interned state space, bounded by a [`SearchBudget`].

use std::collections::BTreeSet;

use crate::fnv::FnvMap;

use crate::cctrs::{union_subst, Cctrs};
use crate::term::{match_term, Position, Subst, Term};

/// Bounds for condition-evaluation searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    /// Maximum number of distinct states explored per engine.
    pub max_states: usize,
    /// Maximum condition-nesting depth.
    pub max_depth: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_states: 20_000,
            max_depth: 12,
        }
    }
}

/// A one-step reduct together with the rule (global index) and position used.
pub type PlainStep = (Term, usize, Position);

/// Result of a bounded search; `complete` is false when the budget was hit
/// and the set may therefore be missing elements.
#[derive(Debug, Clone)]
pub struct Searched<T> {
    pub value: T,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct StepRec {
    target: u32,
    rule: usize,
    pos: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    New,
    InProgress,
    Done,
}

#[derive(Debug, Clone)]
struct Node {
    status: Status,
    steps: Vec<StepRec>,
    quasi: Vec<u32>,
}

/// Conditional rewriting engine with a memoized state space. One engine may
/// serve many queries over the same system; results are deterministic.
pub struct PlainEngine<'a> {
    sys: &'a Cctrs,
    budget: SearchBudget,
    terms: Vec<Term>,
    ids: FnvMap<Term, u32>,
    nodes: Vec<Node>,
    exceeded: bool,
    cycle_seen: bool,
    kleene_mode: bool,
    depth: usize,
}

impl<'a> PlainEngine<'a> {
    pub fn new(sys: &'a Cctrs, budget: SearchBudget) -> Self {
        PlainEngine {
            sys,
            budget,
            terms: Vec::new(),
            ids: FnvMap::default(),
            nodes: Vec::new(),
            exceeded: false,
            cycle_seen: false,
            kleene_mode: false,
            depth: 0,
        }
    }

    pub fn budget_exceeded(&self) -> bool {
        self.exceeded
    }

    fn intern(&mut self, t: &Term) -> u32 {
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

    /// Explores the forward closure of `root` so that every reachable term has
    /// its step set computed.
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
            // nodes found during fixpoint rounds are picked up by the round loop
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

    fn explore(&mut self, t: &Term) -> u32 {
        let id = self.intern(t);
        self.ensure(id);
        if self.cycle_seen {
            self.kleene();
            self.cycle_seen = false;
        }
        id
    }

    /// Fixpoint rounds for systems whose condition evaluation is self-referential.
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
            if !changed {
                break;
            }
        }
        for n in &mut self.nodes {
            n.status = Status::Done;
        }
        self.kleene_mode = false;
    }

    /// All terms reachable from `root` via already-computed steps, including
    /// `root` itself.
    fn reachable_ids(&self, root: u32) -> Vec<u32> {
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        seen.insert(root);
        let mut frontier = vec![root];
        while let Some(u) = frontier.pop() {
            for s in &self.nodes[u as usize].steps {
                if seen.insert(s.target) {
                    frontier.push(s.target);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn compute_steps(&mut self, u: u32) -> (Vec<StepRec>, Vec<u32>) {
        let term = self.terms[u as usize].clone();
        let mut steps = Vec::new();
        let mut quasi = Vec::new();
        for pos in term.positions() {
            let sub = term.at(&pos).unwrap().clone();
            let root = match &sub {
                Term::App(f, _) => *f,
                Term::Var(_) => continue,
            };
            for &rid in self.sys.rules_for(root) {
                let rule = &self.sys.rules[rid];
                let Some(sigma) = match_term(&rule.lhs, &sub) else {
                    continue;
                };
                // evaluate conditions left to right, collecting all extensions
                let mut states: Vec<Subst> = vec![sigma];
                let mut ok = true;
                for (a, b) in &rule.conditions {
                    let mut next: Vec<Subst> = Vec::new();
                    for st in &states {
                        let cterm = st.apply(a);
                        let cid = self.intern(&cterm);
                        quasi.push(cid);
                        if self.depth < self.budget.max_depth {
                            self.depth += 1;
                            self.ensure(cid);
                            self.depth -= 1;
                        } else {
                            self.exceeded = true;
                        }
                        for vid in self.reachable_ids(cid) {
                            let v = &self.terms[vid as usize];
                            if let Some(tau) = match_term(b, v) {
                                let merged = union_subst(st, &tau);
                                if !next.contains(&merged) {
                                    next.push(merged);
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        ok = false;
                        break;
                    }
                    states = next;
                }
                if !ok {
                    continue;
                }
                for st in &states {
                    let target = term.replaced(&pos, st.apply(&rule.rhs));
                    let tid = self.intern(&target);
                    let rec = StepRec {
                        target: tid,
                        rule: rid,
                        pos: pos.clone(),
                    };
                    if !steps.contains(&rec) {
                        steps.push(rec);
                    }
                }
            }
        }
        quasi.sort_unstable();
        quasi.dedup();
        (steps, quasi)
    }

    /// All one-step reducts of `s`, with rule and position.
    pub fn steps(&mut self, s: &Term) -> Searched<BTreeSet<PlainStep>> {
        let id = self.explore(s);
        let value = self.nodes[id as usize]
            .steps
            .iter()
            .map(|r| {
                (
                    self.terms[r.target as usize].clone(),
                    r.rule,
                    r.pos.clone(),
                )
            })
            .collect();
        Searched {
            value,
            complete: !self.exceeded,
        }
    }

    /// The quasi-step targets of `s`: every `a_i σ` whose first `i-1`
    /// conditions are satisfied by the (extended) matching substitution.
    pub fn quasi_steps(&mut self, s: &Term) -> Searched<BTreeSet<Term>> {
        let id = self.explore(s);
        let value = self.nodes[id as usize]
            .quasi
            .iter()
            .map(|&q| self.terms[q as usize].clone())
            .collect();
        Searched {
            value,
            complete: !self.exceeded,
        }
    }

    /// All terms reachable from `s` (including `s`).
    pub fn reachable(&mut self, s: &Term) -> Searched<BTreeSet<Term>> {
        let id = self.explore(s);
        let value = self
            .reachable_ids(id)
            .into_iter()
            .map(|v| self.terms[v as usize].clone())
            .collect();
        Searched {
            value,
            complete: !self.exceeded,
        }
    }
}

/// One-shot wrapper around [`PlainEngine::steps`].
pub fn conditional_steps(
    sys: &Cctrs,
    s: &Term,
    budget: SearchBudget,
) -> Searched<BTreeSet<PlainStep>> {
    PlainEngine::new(sys, budget).steps(s)
}

/// One-shot wrapper around [`PlainEngine::quasi_steps`].
pub fn quasi_steps(sys: &Cctrs, s: &Term, budget: SearchBudget) -> Searched<BTreeSet<Term>> {
    PlainEngine::new(sys, budget).quasi_steps(s)
}
