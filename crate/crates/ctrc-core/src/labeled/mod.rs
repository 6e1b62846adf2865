//! Labeled terms and the labeled rewrite relation.
//!
//! Every defined symbol occurrence carries the set of rules that have not yet
//! been tried at that occurrence. Reduction comes in three flavours: removal
//! of a rule that can never match (cost 0), a successful rule application
//! (cost 1 plus the cost of evaluating its conditions), and a failed rule
//! application (the cost of the condition evaluation that established the
//! failure). Derivation height maximizes the total cost over all reductions.

mod engine;

pub use engine::{
    conditional_complexity, derivation_height, labeled_steps, quasi_steps_labeled,
    ComplexityError, ComplexityMode, Engine, LabeledError,
};

use std::collections::BTreeMap;
use std::fmt;

use crate::cctrs::Cctrs;
use crate::term::{FreshVars, Position, Subst, Symbol, SymbolKind, Term, Var};

/// A label: the set of not-yet-tried rules of one defined symbol, stored as a
/// bitmask over the local rule indices (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl Label {
    pub fn empty() -> Label {
        Label(0)
    }

    pub fn full(rule_count: usize) -> Label {
        debug_assert!(rule_count <= 30);
        Label(((1u64 << rule_count) - 1) as u32)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, local: usize) -> bool {
        self.0 & (1 << local) != 0
    }

    pub fn without(self, local: usize) -> Label {
        Label(self.0 & !(1 << local))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |i| self.0 & (1 << i) != 0)
    }
}

/// Term over the labeled signature: constructors are undecorated, defined
/// symbols carry a [`Label`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabeledTerm {
    Var(Var),
    Cons(Symbol, Vec<LabeledTerm>),
    Def(Symbol, Label, Vec<LabeledTerm>),
}

impl LabeledTerm {
    pub fn is_ground(&self) -> bool {
        match self {
            LabeledTerm::Var(_) => false,
            LabeledTerm::Cons(_, args) | LabeledTerm::Def(_, _, args) => {
                args.iter().all(LabeledTerm::is_ground)
            }
        }
    }

    /// Number of symbol occurrences (variables excluded); labels do not count.
    pub fn size(&self) -> usize {
        match self {
            LabeledTerm::Var(_) => 0,
            LabeledTerm::Cons(_, args) | LabeledTerm::Def(_, _, args) => {
                1 + args.iter().map(LabeledTerm::size).sum::<usize>()
            }
        }
    }

    pub fn args(&self) -> &[LabeledTerm] {
        match self {
            LabeledTerm::Var(_) => &[],
            LabeledTerm::Cons(_, args) | LabeledTerm::Def(_, _, args) => args,
        }
    }

    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn walk(t: &LabeledTerm, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            out.push(Position(path.clone()));
            for (i, a) in t.args().iter().enumerate() {
                path.push(i + 1);
                walk(a, path, out);
                path.pop();
            }
        }
        walk(self, &mut path, &mut out);
        out
    }

    pub fn at(&self, p: &Position) -> Option<&LabeledTerm> {
        let mut t = self;
        for &i in &p.0 {
            t = t.args().get(i.checked_sub(1)?)?;
        }
        Some(t)
    }

    pub fn replaced(&self, p: &Position, new: LabeledTerm) -> LabeledTerm {
        fn go(t: &LabeledTerm, path: &[usize], new: LabeledTerm) -> LabeledTerm {
            match path.split_first() {
                None => new,
                Some((&i, rest)) => match t {
                    LabeledTerm::Cons(f, args) => {
                        let mut args = args.clone();
                        args[i - 1] = go(&args[i - 1], rest, new);
                        LabeledTerm::Cons(*f, args)
                    }
                    LabeledTerm::Def(f, l, args) => {
                        let mut args = args.clone();
                        args[i - 1] = go(&args[i - 1], rest, new);
                        LabeledTerm::Def(*f, *l, args)
                    }
                    LabeledTerm::Var(_) => panic!("position below a variable"),
                },
            }
        }
        go(self, &p.0, new)
    }

    pub fn contains(&self, sub: &LabeledTerm) -> bool {
        if self == sub {
            return true;
        }
        self.args().iter().any(|a| a.contains(sub))
    }

    pub fn display<'a>(&'a self, sys: &'a Cctrs) -> LabeledDisplay<'a> {
        LabeledDisplay { term: self, sys }
    }
}

pub struct LabeledDisplay<'a> {
    term: &'a LabeledTerm,
    sys: &'a Cctrs,
}

impl fmt::Display for LabeledDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args = |f: &mut fmt::Formatter<'_>, args: &[LabeledTerm]| -> fmt::Result {
            if !args.is_empty() {
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a.display(self.sys))?;
                }
                write!(f, ")")?;
            }
            Ok(())
        };
        match self.term {
            LabeledTerm::Var(x) => write!(f, "{x}"),
            LabeledTerm::Cons(s, a) => {
                write!(f, "{}", self.sys.sig.name(*s))?;
                args(f, a)
            }
            LabeledTerm::Def(s, l, a) => {
                let locals: Vec<String> = l.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "{}{{{}}}", self.sys.sig.name(*s), locals.join(","))?;
                args(f, a)
            }
        }
    }
}

/// Labels every defined symbol with the full set of its rules.
pub fn label(sys: &Cctrs, t: &Term) -> LabeledTerm {
    match t {
        Term::Var(x) => LabeledTerm::Var(x.clone()),
        Term::App(f, args) => {
            let largs = args.iter().map(|a| label(sys, a)).collect();
            if sys.sig.kind(*f) == SymbolKind::Defined {
                LabeledTerm::Def(*f, Label::full(sys.rule_count_for(*f)), largs)
            } else {
                LabeledTerm::Cons(*f, largs)
            }
        }
    }
}

/// Removes all labels.
pub fn erase(t: &LabeledTerm) -> Term {
    match t {
        LabeledTerm::Var(x) => Term::Var(x.clone()),
        LabeledTerm::Cons(f, args) | LabeledTerm::Def(f, _, args) => {
            Term::App(*f, args.iter().map(erase).collect())
        }
    }
}

/// Total number of rules occurring in all labels of `t`.
pub fn label_weight(t: &LabeledTerm) -> usize {
    match t {
        LabeledTerm::Var(_) => 0,
        LabeledTerm::Cons(_, args) => args.iter().map(label_weight).sum(),
        LabeledTerm::Def(_, l, args) => l.len() + args.iter().map(label_weight).sum::<usize>(),
    }
}

/// A labeled normal form has the empty label on every defined symbol.
pub fn is_labeled_nf(t: &LabeledTerm) -> bool {
    match t {
        LabeledTerm::Var(_) => true,
        LabeledTerm::Cons(_, args) => args.iter().all(is_labeled_nf),
        LabeledTerm::Def(_, l, args) => l.is_empty() && args.iter().all(is_labeled_nf),
    }
}

/// Substitution into labeled terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct LSubst(pub BTreeMap<Var, LabeledTerm>);

impl LSubst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &Var) -> Option<&LabeledTerm> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Var, t: LabeledTerm) {
        self.0.insert(x, t);
    }

    pub fn union(&self, other: &LSubst) -> LSubst {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.0.insert(k.clone(), v.clone());
        }
        out
    }

    pub fn apply_labeled(&self, t: &LabeledTerm) -> LabeledTerm {
        match t {
            LabeledTerm::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            LabeledTerm::Cons(f, args) => {
                LabeledTerm::Cons(*f, args.iter().map(|a| self.apply_labeled(a)).collect())
            }
            LabeledTerm::Def(f, l, args) => {
                LabeledTerm::Def(*f, *l, args.iter().map(|a| self.apply_labeled(a)).collect())
            }
        }
    }
}

/// `label(t) σ` for a plain term `t` and a labeled substitution `σ`.
pub fn label_subst(sys: &Cctrs, t: &Term, sigma: &LSubst) -> LabeledTerm {
    match t {
        Term::Var(x) => sigma
            .get(x)
            .cloned()
            .unwrap_or_else(|| LabeledTerm::Var(x.clone())),
        Term::App(f, args) => {
            let largs = args.iter().map(|a| label_subst(sys, a, sigma)).collect();
            if sys.sig.kind(*f) == SymbolKind::Defined {
                LabeledTerm::Def(*f, Label::full(sys.rule_count_for(*f)), largs)
            } else {
                LabeledTerm::Cons(*f, largs)
            }
        }
    }
}

/// Matches a constructor pattern (a plain term without defined symbols below
/// the root) against a labeled term. Constructor symbols only match
/// undecorated constructors.
pub fn match_labeled_into(pattern: &Term, subject: &LabeledTerm, sigma: &mut LSubst) -> bool {
    match pattern {
        Term::Var(x) => match sigma.get(x) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::App(f, pargs) => match subject {
            LabeledTerm::Cons(g, sargs) if f == g && pargs.len() == sargs.len() => pargs
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_labeled_into(p, s, sigma)),
            _ => false,
        },
    }
}

pub fn match_labeled(pattern: &Term, subject: &LabeledTerm) -> Option<LSubst> {
    let mut sigma = LSubst::new();
    if match_labeled_into(pattern, subject, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

/// Computes the maximal linear labeled-normal-form generalization of `t`:
/// every maximal subterm whose root carries a non-empty label is replaced by
/// a distinct fresh variable. Returns the pattern together with a
/// substitution mapping it back onto `t`.
pub fn lnf_generalization(t: &LabeledTerm) -> (LabeledTerm, LSubst) {
    let mut fresh = FreshVars::new();
    let mut sigma = LSubst::new();
    let pattern = lnf_generalize_with(t, &mut fresh, &mut sigma);
    (pattern, sigma)
}

pub(crate) fn lnf_generalize_with(
    t: &LabeledTerm,
    fresh: &mut FreshVars,
    sigma: &mut LSubst,
) -> LabeledTerm {
    match t {
        LabeledTerm::Var(x) => LabeledTerm::Var(x.clone()),
        LabeledTerm::Cons(f, args) => LabeledTerm::Cons(
            *f,
            args.iter()
                .map(|a| lnf_generalize_with(a, fresh, sigma))
                .collect(),
        ),
        LabeledTerm::Def(f, l, args) => {
            if l.is_empty() {
                LabeledTerm::Def(
                    *f,
                    *l,
                    args.iter()
                        .map(|a| lnf_generalize_with(a, fresh, sigma))
                        .collect(),
                )
            } else {
                let x = fresh.fresh();
                sigma.insert(x.clone(), t.clone());
                LabeledTerm::Var(x)
            }
        }
    }
}

/// Cost values of derivation-height computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cost {
    Finite(u64),
    Infinite,
    /// Verdict of an exhausted search: the true value is at least this.
    AtLeast(u64),
}

impl Cost {
    /// Combines maxima; an `AtLeast` taints the result, `Infinite` dominates.
    pub fn join_max(self, other: Cost) -> Cost {
        use Cost::*;
        match (self, other) {
            (Infinite, _) | (_, Infinite) => Infinite,
            (AtLeast(a), AtLeast(b)) => AtLeast(a.max(b)),
            (AtLeast(a), Finite(b)) | (Finite(b), AtLeast(a)) => AtLeast(a.max(b)),
            (Finite(a), Finite(b)) => Finite(a.max(b)),
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use Cost::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Infinite, Infinite) => Some(std::cmp::Ordering::Equal),
            (Infinite, Finite(_)) => Some(std::cmp::Ordering::Greater),
            (Finite(_), Infinite) => Some(std::cmp::Ordering::Less),
            // search verdicts are not comparable as true values
            (AtLeast(_), _) | (_, AtLeast(_)) => None,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(n) => write!(f, "{n}"),
            Cost::Infinite => write!(f, "inf"),
            Cost::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StepKind {
    /// Removal of a rule whose left-hand side can never match here.
    Bot,
    Success,
    Fail,
}

/// One witness for a condition evaluation: the instantiated condition
/// left-hand side, the term the evaluation stopped at, and its cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondWitness {
    pub condition: LabeledTerm,
    pub result: LabeledTerm,
    pub cost: u64,
}

/// A labeled step with its maximal achievable cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStep {
    pub target: LabeledTerm,
    pub kind: StepKind,
    pub position: Position,
    /// Global rule index.
    pub rule: usize,
    /// Supremum of achievable costs for this (target, rule, position).
    pub cost: Cost,
    pub witnesses: Vec<CondWitness>,
}

/// Enumerates all ground terms of size at most `max_size`, smallest first,
/// in a deterministic order. With `basic`, only defined symbols applied to
/// constructor terms.
pub fn enumerate_ground_terms(sys: &Cctrs, max_size: usize, basic: bool) -> Vec<Term> {
    let cons_table = terms_by_size(sys, max_size.saturating_sub(if basic { 1 } else { 0 }), true);
    let mut out = Vec::new();
    if basic {
        for size in 1..=max_size {
            for f in sys.defined_symbols() {
                let m = sys.sig.arity(f);
                collect_apps(&cons_table, f, m, size - 1, &mut out);
            }
        }
    } else {
        let all_table = terms_by_size(sys, max_size, false);
        for bucket in all_table.iter().take(max_size + 1) {
            out.extend(bucket.iter().cloned());
        }
    }
    out
}

fn terms_by_size(sys: &Cctrs, max_size: usize, constructor_only: bool) -> Vec<Vec<Term>> {
    let mut table: Vec<Vec<Term>> = vec![Vec::new(); max_size + 1];
    let symbols: Vec<Symbol> = sys
        .sig
        .symbols()
        .filter(|&f| {
            !constructor_only || sys.sig.kind(f) == SymbolKind::Constructor
        })
        .collect();
    for size in 1..=max_size {
        let mut bucket = Vec::new();
        for &f in &symbols {
            let m = sys.sig.arity(f);
            if m == 0 {
                if size == 1 {
                    bucket.push(Term::constant(f));
                }
            } else if size > m {
                let mut args = Vec::new();
                build_args(&table, m, size - 1, &mut args, &mut |args: &[Term]| {
                    bucket.push(Term::App(f, args.to_vec()));
                });
                drop(args);
            }
        }
        table[size] = bucket;
    }
    table
}

fn collect_apps(table: &[Vec<Term>], f: Symbol, arity: usize, args_size: usize, out: &mut Vec<Term>) {
    if arity == 0 {
        if args_size == 0 {
            out.push(Term::constant(f));
        }
        return;
    }
    if args_size < arity {
        return;
    }
    let mut args = Vec::new();
    build_args(table, arity, args_size, &mut args, &mut |args: &[Term]| {
        out.push(Term::App(f, args.to_vec()));
    });
}

fn build_args(
    table: &[Vec<Term>],
    remaining: usize,
    size_left: usize,
    acc: &mut Vec<Term>,
    emit: &mut dyn FnMut(&[Term]),
) {
    if remaining == 0 {
        if size_left == 0 {
            emit(acc);
        }
        return;
    }
    let min_rest = remaining - 1;
    for s in 1..=size_left.saturating_sub(min_rest) {
        if s >= table.len() {
            break;
        }
        for i in 0..table[s].len() {
            let t = table[s][i].clone();
            acc.push(t);
            build_args(table, remaining - 1, size_left - s, acc, emit);
            acc.pop();
        }
    }
}

/// Enumerates all ground labeled terms of size at most `max_size`: every
/// defined occurrence independently takes each subset of its rules.
pub fn enumerate_ground_labeled(sys: &Cctrs, max_size: usize) -> Vec<LabeledTerm> {
    let mut table: Vec<Vec<LabeledTerm>> = vec![Vec::new(); max_size + 1];
    let symbols: Vec<Symbol> = sys.sig.symbols().collect();
    for size in 1..=max_size {
        let mut bucket = Vec::new();
        for &f in &symbols {
            let m = sys.sig.arity(f);
            if m == 0 && size != 1 {
                continue;
            }
            if m > 0 && size < 1 + m {
                continue;
            }
            let mut variants: Vec<Label> = Vec::new();
            let defined = sys.sig.kind(f) == SymbolKind::Defined;
            if defined {
                let rc = sys.rule_count_for(f);
                for mask in 0..(1u32 << rc) {
                    variants.push(Label(mask));
                }
            }
            let emit_with_labels = |args: &[LabeledTerm], bucket: &mut Vec<LabeledTerm>| {
                if defined {
                    for &l in &variants {
                        bucket.push(LabeledTerm::Def(f, l, args.to_vec()));
                    }
                } else {
                    bucket.push(LabeledTerm::Cons(f, args.to_vec()));
                }
            };
            if m == 0 {
                emit_with_labels(&[], &mut bucket);
            } else {
                let mut acc: Vec<LabeledTerm> = Vec::new();
                build_labeled_args(&table, m, size - 1, &mut acc, &mut |args| {
                    emit_with_labels(args, &mut bucket)
                });
            }
        }
        table[size] = bucket;
    }
    let mut out = Vec::new();
    for bucket in table.into_iter().take(max_size + 1) {
        out.extend(bucket);
    }
    out
}

fn build_labeled_args(
    table: &[Vec<LabeledTerm>],
    remaining: usize,
    size_left: usize,
    acc: &mut Vec<LabeledTerm>,
    emit: &mut dyn FnMut(&[LabeledTerm]),
) {
    if remaining == 0 {
        if size_left == 0 {
            emit(acc);
        }
        return;
    }
    let min_rest = remaining - 1;
    for s in 1..=size_left.saturating_sub(min_rest) {
        if s >= table.len() {
            break;
        }
        for i in 0..table[s].len() {
            let t = table[s][i].clone();
            acc.push(t);
            build_labeled_args(table, remaining - 1, size_left - s, acc, emit);
            acc.pop();
        }
    }
}

/// Applies a plain substitution view to erase-level reasoning in tests.
pub fn erase_subst(sigma: &LSubst) -> Subst {
    let mut out = Subst::new();
    for (k, v) in &sigma.0 {
        out.insert(k.clone(), erase(v));
    }
    out
}
