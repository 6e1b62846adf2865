//! Transformation of a strong conditional system into an unconditional
//! context-sensitive TRS. Defined symbols gain one flag argument per rule;
//! condition evaluation runs inside dedicated progress symbols `f#i#j`;
//! anti-pattern rules retire rules that can no longer apply.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::cctrs::{Cctrs, ValidationReport};
use crate::labeled::{Label, LabeledTerm};
use crate::term::{Decoration, FreshVars, Signature, Symbol, SymbolKind, Term, Var};

/// The transformed signature: base symbols keep their ids, defined symbols
/// are widened by one flag argument per rule, and `f#i#j` carries the
/// evaluation of condition `j` of rule `i`.
#[derive(Debug, Clone)]
pub struct HSignature {
    pub sig: Signature,
    /// Active argument positions per symbol (1-based).
    pub mu: Vec<BTreeSet<usize>>,
    pub top: Symbol,
    pub bot: Symbol,
    /// Arity each base symbol has in the original signature.
    pub base_arity: Vec<usize>,
    progress: HashMap<(Symbol, usize, usize), Symbol>,
}

impl HSignature {
    pub fn mu_of(&self, f: Symbol) -> &BTreeSet<usize> {
        &self.mu[f.index()]
    }

    pub fn progress_symbol(&self, f: Symbol, rule: usize, cond: usize) -> Option<Symbol> {
        self.progress.get(&(f, rule, cond)).copied()
    }

    pub fn is_flag(&self, f: Symbol) -> bool {
        f == self.top || f == self.bot
    }

    /// Number of symbols whose ids coincide with the original signature.
    pub fn base_len(&self) -> usize {
        self.base_arity.len()
    }

    /// Builds the widened signature with its replacement map.
    pub fn build(sys: &Cctrs) -> Result<HSignature, TransformError> {
        for f in sys.sig.symbols() {
            let name = sys.sig.name(f);
            if name == "top" || name == "bot" || name.contains('#') {
                return Err(TransformError::ReservedName(name.to_string()));
            }
        }
        let mut sig = Signature::new();
        let mut mu: Vec<BTreeSet<usize>> = Vec::new();
        let mut base_arity = Vec::new();
        for f in sys.sig.symbols() {
            let d = sys.sig.data(f);
            let n = d.arity;
            let m = sys.rule_count_for(f);
            let id = sig.add(&d.name, n + m, d.kind);
            debug_assert_eq!(id, f);
            mu.push((1..=n).collect());
            base_arity.push(n);
        }
        let mut progress = HashMap::new();
        for f in sys.defined_symbols() {
            let n = sys.sig.arity(f);
            let m = sys.rule_count_for(f);
            for (local0, &rid) in sys.rules_for(f).iter().enumerate() {
                let i = local0 + 1;
                let k = sys.rules[rid].conditions.len();
                for j in 1..=k {
                    let name = format!("{}#{}#{}", sys.sig.name(f), i, j);
                    let sym = sig.add_decorated(
                        &name,
                        n + m + j - 1,
                        SymbolKind::Defined,
                        Decoration::Progress {
                            base: f,
                            rule: i,
                            cond: j,
                        },
                    );
                    mu.push([n + i + j - 1].into());
                    progress.insert((f, i, j), sym);
                }
            }
        }
        let top = sig.add_decorated("top", 0, SymbolKind::Auxiliary, Decoration::Top);
        mu.push(BTreeSet::new());
        let bot = sig.add_decorated("bot", 0, SymbolKind::Auxiliary, Decoration::Bot);
        mu.push(BTreeSet::new());
        Ok(HSignature {
            sig,
            mu,
            top,
            bot,
            base_arity,
            progress,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleKind {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

#[derive(Debug, Clone)]
pub struct TransformedRule {
    pub lhs: Term,
    pub rhs: Term,
    pub kind: RuleKind,
    /// 1 for rules that produce the right-hand side of the original rule,
    /// 0 for administrative rules.
    pub cost: u64,
    /// Global index of the originating conditional rule.
    pub origin: usize,
}

#[derive(Debug, Clone)]
pub struct TransformedTrs {
    pub hsig: HSignature,
    pub rules: Vec<TransformedRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApMode {
    /// One rule per anti-pattern; the transformation preserves derivation
    /// heights exactly.
    Full,
    /// Anti-patterns collapsed to a fresh variable; smaller system, still an
    /// upper bound.
    Var,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Star {
    Top,
    Bot,
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("transformation requires a strong system; validation reported:\n{0}")]
    StrongRequired(ValidationReport),
    #[error("symbol name {0} collides with generated names (top, bot, or '#')")]
    ReservedName(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ApError {
    #[error("anti-patterns are only defined for constructor terms")]
    NotConstructor,
    #[error("anti-patterns are only defined for linear terms")]
    NotLinear,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ZetaError {
    #[error("not a proper term")]
    NotProper,
}

/// Syntactic classification of a term over the transformed signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HTermClass {
    pub proper: bool,
    pub bot_pattern: bool,
    pub top_term: bool,
}

/// Pads every defined symbol with `m_f` copies of the star constant.
pub fn xi(sys: &Cctrs, hsig: &HSignature, t: &Term, star: Star) -> Term {
    let flag = match star {
        Star::Top => hsig.top,
        Star::Bot => hsig.bot,
    };
    fn go(sys: &Cctrs, t: &Term, flag: Symbol) -> Term {
        match t {
            Term::Var(x) => Term::Var(x.clone()),
            Term::App(f, args) => {
                let mut new_args: Vec<Term> = args.iter().map(|a| go(sys, a, flag)).collect();
                if sys.sig.kind(*f) == SymbolKind::Defined {
                    for _ in 0..sys.rule_count_for(*f) {
                        new_args.push(Term::constant(flag));
                    }
                }
                Term::App(*f, new_args)
            }
        }
    }
    go(sys, t, flag)
}

/// The anti-patterns of a linear constructor term: a finite set of
/// bot-patterns covering every bot-pattern that does not unify with it.
pub fn anti_patterns(sys: &Cctrs, hsig: &HSignature, t: &Term) -> Result<Vec<Term>, ApError> {
    if !sys.is_constructor_term(t) {
        return Err(ApError::NotConstructor);
    }
    if !t.is_linear() {
        return Err(ApError::NotLinear);
    }
    let mut fresh = FreshVars::new();
    Ok(anti_patterns_with(sys, hsig, t, &mut fresh))
}

fn anti_patterns_with(
    sys: &Cctrs,
    hsig: &HSignature,
    t: &Term,
    fresh: &mut FreshVars,
) -> Vec<Term> {
    let Term::App(root, targs) = t else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for g in sys.sig.symbols() {
        if sys.sig.kind(g) == SymbolKind::Constructor && g != *root {
            let args = (0..sys.sig.arity(g))
                .map(|_| Term::Var(fresh.fresh()))
                .collect();
            out.push(Term::App(g, args));
        }
    }
    for g in sys.defined_symbols() {
        let n = sys.sig.arity(g);
        let m = sys.rule_count_for(g);
        let mut args: Vec<Term> = (0..n).map(|_| Term::Var(fresh.fresh())).collect();
        args.extend((0..m).map(|_| Term::constant(hsig.bot)));
        out.push(Term::App(g, args));
    }
    for (i, ti) in targs.iter().enumerate() {
        for u in anti_patterns_with(sys, hsig, ti, fresh) {
            let mut args: Vec<Term> = Vec::with_capacity(targs.len());
            for (j, _) in targs.iter().enumerate() {
                if j == i {
                    args.push(u.clone());
                } else {
                    args.push(Term::Var(fresh.fresh()));
                }
            }
            out.push(Term::App(*root, args));
        }
    }
    out
}

/// Deterministic per-rule variable source that avoids the user's names.
struct RuleVars<'a> {
    taken: &'a BTreeSet<Var>,
    next: usize,
}

impl RuleVars<'_> {
    fn fresh(&mut self) -> Var {
        loop {
            self.next += 1;
            let v = Var::new(&format!("x{}", self.next));
            if !self.taken.contains(&v) {
                return v;
            }
        }
    }
}

#[allow(clippy::only_used_in_recursion)]
fn rename_ap_vars(pattern: &Term, vars: &mut RuleVars<'_>) -> Term {
    let mut map: BTreeMap<Var, Var> = BTreeMap::new();
    fn go(t: &Term, map: &mut BTreeMap<Var, Var>, vars: &mut RuleVars<'_>) -> Term {
        match t {
            Term::Var(x) => {
                let v = map.entry(x.clone()).or_insert_with(|| vars.fresh());
                Term::Var(v.clone())
            }
            Term::App(f, args) => {
                Term::App(*f, args.iter().map(|a| go(a, map, vars)).collect())
            }
        }
    }
    go(pattern, &mut map, vars)
}

/// Transforms a strong system. Rule order: originating rules in file order;
/// within one rule by kind, then condition index, then anti-pattern order.
pub fn transform(sys: &Cctrs, ap_mode: ApMode) -> Result<TransformedTrs, TransformError> {
    if !sys.strong {
        // revalidate to produce a helpful report
        let raw = crate::cctrs::RawSystem {
            sig: sys.sig.clone(),
            vars: sys.declared_vars.clone(),
            rules: sys.rules.clone(),
            arity_clashes: Vec::new(),
        };
        let report = crate::cctrs::validate(&raw, crate::cctrs::ValidateMode::Strong);
        return Err(TransformError::StrongRequired(report));
    }
    let hsig = HSignature::build(sys)?;
    let all_user_vars: BTreeSet<Var> = sys.declared_vars.clone();
    let mut rules: Vec<TransformedRule> = Vec::new();

    for (gid, rule) in sys.rules.iter().enumerate() {
        let f = rule.root().expect("validated");
        let n = sys.sig.arity(f);
        let m = sys.rule_count_for(f);
        let i = rule.local_index;
        let k = rule.conditions.len();
        let mut vars = RuleVars {
            taken: &all_user_vars,
            next: 0,
        };
        let xflags: Vec<Term> = (0..m).map(|_| Term::Var(vars.fresh())).collect();
        let largs: Vec<Term> = rule.lhs_args().to_vec();
        let slots = |replacement: Vec<Term>| -> Vec<Term> {
            let mut out = Vec::with_capacity(m - 1 + replacement.len());
            out.extend(xflags[..i - 1].iter().cloned());
            out.extend(replacement);
            out.extend(xflags[i..].iter().cloned());
            out
        };
        let widened = |args: &[Term], slot_terms: Vec<Term>| -> Term {
            let mut all = args.to_vec();
            all.extend(slot_terms);
            Term::App(f, all)
        };
        let progress = |j: usize, args: &[Term], slot_terms: Vec<Term>| -> Term {
            let sym = hsig.progress_symbol(f, i, j).expect("progress symbol");
            let mut all = args.to_vec();
            all.extend(slot_terms);
            Term::App(sym, all)
        };
        let top = Term::constant(hsig.top);
        let bot = Term::constant(hsig.bot);

        if k == 0 {
            rules.push(TransformedRule {
                lhs: widened(&largs, slots(vec![top.clone()])),
                rhs: xi(sys, &hsig, &rule.rhs, Star::Top),
                kind: RuleKind::R1,
                cost: 1,
                origin: gid,
            });
        } else {
            let a1 = xi(sys, &hsig, &rule.conditions[0].0, Star::Top);
            rules.push(TransformedRule {
                lhs: widened(&largs, slots(vec![top.clone()])),
                rhs: progress(1, &largs, slots(vec![a1])),
                kind: RuleKind::R2,
                cost: 0,
                origin: gid,
            });
            let bs: Vec<Term> = rule.conditions.iter().map(|(_, b)| b.clone()).collect();
            rules.push(TransformedRule {
                lhs: progress(k, &largs, slots(bs.clone())),
                rhs: xi(sys, &hsig, &rule.rhs, Star::Top),
                kind: RuleKind::R3,
                cost: 1,
                origin: gid,
            });
            for j in 1..k {
                let mut with_next = bs[..j].to_vec();
                with_next.push(xi(sys, &hsig, &rule.conditions[j].0, Star::Top));
                rules.push(TransformedRule {
                    lhs: progress(j, &largs, slots(bs[..j].to_vec())),
                    rhs: progress(j + 1, &largs, slots(with_next)),
                    kind: RuleKind::R4,
                    cost: 0,
                    origin: gid,
                });
            }
            for j in 1..=k {
                let b = &rule.conditions[j - 1].1;
                let candidates: Vec<Term> = match ap_mode {
                    ApMode::Full => {
                        let mut fresh = FreshVars::new();
                        anti_patterns_with(sys, &hsig, b, &mut fresh)
                            .into_iter()
                            .map(|p| rename_ap_vars(&p, &mut vars))
                            .collect()
                    }
                    ApMode::Var => {
                        if matches!(b, Term::Var(_)) {
                            Vec::new()
                        } else {
                            vec![Term::Var(vars.fresh())]
                        }
                    }
                };
                for v in candidates {
                    let mut slot_terms = bs[..j - 1].to_vec();
                    slot_terms.push(v);
                    rules.push(TransformedRule {
                        lhs: progress(j, &largs, slots(slot_terms)),
                        rhs: widened(&largs, slots(vec![bot.clone()])),
                        kind: RuleKind::R5,
                        cost: 0,
                        origin: gid,
                    });
                }
            }
        }
        // retire the rule when an argument can never match
        let yargs: Vec<Term> = (0..n).map(|_| Term::Var(vars.fresh())).collect();
        for (j, lj) in largs.iter().enumerate() {
            let candidates: Vec<Term> = match ap_mode {
                ApMode::Full => {
                    let mut fresh = FreshVars::new();
                    anti_patterns_with(sys, &hsig, lj, &mut fresh)
                        .into_iter()
                        .map(|p| rename_ap_vars(&p, &mut vars))
                        .collect()
                }
                ApMode::Var => {
                    if matches!(lj, Term::Var(_)) {
                        Vec::new()
                    } else {
                        vec![Term::Var(vars.fresh())]
                    }
                }
            };
            for v in candidates {
                let mut args = yargs.clone();
                args[j] = v;
                rules.push(TransformedRule {
                    lhs: widened(&args, slots(vec![top.clone()])),
                    rhs: widened(&args, slots(vec![bot.clone()])),
                    kind: RuleKind::R6,
                    cost: 0,
                    origin: gid,
                });
            }
        }
    }
    Ok(TransformedTrs { hsig, rules })
}

/// Encodes a labeled term: labels become top/bot flag arguments.
pub fn zeta(sys: &Cctrs, hsig: &HSignature, t: &LabeledTerm) -> Term {
    match t {
        LabeledTerm::Var(x) => Term::Var(x.clone()),
        LabeledTerm::Cons(f, args) => {
            Term::App(*f, args.iter().map(|a| zeta(sys, hsig, a)).collect())
        }
        LabeledTerm::Def(f, l, args) => {
            let mut new_args: Vec<Term> = args.iter().map(|a| zeta(sys, hsig, a)).collect();
            for local in 0..sys.rule_count_for(*f) {
                new_args.push(Term::constant(if l.contains(local) {
                    hsig.top
                } else {
                    hsig.bot
                }));
            }
            Term::App(*f, new_args)
        }
    }
}

/// Decodes a proper term back into a labeled term.
pub fn zeta_inv(sys: &Cctrs, hsig: &HSignature, t: &Term) -> Result<LabeledTerm, ZetaError> {
    match t {
        Term::Var(x) => Ok(LabeledTerm::Var(x.clone())),
        Term::App(f, args) => {
            if f.index() >= hsig.base_len() || hsig.is_flag(*f) {
                return Err(ZetaError::NotProper);
            }
            match sys.sig.kind(*f) {
                SymbolKind::Constructor => {
                    let inner = args
                        .iter()
                        .map(|a| zeta_inv(sys, hsig, a))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(LabeledTerm::Cons(*f, inner))
                }
                SymbolKind::Defined => {
                    let n = sys.sig.arity(*f);
                    let m = sys.rule_count_for(*f);
                    if args.len() != n + m {
                        return Err(ZetaError::NotProper);
                    }
                    let mut label = Label::empty();
                    for (local, flag) in args[n..].iter().enumerate() {
                        match flag {
                            Term::App(c, _) if *c == hsig.top => {
                                label = Label(label.0 | (1 << local));
                            }
                            Term::App(c, _) if *c == hsig.bot => {}
                            _ => return Err(ZetaError::NotProper),
                        }
                    }
                    let inner = args[..n]
                        .iter()
                        .map(|a| zeta_inv(sys, hsig, a))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(LabeledTerm::Def(*f, label, inner))
                }
                SymbolKind::Auxiliary => Err(ZetaError::NotProper),
            }
        }
    }
}

/// Classifies a term over the transformed signature.
pub fn classify_hterm(sys: &Cctrs, hsig: &HSignature, t: &Term) -> HTermClass {
    let proper = is_proper(sys, hsig, t);
    let bot_pattern = proper && all_flags(sys, hsig, t, hsig.bot) && t.is_linear();
    let top_term = proper && all_flags(sys, hsig, t, hsig.top) && no_bare_flags_in_args(hsig, t);
    HTermClass {
        proper,
        bot_pattern,
        top_term,
    }
}

fn is_proper(sys: &Cctrs, hsig: &HSignature, t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(f, args) => {
            if f.index() >= hsig.base_len() || hsig.is_flag(*f) {
                return false;
            }
            match sys.sig.kind(*f) {
                SymbolKind::Constructor => args.iter().all(|a| is_proper(sys, hsig, a)),
                SymbolKind::Defined => {
                    let n = sys.sig.arity(*f);
                    args.len() == n + sys.rule_count_for(*f)
                        && args[..n].iter().all(|a| is_proper(sys, hsig, a))
                        && args[n..].iter().all(|a| match a {
                            Term::App(c, _) => hsig.is_flag(*c),
                            _ => false,
                        })
                }
                SymbolKind::Auxiliary => false,
            }
        }
    }
}

fn all_flags(sys: &Cctrs, hsig: &HSignature, t: &Term, want: Symbol) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(f, args) => {
            if hsig.is_flag(*f) {
                return true;
            }
            match sys.sig.kind(*f) {
                SymbolKind::Defined => {
                    let n = sys.sig.arity(*f);
                    args[n..]
                        .iter()
                        .all(|a| matches!(a, Term::App(c, _) if *c == want))
                        && args[..n].iter().all(|a| all_flags(sys, hsig, a, want))
                }
                _ => args.iter().all(|a| all_flags(sys, hsig, a, want)),
            }
        }
    }
}

fn no_bare_flags_in_args(hsig: &HSignature, t: &Term) -> bool {
    fn go(hsig: &HSignature, t: &Term, at_flag_slot: bool) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, args) => {
                if hsig.is_flag(*f) {
                    return at_flag_slot;
                }
                let n = hsig
                    .base_arity
                    .get(f.index())
                    .copied()
                    .unwrap_or(args.len());
                args.iter()
                    .enumerate()
                    .all(|(idx, a)| go(hsig, a, idx >= n))
            }
        }
    }
    go(hsig, t, false)
}

/// Size of a term over the transformed signature: symbol occurrences not
/// counting `top`.
pub fn size_h(hsig: &HSignature, t: &Term) -> usize {
    match t {
        Term::Var(_) => 0,
        Term::App(f, args) => {
            let here = if *f == hsig.top { 0 } else { 1 };
            here + args.iter().map(|a| size_h(hsig, a)).sum::<usize>()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyMode {
    /// Emit the replacement map as a STRATEGY block.
    ContextSensitive,
    /// Plain TRS output without the replacement map.
    Plain,
}

/// Renders the transformed system in TPDB-style text. Cost-1 rules use `->`,
/// administrative rules `->=`.
pub fn emit_tpdb(trs: &TransformedTrs, strategy: StrategyMode) -> String {
    let sig = &trs.hsig.sig;
    let mut vars: Vec<Var> = Vec::new();
    let mut seen: BTreeSet<Var> = BTreeSet::new();
    let mut collect = |t: &Term| {
        fn go(t: &Term, vars: &mut Vec<Var>, seen: &mut BTreeSet<Var>) {
            match t {
                Term::Var(x) => {
                    if seen.insert(x.clone()) {
                        vars.push(x.clone());
                    }
                }
                Term::App(_, args) => args.iter().for_each(|a| go(a, vars, seen)),
            }
        }
        go(t, &mut vars, &mut seen);
    };
    for r in &trs.rules {
        collect(&r.lhs);
        collect(&r.rhs);
    }
    let mut out = String::new();
    let names: Vec<String> = vars.iter().map(|v| v.name().to_string()).collect();
    let _ = writeln!(out, "(VAR {})", names.join(" "));
    if strategy == StrategyMode::ContextSensitive {
        let _ = writeln!(out, "(STRATEGY CONTEXTSENSITIVE");
        for f in sig.symbols() {
            let mu = trs.hsig.mu_of(f);
            if mu.is_empty() {
                let _ = writeln!(out, "  ({})", sig.name(f));
            } else {
                let idx: Vec<String> = mu.iter().map(|i| i.to_string()).collect();
                let _ = writeln!(out, "  ({} {})", sig.name(f), idx.join(" "));
            }
        }
        let _ = writeln!(out, ")");
    }
    let _ = writeln!(out, "(RULES");
    for r in &trs.rules {
        let arrow = if r.cost == 1 { "->" } else { "->=" };
        let _ = writeln!(
            out,
            "  {} {} {}",
            r.lhs.display(sig),
            arrow,
            r.rhs.display(sig)
        );
    }
    let _ = writeln!(out, ")");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cctrs::ValidateMode;
    use crate::fixtures::{EVEN, FG, FIB, LOOP};
    use crate::labeled::{enumerate_ground_labeled, label};
    use crate::term::unify;

    fn sys(text: &str) -> Cctrs {
        Cctrs::parse(text, ValidateMode::Strong).unwrap()
    }

    fn names(sys: &Cctrs, hsig: &HSignature, ts: &[Term]) -> BTreeSet<String> {
        // normalize variables away for set comparison up to renaming
        let _ = sys;
        ts.iter()
            .map(|t| {
                let mut counter = 0usize;
                let mut map: BTreeMap<Var, String> = BTreeMap::new();
                fn go(
                    t: &Term,
                    sig: &Signature,
                    counter: &mut usize,
                    map: &mut BTreeMap<Var, String>,
                ) -> String {
                    match t {
                        Term::Var(x) => map
                            .entry(x.clone())
                            .or_insert_with(|| {
                                *counter += 1;
                                format!("_{counter}")
                            })
                            .clone(),
                        Term::App(f, args) => {
                            let inner: Vec<String> =
                                args.iter().map(|a| go(a, sig, counter, map)).collect();
                            if inner.is_empty() {
                                sig.name(*f).to_string()
                            } else {
                                format!("{}({})", sig.name(*f), inner.join(","))
                            }
                        }
                    }
                }
                go(t, &hsig.sig, &mut counter, &mut map)
            })
            .collect()
    }

    #[test]
    fn xi_pads_defined_symbols() {
        let sys = sys(FIB);
        let hsig = HSignature::build(&sys).unwrap();
        let t = sys.parse_term("fib(x)").unwrap();
        let padded = xi(&sys, &hsig, &t, Star::Top);
        match &padded {
            Term::App(f, args) => {
                assert_eq!(hsig.sig.name(*f), "fib");
                assert_eq!(args.len(), 3);
                assert_eq!(args[1], Term::constant(hsig.top));
                assert_eq!(args[2], Term::constant(hsig.top));
            }
            _ => panic!(),
        }
        // constructor terms are untouched
        let c = sys.parse_term("s(0)").unwrap();
        assert_eq!(xi(&sys, &hsig, &c, Star::Bot), c);
    }

    #[test]
    fn anti_patterns_of_pair() {
        let sys = sys(FIB);
        let hsig = HSignature::build(&sys).unwrap();
        let t = sys.parse_term("pair(z, w)").unwrap();
        let aps = anti_patterns(&sys, &hsig, &t).unwrap();
        let got = names(&sys, &hsig, &aps);
        let want: BTreeSet<String> = [
            "0",
            "s(_1)",
            "plus(_1,_2,bot,bot)",
            "fib(_1,bot,bot)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(got, want);
        // variables have no anti-patterns
        let x = sys.parse_term("x").unwrap();
        assert!(anti_patterns(&sys, &hsig, &x).unwrap().is_empty());
    }

    #[test]
    fn anti_patterns_of_true_over_even() {
        let sys = sys(EVEN);
        let hsig = HSignature::build(&sys).unwrap();
        let t = sys.parse_term("true").unwrap();
        let aps = anti_patterns(&sys, &hsig, &t).unwrap();
        let got = names(&sys, &hsig, &aps);
        let want: BTreeSet<String> = [
            "false",
            "0",
            "s(_1)",
            "even(_1,bot,bot,bot)",
            "odd(_1,bot,bot,bot)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn anti_patterns_reject_nonconstructor_and_nonlinear() {
        let sys = sys(EVEN);
        let hsig = HSignature::build(&sys).unwrap();
        let t = sys.parse_term("even(0)").unwrap();
        assert_eq!(
            anti_patterns(&sys, &hsig, &t).unwrap_err(),
            ApError::NotConstructor
        );
        let raw = crate::cctrs::parse_cctrs("(VAR x)\n(RULES h(pair(x,x)) -> x)").unwrap();
        let sys2 = Cctrs::from_raw(raw, ValidateMode::Cctrs).unwrap();
        let hsig2 = HSignature::build(&sys2).unwrap();
        let nl = sys2.parse_term("pair(x, x)").unwrap();
        assert_eq!(
            anti_patterns(&sys2, &hsig2, &nl).unwrap_err(),
            ApError::NotLinear
        );
    }

    #[test]
    fn transform_even_rule_inventory() {
        let sys = sys(EVEN);
        let trs = transform(&sys, ApMode::Full).unwrap();
        assert_eq!(trs.rules.len(), 60);
        let by_kind = |k: RuleKind| trs.rules.iter().filter(|r| r.kind == k).count();
        assert_eq!(by_kind(RuleKind::R1), 2);
        assert_eq!(by_kind(RuleKind::R2), 4);
        assert_eq!(by_kind(RuleKind::R3), 4);
        assert_eq!(by_kind(RuleKind::R4), 0);
        assert_eq!(by_kind(RuleKind::R5), 20);
        assert_eq!(by_kind(RuleKind::R6), 30);
        // cost 1 exactly for the rules producing an original right-hand side
        assert_eq!(trs.rules.iter().filter(|r| r.cost == 1).count(), 6);
        assert!(trs
            .rules
            .iter()
            .all(|r| (r.cost == 1) == matches!(r.kind, RuleKind::R1 | RuleKind::R3)));
        // the non-anti-pattern rules
        assert_eq!(
            trs.rules
                .iter()
                .filter(|r| matches!(r.kind, RuleKind::R1 | RuleKind::R2 | RuleKind::R3))
                .count(),
            10
        );
    }

    #[test]
    fn transform_even_replacement_map() {
        let sys = sys(EVEN);
        let trs = transform(&sys, ApMode::Full).unwrap();
        let hsig = &trs.hsig;
        let get = |name: &str| hsig.mu_of(hsig.sig.lookup(name).unwrap()).clone();
        assert_eq!(get("even"), [1].into());
        assert_eq!(get("odd"), [1].into());
        assert_eq!(get("even#2#1"), [3].into());
        assert_eq!(get("odd#2#1"), [3].into());
        assert_eq!(get("even#3#1"), [4].into());
        assert_eq!(get("odd#3#1"), [4].into());
        assert_eq!(get("s"), [1].into());
        assert_eq!(get("0"), BTreeSet::new());
        assert_eq!(get("true"), BTreeSet::new());
        assert_eq!(get("top"), BTreeSet::new());
    }

    #[test]
    fn transform_fg_and_fib_counts() {
        let fg = sys(FG);
        let trs = transform(&fg, ApMode::Full).unwrap();
        assert_eq!(trs.rules.len(), 6);
        assert_eq!(trs.rules.iter().filter(|r| r.cost == 1).count(), 2);
        assert_eq!(
            trs.rules.iter().filter(|r| r.kind == RuleKind::R5).count(),
            3
        );
        let fib = sys(FIB);
        let trs = transform(&fib, ApMode::Full).unwrap();
        assert_eq!(trs.rules.len(), 26);
        assert_eq!(trs.rules.iter().filter(|r| r.cost == 1).count(), 4);
        assert_eq!(
            trs.rules.iter().filter(|r| r.kind == RuleKind::R4).count(),
            1
        );
    }

    #[test]
    fn generated_anti_pattern_variables_are_disjoint() {
        for text in [EVEN, FIB] {
            let sys = sys(text);
            let trs = transform(&sys, ApMode::Full).unwrap();
            for r in &trs.rules {
                assert!(r.lhs.is_linear(), "non-left-linear generated rule");
                assert!(r.rhs.vars().is_subset(&r.lhs.vars()));
            }
        }
    }

    #[test]
    fn transform_is_deterministic() {
        let sys = sys(EVEN);
        let a = emit_tpdb(&transform(&sys, ApMode::Full).unwrap(), StrategyMode::ContextSensitive);
        let b = emit_tpdb(&transform(&sys, ApMode::Full).unwrap(), StrategyMode::ContextSensitive);
        assert_eq!(a, b);
        assert!(a.contains("(STRATEGY CONTEXTSENSITIVE"));
        assert!(a.contains("->="));
        let plain = emit_tpdb(&transform(&sys, ApMode::Full).unwrap(), StrategyMode::Plain);
        assert!(!plain.contains("STRATEGY"));
    }

    #[test]
    fn var_mode_shrinks_the_system() {
        let sys = sys(EVEN);
        let full = transform(&sys, ApMode::Full).unwrap();
        let smaller = transform(&sys, ApMode::Var).unwrap();
        assert!(smaller.rules.len() < full.rules.len());
        // one rule per anti-pattern family instead of five
        assert_eq!(smaller.rules.len(), 10 + 4 + 6);
        assert_eq!(smaller.rules.iter().filter(|r| r.cost == 1).count(), 6);
    }

    #[test]
    fn transform_requires_strong_systems() {
        let raw = crate::cctrs::parse_cctrs("(VAR x)\n(RULES f(x, x) -> x)").unwrap();
        let sys = Cctrs::from_raw(raw, ValidateMode::Cctrs).unwrap();
        assert!(matches!(
            transform(&sys, ApMode::Full),
            Err(TransformError::StrongRequired(_))
        ));
    }

    #[test]
    fn reserved_names_are_rejected() {
        let raw = crate::cctrs::parse_cctrs("(VAR x)\n(RULES top(x) -> x)").unwrap();
        let sys = Cctrs::from_raw(raw, ValidateMode::Strong).unwrap();
        assert!(matches!(
            transform(&sys, ApMode::Full),
            Err(TransformError::ReservedName(_))
        ));
    }

    #[test]
    fn zeta_of_labeled_term_is_the_top_padding() {
        let sys = sys(EVEN);
        let hsig = HSignature::build(&sys).unwrap();
        let t = sys.parse_term("even(s(0))").unwrap();
        assert_eq!(
            zeta(&sys, &hsig, &label(&sys, &t)),
            xi(&sys, &hsig, &t, Star::Top)
        );
    }

    #[test]
    fn zeta_roundtrips_on_enumerated_labeled_terms() {
        for text in [EVEN, FG] {
            let sys = sys(text);
            let hsig = HSignature::build(&sys).unwrap();
            for lt in enumerate_ground_labeled(&sys, 4) {
                let encoded = zeta(&sys, &hsig, &lt);
                let class = classify_hterm(&sys, &hsig, &encoded);
                assert!(class.proper);
                assert_eq!(zeta_inv(&sys, &hsig, &encoded).unwrap(), lt);
                assert_eq!(zeta(&sys, &hsig, &zeta_inv(&sys, &hsig, &encoded).unwrap()), encoded);
                // linear labeled normal forms encode as bot-patterns
                if crate::labeled::is_labeled_nf(&lt) {
                    assert!(class.bot_pattern);
                }
            }
        }
    }

    #[test]
    fn zeta_inv_rejects_improper_terms() {
        let sys = sys(LOOP);
        let trs = transform(&sys, ApMode::Full).unwrap();
        let hsig = &trs.hsig;
        let a = hsig.sig.lookup("a").unwrap();
        let prog = hsig.sig.lookup("a#1#1").unwrap();
        let improper = Term::App(prog, vec![Term::App(a, vec![Term::constant(hsig.top)])]);
        assert_eq!(zeta_inv(&sys, hsig, &improper).unwrap_err(), ZetaError::NotProper);
    }

    #[test]
    fn classification_examples() {
        let sys = sys(EVEN);
        let trs = transform(&sys, ApMode::Full).unwrap();
        let hsig = &trs.hsig;
        let even = hsig.sig.lookup("even").unwrap();
        let zero = Term::constant(hsig.sig.lookup("0").unwrap());
        let bot = Term::constant(hsig.bot);
        let top = Term::constant(hsig.top);
        let all_bot = Term::App(even, vec![zero.clone(), bot.clone(), bot.clone(), bot.clone()]);
        let c = classify_hterm(&sys, hsig, &all_bot);
        assert!(c.proper && c.bot_pattern && !c.top_term);
        // progress-symbol roots are none of the three
        let prog = hsig.sig.lookup("even#2#1").unwrap();
        let s = hsig.sig.lookup("s").unwrap();
        let tr = Term::constant(hsig.sig.lookup("true").unwrap());
        let t = Term::App(
            prog,
            vec![
                Term::App(s, vec![Term::Var(Var::new("x"))]),
                Term::Var(Var::new("y")),
                tr,
                Term::Var(Var::new("z")),
            ],
        );
        let c = classify_hterm(&sys, hsig, &t);
        assert!(!c.proper && !c.bot_pattern && !c.top_term);
        // top paddings are proper top-terms
        let f = sys.parse_term("even(s(even(0)))").unwrap();
        let padded = xi(&sys, hsig, &f, Star::Top);
        let c = classify_hterm(&sys, hsig, &padded);
        assert!(c.proper && c.top_term && !c.bot_pattern);
        // a top flag below an argument position spoils the top-term property
        let bad = Term::App(even, vec![top.clone(), top.clone(), top.clone(), top]);
        assert!(!classify_hterm(&sys, hsig, &bad).top_term);
    }

    #[test]
    fn size_ignores_top_flags() {
        let sys = sys(EVEN);
        let hsig = HSignature::build(&sys).unwrap();
        for t in crate::labeled::enumerate_ground_terms(&sys, 4, false) {
            assert_eq!(t.size(), size_h(&hsig, &xi(&sys, &hsig, &t, Star::Top)));
        }
    }

    /// Exhaustive check on small terms: a bot-pattern that does not unify
    /// with a linear constructor term instantiates one of its anti-patterns.
    #[test]
    fn anti_patterns_cover_non_unifiable_bot_patterns() {
        let sys = sys(EVEN);
        let hsig = HSignature::build(&sys).unwrap();
        // linear terms over the original signature of depth <= 2
        let mut pool: Vec<Term> = Vec::new();
        let mut counter = 0usize;
        let mut fresh = || {
            counter += 1;
            Term::Var(Var::new(&format!("v{counter}")))
        };
        let mut depth1: Vec<Term> = Vec::new();
        depth1.push(fresh());
        for f in sys.sig.symbols() {
            let args: Vec<Term> = (0..sys.sig.arity(f)).map(|_| fresh()).collect();
            depth1.push(Term::App(f, args));
        }
        pool.extend(depth1.iter().cloned());
        for f in sys.sig.symbols() {
            if sys.sig.arity(f) == 1 {
                for inner in &depth1 {
                    // keep linearity: inner pools use distinct variables already
                    pool.push(Term::App(f, vec![inner.clone()]));
                }
            }
        }
        let bot_patterns: Vec<Term> = pool
            .iter()
            .map(|t| xi(&sys, &hsig, t, Star::Bot))
            .filter(|t| t.is_linear())
            .collect();
        let constructor_terms: Vec<Term> = pool
            .iter()
            .filter(|t| sys.is_constructor_term(t) && t.is_linear())
            .cloned()
            .collect();
        let mut checked = 0usize;
        for s in &bot_patterns {
            for t in &constructor_terms {
                if !s.vars().is_disjoint(&t.vars()) {
                    continue;
                }
                if unify(s, t).is_none() {
                    let aps = anti_patterns(&sys, &hsig, t).unwrap();
                    assert!(
                        aps.iter().any(|v| crate::term::match_term(v, s).is_some()),
                        "no covering anti-pattern for {} vs {}",
                        s.display(&hsig.sig),
                        t.display(&hsig.sig)
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 100, "too few non-unifiable pairs: {checked}");
    }
}
