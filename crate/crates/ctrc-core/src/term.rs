//! First-order terms over a finite signature: positions, substitutions,
//! matching and syntactic unification.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// Interned function symbol; the id indexes into a [`Signature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Constructor,
    Defined,
    Auxiliary,
}

/// Extra information carried by generated symbols of the transformed signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoration {
    None,
    /// Condition-progress symbol `f#i#j` (rule and condition index are 1-based).
    Progress { base: Symbol, rule: usize, cond: usize },
    Top,
    Bot,
}

#[derive(Debug, Clone)]
pub struct SymbolData {
    pub name: String,
    pub arity: usize,
    pub kind: SymbolKind,
    pub decoration: Decoration,
}

/// A signature maps symbol names to arities and kinds. Names are unique.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    symbols: Vec<SymbolData>,
    by_name: HashMap<String, Symbol>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a new symbol; panics if the name is already taken.
    pub fn add(&mut self, name: &str, arity: usize, kind: SymbolKind) -> Symbol {
        self.add_decorated(name, arity, kind, Decoration::None)
    }

    pub fn add_decorated(
        &mut self,
        name: &str,
        arity: usize,
        kind: SymbolKind,
        decoration: Decoration,
    ) -> Symbol {
        assert!(
            !self.by_name.contains_key(name),
            "duplicate symbol name {name}"
        );
        let id = Symbol(self.symbols.len() as u32);
        self.symbols.push(SymbolData {
            name: name.to_string(),
            arity,
            kind,
            decoration,
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.by_name.get(name).copied()
    }

    pub fn data(&self, f: Symbol) -> &SymbolData {
        &self.symbols[f.index()]
    }

    pub fn name(&self, f: Symbol) -> &str {
        &self.symbols[f.index()].name
    }

    pub fn arity(&self, f: Symbol) -> usize {
        self.symbols[f.index()].arity
    }

    pub fn kind(&self, f: Symbol) -> SymbolKind {
        self.symbols[f.index()].kind
    }

    pub fn set_kind(&mut self, f: Symbol, kind: SymbolKind) {
        self.symbols[f.index()].kind = kind;
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.symbols.len()).map(|i| Symbol(i as u32))
    }
}

/// A variable, identified by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Generates `x#1`, `x#2`, ... — one monotone counter per operation invocation.
#[derive(Debug, Default)]
pub struct FreshVars {
    next: usize,
}

impl FreshVars {
    pub fn new() -> Self {
        Self { next: 0 }
    }

    pub fn fresh(&mut self) -> Var {
        self.next += 1;
        Var::new(&format!("x#{}", self.next))
    }
}

/// First-order term: a variable or an application with exactly `arity` arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn constant(f: Symbol) -> Term {
        Term::App(f, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Number of symbol occurrences; variables are not counted.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// True when no variable occurs twice.
    pub fn is_linear(&self) -> bool {
        fn walk(t: &Term, seen: &mut BTreeSet<Var>) -> bool {
            match t {
                Term::Var(x) => seen.insert(x.clone()),
                Term::App(_, args) => args.iter().all(|a| walk(a, seen)),
            }
        }
        walk(self, &mut BTreeSet::new())
    }

    /// All positions in prefix order, root first.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk_positions(&mut path, &mut out);
        out
    }

    fn walk_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        if let Term::App(_, args) = self {
            for (i, a) in args.iter().enumerate() {
                path.push(i + 1);
                a.walk_positions(path, out);
                path.pop();
            }
        }
    }

    pub fn at(&self, p: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &p.0 {
            match t {
                Term::App(_, args) => t = args.get(i.checked_sub(1)?)?,
                Term::Var(_) => return None,
            }
        }
        Some(t)
    }

    /// Returns a copy of `self` with the subterm at `p` replaced by `new`.
    pub fn replaced(&self, p: &Position, new: Term) -> Term {
        fn go(t: &Term, path: &[usize], new: Term) -> Term {
            match path.split_first() {
                None => new,
                Some((&i, rest)) => match t {
                    Term::App(f, args) => {
                        let mut args = args.clone();
                        args[i - 1] = go(&args[i - 1], rest, new);
                        Term::App(*f, args)
                    }
                    Term::Var(_) => panic!("position below a variable"),
                },
            }
        }
        go(self, &p.0, new)
    }

    /// True when `sub` occurs as a subterm of `self` (including `self`).
    pub fn contains(&self, sub: &Term) -> bool {
        if self == sub {
            return true;
        }
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains(sub)),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(s, args) => {
                write!(f, "{}", self.sig.name(*s))?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", a.display(self.sig))?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Position in a term: a sequence of 1-based argument indices; the empty
/// sequence is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "eps")
        } else {
            let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Finite map from variables to terms; application is capture-free.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst(BTreeMap<Var, Term>);

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Var, t: Term) -> Option<Term> {
        self.0.insert(x, t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| self.apply(a)).collect()),
        }
    }
}

/// First-order matching: returns `sigma` with `pattern * sigma == subject` and
/// `dom(sigma) ⊆ Var(pattern)`, or `None`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Subst> {
    let mut sigma = Subst::new();
    if match_into(pattern, subject, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

pub(crate) fn match_into(pattern: &Term, subject: &Term, sigma: &mut Subst) -> bool {
    match pattern {
        Term::Var(x) => match sigma.get(x) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::App(f, pargs) => match subject {
            Term::App(g, sargs) if f == g && pargs.len() == sargs.len() => pargs
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_into(p, s, sigma)),
            _ => false,
        },
    }
}

/// Syntactic unification with occurs check. Returns a most general unifier.
/// Variable disjointness of the two sides is not assumed.
pub fn unify(s: &Term, t: &Term) -> Option<Subst> {
    let mut sigma = Subst::new();
    let mut work = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = work.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if occurs(&x, &other) {
                    return None;
                }
                // Keep earlier bindings fully applied.
                let single = {
                    let mut s = Subst::new();
                    s.insert(x.clone(), other.clone());
                    s
                };
                let keys: Vec<Var> = sigma.0.keys().cloned().collect();
                for k in keys {
                    let v = sigma.0.get(&k).unwrap().clone();
                    sigma.0.insert(k, single.apply(&v));
                }
                sigma.insert(x, other);
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return None;
                }
                for (x, y) in fa.into_iter().zip(ga) {
                    work.push((x, y));
                }
            }
        }
    }
    Some(sigma)
}

fn occurs(x: &Var, t: &Term) -> bool {
    match t {
        Term::Var(y) => x == y,
        Term::App(_, args) => args.iter().any(|a| occurs(x, a)),
    }
}
