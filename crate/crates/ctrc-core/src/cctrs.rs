//! Conditional rewrite systems: parsing the oriented CTRS text format,
//! validating the constructor/variable restrictions, and the system type
//! shared by every engine.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::term::{Signature, Subst, Symbol, SymbolKind, Term, Var};

/// A conditional rule `lhs -> rhs | a1 == b1, ..., ak == bk`.
#[derive(Debug, Clone)]
pub struct ConditionalRule {
    pub lhs: Term,
    pub rhs: Term,
    /// Oriented conditions, evaluated left to right.
    pub conditions: Vec<(Term, Term)>,
    /// 1-based index of this rule among the rules defining the same symbol.
    pub local_index: usize,
}

impl ConditionalRule {
    pub fn root(&self) -> Option<Symbol> {
        match &self.lhs {
            Term::App(f, _) => Some(*f),
            Term::Var(_) => None,
        }
    }

    pub fn lhs_args(&self) -> &[Term] {
        match &self.lhs {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }
}

/// A validated conditional constructor system.
#[derive(Debug, Clone)]
pub struct Cctrs {
    pub sig: Signature,
    pub rules: Vec<ConditionalRule>,
    /// Global rule ids per defined symbol, in file order.
    per_symbol: HashMap<Symbol, Vec<usize>>,
    pub strong: bool,
    /// Variables declared in the input file.
    pub declared_vars: BTreeSet<Var>,
}

impl Cctrs {
    /// Rules defining `f`, as global indices in file order.
    pub fn rules_for(&self, f: Symbol) -> &[usize] {
        self.per_symbol.get(&f).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rule_count_for(&self, f: Symbol) -> usize {
        self.rules_for(f).len()
    }

    pub fn is_defined(&self, f: Symbol) -> bool {
        self.sig.kind(f) == SymbolKind::Defined
    }

    /// Global rule id of the `local`-th (0-based) rule defining `f`.
    pub fn rule_id(&self, f: Symbol, local: usize) -> usize {
        self.rules_for(f)[local]
    }

    pub fn constructors(&self) -> Vec<Symbol> {
        self.sig
            .symbols()
            .filter(|&f| self.sig.kind(f) == SymbolKind::Constructor)
            .collect()
    }

    pub fn defined_symbols(&self) -> Vec<Symbol> {
        self.sig
            .symbols()
            .filter(|&f| self.sig.kind(f) == SymbolKind::Defined)
            .collect()
    }

    /// True when `t` consists of constructor symbols and variables only.
    pub fn is_constructor_term(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, args) => {
                self.sig.kind(*f) == SymbolKind::Constructor
                    && args.iter().all(|a| self.is_constructor_term(a))
            }
        }
    }

    /// True when `t` is a defined symbol applied to constructor terms.
    pub fn is_basic(&self, t: &Term) -> bool {
        match t {
            Term::App(f, args) => {
                self.is_defined(*f) && args.iter().all(|a| self.is_constructor_term(a))
            }
            Term::Var(_) => false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("symbol {symbol} used with {got} arguments, expected {expected}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("variable name {0} contains '#', which is reserved for generated names")]
    ReservedVariable(String),
}

/// A parsed but not yet validated system.
#[derive(Debug, Clone)]
pub struct RawSystem {
    pub sig: Signature,
    pub vars: BTreeSet<Var>,
    pub rules: Vec<ConditionalRule>,
    /// (symbol name, first-seen arity, clashing arity) per extra use.
    pub arity_clashes: Vec<(String, usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidateMode {
    Cctrs,
    Strong,
}

/// One violated restriction, with the rule (0-based) it occurred in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Option<usize>,
    pub restriction: Restriction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Restriction {
    ArityClash {
        symbol: String,
        expected: usize,
        got: usize,
    },
    LhsIsVariable,
    /// A defined symbol occurs below the root of the left-hand side.
    LhsArgNotConstructor {
        symbol: String,
    },
    /// A defined symbol occurs in the right-hand side of condition `cond` (1-based).
    CondRhsNotConstructor {
        cond: usize,
        symbol: String,
    },
    /// `var` is shared between `b_i` and `b_j` (0 stands for the lhs).
    SharedCondVariable {
        i: usize,
        j: usize,
        var: String,
    },
    RhsExtraVariable {
        var: String,
    },
    /// `Var(a_cond)` is not covered by the lhs and earlier condition rhss.
    CondLhsExtraVariable {
        cond: usize,
        var: String,
    },
    NonLinearLhs {
        var: String,
    },
    NonLinearCondRhs {
        cond: usize,
        var: String,
    },
    /// More rules for one symbol than the engines support.
    TooManyRules {
        symbol: String,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.rule {
            write!(f, "rule {}: ", r + 1)?;
        }
        match &self.restriction {
            Restriction::ArityClash {
                symbol,
                expected,
                got,
            } => write!(
                f,
                "arity clash: {symbol} used with {got} arguments, expected {expected}"
            ),
            Restriction::LhsIsVariable => write!(f, "left-hand side is a variable"),
            Restriction::LhsArgNotConstructor { symbol } => write!(
                f,
                "defined symbol {symbol} below the root of the left-hand side"
            ),
            Restriction::CondRhsNotConstructor { cond, symbol } => write!(
                f,
                "defined symbol {symbol} in the right-hand side of condition {cond}"
            ),
            Restriction::SharedCondVariable { i, j, var } => {
                let part = |k: usize| {
                    if k == 0 {
                        "the left-hand side".to_string()
                    } else {
                        format!("condition {k}")
                    }
                };
                write!(f, "variable {var} shared between {} and {}", part(*i), part(*j))
            }
            Restriction::RhsExtraVariable { var } => {
                write!(f, "Var(r) not within Var(l, b1..bk): variable {var}")
            }
            Restriction::CondLhsExtraVariable { cond, var } => write!(
                f,
                "Var(a_{cond}) not within Var(l, b1..b{}): variable {var}",
                cond - 1
            ),
            Restriction::NonLinearLhs { var } => write!(f, "non-linear lhs at {var}"),
            Restriction::NonLinearCondRhs { cond, var } => {
                write!(f, "non-linear condition rhs b{cond} at {var}")
            }
            Restriction::TooManyRules { symbol, count } => {
                write!(f, "{count} rules for {symbol} exceed the supported maximum of 30")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Tokenizer and parser for the oriented CTRS format:
//   (CONDITIONTYPE ORIENTED)          optional
//   (VAR x y ...)
//   (RULES  l -> r | a1 == b1, a2 == b2  ... )
// `;` starts a comment running to the end of the line.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LPar,
    RPar,
    Comma,
    Pipe,
    Arrow,
    CondEq,
    Ident(String),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let line = match line.find(';') {
            Some(i) => &line[..i],
            None => line,
        };
        let mut rest = line;
        while !rest.is_empty() {
            let c = rest.chars().next().unwrap();
            if c.is_whitespace() {
                rest = &rest[c.len_utf8()..];
                continue;
            }
            let tok = match c {
                '(' => Some((Tok::LPar, 1)),
                ')' => Some((Tok::RPar, 1)),
                ',' => Some((Tok::Comma, 1)),
                '|' => Some((Tok::Pipe, 1)),
                _ => None,
            };
            if let Some((t, n)) = tok {
                out.push((t, lno + 1));
                rest = &rest[n..];
                continue;
            }
            if let Some(stripped) = rest.strip_prefix("->") {
                out.push((Tok::Arrow, lno + 1));
                rest = stripped;
                continue;
            }
            if let Some(stripped) = rest.strip_prefix("==") {
                out.push((Tok::CondEq, lno + 1));
                rest = stripped;
                continue;
            }
            // identifier: maximal run up to a delimiter
            let end = rest
                .char_indices()
                .find(|&(i, ch)| {
                    ch.is_whitespace()
                        || matches!(ch, '(' | ')' | ',' | '|' | ';')
                        || rest[i..].starts_with("->")
                        || rest[i..].starts_with("==")
                })
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            if end == 0 {
                return Err(ParseError::Syntax {
                    line: lno + 1,
                    msg: format!("unexpected character {c:?}"),
                });
            }
            out.push((Tok::Ident(rest[..end].to_string()), lno + 1));
            rest = &rest[end..];
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: Signature,
    vars: BTreeSet<Var>,
    arity_clashes: Vec<(String, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|(_, l)| *l)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let line = self.line();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            got => Err(ParseError::Syntax {
                line,
                msg: format!("expected {tok:?}, got {got:?}"),
            }),
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line(),
            msg: msg.into(),
        }
    }

    fn symbol(&mut self, name: &str, arity: usize) -> Symbol {
        match self.sig.lookup(name) {
            Some(f) => {
                let expected = self.sig.arity(f);
                if expected != arity {
                    self.arity_clashes
                        .push((name.to_string(), expected, arity));
                }
                f
            }
            None => self.sig.add(name, arity, SymbolKind::Constructor),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let line = self.line();
        let name = match self.next() {
            Some(Tok::Ident(s)) => s,
            got => {
                return Err(ParseError::Syntax {
                    line,
                    msg: format!("expected a term, got {got:?}"),
                })
            }
        };
        if self.peek() == Some(&Tok::LPar) {
            self.next();
            let mut args = Vec::new();
            if self.peek() == Some(&Tok::RPar) {
                self.next();
            } else {
                loop {
                    args.push(self.term()?);
                    match self.next() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RPar) => break,
                        got => {
                            return Err(ParseError::Syntax {
                                line,
                                msg: format!("expected ',' or ')', got {got:?}"),
                            })
                        }
                    }
                }
            }
            if self.vars.contains(&Var::new(&name)) {
                return Err(ParseError::Syntax {
                    line,
                    msg: format!("variable {name} applied to arguments"),
                });
            }
            let f = self.symbol(&name, args.len());
            Ok(Term::App(f, args))
        } else if self.vars.contains(&Var::new(&name)) {
            Ok(Term::Var(Var::new(&name)))
        } else {
            let f = self.symbol(&name, 0);
            Ok(Term::constant(f))
        }
    }

    fn rule(&mut self) -> Result<ConditionalRule, ParseError> {
        let lhs = self.term()?;
        self.expect(Tok::Arrow)?;
        let rhs = self.term()?;
        let mut conditions = Vec::new();
        if self.peek() == Some(&Tok::Pipe) {
            self.next();
            loop {
                let a = self.term()?;
                self.expect(Tok::CondEq)?;
                let b = self.term()?;
                conditions.push((a, b));
                if self.peek() == Some(&Tok::Comma) {
                    self.next();
                } else {
                    break;
                }
            }
        }
        Ok(ConditionalRule {
            lhs,
            rhs,
            conditions,
            local_index: 0,
        })
    }
}

/// Parses the oriented CTRS format. Symbol kinds and local rule indices are
/// settled here; restriction checking is done by [`validate`].
pub fn parse_cctrs(text: &str) -> Result<RawSystem, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        sig: Signature::new(),
        vars: BTreeSet::new(),
        arity_clashes: Vec::new(),
    };
    let mut rules = Vec::new();
    while p.peek().is_some() {
        p.expect(Tok::LPar)?;
        let head = match p.next() {
            Some(Tok::Ident(s)) => s,
            got => return Err(p.err(format!("expected a block name, got {got:?}"))),
        };
        match head.as_str() {
            "VAR" => {
                while let Some(Tok::Ident(_)) = p.peek() {
                    if let Some(Tok::Ident(name)) = p.next() {
                        if name.contains('#') {
                            return Err(ParseError::ReservedVariable(name));
                        }
                        p.vars.insert(Var::new(&name));
                    }
                }
                p.expect(Tok::RPar)?;
            }
            "RULES" => {
                while p.peek() != Some(&Tok::RPar) {
                    if p.peek().is_none() {
                        return Err(p.err("unterminated RULES block"));
                    }
                    rules.push(p.rule()?);
                }
                p.expect(Tok::RPar)?;
            }
            _ => {
                // skip unknown blocks such as (CONDITIONTYPE ORIENTED) or (COMMENT ...)
                let mut depth = 1usize;
                while depth > 0 {
                    match p.next() {
                        Some(Tok::LPar) => depth += 1,
                        Some(Tok::RPar) => depth -= 1,
                        Some(_) => {}
                        None => return Err(p.err("unterminated block")),
                    }
                }
            }
        }
    }
    // defined symbols are the lhs roots
    let mut sig = p.sig;
    for r in &rules {
        if let Term::App(f, _) = &r.lhs {
            sig.set_kind(*f, SymbolKind::Defined);
        }
    }
    // assign local indices in file order
    let mut counts: HashMap<Symbol, usize> = HashMap::new();
    for r in rules.iter_mut() {
        if let Term::App(f, _) = &r.lhs {
            let c = counts.entry(*f).or_insert(0);
            *c += 1;
            r.local_index = *c;
        }
    }
    Ok(RawSystem {
        sig,
        vars: p.vars,
        rules,
        arity_clashes: p.arity_clashes,
    })
}

/// Checks every restriction of the requested mode and reports all violations
/// in a deterministic order.
pub fn validate(raw: &RawSystem, mode: ValidateMode) -> ValidationReport {
    let mut violations = Vec::new();
    for (name, expected, got) in &raw.arity_clashes {
        violations.push(Violation {
            rule: None,
            restriction: Restriction::ArityClash {
                symbol: name.clone(),
                expected: *expected,
                got: *got,
            },
        });
    }
    let defined: BTreeSet<Symbol> = raw
        .sig
        .symbols()
        .filter(|&f| raw.sig.kind(f) == SymbolKind::Defined)
        .collect();
    let has_defined = |t: &Term| -> Option<Symbol> {
        fn walk(t: &Term, defined: &BTreeSet<Symbol>) -> Option<Symbol> {
            match t {
                Term::Var(_) => None,
                Term::App(f, args) => {
                    if defined.contains(f) {
                        return Some(*f);
                    }
                    args.iter().find_map(|a| walk(a, defined))
                }
            }
        }
        walk(t, &defined)
    };

    for (ridx, rule) in raw.rules.iter().enumerate() {
        let push = |violations: &mut Vec<Violation>, restriction| {
            violations.push(Violation {
                rule: Some(ridx),
                restriction,
            })
        };
        let args = match &rule.lhs {
            Term::Var(_) => {
                push(&mut violations, Restriction::LhsIsVariable);
                continue;
            }
            Term::App(_, args) => args,
        };
        // proper subterms of the lhs are constructor terms
        for a in args {
            if let Some(f) = has_defined(a) {
                push(
                    &mut violations,
                    Restriction::LhsArgNotConstructor {
                        symbol: raw.sig.name(f).to_string(),
                    },
                );
            }
        }
        // condition right-hand sides are constructor terms
        for (ci, (_, b)) in rule.conditions.iter().enumerate() {
            if let Some(f) = has_defined(b) {
                push(
                    &mut violations,
                    Restriction::CondRhsNotConstructor {
                        cond: ci + 1,
                        symbol: raw.sig.name(f).to_string(),
                    },
                );
            }
        }
        // Var(b_i) pairwise disjoint, with b_0 the lhs
        let mut blocks: Vec<BTreeSet<Var>> = vec![rule.lhs.vars()];
        for (_, b) in &rule.conditions {
            blocks.push(b.vars());
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                for v in blocks[i].intersection(&blocks[j]) {
                    push(
                        &mut violations,
                        Restriction::SharedCondVariable {
                            i,
                            j,
                            var: v.name().to_string(),
                        },
                    );
                }
            }
        }
        // Var(a_i) ⊆ Var(b_0 .. b_{i-1}),  Var(r) ⊆ Var(b_0 .. b_k)
        let mut scope: BTreeSet<Var> = blocks[0].clone();
        for (ci, (a, b)) in rule.conditions.iter().enumerate() {
            for v in a.vars().difference(&scope) {
                push(
                    &mut violations,
                    Restriction::CondLhsExtraVariable {
                        cond: ci + 1,
                        var: v.name().to_string(),
                    },
                );
            }
            scope.extend(b.vars());
        }
        for v in rule.rhs.vars().difference(&scope) {
            push(
                &mut violations,
                Restriction::RhsExtraVariable {
                    var: v.name().to_string(),
                },
            );
        }
        if mode == ValidateMode::Strong {
            let dup = |t: &Term| -> Vec<Var> {
                let mut seen = BTreeSet::new();
                let mut dups = BTreeSet::new();
                fn walk(t: &Term, seen: &mut BTreeSet<Var>, dups: &mut BTreeSet<Var>) {
                    match t {
                        Term::Var(x) => {
                            if !seen.insert(x.clone()) {
                                dups.insert(x.clone());
                            }
                        }
                        Term::App(_, args) => args.iter().for_each(|a| walk(a, seen, dups)),
                    }
                }
                walk(t, &mut seen, &mut dups);
                dups.into_iter().collect()
            };
            for v in dup(&rule.lhs) {
                push(
                    &mut violations,
                    Restriction::NonLinearLhs {
                        var: v.name().to_string(),
                    },
                );
            }
            for (ci, (_, b)) in rule.conditions.iter().enumerate() {
                for v in dup(b) {
                    push(
                        &mut violations,
                        Restriction::NonLinearCondRhs {
                            cond: ci + 1,
                            var: v.name().to_string(),
                        },
                    );
                }
            }
        }
    }
    // label sets are stored as bitmasks
    let mut counts: BTreeMap<Symbol, usize> = BTreeMap::new();
    for r in &raw.rules {
        if let Term::App(f, _) = &r.lhs {
            *counts.entry(*f).or_insert(0) += 1;
        }
    }
    for (f, c) in counts {
        if c > 30 {
            violations.push(Violation {
                rule: None,
                restriction: Restriction::TooManyRules {
                    symbol: raw.sig.name(f).to_string(),
                    count: c,
                },
            });
        }
    }
    ValidationReport { violations }
}

impl Cctrs {
    /// Validates `raw` in the given mode and builds the system.
    pub fn from_raw(raw: RawSystem, mode: ValidateMode) -> Result<Cctrs, ValidationReport> {
        let report = validate(&raw, mode);
        if !report.is_empty() {
            return Err(report);
        }
        let mut per_symbol: HashMap<Symbol, Vec<usize>> = HashMap::new();
        for (i, r) in raw.rules.iter().enumerate() {
            let f = r.root().expect("validated lhs");
            per_symbol.entry(f).or_default().push(i);
        }
        Ok(Cctrs {
            sig: raw.sig,
            rules: raw.rules,
            per_symbol,
            strong: mode == ValidateMode::Strong,
            declared_vars: raw.vars,
        })
    }

    pub fn parse(text: &str, mode: ValidateMode) -> Result<Cctrs, CctrsError> {
        let raw = parse_cctrs(text)?;
        Cctrs::from_raw(raw, mode).map_err(CctrsError::Invalid)
    }

    /// Parses a term in this system's namespace (symbols and declared variables).
    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        let toks = tokenize(text)?;
        let mut p = TermParser {
            toks,
            pos: 0,
            sys: self,
        };
        let t = p.term()?;
        if p.pos != p.toks.len() {
            return Err(ParseError::Syntax {
                line: 1,
                msg: "trailing input after term".to_string(),
            });
        }
        Ok(t)
    }
}

#[derive(Debug, Error)]
pub enum CctrsError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("validation failed:\n{0}")]
    Invalid(ValidationReport),
}

struct TermParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sys: &'a Cctrs,
}

impl TermParser<'_> {
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = match self.next() {
            Some(Tok::Ident(s)) => s,
            got => {
                return Err(ParseError::Syntax {
                    line: 1,
                    msg: format!("expected a term, got {got:?}"),
                })
            }
        };
        let mut args = Vec::new();
        let mut applied = false;
        if self.peek() == Some(&Tok::LPar) {
            applied = true;
            self.next();
            if self.peek() == Some(&Tok::RPar) {
                self.next();
            } else {
                loop {
                    args.push(self.term()?);
                    match self.next() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RPar) => break,
                        got => {
                            return Err(ParseError::Syntax {
                                line: 1,
                                msg: format!("expected ',' or ')', got {got:?}"),
                            })
                        }
                    }
                }
            }
        }
        if !applied && self.sys.declared_vars.contains(&Var::new(&name)) {
            return Ok(Term::Var(Var::new(&name)));
        }
        match self.sys.sig.lookup(&name) {
            Some(f) => {
                let expected = self.sys.sig.arity(f);
                if expected != args.len() {
                    return Err(ParseError::Arity {
                        symbol: name,
                        expected,
                        got: args.len(),
                    });
                }
                Ok(Term::App(f, args))
            }
            None => Err(ParseError::UnknownSymbol(name)),
        }
    }
}

/// Handy substitution extension: union of two substitutions with disjoint
/// domains (the right one wins on overlap, which callers avoid).
pub fn union_subst(a: &Subst, b: &Subst) -> Subst {
    let mut out = a.clone();
    for (k, v) in b.iter() {
        out.insert(k.clone(), v.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::FIB;

    #[test]
    fn fib_is_a_strong_cctrs() {
        let raw = parse_cctrs(FIB).unwrap();
        let report = validate(&raw, ValidateMode::Strong);
        assert!(report.is_empty(), "{report}");
        let sys = Cctrs::from_raw(raw, ValidateMode::Strong).unwrap();
        assert_eq!(sys.rules.len(), 4);
        let fib = sys.sig.lookup("fib").unwrap();
        assert_eq!(sys.rules_for(fib), &[2, 3]);
        assert_eq!(sys.rules[3].local_index, 2);
    }

    #[test]
    fn nonlinear_lhs_rejected_in_strong_mode() {
        let raw = parse_cctrs("(VAR x)\n(RULES f(x, x) -> x)").unwrap();
        let report = validate(&raw, ValidateMode::Strong);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(&v.restriction, Restriction::NonLinearLhs { var } if var == "x")));
        assert!(validate(&raw, ValidateMode::Cctrs).is_empty());
    }

    #[test]
    fn unbound_condition_variable_rejected() {
        let raw = parse_cctrs("(VAR x y z)\n(RULES f(x) -> y | g(y) == z)").unwrap();
        let report = validate(&raw, ValidateMode::Cctrs);
        assert!(report.violations.iter().any(|v| matches!(
            &v.restriction,
            Restriction::CondLhsExtraVariable { cond: 1, var } if var == "y"
        )));
        // y is also missing from Var(l, b1)
        assert!(report.violations.iter().any(
            |v| matches!(&v.restriction, Restriction::RhsExtraVariable { var } if var == "y")
        ));
    }

    #[test]
    fn arity_clash_is_a_violation() {
        let raw = parse_cctrs("(VAR x)\n(RULES f(x) -> x f(x, x) -> x)").unwrap();
        let report = validate(&raw, ValidateMode::Cctrs);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(&v.restriction, Restriction::ArityClash { symbol, .. } if symbol == "f")));
    }

    #[test]
    fn validation_is_stable() {
        let raw = parse_cctrs("(VAR x)\n(RULES f(x, x) -> x)").unwrap();
        let a = validate(&raw, ValidateMode::Strong);
        let b = validate(&raw, ValidateMode::Strong);
        assert_eq!(a, b);
    }

    #[test]
    fn reserved_variable_names_are_rejected() {
        assert!(matches!(
            parse_cctrs("(VAR x#1)\n(RULES f(x#1) -> x#1)"),
            Err(ParseError::ReservedVariable(_))
        ));
    }

    #[test]
    fn comments_and_unknown_blocks_are_skipped() {
        let text = "\
(CONDITIONTYPE ORIENTED)  ; header
(COMMENT anything (nested) here)
(VAR x) ; the variables
(RULES
  f(x) -> x  ; identity
)";
        let sys = Cctrs::parse(text, ValidateMode::Strong).unwrap();
        assert_eq!(sys.rules.len(), 1);
    }

    #[test]
    fn parse_term_in_namespace() {
        let sys = Cctrs::parse(FIB, ValidateMode::Strong).unwrap();
        let t = sys.parse_term("fib(s(plus(0, 0)))").unwrap();
        assert_eq!(t.size(), 5);
        assert!(sys.parse_term("fib(s(x))").unwrap().vars().len() == 1);
        assert!(sys.parse_term("nope(0)").is_err());
        assert!(sys.parse_term("fib(0, 0)").is_err());
    }
}
