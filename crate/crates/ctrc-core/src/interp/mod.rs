//! Interpretation-based complexity certification: table files, recipe
//! expansion into a direct interpretation over the transformed signature,
//! grid-sampled compatibility and monotonicity checking, usable replacement
//! maps, and bound computation.

pub mod expr;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cctrs::Cctrs;
use crate::term::{Symbol, SymbolKind, Term, Var};
use crate::transform::TransformedTrs;

use expr::{parse_entry_body, parse_expr, Ctx, EvalError, Expr, ParamEnv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecipeMode {
    Direct,
    A,
    B,
    C,
}

impl fmt::Display for RecipeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecipeMode::Direct => write!(f, "direct"),
            RecipeMode::A => write!(f, "A"),
            RecipeMode::B => write!(f, "B"),
            RecipeMode::C => write!(f, "C"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Nat,
    Pair,
}

/// Value of the interpretation domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Nat(u64),
    Pair(u64, u64),
}

impl Value {
    pub fn strictly_above(self, other: Value) -> bool {
        match (self, other) {
            (Value::Nat(a), Value::Nat(b)) => a > b,
            (Value::Pair(c1, s1), Value::Pair(c2, s2)) => c1 > c2 && s1 >= s2,
            _ => false,
        }
    }

    pub fn weakly_above(self, other: Value) -> bool {
        match (self, other) {
            (Value::Nat(a), Value::Nat(b)) => a >= b,
            (Value::Pair(c1, s1), Value::Pair(c2, s2)) => c1 >= c2 && s1 >= s2,
            _ => false,
        }
    }

    pub fn cost(self) -> u64 {
        match self {
            Value::Nat(n) => n,
            Value::Pair(c, _) => c,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Pair(c, s) => write!(f, "({c},{s})"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum DirectEntry {
    Nat(Expr),
    Pair(Expr, Expr),
}

/// Parsed interpretation tables. Depending on the recipe mode only some of
/// the tables are populated.
#[derive(Debug, Clone, Default)]
pub struct Interpretation {
    pub mode: Option<RecipeMode>,
    direct: BTreeMap<Symbol, DirectEntry>,
    /// J_f^i tables (recipes A/B): key (f, i), i = 0..m_f.
    fun: BTreeMap<(Symbol, usize), Expr>,
    /// J_{f,i}^j tables: key (f, i, j).
    cond: BTreeMap<(Symbol, usize, usize), Expr>,
    /// S_f tables (recipe C).
    size_tbl: BTreeMap<Symbol, Expr>,
    /// C_f^i tables (recipe C).
    cost_tbl: BTreeMap<(Symbol, usize), Expr>,
    /// S_{f,i}^j tables.
    csize: BTreeMap<(Symbol, usize, usize), Expr>,
    /// C_{f,i}^j tables.
    ccost: BTreeMap<(Symbol, usize, usize), Expr>,
    /// Declared replacement map entries (1-based argument indices).
    pub upsilon: BTreeMap<Symbol, BTreeSet<usize>>,
}

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {err}")]
    Expr {
        line: usize,
        err: expr::ExprParseError,
    },
    #[error("missing component {0}")]
    MissingComponent(String),
    #[error("entry family {family} does not belong to recipe {mode}")]
    WrongFamily { family: String, mode: RecipeMode },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("recipe {0} cannot certify derivational complexity")]
    DerivationalNotSupported(RecipeMode),
    #[error("the signature admits no ground terms")]
    NoGroundTerms,
    #[error("premise violated for {symbol} at {valuation:?}: sum of tables exceeds K*sum + M")]
    UnverifiedPremise { symbol: String, valuation: Vec<u64> },
}

/// The fully expanded interpretation: one entry per transformed symbol.
#[derive(Debug, Clone)]
pub struct DirectInterp {
    pub domain: Domain,
    entries: Vec<DirectEntry>,
}

impl DirectInterp {
    pub fn entry(&self, f: Symbol) -> &DirectEntry {
        &self.entries[f.index()]
    }

    pub fn apply(&self, f: Symbol, args: &[Value]) -> Result<Value, EvalError> {
        match self.entry(f) {
            DirectEntry::Nat(e) => {
                let scalars: Vec<u64> = args
                    .iter()
                    .map(|v| match v {
                        Value::Nat(n) => *n,
                        Value::Pair(..) => 0,
                    })
                    .collect();
                Ok(Value::Nat(e.eval(&Ctx::Scalars(&scalars))?))
            }
            DirectEntry::Pair(c, s) => {
                let pairs: Vec<(u64, u64)> = args
                    .iter()
                    .map(|v| match v {
                        Value::Pair(c, s) => (*c, *s),
                        Value::Nat(n) => (*n, *n),
                    })
                    .collect();
                let ctx = Ctx::Pairs(&pairs);
                Ok(Value::Pair(c.eval(&ctx)?, s.eval(&ctx)?))
            }
        }
    }

    /// Value of a term under a valuation of its variables.
    pub fn eval_term(
        &self,
        t: &Term,
        valuation: &BTreeMap<Var, Value>,
    ) -> Result<Value, EvalError> {
        match t {
            Term::Var(x) => valuation
                .get(x)
                .copied()
                .ok_or(EvalError::UnboundReference(0)),
            Term::App(f, args) => {
                let vals: Vec<Value> = args
                    .iter()
                    .map(|a| self.eval_term(a, valuation))
                    .collect::<Result<_, _>>()?;
                self.apply(*f, &vals)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// Parses an interpretation file. One entry per line:
///
/// ```text
/// DIRECT f(x1,...,xk) = expr            # or (cost-expr, size-expr)
/// FUN i f(x1,...,xn) = expr             # J_f^i
/// COND f i j (x1,...,xn; a1,...,aj) = expr
/// SIZE f(x1,...,xn) = expr              # S_f
/// COST i f(c1,...,cn, s1,...,sn) = expr # C_f^i
/// CSIZE f i j (x-sizes; y-sizes) = expr
/// CCOST f i j (x-costs; y-costs; x-sizes; y-sizes) = expr
/// MAP f = {1,3}
/// ```
///
/// `#` starts a comment; `;` and `,` both separate parameters.
pub fn parse_interp(
    sys: &Cctrs,
    trs: &TransformedTrs,
    text: &str,
) -> Result<Interpretation, InterpError> {
    let mut out = Interpretation::default();
    for (lno, raw_line) in text.lines().enumerate() {
        // '#' also appears inside generated symbol names, so a comment only
        // starts at the beginning of a line or after whitespace
        let comment = raw_line.char_indices().find(|&(i, c)| {
            c == '#'
                && (i == 0
                    || raw_line[..i]
                        .chars()
                        .next_back()
                        .is_some_and(char::is_whitespace))
        });
        let line = match comment {
            Some((i, _)) => &raw_line[..i],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lno + 1;
        let perr = |msg: &str| InterpError::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let (head, body) = line
            .split_once('=')
            .ok_or_else(|| perr("missing '=' in entry"))?;
        let head = head.trim();
        let body = body.trim();
        let mut words = head.split_whitespace();
        let keyword = words.next().ok_or_else(|| perr("empty entry"))?;
        let rest: Vec<&str> = words.collect();
        let rest_joined = rest.join(" ");
        match keyword {
            "MAP" => {
                let name = rest_joined.trim();
                let f = sys
                    .sig
                    .lookup(name)
                    .ok_or_else(|| perr(&format!("unknown symbol {name}")))?;
                let body = body
                    .strip_prefix('{')
                    .and_then(|b| b.strip_suffix('}'))
                    .ok_or_else(|| perr("MAP body must be {i,j,...}"))?;
                let mut set = BTreeSet::new();
                for part in body.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    let i: usize = part
                        .parse()
                        .map_err(|_| perr(&format!("bad index {part}")))?;
                    if i == 0 || i > sys.sig.arity(f) {
                        return Err(perr(&format!(
                            "index {i} out of range for {name}/{}",
                            sys.sig.arity(f)
                        )));
                    }
                    set.insert(i);
                }
                out.upsilon.insert(f, set);
            }
            "DIRECT" => {
                let (name, params) = parse_symbol_params(&rest_joined, lineno)?;
                let f = trs
                    .hsig
                    .sig
                    .lookup(&name)
                    .ok_or_else(|| perr(&format!("unknown transformed symbol {name}")))?;
                if params.len() != trs.hsig.sig.arity(f) {
                    return Err(perr(&format!(
                        "{name} has arity {}, got {} parameters",
                        trs.hsig.sig.arity(f),
                        params.len()
                    )));
                }
                // probe scalar first, then pair
                let env = ParamEnv {
                    names: &params,
                    pairs: false,
                };
                let (first, second) = match parse_entry_body(body, &env) {
                    Ok(r) => r,
                    Err(_) => {
                        let env = ParamEnv {
                            names: &params,
                            pairs: true,
                        };
                        parse_entry_body(body, &env)
                            .map_err(|err| InterpError::Expr { line: lineno, err })?
                    }
                };
                let entry = match second {
                    Some(s) => DirectEntry::Pair(first, s),
                    None => DirectEntry::Nat(first),
                };
                out.direct.insert(f, entry);
            }
            "FUN" | "COST" => {
                if rest.is_empty() {
                    return Err(perr("expected an index"));
                }
                let i: usize = rest[0]
                    .parse()
                    .map_err(|_| perr(&format!("bad index {}", rest[0])))?;
                let tail = rest[1..].join(" ");
                let (name, params) = parse_symbol_params(&tail, lineno)?;
                let f = sys
                    .sig
                    .lookup(&name)
                    .ok_or_else(|| perr(&format!("unknown symbol {name}")))?;
                let n = sys.sig.arity(f);
                let expected = if keyword == "FUN" { n } else { 2 * n };
                if params.len() != expected {
                    return Err(perr(&format!(
                        "{keyword} {i} {name} expects {expected} parameters, got {}",
                        params.len()
                    )));
                }
                let env = ParamEnv {
                    names: &params,
                    pairs: false,
                };
                let e =
                    parse_expr(body, &env).map_err(|err| InterpError::Expr { line: lineno, err })?;
                if keyword == "FUN" {
                    out.fun.insert((f, i), e);
                } else {
                    out.cost_tbl.insert((f, i), e);
                }
            }
            "SIZE" => {
                let (name, params) = parse_symbol_params(&rest_joined, lineno)?;
                let f = sys
                    .sig
                    .lookup(&name)
                    .ok_or_else(|| perr(&format!("unknown symbol {name}")))?;
                if params.len() != sys.sig.arity(f) {
                    return Err(perr(&format!(
                        "SIZE {name} expects {} parameters, got {}",
                        sys.sig.arity(f),
                        params.len()
                    )));
                }
                let env = ParamEnv {
                    names: &params,
                    pairs: false,
                };
                let e =
                    parse_expr(body, &env).map_err(|err| InterpError::Expr { line: lineno, err })?;
                out.size_tbl.insert(f, e);
            }
            "COND" | "CSIZE" | "CCOST" => {
                if rest.len() < 3 {
                    return Err(perr(&format!("{keyword} expects: symbol i j (params)")));
                }
                let name = rest[0];
                let f = sys
                    .sig
                    .lookup(name)
                    .ok_or_else(|| perr(&format!("unknown symbol {name}")))?;
                let i: usize = rest[1]
                    .parse()
                    .map_err(|_| perr(&format!("bad rule index {}", rest[1])))?;
                let j_and_params = rest[2..].join(" ");
                let (j_str, params_str) = match j_and_params.find('(') {
                    Some(pos) => (j_and_params[..pos].trim().to_string(), &j_and_params[pos..]),
                    None => return Err(perr("missing parameter list")),
                };
                let j: usize = j_str
                    .parse()
                    .map_err(|_| perr(&format!("bad condition index {j_str}")))?;
                let params = parse_params(params_str, lineno)?;
                let n = sys.sig.arity(f);
                let expected = match keyword {
                    "COND" | "CSIZE" => n + j,
                    _ => 2 * (n + j),
                };
                if params.len() != expected {
                    return Err(perr(&format!(
                        "{keyword} {name} {i} {j} expects {expected} parameters, got {}",
                        params.len()
                    )));
                }
                let env = ParamEnv {
                    names: &params,
                    pairs: false,
                };
                let e =
                    parse_expr(body, &env).map_err(|err| InterpError::Expr { line: lineno, err })?;
                match keyword {
                    "COND" => out.cond.insert((f, i, j), e),
                    "CSIZE" => out.csize.insert((f, i, j), e),
                    _ => out.ccost.insert((f, i, j), e),
                };
            }
            other => return Err(perr(&format!("unknown entry keyword {other}"))),
        }
    }
    Ok(out)
}

fn parse_symbol_params(text: &str, line: usize) -> Result<(String, Vec<String>), InterpError> {
    let text = text.trim();
    match text.find('(') {
        None => Ok((text.to_string(), Vec::new())),
        Some(pos) => {
            let name = text[..pos].trim().to_string();
            let params = parse_params(&text[pos..], line)?;
            Ok((name, params))
        }
    }
}

fn parse_params(text: &str, line: usize) -> Result<Vec<String>, InterpError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or(InterpError::Parse {
            line,
            msg: "malformed parameter list".to_string(),
        })?;
    Ok(inner
        .split([',', ';'])
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect())
}

// ---------------------------------------------------------------------------
// Recipe expansion
// ---------------------------------------------------------------------------

/// Expands the tables into one entry per transformed symbol.
pub fn build(
    sys: &Cctrs,
    trs: &TransformedTrs,
    interp: &Interpretation,
    mode: RecipeMode,
) -> Result<DirectInterp, InterpError> {
    match mode {
        RecipeMode::Direct => build_direct(trs, interp),
        RecipeMode::A | RecipeMode::B => build_recipe_ab(sys, trs, interp),
        RecipeMode::C => build_recipe_c(sys, trs, interp),
    }
}

fn build_direct(trs: &TransformedTrs, interp: &Interpretation) -> Result<DirectInterp, InterpError> {
    let hsig = &trs.hsig;
    let pair_domain = interp
        .direct
        .values()
        .any(|e| matches!(e, DirectEntry::Pair(..)));
    let mut entries = Vec::new();
    for f in hsig.sig.symbols() {
        let entry = if let Some(e) = interp.direct.get(&f) {
            e.clone()
        } else if f == hsig.top {
            if pair_domain {
                DirectEntry::Pair(Expr::Const(0), Expr::Const(1))
            } else {
                DirectEntry::Nat(Expr::Const(1))
            }
        } else if f == hsig.bot {
            if pair_domain {
                DirectEntry::Pair(Expr::Const(0), Expr::Const(0))
            } else {
                DirectEntry::Nat(Expr::Const(0))
            }
        } else {
            return Err(InterpError::MissingComponent(format!(
                "DIRECT {}",
                hsig.sig.name(f)
            )));
        };
        let consistent = matches!(
            (&entry, pair_domain),
            (DirectEntry::Nat(_), false) | (DirectEntry::Pair(..), true)
        );
        if !consistent {
            return Err(InterpError::Parse {
                line: 0,
                msg: format!(
                    "entry for {} mixes scalar and pair domains",
                    hsig.sig.name(f)
                ),
            });
        }
        entries.push(entry);
    }
    Ok(DirectInterp {
        domain: if pair_domain { Domain::Pair } else { Domain::Nat },
        entries,
    })
}

fn add(a: Expr, b: Expr) -> Expr {
    Expr::Add(Box::new(a), Box::new(b))
}

fn mul(a: Expr, b: Expr) -> Expr {
    Expr::Mul(Box::new(a), Box::new(b))
}

fn build_recipe_ab(
    sys: &Cctrs,
    trs: &TransformedTrs,
    interp: &Interpretation,
) -> Result<DirectInterp, InterpError> {
    let hsig = &trs.hsig;
    let fun = |f: Symbol, i: usize| -> Result<Expr, InterpError> {
        interp
            .fun
            .get(&(f, i))
            .cloned()
            .ok_or_else(|| InterpError::MissingComponent(format!("FUN {i} {}", sys.sig.name(f))))
    };
    let mut entries = Vec::new();
    for f in hsig.sig.symbols() {
        if f == hsig.top {
            entries.push(DirectEntry::Nat(Expr::Const(1)));
            continue;
        }
        if f == hsig.bot {
            entries.push(DirectEntry::Nat(Expr::Const(0)));
            continue;
        }
        match hsig.sig.data(f).decoration {
            crate::term::Decoration::Progress { base, rule, cond } => {
                let n = sys.sig.arity(base);
                let m = sys.rule_count_for(base);
                let (i, j) = (rule, cond);
                let cond_expr = interp.cond.get(&(base, i, j)).cloned().ok_or_else(|| {
                    InterpError::MissingComponent(format!("COND {} {i} {j}", sys.sig.name(base)))
                })?;
                // parameters of J_{f,i}^j: x1..xn then y1..yj; the slot block
                // of the widened symbol starts at position n + i - 1
                let cond_remapped = cond_expr.remap(&|e| match e {
                    Expr::Ref(q) if *q < n => Expr::Ref(*q),
                    Expr::Ref(q) => Expr::Ref(n + i - 1 + (q - n)),
                    other => other.clone(),
                });
                let mut acc = add(fun(base, 0)?, cond_remapped);
                for k in 1..=m {
                    if k == i {
                        continue;
                    }
                    let flag_idx = if k < i { n + k - 1 } else { n + j + k - 2 };
                    acc = add(acc, mul(Expr::Ref(flag_idx), fun(base, k)?));
                }
                entries.push(DirectEntry::Nat(acc));
            }
            _ => {
                let n = sys.sig.arity(f);
                let m = sys.rule_count_for(f);
                let mut acc = fun(f, 0)?;
                for k in 1..=m {
                    acc = add(acc, mul(Expr::Ref(n + k - 1), fun(f, k)?));
                }
                entries.push(DirectEntry::Nat(acc));
            }
        }
    }
    Ok(DirectInterp {
        domain: Domain::Nat,
        entries,
    })
}

fn build_recipe_c(
    sys: &Cctrs,
    trs: &TransformedTrs,
    interp: &Interpretation,
) -> Result<DirectInterp, InterpError> {
    let hsig = &trs.hsig;
    let cost_of = |f: Symbol, i: usize| -> Result<Expr, InterpError> {
        interp
            .cost_tbl
            .get(&(f, i))
            .cloned()
            .ok_or_else(|| InterpError::MissingComponent(format!("COST {i} {}", sys.sig.name(f))))
    };
    let size_of = |f: Symbol| -> Result<Expr, InterpError> {
        interp
            .size_tbl
            .get(&f)
            .cloned()
            .ok_or_else(|| InterpError::MissingComponent(format!("SIZE {}", sys.sig.name(f))))
    };
    // C tables take (costs of x, sizes of x): remap onto pair parameters
    let remap_2n = |e: &Expr, n: usize| {
        e.remap(&|r| match r {
            Expr::Ref(q) if *q < n => Expr::CostOf(*q),
            Expr::Ref(q) => Expr::SizeOf(q - n),
            other => other.clone(),
        })
    };
    let remap_sizes = |e: &Expr| {
        e.remap(&|r| match r {
            Expr::Ref(q) => Expr::SizeOf(*q),
            other => other.clone(),
        })
    };
    let mut entries = Vec::new();
    for f in hsig.sig.symbols() {
        if f == hsig.top {
            entries.push(DirectEntry::Pair(Expr::Const(0), Expr::Const(1)));
            continue;
        }
        if f == hsig.bot {
            entries.push(DirectEntry::Pair(Expr::Const(0), Expr::Const(0)));
            continue;
        }
        match hsig.sig.data(f).decoration {
            crate::term::Decoration::Progress { base, rule, cond } => {
                let n = sys.sig.arity(base);
                let m = sys.rule_count_for(base);
                let (i, j) = (rule, cond);
                let slot = |q: usize| n + i - 1 + q; // 0-based y-slot positions
                let ccost_expr = interp.ccost.get(&(base, i, j)).cloned().ok_or_else(|| {
                    InterpError::MissingComponent(format!("CCOST {} {i} {j}", sys.sig.name(base)))
                })?;
                // parameters: costs of x (n), costs of y (j), sizes of x (n), sizes of y (j)
                let ccost_remapped = ccost_expr.remap(&|r| match r {
                    Expr::Ref(q) if *q < n => Expr::CostOf(*q),
                    Expr::Ref(q) if *q < n + j => Expr::CostOf(slot(q - n)),
                    Expr::Ref(q) if *q < 2 * n + j => Expr::SizeOf(q - (n + j)),
                    Expr::Ref(q) => Expr::SizeOf(slot(q - (2 * n + j))),
                    other => other.clone(),
                });
                let mut cost_acc = add(remap_2n(&cost_of(base, 0)?, n), ccost_remapped);
                for k in 1..=m {
                    if k == i {
                        continue;
                    }
                    let flag_idx = if k < i { n + k - 1 } else { n + j + k - 2 };
                    cost_acc = add(
                        cost_acc,
                        mul(Expr::SizeOf(flag_idx), remap_2n(&cost_of(base, k)?, n)),
                    );
                }
                let csize_expr = interp.csize.get(&(base, i, j)).cloned().ok_or_else(|| {
                    InterpError::MissingComponent(format!("CSIZE {} {i} {j}", sys.sig.name(base)))
                })?;
                let csize_remapped = csize_expr.remap(&|r| match r {
                    Expr::Ref(q) if *q < n => Expr::SizeOf(*q),
                    Expr::Ref(q) => Expr::SizeOf(slot(q - n)),
                    other => other.clone(),
                });
                let size_acc = Expr::Max(
                    Box::new(remap_sizes(&size_of(base)?)),
                    Box::new(csize_remapped),
                );
                entries.push(DirectEntry::Pair(cost_acc, size_acc));
            }
            _ => {
                let n = sys.sig.arity(f);
                let m = sys.rule_count_for(f);
                let mut cost_acc = remap_2n(&cost_of(f, 0)?, n);
                for k in 1..=m {
                    cost_acc = add(
                        cost_acc,
                        mul(Expr::SizeOf(n + k - 1), remap_2n(&cost_of(f, k)?, n)),
                    );
                }
                entries.push(DirectEntry::Pair(cost_acc, remap_sizes(&size_of(f)?)));
            }
        }
    }
    Ok(DirectInterp {
        domain: Domain::Pair,
        entries,
    })
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Strict,
    Weak,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Strict => write!(f, "STRICT"),
            Verdict::Weak => write!(f, "WEAK"),
            Verdict::Violated => write!(f, "VIOLATED"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuleVerdict {
    /// 1-based rule index into the transformed rule list.
    pub rule: usize,
    pub verdict: Verdict,
    pub required_strict: bool,
    pub valuation: Option<Vec<(Var, Value)>>,
}

#[derive(Debug, Clone)]
pub struct MonoVerdict {
    pub symbol: Symbol,
    pub ok: bool,
    /// (argument index, argument values at the violation)
    pub witness: Option<(usize, Vec<Value>)>,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub rules: Vec<RuleVerdict>,
    pub monotonicity: Vec<MonoVerdict>,
    pub pass: bool,
    /// Always true: verification samples a finite grid.
    pub sampled: bool,
    pub grid: u64,
}

fn grid_values(domain: Domain, grid: u64) -> Vec<Value> {
    match domain {
        Domain::Nat => (0..=grid).map(Value::Nat).collect(),
        Domain::Pair => {
            let mut out = Vec::new();
            for c in 0..=grid {
                for s in 0..=grid {
                    out.push(Value::Pair(c, s));
                }
            }
            out
        }
    }
}

/// Strict-monotonicity obligations per symbol under the given recipe: the
/// replacement map of the transformed signature, with base symbols relaxed
/// to the declared usable map for recipes B and C.
pub fn obligations(
    sys: &Cctrs,
    trs: &TransformedTrs,
    interp: &Interpretation,
    mode: RecipeMode,
) -> BTreeMap<Symbol, BTreeSet<usize>> {
    let mut out = BTreeMap::new();
    for f in trs.hsig.sig.symbols() {
        let mu = trs.hsig.mu_of(f).clone();
        let set = match mode {
            RecipeMode::Direct | RecipeMode::A => mu,
            RecipeMode::B | RecipeMode::C => {
                if f.index() < trs.hsig.base_len() && !trs.hsig.is_flag(f) {
                    interp.upsilon.get(&f).cloned().unwrap_or_else(|| {
                        (1..=sys.sig.arity(f)).collect()
                    })
                } else {
                    mu
                }
            }
        };
        out.insert(f, set);
    }
    out
}

/// Grid-sampled compatibility and monotonicity check. Cost-1 rules must
/// decrease strictly, administrative rules weakly; interpretations must be
/// strictly monotone in every obliged argument.
pub fn check(
    di: &DirectInterp,
    trs: &TransformedTrs,
    strict_args: &BTreeMap<Symbol, BTreeSet<usize>>,
    grid: u64,
) -> Result<CheckReport, EvalError> {
    let values = grid_values(di.domain, grid);
    let mut rules = Vec::new();
    let mut pass = true;
    for (idx, rule) in trs.rules.iter().enumerate() {
        let vars: Vec<Var> = rule.lhs.vars().into_iter().collect();
        let mut all_strict = true;
        let mut all_weak = true;
        let mut witness: Option<Vec<(Var, Value)>> = None;
        let required_strict = rule.cost == 1;
        let mut assignment = vec![0usize; vars.len()];
        loop {
            let valuation: BTreeMap<Var, Value> = vars
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), values[assignment[i]]))
                .collect();
            let l = di.eval_term(&rule.lhs, &valuation)?;
            let r = di.eval_term(&rule.rhs, &valuation)?;
            let strict = l.strictly_above(r);
            let weak = l.weakly_above(r);
            all_strict &= strict;
            all_weak &= weak;
            let violated_here = if required_strict { !strict } else { !weak };
            if violated_here && witness.is_none() {
                witness = Some(
                    vars.iter()
                        .enumerate()
                        .map(|(i, v)| (v.clone(), values[assignment[i]]))
                        .collect(),
                );
            }
            // odometer
            let mut k = 0;
            loop {
                if k == vars.len() {
                    break;
                }
                assignment[k] += 1;
                if assignment[k] < values.len() {
                    break;
                }
                assignment[k] = 0;
                k += 1;
            }
            if k == vars.len() {
                break;
            }
        }
        let verdict = if required_strict {
            if all_strict {
                Verdict::Strict
            } else {
                Verdict::Violated
            }
        } else if all_strict {
            Verdict::Strict
        } else if all_weak {
            Verdict::Weak
        } else {
            Verdict::Violated
        };
        if verdict == Verdict::Violated {
            pass = false;
        }
        rules.push(RuleVerdict {
            rule: idx + 1,
            verdict,
            required_strict,
            valuation: if verdict == Verdict::Violated {
                witness
            } else {
                None
            },
        });
    }

    let mut monotonicity = Vec::new();
    for f in trs.hsig.sig.symbols() {
        let arity = trs.hsig.sig.arity(f);
        let required = strict_args.get(&f).cloned().unwrap_or_default();
        let mut ok = true;
        let mut witness = None;
        'args: for &arg in &required {
            let mut assignment = vec![0usize; arity];
            loop {
                let base: Vec<Value> = assignment.iter().map(|&i| values[i]).collect();
                let lo = di.apply(f, &base)?;
                match di.domain {
                    Domain::Nat => {
                        let Value::Nat(v) = base[arg - 1] else { unreachable!() };
                        let mut bumped = base.clone();
                        bumped[arg - 1] = Value::Nat(v + 1);
                        let hi = di.apply(f, &bumped)?;
                        if !hi.strictly_above(lo) {
                            ok = false;
                            witness = Some((arg, base));
                            break 'args;
                        }
                    }
                    Domain::Pair => {
                        let Value::Pair(c, s) = base[arg - 1] else { unreachable!() };
                        let mut cost_bumped = base.clone();
                        cost_bumped[arg - 1] = Value::Pair(c + 1, s);
                        let hi = di.apply(f, &cost_bumped)?;
                        let mut size_bumped = base.clone();
                        size_bumped[arg - 1] = Value::Pair(c, s + 1);
                        let wi = di.apply(f, &size_bumped)?;
                        if !hi.strictly_above(lo) || !wi.weakly_above(lo) {
                            ok = false;
                            witness = Some((arg, base));
                            break 'args;
                        }
                    }
                }
                let mut k = 0;
                loop {
                    if k == arity {
                        break;
                    }
                    assignment[k] += 1;
                    if assignment[k] < values.len() {
                        break;
                    }
                    assignment[k] = 0;
                    k += 1;
                }
                if k == arity {
                    break;
                }
            }
        }
        if !ok {
            pass = false;
        }
        monotonicity.push(MonoVerdict {
            symbol: f,
            ok,
            witness,
        });
    }

    Ok(CheckReport {
        rules,
        monotonicity,
        pass,
        sampled: true,
        grid,
    })
}

// ---------------------------------------------------------------------------
// Usable replacement maps
// ---------------------------------------------------------------------------

pub type ReplacementMap = BTreeMap<Symbol, BTreeSet<usize>>;

fn active_var_positions(map: &ReplacementMap, t: &Term) -> Vec<(Vec<usize>, Var)> {
    let mut out = Vec::new();
    fn walk(map: &ReplacementMap, t: &Term, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Var)>) {
        match t {
            Term::Var(x) => out.push((path.clone(), x.clone())),
            Term::App(f, args) => {
                let empty = BTreeSet::new();
                let mu = map.get(f).unwrap_or(&empty);
                for (i, a) in args.iter().enumerate() {
                    if mu.contains(&(i + 1)) {
                        path.push(i + 1);
                        walk(map, a, path, out);
                        path.pop();
                    }
                }
            }
        }
    }
    walk(map, t, &mut Vec::new(), &mut out);
    out
}

/// Positions of `t` that the usability condition demands to be active:
/// defined-symbol positions, and variable positions whose variable occurs at
/// an already-active position of an earlier pattern block.
fn demanded_positions(
    sys: &Cctrs,
    map: &ReplacementMap,
    t: &Term,
    earlier_active_vars: &BTreeSet<Var>,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn walk(
        sys: &Cctrs,
        t: &Term,
        path: &mut Vec<usize>,
        earlier: &BTreeSet<Var>,
        out: &mut Vec<Vec<usize>>,
    ) {
        match t {
            Term::Var(x) => {
                if earlier.contains(x) {
                    out.push(path.clone());
                }
            }
            Term::App(f, args) => {
                if sys.is_defined(*f) {
                    out.push(path.clone());
                }
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    walk(sys, a, path, earlier, out);
                    path.pop();
                }
            }
        }
    }
    let _ = map;
    walk(sys, t, &mut Vec::new(), earlier_active_vars, &mut out);
    out
}

/// Least usable replacement map: activity is forced at defined-symbol
/// positions of condition left-hand sides (and the rule's right-hand side)
/// and propagated through variables bound at active pattern positions.
pub fn derive_usable_map(sys: &Cctrs) -> ReplacementMap {
    let mut map: ReplacementMap = sys.sig.symbols().map(|f| (f, BTreeSet::new())).collect();
    loop {
        let mut changed = false;
        for rule in &sys.rules {
            let mut blocks: Vec<&Term> = vec![&rule.lhs];
            for (_, b) in &rule.conditions {
                blocks.push(b);
            }
            let k = rule.conditions.len();
            for i in 1..=k + 1 {
                let a_i: &Term = if i <= k {
                    &rule.conditions[i - 1].0
                } else {
                    &rule.rhs
                };
                let mut earlier_vars: BTreeSet<Var> = BTreeSet::new();
                for b in blocks.iter().take(i) {
                    for (_, v) in active_var_positions(&map, b) {
                        earlier_vars.insert(v);
                    }
                }
                for path in demanded_positions(sys, &map, a_i, &earlier_vars) {
                    // force every edge along the path into the map
                    let mut cur = a_i;
                    for &step in &path {
                        let Term::App(f, args) = cur else { break };
                        if map.get_mut(f).unwrap().insert(step) {
                            changed = true;
                        }
                        cur = &args[step - 1];
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    map
}

/// Checks the usability condition for an arbitrary map.
pub fn is_usable(sys: &Cctrs, map: &ReplacementMap) -> bool {
    for rule in &sys.rules {
        let mut blocks: Vec<&Term> = vec![&rule.lhs];
        for (_, b) in &rule.conditions {
            blocks.push(b);
        }
        let k = rule.conditions.len();
        for i in 1..=k + 1 {
            let a_i: &Term = if i <= k {
                &rule.conditions[i - 1].0
            } else {
                &rule.rhs
            };
            let mut earlier_vars: BTreeSet<Var> = BTreeSet::new();
            for b in blocks.iter().take(i) {
                for (_, v) in active_var_positions(map, b) {
                    earlier_vars.insert(v);
                }
            }
            let active: BTreeSet<Vec<usize>> = {
                let mut set = BTreeSet::new();
                fn walk(
                    map: &ReplacementMap,
                    t: &Term,
                    path: &mut Vec<usize>,
                    set: &mut BTreeSet<Vec<usize>>,
                ) {
                    set.insert(path.clone());
                    if let Term::App(f, args) = t {
                        let empty = BTreeSet::new();
                        let mu = map.get(f).unwrap_or(&empty);
                        for (i, a) in args.iter().enumerate() {
                            if mu.contains(&(i + 1)) {
                                path.push(i + 1);
                                walk(map, a, path, set);
                                path.pop();
                            }
                        }
                    }
                }
                walk(map, a_i, &mut Vec::new(), &mut set);
                set
            };
            for path in demanded_positions(sys, map, a_i, &earlier_vars) {
                if !active.contains(&path) {
                    return false;
                }
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Crc,
    Cdc,
}

/// Exact maximum of the interpreted value (cost component on pairs) over all
/// ground terms of size at most `n` (basic terms for `Crc`), by dynamic
/// programming over achievable values per size.
pub fn bound(
    sys: &Cctrs,
    trs: &TransformedTrs,
    interp: &Interpretation,
    mode_recipe: RecipeMode,
    n: usize,
    mode: BoundMode,
) -> Result<u64, InterpError> {
    if mode == BoundMode::Cdc {
        if mode_recipe == RecipeMode::B {
            return Err(InterpError::DerivationalNotSupported(RecipeMode::B));
        }
        if mode_recipe == RecipeMode::C {
            let relaxed = interp
                .upsilon
                .iter()
                .any(|(f, set)| set.len() < sys.sig.arity(*f));
            if relaxed {
                return Err(InterpError::DerivationalNotSupported(RecipeMode::C));
            }
        }
    }
    let di = build(sys, trs, interp, mode_recipe)?;
    if !sys.sig.symbols().any(|f| sys.sig.arity(f) == 0) {
        return Err(InterpError::NoGroundTerms);
    }
    let top_val = match di.domain {
        Domain::Nat => Value::Nat(1),
        Domain::Pair => Value::Pair(0, 1),
    };
    // achievable values per size for argument terms
    let arg_constructor_only = mode == BoundMode::Crc;
    let mut table: Vec<BTreeSet<Value>> = vec![BTreeSet::new(); n + 1];
    let arg_symbols: Vec<Symbol> = sys
        .sig
        .symbols()
        .filter(|&f| !arg_constructor_only || sys.sig.kind(f) == SymbolKind::Constructor)
        .collect();
    for size in 1..=n {
        let mut bucket = BTreeSet::new();
        for &f in &arg_symbols {
            let arity = sys.sig.arity(f);
            let m = sys.rule_count_for(f);
            apply_combos(&table, arity, size.saturating_sub(1), &mut |vals| {
                let mut args = vals.to_vec();
                for _ in 0..m {
                    args.push(top_val);
                }
                if let Ok(v) = di.apply(f, &args) {
                    bucket.insert(v);
                }
            });
        }
        table[size] = bucket;
    }
    let mut best: Option<u64> = None;
    if mode == BoundMode::Cdc {
        for bucket in table.iter() {
            for v in bucket {
                best = Some(best.map_or(v.cost(), |b| b.max(v.cost())));
            }
        }
    } else {
        for size in 1..=n {
            for f in sys.defined_symbols() {
                let arity = sys.sig.arity(f);
                let m = sys.rule_count_for(f);
                apply_combos(&table, arity, size - 1, &mut |vals| {
                    let mut args = vals.to_vec();
                    for _ in 0..m {
                        args.push(top_val);
                    }
                    if let Ok(v) = di.apply(f, &args) {
                        best = Some(best.map_or(v.cost(), |b| b.max(v.cost())));
                    }
                });
            }
        }
    }
    best.ok_or(InterpError::NoGroundTerms)
}

fn apply_combos(
    table: &[BTreeSet<Value>],
    arity: usize,
    size_left: usize,
    emit: &mut dyn FnMut(&[Value]),
) {
    fn go(
        table: &[BTreeSet<Value>],
        remaining: usize,
        size_left: usize,
        acc: &mut Vec<Value>,
        emit: &mut dyn FnMut(&[Value]),
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
            for v in &table[s] {
                acc.push(*v);
                go(table, remaining - 1, size_left - s, acc, emit);
                acc.pop();
            }
        }
    }
    if arity == 0 {
        if size_left == 0 {
            emit(&[]);
        }
        return;
    }
    go(table, arity, size_left, &mut Vec::new(), emit);
}

/// Verifies the linear-sum premise `sum of J tables <= K*(x1+..+xn) + M` for
/// every symbol on the grid and returns `M*(K^0 + ... + K^(n-1))`.
pub fn bound_general(
    sys: &Cctrs,
    interp: &Interpretation,
    k_coeff: u64,
    m_const: u64,
    n: usize,
    grid: u64,
) -> Result<u64, InterpError> {
    for f in sys.sig.symbols() {
        let arity = sys.sig.arity(f);
        let m = sys.rule_count_for(f);
        let mut tables = Vec::new();
        for i in 0..=m {
            let e = interp.fun.get(&(f, i)).cloned().ok_or_else(|| {
                InterpError::MissingComponent(format!("FUN {i} {}", sys.sig.name(f)))
            })?;
            tables.push(e);
        }
        let mut assignment = vec![0u64; arity];
        loop {
            let mut sum: u64 = 0;
            for e in &tables {
                sum = sum
                    .checked_add(e.eval(&Ctx::Scalars(&assignment))?)
                    .ok_or(EvalError::Overflow)?;
            }
            let arg_sum: u64 = assignment.iter().sum();
            let limit = k_coeff
                .checked_mul(arg_sum)
                .and_then(|v| v.checked_add(m_const))
                .ok_or(EvalError::Overflow)?;
            if sum > limit {
                return Err(InterpError::UnverifiedPremise {
                    symbol: sys.sig.name(f).to_string(),
                    valuation: assignment.clone(),
                });
            }
            let mut kk = 0;
            loop {
                if kk == arity {
                    break;
                }
                assignment[kk] += 1;
                if assignment[kk] <= grid {
                    break;
                }
                assignment[kk] = 0;
                kk += 1;
            }
            if kk == arity {
                break;
            }
        }
    }
    let mut total: u64 = 0;
    let mut power: u64 = 1;
    for i in 0..n {
        total = total
            .checked_add(m_const.checked_mul(power).ok_or(EvalError::Overflow)?)
            .ok_or(EvalError::Overflow)?;
        if i + 1 < n {
            power = power.checked_mul(k_coeff).ok_or(EvalError::Overflow)?;
        }
    }
    Ok(total)
}
