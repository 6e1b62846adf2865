//! Arithmetic expressions over naturals for interpretation tables:
//! `+`, `*`, truncated `-`, `max(a,b)`, `pow(b,e)` with a constant base,
//! parameter references, and cost/size projections of pair parameters.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(u64),
    /// Scalar parameter reference (0-based).
    Ref(usize),
    /// Cost component of a pair parameter.
    CostOf(usize),
    /// Size component of a pair parameter.
    SizeOf(usize),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Monus(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Pow(u64, Box<Expr>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("unbound parameter reference {0}")]
    UnboundReference(usize),
    #[error("scalar reference to a pair parameter; use cost(..) or size(..)")]
    ScalarRefToPair,
    #[error("cost/size projection of a scalar parameter")]
    ProjectionOfScalar,
}

/// Evaluation context: how parameter references resolve.
pub enum Ctx<'a> {
    Scalars(&'a [u64]),
    Pairs(&'a [(u64, u64)]),
}

impl Ctx<'_> {
    fn scalar(&self, i: usize) -> Result<u64, EvalError> {
        match self {
            Ctx::Scalars(v) => v.get(i).copied().ok_or(EvalError::UnboundReference(i)),
            Ctx::Pairs(_) => Err(EvalError::ScalarRefToPair),
        }
    }

    fn cost(&self, i: usize) -> Result<u64, EvalError> {
        match self {
            Ctx::Pairs(v) => v.get(i).map(|p| p.0).ok_or(EvalError::UnboundReference(i)),
            Ctx::Scalars(_) => Err(EvalError::ProjectionOfScalar),
        }
    }

    fn size(&self, i: usize) -> Result<u64, EvalError> {
        match self {
            Ctx::Pairs(v) => v.get(i).map(|p| p.1).ok_or(EvalError::UnboundReference(i)),
            Ctx::Scalars(_) => Err(EvalError::ProjectionOfScalar),
        }
    }
}

impl Expr {
    pub fn eval(&self, ctx: &Ctx<'_>) -> Result<u64, EvalError> {
        match self {
            Expr::Const(n) => Ok(*n),
            Expr::Ref(i) => ctx.scalar(*i),
            Expr::CostOf(i) => ctx.cost(*i),
            Expr::SizeOf(i) => ctx.size(*i),
            Expr::Add(a, b) => a
                .eval(ctx)?
                .checked_add(b.eval(ctx)?)
                .ok_or(EvalError::Overflow),
            Expr::Mul(a, b) => a
                .eval(ctx)?
                .checked_mul(b.eval(ctx)?)
                .ok_or(EvalError::Overflow),
            Expr::Monus(a, b) => Ok(a.eval(ctx)?.saturating_sub(b.eval(ctx)?)),
            Expr::Max(a, b) => Ok(a.eval(ctx)?.max(b.eval(ctx)?)),
            Expr::Pow(base, e) => {
                let e = e.eval(ctx)?;
                let e32: u32 = e.try_into().map_err(|_| EvalError::Overflow)?;
                base.checked_pow(e32).ok_or(EvalError::Overflow)
            }
        }
    }

    /// Replaces every parameter reference through `map`; used when recipe
    /// tables are inlined into the argument layout of a wider symbol.
    pub fn remap(&self, map: &dyn Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Ref(_) | Expr::CostOf(_) | Expr::SizeOf(_) => map(self),
            Expr::Add(a, b) => Expr::Add(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Monus(a, b) => Expr::Monus(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Max(a, b) => Expr::Max(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Pow(base, e) => Expr::Pow(*base, Box::new(e.remap(map))),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprParseError {
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unexpected token `{0}`")]
    Unexpected(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("pow requires a constant base of at least 2")]
    BadPowBase,
    #[error("parameter `{0}` is a pair; use cost({0}) or size({0})")]
    PairParameter(String),
    #[error("cost/size projection applies to parameters, got `{0}`")]
    BadProjection(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(u64),
    Ident(String),
    LPar,
    RPar,
    Comma,
    Plus,
    Star,
    Minus,
}

fn lex(s: &str) -> Result<Vec<Tok>, ExprParseError> {
    let mut out = Vec::new();
    let mut it = s.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '(' => {
                out.push(Tok::LPar);
                it.next();
            }
            ')' => {
                out.push(Tok::RPar);
                it.next();
            }
            ',' | ';' => {
                out.push(Tok::Comma);
                it.next();
            }
            '+' => {
                out.push(Tok::Plus);
                it.next();
            }
            '*' => {
                out.push(Tok::Star);
                it.next();
            }
            '-' => {
                out.push(Tok::Minus);
                it.next();
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while let Some(&(k, d)) = it.peek() {
                    if d.is_ascii_digit() {
                        j = k;
                        it.next();
                    } else {
                        break;
                    }
                }
                let n: u64 = s[i..=j].parse().map_err(|_| ExprParseError::UnexpectedEnd)?;
                out.push(Tok::Num(n));
            }
            c if c.is_alphanumeric() || c == '_' || c == '#' => {
                let mut j = i;
                while let Some(&(k, d)) = it.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '#' {
                        j = k;
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Ident(s[i..=j].to_string()));
            }
            other => return Err(ExprParseError::Unexpected(other.to_string())),
        }
    }
    Ok(out)
}

/// How identifiers resolve inside an expression.
pub struct ParamEnv<'a> {
    /// Parameter names in positional order.
    pub names: &'a [String],
    /// Pair-valued parameters require cost/size projections.
    pub pairs: bool,
}

struct P<'a> {
    toks: Vec<Tok>,
    pos: usize,
    env: &'a ParamEnv<'a>,
}

impl P<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.next();
                    let rhs = self.term()?;
                    lhs = Expr::Monus(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprParseError> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(&Tok::Star) {
            self.next();
            let rhs = self.atom()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn param(&self, name: &str) -> Result<usize, ExprParseError> {
        self.env
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ExprParseError::UnknownParameter(name.to_string()))
    }

    fn atom(&mut self) -> Result<Expr, ExprParseError> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(Expr::Const(n)),
            Some(Tok::LPar) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RPar) => Ok(e),
                    _ => Err(ExprParseError::UnexpectedEnd),
                }
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LPar) {
                    self.next();
                    match name.as_str() {
                        "pow" => {
                            let base = match self.next() {
                                Some(Tok::Num(b)) if b >= 2 => b,
                                _ => return Err(ExprParseError::BadPowBase),
                            };
                            if self.next() != Some(Tok::Comma) {
                                return Err(ExprParseError::UnexpectedEnd);
                            }
                            let e = self.expr()?;
                            if self.next() != Some(Tok::RPar) {
                                return Err(ExprParseError::UnexpectedEnd);
                            }
                            Ok(Expr::Pow(base, Box::new(e)))
                        }
                        "max" => {
                            let a = self.expr()?;
                            if self.next() != Some(Tok::Comma) {
                                return Err(ExprParseError::UnexpectedEnd);
                            }
                            let b = self.expr()?;
                            if self.next() != Some(Tok::RPar) {
                                return Err(ExprParseError::UnexpectedEnd);
                            }
                            Ok(Expr::Max(Box::new(a), Box::new(b)))
                        }
                        "cost" | "size" => {
                            let arg = match self.next() {
                                Some(Tok::Ident(p)) => p,
                                other => {
                                    return Err(ExprParseError::BadProjection(format!(
                                        "{other:?}"
                                    )))
                                }
                            };
                            if self.next() != Some(Tok::RPar) {
                                return Err(ExprParseError::UnexpectedEnd);
                            }
                            let idx = self.param(&arg)?;
                            if name == "cost" {
                                Ok(Expr::CostOf(idx))
                            } else {
                                Ok(Expr::SizeOf(idx))
                            }
                        }
                        _ => Err(ExprParseError::Unexpected(name)),
                    }
                } else {
                    let idx = self.param(&name)?;
                    if self.env.pairs {
                        Err(ExprParseError::PairParameter(name))
                    } else {
                        Ok(Expr::Ref(idx))
                    }
                }
            }
            Some(other) => Err(ExprParseError::Unexpected(format!("{other:?}"))),
            None => Err(ExprParseError::UnexpectedEnd),
        }
    }
}

/// Parses a scalar expression over the given parameters.
pub fn parse_expr(text: &str, env: &ParamEnv<'_>) -> Result<Expr, ExprParseError> {
    let toks = lex(text)?;
    let mut p = P { toks, pos: 0, env };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ExprParseError::Unexpected(format!("{:?}", p.toks[p.pos])));
    }
    Ok(e)
}

/// Parses either `expr` (scalar) or `(expr, expr)` (cost/size pair).
pub fn parse_entry_body(
    text: &str,
    env: &ParamEnv<'_>,
) -> Result<(Expr, Option<Expr>), ExprParseError> {
    let toks = lex(text)?;
    // a pair is a parenthesized pair of expressions covering the whole body
    if toks.first() == Some(&Tok::LPar) && toks.last() == Some(&Tok::RPar) {
        let mut p = P {
            toks: toks.clone(),
            pos: 1,
            env,
        };
        if let Ok(first) = p.expr() {
            if p.peek() == Some(&Tok::Comma) {
                p.next();
                let second = p.expr()?;
                if p.next() == Some(Tok::RPar) && p.pos == p.toks.len() {
                    return Ok((first, Some(second)));
                }
            }
        }
    }
    parse_expr(text, env).map(|e| (e, None))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(n) => write!(f, "{n}"),
            Expr::Ref(i) => write!(f, "p{i}"),
            Expr::CostOf(i) => write!(f, "cost(p{i})"),
            Expr::SizeOf(i) => write!(f, "size(p{i})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Monus(a, b) => write!(f, "({a} - {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::Pow(base, e) => write!(f, "pow({base}, {e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn arithmetic() {
        let names = env(&["x1", "x2"]);
        let env = ParamEnv {
            names: &names,
            pairs: false,
        };
        let e = parse_expr("2*x1 + x2 + 1", &env).unwrap();
        assert_eq!(e.eval(&Ctx::Scalars(&[3, 0])).unwrap(), 7);
    }

    #[test]
    fn monus_truncates() {
        let names = env(&["x1"]);
        let env = ParamEnv {
            names: &names,
            pairs: false,
        };
        let e = parse_expr("pow(3, x1) - 1", &env).unwrap();
        assert_eq!(e.eval(&Ctx::Scalars(&[0])).unwrap(), 0);
        assert_eq!(e.eval(&Ctx::Scalars(&[2])).unwrap(), 8);
    }

    #[test]
    fn pair_projections() {
        let names = env(&["x"]);
        let env = ParamEnv {
            names: &names,
            pairs: true,
        };
        let (c, s) = parse_entry_body("(cost(x), size(x)+1)", &env).unwrap();
        let s = s.unwrap();
        assert_eq!(c.eval(&Ctx::Pairs(&[(3, 5)])).unwrap(), 3);
        assert_eq!(s.eval(&Ctx::Pairs(&[(3, 5)])).unwrap(), 6);
        assert!(parse_expr("x + 1", &env).is_err());
    }

    #[test]
    fn pow_base_must_be_constant() {
        let names = env(&["x"]);
        let env = ParamEnv {
            names: &names,
            pairs: false,
        };
        assert!(parse_expr("pow(x, 2)", &env).is_err());
        assert!(parse_expr("pow(1, x)", &env).is_err());
    }
}
