//! Second-order polynomials of rank (1,1), the derived bounds built from them, and finite oracle tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interp::{CsExpr, NormalPoly};
use crate::lex::{lex_line, Cursor, Tok};
use crate::types::Name;
use crate::word::Word;

/// `n | x | P+Q | P*Q | F(Q)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SoPoly {
    Const(u64),
    Var(Name),
    Add(Vec<SoPoly>),
    Mul(Vec<SoPoly>),
    App(Name, Box<SoPoly>),
}

/// A coefficient that is either a number or a named symbolic constant.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Coef {
    Num(u64),
    Sym(Name),
}

impl Coef {
    fn poly(&self) -> SoPoly {
        match self {
            Coef::Num(n) => SoPoly::Const(*n),
            Coef::Sym(s) => SoPoly::Var(s.clone()),
        }
    }
}

impl From<u64> for Coef {
    fn from(n: u64) -> Coef {
        Coef::Num(n)
    }
}

impl From<&str> for Coef {
    fn from(s: &str) -> Coef {
        Coef::Sym(s.into())
    }
}

/// Assignment of numbers to variables and monotone functions to function names.
#[derive(Default)]
pub struct PolyEnv<'a> {
    vars: HashMap<String, u64>,
    funs: HashMap<String, Box<dyn Fn(u64) -> u64 + 'a>>,
}

impl<'a> PolyEnv<'a> {
    pub fn new() -> Self {
        PolyEnv {
            vars: HashMap::new(),
            funs: HashMap::new(),
        }
    }

    pub fn var(mut self, x: &str, v: u64) -> Self {
        self.vars.insert(x.into(), v);
        self
    }

    pub fn fun(mut self, f: &str, g: impl Fn(u64) -> u64 + 'a) -> Self {
        self.funs.insert(f.into(), Box::new(g));
        self
    }
}

impl SoPoly {
    pub fn var(x: &str) -> SoPoly {
        SoPoly::Var(x.into())
    }

    pub fn app(f: &str, arg: SoPoly) -> SoPoly {
        SoPoly::App(f.into(), Box::new(arg))
    }

    pub fn add(a: SoPoly, b: SoPoly) -> SoPoly {
        SoPoly::Add(vec![a, b])
    }

    pub fn mul(a: SoPoly, b: SoPoly) -> SoPoly {
        SoPoly::Mul(vec![a, b])
    }

    pub fn eval(&self, env: &PolyEnv) -> Result<u64> {
        match self {
            SoPoly::Const(n) => Ok(*n),
            SoPoly::Var(x) => env
                .vars
                .get(&**x)
                .copied()
                .ok_or_else(|| Error::invalid(format!("unbound variable {x}"))),
            SoPoly::Add(items) => items.iter().try_fold(0u64, |acc, p| {
                acc.checked_add(p.eval(env)?).ok_or(Error::Overflow)
            }),
            SoPoly::Mul(items) => items.iter().try_fold(1u64, |acc, p| {
                acc.checked_mul(p.eval(env)?).ok_or(Error::Overflow)
            }),
            SoPoly::App(f, arg) => {
                let g = env
                    .funs
                    .get(&**f)
                    .ok_or_else(|| Error::invalid(format!("unbound function {f}")))?;
                Ok(g(arg.eval(env)?))
            }
        }
    }

    /// Replaces variables and function applications; `fun` receives the already rewritten argument.
    pub fn substitute(
        &self,
        var: &dyn Fn(&str) -> Option<SoPoly>,
        fun: &dyn Fn(&str, &SoPoly) -> Option<SoPoly>,
    ) -> SoPoly {
        match self {
            SoPoly::Const(n) => SoPoly::Const(*n),
            SoPoly::Var(x) => var(x).unwrap_or_else(|| self.clone()),
            SoPoly::Add(items) => {
                SoPoly::Add(items.iter().map(|p| p.substitute(var, fun)).collect())
            }
            SoPoly::Mul(items) => {
                SoPoly::Mul(items.iter().map(|p| p.substitute(var, fun)).collect())
            }
            SoPoly::App(f, arg) => {
                let arg = arg.substitute(var, fun);
                fun(f, &arg).unwrap_or_else(|| SoPoly::App(f.clone(), Box::new(arg)))
            }
        }
    }

    /// Flattens nested sums and products and folds constants into the place of the first one.
    pub fn simplify(&self) -> SoPoly {
        match self {
            SoPoly::Const(_) | SoPoly::Var(_) => self.clone(),
            SoPoly::App(f, arg) => SoPoly::App(f.clone(), Box::new(arg.simplify())),
            SoPoly::Add(items) => {
                let mut flat = Vec::new();
                for p in items {
                    match p.simplify() {
                        SoPoly::Add(inner) => flat.extend(inner),
                        q => flat.push(q),
                    }
                }
                fold_constants(flat, 0, |a, b| a.saturating_add(b), SoPoly::Add)
            }
            SoPoly::Mul(items) => {
                let mut flat = Vec::new();
                for p in items {
                    match p.simplify() {
                        SoPoly::Mul(inner) => flat.extend(inner),
                        q => flat.push(q),
                    }
                }
                if flat.contains(&SoPoly::Const(0)) {
                    return SoPoly::Const(0);
                }
                fold_constants(flat, 1, |a, b| a.saturating_mul(b), SoPoly::Mul)
            }
        }
    }

    pub fn to_expr(&self) -> CsExpr {
        match self {
            SoPoly::Const(n) => CsExpr::Num(*n),
            SoPoly::Var(x) => CsExpr::Var(x.clone()),
            SoPoly::Add(items) => items
                .iter()
                .map(SoPoly::to_expr)
                .reduce(CsExpr::add)
                .unwrap_or(CsExpr::Num(0)),
            SoPoly::Mul(items) => items
                .iter()
                .map(SoPoly::to_expr)
                .reduce(CsExpr::mul)
                .unwrap_or(CsExpr::Num(1)),
            SoPoly::App(f, arg) => CsExpr::App(f.clone(), vec![arg.to_expr()]),
        }
    }

    /// Converts an expression of the polynomial fragment with one-argument applications.
    pub fn from_expr(e: &CsExpr) -> Option<SoPoly> {
        Some(match e {
            CsExpr::Num(n) => SoPoly::Const(*n),
            CsExpr::Var(x) => SoPoly::Var(x.clone()),
            CsExpr::Add(a, b) => SoPoly::add(SoPoly::from_expr(a)?, SoPoly::from_expr(b)?),
            CsExpr::Mul(a, b) => SoPoly::mul(SoPoly::from_expr(a)?, SoPoly::from_expr(b)?),
            CsExpr::App(f, args) if args.len() == 1 => {
                SoPoly::App(f.clone(), Box::new(SoPoly::from_expr(&args[0])?))
            }
            _ => return None,
        })
    }

    /// Sum-of-monomials form, equal for polynomials that are equal as functions.
    pub fn canonical(&self) -> String {
        NormalPoly::from_expr(&self.to_expr())
            .map(|p| p.to_string())
            .unwrap_or_else(|| "overflow".into())
    }

    /// Arguments of every occurrence of `f`, outermost first.
    pub fn occurrences<'a>(&'a self, f: &str, out: &mut Vec<&'a SoPoly>) {
        match self {
            SoPoly::Const(_) | SoPoly::Var(_) => {}
            SoPoly::Add(items) | SoPoly::Mul(items) => {
                items.iter().for_each(|p| p.occurrences(f, out))
            }
            SoPoly::App(g, arg) => {
                if &**g == f {
                    out.push(arg);
                }
                arg.occurrences(f, out);
            }
        }
    }
}

fn fold_constants(
    items: Vec<SoPoly>,
    unit: u64,
    op: fn(u64, u64) -> u64,
    wrap: fn(Vec<SoPoly>) -> SoPoly,
) -> SoPoly {
    let total = items.iter().fold(unit, |acc, p| {
        if let SoPoly::Const(n) = p {
            op(acc, *n)
        } else {
            acc
        }
    });
    let mut out = Vec::new();
    let mut placed = false;
    for p in items {
        match p {
            SoPoly::Const(_) if placed => {}
            SoPoly::Const(_) => {
                placed = true;
                if total != unit {
                    out.push(SoPoly::Const(total));
                }
            }
            q => out.push(q),
        }
    }
    match out.len() {
        0 => SoPoly::Const(total),
        1 => out.pop().expect("one element"),
        _ => wrap(out),
    }
}

fn fmt_prec(p: &SoPoly, f: &mut fmt::Formatter<'_>, in_product: bool) -> fmt::Result {
    match p {
        SoPoly::Const(n) => write!(f, "{n}"),
        SoPoly::Var(x) => write!(f, "{x}"),
        SoPoly::App(g, arg) => {
            write!(f, "{g}(")?;
            fmt_prec(arg, f, false)?;
            f.write_str(")")
        }
        SoPoly::Add(items) if items.is_empty() => f.write_str("0"),
        SoPoly::Mul(items) if items.is_empty() => f.write_str("1"),
        SoPoly::Add(items) => {
            if in_product {
                f.write_str("(")?;
            }
            for (i, q) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                fmt_prec(q, f, false)?;
            }
            if in_product {
                f.write_str(")")?;
            }
            Ok(())
        }
        SoPoly::Mul(items) => {
            for (i, q) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                fmt_prec(q, f, true)?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for SoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, f, false)
    }
}

fn parse_sum(c: &mut Cursor) -> Result<SoPoly> {
    let mut items = vec![parse_product(c)?];
    while c.peek() == Some(&Tok::Plus) {
        c.next();
        items.push(parse_product(c)?);
    }
    Ok(if items.len() == 1 {
        items.pop().expect("one")
    } else {
        SoPoly::Add(items)
    })
}

fn parse_product(c: &mut Cursor) -> Result<SoPoly> {
    let mut items = vec![parse_atom(c)?];
    while c.peek() == Some(&Tok::Star) {
        c.next();
        items.push(parse_atom(c)?);
    }
    Ok(if items.len() == 1 {
        items.pop().expect("one")
    } else {
        SoPoly::Mul(items)
    })
}

fn parse_atom(c: &mut Cursor) -> Result<SoPoly> {
    match c.peek() {
        Some(Tok::LParen) => {
            c.next();
            let p = parse_sum(c)?;
            c.expect(&Tok::RParen, "`)`")?;
            Ok(p)
        }
        Some(Tok::Ident(s)) => {
            c.next();
            if s.bytes().all(|b| b.is_ascii_digit()) {
                return s
                    .parse()
                    .map(SoPoly::Const)
                    .map_err(|_| c.error("number too large"));
            }
            if c.peek() == Some(&Tok::LParen) {
                c.next();
                let arg = parse_sum(c)?;
                c.expect(&Tok::RParen, "`)`")?;
                return Ok(SoPoly::App(s.as_str().into(), Box::new(arg)));
            }
            Ok(SoPoly::Var(s.as_str().into()))
        }
        _ => Err(c.error("expected a polynomial")),
    }
}

impl FromStr for SoPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<SoPoly> {
        let toks = lex_line(s, 1)?;
        let mut c = Cursor::new(&toks, 1);
        let p = parse_sum(&mut c)?;
        c.expect_end()?;
        Ok(p)
    }
}

/// Names used by the bound constructions.
pub const FC: &str = "Fc";
pub const FS: &str = "Fs";
pub const ARG: &str = "x";

/// Sum of the arguments of all `Fc` occurrences, with nested `Fc(..)` replaced by 1.
pub fn build_q(p: &SoPoly) -> SoPoly {
    let mut occ = Vec::new();
    p.occurrences(FC, &mut occ);
    let one = |f: &str, _: &SoPoly| (f == FC).then_some(SoPoly::Const(1));
    let items: Vec<SoPoly> = occ
        .into_iter()
        .map(|e| e.substitute(&|_| None, &one))
        .collect();
    SoPoly::Add(items).simplify()
}

/// `Q(λz.μ·G(z)+ν, μ·y+ν)` in variables `G`, `y`.
pub fn build_b(p: &SoPoly, mu: &Coef, nu: &Coef) -> SoPoly {
    let q = build_q(p);
    let scaled = |inner: SoPoly| SoPoly::add(SoPoly::mul(mu.poly(), inner), nu.poly());
    q.substitute(
        &|x| (x == ARG).then(|| scaled(SoPoly::var("y"))),
        &|f, arg| (f == FS).then(|| scaled(SoPoly::app("G", arg.clone()))),
    )
    .simplify()
}

/// `P(λz.1, λz.μ·F(z)+ν, μ·n+ν)` in variables `F`, `n`.
pub fn build_d(p: &SoPoly, mu: &Coef, nu: &Coef) -> SoPoly {
    let scaled = |inner: SoPoly| SoPoly::add(SoPoly::mul(mu.poly(), inner), nu.poly());
    p.substitute(
        &|x| (x == ARG).then(|| scaled(SoPoly::var("n"))),
        &|f, arg| match f {
            FC => Some(SoPoly::Const(1)),
            FS => Some(scaled(SoPoly::app("F", arg.clone()))),
            _ => None,
        },
    )
    .simplify()
}

/// A finite oracle `Word → Word` with an optional default answer.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleTable {
    pub entries: BTreeMap<Word, Word>,
    pub default: Option<Word>,
}

impl OracleTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, k: Word, v: Word) {
        self.entries.insert(k, v);
    }

    pub fn with_default(mut self, d: Option<Word>) -> Self {
        self.default = d;
        self
    }

    pub fn lookup(&self, w: &Word) -> Result<Word> {
        self.entries
            .get(w)
            .or(self.default.as_ref())
            .cloned()
            .ok_or_else(|| {
                Error::OracleMiss(if w.is_empty() {
                    "_".into()
                } else {
                    w.to_string()
                })
            })
    }

    /// Whether every word of length at most `n` has an explicit entry.
    pub fn covers_up_to(&self, n: usize) -> bool {
        if n >= 63 {
            return false;
        }
        let have = self.entries.keys().filter(|k| k.len() <= n).count() as u64;
        have == (1u64 << (n + 1)) - 1
    }
}

fn show(w: &Word) -> String {
    if w.is_empty() {
        "_".into()
    } else {
        w.to_string()
    }
}

impl fmt::Display for OracleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{} -> {}", show(k), show(v))?;
        }
        if let Some(d) = &self.default {
            writeln!(f, "* -> {}", show(d))?;
        }
        Ok(())
    }
}

impl FromStr for OracleTable {
    type Err = Error;
    /// Lines `<bits> -> <bits>`, `_` for the empty word, `* -> <bits>` for a default.
    fn from_str(text: &str) -> Result<OracleTable> {
        let mut t = OracleTable::new();
        for (i, raw) in text.lines().enumerate() {
            let line = crate::lex::strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once("->")
                .ok_or_else(|| Error::semantic(i + 1, "expected `<bits> -> <bits>`"))?;
            let (k, v) = (k.trim(), v.trim());
            let v: Word = v
                .parse()
                .map_err(|e: Error| Error::semantic(i + 1, e.to_string()))?;
            if k == "*" {
                t.default = Some(v);
                continue;
            }
            let k: Word = k
                .parse()
                .map_err(|e: Error| Error::semantic(i + 1, e.to_string()))?;
            if t.entries.insert(k.clone(), v).is_some() {
                return Err(Error::semantic(
                    i + 1,
                    format!("duplicate entry for {}", show(&k)),
                ));
            }
        }
        Ok(t)
    }
}

/// `max { |f(x)| : x ∈ A, |x| ≤ n }`, 0 for an empty set.
pub fn limitsize(table: &OracleTable, set: &[Word], n: u64) -> Result<u64> {
    let mut best = 0;
    for w in set {
        if w.len() as u64 <= n {
            best = best.max(table.lookup(w)?.len() as u64);
        }
    }
    Ok(best)
}

/// The length functional of the table's oracle, computed over the table's domain
/// plus the default answer when some word of length ≤ n is missing.
pub fn table_length(table: &OracleTable, n: u64) -> u64 {
    let mut best = table
        .entries
        .iter()
        .filter(|(k, _)| k.len() as u64 <= n)
        .map(|(_, v)| v.len() as u64)
        .max()
        .unwrap_or(0);
    if let Some(d) = &table.default {
        if !table.covers_up_to(n.min(63) as usize) {
            best = best.max(d.len() as u64);
        }
    }
    best
}
