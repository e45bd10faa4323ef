//! Cost-size interpretations.

mod bounded;
mod check;
mod eval;
mod expr;
mod normal;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lex::{lex_line, Cursor, Tok};
use crate::strs::Strs;
use crate::types::{Name, Signature, SimpleType, SymbolKind};

pub use bounded::{check_poly_bounded, PolyBoundReport};
pub use check::{
    check_monotonicity, check_rule, check_system, CheckMode, CheckOptions, Counterexample, Overall,
    SystemReport, Verdict, Which,
};
pub use eval::{Analysis, Domain, Evaluator, Numeric, Symbolic, Valuation, Value};
pub use expr::{parse_lambda, CsExpr, Lambda};
pub use normal::{Monomial, NormalPoly};

/// Interpretation of one symbol.
#[derive(Clone, Debug)]
pub struct SymbolInterp {
    pub size: Arc<Lambda>,
    pub cost: Arc<Lambda>,
}

/// How a binder is used: a number or a function of some arity.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BinderKind {
    Num,
    Fun(usize),
}

/// Binder shapes of the size function of a symbol of type `ty`.
pub fn size_binders(ty: &SimpleType) -> Vec<BinderKind> {
    ty.uncurry().0.into_iter().map(binder_of).collect()
}

/// Binder shapes of the cost function: a (cost, size) pair per higher-order argument.
pub fn cost_binders(ty: &SimpleType) -> Vec<BinderKind> {
    let mut out = Vec::new();
    for a in ty.uncurry().0 {
        let k = binder_of(a);
        if k != BinderKind::Num {
            out.push(k);
        }
        out.push(k);
    }
    out
}

fn binder_of(ty: &SimpleType) -> BinderKind {
    if ty.is_base() {
        BinderKind::Num
    } else {
        BinderKind::Fun(ty.arity())
    }
}

/// A cost-size interpretation for every symbol of a signature.
#[derive(Clone, Debug)]
pub struct CsInterp {
    pub signature: Signature,
    pub symbols: BTreeMap<Name, SymbolInterp>,
    /// Upper bounds on a sort's size domain.
    pub bounds: BTreeMap<Name, u64>,
}

impl CsInterp {
    pub fn get(&self, f: &str) -> Result<&SymbolInterp> {
        self.symbols
            .get(f)
            .ok_or_else(|| Error::invalid(format!("no interpretation for {f}")))
    }

    pub fn bound(&self, sort: &str) -> Option<u64> {
        self.bounds.get(sort).copied()
    }

    /// Adds or replaces the interpretation of `f`, checking binder shapes.
    pub fn set(&mut self, f: &str, size: Lambda, cost: Lambda) -> Result<()> {
        let decl = self
            .signature
            .symbol(f)
            .ok_or_else(|| Error::invalid(format!("unknown symbol {f}")))?;
        check_shape(f, "size", &size, &size_binders(&decl.ty))?;
        check_shape(f, "cost", &cost, &cost_binders(&decl.ty))?;
        self.symbols.insert(
            f.into(),
            SymbolInterp {
                size: Arc::new(size),
                cost: Arc::new(cost),
            },
        );
        Ok(())
    }
}

fn check_shape(f: &str, what: &str, lam: &Lambda, kinds: &[BinderKind]) -> Result<()> {
    if lam.binders.len() != kinds.len() {
        return Err(Error::invalid(format!(
            "{what} {f}: expected {} binders, found {}",
            kinds.len(),
            lam.binders.len()
        )));
    }
    let kind_of = |n: &str| lam.binders.iter().position(|b| &**b == n).map(|i| kinds[i]);
    let mut bad = None;
    check_uses(&lam.body, &kind_of, &mut bad);
    match bad {
        Some(msg) => Err(Error::invalid(format!("{what} {f}: {msg}"))),
        None => Ok(()),
    }
}

fn check_uses(e: &CsExpr, kind_of: &dyn Fn(&str) -> Option<BinderKind>, bad: &mut Option<String>) {
    match e {
        CsExpr::Num(_) => {}
        CsExpr::Var(n) => {
            if kind_of(n) != Some(BinderKind::Num) {
                bad.get_or_insert_with(|| format!("{n} is not a numeric binder"));
            }
        }
        CsExpr::Add(a, b)
        | CsExpr::Mul(a, b)
        | CsExpr::Max(a, b)
        | CsExpr::Monus(a, b)
        | CsExpr::Pow(a, b) => {
            check_uses(a, kind_of, bad);
            check_uses(b, kind_of, bad);
        }
        CsExpr::App(g, args) => {
            if kind_of(g) != Some(BinderKind::Fun(args.len())) {
                bad.get_or_insert_with(|| {
                    format!(
                        "{g} is not a function binder taking {} arguments",
                        args.len()
                    )
                });
            }
            for a in args {
                check_uses(a, kind_of, bad);
            }
        }
    }
}

fn symbol_token(c: &mut Cursor) -> Result<String> {
    match c.next() {
        Some(Tok::Ident(s)) => Ok(s.clone()),
        Some(Tok::Cons) => Ok("cons".into()),
        Some(Tok::AddB) => Ok("addB".into()),
        _ => Err(c.error("expected a symbol name")),
    }
}

/// Parses a `.csi` file against a rewriting system.
pub fn parse_interp(text: &str, strs: &Strs) -> Result<CsInterp> {
    let sig = &strs.signature;
    let mut sizes: BTreeMap<Name, (usize, Lambda)> = BTreeMap::new();
    let mut costs: BTreeMap<Name, (usize, Lambda)> = BTreeMap::new();
    let mut bounds = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex_line(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(&toks, line);
        let kw = c.ident("`size`, `cost` or `bound`")?;
        match kw {
            "bound" => {
                let sort = c.ident("a sort name")?;
                if !sig.has_sort(sort) {
                    return Err(Error::semantic(line, format!("unknown sort {sort}")));
                }
                let n = c.ident("a number")?;
                let n: u64 = n.parse().map_err(|_| c.error("expected a number"))?;
                c.expect_end()?;
                bounds.insert(Name::from(sort), n);
            }
            "size" | "cost" => {
                let f = symbol_token(&mut c)?;
                c.expect(&Tok::Eq, "`=`")?;
                let lam = expr::parse_lambda_tokens(&mut c)?;
                c.expect_end()?;
                let decl = sig
                    .symbol(&f)
                    .ok_or_else(|| Error::semantic(line, format!("unknown symbol {f}")))?;
                let kinds = if kw == "size" {
                    size_binders(&decl.ty)
                } else {
                    cost_binders(&decl.ty)
                };
                check_shape(&f, kw, &lam, &kinds)
                    .map_err(|e| Error::semantic(line, e.to_string()))?;
                let map = if kw == "size" { &mut sizes } else { &mut costs };
                if let Some((prev, _)) = map.insert(Name::from(f.as_str()), (line, lam)) {
                    return Err(Error::semantic(
                        line,
                        format!("{kw} {f} already given on line {prev}"),
                    ));
                }
            }
            other => return Err(Error::semantic(line, format!("unknown keyword {other}"))),
        }
    }
    let mut symbols = BTreeMap::new();
    for d in sig.symbols() {
        let size = sizes.remove(&d.name).map(|x| x.1);
        let cost = costs.remove(&d.name).map(|x| x.1);
        let (size, cost) = match (size, cost, d.kind) {
            (Some(s), Some(c), _) => (s, c),
            (s, c, SymbolKind::Constructor) => (
                s.unwrap_or_else(|| Lambda::constant(size_binders(&d.ty).len(), 0)),
                c.unwrap_or_else(|| Lambda::constant(cost_binders(&d.ty).len(), 0)),
            ),
            (_, _, SymbolKind::Oracle) => continue,
            (s, _, _) => {
                let which = if s.is_none() { "size" } else { "cost" };
                return Err(Error::invalid(format!(
                    "missing {which} interpretation for {}",
                    d.name
                )));
            }
        };
        symbols.insert(
            d.name.clone(),
            SymbolInterp {
                size: Arc::new(size),
                cost: Arc::new(cost),
            },
        );
    }
    Ok(CsInterp {
        signature: sig.clone(),
        symbols,
        bounds,
    })
}

impl fmt::Display for CsInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (sort, n) in &self.bounds {
            writeln!(f, "bound {sort} {n}")?;
        }
        for d in self.signature.symbols() {
            if let Some(si) = self.symbols.get(&d.name) {
                writeln!(f, "size {} = {}", d.name, si.size)?;
                writeln!(f, "cost {} = {}", d.name, si.cost)?;
            }
        }
        Ok(())
    }
}
