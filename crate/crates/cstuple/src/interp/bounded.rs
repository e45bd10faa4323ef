use std::collections::HashMap;

use super::expr::CsExpr;
use super::normal::{Atom, Monomial, NormalPoly};
use super::CsInterp;
use crate::sopoly::{SoPoly, ARG, FC, FS};
use crate::strs::Strs;
use crate::types::{Direction, SimpleType, SymbolKind};

/// Outcome of checking that an interpretation is polynomially bounded for a main symbol.
#[derive(Clone, Debug)]
pub struct PolyBoundReport {
    pub ok: bool,
    pub failures: Vec<String>,
    /// `|w| ≤ ⟦w⟧ˢ ≤ mu·|w| + nu` for word encodings.
    pub mu: u64,
    pub nu: u64,
    /// Cost bound of the main symbol over `Fc`, `Fs`, `x`.
    pub poly: Option<SoPoly>,
}

fn constant(interp: &CsInterp, f: &str) -> Option<u64> {
    let si = interp.get(f).ok()?;
    si.size
        .body
        .eval(&|_| Err(crate::Error::Overflow), &|_, _| {
            Err(crate::Error::Overflow)
        })
        .ok()
}

fn normal_body(body: &CsExpr, rename: &HashMap<&str, &str>) -> Option<NormalPoly> {
    let renamed = rename_expr(body, rename);
    NormalPoly::from_expr(&renamed)
}

fn rename_expr(e: &CsExpr, m: &HashMap<&str, &str>) -> CsExpr {
    let r = |n: &crate::types::Name| {
        m.get(&**n)
            .map(|s| crate::types::Name::from(*s))
            .unwrap_or_else(|| n.clone())
    };
    match e {
        CsExpr::Num(n) => CsExpr::Num(*n),
        CsExpr::Var(x) => CsExpr::Var(r(x)),
        CsExpr::Add(a, b) => CsExpr::add(rename_expr(a, m), rename_expr(b, m)),
        CsExpr::Mul(a, b) => CsExpr::mul(rename_expr(a, m), rename_expr(b, m)),
        CsExpr::Max(a, b) => CsExpr::max(rename_expr(a, m), rename_expr(b, m)),
        CsExpr::Monus(a, b) => CsExpr::monus(rename_expr(a, m), rename_expr(b, m)),
        CsExpr::Pow(a, b) => CsExpr::Pow(Box::new(rename_expr(a, m)), Box::new(rename_expr(b, m))),
        CsExpr::App(f, args) => CsExpr::App(r(f), args.iter().map(|a| rename_expr(a, m)).collect()),
    }
}

fn linear_in(p: &NormalPoly, vars: &[&str]) -> Option<u64> {
    let mut want: Vec<Monomial> = Vec::new();
    for v in vars {
        let mut m = Monomial::default();
        m.0.insert(Atom::Var((*v).into()), 1);
        want.push(m);
    }
    let c = p.constant_term();
    let rest: Vec<_> = p.0.iter().filter(|(m, _)| !m.0.is_empty()).collect();
    if rest.len() != want.len() || !want.iter().all(|m| p.coefficient(m) == 1) {
        return None;
    }
    Some(c)
}

/// Checks word sizes are proportional to length, constructors are free, and the main symbol's
/// cost lies in the second-order polynomial fragment.
pub fn check_poly_bounded(interp: &CsInterp, strs: &Strs, main: &str) -> PolyBoundReport {
    let sig = &strs.signature;
    let mut failures = Vec::new();
    if !sig.has_sort("word") {
        failures.push("no sort word".to_string());
    } else if sig.direction("word") != Direction::Desc {
        failures.push("sort word must be ordered descending".to_string());
    }
    for d in sig.symbols().filter(|d| d.kind == SymbolKind::Constructor) {
        let Ok(si) = interp.get(&d.name) else {
            continue;
        };
        if NormalPoly::from_expr(&si.cost.body) != Some(NormalPoly::default()) {
            failures.push(format!(
                "constructor {} has non-zero cost {}",
                d.name, si.cost
            ));
        }
    }
    let bits = (constant(interp, "o"), constant(interp, "i"));
    let nu = constant(interp, "[]");
    if bits.0.is_none() || bits.1.is_none() || nu.is_none() {
        failures.push("word constructors o, i, [] need constant sizes".to_string());
    }
    let bit_max = bits.0.unwrap_or(0).max(bits.1.unwrap_or(0));
    let bits_zero = bits == (Some(0), Some(0));
    let mut slope = None;
    match interp.get("cons") {
        Ok(si) if si.size.binders.len() == 2 => {
            let m: HashMap<&str, &str> = [(&*si.size.binders[0], "x"), (&*si.size.binders[1], "y")]
                .into_iter()
                .collect();
            let p = normal_body(&si.size.body, &m);
            match p.as_ref().and_then(|p| linear_in(p, &["x", "y"])) {
                Some(c) if c >= 1 => slope = Some(c),
                _ => match p.as_ref().and_then(|p| linear_in(p, &["y"])) {
                    Some(c) if c >= 1 && bits_zero => slope = Some(c),
                    _ => failures.push(format!(
                        "size of :: must be x + y + c with c ≥ 1, found {}",
                        si.size
                    )),
                },
            }
        }
        _ => failures.push("no binary constructor ::".to_string()),
    }
    let mu = bit_max + slope.unwrap_or(0);
    let word = SimpleType::base("word");
    let want = SimpleType::curried(
        vec![SimpleType::arrow(word.clone(), word.clone()), word.clone()],
        word,
    );
    let mut poly = None;
    match sig.symbol(main) {
        None => failures.push(format!("unknown main symbol {main}")),
        Some(d) if d.ty != want => failures.push(format!(
            "main symbol {main} has type {} instead of {want}",
            d.ty
        )),
        Some(_) => match interp.get(main) {
            Err(e) => failures.push(e.to_string()),
            Ok(si) => {
                let b = &si.cost.binders;
                let m: HashMap<&str, &str> = [(&*b[0], FC), (&*b[1], FS), (&*b[2], ARG)]
                    .into_iter()
                    .collect();
                match SoPoly::from_expr(&rename_expr(&si.cost.body, &m)) {
                    Some(p) => poly = Some(p),
                    None => failures.push(format!(
                        "cost of {main} is not a second-order polynomial: {}",
                        si.cost
                    )),
                }
            }
        },
    }
    PolyBoundReport {
        ok: failures.is_empty(),
        failures,
        mu,
        nu: nu.unwrap_or(0),
        poly,
    }
}
