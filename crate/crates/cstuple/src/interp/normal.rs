use std::collections::BTreeMap;
use std::fmt;

use super::expr::CsExpr;
use crate::types::Name;

/// An indeterminate: a variable or an uninterpreted function applied to normalized arguments.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Atom {
    Var(Name),
    App(Name, Vec<NormalPoly>),
}

/// Product of atoms with exponents; the empty product is the constant monomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Monomial(pub BTreeMap<Atom, u32>);

/// Sum of monomials with positive coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct NormalPoly(pub BTreeMap<Monomial, u64>);

impl NormalPoly {
    pub fn constant(n: u64) -> NormalPoly {
        let mut p = NormalPoly::default();
        if n > 0 {
            p.0.insert(Monomial::default(), n);
        }
        p
    }

    pub fn atom(a: Atom) -> NormalPoly {
        let mut m = Monomial::default();
        m.0.insert(a, 1);
        let mut p = NormalPoly::default();
        p.0.insert(m, 1);
        p
    }

    pub fn coefficient(&self, m: &Monomial) -> u64 {
        self.0.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u64 {
        self.coefficient(&Monomial::default())
    }

    pub fn add(&self, other: &NormalPoly) -> Option<NormalPoly> {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            let e = out.0.entry(m.clone()).or_insert(0);
            *e = e.checked_add(*c)?;
        }
        Some(out)
    }

    pub fn mul(&self, other: &NormalPoly) -> Option<NormalPoly> {
        let mut out = NormalPoly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m = m1.clone();
                for (a, k) in &m2.0 {
                    let e = m.0.entry(a.clone()).or_insert(0);
                    *e = e.checked_add(*k)?;
                }
                let c = c1.checked_mul(*c2)?;
                let e = out.0.entry(m).or_insert(0);
                *e = e.checked_add(c)?;
            }
        }
        Some(out)
    }

    /// Normal form of an expression in the `+`/`*`/application fragment; `None` outside it.
    pub fn from_expr(e: &CsExpr) -> Option<NormalPoly> {
        match e {
            CsExpr::Num(n) => Some(NormalPoly::constant(*n)),
            CsExpr::Var(x) => Some(NormalPoly::atom(Atom::Var(x.clone()))),
            CsExpr::Add(a, b) => NormalPoly::from_expr(a)?.add(&NormalPoly::from_expr(b)?),
            CsExpr::Mul(a, b) => NormalPoly::from_expr(a)?.mul(&NormalPoly::from_expr(b)?),
            CsExpr::App(f, args) => {
                let args = args
                    .iter()
                    .map(NormalPoly::from_expr)
                    .collect::<Option<Vec<_>>>()?;
                Some(NormalPoly::atom(Atom::App(f.clone(), args)))
            }
            CsExpr::Max(..) | CsExpr::Monus(..) | CsExpr::Pow(..) => None,
        }
    }

    /// `self ≥ other + slack` for every assignment, by coefficient domination.
    pub fn dominates(&self, other: &NormalPoly, slack: u64) -> bool {
        let Some(need) = self.constant_term().checked_sub(slack) else {
            return false;
        };
        if need < other.constant_term() {
            return false;
        }
        other
            .0
            .iter()
            .filter(|(m, _)| !m.0.is_empty())
            .all(|(m, c)| self.coefficient(m) >= *c)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(x) => write!(f, "{x}"),
            Atom::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for NormalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if *c != 1 || m.0.is_empty() {
                factors.push(c.to_string());
            }
            for (a, k) in &m.0 {
                for _ in 0..*k {
                    factors.push(a.to_string());
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}
