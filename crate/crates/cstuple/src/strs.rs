use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::Term;
use crate::types::{Direction, Name, Signature, SimpleType, SymbolKind};

#[derive(Clone, Debug)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl Rule {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Rule { lhs, rhs }
    }

    /// Checks the structural rule conditions against a signature.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        let head = self
            .lhs
            .head_symbol()
            .ok_or_else(|| Error::invalid(format!("lhs of `{self}` is not headed by a symbol")))?;
        match sig.symbol(head).map(|d| d.kind) {
            Some(SymbolKind::Defined) => {}
            _ => {
                return Err(Error::invalid(format!(
                    "lhs head `{head}` of `{self}` is not a defined symbol"
                )))
            }
        }
        if !self.lhs.ty().is_base() {
            return Err(Error::invalid(format!(
                "rule `{self}` does not have base type"
            )));
        }
        if self.lhs.ty() != self.rhs.ty() {
            return Err(Error::invalid(format!(
                "rule sides have different types: {} vs {}",
                self.lhs.ty(),
                self.rhs.ty()
            )));
        }
        let lvars = self.lhs.vars();
        for (v, ty) in self.rhs.vars() {
            match lvars.get(&v) {
                None => return Err(Error::invalid(format!("variable {v} not bound by lhs"))),
                Some(t) if *t != ty => {
                    return Err(Error::invalid(format!("variable {v} used at two types")))
                }
                _ => {}
            }
        }
        let mut bad = None;
        self.lhs.visit(&mut |t| {
            if t.as_app().is_some() && t.head().as_var().is_some() {
                bad = Some(t.clone());
            }
        });
        if let Some(t) = bad {
            return Err(Error::invalid(format!("applied variable `{t}` in lhs")));
        }
        Ok(())
    }
}

/// A simply-typed term rewriting system.
#[derive(Clone, Debug)]
pub struct Strs {
    pub signature: Signature,
    pub rules: Vec<Rule>,
    by_head: HashMap<Name, Vec<usize>>,
}

impl Strs {
    pub fn new(signature: Signature, rules: Vec<Rule>) -> Result<Strs> {
        let mut by_head: HashMap<Name, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            r.validate(&signature)?;
            let head = r.lhs.head_symbol().expect("validated").clone();
            by_head.entry(head).or_default().push(i);
        }
        Ok(Strs {
            signature,
            rules,
            by_head,
        })
    }

    pub fn rules_for(&self, head: &str) -> &[usize] {
        self.by_head.get(head).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn kind_of(&self, name: &str) -> Option<SymbolKind> {
        self.signature.symbol(name).map(|d| d.kind)
    }

    /// Name of the oracle symbol of type word -> word, adding a fresh `S_f` if none is declared.
    pub fn with_oracle_symbol(&self) -> Result<(Strs, Name)> {
        let word_fn = SimpleType::arrow(SimpleType::base("word"), SimpleType::base("word"));
        if let Some(d) = self.signature.oracle_symbols().find(|d| d.ty == word_fn) {
            return Ok((self.clone(), d.name.clone()));
        }
        if !self.signature.has_sort("word") {
            return Err(Error::invalid("signature has no sort word"));
        }
        let mut name = String::from("S_f");
        while self.signature.is_name_taken(&name) {
            name.push('\'');
        }
        let mut sig = self.signature.clone();
        sig.add_symbol(&name, word_fn, SymbolKind::Oracle)?;
        Ok((Strs::new(sig, self.rules.clone())?, name.into()))
    }
}

impl fmt::Display for Strs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, dir) in self.signature.sorts() {
            match dir {
                Direction::Desc => writeln!(f, "sort {name}")?,
                Direction::Asc => writeln!(f, "sort {name} asc")?,
            }
        }
        for d in self.signature.symbols() {
            let kw = match d.kind {
                SymbolKind::Constructor => "cons",
                SymbolKind::Defined => "fn",
                SymbolKind::Oracle => "oracle",
            };
            writeln!(f, "{kw} {} : {}", d.name, d.ty)?;
        }
        for r in &self.rules {
            writeln!(f, "rule {r}")?;
        }
        Ok(())
    }
}
