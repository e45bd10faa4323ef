use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Name = Arc<str>;

/// Simple types over base sorts. Arrows associate to the right.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SimpleType {
    Base(Name),
    Arrow(Arc<SimpleType>, Arc<SimpleType>),
}

impl SimpleType {
    pub fn base(name: &str) -> Self {
        SimpleType::Base(name.into())
    }

    pub fn arrow(arg: SimpleType, res: SimpleType) -> Self {
        SimpleType::Arrow(Arc::new(arg), Arc::new(res))
    }

    /// Builds `a1 -> ... -> an -> res`.
    pub fn curried(args: Vec<SimpleType>, res: SimpleType) -> Self {
        args.into_iter()
            .rev()
            .fold(res, |acc, a| SimpleType::arrow(a, acc))
    }

    pub fn order(&self) -> usize {
        match self {
            SimpleType::Base(_) => 0,
            SimpleType::Arrow(a, b) => (1 + a.order()).max(b.order()),
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, SimpleType::Base(_))
    }

    pub fn split_arrow(&self) -> Option<(&SimpleType, &SimpleType)> {
        match self {
            SimpleType::Arrow(a, b) => Some((a, b)),
            SimpleType::Base(_) => None,
        }
    }

    /// Argument types and the final base sort.
    pub fn uncurry(&self) -> (Vec<&SimpleType>, &Name) {
        let mut args = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                SimpleType::Base(n) => return (args, n),
                SimpleType::Arrow(a, b) => {
                    args.push(a);
                    cur = b;
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    pub fn result_sort(&self) -> &Name {
        self.uncurry().1
    }

    pub fn sorts(&self, out: &mut Vec<Name>) {
        match self {
            SimpleType::Base(n) => out.push(n.clone()),
            SimpleType::Arrow(a, b) => {
                a.sorts(out);
                b.sorts(out);
            }
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base(n) => write!(f, "{n}"),
            SimpleType::Arrow(a, b) => {
                if a.is_base() {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
        }
    }
}

/// Ordering used for a sort's size domain: `Desc` is (ℕ, ≥), `Asc` is (ℕ, ≤).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Desc,
    Asc,
}

impl Direction {
    /// `a ⊒ b` in this ordering.
    pub fn geq(self, a: u64, b: u64) -> bool {
        match self {
            Direction::Desc => a >= b,
            Direction::Asc => a <= b,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SymbolKind {
    Constructor,
    Defined,
    Oracle,
}

#[derive(Clone, Debug)]
pub struct SymbolDecl {
    pub name: Name,
    pub ty: SimpleType,
    pub kind: SymbolKind,
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    sorts: Vec<(Name, Direction)>,
    symbols: Vec<SymbolDecl>,
    sort_index: HashMap<Name, usize>,
    symbol_index: HashMap<Name, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, name: &str, dir: Direction) -> Result<()> {
        if self.sort_index.contains_key(name) || self.symbol_index.contains_key(name) {
            return Err(Error::invalid(format!("duplicate name {name}")));
        }
        self.sort_index.insert(name.into(), self.sorts.len());
        self.sorts.push((name.into(), dir));
        Ok(())
    }

    pub fn add_symbol(&mut self, name: &str, ty: SimpleType, kind: SymbolKind) -> Result<()> {
        if self.sort_index.contains_key(name) || self.symbol_index.contains_key(name) {
            return Err(Error::invalid(format!("duplicate name {name}")));
        }
        let mut used = Vec::new();
        ty.sorts(&mut used);
        if let Some(s) = used.iter().find(|s| !self.sort_index.contains_key(&***s)) {
            return Err(Error::invalid(format!(
                "unknown sort {s} in type of {name}"
            )));
        }
        if ty.order() > 2 {
            return Err(Error::invalid(format!(
                "symbol {name} has order {} > 2",
                ty.order()
            )));
        }
        self.symbol_index.insert(name.into(), self.symbols.len());
        self.symbols.push(SymbolDecl {
            name: name.into(),
            ty,
            kind,
        });
        Ok(())
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sort_index.contains_key(name)
    }

    pub fn direction(&self, sort: &str) -> Direction {
        self.sort_index
            .get(sort)
            .map(|&i| self.sorts[i].1)
            .unwrap_or(Direction::Desc)
    }

    pub fn symbol(&self, name: &str) -> Option<&SymbolDecl> {
        self.symbol_index.get(name).map(|&i| &self.symbols[i])
    }

    pub fn symbols(&self) -> impl Iterator<Item = &SymbolDecl> {
        self.symbols.iter()
    }

    pub fn sorts(&self) -> impl Iterator<Item = (&Name, Direction)> {
        self.sorts.iter().map(|(n, d)| (n, *d))
    }

    pub fn is_name_taken(&self, name: &str) -> bool {
        self.sort_index.contains_key(name) || self.symbol_index.contains_key(name)
    }

    pub fn oracle_symbols(&self) -> impl Iterator<Item = &SymbolDecl> {
        self.symbols.iter().filter(|s| s.kind == SymbolKind::Oracle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_types() {
        let nat = SimpleType::base("nat");
        let f = SimpleType::arrow(nat.clone(), nat.clone());
        assert_eq!(nat.order(), 0);
        assert_eq!(f.order(), 1);
        let fp = SimpleType::curried(vec![f.clone(), nat.clone(), nat.clone()], nat.clone());
        assert_eq!(fp.order(), 2);
        assert_eq!(fp.to_string(), "(nat -> nat) -> nat -> nat -> nat");
        assert_eq!(fp.arity(), 3);
    }

    #[test]
    fn signature_rejects_order_three() {
        let mut sig = Signature::new();
        sig.add_sort("nat", Direction::Desc).unwrap();
        let nat = SimpleType::base("nat");
        let o2 = SimpleType::arrow(SimpleType::arrow(nat.clone(), nat.clone()), nat.clone());
        let o3 = SimpleType::arrow(o2, nat.clone());
        assert!(sig.add_symbol("h", o3, SymbolKind::Defined).is_err());
        assert!(sig
            .add_symbol("nat", nat.clone(), SymbolKind::Constructor)
            .is_err());
        assert!(sig
            .add_symbol("z", SimpleType::base("foo"), SymbolKind::Constructor)
            .is_err());
    }
}
