use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::types::{Name, SimpleType};

/// Immutable applicative term. Cloning is cheap; subterms are shared.
#[derive(Clone)]
pub struct Term(Arc<Node>);

struct Node {
    kind: TermKind,
    ty: SimpleType,
    size: usize,
    ground: bool,
}

pub enum TermKind {
    Var(Name),
    Sym(Name),
    App(Term, Term),
}

impl Term {
    pub fn var(name: impl Into<Name>, ty: SimpleType) -> Term {
        Term(Arc::new(Node {
            kind: TermKind::Var(name.into()),
            ty,
            size: 1,
            ground: false,
        }))
    }

    pub fn sym(name: impl Into<Name>, ty: SimpleType) -> Term {
        Term(Arc::new(Node {
            kind: TermKind::Sym(name.into()),
            ty,
            size: 1,
            ground: true,
        }))
    }

    pub fn app(left: Term, right: Term) -> Result<Term> {
        let ty = match left.ty().split_arrow() {
            Some((a, b)) if *a == *right.ty() => b.clone(),
            Some((a, _)) => {
                return Err(Error::Type(format!(
                    "`{left}` expects an argument of type {a}, got `{right}` : {}",
                    right.ty()
                )))
            }
            None => {
                return Err(Error::Type(format!(
                    "`{left}` : {} is not a function",
                    left.ty()
                )))
            }
        };
        Ok(Term::app_typed(left, right, ty))
    }

    pub(crate) fn app_typed(left: Term, right: Term, ty: SimpleType) -> Term {
        let size = 1 + left.size() + right.size();
        let ground = left.is_ground() && right.is_ground();
        Term(Arc::new(Node {
            kind: TermKind::App(left, right),
            ty,
            size,
            ground,
        }))
    }

    pub fn apply_all(head: Term, args: impl IntoIterator<Item = Term>) -> Result<Term> {
        args.into_iter().try_fold(head, Term::app)
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    pub fn ty(&self) -> &SimpleType {
        &self.0.ty
    }

    /// Number of nodes (variables, symbols and application nodes).
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn is_ground(&self) -> bool {
        self.0.ground
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self.kind() {
            TermKind::Var(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&Name> {
        match self.kind() {
            TermKind::Sym(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_app(&self) -> Option<(&Term, &Term)> {
        match self.kind() {
            TermKind::App(l, r) => Some((l, r)),
            _ => None,
        }
    }

    pub fn head(&self) -> &Term {
        let mut cur = self;
        while let TermKind::App(l, _) = cur.kind() {
            cur = l;
        }
        cur
    }

    pub fn head_symbol(&self) -> Option<&Name> {
        self.head().as_sym()
    }

    pub fn arg_count(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let TermKind::App(l, _) = cur.kind() {
            n += 1;
            cur = l;
        }
        n
    }

    /// Head and arguments in application order.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let TermKind::App(l, r) = cur.kind() {
            args.push(r);
            cur = l;
        }
        args.reverse();
        (cur, args)
    }

    pub fn vars(&self) -> BTreeMap<Name, SimpleType> {
        let mut out = BTreeMap::new();
        self.visit(&mut |t| {
            if let TermKind::Var(n) = t.kind() {
                out.insert(n.clone(), t.ty().clone());
            }
        });
        out
    }

    /// Variable occurrences in left-to-right order (with repetitions).
    pub fn var_occurrences(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let TermKind::Var(n) = t.kind() {
                out.push(n.clone());
            }
        });
        out
    }

    /// Pre-order traversal of all subterm occurrences.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let TermKind::App(l, r) = self.kind() {
            l.visit(f);
            r.visit(f);
        }
    }

    /// All positions, pre-order.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn go(t: &Term, path: &mut Vec<u8>, out: &mut Vec<Position>) {
            out.push(Position(path.clone()));
            if let TermKind::App(l, r) = t.kind() {
                path.push(1);
                go(l, path, out);
                path.pop();
                path.push(2);
                go(r, path, out);
                path.pop();
            }
        }
        go(self, &mut path, &mut out);
        out
    }

    pub fn subterm(&self, p: &Position) -> Option<&Term> {
        let mut cur = self;
        for &d in &p.0 {
            match cur.kind() {
                TermKind::App(l, r) => cur = if d == 1 { l } else { r },
                _ => return None,
            }
        }
        Some(cur)
    }

    /// Replaces the subterm at `p`; the replacement must have the same type.
    pub fn replace_at(&self, p: &Position, new: Term) -> Option<Term> {
        fn go(t: &Term, path: &[u8], new: Term) -> Option<Term> {
            match path.split_first() {
                None => Some(new),
                Some((&d, rest)) => match t.kind() {
                    TermKind::App(l, r) => {
                        if d == 1 {
                            Some(Term::app_typed(
                                go(l, rest, new)?,
                                r.clone(),
                                t.ty().clone(),
                            ))
                        } else {
                            Some(Term::app_typed(
                                l.clone(),
                                go(r, rest, new)?,
                                t.ty().clone(),
                            ))
                        }
                    }
                    _ => None,
                },
            }
        }
        if self.subterm(p)?.ty() != new.ty() {
            return None;
        }
        go(self, &p.0, new)
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.size() != other.size() || self.ty() != other.ty() {
            return false;
        }
        match (self.kind(), other.kind()) {
            (TermKind::Var(a), TermKind::Var(b)) => a == b,
            (TermKind::Sym(a), TermKind::Sym(b)) => a == b,
            (TermKind::App(l1, r1), TermKind::App(l2, r2)) => l1 == l2 && r1 == r2,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self.kind() {
            TermKind::Var(n) => {
                0u8.hash(state);
                n.hash(state);
            }
            TermKind::Sym(n) => {
                1u8.hash(state);
                n.hash(state);
            }
            TermKind::App(l, r) => {
                2u8.hash(state);
                l.hash(state);
                r.hash(state);
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn infix_of(t: &Term) -> Option<(&'static str, &Term, &Term)> {
    let (l, r) = t.as_app()?;
    let (h, a) = l.as_app()?;
    match h.as_sym().map(|n| &**n) {
        Some("cons") => Some(("::", a, r)),
        Some("addB") => Some(("+B", a, r)),
        _ => None,
    }
}

fn fmt_term(t: &Term, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
    match t.kind() {
        TermKind::Var(n) | TermKind::Sym(n) => write!(f, "{n}"),
        TermKind::App(..) => {
            if nested {
                f.write_str("(")?;
            }
            if let Some((op, a, b)) = infix_of(t) {
                fmt_term(a, f, true)?;
                write!(f, " {op} ")?;
                fmt_term(b, f, true)?;
            } else {
                let (head, args) = t.spine();
                fmt_term(head, f, true)?;
                for a in args {
                    f.write_str(" ")?;
                    fmt_term(a, f, true)?;
                }
            }
            if nested {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f, false)
    }
}

/// A position: root is `#`, children of an application are `1` and `2`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Position(pub Vec<u8>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, d: u8) -> Position {
        let mut v = self.0.clone();
        v.push(d);
        Position(v)
    }

    /// Post-order comparison: descendants come before ancestors, `1` before `2`.
    pub fn post_order_cmp(&self, other: &Position) -> Ordering {
        if self == other {
            Ordering::Equal
        } else if self.is_prefix_of(other) {
            Ordering::Greater
        } else if other.is_prefix_of(self) {
            Ordering::Less
        } else {
            self.0.cmp(&other.0)
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("#");
        }
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "#" {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|d| match d {
                "1" => Ok(1),
                "2" => Ok(2),
                _ => Err(Error::invalid(format!("bad position {s}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Position)
    }
}
