use std::collections::BTreeMap;
use std::fmt;

use crate::term::{Term, TermKind};
use crate::types::Name;

#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Substitution(pub BTreeMap<Name, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: Name, t: Term) {
        self.0.insert(name, t);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}↦{v}")?;
        }
        f.write_str("}")
    }
}

/// Homomorphic application; ground subterms are shared, not copied.
pub fn apply_subst(gamma: &Substitution, s: &Term) -> Term {
    if s.is_ground() {
        return s.clone();
    }
    match s.kind() {
        TermKind::Var(n) => gamma.get(n).cloned().unwrap_or_else(|| s.clone()),
        TermKind::Sym(_) => s.clone(),
        TermKind::App(l, r) => {
            let l2 = apply_subst(gamma, l);
            let r2 = apply_subst(gamma, r);
            if l2.ptr_eq(l) && r2.ptr_eq(r) {
                s.clone()
            } else {
                Term::app_typed(l2, r2, s.ty().clone())
            }
        }
    }
}

/// Extends `gamma` so that `pattern·gamma = subject`; repeated variables must bind equal terms.
pub fn match_into(pattern: &Term, subject: &Term, gamma: &mut Substitution) -> bool {
    match pattern.kind() {
        TermKind::Var(n) => {
            if pattern.ty() != subject.ty() {
                return false;
            }
            match gamma.0.get(n) {
                Some(bound) => bound == subject,
                None => {
                    gamma.0.insert(n.clone(), subject.clone());
                    true
                }
            }
        }
        TermKind::Sym(f) => matches!(subject.kind(), TermKind::Sym(g) if f == g),
        TermKind::App(pl, pr) => match subject.kind() {
            TermKind::App(sl, sr) => match_into(pl, sl, gamma) && match_into(pr, sr, gamma),
            _ => false,
        },
    }
}

pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut gamma = Substitution::new();
    match_into(pattern, subject, &mut gamma).then_some(gamma)
}

fn walk(t: &Term, s: &Substitution) -> Term {
    let mut cur = t.clone();
    while let TermKind::Var(n) = cur.kind() {
        match s.get(n) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

fn resolve(t: &Term, s: &Substitution) -> Term {
    match t.kind() {
        TermKind::Var(n) => match s.get(n) {
            Some(b) => resolve(b, s),
            None => t.clone(),
        },
        TermKind::Sym(_) => t.clone(),
        TermKind::App(l, r) => Term::app_typed(resolve(l, s), resolve(r, s), t.ty().clone()),
    }
}

fn occurs(n: &Name, t: &Term, s: &Substitution) -> bool {
    match t.kind() {
        TermKind::Var(m) => m == n || s.get(m).is_some_and(|b| occurs(n, b, s)),
        TermKind::Sym(_) => false,
        TermKind::App(l, r) => occurs(n, l, s) || occurs(n, r, s),
    }
}

/// Syntactic first-order unification (callers rename apart beforehand).
pub fn unify(a: &Term, b: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = walk(&x, &s);
        let y = walk(&y, &s);
        if x.ty() != y.ty() {
            return None;
        }
        match (x.kind(), y.kind()) {
            (TermKind::Var(n), TermKind::Var(m)) if n == m => {}
            (TermKind::Var(n), _) => {
                if occurs(n, &y, &s) {
                    return None;
                }
                s.insert(n.clone(), y.clone());
            }
            (_, TermKind::Var(m)) => {
                if occurs(m, &x, &s) {
                    return None;
                }
                s.insert(m.clone(), x.clone());
            }
            (TermKind::Sym(f), TermKind::Sym(g)) => {
                if f != g {
                    return None;
                }
            }
            (TermKind::App(l1, r1), TermKind::App(l2, r2)) => {
                stack.push((r1.clone(), r2.clone()));
                stack.push((l1.clone(), l2.clone()));
            }
            _ => return None,
        }
    }
    let resolved =
        s.0.keys()
            .map(|k| (k.clone(), resolve(&s.0[k], &s)))
            .collect();
    Some(Substitution(resolved))
}

/// Renames every variable `x` of `t` to `x<suffix>`.
pub fn rename_vars(t: &Term, suffix: &str) -> Term {
    let mut gamma = Substitution::new();
    for (n, ty) in t.vars() {
        gamma.insert(n.clone(), Term::var(format!("{n}{suffix}"), ty));
    }
    apply_subst(&gamma, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SimpleType;

    fn nat() -> SimpleType {
        SimpleType::base("nat")
    }
    fn s(t: Term) -> Term {
        Term::app(Term::sym("s", SimpleType::arrow(nat(), nat())), t).unwrap()
    }
    fn zero() -> Term {
        Term::sym("0", nat())
    }
    fn add(a: Term, b: Term) -> Term {
        let f = Term::sym("add", SimpleType::curried(vec![nat(), nat()], nat()));
        Term::apply_all(f, [a, b]).unwrap()
    }
    fn v(n: &str) -> Term {
        Term::var(n, nat())
    }

    #[test]
    fn match_examples() {
        let g = match_term(&add(s(v("x")), v("y")), &add(s(zero()), s(zero()))).unwrap();
        assert_eq!(g.get("x"), Some(&zero()));
        assert_eq!(g.get("y"), Some(&s(zero())));
        assert!(match_term(&add(zero(), v("y")), &add(s(zero()), zero())).is_none());
        let t = add(zero(), s(zero()));
        assert_eq!(match_term(&v("x"), &t).unwrap().get("x"), Some(&t));
    }

    #[test]
    fn non_linear_match() {
        let p = add(v("x"), v("x"));
        assert!(match_term(&p, &add(zero(), zero())).is_some());
        assert!(match_term(&p, &add(zero(), s(zero()))).is_none());
    }

    #[test]
    fn subst_examples() {
        let mut g = Substitution::new();
        g.insert("x".into(), zero());
        assert_eq!(apply_subst(&g, &s(v("x"))), s(zero()));
        assert_eq!(
            apply_subst(&Substitution::new(), &add(v("x"), v("y"))),
            add(v("x"), v("y"))
        );
        let mut g = Substitution::new();
        g.insert("x".into(), s(zero()));
        g.insert("y".into(), zero());
        assert_eq!(
            apply_subst(&g, &add(v("x"), v("y"))),
            add(s(zero()), zero())
        );
    }

    #[test]
    fn unify_basic() {
        let u = unify(&add(v("x"), zero()), &add(s(v("z")), v("w"))).unwrap();
        assert_eq!(u.get("x"), Some(&s(v("z"))));
        assert_eq!(u.get("w"), Some(&zero()));
        assert!(unify(&v("x"), &s(v("x"))).is_none());
        assert!(unify(&add(zero(), v("y")), &add(s(v("x")), v("y"))).is_none());
    }
}
