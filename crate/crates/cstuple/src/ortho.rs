use std::collections::BTreeMap;
use std::fmt;

use crate::strs::Strs;
use crate::subst::{rename_vars, unify, Substitution};
use crate::types::Name;

#[derive(Clone, Debug)]
pub enum Violation {
    NonLeftLinear {
        rule: usize,
        var: Name,
    },
    Overlap {
        rule_a: usize,
        rule_b: usize,
        unifier: Substitution,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonLeftLinear { rule, var } => {
                write!(
                    f,
                    "rule {rule}: variable {var} occurs more than once in the lhs"
                )
            }
            Violation::Overlap {
                rule_a,
                rule_b,
                unifier,
            } => {
                write!(
                    f,
                    "rules {rule_a} and {rule_b} overlap with unifier {unifier}"
                )
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrthogonalityReport {
    pub orthogonal: bool,
    pub violations: Vec<Violation>,
}

/// Left-linearity plus pairwise non-unifiability of left-hand sides.
pub fn check_orthogonality(strs: &Strs) -> OrthogonalityReport {
    let mut violations = Vec::new();
    for (i, r) in strs.rules.iter().enumerate() {
        let mut seen: BTreeMap<Name, usize> = BTreeMap::new();
        for v in r.lhs.var_occurrences() {
            *seen.entry(v).or_default() += 1;
        }
        for (v, n) in seen {
            if n > 1 {
                violations.push(Violation::NonLeftLinear { rule: i, var: v });
            }
        }
    }
    for (i, a) in strs.rules.iter().enumerate() {
        let head = a.lhs.head_symbol().expect("rule heads are symbols");
        for &j in strs.rules_for(head) {
            if j <= i {
                continue;
            }
            let b = rename_vars(&strs.rules[j].lhs, "'2");
            let a1 = rename_vars(&a.lhs, "'1");
            if let Some(u) = unify(&a1, &b) {
                let unifier = Substitution(
                    u.0.into_iter()
                        .map(|(k, v)| {
                            let strip = |s: &str| {
                                s.trim_end_matches("'1").trim_end_matches("'2").to_string()
                            };
                            let v = crate::subst::apply_subst(&strip_subst(&v), &v);
                            (Name::from(strip(&k)), v)
                        })
                        .collect(),
                );
                violations.push(Violation::Overlap {
                    rule_a: i,
                    rule_b: j,
                    unifier,
                });
            }
        }
    }
    OrthogonalityReport {
        orthogonal: violations.is_empty(),
        violations,
    }
}

fn strip_subst(t: &crate::term::Term) -> Substitution {
    let mut g = Substitution::new();
    for (n, ty) in t.vars() {
        let base = n.trim_end_matches("'1").trim_end_matches("'2").to_string();
        g.insert(n.clone(), crate::term::Term::var(base, ty));
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_strs;

    const HEAD: &str = "sort nat\ncons 0 : nat\ncons s : nat -> nat\n";

    #[test]
    fn overlap_reports_unifier() {
        let strs = parse_strs(&format!(
            "{HEAD}fn f : nat -> nat\nrule f x -> x\nrule f 0 -> 0\n"
        ))
        .unwrap();
        let rep = check_orthogonality(&strs);
        assert!(!rep.orthogonal);
        match &rep.violations[0] {
            Violation::Overlap {
                rule_a: 0,
                rule_b: 1,
                unifier,
            } => {
                assert_eq!(unifier.to_string(), "{x↦0}");
            }
            v => panic!("{v}"),
        }
    }

    #[test]
    fn non_left_linear() {
        let src = format!(
            "{HEAD}sort bool\ncons true : bool\nfn eq : nat -> nat -> bool\nrule eq x x -> true\n"
        );
        let rep = check_orthogonality(&parse_strs(&src).unwrap());
        assert!(!rep.orthogonal);
        assert!(
            matches!(&rep.violations[0], Violation::NonLeftLinear { rule: 0, var } if &**var == "x")
        );
    }

    #[test]
    fn add_is_orthogonal() {
        let src = format!("{HEAD}fn add : nat -> nat -> nat\nrule add 0 y -> y\nrule add (s x) y -> s (add x y)\n");
        assert!(check_orthogonality(&parse_strs(&src).unwrap()).orthogonal);
    }
}
