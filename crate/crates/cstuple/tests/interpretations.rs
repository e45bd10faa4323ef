mod common;

use common::{ground, load, load_interp, rng};
use cstuple::interp::{Evaluator, Numeric, Valuation, Value};
use cstuple::rewrite::monitor_compatibility;
use cstuple::{check_system, step, CheckMode, CheckOptions, Position, Term, Verdict};
use proptest::prelude::*;
use rand::Rng;

const PAIRS: [(&str, &str); 5] = [
    ("arith.strs", "arith.csi"),
    ("arith.strs", "arith_fixed.csi"),
    ("addmult.strs", "addmult.csi"),
    ("binadd.strs", "binadd.csi"),
    ("sumf.strs", "sumf.csi"),
];

/// Replaces a random set of disjoint subterms by fresh variables: `s` with `s[x_i := t_i] = t`.
fn abstract_subterms(
    t: &Term,
    r: &mut impl Rng,
    ok: impl Fn(&Term) -> bool,
) -> (Term, Vec<(String, Term)>) {
    let mut chosen: Vec<Position> = Vec::new();
    for p in t.positions() {
        let fresh = !p.0.is_empty() && !chosen.iter().any(|q| q.is_prefix_of(&p));
        if fresh && r.gen_bool(0.2) && ok(t.subterm(&p).unwrap()) {
            chosen.push(p);
        }
    }
    let mut s = t.clone();
    let mut binds = Vec::new();
    for (i, p) in chosen.iter().enumerate() {
        let sub = t.subterm(p).unwrap().clone();
        let x = format!("x{i}");
        s = s
            .replace_at(p, Term::var(x.as_str(), sub.ty().clone()))
            .unwrap();
        binds.push((x, sub));
    }
    (s, binds)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpretation_commutes_with_substitution(seed: u64, pair in 0..PAIRS.len()) {
        let (sys, csi) = PAIRS[pair];
        let strs = load(sys);
        let interp = load_interp(&strs, csi);
        let mut r = rng(seed);
        let t = ground(&strs, 4, &mut r);
        let empty = Valuation::<Numeric>::new();
        let ev = Evaluator::new(&interp, &empty);
        let Ok(whole) = ev.analyze(&t) else { return Ok(()) };
        let (s, binds) = abstract_subterms(&t, &mut r, |u| ev.analyze(u).is_ok_and(|a| a.cost.is_some()));
        let mut val = Valuation::<Numeric>::new();
        let mut inner_total = 0;
        for (x, sub) in &binds {
            let a = ev.analyze(sub).unwrap();
            val = val.with_size(x, a.size.clone());
            if let Some(c) = a.cost {
                val = val.with_cost(x, c);
            }
            inner_total += a.total;
        }
        let open = Evaluator::new(&interp, &val).analyze(&s).unwrap();
        prop_assert_eq!(open.size.base().unwrap(), whole.size.base().unwrap());
        prop_assert_eq!(open.cost.unwrap().base().unwrap(), whole.cost.unwrap().base().unwrap());
        prop_assert_eq!(open.total + inner_total, whole.total);
    }

    #[test]
    fn certified_systems_decrease_along_every_step(seed: u64) {
        let strs = load("addmult.strs");
        let interp = load_interp(&strs, "addmult.csi");
        let t = ground(&strs, 4, &mut rng(seed));
        let val = Valuation::<Numeric>::new();
        let ev = Evaluator::new(&interp, &val).with_rules(&strs);
        let Ok(start) = ev.analyze(&t) else { return Ok(()) };
        let (mut cost, mut size) = (start.total_reducible, start.size.base().unwrap());
        let mut cur = t.clone();
        let mut steps = 0u64;
        while let Some((next, _)) = step(&strs, None, &cur).unwrap() {
            let a = ev.analyze(&next).unwrap();
            prop_assert!(a.total_reducible < cost);
            prop_assert!(a.size.base().unwrap() <= size);
            cost = a.total_reducible;
            size = a.size.base().unwrap();
            cur = next;
            steps += 1;
        }
        prop_assert_eq!(cost, 0);
        prop_assert!(steps <= start.total_reducible);
        prop_assert!(start.total_reducible <= start.total);
        let rep = monitor_compatibility(&strs, &interp, &t, u64::MAX).unwrap();
        prop_assert!(rep.violation.is_none());
        prop_assert_eq!(rep.steps, steps);
    }
}

#[test]
fn certify_and_falsify_never_disagree() {
    for (sys, csi) in PAIRS {
        let strs = load(sys);
        let interp = load_interp(&strs, csi);
        let certify = check_system(
            &interp,
            &strs,
            &CheckOptions {
                mode: CheckMode::Certify,
                budget: 2_000,
                seed: 1,
            },
        );
        for seed in [1, 2, 3] {
            let falsify = check_system(
                &interp,
                &strs,
                &CheckOptions {
                    mode: CheckMode::Falsify,
                    budget: 2_000,
                    seed,
                },
            );
            for (i, (c, f)) in certify.verdicts.iter().zip(&falsify.verdicts).enumerate() {
                assert!(
                    !(matches!(c, Verdict::Certified) && f.is_falsified()),
                    "{sys}/{csi} rule {i}: {c} vs {f}"
                );
                if let Verdict::Falsified(ce) = f {
                    assert!(
                        ce.lhs <= ce.rhs || matches!(ce.which, cstuple::interp::Which::Size),
                        "{f}"
                    );
                }
            }
        }
    }
}

#[test]
fn addition_interpretation_is_exact_on_numerals() {
    let strs = load("addmult.strs");
    let interp = load_interp(&strs, "addmult.csi");
    let val = Valuation::<Numeric>::new();
    let ev = Evaluator::new(&interp, &val);
    let num = |n: usize| (0..n).fold("0".to_string(), |acc, _| format!("s ({acc})"));
    for (a, b) in [(0, 0), (2, 3), (5, 1)] {
        let t = cstuple::parse_term(&strs.signature, &format!("add ({}) ({})", num(a), num(b)))
            .unwrap();
        let an = ev.analyze(&t).unwrap();
        assert_eq!(an.size.base().unwrap(), (a + b) as u64);
        assert_eq!(an.cost.unwrap().base().unwrap(), a as u64 + 1);
        let _: Value<Numeric> = an.size;
    }
}
