mod common;

use common::{ground, load, random_word, rng};
use cstuple::{
    apply_subst, decode_word, encode_word, match_term, Position, Substitution, Term, TermKind,
};
use proptest::prelude::*;
use rand::Rng;

const SYSTEMS: [&str; 5] = [
    "arith.strs",
    "addmult.strs",
    "binadd.strs",
    "sumf.strs",
    "explode.strs",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positions_address_subterms(seed: u64, sys in 0..SYSTEMS.len()) {
        let strs = load(SYSTEMS[sys]);
        let mut r = rng(seed);
        let t = ground(&strs, 4, &mut r);
        let ps = t.positions();
        prop_assert_eq!(ps.len(), t.size());
        for p in &ps {
            let s = t.subterm(p).expect("listed position exists");
            if let TermKind::App(l, a) = s.kind() {
                prop_assert_eq!(t.subterm(&p.child(1)), Some(l));
                prop_assert_eq!(t.subterm(&p.child(2)), Some(a));
            } else {
                prop_assert!(t.subterm(&p.child(1)).is_none());
            }
            prop_assert_eq!(t.replace_at(p, s.clone()), Some(t.clone()));
        }
    }

    #[test]
    fn replacement_changes_only_the_target(seed: u64, sys in 0..SYSTEMS.len()) {
        let strs = load(SYSTEMS[sys]);
        let mut r = rng(seed);
        let t = ground(&strs, 4, &mut r);
        let ps = t.positions();
        let p = &ps[r.gen_range(0..ps.len())];
        let old = t.subterm(p).unwrap();
        let Some(new) = cstuple::TermSampler::new(&strs.signature, 2).sample(old.ty(), &mut r) else {
            return Ok(());
        };
        let u = t.replace_at(p, new.clone()).unwrap();
        prop_assert_eq!(u.subterm(p), Some(&new));
        prop_assert_eq!(u.size(), t.size() - old.size() + new.size());
        for q in &ps {
            if !p.is_prefix_of(q) && !q.is_prefix_of(p) {
                prop_assert_eq!(u.subterm(q), t.subterm(q));
            }
        }
    }

    #[test]
    fn rule_lhs_matches_its_instances(seed: u64, sys in 0..SYSTEMS.len()) {
        let strs = load(SYSTEMS[sys]);
        let mut r = rng(seed);
        let sampler = cstuple::TermSampler::new(&strs.signature, 3);
        for rule in &strs.rules {
            let mut gamma = Substitution::new();
            for (x, ty) in rule.lhs.vars() {
                if let Some(t) = sampler.sample(&ty, &mut r) {
                    gamma.insert(x, t);
                }
            }
            if gamma.len() != rule.lhs.vars().len() {
                continue;
            }
            let inst = apply_subst(&gamma, &rule.lhs);
            prop_assert!(inst.is_ground());
            prop_assert_eq!(inst.ty(), rule.lhs.ty());
            prop_assert_eq!(match_term(&rule.lhs, &inst), Some(gamma.clone()));
            let rhs = apply_subst(&gamma, &rule.rhs);
            prop_assert_eq!(rhs.ty(), rule.rhs.ty());
        }
    }

    #[test]
    fn substitution_is_a_homomorphism(seed: u64, sys in 0..SYSTEMS.len()) {
        let strs = load(SYSTEMS[sys]);
        let mut r = rng(seed);
        let sampler = cstuple::TermSampler::new(&strs.signature, 2);
        for rule in &strs.rules {
            let mut gamma = Substitution::new();
            for (x, ty) in rule.rhs.vars() {
                if let Some(t) = sampler.sample(&ty, &mut r) {
                    gamma.insert(x, t);
                }
            }
            let s = &rule.rhs;
            let applied = apply_subst(&gamma, s);
            for p in s.positions() {
                let sub = s.subterm(&p).unwrap();
                let image = applied.subterm(&p).expect("positions of s survive substitution");
                prop_assert_eq!(image, &apply_subst(&gamma, sub));
                if let Some(x) = sub.as_var() {
                    let expect = gamma.get(x).cloned().unwrap_or_else(|| sub.clone());
                    prop_assert_eq!(image, &expect);
                }
            }
        }
    }

    #[test]
    fn words_round_trip(seed: u64) {
        let strs = load("sumf.strs");
        let mut r = rng(seed);
        let w = random_word(&mut r, 40);
        let t = encode_word(&strs.signature, &w).unwrap();
        prop_assert!(t.size() >= w.len());
        prop_assert_eq!(t.size(), 4 * w.len() + 1);
        prop_assert_eq!(decode_word(&t), Some(w));
    }
}

#[test]
fn non_words_do_not_decode() {
    let strs = load("sumf.strs");
    let mut r = rng(11);
    for _ in 0..200 {
        let t: Term = ground(&strs, 3, &mut r);
        let has_defined = t.positions().iter().any(|p| {
            t.subterm(p)
                .and_then(|s| s.as_sym())
                .is_some_and(|f| strs.kind_of(f) == Some(cstuple::SymbolKind::Defined))
        });
        if has_defined || t.ty() != &cstuple::SimpleType::base("word") {
            assert_eq!(decode_word(&t), None, "{t}");
        }
    }
    assert_eq!(Position::root().to_string(), "#");
}
