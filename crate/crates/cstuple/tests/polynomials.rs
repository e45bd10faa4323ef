mod common;

use common::{load, load_interp, random_word, rng};
use cstuple::{
    build_b, build_d, build_q, check_poly_bounded, compile_otm, monitor_bounds, table_length, Coef,
    OracleTable, OtmSpec, PolyEnv, SoPoly, Word,
};
use proptest::prelude::*;
use rand::Rng;

/// Polynomials over `x` with applications of `Fc` and `Fs`.
fn poly() -> impl Strategy<Value = SoPoly> {
    let leaf = prop_oneof![(0u64..4).prop_map(SoPoly::Const), Just(SoPoly::var("x"))];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(SoPoly::Add),
            prop::collection::vec(inner.clone(), 2..3).prop_map(SoPoly::Mul),
            (prop::bool::ANY, inner).prop_map(|(c, p)| SoPoly::app(if c { "Fc" } else { "Fs" }, p)),
        ]
    })
}

/// A monotone function family indexed by `(a, b, square)`.
fn mono(a: u64, b: u64, square: bool) -> impl Fn(u64) -> u64 {
    move |z| if square { z * z + b } else { a * z + b }
}

fn env<'a>(x: u64, fc: impl Fn(u64) -> u64 + 'a, fs: impl Fn(u64) -> u64 + 'a) -> PolyEnv<'a> {
    PolyEnv::new().var("x", x).fun("Fc", fc).fun("Fs", fs)
}

/// Reference semantics of the query polynomial: each `Fc` argument, evaluated with inner `Fc` read as 1.
fn query_sum(p: &SoPoly, x: u64, fs: &dyn Fn(u64) -> u64) -> Option<u64> {
    fn val(p: &SoPoly, x: u64, fs: &dyn Fn(u64) -> u64) -> Option<u64> {
        match p {
            SoPoly::Const(n) => Some(*n),
            SoPoly::Var(_) => Some(x),
            SoPoly::Add(v) => v
                .iter()
                .try_fold(0u64, |a, q| a.checked_add(val(q, x, fs)?)),
            SoPoly::Mul(v) => v
                .iter()
                .try_fold(1u64, |a, q| a.checked_mul(val(q, x, fs)?)),
            SoPoly::App(f, arg) if &**f == "Fc" => {
                val(arg, x, fs)?;
                Some(1)
            }
            SoPoly::App(_, arg) => Some(fs(val(arg, x, fs)?)),
        }
    }
    let mut occ = Vec::new();
    p.occurrences("Fc", &mut occ);
    occ.into_iter()
        .try_fold(0u64, |a, q| a.checked_add(val(q, x, fs)?))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(p in poly()) {
        let back: SoPoly = p.to_string().parse().unwrap();
        prop_assert_eq!(back.canonical(), p.canonical());
        prop_assert_eq!(p.simplify().canonical(), p.canonical());
    }

    #[test]
    fn simplification_preserves_values(p in poly(), x in 0u64..6, a in 0u64..3, b in 0u64..3, sq: bool) {
        let e = env(x, mono(a, b, sq), mono(b, a, !sq));
        prop_assert_eq!(p.simplify().eval(&e).ok(), p.eval(&e).ok());
    }

    #[test]
    fn evaluation_is_monotone(p in poly(), x in 0u64..5, dx in 0u64..3, a in 0u64..3, b in 0u64..3, sq: bool, da in 0u64..2) {
        let lo = p.eval(&env(x, mono(a, b, sq), mono(a, b, sq)));
        let hi = p.eval(&env(x + dx, mono(a + da, b + da, sq), mono(a + da, b, sq)));
        if let (Ok(lo), Ok(hi)) = (lo, hi) {
            prop_assert!(lo <= hi, "{} at {} gave {} > {}", p, x, lo, hi);
        }
    }

    #[test]
    fn cost_bound_substitutes_arguments(p in poly(), n in 0u64..5, mu in 1u64..3, nu in 0u64..3, a in 0u64..3, b in 0u64..3, sq: bool) {
        let d = build_d(&p, &Coef::Num(mu), &Coef::Num(nu));
        let f = mono(a, b, sq);
        let direct = p.eval(&env(mu * n + nu, |_| 1, |z| mu * f(z) + nu));
        let built = d.eval(&PolyEnv::new().var("n", n).fun("F", &f));
        prop_assert_eq!(built.ok(), direct.ok());
        let symbolic = build_d(&p, &Coef::from("mu"), &Coef::from("nu"));
        let again = symbolic.eval(&PolyEnv::new().var("n", n).var("mu", mu).var("nu", nu).fun("F", &f));
        prop_assert_eq!(again.ok(), d.eval(&PolyEnv::new().var("n", n).fun("F", &f)).ok());
    }

    #[test]
    fn query_bound_sums_oracle_arguments(p in poly(), y in 0u64..5, mu in 1u64..3, nu in 0u64..3, a in 0u64..3, b in 0u64..3, sq: bool) {
        let g = mono(a, b, sq);
        let fs = |z: u64| mu * g(z) + nu;
        let q = build_q(&p);
        prop_assert_eq!(q.eval(&env(mu * y + nu, |_| 1, fs)).ok(), query_sum(&p, mu * y + nu, &fs));
        let bb = build_b(&p, &Coef::Num(mu), &Coef::Num(nu));
        prop_assert_eq!(bb.eval(&PolyEnv::new().var("y", y).fun("G", &g)).ok(), query_sum(&p, mu * y + nu, &fs));
    }
}

fn sumf_table(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> OracleTable {
    let mut t = OracleTable::new();
    for k in 0..=n {
        for w in Word::all_up_to(k) {
            if w.len() == k {
                t.insert(w, random_word(r, 6));
            }
        }
    }
    t
}

#[test]
fn table_length_is_monotone_and_tight() {
    let mut r = rng(7);
    for _ in 0..30 {
        let t = sumf_table(&mut r, 4).with_default(r.gen_bool(0.5).then(|| random_word(&mut r, 8)));
        let mut prev = 0;
        for k in 0..=6 {
            let l = table_length(&t, k);
            assert!(l >= prev);
            prev = l;
            let by_hand = Word::all_up_to(k as usize)
                .iter()
                .filter_map(|w| t.lookup(w).ok())
                .map(|v| v.len() as u64)
                .max()
                .unwrap_or(0);
            assert_eq!(l, by_hand, "k = {k}");
        }
    }
}

#[test]
fn sum_queries_stay_within_derived_bound() {
    let strs = load("sumf.strs");
    let interp = load_interp(&strs, "sumf.csi");
    let rep = check_poly_bounded(&interp, &strs, "start");
    assert!(rep.ok, "{:?}", rep.failures);
    let mut r = rng(0xb0b);
    for _ in 0..40 {
        let w = random_word(&mut r, 6);
        let table = sumf_table(&mut r, w.len());
        let m = monitor_bounds(&strs, &interp, "start", &table, &w, 1_000_000).unwrap();
        assert!(m.max_query <= m.b_value, "{m}");
        assert!(m.max_query < w.len().max(1) as u64);
    }
}

#[test]
fn compiled_machine_runs_stay_within_derived_bounds() {
    let machines = [
        ("identity.otm", "x + 5"),
        ("bitflip.otm", "4*x + 5"),
        ("one_query.otm", "3*x + 3*F(x) + 9"),
    ];
    let mut r = rng(0xc0de);
    for (file, pm) in machines {
        let spec: OtmSpec = common::corpus_text(file).parse().unwrap();
        let compiled = compile_otm(&spec, &pm.parse().unwrap()).unwrap();
        let rep = check_poly_bounded(&compiled.interp, &compiled.strs, "F");
        assert!(rep.ok, "{file}: {:?}", rep.failures);
        for _ in 0..10 {
            let w = random_word(&mut r, 4);
            let table = sumf_table(&mut r, w.len() + 1).with_default(Some(random_word(&mut r, 3)));
            let m = monitor_bounds(&compiled.strs, &compiled.interp, "F", &table, &w, 5_000_000)
                .unwrap();
            assert!(m.ok, "{file} on {w:?}: {m}");
        }
    }
}
