use std::fmt::Write as _;

use super::{state_symbol, Cell, Move, OtmSpec, Transition};
use crate::error::{Error, Result};
use crate::interp::{parse_interp, CsExpr, CsInterp};
use crate::parse::parse_strs;
use crate::sopoly::SoPoly;
use crate::strs::Strs;
use crate::term::Term;
use crate::types::Signature;

/// A compiled machine: source texts plus their parsed forms.
#[derive(Clone, Debug)]
pub struct CompiledOtm {
    pub strs_text: String,
    pub csi_text: String,
    pub strs: Strs,
    pub interp: CsInterp,
}

const DECLS: &str = "\
sort bit
sort word
sort left
sort right
sort tape
sort config
sort nat
sort nnat asc
sort set
cons o : bit
cons i : bit
cons b : bit
cons [] : word
cons cons : bit -> word -> word
cons L : word -> left
cons R : word -> right
cons split : left -> right -> tape
cons 0 : nat
cons s : nat -> nat
cons nzero : nnat
cons nsucc : nnat -> nnat
cons emptyset : set
cons setcons : word -> set -> set
oracle S_f : word -> word
fn step : (word -> word) -> config -> config
fn clean : word -> word
fn len : word -> nat
fn max : nat -> nat -> nat
fn limit : word -> nat -> word
fn retif : word -> nat -> word -> word
fn tryapply : (word -> word) -> word -> nat -> nat
fn tryall : (word -> word) -> set -> nat -> nat
fn add : nat -> nat -> nat
fn mult : nat -> nat -> nat
fn extract : tape -> word
fn minus : nat -> nnat -> nat
fn execute : (word -> word) -> nat -> nnat -> nat -> set -> config -> word
fn execute' : (word -> word) -> nat -> nnat -> nat -> set -> config -> word
fn F' : (word -> word) -> nat -> config -> word
fn F : (word -> word) -> word -> word
";

const HELPER_RULES: &str = "\
rule clean (o :: x) -> o :: clean x
rule clean (i :: x) -> i :: clean x
rule clean (b :: x) -> []
rule clean [] -> []
rule len [] -> 0
rule len (x :: y) -> s (len y)
rule max 0 m -> m
rule max (s n) 0 -> s n
rule max (s n) (s m) -> s (max n m)
rule limit [] n -> []
rule limit (x :: y) 0 -> []
rule limit (x :: y) (s n) -> x :: limit y n
rule retif [] n z -> z
rule retif (x :: y) 0 z -> []
rule retif (x :: y) (s n) z -> retif y n z
rule tryapply g a n -> len (retif a n (g (limit a n)))
rule tryall g emptyset n -> 0
rule tryall g (setcons a tl) n -> max (tryapply g a n) (tryall g tl n)
rule add 0 y -> y
rule add (s x) y -> s (add x y)
rule mult 0 y -> 0
rule mult (s x) y -> add y (mult x y)
rule extract (split (L x) (R y)) -> clean y
rule minus x nzero -> x
rule minus 0 (nsucc y) -> 0
rule minus (s x) (nsucc y) -> minus x y
";

const FIXED_INTERP: &str = "\
bound bit 0
size o = 0
size i = 0
size b = 0
size [] = 0
size cons = \\x y. x + y + 1
size L = \\x. x
size R = \\x. x
size split = \\x y. x + y
size 0 = 0
size s = \\x. x + 1
size nzero = 0
size nsucc = \\x. x + 1
size emptyset = 0
size setcons = \\x y. y + 1
size step = \\F x. x + 1
cost step = \\Fc Fs x. Fc(x) + x + 2
size clean = \\x. x
cost clean = \\x. x + 1
size len = \\x. x
cost len = \\x. x + 1
size max = \\n m. max(n, m)
cost max = \\n m. n + 1
size limit = \\x n. n
cost limit = \\x n. n + 1
size retif = \\x n z. z
cost retif = \\x n z. n + 1
size tryapply = \\F a n. F(n)
cost tryapply = \\Fc Fs a n. Fc(n) + Fs(n) + 2*n + 4
size tryall = \\F a n. F(n)
cost tryall = \\Fc Fs a n. 1 + a*(Fc(n) + 2*Fs(n) + 2*n + 6)
size add = \\x y. x + y
cost add = \\x y. x + 1
size mult = \\x y. x*y
cost mult = \\x y. x*y + 2*x + 1
size extract = \\x. x
cost extract = \\x. x + 2
size minus = \\x y. monus(x, y)
cost minus = \\x y. x + 1
";

fn plus(a: CsExpr, b: CsExpr) -> CsExpr {
    match (a, b) {
        (CsExpr::Num(0), e) | (e, CsExpr::Num(0)) => e,
        (CsExpr::Num(x), CsExpr::Num(y)) => CsExpr::Num(x.saturating_add(y)),
        (a, b) => CsExpr::add(a, b),
    }
}

fn times(a: CsExpr, b: CsExpr) -> CsExpr {
    match (a, b) {
        (CsExpr::Num(0), _) | (_, CsExpr::Num(0)) => CsExpr::Num(0),
        (CsExpr::Num(1), e) | (e, CsExpr::Num(1)) => e,
        (a, b) => CsExpr::mul(a, b),
    }
}

fn total<const N: usize>(items: [CsExpr; N]) -> CsExpr {
    items.into_iter().fold(num(0), plus)
}

fn num(n: u64) -> CsExpr {
    CsExpr::Num(n)
}

fn var(x: &str) -> CsExpr {
    CsExpr::var(x)
}

fn call(f: &str, arg: CsExpr) -> CsExpr {
    CsExpr::app(f, vec![arg])
}

/// `P(fun, arg)`: every variable becomes `arg`, every application uses `fun`.
fn poly_expr(p: &SoPoly, fun: &str, arg: &CsExpr) -> CsExpr {
    match p {
        SoPoly::Const(n) => num(*n),
        SoPoly::Var(_) => arg.clone(),
        SoPoly::Add(items) => items
            .iter()
            .map(|q| poly_expr(q, fun, arg))
            .fold(num(0), plus),
        SoPoly::Mul(items) => items
            .iter()
            .map(|q| poly_expr(q, fun, arg))
            .fold(num(1), times),
        SoPoly::App(_, q) => call(fun, poly_expr(q, fun, arg)),
    }
}

/// Size and total-cost polynomials of a `Θ` term: `size`, and `cost = a*set + rest`.
#[derive(Clone, Debug)]
pub struct ThetaCost {
    pub size: CsExpr,
    pub per_set: CsExpr,
    pub rest: CsExpr,
}

fn theta_combine(parts: Vec<ThetaCost>, mul: bool) -> ThetaCost {
    let mut it = parts.into_iter();
    let Some(mut acc) = it.next() else {
        return ThetaCost {
            size: num(if mul { 1 } else { 0 }),
            per_set: num(0),
            rest: num(0),
        };
    };
    for r in it {
        let step = if mul {
            plus(
                plus(
                    times(acc.size.clone(), r.size.clone()),
                    times(num(2), acc.size.clone()),
                ),
                num(1),
            )
        } else {
            plus(acc.size.clone(), num(1))
        };
        let size = if mul {
            times(acc.size, r.size)
        } else {
            plus(acc.size, r.size)
        };
        acc = ThetaCost {
            size,
            per_set: plus(acc.per_set, r.per_set),
            rest: plus(plus(acc.rest, r.rest), step),
        };
    }
    acc
}

/// Cost structure of `Θ^p` over cost/size functions `Fc`/`Fs`, input length `z` and set size `a`.
pub fn theta_cost(p: &SoPoly, z: &CsExpr) -> ThetaCost {
    match p {
        SoPoly::Const(n) => ThetaCost {
            size: num(*n),
            per_set: num(0),
            rest: num(0),
        },
        SoPoly::Var(_) => ThetaCost {
            size: z.clone(),
            per_set: num(0),
            rest: num(0),
        },
        SoPoly::Add(items) => {
            theta_combine(items.iter().map(|q| theta_cost(q, z)).collect(), false)
        }
        SoPoly::Mul(items) => theta_combine(items.iter().map(|q| theta_cost(q, z)).collect(), true),
        SoPoly::App(_, q) => {
            let inner = theta_cost(q, z);
            let s = inner.size.clone();
            let per_call = plus(
                plus(
                    plus(call("Fc", s.clone()), times(num(2), call("Fs", s.clone()))),
                    times(num(2), s.clone()),
                ),
                num(6),
            );
            ThetaCost {
                size: call("Fs", s),
                per_set: plus(inner.per_set, per_call),
                rest: plus(inner.rest, num(1)),
            }
        }
    }
}

/// `Θ^p + 1`, built as `add Θ^p (s 0)`.
fn theta_cost_succ(p: &SoPoly, z: &CsExpr) -> ThetaCost {
    theta_combine(
        vec![
            theta_cost(p, z),
            ThetaCost {
                size: num(1),
                per_set: num(0),
                rest: num(0),
            },
        ],
        false,
    )
}

fn sig_sym(sig: &Signature, name: &str) -> Result<Term> {
    let d = sig
        .symbol(name)
        .ok_or_else(|| Error::invalid(format!("signature lacks {name}")))?;
    Ok(Term::sym(name, d.ty.clone()))
}

fn unary(sig: &Signature, n: u64) -> Result<Term> {
    let s = sig_sym(sig, "s")?;
    (0..n).try_fold(sig_sym(sig, "0")?, |acc, _| Term::app(s.clone(), acc))
}

/// The term computing `p(limitsize(f, A), n)` from `f_term`, unary `z_term` and set `a_term`.
pub fn build_theta(
    sig: &Signature,
    p: &SoPoly,
    f_term: &Term,
    z_term: &Term,
    a_term: &Term,
) -> Result<Term> {
    let fold = |items: &[SoPoly], op: &str, unit: u64| -> Result<Term> {
        let mut parts = items
            .iter()
            .map(|q| build_theta(sig, q, f_term, z_term, a_term));
        let Some(first) = parts.next() else {
            return unary(sig, unit);
        };
        let op = sig_sym(sig, op)?;
        parts.try_fold(first?, |acc, q| Term::apply_all(op.clone(), [acc, q?]))
    };
    match p {
        SoPoly::Const(n) => unary(sig, *n),
        SoPoly::Var(_) => Ok(z_term.clone()),
        SoPoly::Add(items) => fold(items, "add", 0),
        SoPoly::Mul(items) => fold(items, "mult", 1),
        SoPoly::App(_, q) => {
            let inner = build_theta(sig, q, f_term, z_term, a_term)?;
            Term::apply_all(
                sig_sym(sig, "tryall")?,
                [f_term.clone(), a_term.clone(), inner],
            )
        }
    }
}

fn check_poly(p: &SoPoly) -> Result<()> {
    fn vars(p: &SoPoly, out: &mut Vec<String>) {
        match p {
            SoPoly::Var(x) => out.push(x.to_string()),
            SoPoly::Add(v) | SoPoly::Mul(v) => v.iter().for_each(|q| vars(q, out)),
            SoPoly::App(_, q) => vars(q, out),
            SoPoly::Const(_) => {}
        }
    }
    let mut vs = Vec::new();
    vars(p, &mut vs);
    vs.sort();
    vs.dedup();
    if vs.len() > 1 {
        return Err(Error::invalid(format!(
            "runtime polynomial has several variables: {}",
            vs.join(", ")
        )));
    }
    Ok(())
}

fn list_text(items: &[&str], tail: &str) -> String {
    let mut s = tail.to_string();
    for x in items.iter().rev() {
        s = format!("{x} :: {s}");
    }
    if items.is_empty() {
        s
    } else {
        format!("({s})")
    }
}

/// Lhs/rhs of the active tape for one transition: zero or more `(L pat, R pat) -> (L, R)` cases.
fn tape_cases(t: &Transition) -> Vec<((String, String), (String, String))> {
    let w = t.write.symbol();
    let r = t.read.symbol();
    let mut out = Vec::new();
    let lefts = |d: Move| -> Vec<bool> {
        if d == Move::L {
            vec![true, false]
        } else {
            vec![true]
        }
    };
    // each read pattern: (R lhs text, tail after the head cell)
    let reads: Vec<(String, String)> = if t.read == Cell::Blank {
        vec![
            ("[]".into(), "[]".into()),
            (list_text(&["b"], "z"), "z".into()),
        ]
    } else {
        vec![(list_text(&[r], "z"), "z".into())]
    };
    for (rpat, tail) in &reads {
        for nonempty in lefts(t.dir) {
            let case = match (t.dir, nonempty) {
                (Move::L, true) => (
                    (list_text(&["x"], "y"), rpat.clone()),
                    ("y".into(), list_text(&["x", w], tail)),
                ),
                (Move::L, false) => (
                    ("[]".into(), rpat.clone()),
                    ("[]".into(), list_text(&[w], tail)),
                ),
                (Move::R, _) => (
                    ("y".into(), rpat.clone()),
                    (list_text(&[w], "y"), tail.clone()),
                ),
            };
            out.push(case);
        }
    }
    out
}

fn step_rules(spec: &OtmSpec, out: &mut String) {
    for t in &spec.transitions {
        for ((ll, rl), (lr, rr)) in tape_cases(t) {
            let active_l = format!("(split (L {ll}) (R {rl}))");
            let active_r = format!("(split (L {lr}) (R {rr}))");
            let mut lhs_tapes = vec!["t1".to_string(), "t2".into(), "t3".into()];
            let mut rhs_tapes = lhs_tapes.clone();
            lhs_tapes[t.tape - 1] = active_l;
            rhs_tapes[t.tape - 1] = active_r;
            let _ = writeln!(
                out,
                "rule step g ({} {}) -> {} {}",
                state_symbol(&t.from),
                lhs_tapes.join(" "),
                state_symbol(&t.to),
                rhs_tapes.join(" ")
            );
        }
    }
    if let (Some(q), Some(a)) = (&spec.query, &spec.answer) {
        let _ = writeln!(
            out,
            "rule step g ({} t1 (split x (R y)) t3) -> {} t1 (split (L []) (R [])) (split (L []) (R (g (clean y))))",
            state_symbol(q),
            state_symbol(a)
        );
    }
}

/// Compiles a machine with runtime bound `pm` into a rewriting system whose main symbol `F`
/// computes the machine's functional, together with a cost-size interpretation.
pub fn compile_otm(spec: &OtmSpec, pm: &SoPoly) -> Result<CompiledOtm> {
    spec.validate()?;
    check_poly(pm)?;
    let mut text = String::from(DECLS);
    let mut states: Vec<String> = spec.states().iter().map(|s| state_symbol(s)).collect();
    states.sort();
    for s in &states {
        let _ = writeln!(text, "cons {s} : tape -> tape -> tape -> config");
    }
    let strs0 = parse_strs(&text)?;
    let sig = &strs0.signature;
    let word = crate::types::SimpleType::base("word");
    let g = Term::var("g", crate::types::SimpleType::arrow(word.clone(), word));
    let z = Term::var("z", crate::types::SimpleType::base("nat"));
    let a = Term::var("a", crate::types::SimpleType::base("set"));
    let pm_succ = SoPoly::Add(vec![pm.clone(), SoPoly::Const(1)]);
    let theta_empty = build_theta(sig, &pm_succ, &g, &z, &sig_sym(sig, "emptyset")?)?;
    let theta_a = build_theta(sig, &pm_succ, &g, &z, &a)?;

    step_rules(spec, &mut text);
    text.push_str(HELPER_RULES);
    let q0 = state_symbol(&spec.start);
    let blank = "(split (L []) (R []))";
    let _ = writeln!(
        text,
        "rule F g w -> F' g (len w) ({q0} (split (L []) (R w)) {blank} {blank})"
    );
    let _ = writeln!(
        text,
        "rule F' g z c -> execute g ({theta_empty}) nzero z emptyset c"
    );
    for q in spec.states() {
        let sq = state_symbol(&q);
        if q == spec.final_state {
            let _ = writeln!(text, "rule execute g n m z a ({sq} t1 t2 t3) -> extract t1");
        } else if Some(&q) == spec.query.as_ref() {
            let _ = writeln!(
                text,
                "rule execute g (s n) m z a ({sq} t1 t2 t3) -> execute' g n (nsucc m) z (setcons (extract t2) a) ({sq} t1 t2 t3)"
            );
        } else {
            let _ = writeln!(
                text,
                "rule execute g (s n) m z a ({sq} t1 t2 t3) -> execute g n (nsucc m) z a (step g ({sq} t1 t2 t3))"
            );
        }
    }
    let _ = writeln!(
        text,
        "rule execute' g n m z a c -> execute g (minus ({theta_a}) m) m z a (step g c)"
    );
    let strs = parse_strs(&text)?;

    let csi = interpretation_text(pm, &states);
    let interp = parse_interp(&csi, &strs)?;
    Ok(CompiledOtm {
        strs_text: text,
        csi_text: csi,
        strs,
        interp,
    })
}

fn interpretation_text(pm: &SoPoly, states: &[String]) -> String {
    let mut csi = String::from(FIXED_INTERP);
    for s in states {
        let _ = writeln!(csi, "size {s} = \\x y z. x + y");
    }
    let p_size = |f: &str, x: &str| poly_expr(pm, f, &var(x));
    // budget measure: max(P + 1 - m, n)
    let theta = |f: &str| {
        CsExpr::max(
            CsExpr::monus(plus(p_size(f, "z"), num(1)), var("m")),
            var("n"),
        )
    };
    let z_cost = theta_cost_succ(pm, &var("z"));
    let n_cost = theta_cost_succ(pm, &var("n"));
    let poly = |tc: &ThetaCost, x: CsExpr| plus(times(x, tc.per_set.clone()), tc.rest.clone());

    let _ = writeln!(
        csi,
        "size execute = \\F n m z a c. {}",
        plus(var("c"), theta("F"))
    );
    let _ = writeln!(
        csi,
        "size execute' = \\F n m z a c. {}",
        plus(plus(var("c"), num(1)), theta("F"))
    );
    let th = theta("Fs");
    let pz = p_size("Fs", "z");
    let exec_inner = |extra: u64, a_arg: CsExpr| {
        let tc = plus(plus(th.clone(), var("c")), num(extra));
        total([
            num(5),
            times(num(2), tc.clone()),
            call("Fc", tc),
            poly(&z_cost, a_arg),
            pz.clone(),
        ])
    };
    let exec_cost = total([
        times(th.clone(), exec_inner(0, plus(th.clone(), var("a")))),
        num(3),
        times(num(2), th.clone()),
        var("c"),
    ]);
    let _ = writeln!(csi, "cost execute = \\Fc Fs n m z a c. {exec_cost}");
    let exec2_cost = plus(
        times(
            plus(th.clone(), num(1)),
            exec_inner(1, plus(th.clone(), var("a"))),
        ),
        num(2),
    );
    let _ = writeln!(csi, "cost execute' = \\Fc Fs n m z a c. {exec2_cost}");

    let _ = writeln!(
        csi,
        "size F = \\F n. {}",
        plus(plus(var("n"), p_size("F", "n")), num(1))
    );
    let _ = writeln!(
        csi,
        "size F' = \\F z c. {}",
        plus(plus(var("c"), p_size("F", "z")), num(1))
    );
    let main_cost = |len: &str, cfg: &str, tc: &ThetaCost, outer: CsExpr| {
        let p = p_size("Fs", len);
        let inner = total([
            num(9),
            times(num(3), p.clone()),
            times(num(2), var(cfg)),
            call("Fc", plus(plus(p.clone(), num(1)), var(cfg))),
            poly(tc, plus(p.clone(), num(1))),
        ]);
        total([times(plus(p, num(1)), inner), outer, poly(tc, num(0))])
    };
    let f_cost = main_cost("n", "n", &n_cost, plus(num(6), times(num(2), var("n"))));
    let _ = writeln!(csi, "cost F = \\Fc Fs n. {f_cost}");
    let f2_cost = main_cost("z", "c", &z_cost, plus(num(4), var("c")));
    let _ = writeln!(csi, "cost F' = \\Fc Fs z c. {f2_cost}");
    csi
}
