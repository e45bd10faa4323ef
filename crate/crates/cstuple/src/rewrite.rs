//! Innermost rewriting with built-in oracle steps, type-2 computation and runtime monitors.

use std::fmt;

use crate::error::{Error, Result};
use crate::interp::{check_poly_bounded, CsInterp, Evaluator, Numeric, Valuation};
use crate::sopoly::{build_b, build_d, table_length, Coef, OracleTable, PolyEnv, SoPoly};
use crate::strs::Strs;
use crate::subst::{apply_subst, match_term, Substitution};
use crate::term::{Position, Term, TermKind};
use crate::types::{Name, SimpleType, SymbolKind};
use crate::word::{decode_word, Word, WordSyms};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// What fired in a step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepRule {
    Rule(usize),
    Oracle {
        symbol: Name,
        query: Word,
        answer: Word,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub position: Position,
    pub rule: StepRule,
    pub nodes_before: usize,
    pub nodes_after: usize,
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Rule(i) => write!(f, "{i}"),
            StepRule::Oracle {
                symbol,
                query,
                answer,
            } => {
                let show = |w: &Word| {
                    if w.is_empty() {
                        "_".to_string()
                    } else {
                        w.to_string()
                    }
                };
                write!(f, "oracle:{symbol}:{}:{}", show(query), show(answer))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub steps: u64,
    pub oracle_calls: u64,
    pub max_query: u64,
    pub max_nodes: usize,
    pub normal_form: bool,
}

impl fmt::Display for RunStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps {}", self.steps)?;
        writeln!(f, "oracle-calls {}", self.oracle_calls)?;
        writeln!(f, "max-query {}", self.max_query)?;
        writeln!(f, "max-nodes {}", self.max_nodes)?;
        write!(f, "normal-form {}", self.normal_form)
    }
}

/// Result of a (possibly budget-limited) reduction.
#[derive(Clone, Debug)]
pub struct Run {
    pub term: Term,
    pub trace: Vec<StepRecord>,
    pub stats: RunStats,
}

/// A redex found at some position.
#[derive(Clone, Debug)]
pub enum Redex {
    Rule { index: usize, subst: Substitution },
    Oracle { symbol: Name, query: Word },
}

/// Classifies `t` as a root redex; errors for an oracle call on a normal non-word argument.
fn root_redex(strs: &Strs, t: &Term) -> Result<Option<Redex>> {
    if !t.ty().is_base() {
        return Ok(None);
    }
    let Some(f) = t.head_symbol() else {
        return Ok(None);
    };
    match strs.kind_of(f) {
        Some(SymbolKind::Defined) => {
            for &i in strs.rules_for(f) {
                if let Some(subst) = match_term(&strs.rules[i].lhs, t) {
                    return Ok(Some(Redex::Rule { index: i, subst }));
                }
            }
            Ok(None)
        }
        Some(SymbolKind::Oracle) => {
            let (_, args) = t.spine();
            if args.len() != 1 {
                return Ok(None);
            }
            match decode_word(args[0]) {
                Some(query) => Ok(Some(Redex::Oracle {
                    symbol: f.clone(),
                    query,
                })),
                None => Err(Error::OracleArg(args[0].to_string())),
            }
        }
        _ => Ok(None),
    }
}

/// Leftmost-innermost redex: the first redex in post-order, child 1 before child 2.
pub fn find_innermost_redex(strs: &Strs, s: &Term) -> Result<Option<(Position, Redex)>> {
    fn go(strs: &Strs, t: &Term, path: &mut Vec<u8>) -> Result<Option<(Position, Redex)>> {
        if let TermKind::App(l, r) = t.kind() {
            for (d, child) in [(1u8, l), (2u8, r)] {
                path.push(d);
                let found = go(strs, child, path)?;
                path.pop();
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
        Ok(root_redex(strs, t)?.map(|r| (Position(path.clone()), r)))
    }
    go(strs, s, &mut Vec::new())
}

fn word_syms(strs: &Strs) -> Result<WordSyms> {
    WordSyms::new(&strs.signature)
}

fn contract(strs: &Strs, oracle: Option<&OracleTable>, redex: &Redex) -> Result<(Term, StepRule)> {
    match redex {
        Redex::Rule { index, subst } => Ok((
            apply_subst(subst, &strs.rules[*index].rhs),
            StepRule::Rule(*index),
        )),
        Redex::Oracle { symbol, query } => {
            let table = oracle
                .ok_or_else(|| Error::invalid(format!("no oracle table bound to {symbol}")))?;
            let answer = table.lookup(query)?;
            let term = word_syms(strs)?.encode(&answer);
            Ok((
                term,
                StepRule::Oracle {
                    symbol: symbol.clone(),
                    query: query.clone(),
                    answer,
                },
            ))
        }
    }
}

/// One leftmost-innermost step; `None` when `s` is a normal form.
pub fn step(
    strs: &Strs,
    oracle: Option<&OracleTable>,
    s: &Term,
) -> Result<Option<(Term, StepRecord)>> {
    let Some((pos, redex)) = find_innermost_redex(strs, s)? else {
        return Ok(None);
    };
    let old = s.subterm(&pos).expect("redex position exists");
    let (new, rule) = contract(strs, oracle, &redex)?;
    let nodes_before = s.size();
    let nodes_after = nodes_before - old.size() + new.size();
    let next = s
        .replace_at(&pos, new)
        .expect("contractum has the redex type");
    Ok(Some((
        next,
        StepRecord {
            position: pos,
            rule,
            nodes_before,
            nodes_after,
        },
    )))
}

/// Recursive innermost evaluator producing the same step sequence as iterating [`step`].
pub struct Engine<'a> {
    strs: &'a Strs,
    oracle: Option<&'a OracleTable>,
    words: Option<WordSyms>,
    max_steps: u64,
    trace: Option<Vec<StepRecord>>,
    stats: RunStats,
    nodes: usize,
    stopped: bool,
}

impl<'a> Engine<'a> {
    pub fn new(strs: &'a Strs, oracle: Option<&'a OracleTable>, max_steps: u64) -> Self {
        Engine {
            strs,
            oracle,
            words: word_syms(strs).ok(),
            max_steps,
            trace: None,
            stats: RunStats::default(),
            nodes: 0,
            stopped: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn run(mut self, s: &Term) -> Result<Run> {
        self.nodes = s.size();
        self.stats.max_nodes = self.nodes;
        let mut path = Vec::new();
        let term = self.eval(s, &mut path)?;
        self.stats.normal_form = !self.stopped;
        Ok(Run {
            term,
            trace: self.trace.unwrap_or_default(),
            stats: self.stats,
        })
    }

    fn record(&mut self, path: &[u8], rule: StepRule, old: usize, new: usize) {
        let before = self.nodes;
        self.nodes = before - old + new;
        self.stats.steps += 1;
        self.stats.max_nodes = self.stats.max_nodes.max(self.nodes);
        if let StepRule::Oracle { query, .. } = &rule {
            self.stats.oracle_calls += 1;
            self.stats.max_query = self.stats.max_query.max(query.len() as u64);
        }
        if let Some(tr) = &mut self.trace {
            tr.push(StepRecord {
                position: Position(path.to_vec()),
                rule,
                nodes_before: before,
                nodes_after: self.nodes,
            });
        }
    }

    fn eval(&mut self, t: &Term, path: &mut Vec<u8>) -> Result<Term> {
        if self.stopped {
            return Ok(t.clone());
        }
        let t = match t.kind() {
            TermKind::App(l, r) => {
                path.push(1);
                let l2 = self.eval(l, path)?;
                path.pop();
                path.push(2);
                let r2 = self.eval(r, path)?;
                path.pop();
                if l2.ptr_eq(l) && r2.ptr_eq(r) {
                    t.clone()
                } else {
                    Term::app_typed(l2, r2, t.ty().clone())
                }
            }
            _ => t.clone(),
        };
        self.reduce_root(t, path)
    }

    fn reduce_root(&mut self, t: Term, path: &mut Vec<u8>) -> Result<Term> {
        if self.stopped {
            return Ok(t);
        }
        let Some(redex) = root_redex(self.strs, &t)? else {
            return Ok(t);
        };
        if self.stats.steps >= self.max_steps {
            self.stopped = true;
            return Ok(t);
        }
        match redex {
            Redex::Rule { index, subst } => {
                let rhs = &self.strs.rules[index].rhs;
                let new_size = instance_size(rhs, &subst);
                self.record(path, StepRule::Rule(index), t.size(), new_size);
                self.build(rhs, &subst, path)
            }
            Redex::Oracle { symbol, query } => {
                let table = self
                    .oracle
                    .ok_or_else(|| Error::invalid(format!("no oracle table bound to {symbol}")))?;
                let answer = table.lookup(&query)?;
                let words = self
                    .words
                    .as_ref()
                    .ok_or_else(|| Error::invalid("oracle use needs word constructors"))?;
                let term = words.encode(&answer);
                self.record(
                    path,
                    StepRule::Oracle {
                        symbol,
                        query,
                        answer,
                    },
                    t.size(),
                    term.size(),
                );
                Ok(term)
            }
        }
    }

    /// Instantiates and evaluates a rule rhs; bindings are already normal.
    fn build(&mut self, r: &Term, subst: &Substitution, path: &mut Vec<u8>) -> Result<Term> {
        if self.stopped {
            return Ok(apply_subst(subst, r));
        }
        match r.kind() {
            TermKind::Var(x) => Ok(subst
                .get(x)
                .cloned()
                .expect("rhs variables are bound by the lhs")),
            TermKind::Sym(_) => self.reduce_root(r.clone(), path),
            TermKind::App(l, a) => {
                path.push(1);
                let l2 = self.build(l, subst, path)?;
                path.pop();
                path.push(2);
                let a2 = self.build(a, subst, path)?;
                path.pop();
                self.reduce_root(Term::app_typed(l2, a2, r.ty().clone()), path)
            }
        }
    }
}

fn instance_size(r: &Term, subst: &Substitution) -> usize {
    match r.kind() {
        TermKind::Var(x) => subst.get(x).map_or(1, |t| t.size()),
        TermKind::Sym(_) => 1,
        TermKind::App(l, a) => 1 + instance_size(l, subst) + instance_size(a, subst),
    }
}

/// Innermost normalization with a full trace; stops (without error) after `max_steps`.
pub fn normalize(
    strs: &Strs,
    oracle: Option<&OracleTable>,
    s: &Term,
    max_steps: u64,
) -> Result<Run> {
    Engine::new(strs, oracle, max_steps).with_trace().run(s)
}

/// Same as [`normalize`] but iterating [`step`] on whole terms.
pub fn normalize_by_steps(
    strs: &Strs,
    oracle: Option<&OracleTable>,
    s: &Term,
    max_steps: u64,
) -> Result<Run> {
    let mut cur = s.clone();
    let mut trace = Vec::new();
    let mut stats = RunStats {
        max_nodes: s.size(),
        ..Default::default()
    };
    loop {
        if stats.steps >= max_steps {
            if find_innermost_redex(strs, &cur)?.is_none() {
                stats.normal_form = true;
            }
            break;
        }
        match step(strs, oracle, &cur)? {
            None => {
                stats.normal_form = true;
                break;
            }
            Some((next, rec)) => {
                stats.steps += 1;
                stats.max_nodes = stats.max_nodes.max(rec.nodes_after);
                if let StepRule::Oracle { query, .. } = &rec.rule {
                    stats.oracle_calls += 1;
                    stats.max_query = stats.max_query.max(query.len() as u64);
                }
                trace.push(rec);
                cur = next;
            }
        }
    }
    Ok(Run {
        term: cur,
        trace,
        stats,
    })
}

/// `(word ⇒ word) ⇒ word ⇒ word`
pub fn type2_type() -> SimpleType {
    let word = SimpleType::base("word");
    SimpleType::curried(
        vec![SimpleType::arrow(word.clone(), word.clone()), word.clone()],
        word,
    )
}

/// Output of a type-2 computation.
#[derive(Clone, Debug)]
pub struct Type2Run {
    pub output: Word,
    pub stats: RunStats,
}

/// Normalizes `F S_f ⌜w⌝` and decodes the result.
pub fn compute_type2(
    strs: &Strs,
    main: &str,
    oracle: &OracleTable,
    w: &Word,
    max_steps: u64,
) -> Result<Type2Run> {
    let (strs, sf) = strs.with_oracle_symbol()?;
    let decl = strs
        .signature
        .symbol(main)
        .ok_or_else(|| Error::invalid(format!("unknown main symbol {main}")))?;
    if decl.ty != type2_type() {
        return Err(Error::invalid(format!(
            "main symbol {main} has type {}, expected {}",
            decl.ty,
            type2_type()
        )));
    }
    let words = WordSyms::new(&strs.signature)?;
    let word = SimpleType::base("word");
    let start = Term::apply_all(
        Term::sym(main, decl.ty.clone()),
        [
            Term::sym(sf, SimpleType::arrow(word.clone(), word)),
            words.encode(w),
        ],
    )?;
    let run = Engine::new(&strs, Some(oracle), max_steps).run(&start)?;
    if !run.stats.normal_form {
        return Err(Error::Budget(max_steps));
    }
    let output = decode_word(&run.term).ok_or_else(|| Error::NotAWord(run.term.to_string()))?;
    Ok(Type2Run {
        output,
        stats: run.stats,
    })
}

/// Observed steps and query lengths against the derived polynomial bounds.
#[derive(Clone, Debug)]
pub struct MonitorReport {
    pub output: Word,
    pub steps: u64,
    pub d_value: u64,
    pub max_query: u64,
    pub b_value: u64,
    pub d_poly: SoPoly,
    pub b_poly: SoPoly,
    pub ok: bool,
}

impl fmt::Display for MonitorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "D {}", self.d_poly)?;
        writeln!(f, "B {}", self.b_poly)?;
        writeln!(
            f,
            "steps {} <= {} {}",
            self.steps,
            self.d_value,
            self.steps <= self.d_value
        )?;
        write!(
            f,
            "max-query {} <= {} {}",
            self.max_query,
            self.b_value,
            self.max_query <= self.b_value
        )
    }
}

pub fn monitor_bounds(
    strs: &Strs,
    interp: &CsInterp,
    main: &str,
    oracle: &OracleTable,
    w: &Word,
    max_steps: u64,
) -> Result<MonitorReport> {
    let rep = check_poly_bounded(interp, strs, main);
    if !rep.ok {
        return Err(Error::invalid(format!(
            "interpretation is not polynomially bounded: {}",
            rep.failures.join("; ")
        )));
    }
    let p = rep.poly.expect("bounded report carries the polynomial");
    let (mu, nu) = (Coef::Num(rep.mu), Coef::Num(rep.nu));
    let d_poly = build_d(&p, &mu, &nu);
    let b_poly = build_b(&p, &mu, &nu);
    let run = compute_type2(strs, main, oracle, w, max_steps)?;
    let n = w.len() as u64;
    let length = |k: u64| table_length(oracle, k);
    let d_value = d_poly.eval(&PolyEnv::new().var("n", n).fun("F", length))?;
    let b_value = b_poly.eval(&PolyEnv::new().var("y", n).fun("G", length))?;
    let ok = run.stats.steps <= d_value && run.stats.max_query <= b_value;
    Ok(MonitorReport {
        output: run.output,
        steps: run.stats.steps,
        d_value,
        max_query: run.stats.max_query,
        b_value,
        d_poly,
        b_poly,
        ok,
    })
}

/// Per-step check that total reducible cost strictly drops and size weakly drops.
#[derive(Clone, Debug)]
pub struct CompatibilityReport {
    pub steps: u64,
    pub start_cost: u64,
    /// First violating step (1-based) with a description.
    pub violation: Option<(u64, String)>,
    pub normal_form: bool,
}

pub fn monitor_compatibility(
    strs: &Strs,
    interp: &CsInterp,
    s: &Term,
    max_steps: u64,
) -> Result<CompatibilityReport> {
    let val = Valuation::<Numeric>::new();
    let ev = Evaluator::new(interp, &val).with_rules(strs);
    let dir = strs.signature.direction(s.ty().result_sort());
    let measure = |t: &Term| -> Result<(u64, u64)> {
        let a = ev.analyze(t)?;
        Ok((a.total_reducible, a.size.base()?))
    };
    let (start_cost, mut size) = measure(s)?;
    let mut cost = start_cost;
    let mut cur = s.clone();
    let mut steps = 0;
    while steps < max_steps {
        let Some((next, rec)) = step(strs, None, &cur)? else {
            return Ok(CompatibilityReport {
                steps,
                start_cost,
                violation: None,
                normal_form: true,
            });
        };
        steps += 1;
        let (c2, s2) = measure(&next)?;
        if c2 >= cost || !dir.geq(size, s2) {
            let msg = format!(
                "step {steps} at {} by rule {}: cost {cost} -> {c2}, size {size} -> {s2}",
                rec.position, rec.rule
            );
            return Ok(CompatibilityReport {
                steps,
                start_cost,
                violation: Some((steps, msg)),
                normal_form: false,
            });
        }
        cost = c2;
        size = s2;
        cur = next;
    }
    Ok(CompatibilityReport {
        steps,
        start_cost,
        violation: None,
        normal_form: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_strs, parse_term};

    const ARITH: &str = "sort nat\ncons 0 : nat\ncons s : nat -> nat\n\
        fn add : nat -> nat -> nat\nfn mult : nat -> nat -> nat\n\
        rule add 0 y -> y\nrule add (s x) y -> s (add x y)\n\
        rule mult 0 y -> 0\nrule mult (s x) y -> add y (mult x y)\n";

    const WORDS: &str = "sort bit\nsort word\ncons o : bit\ncons i : bit\ncons [] : word\n\
        cons cons : bit -> word -> word\noracle S_f : word -> word\n\
        fn F : (word -> word) -> word -> word\nfn G : (word -> word) -> word -> word\n\
        fn id : word -> word\nrule F g x -> g x\nrule G g x -> x\nrule id x -> x\n";

    fn t(strs: &Strs, s: &str) -> Term {
        parse_term(&strs.signature, s).unwrap()
    }

    #[test]
    fn innermost_positions() {
        let strs = parse_strs(ARITH).unwrap();
        let (p, _) = find_innermost_redex(&strs, &t(&strs, "add 0 (add 0 0)"))
            .unwrap()
            .unwrap();
        assert_eq!(p.to_string(), "2");
        assert!(find_innermost_redex(&strs, &t(&strs, "s (s 0)"))
            .unwrap()
            .is_none());
        let (p, _) = find_innermost_redex(&strs, &t(&strs, "mult (s 0) (add 0 0)"))
            .unwrap()
            .unwrap();
        assert_eq!(p.to_string(), "2");
    }

    #[test]
    fn add_two_three() {
        let strs = parse_strs(ARITH).unwrap();
        let run = normalize(&strs, None, &t(&strs, "add (s (s 0)) (s (s (s 0)))"), 100).unwrap();
        assert_eq!(run.term.to_string(), "s (s (s (s (s 0))))");
        assert_eq!(run.stats.steps, 3);
        assert!(run.stats.normal_form);
        let (next, rec) = step(&strs, None, &t(&strs, "add (s 0) 0"))
            .unwrap()
            .unwrap();
        assert_eq!(next.to_string(), "s (add 0 0)");
        assert_eq!(rec.rule, StepRule::Rule(1));
        let run = normalize(&strs, None, &t(&strs, "mult 0 (s (s 0))"), 100).unwrap();
        assert_eq!((run.term.to_string().as_str(), run.stats.steps), ("0", 1));
    }

    #[test]
    fn engines_agree_on_traces() {
        let strs = parse_strs(ARITH).unwrap();
        let s = t(
            &strs,
            "mult (s (s (s 0))) (add (s 0) (mult (s (s 0)) (s 0)))",
        );
        let fast = normalize(&strs, None, &s, 1000).unwrap();
        let slow = normalize_by_steps(&strs, None, &s, 1000).unwrap();
        assert_eq!(fast.term, slow.term);
        assert_eq!(fast.trace, slow.trace);
        assert_eq!(fast.stats, slow.stats);
    }

    #[test]
    fn budget_returns_partial_term() {
        let strs = parse_strs(ARITH).unwrap();
        let s = t(&strs, "add (s (s 0)) (s 0)");
        let run = normalize(&strs, None, &s, 2).unwrap();
        assert!(!run.stats.normal_form);
        assert_eq!(run.stats.steps, 2);
        assert_eq!(run.term.to_string(), "s (s (add 0 (s 0)))");
        let slow = normalize_by_steps(&strs, None, &s, 2).unwrap();
        assert_eq!(slow.term, run.term);
    }

    #[test]
    fn oracle_steps() {
        let strs = parse_strs(WORDS).unwrap();
        let table: OracleTable = "0 -> 11\n".parse().unwrap();
        let (next, rec) = step(&strs, Some(&table), &t(&strs, "S_f (o :: [])"))
            .unwrap()
            .unwrap();
        assert_eq!(next.to_string(), "i :: (i :: [])");
        assert!(matches!(rec.rule, StepRule::Oracle { .. }));
        let s = t(&strs, "S_f (id (o :: []))");
        let (_, rec) = step(&strs, Some(&table), &s).unwrap().unwrap();
        assert_eq!(rec.position.to_string(), "2");
        let miss = normalize(&strs, Some(&table), &t(&strs, "S_f (i :: [])"), 10).unwrap_err();
        assert_eq!(miss, Error::OracleMiss("1".into()));
    }

    #[test]
    fn type2_programs() {
        let strs = parse_strs(WORDS).unwrap();
        let table: OracleTable = "101 -> 0011\n".parse().unwrap();
        let w: Word = "101".parse().unwrap();
        let r = compute_type2(&strs, "G", &table, &w, 100).unwrap();
        assert_eq!((r.output.clone(), r.stats.steps), (w.clone(), 1));
        let r = compute_type2(&strs, "F", &table, &w, 100).unwrap();
        assert_eq!(r.output.to_string(), "0011");
        assert_eq!(
            (r.stats.steps, r.stats.oracle_calls, r.stats.max_query),
            (2, 1, 3)
        );
        assert!(matches!(
            compute_type2(&strs, "id", &table, &w, 100),
            Err(Error::Invalid(_))
        ));
    }
}
