//! Three-tape oracle Turing machines: machine descriptions, direct simulation and the term encoding
//! of configurations.

mod compile;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sopoly::OracleTable;
use crate::term::Term;
use crate::types::{Name, Signature};
use crate::word::Word;

pub use compile::{build_theta, compile_otm, theta_cost, CompiledOtm, ThetaCost};

/// A tape symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Zero,
    One,
    Blank,
}

impl Cell {
    /// The constructor encoding this cell.
    pub fn symbol(self) -> &'static str {
        match self {
            Cell::Zero => "o",
            Cell::One => "i",
            Cell::Blank => "b",
        }
    }

    fn from_bit(b: bool) -> Cell {
        if b {
            Cell::One
        } else {
            Cell::Zero
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cell::Zero => "0",
            Cell::One => "1",
            Cell::Blank => "B",
        })
    }
}

impl FromStr for Cell {
    type Err = Error;
    fn from_str(s: &str) -> Result<Cell> {
        match s {
            "0" => Ok(Cell::Zero),
            "1" => Ok(Cell::One),
            "B" => Ok(Cell::Blank),
            _ => Err(Error::invalid(format!(
                "tape symbol must be 0, 1 or B, found {s}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    L,
    R,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: Name,
    /// 1 = main tape, 2 = query tape, 3 = answer tape.
    pub tape: usize,
    pub read: Cell,
    pub write: Cell,
    pub dir: Move,
    pub to: Name,
}

/// A deterministic oracle machine with one oracle and tapes main/query/answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OtmSpec {
    pub start: Name,
    pub final_state: Name,
    pub query: Option<Name>,
    pub answer: Option<Name>,
    pub transitions: Vec<Transition>,
}

fn valid_state_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl OtmSpec {
    /// All state names, sorted.
    pub fn states(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        out.insert(self.start.clone());
        out.insert(self.final_state.clone());
        out.extend(self.query.iter().cloned());
        out.extend(self.answer.iter().cloned());
        for t in &self.transitions {
            out.insert(t.from.clone());
            out.insert(t.to.clone());
        }
        out
    }

    /// Determinism plus the restrictions the compiler relies on.
    pub fn validate(&self) -> Result<()> {
        for s in self.states() {
            if !valid_state_name(&s) {
                return Err(Error::invalid(format!(
                    "state name {s} must be alphanumeric"
                )));
            }
        }
        if self.query.is_some() != self.answer.is_some() {
            return Err(Error::invalid(
                "query and answer states must be given together",
            ));
        }
        if let (Some(q), Some(a)) = (&self.query, &self.answer) {
            if q == a || *q == self.final_state {
                return Err(Error::invalid(
                    "query state must differ from the answer and final states",
                ));
            }
            if *a == self.final_state {
                return Err(Error::invalid(
                    "answer state must differ from the final state",
                ));
            }
        }
        let mut by_state: BTreeMap<&Name, Vec<&Transition>> = BTreeMap::new();
        for t in &self.transitions {
            if !(1..=3).contains(&t.tape) {
                return Err(Error::invalid(format!(
                    "tape must be 1, 2 or 3 in transition from {}",
                    t.from
                )));
            }
            if t.from == self.final_state {
                return Err(Error::invalid(format!(
                    "transition out of final state {}",
                    t.from
                )));
            }
            if Some(&t.from) == self.query.as_ref() {
                return Err(Error::invalid(format!(
                    "transition out of query state {}",
                    t.from
                )));
            }
            by_state.entry(&t.from).or_default().push(t);
        }
        for (q, ts) in by_state {
            if ts.iter().any(|t| t.tape != ts[0].tape) {
                return Err(Error::invalid(format!(
                    "nondeterministic: state {q} reads more than one tape"
                )));
            }
            let reads: BTreeSet<Cell> = ts.iter().map(|t| t.read).collect();
            if reads.len() != ts.len() {
                return Err(Error::invalid(format!(
                    "nondeterministic: state {q} has two transitions on one symbol"
                )));
            }
        }
        Ok(())
    }

    fn transition(&self, state: &str, config: &OtmConfig) -> Option<&Transition> {
        self.transitions
            .iter()
            .find(|t| *t.from == *state && config.tapes[t.tape - 1].read() == t.read)
    }
}

impl FromStr for OtmSpec {
    type Err = Error;
    fn from_str(text: &str) -> Result<OtmSpec> {
        let (mut start, mut fin, mut query, mut answer) = (None, None, None, None);
        let mut transitions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = line.split_whitespace().collect();
            let err = |m: &str| Error::semantic(i + 1, m.to_string());
            match words.as_slice() {
                [] => {}
                ["start", s] => start = Some(Name::from(*s)),
                ["final", s] => fin = Some(Name::from(*s)),
                ["query", s] => query = Some(Name::from(*s)),
                ["answer", s] => answer = Some(Name::from(*s)),
                ["trans", from, tape, read, write, dir, to] => {
                    let tape = tape.parse().map_err(|_| err("tape must be 1, 2 or 3"))?;
                    let dir = match *dir {
                        "L" => Move::L,
                        "R" => Move::R,
                        _ => return Err(err("move must be L or R")),
                    };
                    transitions.push(Transition {
                        from: (*from).into(),
                        tape,
                        read: read.parse().map_err(|e: Error| err(&e.to_string()))?,
                        write: write.parse().map_err(|e: Error| err(&e.to_string()))?,
                        dir,
                        to: (*to).into(),
                    });
                }
                _ => return Err(err(&format!("cannot parse `{}`", line.trim()))),
            }
        }
        let spec = OtmSpec {
            start: start.ok_or_else(|| Error::invalid("missing start state"))?,
            final_state: fin.ok_or_else(|| Error::invalid("missing final state"))?,
            query,
            answer,
            transitions,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for OtmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start {}", self.start)?;
        writeln!(f, "final {}", self.final_state)?;
        if let (Some(q), Some(a)) = (&self.query, &self.answer) {
            writeln!(f, "query {q}\nanswer {a}")?;
        }
        for t in &self.transitions {
            let d = if t.dir == Move::L { "L" } else { "R" };
            writeln!(
                f,
                "trans {} {} {} {} {d} {}",
                t.from, t.tape, t.read, t.write, t.to
            )?;
        }
        Ok(())
    }
}

/// A tape split at the head: `left` nearest cell first, `right` starting at the head.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tape {
    pub left: VecDeque<Cell>,
    pub right: VecDeque<Cell>,
}

impl Tape {
    pub fn with_word(w: &Word) -> Tape {
        Tape {
            left: VecDeque::new(),
            right: w.0.iter().map(|&b| Cell::from_bit(b)).collect(),
        }
    }

    pub fn read(&self) -> Cell {
        self.right.front().copied().unwrap_or(Cell::Blank)
    }

    /// Bits from the head up to the first blank.
    pub fn word_at_head(&self) -> Word {
        Word(
            self.right
                .iter()
                .take_while(|&&c| c != Cell::Blank)
                .map(|&c| c == Cell::One)
                .collect(),
        )
    }

    fn apply(&mut self, write: Cell, dir: Move) {
        match dir {
            Move::L => {
                self.right.pop_front();
                self.right.push_front(write);
                if let Some(x) = self.left.pop_front() {
                    self.right.push_front(x);
                }
            }
            Move::R => {
                self.right.pop_front();
                self.left.push_front(write);
            }
        }
    }

    /// Equality ignoring trailing blanks on either side.
    pub fn same_content(&self, other: &Tape) -> bool {
        fn trim(v: &VecDeque<Cell>) -> Vec<Cell> {
            let mut out: Vec<Cell> = v.iter().copied().collect();
            while out.last() == Some(&Cell::Blank) {
                out.pop();
            }
            out
        }
        trim(&self.left) == trim(&other.left) && trim(&self.right) == trim(&other.right)
    }
}

impl fmt::Display for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.left.iter().rev() {
            write!(f, "{c}")?;
        }
        f.write_str("#")?;
        for c in &self.right {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OtmConfig {
    pub state: Name,
    pub tapes: [Tape; 3],
}

impl OtmConfig {
    pub fn initial(spec: &OtmSpec, w: &Word) -> OtmConfig {
        OtmConfig {
            state: spec.start.clone(),
            tapes: [Tape::with_word(w), Tape::default(), Tape::default()],
        }
    }

    pub fn same_content(&self, other: &OtmConfig) -> bool {
        self.state == other.state
            && self
                .tapes
                .iter()
                .zip(&other.tapes)
                .all(|(a, b)| a.same_content(b))
    }
}

impl fmt::Display for OtmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.state, self.tapes[0], self.tapes[1], self.tapes[2]
        )
    }
}

/// One machine step; the query state answers the oracle call in a single step.
pub fn otm_step(spec: &OtmSpec, oracle: &OracleTable, c: &OtmConfig) -> Result<OtmConfig> {
    if c.state == spec.final_state {
        return Err(Error::Stuck(format!("{} is final", c.state)));
    }
    let mut next = c.clone();
    if Some(&c.state) == spec.query.as_ref() {
        let answer = oracle.lookup(&c.tapes[1].word_at_head())?;
        next.tapes[1] = Tape::default();
        next.tapes[2] = Tape::with_word(&answer);
        next.state = spec.answer.clone().expect("validated");
        return Ok(next);
    }
    let t = spec
        .transition(&c.state, c)
        .ok_or_else(|| Error::Stuck(format!("no transition from {c}")))?;
    next.tapes[t.tape - 1].apply(t.write, t.dir);
    next.state = t.to.clone();
    Ok(next)
}

/// Runs from the initial configuration to the final state; output is read from the main tape head.
pub fn otm_run(
    spec: &OtmSpec,
    oracle: &OracleTable,
    w: &Word,
    max_steps: u64,
) -> Result<(Word, u64)> {
    let mut c = OtmConfig::initial(spec, w);
    let mut steps = 0;
    while c.state != spec.final_state {
        if steps >= max_steps {
            return Err(Error::Budget(max_steps));
        }
        c = otm_step(spec, oracle, &c)?;
        steps += 1;
    }
    Ok((c.tapes[0].word_at_head(), steps))
}

/// The symbol encoding a machine state.
pub fn state_symbol(state: &str) -> String {
    format!("st_{state}")
}

fn sym(sig: &Signature, name: &str) -> Result<Term> {
    let d = sig
        .symbol(name)
        .ok_or_else(|| Error::invalid(format!("signature lacks {name}")))?;
    Ok(Term::sym(name, d.ty.clone()))
}

fn cell_list(sig: &Signature, cells: &VecDeque<Cell>) -> Result<Term> {
    let mut t = sym(sig, "[]")?;
    let cons = sym(sig, "cons")?;
    for c in cells.iter().rev() {
        t = Term::apply_all(cons.clone(), [sym(sig, c.symbol())?, t])?;
    }
    Ok(t)
}

fn encode_tape(sig: &Signature, tape: &Tape) -> Result<Term> {
    let l = Term::app(sym(sig, "L")?, cell_list(sig, &tape.left)?)?;
    let r = Term::app(sym(sig, "R")?, cell_list(sig, &tape.right)?)?;
    Term::apply_all(sym(sig, "split")?, [l, r])
}

/// `st_q (split (L ..) (R ..)) ..` over a compiled signature; left lists are nearest cell first.
pub fn encode_config(sig: &Signature, c: &OtmConfig) -> Result<Term> {
    let tapes = c
        .tapes
        .iter()
        .map(|t| encode_tape(sig, t))
        .collect::<Result<Vec<_>>>()?;
    Term::apply_all(sym(sig, &state_symbol(&c.state))?, tapes)
}

fn decode_cells(t: &Term) -> Result<VecDeque<Cell>> {
    let mut out = VecDeque::new();
    let mut cur = t;
    loop {
        let (head, args) = cur.spine();
        match (head.as_sym().map(|n| &**n), args.as_slice()) {
            (Some("[]"), []) => return Ok(out),
            (Some("cons"), [x, rest]) => {
                out.push_back(match x.as_sym().map(|n| &**n) {
                    Some("o") => Cell::Zero,
                    Some("i") => Cell::One,
                    Some("b") => Cell::Blank,
                    _ => return Err(Error::invalid(format!("not a tape cell: {x}"))),
                });
                cur = rest;
            }
            _ => return Err(Error::invalid(format!("not a cell list: {cur}"))),
        }
    }
}

fn decode_tape(t: &Term) -> Result<Tape> {
    let (head, args) = t.spine();
    let bad = || Error::invalid(format!("not a tape: {t}"));
    if head.as_sym().map(|n| &**n) != Some("split") || args.len() != 2 {
        return Err(bad());
    }
    let side = |s: &Term, name: &str| -> Result<VecDeque<Cell>> {
        let (h, a) = s.spine();
        if h.as_sym().map(|n| &**n) != Some(name) || a.len() != 1 {
            return Err(bad());
        }
        decode_cells(a[0])
    };
    Ok(Tape {
        left: side(args[0], "L")?,
        right: side(args[1], "R")?,
    })
}

pub fn decode_config(t: &Term) -> Result<OtmConfig> {
    let (head, args) = t.spine();
    let state = head
        .as_sym()
        .and_then(|n| n.strip_prefix("st_"))
        .ok_or_else(|| Error::invalid(format!("not a configuration: {t}")))?;
    if args.len() != 3 {
        return Err(Error::invalid(format!("not a configuration: {t}")));
    }
    Ok(OtmConfig {
        state: state.into(),
        tapes: [
            decode_tape(args[0])?,
            decode_tape(args[1])?,
            decode_tape(args[2])?,
        ],
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub const IDENTITY: &str = "start done\nfinal done\n";

    pub const BITFLIP: &str = "start init\nfinal done\n\
        trans init 2 B B R flip\n\
        trans flip 1 0 1 R mark\ntrans flip 1 1 0 R mark\ntrans flip 1 B B L back\n\
        trans mark 2 B 1 R flip\n\
        trans back 2 B B L first\n\
        trans first 2 1 B L loop\ntrans first 2 B B R done\n\
        trans loop 2 1 B L left\ntrans loop 2 B B R done\n\
        trans left 1 0 0 L loop\ntrans left 1 1 1 L loop\n";

    pub const ONE_QUERY: &str = "start init\nfinal done\nquery ask\nanswer got\n\
        trans init 2 B B R copy\n\
        trans copy 1 0 0 R put0\ntrans copy 1 1 1 R put1\ntrans copy 1 B B R back\n\
        trans put0 2 B 0 R copy\ntrans put1 2 B 1 R copy\n\
        trans back 2 B B L rew\n\
        trans rew 2 0 0 L rew\ntrans rew 2 1 1 L rew\ntrans rew 2 B B R ask\n\
        trans got 3 0 0 R out0\ntrans got 3 1 1 R out1\ntrans got 3 B B R fin\n\
        trans out0 1 B 0 R got\ntrans out1 1 B 1 R got\n\
        trans fin 1 B B L frew\n\
        trans frew 1 0 0 L frew\ntrans frew 1 1 1 L frew\ntrans frew 1 B B R done\n";

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_validate() {
        let spec: OtmSpec = ONE_QUERY.parse().unwrap();
        assert_eq!(spec.to_string().parse::<OtmSpec>().unwrap(), spec);
        let clash = "start a\nfinal z\ntrans a 1 0 0 R z\ntrans a 2 1 1 R z\n";
        assert!(clash.parse::<OtmSpec>().is_err());
        let dup = "start a\nfinal z\ntrans a 1 0 0 R z\ntrans a 1 0 1 L z\n";
        assert!(dup.parse::<OtmSpec>().is_err());
        assert!("start a\nfinal a\ntrans a 1 0 0 R a\n"
            .parse::<OtmSpec>()
            .is_err());
    }

    #[test]
    fn head_mechanics() {
        let mut t = Tape::with_word(&w("10"));
        t.apply(Cell::Blank, Move::R);
        assert_eq!(t.to_string(), "B#0");
        assert_eq!(Tape::default().read(), Cell::Blank);
        t.apply(Cell::One, Move::L);
        assert_eq!(t.to_string(), "#B1");
        t.apply(Cell::Zero, Move::L);
        assert_eq!(t.to_string(), "#01");
    }

    #[test]
    fn query_step() {
        let spec: OtmSpec = ONE_QUERY.parse().unwrap();
        let table: OracleTable = "01 -> 111\n".parse().unwrap();
        let mut c = OtmConfig::initial(&spec, &w("1"));
        c.state = "ask".into();
        c.tapes[1] = Tape::with_word(&w("01"));
        c.tapes[1].left.push_front(Cell::Blank);
        let d = otm_step(&spec, &table, &c).unwrap();
        assert_eq!(d.state, Name::from("got"));
        assert_eq!(d.tapes[2].to_string(), "#111");
        assert_eq!(d.tapes[1], Tape::default());
        assert_eq!(d.tapes[0], c.tapes[0]);
    }

    #[test]
    fn runs() {
        let table: OracleTable = "101 -> 11\n".parse().unwrap();
        let id: OtmSpec = IDENTITY.parse().unwrap();
        assert_eq!(otm_run(&id, &table, &w("101"), 10).unwrap(), (w("101"), 0));
        let q: OtmSpec = ONE_QUERY.parse().unwrap();
        assert_eq!(
            otm_run(&q, &table, &w("101"), 100).unwrap(),
            (w("11"), 3 * 3 + 3 * 2 + 8)
        );
        let flip: OtmSpec = BITFLIP.parse().unwrap();
        assert_eq!(
            otm_run(&flip, &table, &w("01"), 100).unwrap(),
            (w("10"), 11)
        );
        assert_eq!(otm_run(&flip, &table, &w(""), 100).unwrap().0, w(""));
        assert_eq!(otm_run(&flip, &table, &w("01"), 5), Err(Error::Budget(5)));
        assert!(matches!(
            otm_run(&q, &table, &w("0"), 100),
            Err(Error::OracleMiss(_))
        ));
    }
}
