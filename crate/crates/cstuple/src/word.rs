use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::term::Term;
use crate::types::{Signature, SimpleType};

/// A finite bit string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Word(pub Vec<bool>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Little-endian value (head is the least significant bit).
    pub fn to_u128_le(&self) -> u128 {
        self.0
            .iter()
            .rev()
            .fold(0u128, |acc, &b| (acc << 1) | b as u128)
    }

    /// Shortest little-endian encoding of `n` (zero is the empty word).
    pub fn from_u128_le(mut n: u128) -> Word {
        let mut bits = Vec::new();
        while n > 0 {
            bits.push(n & 1 == 1);
            n >>= 1;
        }
        Word(bits)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    /// All words of length at most `n`, shortest first.
    pub fn all_up_to(n: usize) -> Vec<Word> {
        let mut out = vec![Word::default()];
        for len in 1..=n {
            for v in 0..(1u64 << len) {
                out.push(Word(
                    (0..len).map(|k| (v >> (len - 1 - k)) & 1 == 1).collect(),
                ));
            }
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        if s == "_" {
            return Ok(Word::default());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("not a bit string: {s}"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(Word)
    }
}

/// The word constructors `o`, `i`, `cons`, `[]` resolved against a signature.
#[derive(Clone)]
pub struct WordSyms {
    o: Term,
    i: Term,
    cons: Term,
    nil: Term,
}

impl WordSyms {
    pub fn new(sig: &Signature) -> Result<WordSyms> {
        let bit = SimpleType::base("bit");
        let word = SimpleType::base("word");
        let want = [
            ("o", bit.clone()),
            ("i", bit.clone()),
            ("[]", word.clone()),
            ("cons", SimpleType::curried(vec![bit, word.clone()], word)),
        ];
        let mut got = Vec::new();
        for (name, ty) in want {
            match sig.symbol(name) {
                Some(d) if d.ty == ty => got.push(Term::sym(name, ty)),
                Some(d) => {
                    return Err(Error::invalid(format!(
                        "{name} has type {} instead of {ty}",
                        d.ty
                    )))
                }
                None => return Err(Error::invalid(format!("word encoding needs symbol {name}"))),
            }
        }
        Ok(WordSyms {
            o: got[0].clone(),
            i: got[1].clone(),
            nil: got[2].clone(),
            cons: got[3].clone(),
        })
    }

    pub fn bit(&self, b: bool) -> Term {
        if b {
            self.i.clone()
        } else {
            self.o.clone()
        }
    }

    pub fn nil(&self) -> Term {
        self.nil.clone()
    }

    pub fn cons(&self, head: Term, tail: Term) -> Term {
        let word = self.nil.ty().clone();
        let partial = Term::app_typed(
            self.cons.clone(),
            head,
            SimpleType::arrow(word.clone(), word.clone()),
        );
        Term::app_typed(partial, tail, word)
    }

    pub fn list(&self, items: impl DoubleEndedIterator<Item = Term>) -> Term {
        items.rev().fold(self.nil(), |acc, b| self.cons(b, acc))
    }

    pub fn encode(&self, w: &Word) -> Term {
        self.list(w.0.iter().map(|&b| self.bit(b)))
    }
}

/// Right-nested `::`/`[]` term over bits `o`, `i`.
pub fn encode_word(sig: &Signature, w: &Word) -> Result<Term> {
    Ok(WordSyms::new(sig)?.encode(w))
}

/// Inverse of [`encode_word`]; `None` for anything that is not a word encoding.
pub fn decode_word(t: &Term) -> Option<Word> {
    let mut bits = Vec::new();
    let mut cur = t;
    loop {
        if cur.as_sym().map(|n| &**n) == Some("[]") {
            return Some(Word(bits));
        }
        let (l, tail) = cur.as_app()?;
        let (c, b) = l.as_app()?;
        if c.as_sym().map(|n| &**n) != Some("cons") {
            return None;
        }
        match b.as_sym().map(|n| &**n) {
            Some("o") => bits.push(false),
            Some("i") => bits.push(true),
            _ => return None,
        }
        cur = tail;
    }
}
