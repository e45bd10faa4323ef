#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use cstuple::{
    match_term, parse_interp, parse_strs, CsInterp, SimpleType, Strs, Term, TermSampler, Word,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

pub fn corpus_text(name: &str) -> String {
    fs::read_to_string(corpus_path(name)).unwrap()
}

pub fn load(name: &str) -> Strs {
    parse_strs(&corpus_text(name)).unwrap()
}

pub fn load_interp(strs: &Strs, name: &str) -> CsInterp {
    parse_interp(&corpus_text(name), strs).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn base_types(strs: &Strs) -> Vec<SimpleType> {
    strs.signature
        .sorts()
        .map(|(n, _)| SimpleType::Base(n.clone()))
        .collect()
}

/// A ground term of a random base sort.
pub fn ground(strs: &Strs, depth: usize, rng: &mut ChaCha8Rng) -> Term {
    let sorts = base_types(strs);
    loop {
        let ty = &sorts[rng.gen_range(0..sorts.len())];
        if let Some(t) = TermSampler::new(&strs.signature, depth).sample(ty, rng) {
            return t;
        }
    }
}

pub fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let n = rng.gen_range(0..=max_len);
    Word((0..n).map(|_| rng.gen()).collect())
}

/// Whether some rule matches at the root, or the root is an oracle application to a word.
pub fn is_root_redex(strs: &Strs, t: &Term) -> bool {
    if !t.ty().is_base() {
        return false;
    }
    if strs.rules.iter().any(|r| match_term(&r.lhs, t).is_some()) {
        return true;
    }
    let (head, args) = t.spine();
    let oracle = head
        .as_sym()
        .and_then(|f| strs.signature.symbol(f))
        .is_some_and(|d| d.kind == cstuple::SymbolKind::Oracle);
    oracle && args.len() == 1 && cstuple::decode_word(args[0]).is_some()
}
