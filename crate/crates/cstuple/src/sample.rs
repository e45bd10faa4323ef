//! Seeded sampling of well-typed ground terms.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::term::Term;
use crate::types::{Signature, SimpleType, SymbolDecl, SymbolKind};

/// Draws ground terms of a requested type, using partial applications for arrow types.
#[derive(Clone, Copy, Debug)]
pub struct TermSampler<'a> {
    sig: &'a Signature,
    max_depth: usize,
    constructors_only: bool,
}

const FUEL: usize = 64;

impl<'a> TermSampler<'a> {
    pub fn new(sig: &'a Signature, max_depth: usize) -> Self {
        TermSampler {
            sig,
            max_depth,
            constructors_only: false,
        }
    }

    /// Restricts sampling to constructor terms (data).
    pub fn data(mut self) -> Self {
        self.constructors_only = true;
        self
    }

    /// `None` when no ground term of the type exists within the depth budget.
    pub fn sample<R: Rng>(&self, ty: &SimpleType, rng: &mut R) -> Option<Term> {
        self.go(ty, self.max_depth, FUEL, rng)
    }

    /// Symbols which reach `ty` after `k` arguments, paired with those argument types.
    fn candidates(&self, ty: &SimpleType) -> Vec<(&'a SymbolDecl, Vec<SimpleType>)> {
        let mut out = Vec::new();
        for d in self.sig.symbols() {
            let allowed = match d.kind {
                SymbolKind::Oracle => false,
                SymbolKind::Defined => !self.constructors_only,
                SymbolKind::Constructor => true,
            };
            if !allowed {
                continue;
            }
            let mut args = Vec::new();
            let mut cur = &d.ty;
            loop {
                if cur == ty {
                    out.push((d, args));
                    break;
                }
                match cur.split_arrow() {
                    Some((a, b)) => {
                        args.push(a.clone());
                        cur = b;
                    }
                    None => break,
                }
            }
        }
        out
    }

    fn go<R: Rng>(&self, ty: &SimpleType, depth: usize, fuel: usize, rng: &mut R) -> Option<Term> {
        if fuel == 0 {
            return None;
        }
        let mut cands = self.candidates(ty);
        if depth == 0 {
            let least = cands.iter().map(|(_, a)| a.len()).min()?;
            cands.retain(|(_, a)| a.len() == least);
        }
        cands.shuffle(rng);
        for (d, args) in cands {
            let mut built = Vec::with_capacity(args.len());
            for a in &args {
                match self.go(a, depth.saturating_sub(1), fuel - 1, rng) {
                    Some(t) => built.push(t),
                    None => break,
                }
            }
            if built.len() == args.len() {
                return Term::apply_all(Term::sym(d.name.clone(), d.ty.clone()), built).ok();
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_strs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_ground_and_typed() {
        let strs = parse_strs(
            "sort nat\ncons 0 : nat\ncons s : nat -> nat\nfn add : nat -> nat -> nat\n\
             fn fp : (nat -> nat) -> nat -> nat\nrule add 0 y -> y\nrule fp g x -> g x\n",
        )
        .unwrap();
        let nat = SimpleType::base("nat");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut saw_partial = false;
        for _ in 0..200 {
            let t = TermSampler::new(&strs.signature, 4)
                .sample(&nat, &mut rng)
                .unwrap();
            assert!(t.is_ground());
            assert_eq!(t.ty(), &nat);
            saw_partial |= t.to_string().contains("fp (add");
            let d = TermSampler::new(&strs.signature, 3)
                .data()
                .sample(&nat, &mut rng)
                .unwrap();
            assert!(!d.to_string().contains("add"));
        }
        assert!(saw_partial);
    }

    #[test]
    fn empty_sort() {
        let strs = parse_strs("sort nat\nsort void\ncons 0 : nat\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(TermSampler::new(&strs.signature, 3)
            .sample(&SimpleType::base("void"), &mut rng)
            .is_none());
    }
}
