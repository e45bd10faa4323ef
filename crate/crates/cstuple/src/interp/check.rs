use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::eval::{Evaluator, Numeric, Symbolic, Valuation, Value};
use super::expr::CsExpr;
use super::normal::NormalPoly;
use super::{cost_binders, size_binders, BinderKind, CsInterp};
use crate::error::{Error, Result};
use crate::strs::{Rule, Strs};
use crate::types::{Direction, Name, Signature, SimpleType};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CheckMode {
    Falsify,
    Certify,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub mode: CheckMode,
    pub budget: u64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            mode: CheckMode::Falsify,
            budget: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Which {
    Cost,
    Size,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Cost => "cost",
            Which::Size => "size",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub rule: usize,
    /// Variable assignments as printable `(name, value)` pairs.
    pub assignment: Vec<(String, String)>,
    pub lhs: u64,
    pub rhs: u64,
    pub which: Which,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Certified,
    Tested(u64),
    Falsified(Counterexample),
    Unknown(String),
}

impl Verdict {
    pub fn is_falsified(&self) -> bool {
        matches!(self, Verdict::Falsified(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => f.write_str("certified"),
            Verdict::Tested(n) => write!(f, "tested {n}"),
            Verdict::Unknown(why) => write!(f, "unknown ({why})"),
            Verdict::Falsified(c) => {
                write!(f, "falsified {} at ", c.which)?;
                if c.assignment.is_empty() {
                    f.write_str("(ground)")?;
                }
                for (i, (k, v)) in c.assignment.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}={v}")?;
                }
                write!(f, ": lhs {} rhs {}", c.lhs, c.rhs)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Overall {
    Certified,
    Tested,
    Unknown,
    Falsified,
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Certified => "certified",
            Overall::Tested => "tested",
            Overall::Unknown => "unknown",
            Overall::Falsified => "falsified",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SystemReport {
    pub verdicts: Vec<Verdict>,
    pub overall: Overall,
}

/// Weakly monotone sample function `λx⃗. min(a·Σ t(xᵢ) + b, cap)`, where `t` reverses flipped arguments.
#[derive(Clone, Debug, PartialEq)]
struct MonoFn {
    a: u64,
    b: u64,
    cap: Option<u64>,
    flips: Vec<bool>,
}

const FLIP_PIVOT: u64 = 8;

impl MonoFn {
    fn eval(&self, xs: &[u64]) -> Result<u64> {
        let mut s = 0u64;
        for (x, &flip) in xs.iter().zip(&self.flips) {
            let t = if flip {
                FLIP_PIVOT.saturating_sub(*x)
            } else {
                *x
            };
            s = s.checked_add(t).ok_or(Error::Overflow)?;
        }
        let v = self
            .a
            .checked_mul(s)
            .and_then(|v| v.checked_add(self.b))
            .ok_or(Error::Overflow)?;
        Ok(self.cap.map_or(v, |c| v.min(c)))
    }

    fn value(&self) -> Value<Numeric> {
        let m = self.clone();
        Value::function(self.flips.len(), move |xs| m.eval(xs))
    }
}

impl fmt::Display for MonoFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = (0..self.flips.len()).map(|i| format!("z{i}")).collect();
        let sum: Vec<String> = args
            .iter()
            .zip(&self.flips)
            .map(|(z, &fl)| {
                if fl {
                    format!("monus({FLIP_PIVOT}, {z})")
                } else {
                    z.clone()
                }
            })
            .collect();
        let sum = if sum.len() == 1 {
            sum[0].clone()
        } else {
            format!("({})", sum.join(" + "))
        };
        let body = format!("{}*{} + {}", self.a, sum, self.b);
        match self.cap {
            Some(c) => write!(f, "\\{}. min({body}, {c})", args.join(" ")),
            None => write!(f, "\\{}. {body}", args.join(" ")),
        }
    }
}

/// Which arguments of a function variable of type `ty` need reversal for monotonicity.
fn flips_for(sig: &Signature, ty: &SimpleType, cost: bool) -> Vec<bool> {
    let (args, res) = ty.uncurry();
    let res_dir = if cost {
        Direction::Desc
    } else {
        sig.direction(res)
    };
    args.iter()
        .map(|a| {
            let d = if a.is_base() {
                sig.direction(a.result_sort())
            } else {
                Direction::Desc
            };
            d != res_dir
        })
        .collect()
}

/// Grid families for functions: affine then saturating, with small coefficients.
fn function_family() -> Vec<(u64, u64, Option<u64>)> {
    let mut out = Vec::new();
    for a in 0..=4 {
        for b in 0..=4 {
            out.push((a, b, None));
        }
    }
    for a in 0..=4 {
        for b in 0..=4 {
            for c in 0..=4 {
                out.push((a, b, Some(c)));
            }
        }
    }
    out.sort_by_key(|&(a, b, c)| (c.is_some(), a != 1, b, a, c));
    out
}

const NUM_GRID: [u64; 6] = [1, 0, 2, 3, 4, 5];

enum Dim {
    Num {
        var: Name,
        bound: Option<u64>,
    },
    Fun {
        var: Name,
        cost: bool,
        flips: Vec<bool>,
    },
}

impl Dim {
    fn name(&self) -> String {
        match self {
            Dim::Num { var, .. } => var.to_string(),
            Dim::Fun {
                var, cost: false, ..
            } => format!("{var}^s"),
            Dim::Fun {
                var, cost: true, ..
            } => format!("{var}^c"),
        }
    }
}

enum Choice {
    Num(u64),
    Fun(MonoFn),
}

struct Sampler {
    dims: Vec<Dim>,
    grid_nums: Vec<Vec<u64>>,
    family: Vec<(u64, u64, Option<u64>)>,
}

impl Sampler {
    fn new(interp: &CsInterp, rule: &Rule) -> Sampler {
        let sig = &interp.signature;
        let mut dims = Vec::new();
        for (v, ty) in rule.lhs.vars() {
            if ty.is_base() {
                dims.push(Dim::Num {
                    var: v,
                    bound: interp.bound(ty.result_sort()),
                });
            } else {
                dims.push(Dim::Fun {
                    var: v.clone(),
                    cost: false,
                    flips: flips_for(sig, &ty, false),
                });
                dims.push(Dim::Fun {
                    var: v,
                    cost: true,
                    flips: flips_for(sig, &ty, true),
                });
            }
        }
        let grid_nums = dims
            .iter()
            .map(|d| match d {
                Dim::Num { bound, .. } => NUM_GRID
                    .iter()
                    .copied()
                    .filter(|&n| bound.is_none_or(|b| n <= b))
                    .collect(),
                Dim::Fun { .. } => Vec::new(),
            })
            .collect();
        Sampler {
            dims,
            grid_nums,
            family: function_family(),
        }
    }

    fn grid_len(&self, i: usize) -> usize {
        match &self.dims[i] {
            Dim::Num { .. } => self.grid_nums[i].len().max(1),
            Dim::Fun { .. } => self.family.len(),
        }
    }

    fn grid_choice(&self, i: usize, k: usize) -> Choice {
        match &self.dims[i] {
            Dim::Num { .. } => Choice::Num(self.grid_nums[i].get(k).copied().unwrap_or(0)),
            Dim::Fun { flips, .. } => {
                let (a, b, cap) = self.family[k];
                Choice::Fun(MonoFn {
                    a,
                    b,
                    cap,
                    flips: flips.clone(),
                })
            }
        }
    }

    fn random_choice(&self, i: usize, rng: &mut ChaCha8Rng) -> Choice {
        match &self.dims[i] {
            Dim::Num { bound, .. } => {
                let hi = if rng.gen_bool(0.5) { 8 } else { 64 };
                Choice::Num(rng.gen_range(0..=bound.map_or(hi, |b| b.min(hi))))
            }
            Dim::Fun { flips, .. } => Choice::Fun(MonoFn {
                a: rng.gen_range(0..=8),
                b: rng.gen_range(0..=8),
                cap: if rng.gen_bool(0.5) {
                    Some(rng.gen_range(0..=64))
                } else {
                    None
                },
                flips: flips.clone(),
            }),
        }
    }

    /// Grid tuples in order of increasing largest index, at most `limit` of them.
    fn grid(&self, limit: usize) -> Vec<Vec<usize>> {
        let d = self.dims.len();
        let lens: Vec<usize> = (0..d).map(|i| self.grid_len(i)).collect();
        let mut out = Vec::new();
        if d == 0 {
            out.push(Vec::new());
            return out;
        }
        let top = lens.iter().copied().max().unwrap_or(1);
        for level in 0..top {
            let caps: Vec<usize> = lens.iter().map(|&l| level.min(l - 1)).collect();
            if !caps.contains(&level) {
                continue;
            }
            let mut idx = vec![0usize; d];
            loop {
                if idx.contains(&level) {
                    out.push(idx.clone());
                    if out.len() >= limit {
                        return out;
                    }
                }
                let mut j = d;
                let advanced = loop {
                    if j == 0 {
                        break false;
                    }
                    j -= 1;
                    if idx[j] < caps[j] {
                        idx[j] += 1;
                        for k in &mut idx[j + 1..] {
                            *k = 0;
                        }
                        break true;
                    }
                };
                if !advanced {
                    break;
                }
            }
        }
        out
    }

    fn valuation(&self, choices: Vec<Choice>) -> (Valuation<Numeric>, Vec<(String, String)>) {
        let mut val = Valuation::new();
        let mut desc = Vec::new();
        for (d, c) in self.dims.iter().zip(choices) {
            match (d, c) {
                (Dim::Num { var, .. }, Choice::Num(n)) => {
                    val.size.insert(var.clone(), Value::Base(n));
                    desc.push((d.name(), n.to_string()));
                }
                (Dim::Fun { var, cost, .. }, Choice::Fun(m)) => {
                    let target = if *cost { &mut val.cost } else { &mut val.size };
                    target.insert(var.clone(), m.value());
                    desc.push((d.name(), m.to_string()));
                }
                _ => unreachable!("choice matches its dimension"),
            }
        }
        (val, desc)
    }
}

enum SampleOutcome {
    Ok,
    Skip,
    Fail(Which, u64, u64),
}

fn run_sample(
    interp: &CsInterp,
    rule: &Rule,
    dir: Direction,
    val: &Valuation<Numeric>,
) -> Result<SampleOutcome> {
    let ev = Evaluator::new(interp, val);
    let outcome = (|| -> Result<SampleOutcome> {
        let l = ev.analyze(&rule.lhs)?;
        let r = ev.analyze(&rule.rhs)?;
        let lc = l.cost.expect("lhs is symbol-headed").base()?;
        if lc <= r.total {
            return Ok(SampleOutcome::Fail(Which::Cost, lc, r.total));
        }
        let (ls, rs) = (l.size.base()?, r.size.base()?);
        if !dir.geq(ls, rs) {
            return Ok(SampleOutcome::Fail(Which::Size, ls, rs));
        }
        Ok(SampleOutcome::Ok)
    })();
    match outcome {
        Err(Error::Overflow) => Ok(SampleOutcome::Skip),
        other => other,
    }
}

fn falsify(interp: &CsInterp, rule: &Rule, index: usize, budget: u64, seed: u64) -> Verdict {
    let sampler = Sampler::new(interp, rule);
    let dir = interp.signature.direction(rule.lhs.ty().result_sort());
    let mut tested = 0u64;
    let grid = sampler.grid((budget / 2).max(1) as usize);
    let grid_count = grid.len() as u64;
    let exhaustive = grid_count < budget / 2;
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut k = 0u64;
    while k < budget {
        let choices: Vec<Choice> = if k < grid_count {
            grid[k as usize]
                .iter()
                .enumerate()
                .map(|(i, &c)| sampler.grid_choice(i, c))
                .collect()
        } else if exhaustive
            && sampler
                .dims
                .iter()
                .all(|d| matches!(d, Dim::Num { bound: Some(_), .. }))
        {
            break;
        } else {
            (0..sampler.dims.len())
                .map(|i| sampler.random_choice(i, &mut rng))
                .collect()
        };
        k += 1;
        let (val, desc) = sampler.valuation(choices);
        match run_sample(interp, rule, dir, &val) {
            Ok(SampleOutcome::Ok) => tested += 1,
            Ok(SampleOutcome::Skip) => {}
            Ok(SampleOutcome::Fail(which, lhs, rhs)) => {
                return Verdict::Falsified(Counterexample {
                    rule: index,
                    assignment: desc,
                    lhs,
                    rhs,
                    which,
                })
            }
            Err(e) => return Verdict::Unknown(format!("evaluation error: {e}")),
        }
    }
    Verdict::Tested(tested)
}

fn symbolic_valuation(interp: &CsInterp, rule: &Rule) -> Valuation<Symbolic> {
    let mut val = Valuation::new();
    for (v, ty) in rule.lhs.vars() {
        if ty.is_base() {
            let e = if interp.bound(ty.result_sort()) == Some(0) {
                CsExpr::Num(0)
            } else {
                CsExpr::Var(v.clone())
            };
            val.size.insert(v, Value::Base(e));
        } else {
            let k = ty.arity();
            let (sn, cn) = (Name::from(format!("{v}^s")), Name::from(format!("{v}^c")));
            val.size.insert(
                v.clone(),
                Value::function(k, move |xs| Ok(CsExpr::App(sn.clone(), xs.to_vec()))),
            );
            val.cost.insert(
                v,
                Value::function(k, move |xs| Ok(CsExpr::App(cn.clone(), xs.to_vec()))),
            );
        }
    }
    val
}

/// Sound sufficient check by coefficient domination; `Err` carries the reason it did not apply.
fn certify(interp: &CsInterp, rule: &Rule) -> std::result::Result<(), String> {
    let val = symbolic_valuation(interp, rule);
    let ev = Evaluator::new(interp, &val);
    let l = ev.analyze(&rule.lhs).map_err(|e| e.to_string())?;
    let r = ev.analyze(&rule.rhs).map_err(|e| e.to_string())?;
    let norm = |e: &CsExpr| {
        NormalPoly::from_expr(e).ok_or("interpretation outside the polynomial fragment")
    };
    let lc = norm(
        &l.cost
            .expect("lhs is symbol-headed")
            .base()
            .map_err(|e| e.to_string())?,
    )?;
    let rc = norm(&r.total)?;
    if !lc.dominates(&rc, 1) {
        return Err(format!("cost: {lc} does not dominate {rc} + 1"));
    }
    let ls = norm(&l.size.base().map_err(|e| e.to_string())?)?;
    let rs = norm(&r.size.base().map_err(|e| e.to_string())?)?;
    let ok = match interp.signature.direction(rule.lhs.ty().result_sort()) {
        Direction::Desc => ls.dominates(&rs, 0),
        Direction::Asc => rs.dominates(&ls, 0),
    };
    if !ok {
        return Err(format!("size: cannot compare {ls} with {rs}"));
    }
    Ok(())
}

/// Checks one rule; `index` names the rule in reports and seeds its sample stream.
pub fn check_rule(interp: &CsInterp, rule: &Rule, index: usize, opts: &CheckOptions) -> Verdict {
    match opts.mode {
        CheckMode::Falsify => falsify(interp, rule, index, opts.budget, opts.seed),
        CheckMode::Certify => match certify(interp, rule) {
            Ok(()) => Verdict::Certified,
            Err(why) => match falsify(interp, rule, index, opts.budget, opts.seed) {
                Verdict::Tested(_) => Verdict::Unknown(why),
                other => other,
            },
        },
    }
}

pub fn check_system(interp: &CsInterp, strs: &Strs, opts: &CheckOptions) -> SystemReport {
    let verdicts: Vec<Verdict> = strs
        .rules
        .par_iter()
        .enumerate()
        .map(|(i, r)| check_rule(interp, r, i, opts))
        .collect();
    let overall = if verdicts.iter().any(Verdict::is_falsified) {
        Overall::Falsified
    } else if verdicts.iter().all(|v| *v == Verdict::Certified) {
        Overall::Certified
    } else if verdicts.iter().any(|v| matches!(v, Verdict::Unknown(_))) {
        Overall::Unknown
    } else {
        Overall::Tested
    };
    SystemReport { verdicts, overall }
}

/// Samples every interpretation function for weak monotonicity; returns one message per violated argument.
pub fn check_monotonicity(interp: &CsInterp, samples: u64, seed: u64) -> Vec<String> {
    let sig = &interp.signature;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for d in sig.symbols() {
        let Ok(si) = interp.get(&d.name) else {
            continue;
        };
        let (args, res) = d.ty.uncurry();
        for cost in [false, true] {
            let lam = if cost { &si.cost } else { &si.size };
            let kinds = if cost {
                cost_binders(&d.ty)
            } else {
                size_binders(&d.ty)
            };
            let mut arg_of = Vec::new();
            for a in &args {
                if cost && !a.is_base() {
                    arg_of.push((*a, true));
                }
                arg_of.push((*a, false));
            }
            let res_dir = if cost {
                Direction::Desc
            } else {
                sig.direction(res)
            };
            for j in 0..kinds.len() {
                if kinds[j] != BinderKind::Num {
                    continue;
                }
                let arg_sort = arg_of[j].0.result_sort();
                let bound = interp.bound(arg_sort);
                if bound == Some(0) {
                    continue;
                }
                for _ in 0..samples {
                    let mut vals: Vec<Value<Numeric>> = Vec::new();
                    let mut nums = Vec::new();
                    for (k, kind) in kinds.iter().enumerate() {
                        let (aty, is_cost) = arg_of[k];
                        match kind {
                            BinderKind::Num => {
                                let hi = interp.bound(aty.result_sort()).unwrap_or(12).min(12);
                                let n = rng.gen_range(0..=hi);
                                nums.push(n);
                                vals.push(Value::Base(n));
                            }
                            BinderKind::Fun(_) => {
                                let m = MonoFn {
                                    a: rng.gen_range(0..=3),
                                    b: rng.gen_range(0..=3),
                                    cap: None,
                                    flips: flips_for(sig, aty, is_cost),
                                };
                                nums.push(0);
                                vals.push(m.value());
                            }
                        }
                    }
                    let Value::Base(x) = vals[j] else {
                        unreachable!()
                    };
                    if bound.is_some_and(|b| x >= b) {
                        continue;
                    }
                    let mut bumped = vals.clone();
                    bumped[j] = Value::Base(x + 1);
                    let (Ok(lo), Ok(hi)) = (
                        Value::lambda(lam.clone(), vals).and_then(|v| v.base()),
                        Value::lambda(lam.clone(), bumped).and_then(|v| v.base()),
                    ) else {
                        continue;
                    };
                    let ok = match (sig.direction(arg_sort), res_dir) {
                        (Direction::Desc, Direction::Desc) | (Direction::Asc, Direction::Asc) => {
                            hi >= lo
                        }
                        _ => hi <= lo,
                    };
                    if !ok {
                        out.push(format!(
                            "{} {}: not monotone in binder {} at {:?} ({lo} then {hi})",
                            if cost { "cost" } else { "size" },
                            d.name,
                            lam.binders[j],
                            nums
                        ));
                        break;
                    }
                }
            }
        }
    }
    out
}
