use std::collections::HashMap;
use std::sync::Arc;

use super::expr::{CsExpr, Lambda};
use super::CsInterp;
use crate::error::{Error, Result};
use crate::strs::Strs;
use crate::subst::match_term;
use crate::term::{Term, TermKind};
use crate::types::{Name, SymbolKind};
use crate::word::decode_word;

/// Carrier of interpretation values: concrete numbers or symbolic expressions.
pub trait Domain: Sized + Send + Sync + 'static {
    type Base: Clone + Send + Sync + std::fmt::Debug + 'static;
    fn zero() -> Self::Base;
    fn add(a: &Self::Base, b: &Self::Base) -> Result<Self::Base>;
    fn eval_body(body: &CsExpr, env: &HashMap<Name, Value<Self>>) -> Result<Self::Base>;
}

pub type FunValue<D> = Arc<dyn Fn(Value<D>) -> Result<Value<D>> + Send + Sync>;

/// A value at base type or a curried function value.
pub enum Value<D: Domain> {
    Base(D::Base),
    Fun(FunValue<D>),
}

impl<D: Domain> Clone for Value<D> {
    fn clone(&self) -> Self {
        match self {
            Value::Base(b) => Value::Base(b.clone()),
            Value::Fun(f) => Value::Fun(f.clone()),
        }
    }
}

impl<D: Domain> std::fmt::Debug for Value<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Base(b) => write!(f, "{b:?}"),
            Value::Fun(_) => f.write_str("<fun>"),
        }
    }
}

impl<D: Domain> Value<D> {
    pub fn base(&self) -> Result<D::Base> {
        match self {
            Value::Base(b) => Ok(b.clone()),
            Value::Fun(_) => Err(Error::invalid("expected a base value, found a function")),
        }
    }

    pub fn apply(&self, arg: Value<D>) -> Result<Value<D>> {
        match self {
            Value::Fun(f) => f(arg),
            Value::Base(_) => Err(Error::invalid("applied a base value")),
        }
    }

    /// A function taking `arity` base arguments.
    pub fn function(
        arity: usize,
        f: impl Fn(&[D::Base]) -> Result<D::Base> + Send + Sync + 'static,
    ) -> Value<D> {
        fn go<D: Domain>(
            remaining: usize,
            got: Vec<D::Base>,
            f: Arc<dyn Fn(&[D::Base]) -> Result<D::Base> + Send + Sync>,
        ) -> Result<Value<D>> {
            if remaining == 0 {
                return f(&got).map(Value::Base);
            }
            Ok(Value::Fun(Arc::new(move |v: Value<D>| {
                let mut got = got.clone();
                got.push(v.base()?);
                go(remaining - 1, got, f.clone())
            })))
        }
        go(arity, Vec::new(), Arc::new(f)).expect("arity > 0 or total function")
    }

    /// Curried value of a lambda with some binders already supplied.
    pub fn lambda(lam: Arc<Lambda>, got: Vec<Value<D>>) -> Result<Value<D>> {
        if got.len() == lam.binders.len() {
            let env: HashMap<Name, Value<D>> = lam.binders.iter().cloned().zip(got).collect();
            return D::eval_body(&lam.body, &env).map(Value::Base);
        }
        Ok(Value::Fun(Arc::new(move |v| {
            let mut got = got.clone();
            got.push(v);
            Value::lambda(lam.clone(), got)
        })))
    }
}

/// Numbers with checked arithmetic.
pub struct Numeric;

impl Domain for Numeric {
    type Base = u64;

    fn zero() -> u64 {
        0
    }

    fn add(a: &u64, b: &u64) -> Result<u64> {
        a.checked_add(*b).ok_or(Error::Overflow)
    }

    fn eval_body(body: &CsExpr, env: &HashMap<Name, Value<Self>>) -> Result<u64> {
        let lookup = |n: &str| {
            env.get(n)
                .ok_or_else(|| Error::invalid(format!("unbound {n}")))
        };
        body.eval(&|n| lookup(n)?.base(), &|f, args| {
            let mut v = lookup(f)?.clone();
            for &a in args {
                v = v.apply(Value::Base(a))?;
            }
            v.base()
        })
    }
}

/// Expressions over free variables and uninterpreted function atoms.
pub struct Symbolic;

impl Domain for Symbolic {
    type Base = CsExpr;

    fn zero() -> CsExpr {
        CsExpr::Num(0)
    }

    fn add(a: &CsExpr, b: &CsExpr) -> Result<CsExpr> {
        Ok(match (a, b) {
            (CsExpr::Num(0), _) => b.clone(),
            (_, CsExpr::Num(0)) => a.clone(),
            _ => CsExpr::add(a.clone(), b.clone()),
        })
    }

    fn eval_body(body: &CsExpr, env: &HashMap<Name, Value<Self>>) -> Result<CsExpr> {
        let rec = |e: &CsExpr| Self::eval_body(e, env);
        let bx = |e: &CsExpr| rec(e).map(Box::new);
        Ok(match body {
            CsExpr::Num(n) => CsExpr::Num(*n),
            CsExpr::Var(n) => env
                .get(n)
                .ok_or_else(|| Error::invalid(format!("unbound {n}")))?
                .base()?,
            CsExpr::Add(a, b) => CsExpr::Add(bx(a)?, bx(b)?),
            CsExpr::Mul(a, b) => CsExpr::Mul(bx(a)?, bx(b)?),
            CsExpr::Max(a, b) => CsExpr::Max(bx(a)?, bx(b)?),
            CsExpr::Monus(a, b) => CsExpr::Monus(bx(a)?, bx(b)?),
            CsExpr::Pow(a, b) => CsExpr::Pow(bx(a)?, bx(b)?),
            CsExpr::App(f, args) => {
                let mut v = env
                    .get(f)
                    .ok_or_else(|| Error::invalid(format!("unbound {f}")))?
                    .clone();
                for a in args {
                    v = v.apply(Value::Base(rec(a)?))?;
                }
                v.base()?
            }
        })
    }
}

/// Size valuation α and cost valuation ζ for variables.
pub struct Valuation<D: Domain> {
    pub size: HashMap<Name, Value<D>>,
    pub cost: HashMap<Name, Value<D>>,
}

impl<D: Domain> Clone for Valuation<D> {
    fn clone(&self) -> Self {
        Valuation {
            size: self.size.clone(),
            cost: self.cost.clone(),
        }
    }
}

impl<D: Domain> Default for Valuation<D> {
    fn default() -> Self {
        Valuation {
            size: HashMap::new(),
            cost: HashMap::new(),
        }
    }
}

impl<D: Domain> Valuation<D> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_size(mut self, x: &str, v: Value<D>) -> Self {
        self.size.insert(x.into(), v);
        self
    }

    pub fn with_cost(mut self, x: &str, v: Value<D>) -> Self {
        self.cost.insert(x.into(), v);
        self
    }
}

/// Everything computed for one term in a single bottom-up pass.
pub struct Analysis<D: Domain> {
    pub size: Value<D>,
    pub cost: Option<Value<D>>,
    /// Sum of costs of non-variable base-type subterm occurrences.
    pub total: D::Base,
    /// As `total`, restricted to occurrences that are not in normal form.
    pub total_reducible: D::Base,
    pub reducible: bool,
}

/// Evaluates terms under an interpretation and valuation.
pub struct Evaluator<'a, D: Domain> {
    pub interp: &'a CsInterp,
    pub valuation: &'a Valuation<D>,
    /// Needed to decide normal forms for `total_reducible`.
    pub strs: Option<&'a Strs>,
}

impl<'a, D: Domain> Evaluator<'a, D> {
    pub fn new(interp: &'a CsInterp, valuation: &'a Valuation<D>) -> Self {
        Evaluator {
            interp,
            valuation,
            strs: None,
        }
    }

    pub fn with_rules(mut self, strs: &'a Strs) -> Self {
        self.strs = Some(strs);
        self
    }

    pub fn size(&self, t: &Term) -> Result<Value<D>> {
        Ok(self.analyze(t)?.size)
    }

    pub fn cost(&self, t: &Term) -> Result<Value<D>> {
        self.analyze(t)?
            .cost
            .ok_or_else(|| Error::invalid(format!("no cost for variable term {t}")))
    }

    pub fn totalcost(&self, t: &Term) -> Result<D::Base> {
        Ok(self.analyze(t)?.total)
    }

    pub fn totalcost_prime(&self, t: &Term) -> Result<D::Base> {
        if self.strs.is_none() {
            return Err(Error::invalid("totalcost′ needs the rule set"));
        }
        Ok(self.analyze(t)?.total_reducible)
    }

    pub fn analyze(&self, t: &Term) -> Result<Analysis<D>> {
        let (head, args) = t.spine();
        let infos = args
            .iter()
            .map(|a| self.analyze(a))
            .collect::<Result<Vec<_>>>()?;
        let mut total = D::zero();
        let mut total_reducible = D::zero();
        let mut reducible = false;
        for i in &infos {
            total = D::add(&total, &i.total)?;
            total_reducible = D::add(&total_reducible, &i.total_reducible)?;
            reducible |= i.reducible;
        }
        let (size, cost) =
            match head.kind() {
                TermKind::Var(x) => {
                    let mut size =
                        self.valuation.size.get(x).cloned().ok_or_else(|| {
                            Error::invalid(format!("valuation does not cover {x}"))
                        })?;
                    let mut cost = self.valuation.cost.get(x).cloned();
                    for i in &infos {
                        size = size.apply(i.size.clone())?;
                        cost = cost.map(|c| c.apply(i.size.clone())).transpose()?;
                    }
                    (size, cost)
                }
                TermKind::Sym(f) => {
                    let si = self.interp.get(f)?;
                    let sizes = infos.iter().map(|i| i.size.clone()).collect();
                    let size = Value::lambda(si.size.clone(), sizes)?;
                    let decl_ty = &self
                        .interp
                        .signature
                        .symbol(f)
                        .expect("interpreted symbols are declared")
                        .ty;
                    let arg_tys = decl_ty.uncurry().0;
                    let mut got = Vec::new();
                    for (i, ty) in infos.iter().zip(&arg_tys) {
                        if !ty.is_base() {
                            let c = i.cost.clone().ok_or_else(|| {
                                Error::invalid(format!(
                                    "no cost valuation for a functional argument of {f}"
                                ))
                            })?;
                            got.push(c);
                        }
                        got.push(i.size.clone());
                    }
                    if arg_tys[infos.len()..].iter().any(|ty| !ty.is_base()) {
                        return Err(Error::invalid(format!(
                            "order violation: cost of {f} applied to {} arguments",
                            infos.len()
                        )));
                    }
                    (size, Some(Value::lambda(si.cost.clone(), got)?))
                }
                TermKind::App(..) => unreachable!("spine head is never an application"),
            };
        let base_nonvar = t.ty().is_base() && t.as_var().is_none();
        if let Some(strs) = self.strs {
            if base_nonvar && !reducible {
                reducible = root_redex(strs, t);
            }
        }
        if base_nonvar {
            let c = cost
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("no cost valuation for {}", head)))?
                .base()?;
            total = D::add(&total, &c)?;
            if reducible {
                total_reducible = D::add(&total_reducible, &c)?;
            }
        }
        Ok(Analysis {
            size,
            cost,
            total,
            total_reducible,
            reducible,
        })
    }
}

/// Whether `t` is itself a redex (a rule instance or an oracle call on a word).
pub(crate) fn root_redex(strs: &Strs, t: &Term) -> bool {
    let Some(f) = t.head_symbol() else {
        return false;
    };
    match strs.kind_of(f) {
        Some(SymbolKind::Oracle) => {
            let (_, args) = t.spine();
            args.len() == 1 && decode_word(args[0]).is_some()
        }
        Some(SymbolKind::Defined) => strs
            .rules_for(f)
            .iter()
            .any(|&i| match_term(&strs.rules[i].lhs, t).is_some()),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::parse_interp;
    use crate::interp::tests::open;
    use crate::interp::tests::{ARITH, ARITH_CSI};
    use crate::parse::{parse_strs, parse_term};

    fn setup() -> (Strs, CsInterp) {
        let strs = parse_strs(ARITH).unwrap();
        let i = parse_interp(ARITH_CSI, &strs).unwrap();
        (strs, i)
    }

    fn num(v: Value<Numeric>) -> u64 {
        v.base().unwrap()
    }

    #[test]
    fn sizes_and_costs() {
        let (strs, i) = setup();
        let v = Valuation::<Numeric>::new();
        let e = Evaluator::new(&i, &v);
        let t = parse_term(&strs.signature, "s (s 0)").unwrap();
        assert_eq!(num(e.size(&t).unwrap()), 2);
        assert_eq!(num(e.cost(&t).unwrap()), 0);
        let t = parse_term(&strs.signature, "add (s (s 0)) (s (s (s 0)))").unwrap();
        assert_eq!(num(e.size(&t).unwrap()), 5);
        assert_eq!(num(e.cost(&t).unwrap()), 3);
        let t = parse_term(&strs.signature, "mult (s (s 0)) (s (s (s 0)))").unwrap();
        assert_eq!(num(e.cost(&t).unwrap()), 6 + 4 + 1);
    }

    #[test]
    fn totalcost_of_open_rhs() {
        let (strs, i) = setup();
        let v = Valuation::<Numeric>::new()
            .with_size("x", Value::Base(1))
            .with_size("y", Value::Base(1));
        let e = Evaluator::new(&i, &v);
        let vars = [("x", "nat"), ("y", "nat")];
        let t = open(&strs.signature, &vars, "add y (mult x y)");
        assert_eq!(e.totalcost(&t).unwrap(), 2 + 4);
        let x = open(&strs.signature, &vars, "x");
        assert_eq!(num(e.size(&x).unwrap()), 1);
        assert_eq!(e.totalcost(&x).unwrap(), 0);
    }

    #[test]
    fn totalcost_prime_skips_normal_forms() {
        let (strs, i) = setup();
        let v = Valuation::<Numeric>::new();
        let e = Evaluator::new(&i, &v).with_rules(&strs);
        let t = parse_term(&strs.signature, "s (add (s 0) 0)").unwrap();
        assert_eq!(e.totalcost(&t).unwrap(), 2);
        assert_eq!(e.totalcost_prime(&t).unwrap(), 2);
        let nf = parse_term(&strs.signature, "s (s 0)").unwrap();
        assert_eq!(e.totalcost_prime(&nf).unwrap(), 0);
    }

    #[test]
    fn functional_arguments() {
        let (strs, i) = setup();
        let vars = [("F", "nat -> nat"), ("x", "nat"), ("y", "nat")];
        let t = open(&strs.signature, &vars, "funcProd F x y");
        let double = Value::<Numeric>::function(1, |a| Ok(2 * a[0]));
        let one = Value::<Numeric>::function(1, |_| Ok(1));
        let v = Valuation::new()
            .with_size("F", double)
            .with_cost("F", one)
            .with_size("x", Value::Base(2))
            .with_size("y", Value::Base(3));
        let e = Evaluator::new(&i, &v);
        assert_eq!(num(e.size(&t).unwrap()), 3 * 16);
        assert_eq!(num(e.cost(&t).unwrap()), 3 * 2 * 3 * 64 + 2 + 4 + 1);
        let partial = open(&strs.signature, &vars, "funcProd (add x) x y");
        assert_eq!(
            num(e.cost(&partial).unwrap()),
            3 * 2 * 3 * 64 + 2 * 3 + 4 + 1
        );
    }

    #[test]
    fn symbolic_matches_numeric_shape() {
        let (strs, i) = setup();
        let v = Valuation::<Symbolic>::new()
            .with_size("x", Value::Base(CsExpr::var("x")))
            .with_size("y", Value::Base(CsExpr::var("y")));
        let e = Evaluator::new(&i, &v);
        let vars = [("x", "nat"), ("y", "nat")];
        let t = open(&strs.signature, &vars, "add (s x) y");
        assert_eq!(e.cost(&t).unwrap().base().unwrap().to_string(), "x + 1 + 1");
    }
}
