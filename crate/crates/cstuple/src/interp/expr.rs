use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::lex::{lex_line, Cursor, Tok};
use crate::types::Name;

/// Arithmetic over ℕ used for interpretation function bodies.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CsExpr {
    Num(u64),
    Var(Name),
    Add(Box<CsExpr>, Box<CsExpr>),
    Mul(Box<CsExpr>, Box<CsExpr>),
    Max(Box<CsExpr>, Box<CsExpr>),
    Monus(Box<CsExpr>, Box<CsExpr>),
    Pow(Box<CsExpr>, Box<CsExpr>),
    /// Application of a bound function variable.
    App(Name, Vec<CsExpr>),
}

impl CsExpr {
    pub fn num(n: u64) -> CsExpr {
        CsExpr::Num(n)
    }

    pub fn var(n: &str) -> CsExpr {
        CsExpr::Var(n.into())
    }

    pub fn app(f: &str, args: Vec<CsExpr>) -> CsExpr {
        CsExpr::App(f.into(), args)
    }

    pub fn add(a: CsExpr, b: CsExpr) -> CsExpr {
        CsExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: CsExpr, b: CsExpr) -> CsExpr {
        CsExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn max(a: CsExpr, b: CsExpr) -> CsExpr {
        CsExpr::Max(Box::new(a), Box::new(b))
    }

    pub fn monus(a: CsExpr, b: CsExpr) -> CsExpr {
        CsExpr::Monus(Box::new(a), Box::new(b))
    }

    pub fn sum(items: impl IntoIterator<Item = CsExpr>) -> CsExpr {
        items
            .into_iter()
            .reduce(CsExpr::add)
            .unwrap_or(CsExpr::Num(0))
    }

    /// True when only constants, variables, `+`, `*` and applications occur.
    pub fn in_fragment(&self) -> bool {
        match self {
            CsExpr::Num(_) | CsExpr::Var(_) => true,
            CsExpr::Add(a, b) | CsExpr::Mul(a, b) => a.in_fragment() && b.in_fragment(),
            CsExpr::Max(..) | CsExpr::Monus(..) | CsExpr::Pow(..) => false,
            CsExpr::App(_, args) => args.iter().all(|a| a.in_fragment()),
        }
    }

    pub fn free_names(&self, out: &mut Vec<Name>) {
        match self {
            CsExpr::Num(_) => {}
            CsExpr::Var(n) => out.push(n.clone()),
            CsExpr::Add(a, b)
            | CsExpr::Mul(a, b)
            | CsExpr::Max(a, b)
            | CsExpr::Monus(a, b)
            | CsExpr::Pow(a, b) => {
                a.free_names(out);
                b.free_names(out);
            }
            CsExpr::App(f, args) => {
                out.push(f.clone());
                for a in args {
                    a.free_names(out);
                }
            }
        }
    }

    /// Evaluates with numeric variables and function variables.
    pub fn eval(
        &self,
        var: &dyn Fn(&str) -> Result<u64>,
        fun: &dyn Fn(&str, &[u64]) -> Result<u64>,
    ) -> Result<u64> {
        let bin = |a: &CsExpr, b: &CsExpr| -> Result<(u64, u64)> {
            Ok((a.eval(var, fun)?, b.eval(var, fun)?))
        };
        match self {
            CsExpr::Num(n) => Ok(*n),
            CsExpr::Var(n) => var(n),
            CsExpr::Add(a, b) => {
                let (x, y) = bin(a, b)?;
                x.checked_add(y).ok_or(Error::Overflow)
            }
            CsExpr::Mul(a, b) => {
                let (x, y) = bin(a, b)?;
                x.checked_mul(y).ok_or(Error::Overflow)
            }
            CsExpr::Max(a, b) => {
                let (x, y) = bin(a, b)?;
                Ok(x.max(y))
            }
            CsExpr::Monus(a, b) => {
                let (x, y) = bin(a, b)?;
                Ok(x.saturating_sub(y))
            }
            CsExpr::Pow(a, b) => {
                let (x, y) = bin(a, b)?;
                let e = u32::try_from(y).map_err(|_| Error::Overflow)?;
                x.checked_pow(e).ok_or(Error::Overflow)
            }
            CsExpr::App(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| a.eval(var, fun))
                    .collect::<Result<Vec<_>>>()?;
                fun(f, &vals)
            }
        }
    }

    /// Evaluation with a plain numeric environment for variables and functions of one argument.
    pub fn eval_simple(
        &self,
        vars: &HashMap<&str, u64>,
        funs: &HashMap<&str, &dyn Fn(u64) -> u64>,
    ) -> Result<u64> {
        self.eval(
            &|n| {
                vars.get(n)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("unbound variable {n}")))
            },
            &|f, args| {
                let g = funs
                    .get(f)
                    .ok_or_else(|| Error::invalid(format!("unbound function {f}")))?;
                match args {
                    [x] => Ok(g(*x)),
                    _ => Err(Error::invalid(format!(
                        "{f} applied to {} arguments",
                        args.len()
                    ))),
                }
            },
        )
    }

    /// Capture-free renaming/replacement of variables by expressions.
    pub fn substitute(&self, sub: &dyn Fn(&str) -> Option<CsExpr>) -> CsExpr {
        let bx = |e: &CsExpr| Box::new(e.substitute(sub));
        match self {
            CsExpr::Num(n) => CsExpr::Num(*n),
            CsExpr::Var(n) => sub(n).unwrap_or_else(|| self.clone()),
            CsExpr::Add(a, b) => CsExpr::Add(bx(a), bx(b)),
            CsExpr::Mul(a, b) => CsExpr::Mul(bx(a), bx(b)),
            CsExpr::Max(a, b) => CsExpr::Max(bx(a), bx(b)),
            CsExpr::Monus(a, b) => CsExpr::Monus(bx(a), bx(b)),
            CsExpr::Pow(a, b) => CsExpr::Pow(bx(a), bx(b)),
            CsExpr::App(f, args) => {
                CsExpr::App(f.clone(), args.iter().map(|a| a.substitute(sub)).collect())
            }
        }
    }
}

fn fmt_prec(e: &CsExpr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match e {
        CsExpr::Num(n) => write!(f, "{n}"),
        CsExpr::Var(n) => write!(f, "{n}"),
        CsExpr::Add(a, b) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            fmt_prec(a, f, 0)?;
            f.write_str(" + ")?;
            fmt_prec(b, f, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        CsExpr::Mul(a, b) => {
            fmt_prec(a, f, 1)?;
            f.write_str("*")?;
            fmt_prec(b, f, 1)
        }
        CsExpr::Max(a, b) => write!(f, "max({a}, {b})"),
        CsExpr::Monus(a, b) => write!(f, "monus({a}, {b})"),
        CsExpr::Pow(a, b) => write!(f, "pow({a}, {b})"),
        CsExpr::App(g, args) => {
            write!(f, "{g}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Display for CsExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, f, 0)
    }
}

/// `\b1 .. bn. body`
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Lambda {
    pub binders: Vec<Name>,
    pub body: CsExpr,
}

impl Lambda {
    pub fn constant(arity: usize, n: u64) -> Lambda {
        Lambda {
            binders: (0..arity).map(|i| Name::from(format!("x{i}"))).collect(),
            body: CsExpr::Num(n),
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.binders.is_empty() {
            return write!(f, "{}", self.body);
        }
        f.write_str("\\")?;
        for (i, b) in self.binders.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ". {}", self.body)
    }
}

fn is_number(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

pub(crate) fn parse_expr_tokens(c: &mut Cursor) -> Result<CsExpr> {
    let mut e = parse_product(c)?;
    while c.peek() == Some(&Tok::Plus) {
        c.next();
        e = CsExpr::add(e, parse_product(c)?);
    }
    Ok(e)
}

fn parse_product(c: &mut Cursor) -> Result<CsExpr> {
    let mut e = parse_factor(c)?;
    while c.peek() == Some(&Tok::Star) {
        c.next();
        e = CsExpr::mul(e, parse_factor(c)?);
    }
    Ok(e)
}

fn parse_factor(c: &mut Cursor) -> Result<CsExpr> {
    match c.peek() {
        Some(Tok::LParen) => {
            c.next();
            let e = parse_expr_tokens(c)?;
            c.expect(&Tok::RParen, "`)`")?;
            Ok(e)
        }
        Some(Tok::Ident(s)) => {
            c.next();
            if is_number(s) {
                return s
                    .parse()
                    .map(CsExpr::Num)
                    .map_err(|_| c.error("number too large"));
            }
            if c.peek() != Some(&Tok::LParen) {
                return Ok(CsExpr::Var(s.as_str().into()));
            }
            c.next();
            let mut args = vec![parse_expr_tokens(c)?];
            while c.peek() == Some(&Tok::Comma) {
                c.next();
                args.push(parse_expr_tokens(c)?);
            }
            c.expect(&Tok::RParen, "`)`")?;
            let two = |c: &Cursor, args: Vec<CsExpr>| -> Result<(CsExpr, CsExpr)> {
                let [a, b]: [CsExpr; 2] = args
                    .try_into()
                    .map_err(|_| c.error(format!("{s} takes two arguments")))?;
                Ok((a, b))
            };
            match s.as_str() {
                "max" => two(c, args).map(|(a, b)| CsExpr::max(a, b)),
                "monus" => two(c, args).map(|(a, b)| CsExpr::monus(a, b)),
                "pow" => two(c, args).map(|(a, b)| CsExpr::Pow(Box::new(a), Box::new(b))),
                _ => Ok(CsExpr::App(s.as_str().into(), args)),
            }
        }
        _ => Err(c.error("expected an expression")),
    }
}

/// Parses `\x y. e` (or a bare expression with no binders).
pub(crate) fn parse_lambda_tokens(c: &mut Cursor) -> Result<Lambda> {
    let mut binders = Vec::new();
    if c.peek() == Some(&Tok::Backslash) {
        c.next();
        while let Some(Tok::Ident(_)) = c.peek() {
            binders.push(Name::from(c.ident("a binder")?));
        }
        c.expect(&Tok::Dot, "`.` after binders")?;
    }
    let body = parse_expr_tokens(c)?;
    let mut seen = std::collections::HashSet::new();
    for b in &binders {
        if !seen.insert(b.clone()) {
            return Err(c.error(format!("duplicate binder {b}")));
        }
    }
    let mut names = Vec::new();
    body.free_names(&mut names);
    if let Some(n) = names.iter().find(|n| !binders.contains(n)) {
        return Err(c.error(format!("unbound name {n} in expression")));
    }
    Ok(Lambda { binders, body })
}

pub fn parse_lambda(text: &str) -> Result<Lambda> {
    let toks = lex_line(text, 1)?;
    let mut c = Cursor::new(&toks, 1);
    let l = parse_lambda_tokens(&mut c)?;
    c.expect_end()?;
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let l = parse_lambda("\\x y. x*y + 2*x + 1").unwrap();
        assert_eq!(l.to_string(), "\\x y. x*y + 2*x + 1");
        let l = parse_lambda("\\Fc Fs x y. 2*x*y*pow(max(Fs(x),1), x+1) + x*Fc(x)").unwrap();
        assert_eq!(l.binders.len(), 4);
        assert!(!l.body.in_fragment());
        let l = parse_lambda("(1 + x)*3").unwrap_err();
        assert!(l.to_string().contains("unbound name x"));
        let l = parse_lambda("\\a b. (a + b)*(a + 1)").unwrap();
        assert_eq!(l.to_string(), "\\a b. (a + b)*(a + 1)");
        assert_eq!(parse_lambda(&l.to_string()).unwrap(), l);
    }

    #[test]
    fn evaluates() {
        let l = parse_lambda("\\F x. monus(x, 3) + F(x)*2 + pow(2, x)").unwrap();
        let vars: HashMap<&str, u64> = [("x", 5)].into_iter().collect();
        let g = |n: u64| n + 1;
        let funs: HashMap<&str, &dyn Fn(u64) -> u64> =
            [("F", &g as &dyn Fn(u64) -> u64)].into_iter().collect();
        assert_eq!(l.body.eval_simple(&vars, &funs).unwrap(), 2 + 12 + 32);
        let big = parse_lambda("pow(10, 30)").unwrap();
        assert_eq!(
            big.body.eval_simple(&HashMap::new(), &HashMap::new()),
            Err(Error::Overflow)
        );
    }
}
