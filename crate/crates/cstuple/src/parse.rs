use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lex::{lex_line, Cursor, Tok};
use crate::strs::{Rule, Strs};
use crate::term::Term;
use crate::types::{Direction, Signature, SimpleType, SymbolKind};

/// Untyped term syntax.
#[derive(Clone, Debug)]
enum Ast {
    Ident(String, usize),
    App(Box<Ast>, Box<Ast>),
}

impl Ast {
    fn spine(&self) -> (&str, usize, Vec<&Ast>) {
        let mut args = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Ast::App(l, r) => {
                    args.push(&**r);
                    cur = l;
                }
                Ast::Ident(n, col) => {
                    args.reverse();
                    return (n, *col, args);
                }
            }
        }
    }

    fn infix(name: &str, col: usize, a: Ast, b: Ast) -> Ast {
        let head = Ast::Ident(name.into(), col);
        Ast::App(Box::new(Ast::App(Box::new(head), Box::new(a))), Box::new(b))
    }
}

fn parse_ast(c: &mut Cursor) -> Result<Ast> {
    let left = parse_addb(c)?;
    if c.peek() == Some(&Tok::Cons) {
        let col = c.col();
        c.next();
        let right = parse_ast(c)?;
        return Ok(Ast::infix("cons", col, left, right));
    }
    Ok(left)
}

fn parse_addb(c: &mut Cursor) -> Result<Ast> {
    let mut left = parse_app(c)?;
    while c.peek() == Some(&Tok::AddB) {
        let col = c.col();
        c.next();
        let right = parse_app(c)?;
        left = Ast::infix("addB", col, left, right);
    }
    Ok(left)
}

fn starts_atom(t: Option<&Tok>) -> bool {
    matches!(t, Some(Tok::Ident(_)) | Some(Tok::LParen))
}

fn parse_app(c: &mut Cursor) -> Result<Ast> {
    let mut t = parse_atom(c)?;
    while starts_atom(c.peek()) {
        let a = parse_atom(c)?;
        t = Ast::App(Box::new(t), Box::new(a));
    }
    Ok(t)
}

fn parse_atom(c: &mut Cursor) -> Result<Ast> {
    let col = c.col();
    match c.next() {
        Some(Tok::Ident(n)) => Ok(Ast::Ident(n.clone(), col)),
        Some(Tok::LParen) => {
            let t = parse_ast(c)?;
            c.expect(&Tok::RParen, "`)`")?;
            Ok(t)
        }
        _ => Err(Error::Syntax {
            line: c.line(),
            col,
            msg: "expected a term".into(),
        }),
    }
}

pub(crate) fn parse_type_tokens(c: &mut Cursor, sig: &Signature) -> Result<SimpleType> {
    let col = c.col();
    let arg = match c.next() {
        Some(Tok::Ident(n)) => {
            if !sig.has_sort(n) {
                return Err(Error::Syntax {
                    line: c.line(),
                    col,
                    msg: format!("unknown sort {n}"),
                });
            }
            SimpleType::base(n)
        }
        Some(Tok::LParen) => {
            let t = parse_type_tokens(c, sig)?;
            c.expect(&Tok::RParen, "`)`")?;
            t
        }
        _ => {
            return Err(Error::Syntax {
                line: c.line(),
                col,
                msg: "expected a type".into(),
            })
        }
    };
    if c.peek() == Some(&Tok::Arrow) {
        c.next();
        let res = parse_type_tokens(c, sig)?;
        return Ok(SimpleType::arrow(arg, res));
    }
    Ok(arg)
}

struct Typer<'a> {
    sig: &'a Signature,
    line: usize,
    vars: BTreeMap<String, SimpleType>,
    /// Identifiers not in the signature are rule variables (otherwise unknown symbols).
    rule_mode: bool,
}

impl Typer<'_> {
    fn err(&self, msg: String) -> Error {
        Error::semantic(self.line, msg)
    }

    fn pattern(&mut self, ast: &Ast, expected: Option<&SimpleType>) -> Result<Term> {
        let (head, _, args) = ast.spine();
        match self.sig.symbol(head) {
            Some(d) => {
                let mut t = Term::sym(head, d.ty.clone());
                for a in args {
                    let want = t
                        .ty()
                        .split_arrow()
                        .map(|(x, _)| x.clone())
                        .ok_or_else(|| {
                            self.err(format!("`{head}` applied to too many arguments"))
                        })?;
                    let at = self.pattern(a, Some(&want))?;
                    t = Term::app(t, at).map_err(|e| self.err(e.to_string()))?;
                }
                if let Some(e) = expected {
                    if t.ty() != e {
                        return Err(
                            self.err(format!("`{t}` has type {} but {e} is expected", t.ty()))
                        );
                    }
                }
                Ok(t)
            }
            None => {
                if !args.is_empty() {
                    return Err(self.err(format!("variable {head} applied to arguments in lhs")));
                }
                let ty = expected
                    .cloned()
                    .ok_or_else(|| self.err(format!("cannot infer the type of variable {head}")))?;
                if let Some(prev) = self.vars.get(head) {
                    if *prev != ty {
                        return Err(
                            self.err(format!("variable {head} used at types {prev} and {ty}"))
                        );
                    }
                }
                self.vars.insert(head.into(), ty.clone());
                Ok(Term::var(head, ty))
            }
        }
    }

    fn expr(&self, ast: &Ast) -> Result<Term> {
        let (head, _, args) = ast.spine();
        let mut t = if let Some(d) = self.sig.symbol(head) {
            Term::sym(head, d.ty.clone())
        } else if let Some(ty) = self.vars.get(head) {
            Term::var(head, ty.clone())
        } else if self.rule_mode {
            return Err(self.err(format!("variable {head} not bound by lhs")));
        } else {
            return Err(self.err(format!("unknown symbol {head}")));
        };
        for a in args {
            let at = self.expr(a)?;
            t = Term::app(t, at).map_err(|e| self.err(e.to_string()))?;
        }
        Ok(t)
    }
}

/// Parses a `.strs` source.
pub fn parse_strs(text: &str) -> Result<Strs> {
    let mut sig = Signature::new();
    let mut rule_lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = lex_line(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(&toks, line);
        let kw = c.ident("a declaration keyword")?;
        match kw {
            "sort" => {
                let name = c.ident("a sort name")?;
                let dir = match c.peek() {
                    None => Direction::Desc,
                    Some(Tok::Ident(d)) if d == "desc" => Direction::Desc,
                    Some(Tok::Ident(d)) if d == "asc" => Direction::Asc,
                    _ => return Err(c.error("expected `asc` or `desc`")),
                };
                if !c.at_end() {
                    c.next();
                }
                c.expect_end()?;
                sig.add_sort(name, dir)
                    .map_err(|e| Error::semantic(line, e.to_string()))?;
            }
            "cons" | "fn" | "oracle" => {
                let name = c.ident("a symbol name")?;
                c.expect(&Tok::Colon, "`:`")?;
                let ty = parse_type_tokens(&mut c, &sig)?;
                c.expect_end()?;
                let kind = match kw {
                    "cons" => SymbolKind::Constructor,
                    "fn" => SymbolKind::Defined,
                    _ => SymbolKind::Oracle,
                };
                sig.add_symbol(name, ty, kind)
                    .map_err(|e| Error::semantic(line, e.to_string()))?;
            }
            "rule" => rule_lines.push((line, toks.clone())),
            other => {
                return Err(Error::Syntax {
                    line,
                    col: 1,
                    msg: format!("unknown keyword {other}"),
                })
            }
        }
    }
    let mut rules = Vec::new();
    for (line, toks) in rule_lines {
        let mut c = Cursor::new(&toks[1..], line);
        let lhs = parse_ast(&mut c)?;
        c.expect(&Tok::Arrow, "`->`")?;
        let rhs = parse_ast(&mut c)?;
        c.expect_end()?;
        let mut typer = Typer {
            sig: &sig,
            line,
            vars: BTreeMap::new(),
            rule_mode: true,
        };
        let l = typer.pattern(&lhs, None)?;
        if !l.ty().is_base() {
            return Err(Error::semantic(
                line,
                format!("rule lhs `{l}` is not of base type"),
            ));
        }
        let r = typer.expr(&rhs)?;
        if r.ty() != l.ty() {
            return Err(Error::semantic(
                line,
                format!("rule sides have different types: {} vs {}", l.ty(), r.ty()),
            ));
        }
        let rule = Rule::new(l, r);
        rule.validate(&sig)
            .map_err(|e| Error::semantic(line, e.to_string()))?;
        rules.push(rule);
    }
    Strs::new(sig, rules)
}

/// Parses a ground term over the signature.
pub fn parse_term(sig: &Signature, text: &str) -> Result<Term> {
    let toks = lex_line(text, 1)?;
    let mut c = Cursor::new(&toks, 1);
    let ast = parse_ast(&mut c)?;
    c.expect_end()?;
    let typer = Typer {
        sig,
        line: 1,
        vars: BTreeMap::new(),
        rule_mode: false,
    };
    typer.expr(&ast)
}

/// Parses a term whose free identifiers are the given typed variables.
pub fn parse_open_term(
    sig: &Signature,
    vars: &BTreeMap<String, SimpleType>,
    text: &str,
) -> Result<Term> {
    let toks = lex_line(text, 1)?;
    let mut c = Cursor::new(&toks, 1);
    let ast = parse_ast(&mut c)?;
    c.expect_end()?;
    let typer = Typer {
        sig,
        line: 1,
        vars: vars.clone(),
        rule_mode: true,
    };
    typer.expr(&ast)
}

pub fn parse_type(sig: &Signature, text: &str) -> Result<SimpleType> {
    let toks = lex_line(text, 1)?;
    let mut c = Cursor::new(&toks, 1);
    let t = parse_type_tokens(&mut c, sig)?;
    c.expect_end()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ARITH: &str = "
sort nat
cons 0 : nat
cons s : nat -> nat
fn add : nat -> nat -> nat
rule add 0 y -> y
rule add (s x) y -> s (add x y)
";

    #[test]
    fn parses_add() {
        let strs = parse_strs(ARITH).unwrap();
        assert_eq!(strs.rules.len(), 2);
        assert_eq!(strs.kind_of("add"), Some(SymbolKind::Defined));
        assert_eq!(strs.rules[1].to_string(), "add (s x) y -> s (add x y)");
    }

    #[test]
    fn constructors_only() {
        let strs = parse_strs("sort nat\ncons 0 : nat\n").unwrap();
        assert!(strs.rules.is_empty());
    }

    #[test]
    fn unbound_rhs_variable() {
        let err = parse_strs(&format!("{ARITH}rule add 0 y -> z\n")).unwrap_err();
        assert!(
            err.to_string().contains("variable z not bound by lhs"),
            "{err}"
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_strs("sort nat\ncons 0 : foo\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
        let bad = format!("{ARITH}rule add 0 y -> s\n");
        assert!(parse_strs(&bad).is_err());
        let arrow_rule = "sort nat\nfn f : nat -> nat\nfn g : nat -> nat\nrule f -> g\n";
        assert!(parse_strs(arrow_rule).is_err());
        let ctor_head = "sort nat\ncons c : nat -> nat\nrule c x -> x\n";
        assert!(parse_strs(ctor_head).is_err());
        assert!(matches!(
            parse_strs("sort nat\nfoo\n"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn higher_order_and_sugar() {
        let src = "
sort bit
sort word
cons o : bit
cons i : bit
cons [] : word
cons cons : bit -> word -> word
fn addB : word -> word -> word
fn map : (bit -> bit) -> word -> word
rule map F [] -> []
rule map F (a :: as) -> F a :: map F as
rule addB x y -> x
";
        let strs = parse_strs(src).unwrap();
        assert_eq!(
            strs.rules[1].to_string(),
            "map F (a :: as) -> (F a) :: (map F as)"
        );
        let t = parse_term(&strs.signature, "o :: i :: [] +B []").unwrap();
        assert_eq!(t.to_string(), "o :: (i :: ([] +B []))");
        let round = parse_strs(&strs.to_string()).unwrap();
        assert_eq!(round.to_string(), strs.to_string());
    }
}
