//! Term graph rewriting: rooted acyclic graphs with sharing, innermost contraction and unraveling.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::rewrite::{RunStats, StepRule};
use crate::sopoly::OracleTable;
use crate::strs::Strs;
use crate::term::{Position, Term, TermKind};
use crate::types::{Name, SimpleType, SymbolKind};
use crate::word::{decode_word, WordSyms};

pub type VertexId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    /// Unlabeled vertex; unravels to a variable.
    Hole,
    Sym(Name),
    App(VertexId, VertexId),
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub label: Label,
    pub ty: SimpleType,
}

impl Vertex {
    pub fn succ(&self) -> Vec<VertexId> {
        match self.label {
            Label::App(l, r) => vec![l, r],
            _ => Vec::new(),
        }
    }
}

/// A rooted labeled dag. Ids are never reused within one graph.
#[derive(Clone, Debug)]
pub struct TermGraph {
    vertices: Vec<Option<Vertex>>,
    live: usize,
    root: VertexId,
    /// Vertices known to have no redex below them; stays valid under contraction.
    normal: Vec<bool>,
}

impl TermGraph {
    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn vertex(&self, v: VertexId) -> Option<&Vertex> {
        self.vertices.get(v).and_then(Option::as_ref)
    }

    /// Number of live vertices.
    pub fn node_count(&self) -> usize {
        self.live
    }

    pub fn ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_some())
            .map(|(i, _)| i)
    }

    fn add(&mut self, label: Label, ty: SimpleType) -> VertexId {
        self.vertices.push(Some(Vertex { label, ty }));
        self.normal.push(false);
        self.live += 1;
        self.vertices.len() - 1
    }

    fn get(&self, v: VertexId) -> &Vertex {
        self.vertices[v].as_ref().expect("live vertex")
    }

    /// Vertices whose in-degree exceeds one.
    pub fn shared_vertices(&self) -> Vec<VertexId> {
        let mut indeg: HashMap<VertexId, usize> = HashMap::new();
        for v in self.ids() {
            for s in self.get(v).succ() {
                *indeg.entry(s).or_default() += 1;
            }
        }
        let mut out: Vec<_> = indeg
            .into_iter()
            .filter(|&(_, d)| d > 1)
            .map(|(v, _)| v)
            .collect();
        out.sort_unstable();
        out
    }

    /// Post-order over vertices reachable from `start`, each visited once, successor 1 first.
    fn post_order(&self, start: VertexId) -> Vec<VertexId> {
        let mut seen = vec![false; self.vertices.len()];
        let mut out = Vec::new();
        let mut stack = vec![(start, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                out.push(v);
                continue;
            }
            if seen[v] {
                continue;
            }
            seen[v] = true;
            stack.push((v, true));
            if let Label::App(l, r) = self.get(v).label {
                stack.push((r, false));
                stack.push((l, false));
            }
        }
        out
    }

    /// True iff every vertex is reachable from the root and no cycle exists.
    pub fn is_well_formed(&self) -> bool {
        if self.vertex(self.root).is_none() {
            return false;
        }
        let order = self.post_order(self.root);
        if order.len() != self.live {
            return false;
        }
        let mut rank = vec![usize::MAX; self.vertices.len()];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        order
            .iter()
            .all(|&v| self.get(v).succ().iter().all(|&s| rank[s] < rank[v]))
    }

    /// One line per vertex: `<id> <label|_> <succ ids...>`, preceded by `root <id>`.
    pub fn dump(&self) -> String {
        let mut out = format!("root {}\n", self.root);
        for v in self.ids() {
            let vx = self.get(v);
            let _ = match &vx.label {
                Label::Hole => writeln!(out, "{v} _"),
                Label::Sym(f) => writeln!(out, "{v} {f}"),
                Label::App(l, r) => writeln!(out, "{v} @ {l} {r}"),
            };
        }
        out
    }

    /// Graphviz DOT rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n  node [shape=circle];\n");
        for v in self.ids() {
            let label = match &self.get(v).label {
                Label::Hole => "_".to_string(),
                Label::Sym(f) => f.to_string(),
                Label::App(..) => "@".to_string(),
            };
            let peri = if v == self.root {
                ", peripheries=2"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  v{v} [label=\"{}\"{peri}];",
                label.replace('"', "\\\"")
            );
            if let Label::App(l, r) = self.get(v).label {
                let _ = writeln!(
                    out,
                    "  v{v} -> v{l} [label=\"1\"];\n  v{v} -> v{r} [label=\"2\"];"
                );
            }
        }
        out.push_str("}\n");
        out
    }

    fn collect_garbage(&mut self) {
        let mut reach = vec![false; self.vertices.len()];
        for v in self.post_order(self.root) {
            reach[v] = true;
        }
        for (v, slot) in self.vertices.iter_mut().enumerate() {
            if slot.is_some() && !reach[v] {
                *slot = None;
                self.live -= 1;
            }
        }
    }
}

impl fmt::Display for TermGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

fn insert_tree(g: &mut TermGraph, s: &Term) -> VertexId {
    match s.kind() {
        TermKind::Var(_) => g.add(Label::Hole, s.ty().clone()),
        TermKind::Sym(f) => g.add(Label::Sym(f.clone()), s.ty().clone()),
        TermKind::App(l, r) => {
            let lv = insert_tree(g, l);
            let rv = insert_tree(g, r);
            g.add(Label::App(lv, rv), s.ty().clone())
        }
    }
}

/// Tree-shaped graph over the positions of `s`; variables become unlabeled vertices.
pub fn to_graph(s: &Term) -> TermGraph {
    let mut g = TermGraph {
        vertices: Vec::new(),
        live: 0,
        root: 0,
        normal: Vec::new(),
    };
    g.root = insert_tree(&mut g, s);
    g
}

/// Unravels the subgraph at `v`; shared vertices yield shared subterms, holes yield `x<k>`.
fn unravel(
    g: &TermGraph,
    v: VertexId,
    memo: &mut HashMap<VertexId, Term>,
    holes: &mut usize,
) -> Term {
    for u in g.post_order(v) {
        if memo.contains_key(&u) {
            continue;
        }
        let vx = g.get(u);
        let t = match &vx.label {
            Label::Hole => {
                *holes += 1;
                Term::var(format!("x{}", *holes - 1), vx.ty.clone())
            }
            Label::Sym(f) => Term::sym(f.clone(), vx.ty.clone()),
            Label::App(l, r) => Term::app_typed(memo[l].clone(), memo[r].clone(), vx.ty.clone()),
        };
        memo.insert(u, t);
    }
    memo[&v].clone()
}

/// The unraveling of `g`; each unlabeled vertex becomes one variable.
pub fn from_graph(g: &TermGraph) -> Term {
    unravel(g, g.root, &mut HashMap::new(), &mut 0)
}

/// A rule redex `(rule, vertex, φ)` or an oracle call at `vertex`.
#[derive(Clone, Debug)]
pub enum GraphRedex {
    Rule {
        rule: usize,
        vertex: VertexId,
        /// Images of the lhs positions.
        phi: BTreeMap<Position, VertexId>,
        /// Images of the lhs variables.
        bindings: BTreeMap<Name, VertexId>,
    },
    Oracle {
        vertex: VertexId,
        symbol: Name,
        argument: VertexId,
    },
}

impl GraphRedex {
    pub fn vertex(&self) -> VertexId {
        match self {
            GraphRedex::Rule { vertex, .. } | GraphRedex::Oracle { vertex, .. } => *vertex,
        }
    }
}

fn match_at(
    g: &TermGraph,
    pat: &Term,
    v: VertexId,
    path: &mut Vec<u8>,
    phi: &mut BTreeMap<Position, VertexId>,
    bindings: &mut BTreeMap<Name, VertexId>,
) -> bool {
    let vx = g.get(v);
    let ok = match (pat.kind(), &vx.label) {
        (TermKind::Var(x), _) => {
            bindings.insert(x.clone(), v);
            true
        }
        (TermKind::Sym(f), Label::Sym(h)) => f == h,
        (TermKind::App(pl, pr), Label::App(l, r)) => {
            let (l, r) = (*l, *r);
            path.push(1);
            let a = match_at(g, pl, l, path, phi, bindings);
            path.pop();
            path.push(2);
            let b = a && match_at(g, pr, r, path, phi, bindings);
            path.pop();
            b
        }
        _ => false,
    };
    if ok {
        phi.insert(Position(path.clone()), v);
    }
    ok
}

fn head_symbol(g: &TermGraph, mut v: VertexId) -> Option<(&Name, usize)> {
    let mut args = 0;
    loop {
        match &g.get(v).label {
            Label::App(l, _) => {
                v = *l;
                args += 1;
            }
            Label::Sym(f) => return Some((f, args)),
            Label::Hole => return None,
        }
    }
}

fn root_redex(strs: &Strs, g: &TermGraph, v: VertexId) -> Result<Option<GraphRedex>> {
    let vx = g.get(v);
    if !vx.ty.is_base() {
        return Ok(None);
    }
    let Some((f, args)) = head_symbol(g, v) else {
        return Ok(None);
    };
    match strs.kind_of(f) {
        Some(SymbolKind::Defined) => {
            for &i in strs.rules_for(f) {
                let (mut phi, mut bindings) = (BTreeMap::new(), BTreeMap::new());
                if match_at(
                    g,
                    &strs.rules[i].lhs,
                    v,
                    &mut Vec::new(),
                    &mut phi,
                    &mut bindings,
                ) {
                    return Ok(Some(GraphRedex::Rule {
                        rule: i,
                        vertex: v,
                        phi,
                        bindings,
                    }));
                }
            }
            Ok(None)
        }
        Some(SymbolKind::Oracle) if args == 1 => {
            let Label::App(_, arg) = vx.label else {
                unreachable!()
            };
            Ok(Some(GraphRedex::Oracle {
                vertex: v,
                symbol: f.clone(),
                argument: arg,
            }))
        }
        _ => Ok(None),
    }
}

/// Innermost redex: the first vertex in depth-first post-order (successor 1 first) that is a redex.
pub fn find_graph_redex(strs: &Strs, g: &mut TermGraph) -> Result<Option<GraphRedex>> {
    let mut stack = vec![(g.root, false)];
    let mut seen = vec![false; g.vertices.len()];
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            if let Some(r) = root_redex(strs, g, v)? {
                return Ok(Some(r));
            }
            g.normal[v] = true;
            continue;
        }
        if seen[v] || g.normal[v] {
            continue;
        }
        seen[v] = true;
        stack.push((v, true));
        if let Label::App(l, r) = g.get(v).label {
            stack.push((r, false));
            stack.push((l, false));
        }
    }
    Ok(None)
}

fn build(g: &mut TermGraph, r: &Term, bindings: &BTreeMap<Name, VertexId>) -> VertexId {
    match r.kind() {
        TermKind::Var(x) => bindings[x],
        TermKind::Sym(f) => g.add(Label::Sym(f.clone()), r.ty().clone()),
        TermKind::App(a, b) => {
            let av = build(g, a, bindings);
            let bv = build(g, b, bindings);
            g.add(Label::App(av, bv), r.ty().clone())
        }
    }
}

fn redirect(g: &mut TermGraph, from: VertexId, to: VertexId) {
    for slot in g.vertices.iter_mut().flatten() {
        if let Label::App(l, r) = &mut slot.label {
            if *l == from {
                *l = to;
            }
            if *r == from {
                *r = to;
            }
        }
    }
    if g.root == from {
        g.root = to;
    }
}

/// Building, redirection and garbage collection. Returns what fired.
pub fn contract(
    strs: &Strs,
    oracle: Option<&OracleTable>,
    g: &mut TermGraph,
    redex: &GraphRedex,
) -> Result<StepRule> {
    let (v, new_root, rule) = match redex {
        GraphRedex::Rule {
            rule,
            vertex,
            bindings,
            ..
        } => {
            let rhs = &strs.rules[*rule].rhs;
            (*vertex, build(g, rhs, bindings), StepRule::Rule(*rule))
        }
        GraphRedex::Oracle {
            vertex,
            symbol,
            argument,
        } => {
            let arg = unravel(g, *argument, &mut HashMap::new(), &mut 0);
            let query = decode_word(&arg).ok_or_else(|| Error::OracleArg(arg.to_string()))?;
            let table = oracle
                .ok_or_else(|| Error::invalid(format!("no oracle table bound to {symbol}")))?;
            let answer = table.lookup(&query)?;
            let encoded = WordSyms::new(&strs.signature)?.encode(&answer);
            let root = insert_tree(g, &encoded);
            (
                *vertex,
                root,
                StepRule::Oracle {
                    symbol: symbol.clone(),
                    query,
                    answer,
                },
            )
        }
    };
    redirect(g, v, new_root);
    g.collect_garbage();
    debug_assert!(g.is_well_formed());
    Ok(rule)
}

/// One step on the graph: vertex, rule and node counts around the contraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphStep {
    pub vertex: VertexId,
    pub rule: StepRule,
    pub nodes_before: usize,
    pub nodes_after: usize,
}

#[derive(Clone, Debug)]
pub struct GraphRun {
    pub graph: TermGraph,
    pub trace: Vec<GraphStep>,
    pub stats: RunStats,
}

/// Contracts innermost redexes until none is left or `max_steps` is reached.
pub fn normalize_graph(
    strs: &Strs,
    oracle: Option<&OracleTable>,
    mut g: TermGraph,
    max_steps: u64,
) -> Result<GraphRun> {
    let mut stats = RunStats {
        max_nodes: g.node_count(),
        ..Default::default()
    };
    let mut trace = Vec::new();
    loop {
        let Some(redex) = find_graph_redex(strs, &mut g)? else {
            stats.normal_form = true;
            break;
        };
        if stats.steps >= max_steps {
            break;
        }
        let before = g.node_count();
        let rule = contract(strs, oracle, &mut g, &redex)?;
        stats.steps += 1;
        stats.max_nodes = stats.max_nodes.max(g.node_count());
        if let StepRule::Oracle { query, .. } = &rule {
            stats.oracle_calls += 1;
            stats.max_query = stats.max_query.max(query.len() as u64);
        }
        trace.push(GraphStep {
            vertex: redex.vertex(),
            rule,
            nodes_before: before,
            nodes_after: g.node_count(),
        });
    }
    Ok(GraphRun {
        graph: g,
        trace,
        stats,
    })
}

/// The largest rhs graph: the per-step node growth bound.
pub fn max_rhs_graph_size(strs: &Strs) -> usize {
    strs.rules.iter().map(|r| r.rhs.size()).max().unwrap_or(0)
}
