//! Second-order simply-typed term rewriting with cost-size interpretations.

pub mod error;
pub mod graph;
pub mod interp;
mod lex;
pub mod ortho;
pub mod otm;
pub mod parse;
pub mod rewrite;
pub mod sample;
pub mod sopoly;
pub mod strs;
pub mod subst;
pub mod term;
pub mod types;
pub mod word;

pub use error::{Error, Result};
pub use graph::{
    contract, find_graph_redex, from_graph, normalize_graph, to_graph, GraphRedex, GraphRun,
    TermGraph,
};
pub use interp::{
    check_poly_bounded, check_rule, check_system, parse_interp, CheckMode, CheckOptions, CsExpr,
    CsInterp, Verdict,
};
pub use ortho::{check_orthogonality, OrthogonalityReport, Violation};
pub use otm::{compile_otm, otm_run, otm_step, CompiledOtm, OtmConfig, OtmSpec};
pub use parse::{parse_open_term, parse_strs, parse_term, parse_type};
pub use rewrite::{
    compute_type2, find_innermost_redex, monitor_bounds, normalize, step, Run, RunStats,
    StepRecord, StepRule,
};
pub use sample::TermSampler;
pub use sopoly::{
    build_b, build_d, build_q, limitsize, table_length, Coef, OracleTable, PolyEnv, SoPoly,
};
pub use strs::{Rule, Strs};
pub use subst::{apply_subst, match_term, unify, Substitution};
pub use term::{Position, Term, TermKind};
pub use types::{Direction, Name, Signature, SimpleType, SymbolDecl, SymbolKind};
pub use word::{decode_word, encode_word, Word, WordSyms};
