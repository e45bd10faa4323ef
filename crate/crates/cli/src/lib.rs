//! Command implementations behind the `cstuple` binary.
//!
//! Every command returns an [`Outcome`] holding its exit status and captured output, so callers
//! can run commands in-process and compare outputs byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cstuple::interp::check_monotonicity;
use cstuple::{
    check_poly_bounded, check_system, compile_otm, compute_type2, from_graph, monitor_bounds,
    normalize, normalize_graph, otm_run, parse_interp, parse_strs, parse_term, to_graph, CheckMode,
    CheckOptions, CsInterp, OracleTable, OtmSpec, SoPoly, Strs, Verdict, Word,
};

/// Header line opening every command's standard output.
pub const FORMAT_HEADER: &str = "cstuple-format 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Input = 2,
    Budget = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// The status a library error maps to.
    pub fn of_error(e: &anyhow::Error) -> ExitStatus {
        match e.downcast_ref::<cstuple::Error>() {
            Some(cstuple::Error::Budget(_)) => ExitStatus::Budget,
            Some(cstuple::Error::NotAWord(_)) => ExitStatus::Failure,
            _ => ExitStatus::Input,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn new(status: ExitStatus, stdout: String) -> Outcome {
        Outcome {
            status,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: anyhow::Error) -> Outcome {
        Outcome {
            status: ExitStatus::of_error(&e),
            stdout: String::new(),
            stderr: format!("error: {e:#}\n"),
        }
    }

    /// Value of the first stdout line of the form `<key> <value>`.
    pub fn field(&self, key: &str) -> Option<&str> {
        self.stdout
            .lines()
            .find_map(|l| l.strip_prefix(key)?.strip_prefix(' '))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "cstuple",
    version,
    about = "Cost-size checking, rewriting and oracle machines for second-order rewrite systems"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every sampled valuation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Reduction or machine step budget.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub max_steps: u64,
    /// Samples per rule in falsify mode.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub budget: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an interpretation against a rewrite system.
    Check(CheckArgs),
    /// Normalize a ground term.
    Run(RunArgs),
    /// Run a type-2 program on an oracle and an input word.
    Compute(ComputeArgs),
    /// Translate an oracle machine into a rewrite system and interpretation.
    CompileOtm(CompileArgs),
    /// Run an oracle machine directly.
    SimulateOtm(SimulateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Falsify,
    Certify,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Term,
    Graph,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    /// Oracle table file.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    /// Answer for queries missing from the table (`_` is the empty word).
    #[arg(long)]
    pub oracle_default: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Rewrite system file.
    pub strs: PathBuf,
    /// Interpretation file.
    pub csi: PathBuf,
    /// Sample valuations, or prove each rule by polynomial domination.
    #[arg(long, value_enum, default_value_t = Mode::Falsify)]
    pub mode: Mode,
    /// Also check the polynomial-boundedness conditions for this main symbol.
    #[arg(long)]
    pub main: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Rewrite system file.
    pub strs: PathBuf,
    /// Ground term to normalize.
    pub term: String,
    /// Rewrite terms directly or shared term graphs.
    #[arg(long, value_enum, default_value_t = Strategy::Term)]
    pub strategy: Strategy,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Print one line per step.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ComputeArgs {
    /// Rewrite system file.
    pub strs: PathBuf,
    /// Symbol of type `(word -> word) -> word -> word` to apply.
    #[arg(long)]
    pub main: String,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Input bits (`_` is the empty word).
    #[arg(long, default_value = "_")]
    pub input: String,
    /// Interpretation used to derive and check step and query bounds.
    #[arg(long)]
    pub monitor: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CompileArgs {
    /// Machine description file.
    pub otm: PathBuf,
    /// Runtime polynomial over one variable and `F`.
    #[arg(long)]
    pub poly: String,
    /// Output prefix; writes `<prefix>.strs` and `<prefix>.csi`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    /// Machine description file.
    pub otm: PathBuf,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Input bits (`_` is the empty word).
    #[arg(long, default_value = "_")]
    pub input: String,
}

const STACK_BYTES: usize = 1 << 30;

/// Parses arguments (program name first) and runs the command on a thread with a large stack.
pub fn execute<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    status: ExitStatus::Input,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::new(ExitStatus::Success, text)
            };
        }
    };
    let worker = std::thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(move || dispatch(&cli));
    match worker.map(|h| h.join()) {
        Ok(Ok(out)) => out,
        Ok(Err(_)) => Outcome::error(anyhow::anyhow!("command panicked")),
        Err(e) => Outcome::error(e.into()),
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let c = &cli.common;
    let result = match &cli.command {
        Command::Check(a) => cmd_check(c, a),
        Command::Run(a) => cmd_run(c, a),
        Command::Compute(a) => cmd_compute(c, a),
        Command::CompileOtm(a) => cmd_compile_otm(c, a),
        Command::SimulateOtm(a) => cmd_simulate_otm(c, a),
    };
    result.unwrap_or_else(Outcome::error)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_strs(path: &Path) -> anyhow::Result<Strs> {
    parse_strs(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_interp(path: &Path, strs: &Strs) -> anyhow::Result<CsInterp> {
    parse_interp(&read(path)?, strs).with_context(|| format!("in {}", path.display()))
}

fn parse_word(s: &str) -> anyhow::Result<Word> {
    Ok(s.parse::<Word>()?)
}

fn show_word(w: &Word) -> String {
    if w.is_empty() {
        "_".into()
    } else {
        w.to_string()
    }
}

impl OracleArgs {
    pub fn load(&self) -> anyhow::Result<Option<OracleTable>> {
        let table = match &self.oracle {
            Some(p) => Some(
                read(p)?
                    .parse::<OracleTable>()
                    .with_context(|| format!("in {}", p.display()))?,
            ),
            None => None,
        };
        let default = self.oracle_default.as_deref().map(parse_word).transpose()?;
        Ok(match (table, default) {
            (None, None) => None,
            (t, None) => t,
            (t, d) => Some(t.unwrap_or_default().with_default(d)),
        })
    }
}

fn header(command: &str) -> String {
    format!("{FORMAT_HEADER}\ncommand {command}\n")
}

pub fn cmd_check(common: &Common, a: &CheckArgs) -> anyhow::Result<Outcome> {
    let strs = load_strs(&a.strs)?;
    let interp = load_interp(&a.csi, &strs)?;
    let mode = match a.mode {
        Mode::Falsify => CheckMode::Falsify,
        Mode::Certify => CheckMode::Certify,
    };
    let opts = CheckOptions {
        mode,
        budget: common.budget,
        seed: common.seed,
    };
    let report = check_system(&interp, &strs, &opts);
    let mut out = header("check");
    writeln!(
        out,
        "mode {}",
        if mode == CheckMode::Falsify {
            "falsify"
        } else {
            "certify"
        }
    )?;
    let mut failed = false;
    for (i, (rule, v)) in strs.rules.iter().zip(&report.verdicts).enumerate() {
        writeln!(out, "rule {i} {v} # {rule}")?;
        failed |=
            v.is_falsified() || (mode == CheckMode::Certify && matches!(v, Verdict::Unknown(_)));
    }
    let samples = common.budget.clamp(1, 200);
    for w in check_monotonicity(&interp, samples, common.seed) {
        writeln!(out, "nonmonotone {w}")?;
        failed = true;
    }
    writeln!(out, "overall {}", report.overall)?;
    if let Some(main) = &a.main {
        let rep = check_poly_bounded(&interp, &strs, main);
        writeln!(out, "main {main}")?;
        writeln!(out, "mu {}\nnu {}", rep.mu, rep.nu)?;
        if let Some(p) = &rep.poly {
            writeln!(out, "bound {p}")?;
        }
        for f in &rep.failures {
            writeln!(out, "unbounded {f}")?;
        }
        writeln!(out, "poly-bounded {}", rep.ok)?;
        failed |= !rep.ok;
    }
    Ok(Outcome::new(
        if failed {
            ExitStatus::Failure
        } else {
            ExitStatus::Success
        },
        out,
    ))
}

pub fn cmd_run(common: &Common, a: &RunArgs) -> anyhow::Result<Outcome> {
    let strs = load_strs(&a.strs)?;
    let oracle = a.oracle.load()?;
    let strs = if strs.signature.has_sort("word") {
        strs.with_oracle_symbol()?.0
    } else {
        strs
    };
    let term = parse_term(&strs.signature, &a.term)?;
    if !term.ty().is_base() {
        bail!(cstuple::Error::Type(format!(
            "term has type {}, expected a base type",
            term.ty()
        )));
    }
    let mut out = header("run");
    let strategy = match a.strategy {
        Strategy::Term => "term",
        Strategy::Graph => "graph",
    };
    writeln!(out, "strategy {strategy}")?;
    let (result, stats) = match a.strategy {
        Strategy::Term => {
            let run = normalize(&strs, oracle.as_ref(), &term, common.max_steps)?;
            if a.trace {
                for (i, r) in run.trace.iter().enumerate() {
                    writeln!(
                        out,
                        "step {} rule {} at {} nodes {} -> {}",
                        i + 1,
                        r.rule,
                        r.position,
                        r.nodes_before,
                        r.nodes_after
                    )?;
                }
            }
            (run.term, run.stats)
        }
        Strategy::Graph => {
            let run = normalize_graph(&strs, oracle.as_ref(), to_graph(&term), common.max_steps)?;
            if a.trace {
                for (i, r) in run.trace.iter().enumerate() {
                    writeln!(
                        out,
                        "step {} rule {} at vertex {} nodes {} -> {}",
                        i + 1,
                        r.rule,
                        r.vertex,
                        r.nodes_before,
                        r.nodes_after
                    )?;
                }
            }
            (from_graph(&run.graph), run.stats)
        }
    };
    writeln!(out, "result {result}")?;
    writeln!(out, "{stats}")?;
    Ok(Outcome::new(
        if stats.normal_form {
            ExitStatus::Success
        } else {
            ExitStatus::Budget
        },
        out,
    ))
}

pub fn cmd_compute(common: &Common, a: &ComputeArgs) -> anyhow::Result<Outcome> {
    let strs = load_strs(&a.strs)?;
    let oracle = a.oracle.load()?.unwrap_or_default();
    let input = parse_word(&a.input)?;
    let mut out = header("compute");
    writeln!(out, "input {}", show_word(&input))?;
    let status = match &a.monitor {
        None => {
            let run = compute_type2(&strs, &a.main, &oracle, &input, common.max_steps)?;
            writeln!(out, "output {}", show_word(&run.output))?;
            writeln!(out, "{}", run.stats)?;
            ExitStatus::Success
        }
        Some(csi) => {
            let interp = load_interp(csi, &strs)?;
            let rep = monitor_bounds(&strs, &interp, &a.main, &oracle, &input, common.max_steps)?;
            writeln!(out, "output {}", show_word(&rep.output))?;
            writeln!(out, "{rep}")?;
            writeln!(out, "monitor {}", if rep.ok { "ok" } else { "violated" })?;
            if rep.ok {
                ExitStatus::Success
            } else {
                ExitStatus::Failure
            }
        }
    };
    Ok(Outcome::new(status, out))
}

pub fn cmd_compile_otm(_common: &Common, a: &CompileArgs) -> anyhow::Result<Outcome> {
    let spec: OtmSpec = read(&a.otm)?
        .parse()
        .with_context(|| format!("in {}", a.otm.display()))?;
    let pm: SoPoly = a.poly.parse().context("in --poly")?;
    let compiled = compile_otm(&spec, &pm)?;
    let strs_path = a.out.with_extension("strs");
    let csi_path = a.out.with_extension("csi");
    fs::write(&strs_path, &compiled.strs_text)
        .with_context(|| format!("cannot write {}", strs_path.display()))?;
    fs::write(&csi_path, &compiled.csi_text)
        .with_context(|| format!("cannot write {}", csi_path.display()))?;
    let mut out = header("compile-otm");
    writeln!(out, "states {}", spec.states().len())?;
    writeln!(out, "rules {}", compiled.strs.rules.len())?;
    writeln!(out, "strs {}", strs_path.display())?;
    writeln!(out, "csi {}", csi_path.display())?;
    Ok(Outcome::new(ExitStatus::Success, out))
}

pub fn cmd_simulate_otm(common: &Common, a: &SimulateArgs) -> anyhow::Result<Outcome> {
    let spec: OtmSpec = read(&a.otm)?
        .parse()
        .with_context(|| format!("in {}", a.otm.display()))?;
    let oracle = a.oracle.load()?.unwrap_or_default();
    let input = parse_word(&a.input)?;
    let (output, steps) = otm_run(&spec, &oracle, &input, common.max_steps)?;
    let mut out = header("simulate-otm");
    writeln!(out, "input {}", show_word(&input))?;
    writeln!(out, "output {}", show_word(&output))?;
    writeln!(out, "steps {steps}")?;
    Ok(Outcome::new(ExitStatus::Success, out))
}

#[cfg(test)]
mod tests;
