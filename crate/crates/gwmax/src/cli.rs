//! The `gwmax` command line.
//!
//! Exit codes: 0 on success and PASS verdicts, 1 on a FAIL verdict or a
//! runtime failure (I/O, vertex budget, trial limit), 2 on invalid input.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use gwmax_core::convergence::{
    self, leaf_fixtures, right_plus_fixtures, MonteCarloPlan, Overall, ProbeSuite, Regime, FIXTURE_THRESHOLDS,
};
use gwmax_core::maxdeg::tail_report;
use gwmax_core::oracle::{
    conditioned_event_by_enumeration, event_by_enumeration, exact_conditioned_graft, exact_conditioned_graft_plus,
    limit_graft_prob, limit_graft_plus_prob, EventProb,
};
use gwmax_core::rng;
use gwmax_core::sampler::{ConditionedLaw, EqSampler, GtSampler, GwSampler, LimitSampler, DEFAULT_BUDGET, DEFAULT_MAX_TRIALS};
use gwmax_core::{Criticality, Error, GraftKind, MaxDegTable, OffspringLaw, SampleConfig};
use serde_json::{json, Value};

use crate::json::{parse_law, parse_probe, parse_probes, partial_to_json, tree_to_json};
use crate::report::{write_summary, write_tail_csv, write_verify_csv, write_verify_json};
use crate::runner::{init_threads, ordered, Rayon};
use crate::{io_error, CliError};

#[derive(Debug, Parser)]
#[command(name = "gwmax", version, about = "Maximal out-degree of Galton-Watson trees")]
pub struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print progress to the error stream; repeat for more.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tail table of the maximal out-degree: p_n, q_n, p_n/q_n, H(n)^n.
    Maxdeg(MaxdegArgs),
    /// Sample trees, one JSON tree per line.
    Sample(SampleArgs),
    /// Exact probabilities of a graft event.
    Oracle(OracleArgs),
    /// Convergence check of conditioned trees against their limit.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct MaxdegArgs {
    /// Offspring law: inline JSON or a file path.
    #[arg(long)]
    pub law: String,
    #[arg(long)]
    pub n_max: u64,
    /// Output CSV; the output stream if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Unconditioned GW tree.
    Gw,
    /// Conditioned on M ≤ n.
    Le,
    /// Conditioned on M = n.
    Eq,
    /// Conditioned on M > n.
    Gt,
    /// Truncated size-biased limit tree.
    Limit,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub law: String,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Conditioning level for le, eq and gt.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, env = "GWMAX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Truncation depth of limit trees.
    #[arg(long, default_value_t = 10)]
    pub depth: u64,
    /// Truncation width of limit trees.
    #[arg(long, default_value_t = 10)]
    pub width: u64,
    /// Maximum vertices per finite tree.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Maximum rejection trials per conditioned tree.
    #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
    pub max_trials: u64,
    /// Output JSON-lines file; the output stream if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub law: String,
    /// Enumerate trees with at most this many vertices.
    #[arg(long)]
    pub max_vertices: usize,
    /// Graft probe: inline JSON or a file path.
    #[arg(long)]
    pub event: String,
    /// Also condition on M = n, for each value given.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Critical,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub law: String,
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    /// JSON array of probes (inline or a file path); the fixture probes of
    /// the regime if absent.
    #[arg(long)]
    pub probes: Option<String>,
    #[arg(long)]
    pub n_min: u64,
    #[arg(long)]
    pub n_max: u64,
    /// Largest gap allowed at n-max in the sub-critical regime.
    #[arg(long, default_value_t = convergence::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Values of n for Monte Carlo rows, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mc_n: Vec<u64>,
    #[arg(long, default_value_t = convergence::DEFAULT_MC_SAMPLES)]
    pub mc_samples: u64,
    #[arg(long, env = "GWMAX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Report format; inferred from the output extension if absent.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gwmax: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    match &cli.command {
        Command::Maxdeg(a) => maxdeg(a, cli.verbose),
        Command::Sample(a) => sample(a, cli.verbose),
        Command::Oracle(a) => oracle(a, cli.verbose),
        Command::Verify(a) => verify(a, cli.verbose),
    }
}

/// A buffered writer to `path`, or to the output stream.
fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_error(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<(), CliError> {
    w.flush().map_err(|e| match path {
        Some(p) => io_error(p, e),
        None => CliError::Io(e.to_string()),
    })
}

fn maxdeg(a: &MaxdegArgs, verbose: u8) -> Result<(), CliError> {
    let law = parse_law(&a.law)?;
    let report = tail_report(&law, a.n_max)?;
    if verbose > 0 {
        eprintln!("{}: {} rows, ratio limit {}", law.describe(), report.rows.len(), report.limit);
        if !report.applicable {
            eprintln!("critical law: the ratio and H(n)^n limits are not claimed");
        }
    }
    let out = a.out.as_deref();
    let mut w = open_output(out)?;
    write_tail_csv(&report, &mut w)?;
    finish(w, out)
}

enum Sampler {
    Gw(GwSampler),
    Eq(EqSampler),
    Gt(GtSampler),
    Limit(LimitSampler),
}

impl Sampler {
    fn new(law: &OffspringLaw, a: &SampleArgs) -> Result<Self, CliError> {
        let cfg = SampleConfig {
            seed: a.seed,
            stream: 0,
            budget: a.budget,
            depth: a.depth,
            width: a.width,
            max_trials: a.max_trials,
        };
        if a.budget == 0 {
            return Err(CliError::Input("--budget must be at least 1".into()));
        }
        let level = || a.n.ok_or_else(|| CliError::Input(format!("--mode {:?} needs --n", a.mode).to_lowercase()));
        Ok(match a.mode {
            Mode::Gw => Sampler::Gw(GwSampler::new(law, a.budget)?),
            Mode::Le => Sampler::Gw(GwSampler::conditioned(&ConditionedLaw::new(law, level()?)?, a.budget)),
            Mode::Eq => {
                let n = level()?;
                if law.pmf(n) == 0.0 {
                    return Err(Error::NullEvent(n).into());
                }
                let table = MaxDegTable::new(law, n)?;
                Sampler::Eq(EqSampler::new(&table, n, &cfg)?)
            }
            Mode::Gt => Sampler::Gt(GtSampler::new(law, level()?, &cfg)?),
            Mode::Limit => Sampler::Limit(LimitSampler::new(law, &cfg)?),
        })
    }

    fn line(&self, seed: u64, index: u64) -> Result<String, CliError> {
        let mut r = rng::stream(seed, index);
        Ok(match self {
            Sampler::Gw(s) => tree_to_json(&s.draw(&mut r)?),
            Sampler::Eq(s) => tree_to_json(&s.draw(&mut r)?.tree),
            Sampler::Gt(s) => tree_to_json(&s.draw(&mut r)?.tree),
            Sampler::Limit(s) => partial_to_json(&s.draw(&mut r)?),
        })
    }
}

fn sample(a: &SampleArgs, verbose: u8) -> Result<(), CliError> {
    let law = parse_law(&a.law)?;
    let sampler = Sampler::new(&law, a)?;
    if let (Sampler::Eq(s), true) = (&sampler, verbose > 0) {
        eprintln!("expected rejection trials per tree: {}", s.expected_trials());
    }
    let out = a.out.as_deref();
    let mut w = open_output(out)?;
    let wrap = |e: io::Error| match out {
        Some(p) => io_error(p, e),
        None => CliError::Io(e.to_string()),
    };
    ordered(a.count, |i| sampler.line(a.seed, i), |line| writeln!(w, "{line}").map_err(wrap))?;
    finish(w, out)
}

fn prob_json(p: &EventProb) -> Value {
    json!({ "lower": p.lower, "gap": p.gap })
}

fn oracle(a: &OracleArgs, verbose: u8) -> Result<(), CliError> {
    let law = parse_law(&a.law)?;
    if a.max_vertices == 0 {
        return Err(CliError::Input("--max-vertices must be at least 1".into()));
    }
    let probe = parse_probe(&a.event)?;
    let e = &probe.event;
    let (t, x) = (e.base(), e.site());
    let unconditional = event_by_enumeration(&law, e, a.max_vertices)?;
    let limit = match (e.kind(), law.criticality()) {
        (GraftKind::Leaf, Criticality::Critical) => Some(limit_graft_prob(&law, t, x)?),
        (GraftKind::RightPlus { k }, Criticality::SubCritical) => Some(limit_graft_plus_prob(&law, t, x, k)?),
        _ => None,
    };
    let mut conditioned = Vec::new();
    if let Some(&n_top) = a.n.iter().max() {
        let table = MaxDegTable::new(&law, n_top)?;
        for &n in &a.n {
            if law.pmf(n) == 0.0 {
                return Err(Error::NullEvent(n).into());
            }
            let identity = match e.kind() {
                GraftKind::Leaf => exact_conditioned_graft(&table, t, x, n),
                GraftKind::RightPlus { k } => exact_conditioned_graft_plus(&table, t, x, k, n),
            };
            let identity = match identity {
                Ok(c) => json!({ "conditional": c.conditional, "joint": c.joint }),
                Err(Error::IdentityNotApplicable { .. } | Error::Critical(_)) => Value::Null,
                Err(err) => return Err(err.into()),
            };
            let enumerated = conditioned_event_by_enumeration(&table, e, n, a.max_vertices)?;
            conditioned.push(json!({
                "n": n,
                "q_n": table.q(n),
                "identity": identity,
                "enumeration": prob_json(&enumerated),
            }));
        }
    }
    let doc = json!({
        "law": law.describe(),
        "event": e.to_string(),
        "probe_id": probe.id,
        "max_vertices": a.max_vertices,
        "unconditional": prob_json(&unconditional),
        "limit": limit,
        "conditioned": conditioned,
    });
    if verbose > 0 {
        eprintln!("{}: {}", probe.id, unconditional.lower);
    }
    let out = a.out.as_deref();
    let mut w = open_output(out)?;
    let text = serde_json::to_string_pretty(&doc).expect("oracle output serialises");
    writeln!(w, "{text}").map_err(|err| CliError::Io(err.to_string()))?;
    finish(w, out)
}

fn verify(a: &VerifyArgs, verbose: u8) -> Result<(), CliError> {
    let law = parse_law(&a.law)?;
    let regime = match a.regime {
        RegimeArg::Critical => Regime::Critical,
        RegimeArg::Subcritical => Regime::SubCritical,
    };
    let probes = match &a.probes {
        Some(arg) => parse_probes(arg)?,
        None => match regime {
            Regime::Critical => leaf_fixtures(),
            Regime::SubCritical => right_plus_fixtures(&FIXTURE_THRESHOLDS),
        },
    };
    let mut suite = ProbeSuite::new(law, probes, a.n_min, a.n_max);
    suite.tolerance = a.tolerance;
    if !a.mc_n.is_empty() {
        suite.monte_carlo = Some(MonteCarloPlan::new(a.mc_n.clone(), a.mc_samples, a.seed));
    }
    let report = convergence::run_check_with(regime, &suite, &Rayon)?;
    let format = a.format.unwrap_or(match a.out.as_deref().and_then(Path::extension) {
        Some(ext) if ext == "json" => Format::Json,
        _ => Format::Csv,
    });
    let out = a.out.as_deref();
    let mut w = open_output(out)?;
    match format {
        Format::Csv => write_verify_csv(&report, &mut w)?,
        Format::Json => write_verify_json(&report, &mut w)?,
    }
    finish(w, out)?;
    if verbose > 0 || out.is_some() {
        let _ = write_summary(&report, io::stderr().lock());
    }
    match report.verdict {
        Overall::Fail => Err(CliError::Failed("verification FAILED".into())),
        Overall::Pass | Overall::NoProbes => Ok(()),
    }
}
