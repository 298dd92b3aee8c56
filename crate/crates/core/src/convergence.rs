//! Convergence checks for the conditioned trees.
//!
//! A probe is a graft event. For a critical law the conditional probability
//! of a leaf-graft event given `{M = n}` is compared with its value for
//! Kesten's tree; for a sub-critical law right-graft events are compared
//! with their values for the condensation tree. Exact rows use closed forms;
//! Monte Carlo rows draw from `dist(τ | M = n)` and report a Wilson interval.
//!
//! Monte Carlo work is split into chunks with their own random streams, run
//! by an [`Executor`], and merged by summation in chunk order, so reports do
//! not depend on how chunks are scheduled.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::maxdeg::MaxDegTable;
use crate::offspring::{Criticality, OffspringLaw};
use crate::oracle::{exact_conditioned_graft, exact_conditioned_graft_plus, limit_graft_plus_prob, limit_graft_prob};
use crate::rng;
use crate::sampler::{EqSampler, SampleConfig, DEFAULT_BUDGET, DEFAULT_MAX_TRIALS};
use crate::tree::{FiniteTree, GraftEvent, GraftKind, Label};
use crate::{Error, Result};

/// Exact rows must match their limit to this precision.
pub const EXACT_MATCH: f64 = 1e-10;
/// Exact conditional probabilities must be constant in `n` to this precision.
pub const CONSTANCY: f64 = 1e-12;
/// Default gap allowed at `n_max` for sub-critical probes.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
/// A gap at or below this counts as zero.
pub const ZERO_GAP: f64 = 1e-12;
/// Half-width multiplier of Monte Carlo intervals.
pub const CI_SIGMAS: f64 = 3.0;
pub const DEFAULT_MC_SAMPLES: u64 = 200_000;
pub const DEFAULT_CHUNK: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Critical,
    SubCritical,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Critical => "critical",
            Regime::SubCritical => "subcritical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub id: String,
    pub event: GraftEvent,
}

impl Probe {
    pub fn new(event: GraftEvent) -> Self {
        let id = match event.kind() {
            GraftKind::Leaf => format!("{}@{}", event.base(), event.site()),
            GraftKind::RightPlus { k } => format!("{}@{}+{k}", event.base(), event.site()),
        };
        Probe { id, event }
    }
}

/// The five fixture trees: a single vertex, a root with one child, a root
/// with two children, a path of three vertices, and a root whose only child
/// has two children.
pub fn fixture_trees() -> Vec<FiniteTree> {
    alloc::vec![
        FiniteTree::leaf(),
        FiniteTree::path(2),
        FiniteTree::star(2),
        FiniteTree::path(3),
        FiniteTree::from_children([FiniteTree::star(2)]),
    ]
}

/// Leaf-graft probes at every leaf of every fixture tree.
pub fn leaf_fixtures() -> Vec<Probe> {
    let mut probes = Vec::new();
    for t in fixture_trees() {
        for x in t.leaves() {
            probes.push(Probe::new(GraftEvent::leaf(t.clone(), x).expect("fixture leaves are leaves")));
        }
    }
    probes
}

/// Right-graft probes at every vertex of every fixture tree, for each
/// threshold in `ks`.
pub fn right_plus_fixtures(ks: &[u64]) -> Vec<Probe> {
    let mut probes = Vec::new();
    for t in fixture_trees() {
        for x in t.labels() {
            for &k in ks {
                probes.push(Probe::new(GraftEvent::right_plus(t.clone(), x.clone(), k).expect("fixture vertices exist")));
            }
        }
    }
    probes
}

/// The default thresholds for right-graft fixtures.
pub const FIXTURE_THRESHOLDS: [u64; 3] = [0, 2, 5];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarloPlan {
    /// Values of `n` at which to sample.
    pub n_values: Vec<u64>,
    pub samples: u64,
    pub seed: u64,
    /// Samples per chunk; each chunk has its own stream.
    pub chunk: u64,
    pub budget: usize,
    pub max_trials: u64,
}

impl MonteCarloPlan {
    pub fn new(n_values: Vec<u64>, samples: u64, seed: u64) -> Self {
        MonteCarloPlan { n_values, samples, seed, chunk: DEFAULT_CHUNK, budget: DEFAULT_BUDGET, max_trials: DEFAULT_MAX_TRIALS }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeSuite {
    pub law: OffspringLaw,
    pub probes: Vec<Probe>,
    pub n_min: u64,
    pub n_max: u64,
    pub tolerance: f64,
    pub monte_carlo: Option<MonteCarloPlan>,
}

impl ProbeSuite {
    pub fn new(law: OffspringLaw, probes: Vec<Probe>, n_min: u64, n_max: u64) -> Self {
        ProbeSuite { law, probes, n_min, n_max, tolerance: DEFAULT_TOLERANCE, monte_carlo: None }
    }

    fn check_range(&self) -> Result<()> {
        if self.n_min > self.n_max {
            return Err(Error::InvalidArgument(format!("n-min {} exceeds n-max {}", self.n_min, self.n_max)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// `n` in range with `p_n > 0`.
    fn n_values(&self) -> Vec<u64> {
        (self.n_min..=self.n_max).filter(|n| self.law.pmf(*n) > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// A row that is part of a trend; the probe verdict is decided elsewhere.
    Info,
    /// Precondition not met; nothing was evaluated.
    Skipped,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
            Verdict::Skipped => "SKIPPED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub probe_id: String,
    pub n: u64,
    pub method: Method,
    pub estimate: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub limit: f64,
    pub gap: Option<f64>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSummary {
    pub probe_id: String,
    pub verdict: Verdict,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overall {
    Pass,
    Fail,
    NoProbes,
}

impl Overall {
    pub fn as_str(&self) -> &'static str {
        match self {
            Overall::Pass => "PASS",
            Overall::Fail => "FAIL",
            Overall::NoProbes => "NO PROBES",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub regime: Regime,
    pub law: String,
    pub rows: Vec<Row>,
    pub probes: Vec<ProbeSummary>,
    pub verdict: Overall,
}

impl Report {
    fn finish(regime: Regime, law: &OffspringLaw, rows: Vec<Row>, probes: Vec<ProbeSummary>) -> Self {
        let verdict = if probes.is_empty() {
            Overall::NoProbes
        } else if probes.iter().any(|p| p.verdict == Verdict::Fail) || rows.iter().any(|r| r.verdict == Verdict::Fail) {
            Overall::Fail
        } else {
            Overall::Pass
        };
        Report { regime, law: law.describe(), rows, probes, verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Overall::Fail
    }

    pub fn probe(&self, id: &str) -> Option<&ProbeSummary> {
        self.probes.iter().find(|p| p.probe_id == id)
    }

    pub fn rows_for<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.probe_id == id)
    }
}

/// Wilson score interval for `hits` successes in `trials`, `z` standard
/// deviations wide.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// One unit of Monte Carlo work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub n: u64,
    pub index: u64,
    pub samples: u64,
}

impl Chunk {
    /// The stream id: `n` in the high half, the chunk index in the low half.
    pub fn stream(&self) -> u64 {
        (self.n << 32) | (self.index & 0xFFFF_FFFF)
    }
}

/// Split `samples` draws at `n` into chunks of at most `chunk` draws.
pub fn chunks(n: u64, samples: u64, chunk: u64) -> Vec<Chunk> {
    let chunk = chunk.max(1);
    let mut out = Vec::new();
    let mut left = samples;
    let mut index = 0;
    while left > 0 {
        let take = left.min(chunk);
        out.push(Chunk { n, index, samples: take });
        left -= take;
        index += 1;
    }
    out
}

/// Membership counts from one chunk.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Counts {
    pub samples: u64,
    pub trials: u64,
    pub hits: Vec<u64>,
}

impl Counts {
    pub fn merge(&mut self, other: &Counts) {
        self.samples += other.samples;
        self.trials += other.trials;
        if self.hits.is_empty() {
            self.hits = alloc::vec![0; other.hits.len()];
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
    }
}

/// Draw one chunk from `dist(τ | M = n)` and count membership in each event.
pub fn run_chunk(sampler: &EqSampler, events: &[GraftEvent], seed: u64, chunk: &Chunk) -> Result<Counts> {
    let mut rng = rng::stream(seed, chunk.stream());
    let mut counts = Counts { samples: 0, trials: 0, hits: alloc::vec![0; events.len()] };
    for _ in 0..chunk.samples {
        let d = sampler.draw(&mut rng)?;
        counts.samples += 1;
        counts.trials += d.trials;
        for (h, e) in counts.hits.iter_mut().zip(events) {
            if e.contains(&d.tree) {
                *h += 1;
            }
        }
    }
    Ok(counts)
}

/// Runs independent work items; results must come back in input order.
pub trait Executor {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Send + Sync;
}

/// Runs items one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Send + Sync,
    {
        items.into_iter().map(f).collect()
    }
}

/// Membership counts over `samples` draws from `dist(τ | M = n)`.
pub fn monte_carlo_counts<E: Executor>(
    table: &MaxDegTable,
    n: u64,
    events: &[GraftEvent],
    plan: &MonteCarloPlan,
    executor: &E,
) -> Result<Counts> {
    let cfg = SampleConfig { budget: plan.budget, max_trials: plan.max_trials, ..SampleConfig::default() };
    let sampler = EqSampler::new(table, n, &cfg)?;
    let results = executor.map(chunks(n, plan.samples, plan.chunk), |c| run_chunk(&sampler, events, plan.seed, &c));
    let mut total = Counts { samples: 0, trials: 0, hits: alloc::vec![0; events.len()] };
    for r in results {
        total.merge(&r?);
    }
    Ok(total)
}

fn skipped(probe: &Probe, n: u64, method: Method, limit: f64, why: String) -> Row {
    Row { probe_id: probe.id.clone(), n, method, estimate: None, ci: None, limit, gap: None, verdict: Verdict::Skipped, note: Some(why) }
}

fn precondition_note(t: &FiniteTree, n: u64) -> String {
    format!("precondition n > M(t) fails: n = {n}, M(t) = {}", t.max_out_degree())
}

fn mc_rows<E: Executor>(
    suite: &ProbeSuite,
    table: &MaxDegTable,
    exact: &dyn Fn(&Probe, u64) -> Result<f64>,
    limits: &[f64],
    regime: Regime,
    executor: &E,
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let plan = match &suite.monte_carlo {
        Some(plan) => plan,
        None => return Ok(rows),
    };
    for &n in &plan.n_values {
        if suite.law.pmf(n) == 0.0 {
            return Err(Error::NullEvent(n));
        }
        let live: Vec<usize> = (0..suite.probes.len()).filter(|i| suite.probes[*i].event.base().max_out_degree() < n).collect();
        let events: Vec<GraftEvent> = live.iter().map(|i| suite.probes[*i].event.clone()).collect();
        let counts = if events.is_empty() {
            None
        } else {
            Some(monte_carlo_counts(table, n, &events, plan, executor)?)
        };
        for (i, probe) in suite.probes.iter().enumerate() {
            let pos = live.iter().position(|j| *j == i);
            let (Some(pos), Some(counts)) = (pos, counts.as_ref()) else {
                rows.push(skipped(probe, n, Method::MonteCarlo, limits[i], precondition_note(probe.event.base(), n)));
                continue;
            };
            let hits = counts.hits[pos];
            let estimate = hits as f64 / counts.samples as f64;
            let ci = wilson_interval(hits, counts.samples, CI_SIGMAS);
            // the critical interval must cover the limit; the sub-critical one
            // the exact value at the same n
            let target = match regime {
                Regime::Critical => limits[i],
                Regime::SubCritical => exact(probe, n)?,
            };
            let target = target.clamp(0.0, 1.0);
            let covered = ci.0 <= target && target <= ci.1;
            rows.push(Row {
                probe_id: probe.id.clone(),
                n,
                method: Method::MonteCarlo,
                estimate: Some(estimate),
                ci: Some(ci),
                limit: limits[i],
                gap: Some(libm::fabs(estimate - limits[i])),
                verdict: if covered { Verdict::Pass } else { Verdict::Fail },
                note: Some(format!("{} samples, {} trials, target {target}", counts.samples, counts.trials)),
            });
        }
    }
    Ok(rows)
}

/// Leaf-graft probes against Kesten's tree.
pub fn run_critical_check(suite: &ProbeSuite) -> Result<Report> {
    run_critical_check_with(suite, &Sequential)
}

pub fn run_critical_check_with<E: Executor>(suite: &ProbeSuite, executor: &E) -> Result<Report> {
    let law = &suite.law;
    match law.criticality() {
        Criticality::Critical => {}
        Criticality::SubCritical => {
            return Err(Error::SubCritical("the critical check needs a critical law; use the sub-critical check"))
        }
        Criticality::SuperCritical => return Err(Error::SuperCritical(law.mean(), "conditioning is out of scope")),
    }
    law.ensure_unbounded()?;
    suite.check_range()?;
    if let Some(p) = suite.probes.iter().find(|p| p.event.kind() != GraftKind::Leaf) {
        return Err(Error::InvalidArgument(format!("probe {} is not a leaf-graft event", p.id)));
    }
    let n_top = suite.n_max.max(suite.monte_carlo.as_ref().and_then(|p| p.n_values.iter().max().copied()).unwrap_or(0));
    let table = MaxDegTable::new(law, n_top)?;
    let limits: Vec<f64> = suite
        .probes
        .iter()
        .map(|p| limit_graft_prob(law, p.event.base(), p.event.site()))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let ns = suite.n_values();
    for (i, probe) in suite.probes.iter().enumerate() {
        let t = probe.event.base();
        let limit = limits[i];
        let mut values = Vec::new();
        let mut failed = false;
        for &n in &ns {
            if n <= t.max_out_degree() {
                rows.push(skipped(probe, n, Method::Exact, limit, precondition_note(t, n)));
                continue;
            }
            let c = exact_conditioned_graft(&table, t, probe.event.site(), n)?;
            let gap = libm::fabs(c.conditional - limit);
            let ok = gap <= EXACT_MATCH;
            failed |= !ok;
            values.push(c.conditional);
            rows.push(Row {
                probe_id: probe.id.clone(),
                n,
                method: Method::Exact,
                estimate: Some(c.conditional),
                ci: None,
                limit,
                gap: Some(gap),
                verdict: if ok { Verdict::Pass } else { Verdict::Fail },
                note: None,
            });
            // P(τ = t | M = n) = 0 = P(τ*(p) = t)
            let point = if t.max_out_degree() == n { t.weight(law) / table.q(n) } else { 0.0 };
            failed |= point != 0.0;
            rows.push(Row {
                probe_id: format!("{}:point", probe.id),
                n,
                method: Method::Exact,
                estimate: Some(point),
                ci: None,
                limit: 0.0,
                gap: Some(point),
                verdict: if point == 0.0 { Verdict::Pass } else { Verdict::Fail },
                note: None,
            });
        }
        let spread = spread(&values);
        let constant = spread <= CONSTANCY;
        let verdict = if values.is_empty() {
            Verdict::Skipped
        } else if failed || !constant {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        let note = if values.is_empty() {
            Some(String::from("no n in range exceeds M(t)"))
        } else {
            Some(format!("spread over n {spread:e}"))
        };
        summaries.push(ProbeSummary { probe_id: probe.id.clone(), verdict, note });
    }
    let exact = |p: &Probe, n: u64| exact_conditioned_graft(&table, p.event.base(), p.event.site(), n).map(|c| c.conditional);
    let mc = mc_rows(suite, &table, &exact, &limits, Regime::Critical, executor)?;
    fold_mc(&mut summaries, &mc);
    rows.extend(mc);
    Ok(Report::finish(Regime::Critical, law, rows, summaries))
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

fn fold_mc(summaries: &mut [ProbeSummary], mc: &[Row]) {
    for s in summaries.iter_mut() {
        if mc.iter().any(|r| r.probe_id == s.probe_id && r.verdict == Verdict::Fail) {
            s.verdict = Verdict::Fail;
            s.note = Some(String::from("Monte Carlo interval misses its target"));
        }
    }
}

/// Right-graft probes against the condensation tree.
pub fn run_subcritical_check(suite: &ProbeSuite) -> Result<Report> {
    run_subcritical_check_with(suite, &Sequential)
}

pub fn run_subcritical_check_with<E: Executor>(suite: &ProbeSuite, executor: &E) -> Result<Report> {
    let law = &suite.law;
    match law.criticality() {
        Criticality::SubCritical => {}
        Criticality::Critical => {
            return Err(Error::Critical("the sub-critical check needs a sub-critical law; use the critical check"))
        }
        Criticality::SuperCritical => return Err(Error::SuperCritical(law.mean(), "conditioning is out of scope")),
    }
    law.ensure_unbounded()?;
    suite.check_range()?;
    if let Some(p) = suite.probes.iter().find(|p| !matches!(p.event.kind(), GraftKind::RightPlus { .. })) {
        return Err(Error::InvalidArgument(format!("probe {} is not a right-graft event", p.id)));
    }
    let n_top = suite.n_max.max(suite.monte_carlo.as_ref().and_then(|p| p.n_values.iter().max().copied()).unwrap_or(0));
    let table = MaxDegTable::new(law, n_top)?;
    let threshold = |p: &Probe| match p.event.kind() {
        GraftKind::RightPlus { k } => k,
        GraftKind::Leaf => 0,
    };
    let limits: Vec<f64> = suite
        .probes
        .iter()
        .map(|p| limit_graft_plus_prob(law, p.event.base(), p.event.site(), threshold(p)))
        .collect::<Result<_>>()?;
    let exact = |p: &Probe, n: u64| {
        exact_conditioned_graft_plus(&table, p.event.base(), p.event.site(), threshold(p), n).map(|c| c.conditional)
    };

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let ns = suite.n_values();
    for (i, probe) in suite.probes.iter().enumerate() {
        let t = probe.event.base();
        let limit = limits[i];
        let start = rows.len();
        for &n in &ns {
            if n <= t.max_out_degree() {
                rows.push(skipped(probe, n, Method::Exact, limit, precondition_note(t, n)));
                continue;
            }
            let v = exact(probe, n)?;
            rows.push(Row {
                probe_id: probe.id.clone(),
                n,
                method: Method::Exact,
                estimate: Some(v),
                ci: None,
                limit,
                gap: Some(libm::fabs(v - limit)),
                verdict: Verdict::Info,
                note: None,
            });
        }
        let evaluated: Vec<usize> = (start..rows.len()).filter(|r| rows[*r].gap.is_some()).collect();
        let summary = match (evaluated.first(), evaluated.last()) {
            (Some(&first), Some(&last)) => {
                let g_first = rows[first].gap.unwrap();
                let g_last = rows[last].gap.unwrap();
                let small = g_last < suite.tolerance;
                let shrinking = g_last < g_first || g_last <= ZERO_GAP;
                let verdict = if small && shrinking { Verdict::Pass } else { Verdict::Fail };
                rows[last].verdict = verdict;
                let note = format!(
                    "gap {g_last:e} at n = {} vs {g_first:e} at n = {}, tolerance {:e}",
                    rows[last].n, rows[first].n, suite.tolerance
                );
                ProbeSummary { probe_id: probe.id.clone(), verdict, note: Some(note) }
            }
            _ => ProbeSummary {
                probe_id: probe.id.clone(),
                verdict: Verdict::Skipped,
                note: Some(String::from("no n in range exceeds M(t)")),
            },
        };
        summaries.push(summary);
    }
    let mc = mc_rows(suite, &table, &exact, &limits, Regime::SubCritical, executor)?;
    fold_mc(&mut summaries, &mc);
    rows.extend(mc);
    Ok(Report::finish(Regime::SubCritical, law, rows, summaries))
}

/// Run the check that matches the law's criticality.
pub fn run_check_with<E: Executor>(regime: Regime, suite: &ProbeSuite, executor: &E) -> Result<Report> {
    match regime {
        Regime::Critical => run_critical_check_with(suite, executor),
        Regime::SubCritical => run_subcritical_check_with(suite, executor),
    }
}

/// The limit value of a probe for the given regime.
pub fn probe_limit(law: &OffspringLaw, probe: &Probe) -> Result<f64> {
    match probe.event.kind() {
        GraftKind::Leaf => limit_graft_prob(law, probe.event.base(), probe.event.site()),
        GraftKind::RightPlus { k } => limit_graft_plus_prob(law, probe.event.base(), probe.event.site(), k),
    }
}

/// The root of the singleton tree, the site of the total event.
pub fn total_event(k: u64) -> Probe {
    Probe::new(GraftEvent::right_plus(FiniteTree::leaf(), Label::root(), k).expect("the root exists"))
}
