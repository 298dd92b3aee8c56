//! Seeded samplers.
//!
//! Trees are generated depth-first as preorder degree sequences, drawing each
//! out-degree by inversion. Conditioning on `{M ≤ n}` is an exact change of
//! offspring law (`p̂_m = p_m H(n)^{m-1}` for `m ≤ n`); `{M = n}` rejects from
//! it; `{M > n}` first draws the value of `M` and then conditions on it.

use alloc::vec::Vec;

use rand::Rng;

use crate::maxdeg::{solve_h, MaxDegTable};
use crate::offspring::{Criticality, DegreeSampler, OffspringLaw, Outcome};
use crate::rng::{self, Stream};
use crate::tree::{FiniteTree, Mark, PartialTree};
use crate::{Error, Result};

pub const DEFAULT_BUDGET: usize = 1_000_000;
pub const DEFAULT_MAX_TRIALS: u64 = 100_000_000;

/// Randomness and size limits for one sampling task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub seed: u64,
    pub stream: u64,
    /// Maximum number of vertices in a finite tree.
    pub budget: usize,
    /// Truncation depth for limit-tree samples.
    pub depth: u64,
    /// Truncation width for limit-tree samples; also the number of children
    /// materialised at an infinite vertex.
    pub width: u64,
    /// Maximum rejection trials per conditioned draw.
    pub max_trials: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 0,
            stream: 0,
            budget: DEFAULT_BUDGET,
            depth: 10,
            width: 10,
            max_trials: DEFAULT_MAX_TRIALS,
        }
    }
}

impl SampleConfig {
    pub fn with_seed(seed: u64) -> Self {
        SampleConfig { seed, ..Self::default() }
    }

    pub fn rng(&self) -> Stream {
        rng::stream(self.seed, self.stream)
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidArgument("vertex budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Unconditioned GW generation for a fixed offspring sampler.
#[derive(Debug, Clone)]
pub struct GwSampler {
    degrees: DegreeSampler,
    budget: usize,
}

impl GwSampler {
    pub fn new(law: &OffspringLaw, budget: usize) -> Result<Self> {
        law.ensure_not_supercritical("GW trees are infinite with positive probability")?;
        Ok(GwSampler { degrees: DegreeSampler::for_law(law), budget })
    }

    /// GW generation for the law `p̂(n)`.
    pub fn conditioned(law: &ConditionedLaw, budget: usize) -> Self {
        GwSampler { degrees: DegreeSampler::from_weights(&law.pmf), budget }
    }

    /// Fill `buf` with a preorder degree sequence and return its maximum.
    ///
    /// On [`Error::BudgetExceeded`] the buffer holds the first `budget`
    /// degrees generated.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<u32>) -> Result<u32> {
        buf.clear();
        let mut pending: u64 = 1;
        let mut max = 0u32;
        while pending > 0 {
            if buf.len() == self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            let k = match self.degrees.sample(rng) {
                Outcome::Finite(k) => k.min(u32::MAX as u64) as u32,
                Outcome::Infinite => unreachable!("offspring samplers have no mass at infinity"),
            };
            buf.push(k);
            max = max.max(k);
            pending = pending - 1 + k as u64;
        }
        Ok(max)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FiniteTree> {
        let mut buf = Vec::new();
        self.draw_into(rng, &mut buf)?;
        Ok(FiniteTree::from_degrees_unchecked(buf))
    }
}

/// The law of the root degree of `τ` given `{M(τ) ≤ n}`:
/// `p̂_m(n) = p_m H(n)^m / H(n)` for `m ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedLaw {
    n: u64,
    h: f64,
    hbar: f64,
    pmf: Vec<f64>,
}

impl ConditionedLaw {
    pub fn new(law: &OffspringLaw, n: u64) -> Result<Self> {
        let s = solve_h(law, n)?;
        Ok(Self::build(law, n, s.h, s.hbar))
    }

    pub fn from_table(table: &MaxDegTable, n: u64) -> Self {
        Self::build(table.law(), n, table.h(n), table.hbar(n))
    }

    fn build(law: &OffspringLaw, n: u64, h: f64, hbar: f64) -> Self {
        let ln_h = libm::log1p(-hbar);
        let pmf = law
            .pmf_prefix(n)
            .into_iter()
            .enumerate()
            .map(|(m, p)| if m == 0 { p / h } else { p * libm::exp((m as f64 - 1.0) * ln_h) })
            .collect();
        ConditionedLaw { n, h, hbar, pmf }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `H(n)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pmf(&self, m: u64) -> f64 {
        self.pmf.get(m as usize).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.pmf
    }

    pub fn total(&self) -> f64 {
        crate::sum::sum(self.pmf.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        crate::sum::sum(self.pmf.iter().enumerate().map(|(m, p)| m as f64 * p))
    }
}

/// Rejection sampler for `dist(τ | M(τ) = n)`.
#[derive(Debug, Clone)]
pub struct EqSampler {
    le: GwSampler,
    n: u64,
    expected_trials: f64,
    max_trials: u64,
}

/// A tree drawn given `{M = n}` and the number of `{M ≤ n}` draws it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqDraw {
    pub tree: FiniteTree,
    pub trials: u64,
}

impl EqSampler {
    pub fn new(table: &MaxDegTable, n: u64, cfg: &SampleConfig) -> Result<Self> {
        cfg.validate()?;
        let law = table.law();
        if law.pmf(n) == 0.0 {
            return Err(Error::NullEvent(n));
        }
        let expected_trials = expected_trials(table, n);
        if expected_trials > cfg.max_trials as f64 {
            return Err(Error::InfeasibleConditioning { expected: expected_trials, limit: cfg.max_trials });
        }
        let le = GwSampler::conditioned(&ConditionedLaw::from_table(table, n), cfg.budget);
        Ok(EqSampler { le, n, expected_trials, max_trials: cfg.max_trials })
    }

    /// `H(n) / q_n`, the mean number of `{M ≤ n}` draws per accepted tree.
    pub fn expected_trials(&self) -> f64 {
        self.expected_trials
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EqDraw> {
        let mut buf = Vec::new();
        for trials in 1..=self.max_trials {
            if self.le.draw_into(rng, &mut buf)? as u64 == self.n {
                return Ok(EqDraw { tree: FiniteTree::from_degrees_unchecked(buf), trials });
            }
        }
        Err(Error::TrialLimit(self.max_trials))
    }
}

/// `H(n) / q_n`.
pub fn expected_trials(table: &MaxDegTable, n: u64) -> f64 {
    let q = table.q(n);
    if q == 0.0 {
        f64::INFINITY
    } else {
        table.h(n) / q
    }
}

/// Sampler for `dist(τ | M(τ) > n)`: draw `K = M` from `q` restricted to
/// `{k > n}`, then draw from `dist(τ | M = K)`.
#[derive(Debug, Clone)]
pub struct GtSampler {
    table: MaxDegTable,
    n: u64,
    cfg: SampleConfig,
}

/// A tree drawn given `{M > n}`, its maximal out-degree, and the rejection
/// trials spent on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtDraw {
    pub tree: FiniteTree,
    pub max_degree: u64,
    pub trials: u64,
}

const GT_TABLE_MARGIN: u64 = 64;

impl GtSampler {
    pub fn new(law: &OffspringLaw, n: u64, cfg: &SampleConfig) -> Result<Self> {
        cfg.validate()?;
        law.ensure_not_supercritical("GW trees are infinite with positive probability")?;
        if law.tail(n) == 0.0 {
            return Err(Error::BoundedLaw(law.support_max().unwrap_or(n)));
        }
        let table = MaxDegTable::new(law, n + GT_TABLE_MARGIN)?;
        Ok(GtSampler { table, n, cfg: *cfg })
    }

    fn hbar(&self, k: u64) -> f64 {
        if k <= self.table.n_max() {
            self.table.hbar(k)
        } else {
            solve_h(self.table.law(), k).map(|s| s.hbar).unwrap_or(0.0)
        }
    }

    /// The smallest `k > n` with `H̄(k) < v H̄(n)`.
    pub fn invert(&self, v: f64) -> u64 {
        let target = v * self.table.hbar(self.n);
        let mut lo = self.n; // H̄(lo) ≥ target
        let mut step = 1u64;
        let mut hi = lo + step;
        while self.hbar(hi) >= target {
            lo = hi;
            step = step.saturating_mul(2);
            hi = lo.saturating_add(step);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.hbar(mid) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GtDraw> {
        let k = self.invert(rng::fine_uniform(rng));
        let eq = if k <= self.table.n_max() {
            EqSampler::new(&self.table, k, &self.cfg)?
        } else {
            let table = MaxDegTable::new(self.table.law(), k)?;
            EqSampler::new(&table, k, &self.cfg)?
        };
        let d = eq.draw(rng)?;
        Ok(GtDraw { tree: d.tree, max_degree: k, trials: d.trials })
    }
}

/// Sampler for depth- and width-truncated views of the limit tree `τ*(p)`.
///
/// Special vertices draw their out-degree from `p̃` and pass the special mark
/// to one uniformly chosen child; a special vertex with infinite out-degree
/// is marked [`Mark::Infinite`], shows `width` normal children, and ends the
/// special lineage. Normal vertices are GW(p). A width cut keeps the first
/// `width` children, or more if needed to keep the special child.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    special: DegreeSampler,
    normal: DegreeSampler,
    depth: u64,
    width: u64,
    budget: usize,
}

impl LimitSampler {
    pub fn new(law: &OffspringLaw, cfg: &SampleConfig) -> Result<Self> {
        cfg.validate()?;
        let biased = law.bias()?;
        Ok(LimitSampler {
            special: biased.sampler(),
            normal: DegreeSampler::for_law(law),
            depth: cfg.depth,
            width: cfg.width,
            budget: cfg.budget,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PartialTree> {
        let mut present = Vec::new();
        let mut marks = Vec::new();
        let mut special = Vec::new();
        // (depth, is special)
        let mut stack: Vec<(u64, bool)> = alloc::vec![(0, true)];
        let mut kids: Vec<bool> = Vec::new();
        while let Some((depth, is_special)) = stack.pop() {
            if present.len() == self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            special.push(is_special);
            if depth >= self.depth {
                present.push(0);
                marks.push(Mark::Frontier);
                continue;
            }
            let sampler = if is_special { &self.special } else { &self.normal };
            kids.clear();
            match sampler.sample(rng) {
                Outcome::Finite(k) => {
                    let chosen = if is_special && k > 0 { Some(rng.gen_range(0..k)) } else { None };
                    // the shown prefix always reaches the special child
                    let shown = k.min(self.width).max(chosen.map_or(0, |c| c + 1));
                    kids.extend((0..shown).map(|i| chosen == Some(i)));
                    marks.push(if shown < k { Mark::WidthCut { degree: k } } else { Mark::Materialized });
                    present.push(shown as u32);
                }
                Outcome::Infinite => {
                    kids.extend((0..self.width).map(|_| false));
                    marks.push(Mark::Infinite);
                    present.push(self.width as u32);
                }
            }
            for s in kids.iter().rev() {
                stack.push((depth + 1, *s));
            }
        }
        Ok(PartialTree::from_parts(present, marks, special)
            .expect("limit samples are valid partial trees")
            .with_limits(Some(self.depth), Some(self.width)))
    }
}

/// One GW tree.
pub fn sample_gw(law: &OffspringLaw, cfg: &SampleConfig) -> Result<FiniteTree> {
    cfg.validate()?;
    GwSampler::new(law, cfg.budget)?.draw(&mut cfg.rng())
}

/// One tree from `dist(τ | M(τ) ≤ n)`.
pub fn sample_conditioned_le(law: &OffspringLaw, n: u64, cfg: &SampleConfig) -> Result<FiniteTree> {
    cfg.validate()?;
    law.ensure_not_supercritical("GW trees are infinite with positive probability")?;
    let c = ConditionedLaw::new(law, n)?;
    GwSampler::conditioned(&c, cfg.budget).draw(&mut cfg.rng())
}

/// One tree from `dist(τ | M(τ) = n)`, with its trial count.
pub fn sample_conditioned_eq(law: &OffspringLaw, n: u64, cfg: &SampleConfig) -> Result<EqDraw> {
    let table = MaxDegTable::new(law, n)?;
    EqSampler::new(&table, n, cfg)?.draw(&mut cfg.rng())
}

/// One tree from `dist(τ | M(τ) > n)`.
pub fn sample_conditioned_gt(law: &OffspringLaw, n: u64, cfg: &SampleConfig) -> Result<GtDraw> {
    GtSampler::new(law, n, cfg)?.draw(&mut cfg.rng())
}

/// One truncated sample of `τ*(p)`.
pub fn sample_limit_tree(law: &OffspringLaw, cfg: &SampleConfig) -> Result<PartialTree> {
    LimitSampler::new(law, cfg)?.draw(&mut cfg.rng())
}

/// `true` when `τ*(p)` has an infinite vertex (sub-critical laws).
pub fn limit_has_infinite_vertex(law: &OffspringLaw) -> bool {
    law.criticality() == Criticality::SubCritical
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{empirical_tv as tv_distance, enumerate_trees};
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn geo() -> OffspringLaw {
        OffspringLaw::geometric(1.0 / 3.0).unwrap()
    }

    fn within_sigmas(count: u64, trials: u64, p: f64, sigmas: f64) -> bool {
        let n = trials as f64;
        let sd = (n * p * (1.0 - p)).sqrt();
        (count as f64 - n * p).abs() <= sigmas * sd
    }

    /// Upper-tail p-value of Pearson's statistic; expected counts are pooled
    /// into the last bin until every bin expects at least 5.
    fn chi_square_p(observed: &[u64], probs: &[f64], total: u64) -> f64 {
        let mut obs = observed.to_vec();
        let mut exp: Vec<f64> = probs.iter().map(|p| p * total as f64).collect();
        while exp.len() > 2 && *exp.last().unwrap() < 5.0 {
            let e = exp.pop().unwrap();
            let o = obs.pop().unwrap();
            *exp.last_mut().unwrap() += e;
            *obs.last_mut().unwrap() += o;
        }
        let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (*o as f64 - e).powi(2) / e).sum();
        1.0 - ChiSquared::new((exp.len() - 1) as f64).unwrap().cdf(stat)
    }

    #[test]
    fn determinism() {
        let cfg = SampleConfig { seed: 42, stream: 3, ..Default::default() };
        let law = geo();
        assert_eq!(sample_gw(&law, &cfg).unwrap(), sample_gw(&law, &cfg).unwrap());
        assert_eq!(sample_conditioned_eq(&law, 3, &cfg).unwrap(), sample_conditioned_eq(&law, 3, &cfg).unwrap());
        assert_eq!(sample_limit_tree(&law, &cfg).unwrap(), sample_limit_tree(&law, &cfg).unwrap());
    }

    #[test]
    fn gw_leaf_frequency() {
        let law = geo();
        let s = GwSampler::new(&law, DEFAULT_BUDGET).unwrap();
        let mut rng = rng::stream(1, 0);
        let n = 100_000;
        let leaves = (0..n).filter(|_| s.draw(&mut rng).unwrap().len() == 1).count() as u64;
        assert!(within_sigmas(leaves, n, 2.0 / 3.0, 3.0));
    }

    #[test]
    fn gw_root_degree_mean_at_criticality() {
        let law = OffspringLaw::poisson(1.0).unwrap();
        let s = GwSampler::new(&law, DEFAULT_BUDGET).unwrap();
        let mut rng = rng::stream(2, 0);
        let mut buf = Vec::new();
        let n = 20_000;
        let mut total = 0u64;
        for _ in 0..n {
            // a budget overrun still leaves the root degree in the buffer
            let _ = s.draw_into(&mut rng, &mut buf);
            total += buf[0] as u64;
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 1.0).abs() <= 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn budget_is_enforced() {
        let law = OffspringLaw::poisson(1.0).unwrap();
        let cfg = SampleConfig { budget: 1, ..Default::default() };
        let mut hit = false;
        for stream in 0..50 {
            match sample_gw(&law, &SampleConfig { stream, ..cfg }) {
                Err(Error::BudgetExceeded(1)) => hit = true,
                Ok(t) => assert_eq!(t.len(), 1),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(hit);
        assert!(sample_gw(&law, &SampleConfig { budget: 0, ..cfg }).is_err());
    }

    #[test]
    fn conditioned_law_normalisation() {
        for law in [geo(), OffspringLaw::poisson(1.0).unwrap(), OffspringLaw::power_law(0.5, 4.0).unwrap()] {
            for n in [0u64, 1, 2, 5, 20, 100] {
                let c = ConditionedLaw::new(&law, n).unwrap();
                assert!((c.total() - 1.0).abs() < 1e-12, "{} n={n}", law.describe());
                // strictly below 1, up to rounding near criticality
                assert!(c.mean() <= 1.0);
            }
        }
        let c = ConditionedLaw::new(&geo(), 1).unwrap();
        assert!((c.pmf(0) - 7.0 / 9.0).abs() < 1e-15);
        assert!((c.pmf(1) - 2.0 / 9.0).abs() < 1e-15);
        let binary = OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        let c = ConditionedLaw::new(&binary, 2).unwrap();
        assert_eq!(c.weights(), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn le_examples() {
        let law = geo();
        let c = ConditionedLaw::new(&law, 1).unwrap();
        let s = GwSampler::conditioned(&c, DEFAULT_BUDGET);
        let mut rng = rng::stream(3, 0);
        let n = 100_000;
        let mut leaves = 0;
        for _ in 0..n {
            let t = s.draw(&mut rng).unwrap();
            assert!(t.max_out_degree() <= 1);
            if t.len() == 1 {
                leaves += 1;
            }
        }
        assert!(within_sigmas(leaves, n, 7.0 / 9.0, 3.0));
        for stream in 0..20 {
            let t = sample_conditioned_le(&law, 0, &SampleConfig { stream, ..Default::default() }).unwrap();
            assert_eq!(t, FiniteTree::leaf());
        }
    }

    #[test]
    fn le_matches_enumeration() {
        let law = geo();
        let n = 2;
        let table = MaxDegTable::new(&law, n).unwrap();
        let mut exact = BTreeMap::new();
        for t in enumerate_trees(6, n as u32) {
            exact.insert(t.clone(), t.weight(&law) / table.h(n));
        }
        let s = GwSampler::conditioned(&ConditionedLaw::from_table(&table, n), DEFAULT_BUDGET);
        let mut rng = rng::stream(4, 0);
        let samples: Vec<FiniteTree> = (0..100_000).map(|_| s.draw(&mut rng).unwrap()).collect();
        let tv = tv_distance(&samples, &exact, 6);
        assert!(tv < 0.02, "tv {tv}");
    }

    #[test]
    fn eq_examples() {
        let law = geo();
        let table = MaxDegTable::new(&law, 3).unwrap();
        let cfg = SampleConfig::default();
        let s = EqSampler::new(&table, 3, &cfg).unwrap();
        let mut rng = rng::stream(5, 0);
        let n = 10_000u64;
        let mut trials = 0;
        for _ in 0..n {
            let d = s.draw(&mut rng).unwrap();
            assert_eq!(d.tree.max_out_degree(), 3);
            trials += d.trials;
        }
        let mean = trials as f64 / n as f64;
        let expect = table.h(3) / table.q(3);
        assert!((mean / expect - 1.0).abs() < 0.1, "{mean} vs {expect}");

        let binary = OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        let bt = MaxDegTable::new(&binary, 2).unwrap();
        let s = EqSampler::new(&bt, 2, &cfg).unwrap();
        for _ in 0..1000 {
            assert_eq!(s.draw(&mut rng).unwrap().tree.degree(0), 2);
        }
        assert!(matches!(EqSampler::new(&bt, 1, &cfg), Err(Error::NullEvent(1))));
    }

    #[test]
    fn eq_refuses_infeasible_targets() {
        let law = geo();
        let table = MaxDegTable::new(&law, 40).unwrap();
        let cfg = SampleConfig { max_trials: 1000, ..Default::default() };
        assert!(matches!(EqSampler::new(&table, 40, &cfg), Err(Error::InfeasibleConditioning { .. })));
    }

    #[test]
    fn gt_distribution_of_max_degree() {
        let law = geo();
        let n = 2;
        let s = GtSampler::new(&law, n, &SampleConfig::default()).unwrap();
        let table = MaxDegTable::new(&law, 30).unwrap();
        let mut rng = rng::stream(6, 0);
        let draws = 10_000u64;
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for _ in 0..draws {
            let d = s.draw(&mut rng).unwrap();
            assert!(d.tree.max_out_degree() > n);
            assert_eq!(d.tree.max_out_degree(), d.max_degree);
            *counts.entry(d.max_degree).or_insert(0) += 1;
        }
        for k in 3..=6u64 {
            let p = table.q(k) / table.hbar(n);
            assert!(within_sigmas(counts.get(&k).copied().unwrap_or(0), draws, p, 3.0), "k={k}");
        }
    }

    #[test]
    fn gt_inversion_boundaries() {
        let law = geo();
        let s = GtSampler::new(&law, 2, &SampleConfig::default()).unwrap();
        assert_eq!(s.invert(1.0), 3);
        let t = MaxDegTable::new(&law, 10).unwrap();
        let v = t.hbar(5) / t.hbar(2);
        assert_eq!(s.invert(v), 6);
        assert_eq!(s.invert(v * (1.0 + 1e-12)), 5);
        assert!(s.invert(1e-200) > 400);
    }

    #[test]
    fn gt_from_zero_excludes_the_leaf() {
        let law = geo();
        let s = GtSampler::new(&law, 0, &SampleConfig::default()).unwrap();
        let mut rng = rng::stream(7, 0);
        for _ in 0..2000 {
            assert!(s.draw(&mut rng).unwrap().tree.len() > 1);
        }
        let binary = OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        assert!(matches!(GtSampler::new(&binary, 2, &SampleConfig::default()), Err(Error::BoundedLaw(2))));
    }

    #[test]
    fn kesten_spine_reaches_the_truncation_depth() {
        let law = OffspringLaw::poisson(1.0).unwrap();
        for stream in 0..200 {
            let cfg = SampleConfig { stream, depth: 8, width: 50, ..Default::default() };
            let t = sample_limit_tree(&law, &cfg).unwrap();
            assert_eq!(t.spine().len(), 9);
            assert_eq!(t.infinite_vertex(), None);
            let spine = t.spine();
            for w in spine.windows(2) {
                assert_eq!(t.depth_of(w[1]), t.depth_of(w[0]) + 1);
            }
        }
    }

    #[test]
    fn width_cuts_keep_the_special_child() {
        let law = OffspringLaw::poisson(1.0).unwrap();
        let mut cut = 0;
        for stream in 0..300 {
            let cfg = SampleConfig { stream, depth: 6, width: 1, ..Default::default() };
            let t = sample_limit_tree(&law, &cfg).unwrap();
            assert_eq!(t.spine().len(), 7);
            for v in t.spine() {
                if let Mark::WidthCut { degree } = t.mark(v) {
                    cut += 1;
                    assert!(degree > t.present_children(v) as u64);
                }
                let special_kids = t.children(v).filter(|c| t.is_special(*c)).count();
                assert_eq!(special_kids, usize::from(t.depth_of(v) < 6));
            }
        }
        assert!(cut > 0);
    }

    #[test]
    fn condensation_depth_is_geometric() {
        let law = geo();
        let cfg = SampleConfig { depth: 60, width: 64, ..Default::default() };
        let s = LimitSampler::new(&law, &cfg).unwrap();
        let mut rng = rng::stream(8, 0);
        let draws = 20_000u64;
        let mut counts = vec![0u64; 61];
        for _ in 0..draws {
            let t = s.draw(&mut rng).unwrap();
            let v = t.infinite_vertex().expect("one infinite vertex");
            assert_eq!(t.marks().iter().filter(|m| **m == Mark::Infinite).count(), 1);
            counts[t.depth_of(v)] += 1;
        }
        let probs: Vec<f64> = (0..61).map(|d| libm::pow(0.5, d as f64 + 1.0)).collect();
        assert!(chi_square_p(&counts, &probs, draws) > 0.01);
    }

    #[test]
    fn two_atom_biased_law() {
        let law = OffspringLaw::explicit(vec![0.5, 0.5]).unwrap();
        let cfg = SampleConfig { depth: 5, width: 5, ..Default::default() };
        let s = LimitSampler::new(&law, &cfg).unwrap();
        let mut rng = rng::stream(9, 0);
        let n = 20_000u64;
        let mut one_child = 0;
        for _ in 0..n {
            let t = s.draw(&mut rng).unwrap();
            match t.mark(0) {
                Mark::Infinite => assert_eq!(t.present_children(0), 5),
                Mark::Materialized => {
                    assert_eq!(t.present_children(0), 1);
                    one_child += 1;
                }
                other => panic!("{other:?}"),
            }
        }
        assert!(within_sigmas(one_child, n, 0.5, 3.0));
    }

    #[test]
    fn off_spine_subtrees_are_gw() {
        // root degree of the first normal child of the root
        let law = geo();
        let cfg = SampleConfig { depth: 30, width: 64, ..Default::default() };
        let s = LimitSampler::new(&law, &cfg).unwrap();
        let mut rng = rng::stream(10, 0);
        let mut counts = vec![0u64; 12];
        let mut total = 0;
        while total < 20_000 {
            let t = s.draw(&mut rng).unwrap();
            if let Some(c) = t.children(0).find(|c| !t.is_special(*c)) {
                let d = match t.out_degree(c) {
                    Some(crate::tree::OutDegree::Finite(d)) => d as usize,
                    other => panic!("{other:?}"),
                };
                counts[d.min(11)] += 1;
                total += 1;
            }
        }
        let mut probs: Vec<f64> = (0..11).map(|k| law.pmf(k)).collect();
        probs.push(law.tail(10));
        assert!(chi_square_p(&counts, &probs, total) > 0.01);
    }

    #[test]
    fn supercritical_laws_are_rejected() {
        let sup = OffspringLaw::explicit(vec![0.2, 0.0, 0.8]).unwrap();
        let cfg = SampleConfig::default();
        assert!(matches!(sample_gw(&sup, &cfg), Err(Error::SuperCritical(..))));
        assert!(matches!(sample_limit_tree(&sup, &cfg), Err(Error::SuperCritical(..))));
        assert!(matches!(sample_conditioned_eq(&sup, 2, &cfg), Err(Error::SuperCritical(..))));
    }

    #[test]
    fn samples_match_law_weights_at_small_sizes() {
        let law = geo();
        let mut exact = BTreeMap::new();
        for t in enumerate_trees(5, u32::MAX) {
            exact.insert(t.clone(), t.weight(&law));
        }
        let s = GwSampler::new(&law, DEFAULT_BUDGET).unwrap();
        let mut rng = rng::stream(11, 0);
        let samples: Vec<FiniteTree> = (0..50_000).map(|_| s.draw(&mut rng).unwrap()).collect();
        assert!(tv_distance(&samples, &exact, 5) < 0.02);
    }
}
