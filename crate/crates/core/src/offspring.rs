//! Offspring distributions.
//!
//! An [`OffspringLaw`] is a probability mass function on the non-negative
//! integers with finite positive mean. Infinite-support families carry
//! closed-form tails (or, for [`CustomPmf`], a caller-supplied tail bound),
//! so no probability mass is ever dropped silently.

use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, string::String};
use core::fmt;

use rand::Rng;

use crate::special::{hurwitz_zeta, ln_factorial, zeta};
use crate::sum::Compensated;
use crate::{Error, Result};

/// Tolerance on the mean used to classify non-analytic laws as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;
/// Tolerance on the total mass of explicit and custom laws.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// Absolute error allowed on tails of custom laws.
pub const CUSTOM_TAIL_TOLERANCE: f64 = 1e-15;
const CUSTOM_MAX_SUPPORT: u64 = 10_000_000;

/// A user-defined pmf with a certified tail bound.
pub trait CustomPmf: Send + Sync + fmt::Debug {
    fn pmf(&self, k: u64) -> f64;
    /// An upper bound on `Σ_{m > n} m·p_m`; it also bounds the tail mass.
    fn tail_moment_bound(&self, n: u64) -> f64;
    fn is_unbounded(&self) -> bool;
}

#[derive(Debug, Clone)]
pub enum Family {
    Explicit(Vec<f64>),
    /// `p_k = (1 - a) a^k`.
    Geometric { a: f64 },
    Poisson { lambda: f64 },
    /// `p_k = c k^{-α}` for `k ≥ 1`, `p_0 = 1 - c ζ(α)`.
    PowerLaw { c: f64, alpha: f64 },
    Custom(Arc<dyn CustomPmf>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    SubCritical,
    Critical,
    SuperCritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criticality::SubCritical => "sub-critical",
            Criticality::Critical => "critical",
            Criticality::SuperCritical => "super-critical",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OffspringLaw {
    family: Family,
    mean: f64,
    /// `1 - μ`, exactly zero for critical laws.
    deficit: f64,
    criticality: Criticality,
    /// Explicit and custom laws: `p_m` for `m ≤ cutoff`.
    head: Vec<f64>,
    /// Explicit and custom laws: `suffix[n] = Σ_{m ≥ n} p_m` over the head.
    suffix: Vec<f64>,
    /// Explicit and custom laws: `suffix_moment[n] = Σ_{m ≥ n} m p_m`.
    suffix_moment: Vec<f64>,
}

fn classify_mean(mean: f64) -> Criticality {
    if libm::fabs(mean - 1.0) <= CRITICAL_TOLERANCE {
        Criticality::Critical
    } else if mean < 1.0 {
        Criticality::SubCritical
    } else {
        Criticality::SuperCritical
    }
}

fn suffix_sums(head: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut suffix = alloc::vec![0.0; head.len() + 1];
    let mut moment = alloc::vec![0.0; head.len() + 1];
    let mut acc = Compensated::new();
    let mut acc_m = Compensated::new();
    for m in (0..head.len()).rev() {
        acc.add(head[m]);
        acc_m.add(m as f64 * head[m]);
        suffix[m] = acc.value();
        moment[m] = acc_m.value();
    }
    (suffix, moment)
}

impl OffspringLaw {
    /// A finitely supported law given by its pmf `[p_0, p_1, …]`.
    pub fn explicit(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidLaw("empty pmf".into()));
        }
        if let Some((k, p)) = pmf.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidLaw(format!("p_{k} = {p} is not a probability")));
        }
        let total = crate::sum::sum(pmf.iter().copied());
        if libm::fabs(total - 1.0) > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidLaw(format!("pmf sums to {total}, not 1")));
        }
        let mut pmf = pmf;
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        let (suffix, suffix_moment) = suffix_sums(&pmf);
        let mean = suffix_moment[0];
        Self::finish(Family::Explicit(pmf.clone()), mean, None, pmf, suffix, suffix_moment)
    }

    /// `p_k = (1 - a) a^k`, `a ∈ (0, 1)`.
    pub fn geometric(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidLaw(format!("geometric parameter a = {a} must lie in (0, 1)")));
        }
        let mean = a / (1.0 - a);
        let criticality = if a == 0.5 {
            Criticality::Critical
        } else if a < 0.5 {
            Criticality::SubCritical
        } else {
            Criticality::SuperCritical
        };
        let deficit = (1.0 - 2.0 * a) / (1.0 - a);
        Ok(Self::named(Family::Geometric { a }, mean, deficit, criticality))
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidLaw(format!("poisson parameter λ = {lambda} must be positive")));
        }
        let criticality = if lambda == 1.0 {
            Criticality::Critical
        } else if lambda < 1.0 {
            Criticality::SubCritical
        } else {
            Criticality::SuperCritical
        };
        Ok(Self::named(Family::Poisson { lambda }, lambda, 1.0 - lambda, criticality))
    }

    /// `p_k = c k^{-α}` for `k ≥ 1` with `p_0 = 1 - c ζ(α)`; needs `α > 2` for a
    /// finite mean and `c ζ(α) ≤ 1`.
    pub fn power_law(c: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(Error::InvalidLaw(format!(
                "power-law exponent α = {alpha} must exceed 2 for a finite mean"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidLaw(format!("power-law constant c = {c} must be positive")));
        }
        let p0 = 1.0 - c * zeta(alpha);
        if p0 < 0.0 {
            return Err(Error::InvalidLaw(format!(
                "power-law parameters give p_0 = {p0} < 0 (c ζ(α) must not exceed 1)"
            )));
        }
        let mean = c * zeta(alpha - 1.0);
        let criticality = classify_mean(mean);
        let deficit = if criticality == Criticality::Critical { 0.0 } else { 1.0 - mean };
        Ok(Self::named(Family::PowerLaw { c, alpha }, mean, deficit, criticality))
    }

    /// A law given by a [`CustomPmf`]. The pmf is tabulated up to the first
    /// `N` with `tail_moment_bound(N) < 1e-15`; beyond that tails are zero to
    /// within that certified bound.
    pub fn custom(source: Arc<dyn CustomPmf>) -> Result<Self> {
        let mut cutoff = 0u64;
        while source.tail_moment_bound(cutoff) >= CUSTOM_TAIL_TOLERANCE {
            cutoff += 1;
            if cutoff > CUSTOM_MAX_SUPPORT {
                return Err(Error::InvalidLaw("custom tail bound decays too slowly to certify".into()));
            }
        }
        let head: Vec<f64> = (0..=cutoff).map(|k| source.pmf(k)).collect();
        if let Some((k, p)) = head.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidLaw(format!("p_{k} = {p} is not a probability")));
        }
        let (suffix, suffix_moment) = suffix_sums(&head);
        let total = suffix[0];
        if libm::fabs(total - 1.0) > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidLaw(format!("custom pmf sums to {total}, not 1")));
        }
        let mean = suffix_moment[0];
        Self::finish(Family::Custom(source), mean, None, head, suffix, suffix_moment)
    }

    fn named(family: Family, mean: f64, deficit: f64, criticality: Criticality) -> Self {
        OffspringLaw { family, mean, deficit, criticality, head: Vec::new(), suffix: Vec::new(), suffix_moment: Vec::new() }
    }

    fn finish(
        family: Family,
        mean: f64,
        deficit: Option<f64>,
        head: Vec<f64>,
        suffix: Vec<f64>,
        suffix_moment: Vec<f64>,
    ) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::DegenerateMean(mean));
        }
        let criticality = classify_mean(mean);
        let deficit = match criticality {
            Criticality::Critical => 0.0,
            _ => deficit.unwrap_or(1.0 - mean),
        };
        Ok(OffspringLaw { family, mean, deficit, criticality, head, suffix, suffix_moment })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `μ_p`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `1 - μ_p`; exactly zero for critical laws, negative for super-critical.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn criticality(&self) -> Criticality {
        self.criticality
    }

    /// Largest `k` with `p_k > 0`, or `None` for unbounded laws.
    pub fn support_max(&self) -> Option<u64> {
        match &self.family {
            Family::Explicit(p) => Some(p.len() as u64 - 1),
            Family::Custom(src) if !src.is_unbounded() => {
                self.head.iter().rposition(|p| *p > 0.0).map(|k| k as u64)
            }
            _ => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.support_max().is_none()
    }

    /// `p_k`.
    pub fn pmf(&self, k: u64) -> f64 {
        match &self.family {
            Family::Explicit(_) | Family::Custom(_) => self.head.get(k as usize).copied().unwrap_or(0.0),
            Family::Geometric { a } => (1.0 - a) * libm::pow(*a, k as f64),
            Family::Poisson { lambda } => {
                libm::exp(k as f64 * libm::log(*lambda) - lambda - ln_factorial(k))
            }
            Family::PowerLaw { c, alpha } => {
                if k == 0 {
                    1.0 - c * zeta(*alpha)
                } else {
                    c * libm::pow(k as f64, -alpha)
                }
            }
        }
    }

    pub fn p0(&self) -> f64 {
        self.pmf(0)
    }

    /// `F̄(n) = Σ_{m > n} p_m`, computed without subtracting from one.
    pub fn tail(&self, n: u64) -> f64 {
        match &self.family {
            Family::Explicit(_) | Family::Custom(_) => {
                self.suffix.get(n as usize + 1).copied().unwrap_or(0.0)
            }
            Family::Geometric { a } => libm::pow(*a, n as f64 + 1.0),
            Family::Poisson { lambda } => poisson_tail(*lambda, n),
            Family::PowerLaw { c, alpha } => c * hurwitz_zeta(*alpha, n + 1),
        }
    }

    /// `Σ_{m > n} m·p_m`.
    pub fn tail_moment(&self, n: u64) -> f64 {
        match &self.family {
            Family::Explicit(_) | Family::Custom(_) => {
                self.suffix_moment.get(n as usize + 1).copied().unwrap_or(0.0)
            }
            Family::Geometric { a } => {
                let from = n as f64 + 1.0;
                libm::pow(*a, from) * (from + a / (1.0 - a))
            }
            Family::Poisson { lambda } => {
                if n == 0 {
                    *lambda
                } else {
                    lambda * poisson_tail(*lambda, n - 1)
                }
            }
            Family::PowerLaw { c, alpha } => c * hurwitz_zeta(alpha - 1.0, n + 1),
        }
    }

    /// `E[(X - ℓ)_+ 1{X ≥ k}]` for `X ~ p`.
    pub fn truncated_excess(&self, ell: u64, k: u64) -> f64 {
        let from = (ell + 1).max(k);
        // Σ_{j ≥ from} (j - ℓ) p_j
        let moment = self.tail_moment(from - 1);
        let mass = self.tail(from - 1);
        (moment - ell as f64 * mass).max(0.0)
    }

    /// `p_0, …, p_n`.
    pub fn pmf_prefix(&self, n: u64) -> Vec<f64> {
        match &self.family {
            Family::Geometric { a } => {
                let mut out = Vec::with_capacity(n as usize + 1);
                for k in 0..=n {
                    out.push((1.0 - a) * libm::pow(*a, k as f64));
                }
                out
            }
            _ => (0..=n).map(|k| self.pmf(k)).collect(),
        }
    }

    pub fn ensure_not_supercritical(&self, what: &'static str) -> Result<()> {
        if self.criticality == Criticality::SuperCritical {
            Err(Error::SuperCritical(self.mean, what))
        } else {
            Ok(())
        }
    }

    pub fn ensure_subcritical(&self, what: &'static str) -> Result<()> {
        match self.criticality {
            Criticality::SubCritical => Ok(()),
            Criticality::Critical => Err(Error::Critical(what)),
            Criticality::SuperCritical => Err(Error::SuperCritical(self.mean, what)),
        }
    }

    pub fn ensure_unbounded(&self) -> Result<()> {
        match self.support_max() {
            Some(k) => Err(Error::BoundedLaw(k)),
            None => Ok(()),
        }
    }

    /// The size-biased law `p̃`.
    pub fn bias(&self) -> Result<BiasedLaw> {
        self.ensure_not_supercritical("the biased law would have a negative atom at infinity")?;
        Ok(BiasedLaw { law: self.clone() })
    }

    /// A short human-readable description.
    pub fn describe(&self) -> String {
        match &self.family {
            Family::Explicit(p) => format!("explicit{p:?}"),
            Family::Geometric { a } => format!("geometric(a={a})"),
            Family::Poisson { lambda } => format!("poisson(λ={lambda})"),
            Family::PowerLaw { c, alpha } => format!("power-law(c={c}, α={alpha})"),
            Family::Custom(src) => format!("custom({src:?})"),
        }
    }
}

fn poisson_tail(lambda: f64, n: u64) -> f64 {
    let ln_lambda = libm::log(lambda);
    let mut k = n + 1;
    let mut term = libm::exp(k as f64 * ln_lambda - lambda - ln_factorial(k));
    let mut acc = Compensated::new();
    loop {
        acc.add(term);
        k += 1;
        term *= lambda / k as f64;
        let past_mode = k as f64 > lambda;
        // past the mode the remainder is below term·r/(1-r) with r = λ/(k+1)
        if term == 0.0 || (past_mode && term < acc.value() * 1e-18) {
            break;
        }
    }
    acc.value()
}

/// `p̃`: atoms `k p_k` on the integers plus `1 - μ_p` at `+∞`.
#[derive(Debug, Clone)]
pub struct BiasedLaw {
    law: OffspringLaw,
}

/// A draw from a law on `ℕ ∪ {+∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Finite(u64),
    Infinite,
}

impl BiasedLaw {
    pub fn base(&self) -> &OffspringLaw {
        &self.law
    }

    pub fn atom(&self, k: u64) -> f64 {
        k as f64 * self.law.pmf(k)
    }

    pub fn atom_infinite(&self) -> f64 {
        self.law.deficit()
    }

    /// `P(X̃ > k)` including the atom at infinity.
    pub fn tail(&self, k: u64) -> f64 {
        self.law.deficit() + self.law.tail_moment(k)
    }

    pub fn sampler(&self) -> DegreeSampler {
        DegreeSampler::build(self.law.deficit(), |k| self.tail(k), Some(Extension::Biased(self.law.clone())))
    }
}

/// Sampler for a law on `ℕ ∪ {+∞}` by inversion of its tail function.
///
/// `tails[k] = P(X > k)`; a uniform `V ∈ (0, 1]` maps to the smallest `k`
/// with `tails[k] < V`, or to `+∞` when `V` does not exceed the mass at
/// infinity. Tail values are computed directly (never as `1 - CDF`), so rare
/// large outcomes keep their exact probabilities.
#[derive(Debug, Clone)]
pub struct DegreeSampler {
    tails: Vec<f64>,
    at_infinity: f64,
    extension: Option<Extension>,
}

#[derive(Debug, Clone)]
enum Extension {
    Law(OffspringLaw),
    Biased(OffspringLaw),
}

impl Extension {
    fn tail(&self, k: u64) -> f64 {
        match self {
            Extension::Law(law) => law.tail(k),
            Extension::Biased(law) => law.deficit() + law.tail_moment(k),
        }
    }
}

const TABLE_CAP: usize = 4096;
const TABLE_FLOOR: f64 = 1e-20;

impl DegreeSampler {
    fn build(at_infinity: f64, tail: impl Fn(u64) -> f64, extension: Option<Extension>) -> Self {
        let mut tails = Vec::new();
        let mut extension = extension;
        loop {
            let t = tail(tails.len() as u64);
            tails.push(t);
            if t <= at_infinity {
                extension = None;
                break;
            }
            if t - at_infinity < TABLE_FLOOR || tails.len() >= TABLE_CAP {
                break;
            }
        }
        DegreeSampler { tails, at_infinity, extension }
    }

    /// Sampler for the offspring law itself.
    pub fn for_law(law: &OffspringLaw) -> Self {
        Self::build(0.0, |k| law.tail(k), Some(Extension::Law(law.clone())))
    }

    /// Sampler for a finitely supported pmf given by its weights (normalised
    /// internally).
    pub fn from_weights(weights: &[f64]) -> Self {
        let mut tails = alloc::vec![0.0; weights.len()];
        let mut acc = Compensated::new();
        for k in (1..weights.len()).rev() {
            acc.add(weights[k]);
            tails[k - 1] = acc.value();
        }
        acc.add(weights[0]);
        let total = acc.value();
        for t in tails.iter_mut() {
            *t /= total;
        }
        DegreeSampler { tails, at_infinity: 0.0, extension: None }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        let v = crate::rng::fine_uniform(rng);
        self.invert(v)
    }

    /// The outcome for uniform level `v ∈ (0, 1]`.
    pub fn invert(&self, v: f64) -> Outcome {
        if v <= self.at_infinity {
            return Outcome::Infinite;
        }
        let k = self.tails.partition_point(|t| *t >= v);
        if k < self.tails.len() {
            return Outcome::Finite(k as u64);
        }
        match &self.extension {
            None => Outcome::Finite(self.tails.len() as u64 - 1),
            Some(ext) => {
                // gallop, then bisect on [lo, hi]
                let mut lo = self.tails.len() as u64 - 1; // tail(lo) >= v
                let mut step = 1u64;
                let mut hi = lo + step;
                while ext.tail(hi) >= v {
                    lo = hi;
                    step = step.saturating_mul(2);
                    hi = lo.saturating_add(step);
                    if hi == u64::MAX {
                        return Outcome::Infinite;
                    }
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if ext.tail(mid) >= v {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Outcome::Finite(hi)
            }
        }
    }
}
