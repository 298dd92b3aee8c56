//! Exact probabilities.
//!
//! Small trees are enumerated exhaustively and weighted by the GW law; graft
//! events have closed-form probabilities both for the conditioned trees and
//! for the limit tree. These values are the ground truth for the samplers and
//! the convergence harness.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::maxdeg::MaxDegTable;
use crate::offspring::{Criticality, OffspringLaw};
use crate::sum::Compensated;
use crate::tree::{FiniteTree, GraftEvent, GraftKind, Label};
use crate::{Error, Result};

/// All ordered trees with at most `max_vertices` vertices and out-degrees at
/// most `max_degree`, by size and then lexicographically by preorder degree
/// sequence.
pub fn enumerate_trees(max_vertices: usize, max_degree: u32) -> TreeEnumeration {
    TreeEnumeration { max_vertices, max_degree, word: Vec::new(), size: 0 }
}

/// Iterator returned by [`enumerate_trees`].
#[derive(Debug, Clone)]
pub struct TreeEnumeration {
    max_vertices: usize,
    max_degree: u32,
    word: Vec<u32>,
    size: usize,
}

impl TreeEnumeration {
    /// Open slots before position `i` of a word of length `size`.
    fn feasible(&self, pending_after: u64, remaining_after: usize) -> bool {
        if remaining_after == 0 {
            pending_after == 0
        } else {
            pending_after >= 1 && pending_after <= remaining_after as u64
        }
    }

    /// Lexicographically smallest completion of `word[..from]`.
    fn complete(&mut self, from: usize, mut pending: u64) -> bool {
        self.word.truncate(from);
        for i in from..self.size {
            let remaining_after = self.size - i - 1;
            let d = (0..=self.max_degree).find(|d| self.feasible(pending - 1 + *d as u64, remaining_after));
            match d {
                Some(d) => {
                    self.word.push(d);
                    pending = pending - 1 + d as u64;
                }
                None => return false,
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        let mut pendings = Vec::with_capacity(self.size);
        let mut pending = 1u64;
        for d in &self.word {
            pendings.push(pending);
            pending = pending - 1 + *d as u64;
        }
        for i in (0..self.size).rev() {
            let remaining_after = self.size - i - 1;
            let p = pendings[i];
            for d in self.word[i] + 1..=self.max_degree {
                if self.feasible(p - 1 + d as u64, remaining_after) {
                    self.word[i] = d;
                    if self.complete(i + 1, p - 1 + d as u64) {
                        return true;
                    }
                }
                if p - 1 + d as u64 > remaining_after as u64 {
                    break;
                }
            }
        }
        false
    }

    fn first_of_size(&mut self, size: usize) -> bool {
        self.size = size;
        self.complete(0, 1)
    }
}

impl Iterator for TreeEnumeration {
    type Item = FiniteTree;

    fn next(&mut self) -> Option<FiniteTree> {
        let found = if self.size == 0 {
            self.max_vertices >= 1 && self.first_of_size(1)
        } else {
            self.advance()
        };
        let found = found || {
            let mut ok = false;
            while self.size < self.max_vertices {
                let next = self.size + 1;
                if self.first_of_size(next) {
                    ok = true;
                    break;
                }
            }
            ok
        };
        if !found {
            self.size = self.max_vertices;
            return None;
        }
        Some(FiniteTree::from_degrees_unchecked(self.word.clone()))
    }
}

/// `P(|τ| > V) ≤ E|τ| / V = 1 / ((1 - μ) V)`; `None` when the bound is not
/// available (critical laws).
pub fn markov_gap(law: &OffspringLaw, max_vertices: usize) -> Option<f64> {
    match law.criticality() {
        Criticality::SubCritical => Some(1.0 / (law.deficit() * max_vertices as f64)),
        _ => None,
    }
}

/// An enumerated probability: a lower bound and the unenumerated mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventProb {
    pub lower: f64,
    /// Upper bound on the missing mass; `None` when unbounded.
    pub gap: Option<f64>,
}

/// `Σ P(τ = t)` over enumerated `t` satisfying `predicate`.
///
/// Only trees with out-degrees at most `max_degree` are visited, so the
/// predicate must be false on any tree with a larger out-degree.
pub fn exact_event_prob<F>(law: &OffspringLaw, predicate: F, max_vertices: usize, max_degree: u32) -> Result<EventProb>
where
    F: Fn(&FiniteTree) -> bool,
{
    law.ensure_not_supercritical("GW trees are infinite with positive probability")?;
    let mut acc = Compensated::new();
    for t in enumerate_trees(max_vertices, max_degree) {
        if predicate(&t) {
            acc.add(t.weight(law));
        }
    }
    Ok(EventProb { lower: acc.value(), gap: markov_gap(law, max_vertices) })
}

/// `t ↦ P(τ = t)` on every tree with at most `max_vertices` vertices and
/// out-degrees at most `max_degree`.
pub fn exact_law(law: &OffspringLaw, max_vertices: usize, max_degree: u32) -> BTreeMap<FiniteTree, f64> {
    enumerate_trees(max_vertices, max_degree).map(|t| {
        let w = t.weight(law);
        (t, w)
    }).collect()
}

/// `t ↦ P(τ = t | M(τ) = n)` on trees with at most `max_vertices` vertices.
pub fn exact_conditional_law(table: &MaxDegTable, n: u64, max_vertices: usize) -> BTreeMap<FiniteTree, f64> {
    let q = table.q(n);
    enumerate_trees(max_vertices, n as u32)
        .filter(|t| t.max_out_degree() == n)
        .map(|t| {
            let w = t.weight(table.law()) / q;
            (t, w)
        })
        .collect()
}

/// `P(τ*(p) ∈ T(t, x)) = P(τ = t) / p_0` for a critical law.
pub fn limit_graft_prob(law: &OffspringLaw, t: &FiniteTree, x: &Label) -> Result<f64> {
    if law.criticality() != Criticality::Critical {
        return Err(match law.criticality() {
            Criticality::SuperCritical => Error::SuperCritical(law.mean(), "the leaf-graft limit needs a critical law"),
            _ => Error::SubCritical("the leaf-graft limit characterises Kesten's tree, which needs a critical law"),
        });
    }
    GraftEvent::leaf(t.clone(), x.clone())?;
    Ok(t.weight(law) / law.p0())
}

/// `D(t, x) = P(τ = S^x(t)) / p_0 · P_{k_x(t)}(τ = F_x(t))`.
pub fn graft_weight(law: &OffspringLaw, t: &FiniteTree, x: &Label) -> Result<f64> {
    let d = t.decompose(x)?;
    let mut value = d.below.weight(law) / law.p0();
    for f in &d.forest {
        value *= f.weight(law);
    }
    Ok(value)
}

/// `P(τ*(p) ∈ T_+(t, x, k)) = D(t, x) (1 - μ + E[(X - k_x(t))_+ 1{X ≥ k}])` for a
/// sub-critical law.
pub fn limit_graft_plus_prob(law: &OffspringLaw, t: &FiniteTree, x: &Label, k: u64) -> Result<f64> {
    law.ensure_subcritical("the right-graft limit characterises the condensation tree, which needs a sub-critical law")?;
    let d = graft_weight(law, t, x)?;
    let v = t.index_of(x).ok_or_else(|| Error::NoSuchVertex(x.to_string()))?;
    let ell = t.degree(v) as u64;
    Ok(d * (law.deficit() + law.truncated_excess(ell, k)))
}

/// A conditioned graft probability with its joint counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioned {
    /// `P(τ ∈ T | M(τ) = n)`.
    pub conditional: f64,
    /// `P(τ ∈ T, M(τ) = n)`.
    pub joint: f64,
}

fn check_identity(table: &MaxDegTable, t: &FiniteTree, n: u64) -> Result<()> {
    let m = t.max_out_degree();
    if n <= m {
        return Err(Error::IdentityNotApplicable { n, max_degree: m });
    }
    if table.law().pmf(n) == 0.0 {
        return Err(Error::NullEvent(n));
    }
    Ok(())
}

/// `P(τ ∈ T(t, x) | M(τ) = n) = P(τ = t) / p_0` for `n > M(t)`.
///
/// The identity holds for every law with `p_0 > 0`; only for critical laws
/// is it also the value for Kesten's tree.
pub fn exact_conditioned_graft(table: &MaxDegTable, t: &FiniteTree, x: &Label, n: u64) -> Result<Conditioned> {
    GraftEvent::leaf(t.clone(), x.clone())?;
    check_identity(table, t, n)?;
    let conditional = t.weight(table.law()) / table.law().p0();
    Ok(Conditioned { conditional, joint: conditional * table.q(n) })
}

/// `P(τ ∈ T_+(t, x, k) | M(τ) = n)` for a sub-critical law and `n > M(t)`:
///
/// ```text
/// P(τ ∈ T_+, M = n) = D(t, x) (p_n P_{n-ℓ}(M ≤ n) 1{n ≥ k}
///                              + Σ_{j = max(ℓ+1, k)}^{n-1} p_j P_{j-ℓ}(M = n)).
/// ```
pub fn exact_conditioned_graft_plus(
    table: &MaxDegTable,
    t: &FiniteTree,
    x: &Label,
    k: u64,
    n: u64,
) -> Result<Conditioned> {
    let law = table.law();
    law.ensure_subcritical("the right-graft identity is used for sub-critical laws")?;
    GraftEvent::right_plus(t.clone(), x.clone(), k)?;
    check_identity(table, t, n)?;
    let v = t.index_of(x).ok_or_else(|| Error::NoSuchVertex(x.to_string()))?;
    let ell = t.degree(v) as u64;
    let d = graft_weight(law, t, x)?;
    let mut acc = Compensated::new();
    if n >= k {
        acc.add(law.pmf(n) * table.forest_cdf(n - ell, n));
    }
    for j in (ell + 1).max(k)..n {
        acc.add(law.pmf(j) * table.forest_q(j - ell, n));
    }
    let joint = d * acc.value();
    Ok(Conditioned { conditional: joint / table.q(n), joint })
}

/// `P(τ ∈ e | M(τ) = n)` by enumeration: a lower bound over trees with at
/// most `max_vertices` vertices, with the missing mass bounded by
/// `P(|τ| > V) / q_n`. Valid for any `n`.
pub fn conditioned_event_by_enumeration(
    table: &MaxDegTable,
    event: &GraftEvent,
    n: u64,
    max_vertices: usize,
) -> Result<EventProb> {
    let law = table.law();
    if law.pmf(n) == 0.0 {
        return Err(Error::NullEvent(n));
    }
    let q = table.q(n);
    let p = exact_event_prob(law, |s| s.max_out_degree() == n && event.contains(s), max_vertices, n as u32)?;
    Ok(EventProb { lower: p.lower / q, gap: p.gap.map(|g| g / q) })
}

/// `P(τ ∈ e)` for the unconditioned tree by enumeration.
pub fn event_by_enumeration(law: &OffspringLaw, event: &GraftEvent, max_vertices: usize) -> Result<EventProb> {
    exact_event_prob(law, |s| event.contains(s), max_vertices, u32::MAX)
}

/// Total-variation distance between the empirical law of `samples` and
/// `exact`, both restricted to trees with at most `max_vertices` vertices and
/// everything else lumped into one atom.
///
/// An empty sample has no empirical law; its distance is defined as the
/// total mass of `exact` outside the lump.
pub fn empirical_tv(samples: &[FiniteTree], exact: &BTreeMap<FiniteTree, f64>, max_vertices: usize) -> f64 {
    let covered: f64 = crate::sum::sum(exact.iter().filter(|(t, _)| t.len() <= max_vertices).map(|(_, p)| *p));
    if samples.is_empty() {
        return covered;
    }
    let mut counts: BTreeMap<&FiniteTree, u64> = BTreeMap::new();
    let mut lumped = 0u64;
    for s in samples {
        if s.len() <= max_vertices {
            *counts.entry(s).or_insert(0) += 1;
        } else {
            lumped += 1;
        }
    }
    let total = samples.len() as f64;
    let mut acc = Compensated::new();
    for (t, p) in exact.iter().filter(|(t, _)| t.len() <= max_vertices) {
        let emp = counts.remove(t).unwrap_or(0) as f64 / total;
        acc.add(libm::fabs(emp - p));
    }
    for c in counts.values() {
        acc.add(*c as f64 / total);
    }
    acc.add(libm::fabs(lumped as f64 / total - (1.0 - covered)));
    0.5 * acc.value()
}

/// Which graft set an event describes, as text.
pub fn describe_kind(kind: GraftKind) -> &'static str {
    match kind {
        GraftKind::Leaf => "leaf",
        GraftKind::RightPlus { .. } => "right-plus",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::label;
    use alloc::vec;

    fn geo() -> OffspringLaw {
        OffspringLaw::geometric(1.0 / 3.0).unwrap()
    }

    fn catalan(n: u64) -> u64 {
        let mut c = 1u64;
        for i in 0..n {
            c = c * 2 * (2 * i + 1) / (i + 2);
        }
        c
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(1, u32::MAX).collect::<Vec<_>>(), vec![FiniteTree::leaf()]);
        let mut by_size = [0u64; 9];
        for t in enumerate_trees(8, u32::MAX) {
            by_size[t.len()] += 1;
        }
        for k in 1..=8 {
            assert_eq!(by_size[k], catalan(k as u64 - 1), "size {k}");
        }
        let paths: Vec<FiniteTree> = enumerate_trees(3, 1).collect();
        assert_eq!(paths, vec![FiniteTree::path(1), FiniteTree::path(2), FiniteTree::path(3)]);
        assert_eq!(enumerate_trees(5, 0).count(), 1);
        assert_eq!(enumerate_trees(0, 3).count(), 0);
    }

    #[test]
    fn enumeration_is_canonical_and_duplicate_free() {
        let all: Vec<FiniteTree> = enumerate_trees(9, u32::MAX).collect();
        for w in all.windows(2) {
            assert!(w[0] < w[1]);
        }
        let capped: Vec<FiniteTree> = enumerate_trees(9, 2).collect();
        let filtered: Vec<FiniteTree> = all.iter().filter(|t| t.max_out_degree() <= 2).cloned().collect();
        assert_eq!(capped, filtered);
        // Motzkin numbers count unary-binary trees
        assert_eq!(capped.iter().filter(|t| t.len() == 9).count(), 323);
    }

    #[test]
    fn enumeration_matches_brute_force_sequences() {
        // every word over {0..4} of length ≤ 6 that is a valid tree
        let mut brute = Vec::new();
        for len in 1..=6u32 {
            for code in 0..5u32.pow(len) {
                let word: Vec<u32> = (0..len).map(|i| code / 5u32.pow(i) % 5).collect();
                if let Ok(t) = FiniteTree::from_degrees(word) {
                    brute.push(t);
                }
            }
        }
        brute.sort();
        brute.dedup();
        let listed: Vec<FiniteTree> = enumerate_trees(6, 4).collect();
        assert_eq!(listed, brute);
    }

    #[test]
    fn event_prob_examples() {
        let law = geo();
        let all = exact_event_prob(&law, |_| true, 12, u32::MAX).unwrap();
        assert!(all.lower > 0.98);
        assert!(1.0 - all.lower <= all.gap.unwrap());
        let leaf = exact_event_prob(&law, |t| t.max_out_degree() == 0, 5, u32::MAX).unwrap();
        assert!((leaf.lower - law.p0()).abs() < 1e-16);
        let paths = exact_event_prob(&law, |t| t.max_out_degree() <= 1, 20, 1).unwrap();
        assert!((paths.lower - 6.0 / 7.0).abs() < 2e-4);
        let crit = exact_event_prob(&OffspringLaw::poisson(1.0).unwrap(), |_| true, 4, u32::MAX).unwrap();
        assert_eq!(crit.gap, None);
    }

    #[test]
    fn enumerated_h_is_a_lower_bound_within_the_markov_gap() {
        let law = geo();
        let table = MaxDegTable::new(&law, 4).unwrap();
        for n in 0..=4u64 {
            let e = exact_event_prob(&law, |t| t.max_out_degree() <= n, 10, n as u32).unwrap();
            assert!(e.lower <= table.h(n) + 1e-15);
            assert!(table.h(n) - e.lower <= e.gap.unwrap());
        }
    }

    #[test]
    fn limit_graft_examples() {
        let poisson = OffspringLaw::poisson(1.0).unwrap();
        assert_eq!(limit_graft_prob(&poisson, &FiniteTree::leaf(), &Label::root()).unwrap(), 1.0);
        let v = limit_graft_prob(&poisson, &FiniteTree::path(2), &label(&[1])).unwrap();
        assert!((v - libm::exp(-1.0)).abs() < 1e-15);
        let binary = OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        let v = limit_graft_prob(&binary, &FiniteTree::star(2), &label(&[1])).unwrap();
        assert!((v - 0.25).abs() < 1e-16);
        assert!(matches!(limit_graft_prob(&geo(), &FiniteTree::leaf(), &Label::root()), Err(Error::SubCritical(_))));
    }

    #[test]
    fn limit_graft_plus_examples() {
        let law = geo();
        let root = Label::root();
        assert!((limit_graft_plus_prob(&law, &FiniteTree::leaf(), &root, 0).unwrap() - 1.0).abs() < 1e-15);
        let v = limit_graft_plus_prob(&law, &FiniteTree::leaf(), &root, 2).unwrap();
        assert!((v - 7.0 / 9.0).abs() < 1e-15);
        // 1 - p̃_1 computed from the biased law
        assert!((v - (1.0 - law.bias().unwrap().atom(1))).abs() < 1e-15);
        let v = limit_graft_plus_prob(&law, &FiniteTree::path(2), &label(&[1]), 0).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        assert!(matches!(
            limit_graft_plus_prob(&OffspringLaw::poisson(1.0).unwrap(), &FiniteTree::leaf(), &root, 0),
            Err(Error::Critical(_))
        ));
    }

    #[test]
    fn graft_weight_is_the_product_over_other_vertices() {
        let law = geo();
        for t in enumerate_trees(7, u32::MAX) {
            for v in 0..t.len() {
                let x = t.label_of(v);
                let product: f64 = (0..t.len()).filter(|u| *u != v).map(|u| law.pmf(t.degree(u) as u64)).product();
                let d = graft_weight(&law, &t, &x).unwrap();
                assert!((d - product).abs() <= 1e-14 * product);
            }
        }
    }

    #[test]
    fn leaf_and_right_conventions_agree_at_leaves() {
        let law = geo();
        let all: Vec<FiniteTree> = enumerate_trees(6, u32::MAX).collect();
        for t in enumerate_trees(4, u32::MAX) {
            for x in t.leaves() {
                let d = graft_weight(&law, &t, &x).unwrap();
                let v = limit_graft_plus_prob(&law, &t, &x, 0).unwrap();
                assert!((v - d).abs() < 1e-15);
                let leaf = GraftEvent::leaf(t.clone(), x.clone()).unwrap();
                let right = GraftEvent::right_plus(t.clone(), x.clone(), 0).unwrap();
                assert!(all.iter().all(|s| leaf.contains(s) == right.contains(s)));
            }
        }
    }

    #[test]
    fn conditioned_graft_examples() {
        let poisson = OffspringLaw::poisson(1.0).unwrap();
        let table = MaxDegTable::new(&poisson, 20).unwrap();
        let c = exact_conditioned_graft(&table, &FiniteTree::leaf(), &Label::root(), 3).unwrap();
        assert_eq!(c.conditional, 1.0);
        let values: Vec<f64> = (2..=20)
            .map(|n| exact_conditioned_graft(&table, &FiniteTree::path(2), &label(&[1]), n).unwrap().conditional)
            .collect();
        assert!(values.iter().all(|v| (v - libm::exp(-1.0)).abs() < 1e-15));
        assert!(matches!(
            exact_conditioned_graft(&table, &FiniteTree::star(3), &label(&[1]), 3),
            Err(Error::IdentityNotApplicable { n: 3, max_degree: 3 })
        ));
    }

    #[test]
    fn conditioned_graft_matches_enumeration() {
        let law = geo();
        let table = MaxDegTable::new(&law, 4).unwrap();
        let t = FiniteTree::path(2);
        let x = label(&[1]);
        let exact = exact_conditioned_graft(&table, &t, &x, 3).unwrap().conditional;
        assert!((exact - 2.0 / 9.0).abs() < 1e-15);
        let e = GraftEvent::leaf(t, x).unwrap();
        let enumerated = conditioned_event_by_enumeration(&table, &e, 3, 14).unwrap();
        assert!(enumerated.lower <= exact + 1e-12);
        assert!(exact - enumerated.lower <= enumerated.gap.unwrap());
    }

    #[test]
    fn graft_plus_joint_matches_enumeration() {
        // compare the joint probability with a direct sum over small trees
        let law = geo();
        let n = 3;
        let table = MaxDegTable::new(&law, n).unwrap();
        let probes = [
            (FiniteTree::leaf(), Label::root(), 0u64),
            (FiniteTree::leaf(), Label::root(), 2),
            (FiniteTree::path(2), label(&[1]), 0),
            (FiniteTree::path(2), Label::root(), 3),
            (FiniteTree::star(2), label(&[2]), 1),
        ];
        let v = 14;
        let gap = markov_gap(&law, v).unwrap();
        for (t, x, k) in probes {
            let e = GraftEvent::right_plus(t.clone(), x.clone(), k).unwrap();
            let formula = exact_conditioned_graft_plus(&table, &t, &x, k, n).unwrap().joint;
            let enumerated = exact_event_prob(&law, |s| s.max_out_degree() == n && e.contains(s), v, n as u32).unwrap();
            assert!(enumerated.lower <= formula + 1e-15, "{e}");
            assert!(formula - enumerated.lower <= gap, "{e}");
        }
    }

    #[test]
    fn graft_plus_examples() {
        let law = geo();
        let table = MaxDegTable::new(&law, 60).unwrap();
        let root = Label::root();
        for n in 1..=60 {
            let c = exact_conditioned_graft_plus(&table, &FiniteTree::leaf(), &root, 0, n).unwrap();
            assert!((c.conditional - 1.0).abs() < 1e-12, "n={n} {}", c.conditional);
        }
        let c = exact_conditioned_graft_plus(&table, &FiniteTree::leaf(), &root, 2, 30).unwrap();
        assert!((c.conditional - 7.0 / 9.0).abs() < 1e-3);
        let c = exact_conditioned_graft_plus(&table, &FiniteTree::path(2), &label(&[1]), 0, 30).unwrap();
        assert!((c.conditional - 2.0 / 9.0).abs() < 1e-3);
    }

    #[test]
    fn graft_plus_is_monotone_in_k() {
        let law = geo();
        let table = MaxDegTable::new(&law, 12).unwrap();
        for t in enumerate_trees(4, u32::MAX) {
            for v in 0..t.len() {
                let x = t.label_of(v);
                for n in [4u64, 8, 12] {
                    let mut prev = f64::INFINITY;
                    for k in 0..=n + 2 {
                        let c = exact_conditioned_graft_plus(&table, &t, &x, k, n).unwrap().conditional;
                        assert!(c <= prev * (1.0 + 1e-12));
                        prev = c;
                    }
                }
            }
        }
    }

    #[test]
    fn tv_examples() {
        let law = geo();
        let exact = exact_law(&law, 5, u32::MAX);
        let covered: f64 = exact.values().sum();
        assert!((empirical_tv(&[], &exact, 5) - covered).abs() < 1e-15);
        let point: BTreeMap<FiniteTree, f64> = [(FiniteTree::path(2), 1.0)].into_iter().collect();
        assert_eq!(empirical_tv(&vec![FiniteTree::path(2); 10], &point, 5), 0.0);
        let other = vec![FiniteTree::star(2); 10];
        assert!((empirical_tv(&other, &point, 5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tv_of_resampled_exact_law_is_small() {
        use rand::Rng;
        let law = geo();
        let exact = exact_law(&law, 6, u32::MAX);
        let entries: Vec<(&FiniteTree, f64)> = exact.iter().map(|(t, p)| (t, *p)).collect();
        let mut rng = crate::rng::stream(99, 0);
        let big = FiniteTree::path(20);
        let samples: Vec<FiniteTree> = (0..100_000)
            .map(|_| {
                let mut u: f64 = rng.gen();
                for (t, p) in &entries {
                    if u < *p {
                        return (*t).clone();
                    }
                    u -= p;
                }
                big.clone()
            })
            .collect();
        assert!(empirical_tv(&samples, &exact, 6) < 0.01);
    }
}
