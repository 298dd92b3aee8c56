//! The law of the maximal out-degree.
//!
//! `H(n) = P(M(τ) ≤ n)` is the unique root in `[0, 1]` of
//! `f_n(y) = Σ_{m ≤ n} p_m y^m - y`. The solver works in the tail variable
//! `z = 1 - y`, where
//!
//! ```text
//! f_n(1 - z) = z·A_n - F̄(n) + Σ_{m ≤ n} p_m r_m(z),
//! A_n = 1 - μ + Σ_{m > n} m p_m,   r_m(z) = (1 - z)^m - 1 + m z ≥ 0,
//! ```
//!
//! so `H̄(n) = 1 - H(n)` keeps full relative precision even when it is far
//! below machine epsilon, and `q_n = H̄(n-1) - H̄(n)` never cancels.

use alloc::vec::Vec;

use crate::offspring::{Criticality, OffspringLaw};
use crate::sum::Compensated;
use crate::Result;

/// Bisection stops once the bracket is this narrow relative to its upper
/// end; Newton finishes.
pub const BISECTION_WIDTH: f64 = 1e-9;
/// Rows with `q_n` below this are flagged instead of reported.
pub const PRECISION_FLOOR: f64 = 1e-300;

/// One solved entry: `H(n)`, `H̄(n)` and the fixed-point residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub h: f64,
    pub hbar: f64,
    /// `|Σ_{m ≤ n} p_m H(n)^m - H(n)|`.
    pub residual: f64,
}

/// `r_m(z) = (1 - z)^m - 1 + m z`.
fn excess(m: u64, z: f64) -> f64 {
    if m < 2 || z == 0.0 {
        return 0.0;
    }
    let mz = m as f64 * z;
    if mz < 0.5 {
        // Σ_{j ≥ 2} C(m, j) (-z)^j; the ratio of consecutive terms is below mz/3
        let mut term = 0.5 * m as f64 * (m as f64 - 1.0) * z * z;
        let mut acc = Compensated::new();
        let mut j = 2u64;
        while term != 0.0 && j <= m {
            acc.add(term);
            term *= -z * (m - j) as f64 / (j + 1) as f64;
            j += 1;
            if libm::fabs(term) < 1e-18 * libm::fabs(acc.value()) {
                break;
            }
        }
        acc.value()
    } else {
        libm::expm1(m as f64 * libm::log1p(-z)) + mz
    }
}

/// `r_m'(z) = m (1 - (1 - z)^{m-1})`.
fn excess_slope(m: u64, z: f64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    -(m as f64) * libm::expm1((m - 1) as f64 * libm::log1p(-z))
}

struct TailEquation<'a> {
    p: &'a [f64],
    a: f64,
    fbar: f64,
}

impl TailEquation<'_> {
    fn value(&self, z: f64) -> f64 {
        let mut acc = Compensated::new();
        acc.add(z * self.a);
        acc.add(-self.fbar);
        for (m, pm) in self.p.iter().enumerate().skip(2) {
            if *pm != 0.0 {
                acc.add(pm * excess(m as u64, z));
            }
        }
        acc.value()
    }

    fn slope(&self, z: f64) -> f64 {
        let mut acc = Compensated::new();
        acc.add(self.a);
        for (m, pm) in self.p.iter().enumerate().skip(2) {
            if *pm != 0.0 {
                acc.add(pm * excess_slope(m as u64, z));
            }
        }
        acc.value()
    }
}

fn polynomial(p: &[f64], y: f64) -> (f64, f64) {
    // Horner for Σ p_m y^m and its derivative
    let mut value = 0.0;
    let mut slope = 0.0;
    for pm in p.iter().rev() {
        slope = slope * y + value;
        value = value * y + pm;
    }
    (value, slope)
}

fn residual(p: &[f64], y: f64) -> f64 {
    libm::fabs(polynomial(p, y).0 - y)
}

/// Solve for `H(n)`.
pub fn solve_h(law: &OffspringLaw, n: u64) -> Result<Solution> {
    law.ensure_not_supercritical("the fixed-point equation for H(n) may have several roots in [0, 1]")?;
    let mut n = n;
    // p_n = 0 leaves the equation unchanged from n - 1
    while n > 0 && law.pmf(n) == 0.0 {
        n -= 1;
    }
    let p = law.pmf_prefix(n);
    Ok(solve_with_prefix(law, &p, n))
}

fn solve_with_prefix(law: &OffspringLaw, p: &[f64], n: u64) -> Solution {
    let fbar = law.tail(n);
    if fbar == 0.0 {
        return Solution { h: 1.0, hbar: 0.0, residual: residual(p, 1.0) };
    }
    if n == 0 {
        return Solution { h: p[0], hbar: fbar, residual: 0.0 };
    }
    let eq = TailEquation { p, a: law.deficit() + law.tail_moment(n), fbar };
    // z A - F̄ ≤ g(z) ≤ z (A + Σ m p_m) - F̄
    let mu: f64 = p.iter().enumerate().map(|(m, pm)| m as f64 * pm).sum();
    let mut hi = (fbar / eq.a).min(1.0);
    let mut lo = (fbar / (eq.a + mu)).min(hi);
    if eq.value(lo) > 0.0 {
        lo = 0.0;
    }
    while hi - lo > BISECTION_WIDTH * hi {
        // geometric steps while the bracket spans orders of magnitude
        let mid = if lo > 0.0 && hi > 4.0 * lo { libm::sqrt(lo * hi) } else { 0.5 * (lo + hi) };
        if !(mid > lo && mid < hi) {
            break;
        }
        if eq.value(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // g is convex and increasing: Newton from the right decreases monotonically
    let mut z = hi;
    for _ in 0..200 {
        let g = eq.value(z);
        if g <= 0.0 {
            break;
        }
        let next = z - g / eq.slope(z);
        if !(next < z) || next < lo {
            break;
        }
        let done = z - next <= 4.0 * f64::EPSILON * z;
        z = next;
        if done {
            break;
        }
    }
    let (mut h, mut hbar) = (1.0 - z, z);
    if z > 0.5 {
        // far from 1, polish in the original variable
        let mut y = h;
        for _ in 0..50 {
            let (value, slope) = polynomial(p, y);
            let step = (value - y) / (slope - 1.0);
            let next = (y - step).clamp(0.0, 1.0);
            if libm::fabs(next - y) <= 2.0 * f64::EPSILON * y {
                y = next;
                break;
            }
            y = next;
        }
        h = y;
        hbar = 1.0 - y;
    }
    Solution { h, hbar, residual: residual(p, h) }
}

/// `H(n)`, `H̄(n)` and `q_n` for `n = 0, …, n_max`.
#[derive(Debug, Clone)]
pub struct MaxDegTable {
    law: OffspringLaw,
    h: Vec<f64>,
    hbar: Vec<f64>,
    residual: Vec<f64>,
}

impl MaxDegTable {
    pub fn new(law: &OffspringLaw, n_max: u64) -> Result<Self> {
        law.ensure_not_supercritical("the fixed-point equation for H(n) may have several roots in [0, 1]")?;
        let mut table = MaxDegTable { law: law.clone(), h: Vec::new(), hbar: Vec::new(), residual: Vec::new() };
        table.extend_to(n_max);
        Ok(table)
    }

    /// Solve further entries up to `n_max`.
    pub fn extend_to(&mut self, n_max: u64) {
        if (self.h.len() as u64) > n_max {
            return;
        }
        let p = self.law.pmf_prefix(n_max);
        for n in self.h.len() as u64..=n_max {
            let mut s = if n > 0 && p[n as usize] == 0.0 {
                let prev = n as usize - 1;
                Solution { h: self.h[prev], hbar: self.hbar[prev], residual: self.residual[prev] }
            } else {
                solve_with_prefix(&self.law, &p[..=n as usize], n)
            };
            // in the subnormal range rounding can break monotonicity
            if n > 0 && s.hbar > self.hbar[n as usize - 1] {
                s.h = self.h[n as usize - 1];
                s.hbar = self.hbar[n as usize - 1];
            }
            self.h.push(s.h);
            self.hbar.push(s.hbar);
            self.residual.push(s.residual);
        }
    }

    pub fn law(&self) -> &OffspringLaw {
        &self.law
    }

    /// Largest solved `n`.
    pub fn n_max(&self) -> u64 {
        self.h.len() as u64 - 1
    }

    fn idx(&self, n: u64) -> usize {
        assert!(n <= self.n_max(), "H({n}) requested beyond the solved range 0..={}", self.n_max());
        n as usize
    }

    /// `H(n)`.
    pub fn h(&self, n: u64) -> f64 {
        self.h[self.idx(n)]
    }

    /// `H̄(n) = 1 - H(n)`, stored independently.
    pub fn hbar(&self, n: u64) -> f64 {
        self.hbar[self.idx(n)]
    }

    pub fn residual(&self, n: u64) -> f64 {
        self.residual[self.idx(n)]
    }

    /// `q_n = P(M(τ) = n)`.
    pub fn q(&self, n: u64) -> f64 {
        if n == 0 {
            return self.h(0);
        }
        if self.law.pmf(n) == 0.0 {
            return 0.0;
        }
        (self.hbar(n - 1) - self.hbar(n)).max(0.0)
    }

    /// `P_k(M ≤ n) = H(n)^k` for a forest of `k` independent trees.
    pub fn forest_cdf(&self, k: u64, n: u64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        libm::exp(k as f64 * libm::log1p(-self.hbar(n)))
    }

    /// `P_m(M = n) = H^m(n) - H^m(n-1)`.
    ///
    /// Evaluated as `q_n Σ_{1 ≤ i ≤ m} H^{m-i}(n) H^{i-1}(n-1)`, with the
    /// geometric sum in closed form `H^m(n) (1 - r^m)`, `1 - r = q_n / H(n)`.
    pub fn forest_q(&self, m: u64, n: u64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        if n == 0 {
            return self.forest_cdf(m, 0);
        }
        let q = self.q(n);
        if q == 0.0 {
            return 0.0;
        }
        let hn = self.h(n);
        let x = q / hn;
        let value = self.forest_cdf(m, n) * -libm::expm1(m as f64 * libm::log1p(-x));
        value.min(m as f64 * q)
    }
}

/// `q_n` for a solved table.
pub fn q_mass(table: &MaxDegTable, n: u64) -> f64 {
    table.q(n)
}

/// One row of the tail-equivalence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub n: u64,
    pub p_n: f64,
    /// `None` when `q_n` is below [`PRECISION_FLOOR`].
    pub q_n: Option<f64>,
    /// `p_n / q_n`, which tends to `1 - μ` for sub-critical unbounded laws.
    pub ratio: Option<f64>,
    /// `H(n)^n`, which tends to 1.
    pub h_n_n: f64,
    /// `n F̄(n)`.
    pub n_fbar: f64,
    pub residual: f64,
}

impl TailRow {
    pub fn flagged(&self) -> bool {
        self.q_n.is_none()
    }
}

/// `p_n / q_n` and `H(n)^n` along `{n : p_n > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    /// The limit `1 - μ` of the ratio column.
    pub limit: f64,
    /// `false` for critical laws, where the limits above are not claimed.
    pub applicable: bool,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    /// `|p_n/q_n - (1 - μ)|` at the row for `n`.
    pub fn gap(&self, n: u64) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.n == n)?;
        row.ratio.map(|r| libm::fabs(r - self.limit))
    }
}

/// Rows `n = 0, …, n_max` with `p_n > 0`.
pub fn tail_report(law: &OffspringLaw, n_max: u64) -> Result<TailReport> {
    law.ensure_not_supercritical("the fixed-point equation for H(n) may have several roots in [0, 1]")?;
    law.ensure_unbounded()?;
    let table = MaxDegTable::new(law, n_max)?;
    Ok(tail_report_from(&table))
}

/// The same report from an existing table.
pub fn tail_report_from(table: &MaxDegTable) -> TailReport {
    let law = table.law();
    let rows = (0..=table.n_max())
        .filter_map(|n| {
            let p_n = law.pmf(n);
            if p_n <= 0.0 {
                return None;
            }
            let q = table.q(n);
            let q_n = (q >= PRECISION_FLOOR).then_some(q);
            Some(TailRow {
                n,
                p_n,
                q_n,
                ratio: q_n.map(|q| p_n / q),
                h_n_n: table.forest_cdf(n, n),
                n_fbar: n as f64 * law.tail(n),
                residual: table.residual(n),
            })
        })
        .collect();
    TailReport {
        limit: law.deficit(),
        applicable: law.criticality() == Criticality::SubCritical && law.is_unbounded(),
        rows,
    }
}

/// Reject laws for which conditioning on `{M > n}` or `{M = n}` with large
/// `n` is impossible.
pub fn ensure_conditionable(law: &OffspringLaw) -> Result<()> {
    law.ensure_unbounded()
}

impl From<&MaxDegTable> for TailReport {
    fn from(table: &MaxDegTable) -> Self {
        tail_report_from(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use alloc::vec;

    fn geo() -> OffspringLaw {
        OffspringLaw::geometric(1.0 / 3.0).unwrap()
    }

    fn test_laws() -> Vec<OffspringLaw> {
        vec![
            geo(),
            OffspringLaw::poisson(1.0).unwrap(),
            OffspringLaw::power_law(0.5, 4.0).unwrap(),
            OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap(),
            OffspringLaw::explicit(vec![0.5, 0.3, 0.0, 0.1, 0.1]).unwrap(),
            OffspringLaw::poisson(0.6).unwrap(),
        ]
    }

    #[test]
    fn excess_series_and_closed_form_agree() {
        for m in [2u64, 3, 10, 100, 1000] {
            for z in [1e-12, 1e-6, 1e-3, 0.01, 0.2, 0.6, 0.99] {
                let closed = libm::expm1(m as f64 * libm::log1p(-z)) + m as f64 * z;
                let got = excess(m, z);
                assert!(got >= 0.0);
                if (m as f64) * z > 1.0 {
                    assert!(libm::fabs(got - closed) <= 1e-14 * closed.max(1.0), "m={m} z={z}");
                }
            }
        }
        assert!((excess(2, 1e-5) - 1e-10).abs() < 1e-24);
    }

    #[test]
    fn solve_examples() {
        let g = geo();
        assert_eq!(solve_h(&g, 0).unwrap().h, g.p0());
        let s = solve_h(&g, 1).unwrap();
        assert!((s.h - 6.0 / 7.0).abs() < 1e-15);
        assert!((s.hbar - 1.0 / 7.0).abs() < 1e-16);
        let binary = OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(solve_h(&binary, 2).unwrap().h, 1.0);
        assert_eq!(solve_h(&binary, 1).unwrap().h, 0.5);
        let sup = OffspringLaw::explicit(vec![0.2, 0.0, 0.8]).unwrap();
        assert!(matches!(solve_h(&sup, 1), Err(Error::SuperCritical(..))));
    }

    #[test]
    fn residuals_and_monotonicity() {
        for law in test_laws() {
            let t = MaxDegTable::new(&law, 500).unwrap();
            for n in 0..=500 {
                assert!(t.residual(n) < 1e-12, "{} n={n} residual {}", law.describe(), t.residual(n));
                assert!(libm::fabs(t.h(n) + t.hbar(n) - 1.0) < 1e-15);
                assert!(t.q(n) >= 0.0);
                if law.pmf(n) == 0.0 || law.pmf(n) > PRECISION_FLOOR {
                    assert_eq!(t.q(n) > 0.0, law.pmf(n) > 0.0, "{} n={n}", law.describe());
                }
                if n > 0 {
                    assert!(t.h(n) >= t.h(n - 1));
                    assert!(t.hbar(n) <= t.hbar(n - 1));
                }
                if law.criticality() == Criticality::SubCritical {
                    assert!(t.q(n) * law.deficit() <= law.pmf(n) + 1e-12);
                }
            }
            if law.is_unbounded() {
                assert!(t.hbar(500) < t.hbar(10));
            }
        }
    }

    #[test]
    fn tail_variable_matches_independent_y_solve() {
        // plain bisection on f_n in y, far from 1 where it is accurate
        let law = OffspringLaw::poisson(1.0).unwrap();
        for n in 1..6u64 {
            let p = law.pmf_prefix(n);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if polynomial(&p, mid).0 - mid > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = solve_h(&law, n).unwrap();
            assert!((s.h - lo).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn q_examples() {
        let binary = OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        let t = MaxDegTable::new(&binary, 3).unwrap();
        assert_eq!(t.q(2), 0.5);
        assert_eq!(t.q(1), 0.0);
        assert_eq!(t.q(3), 0.0);
        let t = MaxDegTable::new(&geo(), 3).unwrap();
        assert!((t.q(1) - 4.0 / 21.0).abs() < 1e-15);
        assert!((t.q(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((q_mass(&t, 1) - 4.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn null_masses_are_exact() {
        let law = OffspringLaw::explicit(vec![0.5, 0.25, 0.0, 0.25]).unwrap();
        let t = MaxDegTable::new(&law, 5).unwrap();
        assert_eq!(t.q(2), 0.0);
        assert!(t.q(3) > 0.0);
        assert_eq!(t.h(3), 1.0);
        assert_eq!(t.q(4), 0.0);
    }

    #[test]
    fn forest_examples() {
        let t = MaxDegTable::new(&geo(), 3).unwrap();
        assert_eq!(t.forest_cdf(0, 1), 1.0);
        assert!((t.forest_cdf(1, 1) - 6.0 / 7.0).abs() < 1e-15);
        assert!((t.forest_cdf(2, 1) - 36.0 / 49.0).abs() < 1e-15);
        assert_eq!(t.forest_q(0, 1), 0.0);
        assert!((t.forest_q(1, 2) - t.q(2)).abs() < 1e-16);
        assert!((t.forest_q(2, 1) - 128.0 / 441.0).abs() < 1e-15);
    }

    #[test]
    fn forest_q_matches_factored_sum_and_bound() {
        for law in test_laws() {
            let t = MaxDegTable::new(&law, 60).unwrap();
            for n in 1..=60u64 {
                let q = t.q(n);
                for m in [1u64, 2, 3, 7, 40] {
                    let fq = t.forest_q(m, n);
                    assert!(fq <= m as f64 * q);
                    let direct: f64 = (1..=m)
                        .map(|i| libm::pow(t.h(n), (m - i) as f64) * libm::pow(t.h(n - 1), (i - 1) as f64))
                        .sum::<f64>()
                        * q;
                    assert!(libm::fabs(fq - direct) <= 1e-12 * direct.max(1e-300), "{} n={n} m={m}", law.describe());
                }
            }
        }
    }

    #[test]
    fn q_is_a_distribution() {
        let law = geo();
        let t = MaxDegTable::new(&law, 200).unwrap();
        let total: f64 = (0..=200).map(|n| t.q(n)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extend_matches_fresh_table() {
        let law = OffspringLaw::power_law(0.5, 4.0).unwrap();
        let mut t = MaxDegTable::new(&law, 10).unwrap();
        t.extend_to(40);
        let fresh = MaxDegTable::new(&law, 40).unwrap();
        for n in 0..=40 {
            assert_eq!(t.hbar(n), fresh.hbar(n));
        }
    }

    #[test]
    fn tail_report_examples() {
        let r = tail_report(&geo(), 20).unwrap();
        assert!(r.applicable);
        let row1 = &r.rows[1];
        assert_eq!(row1.n, 1);
        assert!((row1.ratio.unwrap() - 7.0 / 6.0).abs() < 1e-13);
        assert!(r.gap(20).unwrap() < 1e-4);
        assert!(r.rows.last().unwrap().h_n_n > r.rows[1].h_n_n);
        let binary = OffspringLaw::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        assert!(matches!(tail_report(&binary, 5), Err(Error::BoundedLaw(2))));
        let crit = tail_report(&OffspringLaw::poisson(1.0).unwrap(), 10).unwrap();
        assert!(!crit.applicable);
    }

    #[test]
    fn tail_report_flags_precision_floor() {
        let r = tail_report(&geo(), 700).unwrap();
        let last = r.rows.last().unwrap();
        assert!(last.flagged());
        assert!(r.rows.iter().any(|row| !row.flagged() && row.n > 600));
    }
}
