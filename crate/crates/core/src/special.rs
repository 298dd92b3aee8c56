//! Special functions needed by the named offspring families.

use crate::sum::Compensated;

/// `B_2, B_4, …, B_20`.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Below this start index the head of the series is summed directly.
const EULER_MACLAURIN_START: u64 = 20;

/// Hurwitz zeta `ζ(s, a) = Σ_{k ≥ a} k^{-s}` for integer `a ≥ 1` and `s > 1`.
///
/// The head `a ≤ k < N` is summed directly and the rest comes from the
/// Euler-Maclaurin expansion at `N = max(a, 20)`; the relative error is at
/// the level of double rounding for the exponents used here.
pub fn hurwitz_zeta(s: f64, a: u64) -> f64 {
    assert!(s > 1.0, "hurwitz_zeta needs s > 1");
    assert!(a >= 1, "hurwitz_zeta needs a >= 1");
    let start = a.max(EULER_MACLAURIN_START);
    let n = start as f64;

    let mut acc = Compensated::new();
    // smallest terms first
    let mut rising = s; // (s)_{2j-1}
    let mut factorial = 2.0; // (2j)!
    let mut power = libm::pow(n, -s - 1.0); // N^{-s-2j+1}
    let mut terms = [0.0; BERNOULLI_EVEN.len()];
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        terms[j] = b / factorial * rising * power;
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (s + j2 - 1.0) * (s + j2);
        factorial *= (j2 + 1.0) * (j2 + 2.0);
        power /= n * n;
    }
    for t in terms.iter().rev() {
        acc.add(*t);
    }
    acc.add(libm::pow(n, -s) / 2.0);
    acc.add(libm::pow(n, 1.0 - s) / (s - 1.0));
    for k in (a..start).rev() {
        acc.add(libm::pow(k as f64, -s));
    }
    acc.value()
}

/// Riemann zeta `ζ(s)` for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1)
}

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        libm::lgamma(k as f64 + 1.0)
    }
}
