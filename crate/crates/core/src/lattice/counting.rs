//! Exact ℓ¹-sphere and ball cardinalities and their geometric upper bounds.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `|{x in Z^d : |x|_1 = l}|`: the coefficient of `t^l` in `((1+t)/(1-t))^d`,
/// i.e. `sum_k 2^k C(d,k) C(l-1,k-1)` (choose the support, the signs, and a
/// composition of `l` into `k` positive parts).
pub fn sphere_count_l1(d: usize, l: u64) -> BigUint {
    if l == 0 {
        return BigUint::one();
    }
    let d = d as u64;
    let mut total = BigUint::zero();
    for k in 1..=d.min(l) {
        total += (BigUint::one() << k as usize) * binomial(d, k) * binomial(l - 1, k - 1);
    }
    total
}

pub fn ball_count_l1(d: usize, l: u64) -> BigUint {
    (0..=l).map(|k| sphere_count_l1(d, k)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Sphere,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeierlsBound {
    /// Natural log of the bound.
    pub log: f64,
    /// The bound itself; `inf` once it leaves f64 range.
    pub value: f64,
}

impl PeierlsBound {
    /// Whether an exact count respects the bound (compared in log space).
    pub fn dominates(&self, count: &BigUint) -> bool {
        log_big(count) <= self.log + 1e-12 * self.log.abs().max(1.0)
    }
}

/// `2^d e^{l+d}` for spheres, `2^d e^{l+1+d}` for balls.
pub fn peierls_bound_l1(d: usize, l: u64, kind: CountKind) -> PeierlsBound {
    let extra = match kind {
        CountKind::Sphere => 0.0,
        CountKind::Ball => 1.0,
    };
    let log = d as f64 * std::f64::consts::LN_2 + l as f64 + extra + d as f64;
    PeierlsBound { log, value: log.exp() }
}

pub(crate) fn log_big(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().map(f64::ln).unwrap_or(f64::INFINITY);
    }
    let shift = bits - 64;
    let top = (n >> shift as usize).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sphere_counts() {
        assert_eq!(sphere_count_l1(3, 1), BigUint::from(6u32));
        assert_eq!(sphere_count_l1(3, 2), BigUint::from(18u32));
        assert_eq!(sphere_count_l1(2, 3), BigUint::from(12u32));
    }

    #[test]
    fn small_ball_counts() {
        assert_eq!(ball_count_l1(3, 0), BigUint::from(1u32));
        assert_eq!(ball_count_l1(3, 1), BigUint::from(7u32));
        assert_eq!(ball_count_l1(3, 2), BigUint::from(25u32));
    }

    #[test]
    fn bound_values() {
        let b = peierls_bound_l1(3, 2, CountKind::Sphere);
        assert!((b.value - 8.0 * 5f64.exp()).abs() < 1e-9);
        assert!((b.value - 1187.305).abs() < 1e-3);
        let b0 = peierls_bound_l1(3, 0, CountKind::Sphere);
        assert!((b0.value - 160.68).abs() < 0.01);
        assert!(b0.dominates(&sphere_count_l1(3, 0)));
        let b1 = peierls_bound_l1(1, 0, CountKind::Ball);
        assert!((b1.value - 14.78).abs() < 0.01);
    }

    #[test]
    fn overflow_regime_stays_exact() {
        // d = 30, l = 30 exceeds u64 and is still compared in log space
        let n = sphere_count_l1(30, 30);
        assert!(n.bits() > 64);
        assert!(peierls_bound_l1(30, 30, CountKind::Sphere).dominates(&n));
    }

    #[test]
    fn log_big_matches_f64() {
        let n = BigUint::from(123_456_789u64);
        assert!((log_big(&n) - 123_456_789f64.ln()).abs() < 1e-12);
        let big = BigUint::one() << 5000usize;
        assert!((log_big(&big) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
