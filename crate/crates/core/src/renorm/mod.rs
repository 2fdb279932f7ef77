//! Arithmetic of the multiscale renormalization: scales, tree counts, the
//! sprinkled level sequence `u_n`, the exponents `K_n`, and a worst-case
//! chain obeying the one-step recursion.
//!
//! Quantities such as `e^{K_0 2^n}` leave the range of any float after a few
//! steps, so everything is carried as logarithms and sums are compensated.

mod certificate;

pub use certificate::{
    certificate, check_a1, local_bound_rhs, local_bound_threshold, A1Check, BoundRow, Certificate, Clause,
    LocalBound,
};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::neumaier_sum;

/// Default truncation of the infinite sums.
pub const N_MAX: usize = 60;

/// The abstract constants. None has a numeric value in the source analysis;
/// [`RenormConstants::toy`] is a smoke-test profile only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormConstants {
    pub c2: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl RenormConstants {
    /// All constants equal to one. Not normative.
    pub fn toy() -> Self {
        RenormConstants { c2: 1.0, c4: 1.0, c5: 1.0, c6: 1.0 }
    }

    /// Build from optional inputs, naming every missing one.
    pub fn from_parts(c2: Option<f64>, c4: Option<f64>, c5: Option<f64>, c6: Option<f64>) -> Result<Self> {
        let named = [("c2", c2), ("c4", c4), ("c5", c5), ("c6", c6)];
        let missing: Vec<&str> = named.iter().filter(|(_, v)| v.is_none()).map(|(n, _)| *n).collect();
        if !missing.is_empty() {
            return Err(Error::input(format!("missing constants: {}", missing.join(", "))));
        }
        let c = RenormConstants { c2: c2.unwrap(), c4: c4.unwrap(), c5: c5.unwrap(), c6: c6.unwrap() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("c2", self.c2), ("c4", self.c4), ("c5", self.c5), ("c6", self.c6)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("constant {n} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `c7 = floor(e^8 c2) + 2`.
    pub fn c7(&self) -> f64 {
        (8f64.exp() * self.c2).floor() + 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormConfig {
    pub d: u64,
    pub eps: Option<f64>,
    /// `L_0`.
    pub l0: u64,
    pub r: f64,
    /// `ℓ_0`.
    pub ell0: u64,
    pub r0: u64,
    pub u0: f64,
    pub k0: f64,
    /// Only set by the local-bound wiring.
    pub m: Option<u64>,
    pub constants: RenormConstants,
}

/// `floor(x)`, except that values within rounding of an integer snap to it
/// (decimal `ε` rarely squares exactly).
fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

impl RenormConfig {
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        let bad = |m: String| Err(Error::input(m));
        if self.d < 3 {
            return bad(format!("d must be at least 3, got {}", self.d));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e < 1.0 / 3.0) {
                return bad(format!("ε must lie in (0, 1/3), got {e}"));
            }
        }
        if self.l0 < self.d {
            return bad(format!("L0 = {} must be at least d = {}", self.l0, self.d));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return bad(format!("R must be at least 1, got {}", self.r));
        }
        if self.ell0 == 0 || self.r0 == 0 {
            return bad("ℓ0 and r0 must be positive".into());
        }
        if !(self.u0 > 0.0 && self.u0.is_finite()) {
            return bad(format!("u0 must be positive, got {}", self.u0));
        }
        if !(self.k0 > std::f64::consts::LN_2 && self.k0.is_finite()) {
            return bad(format!("K0 must exceed log 2, got {}", self.k0));
        }
        Ok(())
    }

    /// The wiring that feeds the local bound into the induction:
    /// `L0 = ℓ0 = d`, `R = 300 c7 ε^-2`, `r0 = 24`, `M = floor(100 ε^-2) + 1`,
    /// `u0 = (1 + 5ε) log d`, `K0 = log(4 (c4 d)^{2(d-1)})`.
    pub fn wired(d: u64, eps: f64, constants: RenormConstants) -> Result<Self> {
        constants.validate()?;
        if !(eps > 0.0 && eps < 1.0 / 3.0) {
            return Err(Error::input(format!("ε must lie in (0, 1/3), got {eps}")));
        }
        let df = d as f64;
        let cfg = RenormConfig {
            d,
            eps: Some(eps),
            l0: d,
            r: 300.0 * constants.c7() / (eps * eps),
            ell0: d,
            r0: 24,
            u0: (1.0 + 5.0 * eps) * df.ln(),
            k0: 4f64.ln() + 2.0 * (df - 1.0) * (constants.c4 * df).ln(),
            m: Some(floor_snapped(100.0 / (eps * eps)) as u64 + 1),
            constants,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn dm2(&self) -> f64 {
        (self.d - 2) as f64
    }

    /// `L̂0 = (√d + R) L0`.
    pub fn l_hat0(&self) -> f64 {
        ((self.d as f64).sqrt() + self.r) * self.l0 as f64
    }

    /// `log (c5/ℓ0)^{d-2}`, the ratio of the level series.
    pub fn log_series_ratio(&self) -> f64 {
        self.dm2() * (self.constants.c5 / self.ell0 as f64).ln()
    }

    /// `log (c6 L̂0 / (ℓ0 L0))`.
    pub fn log_smallness(&self) -> f64 {
        (self.constants.c6 * self.l_hat0() / (self.ell0 as f64 * self.l0 as f64)).ln()
    }
}

/// `(L_n, L̂0)` with `L_n = ℓ0^n L0` exact.
pub fn scales(cfg: &RenormConfig, n: u32) -> (BigUint, f64) {
    (BigUint::from(cfg.ell0).pow(n) * BigUint::from(cfg.l0), cfg.l_hat0())
}

/// `log (c4 ℓ0)^{2(d-1)(2^n - 1)}`.
pub fn tree_count_bound(cfg: &RenormConfig, n: u32) -> f64 {
    let e = 2.0 * (cfg.d - 1) as f64 * (2f64.powi(n as i32) - 1.0);
    if e == 0.0 {
        0.0
    } else {
        e * (cfg.constants.c4 * cfg.ell0 as f64).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSequence {
    /// `log(u_n / u_0)` for `n = 0..=n_max`.
    pub log_growth: Vec<f64>,
    pub u: Vec<f64>,
    /// `log(u_∞ / u_0)` from the closed form.
    pub log_growth_inf: f64,
    pub u_inf: f64,
}

fn check_series(cfg: &RenormConfig) -> Result<f64> {
    let la = cfg.log_series_ratio();
    if la >= -std::f64::consts::LN_2 {
        return Err(Error::input(format!(
            "level series diverges: (c5/ℓ0)^(d-2) = {:e} is not below 1/2, so the closed-form \
             denominators 1 - 2(c5/ℓ0)^(d-2) vanish or turn negative",
            la.exp()
        )));
    }
    Ok(la)
}

/// `u_n = u0 exp{(L̂0/L0)^{d-2} Σ_{k<n} (r_k + 1) (c5/ℓ0)^{(k+1)(d-2)}}` with
/// `r_k = r0 2^k`, and its limit in closed form.
pub fn level_sequence(cfg: &RenormConfig, n_max: usize) -> Result<LevelSequence> {
    cfg.validate()?;
    let la = check_series(cfg)?;
    let lq = cfg.dm2() * (cfg.l_hat0() / cfg.l0 as f64).ln();
    let terms: Vec<f64> = (0..n_max)
        .map(|k| {
            let rk = cfg.r0 as f64 * 2f64.powi(k as i32);
            ((rk + 1.0).ln() + lq + (k + 1) as f64 * la).exp()
        })
        .collect();
    let log_growth: Vec<f64> = (0..=n_max).map(|n| neumaier_sum(terms[..n].iter().copied())).collect();
    let a = la.exp();
    let bracket = cfg.r0 as f64 / (1.0 - 2.0 * a) + 1.0 / (1.0 - a);
    let log_growth_inf = (lq + la + bracket.ln()).exp();
    Ok(LevelSequence {
        u: log_growth.iter().map(|g| cfg.u0 * g.exp()).collect(),
        log_growth,
        u_inf: cfg.u0 * log_growth_inf.exp(),
        log_growth_inf,
    })
}

/// One row of the sprinkling check
/// `u_{n+1} >= u_n (1 + (L̂0/L0)(c5/ℓ0)^{(n+1)(d-2)})^{r_n + 1}`,
/// compared as `log log(u_{n+1}/u_n)` against the log of the right side's exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn check_level_growth(cfg: &RenormConfig, n_max: usize) -> Result<Vec<GrowthCheck>> {
    cfg.validate()?;
    let la = check_series(cfg)?;
    let q = (cfg.l_hat0() / cfg.l0 as f64).ln();
    Ok((0..n_max)
        .map(|n| {
            let rn1 = (cfg.r0 as f64 * 2f64.powi(n as i32) + 1.0).ln();
            let lx = q + (n + 1) as f64 * la;
            // log of the increment of log u_n
            let lhs = rn1 + cfg.dm2() * q + (n + 1) as f64 * la;
            // log((r_n+1) log1p(x)); log1p(x) <= x, so ln x is a safe stand-in once x underflows
            let x = lx.exp();
            let rhs = rn1 + if x > 1e-300 { x.ln_1p().ln() } else { lx };
            GrowthCheck { n, lhs, rhs, pass: le_rel(rhs, lhs) }
        })
        .collect())
}

fn softplus(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        0.0
    } else if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnSequence {
    pub k: Vec<f64>,
    pub min: f64,
    pub lower_bound: f64,
    pub above_lower_bound: bool,
    /// Size of the last correction added; the partial sums have stabilised
    /// to this order.
    pub last_correction: f64,
}

/// `K_n = K0 - Σ_{n'<n} 2^{-(n'+1)} log(1 + e^{K_{n'} 2^{n'}} ρ^{(r0/2) 2^{n'} (d-2)})`
/// for a smallness ratio given as `log ρ` (may be `-∞`).
pub fn kn_recursion(k0: f64, r0: u64, d: u64, log_ratio: f64, n_max: usize) -> KnSequence {
    let dm2 = (d - 2) as f64;
    let mut k = vec![k0];
    let mut corrections = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let p = 2f64.powi(n as i32);
        let z = k[n] * p + (r0 as f64 / 2.0) * p * dm2 * log_ratio;
        corrections.push(softplus(z) / (2.0 * p));
        k.push(k0 - neumaier_sum(corrections.iter().copied()));
    }
    let min = k.iter().copied().fold(f64::INFINITY, f64::min);
    let lower_bound = k0 - std::f64::consts::LN_2;
    KnSequence {
        above_lower_bound: min >= lower_bound,
        min,
        lower_bound,
        last_correction: corrections.last().copied().unwrap_or(0.0),
        k,
    }
}

pub fn kn_sequence(cfg: &RenormConfig, n_max: usize) -> Result<KnSequence> {
    cfg.validate()?;
    Ok(kn_recursion(cfg.k0, cfg.r0, cfg.d, cfg.log_smallness(), n_max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductionReport {
    pub hypothesis_holds: bool,
    /// `log p_n` of the worst-case chain.
    pub log_p: Vec<f64>,
    /// `-K_n 2^n`.
    pub log_bound: Vec<f64>,
    /// `-(K0 - log 2) 2^n`.
    pub log_final_bound: Vec<f64>,
    pub chain_within_bound: bool,
    pub chain_within_final_bound: bool,
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}

fn le_rel(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * b.abs().max(1.0)
}

/// Run `p_{n+1} = p_n (p_n + ρ^{(r0/2) 2^n (d-2)})` from `log p0` and compare
/// with `e^{-K_n 2^n}` and `e^{-(K0 - log 2) 2^n}`.
pub fn induction_chain(k0: f64, r0: u64, d: u64, log_ratio: f64, log_p0: f64, n_max: usize) -> InductionReport {
    let dm2 = (d - 2) as f64;
    let kn = kn_recursion(k0, r0, d, log_ratio, n_max);
    let hypothesis_holds = le_rel(log_p0, -k0);
    if !hypothesis_holds {
        return InductionReport {
            hypothesis_holds,
            log_p: vec![log_p0],
            log_bound: Vec::new(),
            log_final_bound: Vec::new(),
            chain_within_bound: false,
            chain_within_final_bound: false,
        };
    }
    let mut log_p = vec![log_p0];
    for n in 0..n_max {
        let p = 2f64.powi(n as i32);
        let lt = (r0 as f64 / 2.0) * p * dm2 * log_ratio;
        let lp = log_p[n];
        log_p.push(lp + logaddexp(lp, lt));
    }
    let log_bound: Vec<f64> = kn.k.iter().enumerate().map(|(n, k)| -k * 2f64.powi(n as i32)).collect();
    let log_final_bound: Vec<f64> = (0..=n_max).map(|n| -kn.lower_bound * 2f64.powi(n as i32)).collect();
    InductionReport {
        hypothesis_holds,
        chain_within_bound: log_p.iter().zip(&log_bound).all(|(a, b)| le_rel(*a, *b)),
        chain_within_final_bound: log_p.iter().zip(&log_final_bound).all(|(a, b)| le_rel(*a, *b)),
        log_p,
        log_bound,
        log_final_bound,
    }
}

/// The worst-case chain for a config, starting from `log p0`.
pub fn induction_verifier(cfg: &RenormConfig, log_p0: f64, n_max: usize) -> Result<InductionReport> {
    cfg.validate()?;
    Ok(induction_chain(cfg.k0, cfg.r0, cfg.d, cfg.log_smallness(), log_p0, n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(d: u64, ell0: u64, l0: u64, r: f64) -> RenormConfig {
        RenormConfig {
            d,
            eps: None,
            l0,
            r,
            ell0,
            r0: 2,
            u0: 1.0,
            k0: 3.0,
            m: None,
            constants: RenormConstants::toy(),
        }
    }

    #[test]
    fn scale_arithmetic() {
        let c = plain(3, 100, 3, 1.0);
        assert_eq!(scales(&c, 0).0, BigUint::from(3u32));
        assert_eq!(scales(&c, 2).0, BigUint::from(30_000u32));
        let c9 = plain(9, 100, 9, 1.0);
        assert_eq!(scales(&c9, 0).1, 36.0);
    }

    #[test]
    fn tree_counts() {
        let mut c = plain(3, 100, 3, 1.0);
        c.constants.c4 = 2.0;
        assert_eq!(tree_count_bound(&c, 0), 0.0);
        assert!((tree_count_bound(&c, 1).exp() - 1.6e9).abs() / 1.6e9 < 1e-12);
        assert!(tree_count_bound(&c, 3) > tree_count_bound(&c, 2));
    }

    #[test]
    fn closed_form_limit_matches_partial_sums() {
        let c = RenormConfig { r0: 2, ..plain(5, 20, 5, 1.0) };
        let s = level_sequence(&c, 60).unwrap();
        assert_eq!(s.u[0], 1.0);
        assert!(s.u.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.u[..4].windows(2).all(|w| w[0] < w[1]));
        let partial = s.log_growth[60].exp_m1();
        let closed = s.log_growth_inf.exp_m1();
        assert!(((partial - closed) / closed).abs() < 1e-12);
    }

    #[test]
    fn divergent_series_rejected() {
        let mut c = plain(3, 100, 3, 1.0);
        c.constants.c5 = 60.0;
        assert!(level_sequence(&c, 10).is_err());
    }

    #[test]
    fn growth_condition_holds() {
        let c = plain(5, 1000, 5, 1.0);
        assert!(check_level_growth(&c, 60).unwrap().iter().all(|g| g.pass));
    }

    #[test]
    fn no_correction_keeps_k_constant() {
        let k = kn_recursion(5.0, 24, 10, f64::NEG_INFINITY, 60);
        assert!(k.k.iter().all(|&v| v == 5.0));
    }

    #[test]
    fn exact_squaring_chain() {
        let r = induction_chain(5.0, 24, 10, f64::NEG_INFINITY, -5.0, 10);
        assert!(r.hypothesis_holds && r.chain_within_bound);
        for (n, lp) in r.log_p.iter().enumerate() {
            assert_eq!(*lp, -5.0 * 2f64.powi(n as i32));
        }
    }

    #[test]
    fn hypothesis_failure_reported() {
        let r = induction_chain(5.0, 24, 10, -3.0, -4.0, 10);
        assert!(!r.hypothesis_holds);
    }

    #[test]
    fn missing_constants_named() {
        let e = RenormConstants::from_parts(Some(1.0), None, Some(1.0), None).unwrap_err();
        assert!(e.to_string().contains("c4, c6"));
    }

    #[test]
    fn wired_parameters() {
        let c = RenormConfig::wired(1000, 0.2, RenormConstants::toy()).unwrap();
        assert_eq!(c.m, Some(2501));
        assert_eq!(c.r0, 24);
        assert_eq!(c.constants.c7(), 2982.0);
    }
}
