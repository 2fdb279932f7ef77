use serde::{Deserialize, Serialize};

use super::{check_level_growth, kn_sequence, level_sequence, tree_count_bound, RenormConfig, RenormConstants, N_MAX};
use crate::error::{Error, Result};

/// One inequality `lhs <= rhs` (or `<` where stated), both sides in the
/// units given by `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub statement: String,
    pub scale: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub required: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: u32,
    /// Log of `(c4 ℓ0)^{2(d-1)(2^n-1)} e^{-(K0 - log 2) 2^n}`.
    pub log_bound: f64,
    /// `log 2^{-2^n}`.
    pub log_target: f64,
    /// `log2` of the bound target, i.e. `-2^n`.
    pub target_log2: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub d: u64,
    pub eps: Option<f64>,
    pub clauses: Vec<Clause>,
    pub verdict: bool,
    pub u_infinity: Option<f64>,
    /// Present when the verdict passes.
    pub bound_table: Option<Vec<BoundRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<String>,
}

impl Certificate {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.clauses.iter().filter(|c| c.required && !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn clause(name: &str, statement: &str, scale: &str, lhs: f64, rhs: f64, required: bool) -> Clause {
    Clause {
        name: name.into(),
        statement: statement.into(),
        scale: scale.into(),
        lhs,
        rhs,
        pass: lhs <= rhs,
        required,
        note: None,
    }
}

const TABLE_ROWS: u32 = 10;

/// Evaluate every condition of the induction start for `cfg`. `log_p0` is a
/// measured or assumed `log p_0(u_0)`; without it the asymptotic local
/// estimate `p_0 <= d^{-9d}` stands in and is flagged as such.
pub fn certificate(cfg: &RenormConfig, log_p0: Option<f64>) -> Result<Certificate> {
    cfg.validate()?;
    let d = cfg.d as f64;
    let dm2 = d - 2.0;
    let c = &cfg.constants;
    let l_hat = cfg.l_hat0();
    let mut clauses = Vec::new();

    if let Some(m) = cfg.m {
        let l = c.c7() * d;
        clauses.push(clause(
            "local_window_fits",
            "M L + 1 <= R L0",
            "linear",
            m as f64 * l + 1.0,
            cfg.r * cfg.l0 as f64,
            true,
        ));
    }
    let mut sep = clause(
        "scale_separation",
        "2 c5 (sqrt(d) + R) < ell0",
        "linear",
        2.0 * c.c5 * (d.sqrt() + cfg.r),
        cfg.ell0 as f64,
        true,
    );
    sep.pass = sep.lhs < sep.rhs;
    sep.note = Some("the constant in front of sqrt(d) + R is only known to exceed 2 c5".into());
    clauses.push(sep);
    let mut mult = clause("ell0_multiple_of_100", "ell0 mod 100 = 0", "linear", (cfg.ell0 % 100) as f64, 0.0, false);
    mult.note = Some("the scale definition asks for a multiple of 100; the local-bound wiring sets ell0 = d".into());
    clauses.push(mult);

    let la = cfg.log_series_ratio();
    let mut series =
        clause("level_series_converges", "log (c5/ell0)^(d-2) < log(1/2)", "log", la, -std::f64::consts::LN_2, true);
    series.pass = la < -std::f64::consts::LN_2;
    clauses.push(series);

    let levels = level_sequence(cfg, N_MAX).ok();
    let u_inf = levels.as_ref().map(|s| s.u_inf);
    let rhs_246 = (cfg.r0 as f64 / 2.0) * dm2 * -cfg.log_smallness();
    let lhs_u = u_inf.map_or(f64::INFINITY, |u| u.ln() + dm2 * (l_hat / d.sqrt()).ln());
    clauses.push(clause(
        "level_growth_dominated",
        "log[u_inf (Lhat0/sqrt(d))^(d-2)] <= (r0/2)(d-2) log(ell0 L0 / (c6 Lhat0))",
        "log",
        lhs_u,
        rhs_246,
        true,
    ));
    clauses.push(clause(
        "initial_exponent_dominated",
        "K0 <= (r0/2)(d-2) log(ell0 L0 / (c6 Lhat0))",
        "log",
        cfg.k0,
        rhs_246,
        true,
    ));
    let mut local = match log_p0 {
        Some(lp) => clause("local_estimate", "log p0(u0) <= -K0", "log", lp, -cfg.k0, true),
        None => {
            let mut c = clause("local_estimate", "log d^(-9d) <= -K0", "log", -9.0 * d * d.ln(), -cfg.k0, true);
            c.note = Some("asymptotic: the closed form d^(-9d) for p0 is established only for d >= c(eps)".into());
            c
        }
    };
    local.lhs = if local.lhs.is_nan() { f64::INFINITY } else { local.lhs };
    clauses.push(local);

    let mut cmp = clause("exponent_comparison", "2(d-1) < 6(d-2)", "linear", 2.0 * (d - 1.0), 6.0 * dm2, false);
    cmp.pass = cmp.lhs < cmp.rhs;
    clauses.push(cmp);

    if let (Some(eps), Some(s)) = (cfg.eps, levels.as_ref()) {
        let top = (1.0 + 10.0 * eps) * d.ln();
        let mut w = clause("u_inf_window", "u0 < u_inf < (1 + 10 eps) log d", "linear", s.u_inf, top, false);
        w.pass = s.log_growth_inf > 0.0 && s.u_inf < top;
        clauses.push(w);
        clauses.push(clause("lhat_bound", "Lhat0 <= 2 d^(3/2)", "linear", l_hat, 2.0 * d.powf(1.5), false));
    }
    if let Ok(g) = check_level_growth(cfg, N_MAX) {
        let worst = g.iter().map(|r| r.lhs - r.rhs).fold(f64::INFINITY, f64::min);
        let mut c = clause("sprinkling_condition", "u_n satisfy the one-step growth condition, n < 60", "log", -worst, 0.0, false);
        c.pass = g.iter().all(|r| r.pass);
        clauses.push(c);
    }
    let kn = kn_sequence(cfg, N_MAX)?;
    let mut kc = clause("kn_lower_bound", "K0 - log 2 <= min K_n, n <= 60", "linear", kn.lower_bound, kn.min, false);
    kc.pass = kn.above_lower_bound;
    clauses.push(kc);

    let verdict = clauses.iter().filter(|c| c.required).all(|c| c.pass);
    let bound_table = verdict.then(|| {
        (1..=TABLE_ROWS)
            .map(|n| {
                let p = 2f64.powi(n as i32);
                let log_bound = tree_count_bound(cfg, n) - (cfg.k0 - std::f64::consts::LN_2) * p;
                let log_target = -p * std::f64::consts::LN_2;
                BoundRow { n, log_bound, log_target, target_log2: -p, holds: log_bound <= log_target * (1.0 - 1e-12) }
            })
            .collect()
    });
    let conclusion = verdict.then(|| format!("u_** <= u_inf = {}", u_inf.unwrap_or(f64::NAN)));
    Ok(Certificate { d: cfg.d, eps: cfg.eps, clauses, verdict, u_infinity: u_inf, bound_table, conclusion })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalBound {
    pub log_d: f64,
    pub eps: f64,
    pub m: u64,
    /// `M(M-1)/2 L + 3Md - (ε²/5) M d log d`.
    pub exponent: f64,
    /// `-(ε²/10) d M log d`.
    pub target: f64,
    /// `T - E`; infinite once `d` leaves the `f64` range.
    pub margin: f64,
    /// `(T - E) / (d M)`, finite for every `log d`.
    pub margin_per_dm: f64,
    pub holds: bool,
    /// `log d` beyond which the margin is nonnegative.
    pub threshold_log_d: f64,
}

/// Compare the connectivity exponent with its corollary form at dimension
/// `exp(log_d)`; `log_d` may describe dimensions far beyond `u64`.
pub fn local_bound_rhs(log_d: f64, eps: f64, m: u64, constants: &RenormConstants) -> Result<LocalBound> {
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(Error::input(format!("ε must lie in (0, 1/3), got {eps}")));
    }
    if m == 0 {
        return Err(Error::input("M must be a positive integer"));
    }
    if log_d.is_nan() || log_d < 3f64.ln() {
        return Err(Error::input("d must be at least 3"));
    }
    constants.validate()?;
    let d = log_d.exp();
    let mf = m as f64;
    let l = constants.c7() * d;
    let exponent = mf * (mf - 1.0) / 2.0 * l + 3.0 * mf * d - eps * eps / 5.0 * mf * d * log_d;
    let target = -(eps * eps / 10.0) * d * mf * log_d;
    let margin_per_dm = eps * eps / 10.0 * log_d - 3.0 - (mf - 1.0) * constants.c7() / 2.0;
    let margin = if margin_per_dm == 0.0 { 0.0 } else { margin_per_dm * d * mf };
    Ok(LocalBound {
        log_d,
        eps,
        m,
        exponent,
        target,
        margin,
        margin_per_dm,
        holds: margin_per_dm >= 0.0,
        threshold_log_d: local_bound_threshold(eps, m, constants),
    })
}

/// The margin equals `d M [(ε²/10) log d - 3 - (M-1) c7 / 2]`, so it turns
/// nonnegative at `log d = (10/ε²)(3 + (M-1) c7 / 2)`.
pub fn local_bound_threshold(eps: f64, m: u64, constants: &RenormConstants) -> f64 {
    10.0 / (eps * eps) * (3.0 + (m as f64 - 1.0) * constants.c7() / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct A1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `√(a²+b²) log(1 + √(a²+b²)) <= a log(1+a) + b log(1+b)`.
pub fn check_a1(a: f64, b: f64) -> Result<A1Check> {
    if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::input(format!("need finite a, b >= 0, got a = {a}, b = {b}")));
    }
    let r = a.hypot(b);
    let lhs = r * r.ln_1p();
    let rhs = a * a.ln_1p() + b * b.ln_1p();
    let slack = rhs - lhs;
    Ok(A1Check { lhs, rhs, slack, holds: slack >= -1e-12 })
}
