use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{crossing_event, CrossingSpec};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::interlace::{FirstOccupation, Sampler, TruncationPolicy};
use crate::lattice::{LatticePoint, Norm, Region, Sites};
use crate::rng::RngStream;
use crate::stats::Estimate;
use crate::walk::GreenTable;

/// Largest window (in sites) a connectivity curve may allocate.
pub const DEFAULT_WINDOW_CAP: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// The level `u` of a sweep or the radius `r` of a connectivity curve.
    pub x: f64,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub points: Vec<CurvePoint>,
    /// `indicators[replica][k]` is the crossing event at `u_grid[k]`.
    pub indicators: Vec<Vec<bool>>,
}

impl SweepCurve {
    pub fn monotone_per_replica(&self) -> bool {
        self.indicators.iter().all(|row| row.windows(2).all(|w| w[0] || !w[1]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityCurve {
    pub level: f64,
    pub metric: Norm,
    pub points: Vec<CurvePoint>,
    /// Largest norm reached by the origin's vacant cluster, `-1` when the
    /// origin is occupied.
    pub reach: Vec<i64>,
}

fn estimates(rows: &[Vec<bool>], xs: &[f64]) -> Vec<CurvePoint> {
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let hits = rows.iter().filter(|r| r[k]).count() as u64;
            CurvePoint { x, estimate: Estimate::binomial(hits, rows.len() as u64) }
        })
        .collect()
}

/// Crossing probabilities on a level grid from coupled fields: one soup at
/// the largest level per replica, thresholded at every grid level.
pub fn crossing_probability_sweep(
    spec: &CrossingSpec,
    u_grid: &[f64],
    replicas: u64,
    rng: &RngStream,
    table: Arc<GreenTable>,
    exec: Exec,
) -> Result<SweepCurve> {
    if replicas == 0 {
        return Err(Error::input("sweep needs at least one replica"));
    }
    if u_grid.is_empty() || u_grid[0] < 0.0 || u_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::input("level grid must be non-empty, nonnegative and ascending"));
    }
    let u_max = *u_grid.last().expect("non-empty grid");
    let sampler = Sampler::new(spec.window().clone(), table, &TruncationPolicy::default())?;
    let rows: Vec<Result<Vec<bool>>> = exec::map_indexed(replicas, exec, |i| {
        let soup = sampler.sample(u_max, &mut rng.split(i))?;
        let occ = FirstOccupation::new(&soup, spec.window())?;
        u_grid.iter().map(|&u| crossing_event(&occ.field(u)?, spec)).collect()
    });
    let indicators = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepCurve { points: estimates(&indicators, u_grid), indicators })
}

/// `P[0 ↔ S(0, r)]` in the vacant set at level `u`, for each radius.
#[allow(clippy::too_many_arguments)]
pub fn connectivity_function(
    d: usize,
    u: f64,
    radii: &[u64],
    metric: Norm,
    replicas: u64,
    rng: &RngStream,
    table: Arc<GreenTable>,
    exec: Exec,
) -> Result<ConnectivityCurve> {
    connectivity_function_capped(d, u, radii, metric, replicas, rng, table, exec, DEFAULT_WINDOW_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn connectivity_function_capped(
    d: usize,
    u: f64,
    radii: &[u64],
    metric: Norm,
    replicas: u64,
    rng: &RngStream,
    table: Arc<GreenTable>,
    exec: Exec,
    window_cap: u64,
) -> Result<ConnectivityCurve> {
    if replicas == 0 {
        return Err(Error::input("connectivity curve needs at least one replica"));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::input("radii must be non-empty and ascending"));
    }
    let r_max = *radii.last().expect("non-empty radii");
    let center = LatticePoint::origin(d);
    let region = match metric {
        Norm::L1 => Region::L1Ball { center: center.clone(), radius: r_max },
        Norm::Linf => Region::LinfBall { center: center.clone(), radius: r_max },
        Norm::L2Sq => return Err(Error::input("connectivity spheres are ℓ¹ or ℓ∞")),
    };
    let window = Sites::from_region_capped(&region, window_cap)?;
    let origin = window.index_of(&center).expect("origin in its own ball");
    let sampler = Sampler::new(window.clone(), table, &TruncationPolicy::default())?;
    let reach: Vec<Result<i64>> = exec::map_indexed(replicas, exec, |i| {
        let soup = sampler.sample(u, &mut rng.split(i))?;
        let field = FirstOccupation::new(&soup, &window)?.field(u)?;
        let vac = field.vacancy();
        if !vac[origin] {
            return Ok(-1);
        }
        let mut seen = vec![false; window.len()];
        let mut queue = VecDeque::from([origin]);
        seen[origin] = true;
        let mut far = 0u64;
        while let Some(i) = queue.pop_front() {
            far = far.max(window.point(i).norm(metric));
            for code in 0..2 * d {
                if let Some(j) = window.neighbor(i, code) {
                    if vac[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        Ok(far as i64)
    });
    let reach = reach.into_iter().collect::<Result<Vec<_>>>()?;
    // a cluster is connected and unit steps change either norm by at most one,
    // so reaching norm >= r means meeting the sphere of radius r
    let rows: Vec<Vec<bool>> = reach.iter().map(|&m| radii.iter().map(|&r| m >= r as i64).collect()).collect();
    let xs: Vec<f64> = radii.iter().map(|&r| r as f64).collect();
    Ok(ConnectivityCurve { level: u, metric, points: estimates(&rows, &xs), reach })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub stderr: f64,
    /// `alpha ± 1.96 stderr`.
    pub band: (f64, f64),
    pub intercept: f64,
}

/// Least-squares slope of `log P` against `-log L`.
pub fn estimate_alpha(curve: &[(f64, f64)]) -> Result<AlphaFit> {
    if curve.len() < 3 {
        return Err(Error::input(format!("decay fit needs at least 3 points, got {}", curve.len())));
    }
    if let Some((l, _)) = curve.iter().find(|(_, p)| *p <= 0.0) {
        return Err(Error::input(format!(
            "probability at L = {l} is zero; increase replicas or lower u before fitting"
        )));
    }
    if curve.iter().any(|(l, p)| l.is_nan() || *l <= 0.0 || !p.is_finite()) {
        return Err(Error::input("decay fit needs positive scales and finite probabilities"));
    }
    let n = curve.len() as f64;
    let xs: Vec<f64> = curve.iter().map(|(l, _)| -l.ln()).collect();
    let ys: Vec<f64> = curve.iter().map(|(_, p)| p.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::input("decay fit needs at least two distinct scales"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(AlphaFit { alpha, stderr, band: (alpha - 1.96 * stderr, alpha + 1.96 * stderr), intercept })
}

/// `lower`: largest level with estimate above 1/2; `upper`: smallest level
/// with estimate below 0.05.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UStarBracket {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

pub fn u_star_bracket(curve: &[CurvePoint]) -> UStarBracket {
    UStarBracket {
        lower: curve.iter().filter(|p| p.estimate.mean > 0.5).map(|p| p.x).reduce(f64::max),
        upper: curve.iter().filter(|p| p.estimate.mean < 0.05).map(|p| p.x).reduce(f64::min),
    }
}
