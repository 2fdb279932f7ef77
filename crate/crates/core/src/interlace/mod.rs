//! The random interlacement restricted to a finite window `K'`.
//!
//! Trajectories hitting `K'` form a Poisson process with intensity
//! `u cap(K')`; each enters at a point drawn from `e_{K'}/cap(K')` and moves
//! on as a simple random walk. Only the forward part can meet `K'` again.
//!
//! Walks are followed until they leave a stop box around the window. Under
//! [`TruncationMode::Reenter`] the exit point's exact harmonic measure on
//! `K'` decides whether the walk ever comes back and, if so, where; the
//! sample then carries no truncation bias beyond quadrature error. Under
//! [`TruncationMode::Halt`] the walk stops at the exit of a box chosen so that
//! the re-entry probability from any exit point is at most `delta`.

mod field;
mod invariance;
mod io;

pub use field::{vacant_field, FirstOccupation, VacantField};
pub use invariance::{window_invariance_test, InvarianceReport, SiteComparison, UNDERPOWERED_REPLICAS};
pub use io::{read_soup, write_soup};

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{move_of_code, LatticePoint, Region, Sites};
use crate::potential::{equilibrium_measure, EquilibriumMeasure};
use crate::rng::RngStream;
use crate::walk::{random_step, GreenTable, StopReason};

/// Step code marking a jump to a re-entry point.
pub const JUMP: u8 = 0xFF;

pub const DEFAULT_DELTA: f64 = 1e-4;
pub const DEFAULT_MARGIN: u64 = 2;
pub const DEFAULT_RADIUS_CAP: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationMode {
    Reenter,
    Halt,
}

/// How forward walks are cut off.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    /// Re-entry budget per trajectory, used by `Halt`.
    pub delta: f64,
    /// Distance between the window's bounding box and the stop box, used by `Reenter`.
    pub margin: u64,
    /// Explicit stop box; derived from the window when `None`.
    pub stop_region: Option<Region>,
    /// Largest stop-box half-width `Halt` may derive.
    pub radius_cap: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            mode: TruncationMode::Reenter,
            delta: DEFAULT_DELTA,
            margin: DEFAULT_MARGIN,
            stop_region: None,
            radius_cap: DEFAULT_RADIUS_CAP,
        }
    }
}

impl TruncationPolicy {
    pub fn halt(delta: f64) -> Self {
        TruncationPolicy { mode: TruncationMode::Halt, delta, ..Default::default() }
    }
}

/// The policy as applied to a particular window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub mode: TruncationMode,
    pub delta: f64,
    pub stop_region: Region,
    /// Bound on the per-trajectory probability that the recorded trace on the
    /// window differs from the untruncated one.
    pub certified_error: f64,
}

/// One labelled forward trajectory. `steps` holds unit-move codes, with
/// [`JUMP`] entries consuming `reentries` in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoupTrajectory {
    pub label: f64,
    pub start: LatticePoint,
    pub steps: Vec<u8>,
    pub reentries: Vec<LatticePoint>,
    pub stop_reason: StopReason,
}

impl SoupTrajectory {
    /// Visit the coordinates of every point on the path, start included.
    pub fn for_each_point(&self, mut f: impl FnMut(&[i64])) {
        let mut cur = self.start.coords().to_vec();
        f(&cur);
        let mut jumps = self.reentries.iter();
        for &c in &self.steps {
            if c == JUMP {
                let p = jumps.next().expect("a re-entry point per jump code");
                cur.copy_from_slice(p.coords());
            } else {
                let (axis, sign) = move_of_code(c as usize);
                cur[axis] += sign;
            }
            f(&cur);
        }
    }
}

/// A Poisson sample of labelled trajectories realising the interlacement at
/// every level up to `u_max` on the window.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySoup {
    pub window: Sites,
    pub u_max: f64,
    pub capacity: f64,
    pub truncation: Truncation,
    pub lineage: Vec<u64>,
    pub trajectories: Vec<SoupTrajectory>,
}

impl TrajectorySoup {
    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn lineage_string(&self) -> String {
        self.lineage.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("/")
    }
}

type Cdf = Arc<Vec<f64>>;

/// Everything about a window that does not change between soups: the
/// equilibrium measure, the stop box and a cache of re-entry laws.
pub struct Sampler {
    window: Sites,
    measure: EquilibriumMeasure,
    table: Arc<GreenTable>,
    start_cdf: Vec<f64>,
    truncation: Truncation,
    reentry: RwLock<HashMap<LatticePoint, Cdf>>,
}

impl std::fmt::Debug for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sampler")
            .field("window", &self.window.len())
            .field("capacity", &self.measure.capacity())
            .field("truncation", &self.truncation)
            .finish()
    }
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

impl Sampler {
    pub fn new(window: Sites, table: Arc<GreenTable>, policy: &TruncationPolicy) -> Result<Self> {
        if window.dim() != table.dim() {
            return Err(Error::Dimension { expected: table.dim(), got: window.dim() });
        }
        if policy.mode == TruncationMode::Halt && !(policy.delta > 0.0 && policy.delta < 1.0) {
            return Err(Error::input(format!("delta must lie in (0, 1), got {}", policy.delta)));
        }
        let measure = equilibrium_measure(&window, &table)?;
        let (lo, hi) = window.bounding_box();
        let (lo, hi) = (lo.to_vec(), hi.to_vec());
        let truncation = match (&policy.stop_region, policy.mode) {
            (Some(r), mode) => {
                if window.points().iter().any(|p| !r.contains(p)) {
                    return Err(Error::input("stop region must contain the window"));
                }
                let certified_error = match mode {
                    TruncationMode::Reenter => measure.residual(),
                    TruncationMode::Halt => halt_bound_for(r, &window, &measure, &table)?,
                };
                Truncation { mode, delta: policy.delta, stop_region: r.clone(), certified_error }
            }
            (None, TruncationMode::Reenter) => {
                let m = policy.margin as i64;
                let lower = LatticePoint::new(lo.iter().map(|l| l - m).collect());
                let sides = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1 + 2 * m) as u64).collect();
                Truncation {
                    mode: TruncationMode::Reenter,
                    delta: policy.delta,
                    stop_region: Region::Box { lower, sides },
                    certified_error: measure.residual(),
                }
            }
            (None, TruncationMode::Halt) => derive_halt_box(&lo, &hi, &measure, &table, policy)?,
        };
        let start_cdf = cumulative(measure.weights());
        Ok(Sampler { window, measure, table, start_cdf, truncation, reentry: RwLock::new(HashMap::new()) })
    }

    pub fn window(&self) -> &Sites {
        &self.window
    }

    pub fn capacity(&self) -> f64 {
        self.measure.capacity()
    }

    pub fn measure(&self) -> &EquilibriumMeasure {
        &self.measure
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    fn draw_from(cdf: &[f64], rng: &mut RngStream) -> Option<usize> {
        let total = *cdf.last()?;
        let v = rng.uniform() * total;
        Some(cdf.partition_point(|&c| c <= v).min(cdf.len() - 1))
    }

    fn reentry_cdf(&self, x: &[i64]) -> Result<Cdf> {
        if let Some(c) = self.reentry.read().expect("re-entry cache lock").get(x) {
            return Ok(c.clone());
        }
        let h = self.measure.harmonic_measure(&LatticePoint::new(x.to_vec()), &self.table)?;
        let cdf = Arc::new(cumulative(&h));
        self.reentry.write().expect("re-entry cache lock").insert(LatticePoint::new(x.to_vec()), cdf.clone());
        Ok(cdf)
    }

    fn forward_walk(&self, label: f64, start: usize, rng: &mut RngStream) -> Result<SoupTrajectory> {
        let support = self.measure.support();
        let d = self.window.dim();
        let start = support.point(start).clone();
        let mut cur = start.coords().to_vec();
        let mut steps = Vec::new();
        let mut reentries = Vec::new();
        let stop = &self.truncation.stop_region;
        loop {
            let code = random_step(d, rng);
            let (axis, sign) = move_of_code(code);
            cur[axis] += sign;
            steps.push(code as u8);
            if stop.contains_coords(&cur) {
                continue;
            }
            if self.truncation.mode == TruncationMode::Halt {
                break;
            }
            let cdf = self.reentry_cdf(&cur)?;
            let back = cdf.last().copied().unwrap_or(0.0);
            if rng.uniform() >= back {
                break;
            }
            let y = support.point(Self::draw_from(&cdf, rng).expect("non-empty support"));
            cur.copy_from_slice(y.coords());
            steps.push(JUMP);
            reentries.push(y.clone());
        }
        Ok(SoupTrajectory { label, start, steps, reentries, stop_reason: StopReason::ExitedRegion })
    }

    /// One soup at level `u_max`. The stream is consumed as: Poisson count,
    /// then per trajectory its label, start point and walk.
    pub fn sample(&self, u_max: f64, rng: &mut RngStream) -> Result<TrajectorySoup> {
        if !(u_max >= 0.0 && u_max.is_finite()) {
            return Err(Error::input(format!("u_max must be finite and nonnegative, got {u_max}")));
        }
        let lambda = u_max * self.capacity();
        let n = if lambda > 0.0 {
            let dist = Poisson::new(lambda).map_err(|e| Error::input(format!("Poisson intensity {lambda}: {e}")))?;
            rng.sample::<f64, _>(dist) as u64
        } else {
            0
        };
        let mut trajectories = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let label = u_max * rng.uniform();
            let start = Self::draw_from(&self.start_cdf, rng).expect("non-empty support");
            trajectories.push(self.forward_walk(label, start, rng)?);
        }
        Ok(TrajectorySoup {
            window: self.window.clone(),
            u_max,
            capacity: self.capacity(),
            truncation: self.truncation.clone(),
            lineage: rng.lineage_parts().to_vec(),
            trajectories,
        })
    }
}

/// `cap(K') · max_{y ∈ K'} g(x - y)` maximised over points just outside `r`,
/// using `g(z) <= g(|z|_∞ e_1)` (coordinate monotonicity of `g`).
fn halt_bound_for(r: &Region, window: &Sites, measure: &EquilibriumMeasure, table: &GreenTable) -> Result<f64> {
    let (blo, bhi) = r.bounding_box();
    let (wlo, whi) = window.bounding_box();
    let gap = match r {
        Region::Box { .. } | Region::LinfBall { .. } => {
            let g = wlo.iter().zip(&blo).map(|(w, b)| w - b).chain(bhi.iter().zip(whi).map(|(b, w)| b - w)).min();
            g.unwrap_or(0) + 1
        }
        _ => return Err(Error::input("halting needs a box-shaped stop region")),
    };
    if gap <= 0 {
        return Ok(1.0);
    }
    let mut e1 = vec![0i64; window.dim()];
    e1[0] = gap;
    Ok((measure.capacity() * table.get_coords(&e1)?).min(1.0))
}

fn derive_halt_box(
    lo: &[i64],
    hi: &[i64],
    measure: &EquilibriumMeasure,
    table: &GreenTable,
    policy: &TruncationPolicy,
) -> Result<Truncation> {
    let d = lo.len();
    let bound = |gap: i64| -> Result<f64> {
        let mut e1 = vec![0i64; d];
        e1[0] = gap;
        Ok(measure.capacity() * table.get_coords(&e1)?)
    };
    let cap = policy.radius_cap as i64;
    if bound(cap + 1)? > policy.delta {
        return Err(Error::Config(format!(
            "no stop box of margin <= {} brings the re-entry bound below delta = {:e}; \
             use a larger delta, a larger radius cap, or re-entry sampling",
            policy.radius_cap, policy.delta
        )));
    }
    // smallest margin m with bound(m + 1) <= delta
    let (mut a, mut b) = (0i64, cap);
    while a < b {
        let mid = (a + b) / 2;
        if bound(mid + 1)? <= policy.delta {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    let lower = LatticePoint::new(lo.iter().map(|l| l - a).collect());
    let sides = lo.iter().zip(hi).map(|(l, h)| (h - l + 1 + 2 * a) as u64).collect();
    Ok(Truncation {
        mode: TruncationMode::Halt,
        delta: policy.delta,
        stop_region: Region::Box { lower, sides },
        certified_error: bound(a + 1)?,
    })
}

/// Build a sampler for `window` and draw one soup.
pub fn sample_soup(
    window: &Sites,
    u_max: f64,
    policy: &TruncationPolicy,
    table: Arc<GreenTable>,
    rng: &mut RngStream,
) -> Result<TrajectorySoup> {
    Sampler::new(window.clone(), table, policy)?.sample(u_max, rng)
}
