//! Simple random walk on Z^d: path sampling, Green functions (free and
//! killed), Dirichlet problems, Harnack constants, and the birth–death chain
//! that dominates `|X_n|_1` from below.

mod bessel;
mod birth_death;
mod escape;
mod green;
mod killed;

pub use bessel::scaled_bessel_i;
pub use birth_death::{birth_death_hit, birth_death_hit_mc, up_probability};
pub use escape::{escape_probability_l1, EscapeEstimate};
pub use green::{green, GreenMethod, GreenTable, DEFAULT_BESSEL_CAP};
pub use killed::{
    harnack_check, harnack_constant, harnack_constant_in, killed_green, HarmonicFunction, HarnackReport, KilledDomain,
    DEFAULT_SOLVE_CAP,
};

use serde::{Deserialize, Serialize};

use crate::lattice::{move_of_code, LatticePoint, Region, Sites};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ExitedRegion,
    HitTarget,
    StepCap,
}

/// When to stop a walk. Rules are checked at every time `n >= 0`, exit and
/// hit before the step cap.
#[derive(Clone, Debug, Default)]
pub struct StopRule {
    pub exit: Option<Region>,
    pub hit: Option<Sites>,
    pub max_steps: Option<u64>,
}

impl StopRule {
    pub fn exit(region: Region) -> Self {
        StopRule { exit: Some(region), ..Default::default() }
    }

    pub fn hit(target: Sites) -> Self {
        StopRule { hit: Some(target), ..Default::default() }
    }

    pub fn steps(n: u64) -> Self {
        StopRule { max_steps: Some(n), ..Default::default() }
    }

    pub fn with_cap(mut self, n: u64) -> Self {
        self.max_steps = Some(n);
        self
    }

    fn check(&self, x: &[i64], n: u64) -> Option<StopReason> {
        if let Some(r) = &self.exit {
            if !r.contains_coords(x) {
                return Some(StopReason::ExitedRegion);
            }
        }
        if let Some(h) = &self.hit {
            if h.index_of_coords(x).is_some() {
                return Some(StopReason::HitTarget);
            }
        }
        match self.max_steps {
            Some(cap) if n >= cap => Some(StopReason::StepCap),
            _ => None,
        }
    }
}

/// A nearest-neighbour path stored as its start and step codes
/// (`2*axis` for `+e_axis`, `2*axis+1` for `-e_axis`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub start: LatticePoint,
    pub steps: Vec<u8>,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> LatticePoint {
        self.points().last().expect("a path has at least its start")
    }

    /// Visited points in order, starting with `start`.
    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        let mut cur = self.start.clone();
        std::iter::once(self.start.clone()).chain(self.steps.iter().map(move |&c| {
            let (axis, sign) = move_of_code(c as usize);
            cur.coords_mut()[axis] += sign;
            cur.clone()
        }))
    }
}

/// Draw a uniform step code among the `2d` unit moves.
#[inline]
pub fn random_step(d: usize, rng: &mut RngStream) -> usize {
    rng.below(2 * d as u64) as usize
}

/// Run a simple random walk from `start` until `stop` fires.
///
/// Without any rule the walk would never stop; callers must supply at least
/// one. A rule set with no step cap that can never fire (e.g. exit from an
/// infinite region) is impossible here since regions are finite.
pub fn simulate_path(start: &LatticePoint, stop: &StopRule, rng: &mut RngStream) -> Trajectory {
    assert!(
        stop.exit.is_some() || stop.max_steps.is_some() || stop.hit.is_some(),
        "a stop rule needs an exit region, a target or a step cap"
    );
    let d = start.dim();
    let mut x = start.coords().to_vec();
    let mut steps = Vec::new();
    let mut n = 0u64;
    loop {
        if let Some(reason) = stop.check(&x, n) {
            return Trajectory { start: start.clone(), steps, stop_reason: reason };
        }
        let code = random_step(d, rng);
        let (axis, sign) = move_of_code(code);
        x[axis] += sign;
        steps.push(code as u8);
        n += 1;
    }
}
