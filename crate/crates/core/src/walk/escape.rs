//! Escape from an ℓ¹ ball, decided by a finite certificate: the walk must
//! reach ℓ¹-radius `d²` without touching `B_1(0, |y|_1)`, after which the
//! exact return probability from the exit point is subtracted.

use serde::{Deserialize, Serialize};

use super::GreenTable;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::lattice::{LatticePoint, Norm, Region, Sites};
use crate::potential::{equilibrium_measure, escape_attempt, Attempt};
use crate::rng::RngStream;
use crate::stats::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeEstimate {
    /// Mean of `1{reach} (1 - P_z[H_B < ∞])`; unbiased for the escape probability.
    pub estimate: Estimate,
    /// Frequency of reaching the certificate radius; an upper bracket.
    pub reach: Estimate,
    /// Largest exact return probability seen at an exit point.
    pub max_return: f64,
    pub radius: u64,
}

impl EscapeEstimate {
    /// `[estimate, reach]` means.
    pub fn bracket(&self) -> (f64, f64) {
        (self.estimate.mean, self.reach.mean)
    }
}

/// `P_y[|X_n|_1 > |y|_1 for all n > 0]`.
pub fn escape_probability_l1(
    y: &LatticePoint,
    replicas: u64,
    rng: &RngStream,
    table: &GreenTable,
    exec: Exec,
) -> Result<EscapeEstimate> {
    if replicas == 0 {
        return Err(Error::input("escape estimate needs at least one replica"));
    }
    let d = y.dim();
    y.check_dim(table.dim())?;
    let r = y.norm(Norm::L1);
    let inner = Sites::from_region(&Region::L1Ball { center: LatticePoint::origin(d), radius: r })?;
    let radius = ((d * d) as u64).max(r + 1);
    let ball = Region::L1Ball { center: LatticePoint::origin(d), radius: radius - 1 };
    let measure = equilibrium_measure(&inner, table)?;

    let outcomes: Vec<Result<Option<f64>>> = exec::map_indexed(replicas, exec, |i| {
        let mut s = rng.split(i);
        match escape_attempt(y, &inner, &ball, &mut s) {
            Attempt::Returned => Ok(None),
            Attempt::Escaped(z) => Ok(Some(measure.entrance_probability(&z, table)?)),
        }
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = outcomes.iter().map(|o| o.map_or(0.0, |h| 1.0 - h)).collect();
    let reached: Vec<bool> = outcomes.iter().map(Option::is_some).collect();
    let max_return = outcomes.iter().flatten().copied().fold(0.0, f64::max);
    Ok(EscapeEstimate {
        estimate: Estimate::from_values(&values),
        reach: Estimate::from_indicators(&reached),
        max_return,
        radius,
    })
}
