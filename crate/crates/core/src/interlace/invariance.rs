//! Two-sample check that the trace on `K` does not depend on the enclosing
//! window used to sample it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FirstOccupation, Sampler, TruncationPolicy};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::lattice::Sites;
use crate::rng::RngStream;
use crate::stats::Estimate;
use crate::walk::GreenTable;

pub const UNDERPOWERED_REPLICAS: u64 = 100;
const PASS_Z: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteComparison {
    /// A site `x`, or a pair `x & y` for joint vacancy.
    pub event: String,
    pub first: Estimate,
    pub second: Estimate,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub level: f64,
    pub replicas: u64,
    pub comparisons: Vec<SiteComparison>,
    pub max_discrepancy: f64,
    pub max_abs_z: f64,
    pub pass: bool,
    pub underpowered: bool,
}

fn two_sample_z(a: &Estimate, b: &Estimate) -> f64 {
    let diff = a.mean - b.mean;
    let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn vacancy_samples(
    k: &Sites,
    window: &Sites,
    u: f64,
    replicas: u64,
    table: &Arc<GreenTable>,
    rng: &RngStream,
    exec: Exec,
) -> Result<Vec<Vec<bool>>> {
    let sampler = Sampler::new(window.clone(), table.clone(), &TruncationPolicy::default())?;
    exec::map_indexed(replicas, exec, |i| {
        let soup = sampler.sample(u, &mut rng.split(i))?;
        Ok(FirstOccupation::new(&soup, k)?.levels().iter().map(|&l| l > u).collect())
    })
    .into_iter()
    .collect()
}

/// Compare per-site and pairwise vacancy frequencies on `k` sampled through
/// windows `w1` and `w2`; passes when every `|z| <= 4`.
#[allow(clippy::too_many_arguments)]
pub fn window_invariance_test(
    k: &Sites,
    w1: &Sites,
    w2: &Sites,
    u: f64,
    replicas: u64,
    rng: &RngStream,
    table: Arc<GreenTable>,
    exec: Exec,
) -> Result<InvarianceReport> {
    if k.is_empty() || !k.is_subset_of(w1) || !k.is_subset_of(w2) {
        return Err(Error::input("K must be a non-empty subset of both windows"));
    }
    if replicas == 0 {
        return Err(Error::input("window invariance test needs at least one replica"));
    }
    let a = vacancy_samples(k, w1, u, replicas, &table, &rng.split(0), exec)?;
    let b = vacancy_samples(k, w2, u, replicas, &table, &rng.split(1), exec)?;
    let freq = |s: &[Vec<bool>], f: &dyn Fn(&[bool]) -> bool| {
        Estimate::binomial(s.iter().filter(|v| f(v)).count() as u64, s.len() as u64)
    };
    let pts = k.points();
    let mut comparisons = Vec::new();
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let ev = move |v: &[bool]| v[i] && v[j];
            let (first, second) = (freq(&a, &ev), freq(&b, &ev));
            let event = if i == j { pts[i].to_string() } else { format!("{} & {}", pts[i], pts[j]) };
            comparisons.push(SiteComparison { event, z: two_sample_z(&first, &second), first, second });
        }
    }
    let max_discrepancy = comparisons.iter().map(|c| (c.first.mean - c.second.mean).abs()).fold(0.0, f64::max);
    let max_abs_z = comparisons.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    Ok(InvarianceReport {
        level: u,
        replicas,
        comparisons,
        max_discrepancy,
        max_abs_z,
        pass: max_abs_z <= PASS_Z,
        underpowered: replicas < UNDERPOWERED_REPLICAS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticePoint, Region};
    use crate::walk::GreenMethod;

    fn table() -> Arc<GreenTable> {
        Arc::new(GreenTable::new(3, GreenMethod::BesselProduct).unwrap())
    }

    #[test]
    fn level_zero_is_identical() {
        let k = Sites::from_points(3, vec![LatticePoint::origin(3)]).unwrap();
        let w2 = Sites::from_region(&Region::l2_ball(LatticePoint::origin(3), 2)).unwrap();
        let r = window_invariance_test(&k, &k, &w2, 0.0, 200, &RngStream::from_seed(1), table(), Exec::Parallel)
            .unwrap();
        assert!(r.pass);
        assert_eq!(r.max_discrepancy, 0.0);
        assert!(!r.underpowered);
    }

    #[test]
    fn small_runs_are_flagged() {
        let k = Sites::from_points(3, vec![LatticePoint::origin(3)]).unwrap();
        let r = window_invariance_test(&k, &k, &k, 1.0, 50, &RngStream::from_seed(1), table(), Exec::Sequential)
            .unwrap();
        assert!(r.underpowered);
    }

    #[test]
    fn singleton_versus_ball() {
        let k = Sites::from_points(3, vec![LatticePoint::origin(3)]).unwrap();
        let w2 = Sites::from_region(&Region::l2_ball(LatticePoint::origin(3), 3)).unwrap();
        let r = window_invariance_test(&k, &k, &w2, 1.0, 4000, &RngStream::from_seed(5), table(), Exec::Parallel)
            .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn k_outside_window_rejected() {
        let k = Sites::from_points(3, vec![LatticePoint::new(vec![9, 0, 0])]).unwrap();
        let w = Sites::from_points(3, vec![LatticePoint::origin(3)]).unwrap();
        assert!(window_invariance_test(&k, &w, &w, 1.0, 10, &RngStream::from_seed(1), table(), Exec::Sequential)
            .is_err());
    }
}
