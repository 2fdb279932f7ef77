//! Equilibrium measures, capacities and entrance probabilities of finite sets.
//!
//! A walk started outside `K` enters through `∂_int K`, and a point of `K`
//! whose neighbours all lie in `K` cannot escape, so `e_K` lives on `∂_int K`.
//! The Green system is therefore solved on that support only.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::lattice::{LatticePoint, Norm, Region, Sites};
use crate::rng::RngStream;
use crate::stats::Estimate;
use crate::walk::{random_step, GreenTable};

/// Largest support on which the dense Green system is solved.
pub const DEFAULT_SUPPORT_CAP: usize = 4000;

/// Entrance probabilities above one by more than this are reported before clamping.
const CLAMP_REPORT: f64 = 1e-9;

pub struct EquilibriumMeasure {
    set: Sites,
    support: Sites,
    weights: Vec<f64>,
    total: f64,
    residual: f64,
    factor: Cholesky<f64, Dyn>,
}

impl std::fmt::Debug for EquilibriumMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EquilibriumMeasure")
            .field("set", &self.set.len())
            .field("support", &self.support.len())
            .field("total", &self.total)
            .field("residual", &self.residual)
            .finish()
    }
}

impl EquilibriumMeasure {
    /// The set `K` itself.
    pub fn set(&self) -> &Sites {
        &self.set
    }

    /// `∂_int K`, the points carrying weight.
    pub fn support(&self) -> &Sites {
        &self.support
    }

    /// Weights aligned with `support().points()`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, p: &LatticePoint) -> f64 {
        self.support.index_of(p).map_or(0.0, |i| self.weights[i])
    }

    pub fn capacity(&self) -> f64 {
        self.total
    }

    /// `max |Σ_y g(x-y) e(y) - 1|` over the support.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    fn green_row(&self, x: &[i64], table: &GreenTable) -> Result<DVector<f64>> {
        let mut diff = vec![0i64; x.len()];
        let mut row = DVector::zeros(self.support.len());
        for (j, y) in self.support.points().iter().enumerate() {
            for (k, (a, b)) in x.iter().zip(y.coords()).enumerate() {
                diff[k] = a - b;
            }
            row[j] = table.get_coords(&diff)?;
        }
        Ok(row)
    }

    /// `P_x[H_K < ∞]`, clamped to `[0, 1]`.
    pub fn entrance_probability(&self, x: &LatticePoint, table: &GreenTable) -> Result<f64> {
        x.check_dim(self.set.dim())?;
        if self.set.contains(x) {
            return Ok(1.0);
        }
        let row = self.green_row(x.coords(), table)?;
        let p = row.iter().zip(&self.weights).map(|(g, e)| g * e).sum::<f64>();
        if p > 1.0 + CLAMP_REPORT {
            log::warn!("entrance probability {p} at {x} exceeds one; clamped");
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Law of the entrance point `X_{H_K}` from `x ∉ K`, on `support()`, as
    /// sub-probability weights summing to `P_x[H_K < ∞]`.
    pub fn harmonic_measure(&self, x: &LatticePoint, table: &GreenTable) -> Result<Vec<f64>> {
        x.check_dim(self.set.dim())?;
        if let Some(i) = self.support.index_of(x) {
            let mut h = vec![0.0; self.support.len()];
            h[i] = 1.0;
            return Ok(h);
        }
        if self.set.contains(x) {
            return Err(Error::input(format!("{x} is inside K but not on its interior boundary")));
        }
        let row = self.green_row(x.coords(), table)?;
        let h = self.factor.solve(&row);
        Ok(h.iter().map(|v| v.max(0.0)).collect())
    }

    /// Residual of the Green system over all of `K`, not only the support.
    pub fn residual_on_set(&self, table: &GreenTable) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in self.set.points() {
            let row = self.green_row(x.coords(), table)?;
            let s = row.iter().zip(&self.weights).map(|(g, e)| g * e).sum::<f64>();
            worst = worst.max((s - 1.0).abs());
        }
        Ok(worst)
    }
}

pub fn equilibrium_measure(k: &Sites, table: &GreenTable) -> Result<EquilibriumMeasure> {
    equilibrium_measure_capped(k, table, DEFAULT_SUPPORT_CAP, Exec::default())
}

pub fn equilibrium_measure_capped(
    k: &Sites,
    table: &GreenTable,
    cap: usize,
    exec: Exec,
) -> Result<EquilibriumMeasure> {
    if k.is_empty() {
        return Err(Error::input("equilibrium measure of the empty set"));
    }
    if k.dim() != table.dim() {
        return Err(Error::Dimension { expected: table.dim(), got: k.dim() });
    }
    let support = Sites::from_points(k.dim(), k.interior_boundary())?;
    let n = support.len();
    if n > cap {
        return Err(Error::Size { what: "equilibrium support".into(), size: n as u128, cap: cap as u128 });
    }
    let pts = support.points();
    let mut displacements = Vec::new();
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[..=i] {
            displacements.push(x.sub(y)?);
        }
    }
    table.prefetch(displacements, exec)?;

    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = table.between(&pts[i], &pts[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let factor = Cholesky::new(g.clone()).ok_or_else(|| {
        let diag_min = (0..n).map(|i| g[(i, i)]).fold(f64::INFINITY, f64::min);
        Error::numeric("Green matrix is not numerically positive definite", diag_min)
    })?;
    let e = factor.solve(&DVector::from_element(n, 1.0));
    let residual = (&g * &e).iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let weights: Vec<f64> = e.iter().copied().collect();
    if let Some(w) = weights.iter().copied().find(|w| *w < -1e-12) {
        return Err(Error::numeric("negative equilibrium weight", w));
    }
    let total = crate::stats::pairwise_sum(&weights);
    Ok(EquilibriumMeasure { set: k.clone(), support, weights, total, residual, factor })
}

pub fn capacity(k: &Sites, table: &GreenTable) -> Result<f64> {
    Ok(equilibrium_measure(k, table)?.capacity())
}

/// `P_x[H_K < ∞] = Σ_y g(x-y) e_K(y)`.
pub fn entrance_probability(x: &LatticePoint, k: &Sites, table: &GreenTable) -> Result<f64> {
    equilibrium_measure(k, table)?.entrance_probability(x, table)
}

/// Outcome of one escape attempt: the walk left the certificate ball at
/// `exit`, or returned to the target first.
pub(crate) enum Attempt {
    Returned,
    Escaped(LatticePoint),
}

/// Step once from `x`, then walk until the target set is hit or the walk
/// leaves `ball`.
pub(crate) fn escape_attempt(x: &LatticePoint, target: &Sites, ball: &Region, rng: &mut RngStream) -> Attempt {
    let d = x.dim();
    let mut cur = x.coords().to_vec();
    loop {
        let (axis, sign) = crate::lattice::move_of_code(random_step(d, rng));
        cur[axis] += sign;
        if target.index_of_coords(&cur).is_some() {
            return Attempt::Returned;
        }
        if !ball.contains_coords(&cur) {
            return Attempt::Escaped(LatticePoint::new(cur));
        }
    }
}

/// Monte Carlo capacity: for each `x ∈ K`, the mean over `replicas` walks of
/// `1{leave B_1(x, d² + diam K) before returning} · (1 - P_z[H_K < ∞])`,
/// `z` the exit point. Each term is an unbiased estimate of `e_K(x)`.
pub fn capacity_mc(k: &Sites, table: &GreenTable, replicas: u64, rng: &RngStream, exec: Exec) -> Result<Estimate> {
    if replicas == 0 {
        return Err(Error::input("capacity_mc needs at least one replica"));
    }
    let measure = equilibrium_measure(k, table)?;
    let d = k.dim();
    let diam = k.points().iter().flat_map(|a| k.points().iter().map(move |b| a.dist(b, Norm::L1))).max().unwrap_or(0);
    let radius = (d * d) as u64 + diam;
    let mut mean = 0.0;
    let mut var = 0.0;
    for (i, x) in k.points().iter().enumerate() {
        let ball = Region::L1Ball { center: x.clone(), radius };
        let stream = rng.split(i as u64);
        let vals: Vec<Result<f64>> = exec::map_indexed(replicas, exec, |r| {
            let mut s = stream.split(r);
            match escape_attempt(x, k, &ball, &mut s) {
                Attempt::Returned => Ok(0.0),
                Attempt::Escaped(z) => Ok(1.0 - measure.entrance_probability(&z, table)?),
            }
        });
        let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
        let est = Estimate::from_values(&vals);
        mean += est.mean;
        var += est.stderr * est.stderr;
    }
    Ok(Estimate { mean, stderr: var.sqrt(), samples: replicas * k.len() as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::GreenMethod;

    fn table(d: usize) -> GreenTable {
        GreenTable::new(d, GreenMethod::BesselProduct).unwrap()
    }

    fn sites(d: usize, pts: &[&[i64]]) -> Sites {
        Sites::from_points(d, pts.iter().map(|c| LatticePoint::new(c.to_vec())).collect()).unwrap()
    }

    #[test]
    fn singleton_capacity_is_reciprocal_green() {
        let t = table(3);
        let cap = capacity(&sites(3, &[&[0, 0, 0]]), &t).unwrap();
        assert!((cap * t.get(&LatticePoint::origin(3)).unwrap() - 1.0).abs() < 1e-12);
        assert!((cap - 0.659_462).abs() < 1e-6);
    }

    #[test]
    fn adjacent_pair() {
        let t = table(3);
        let m = equilibrium_measure(&sites(3, &[&[0, 0, 0], &[1, 0, 0]]), &t).unwrap();
        let g0 = t.get(&LatticePoint::origin(3)).unwrap();
        let w = 1.0 / (2.0 * g0 - 1.0);
        for &e in m.weights() {
            assert!((e - w).abs() < 1e-12);
        }
        assert!((m.capacity() - 0.98387).abs() < 1e-5);
    }

    #[test]
    fn entrance_from_neighbour() {
        let t = table(3);
        let k = sites(3, &[&[0, 0, 0]]);
        let p = entrance_probability(&LatticePoint::new(vec![1, 0, 0]), &k, &t).unwrap();
        assert!((p - 0.34054).abs() < 1e-5);
        assert_eq!(entrance_probability(&LatticePoint::origin(3), &k, &t).unwrap(), 1.0);
    }

    #[test]
    fn solid_cube_uses_interior_boundary_only() {
        let t = table(3);
        let k = Sites::from_region(&Region::cube(LatticePoint::new(vec![-1, -1, -1]), 3)).unwrap();
        let m = equilibrium_measure(&k, &t).unwrap();
        assert_eq!(m.support().len(), 26);
        assert_eq!(m.weight(&LatticePoint::origin(3)), 0.0);
        assert!(m.residual_on_set(&t).unwrap() < 1e-9);
    }

    #[test]
    fn harmonic_measure_sums_to_entrance_probability() {
        let t = table(3);
        let k = sites(3, &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]]);
        let m = equilibrium_measure(&k, &t).unwrap();
        let x = LatticePoint::new(vec![3, -2, 1]);
        let h = m.harmonic_measure(&x, &t).unwrap();
        let p = m.entrance_probability(&x, &t).unwrap();
        assert!((h.iter().sum::<f64>() - p).abs() < 1e-12);
        assert!(h.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn translation_invariance() {
        let t = table(3);
        let a = capacity(&sites(3, &[&[0, 0, 0], &[2, 1, 0]]), &t).unwrap();
        let b = capacity(&sites(3, &[&[5, -3, 7], &[7, -2, 7]]), &t).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_singleton() {
        let t = table(3);
        let k = sites(3, &[&[0, 0, 0]]);
        let est = capacity_mc(&k, &t, 4000, &RngStream::from_seed(3), Exec::Parallel).unwrap();
        assert!(est.mean > 0.0 && est.mean < 1.0);
        assert!(est.z_score(0.659_462).abs() < 4.0, "{est:?}");
        assert!(capacity_mc(&k, &t, 0, &RngStream::from_seed(3), Exec::Parallel).is_err());
    }
}
