//! Walks killed on leaving a finite domain: Green functions, Dirichlet
//! problems and Harnack constants.

use std::collections::HashMap;

use sprs::{FillInReduction, SymmetryCheck, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::lattice::{move_of_code, LatticePoint, Region, Sites};
use crate::rng::RngStream;

pub const DEFAULT_SOLVE_CAP: usize = 200_000;

/// A finite domain `U` with a factorisation of `I - P_U`, where `P_U` is the
/// simple-random-walk kernel restricted to `U`.
pub struct KilledDomain {
    sites: Sites,
    // `None` for a single site, where `I - P_U` is the identity
    factor: Option<LdlNumeric<f64, usize>>,
}

impl std::fmt::Debug for KilledDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KilledDomain").field("sites", &self.sites.len()).finish()
    }
}

impl KilledDomain {
    pub fn new(sites: Sites) -> Result<Self> {
        Self::with_cap(sites, DEFAULT_SOLVE_CAP)
    }

    pub fn from_region(region: &Region) -> Result<Self> {
        Self::new(Sites::from_region(region)?)
    }

    pub fn with_cap(sites: Sites, cap: usize) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::input("killed domain must be non-empty"));
        }
        if sites.len() > cap {
            return Err(Error::Size { what: "killed domain".into(), size: sites.len() as u128, cap: cap as u128 });
        }
        let n = sites.len();
        if n == 1 {
            return Ok(KilledDomain { sites, factor: None });
        }
        let d = sites.dim();
        let hop = 1.0 / (2 * d) as f64;
        let mut tri = TriMat::new((n, n));
        for i in 0..n {
            tri.add_triplet(i, i, 1.0);
            for code in 0..2 * d {
                if let Some(j) = sites.neighbor(i, code) {
                    tri.add_triplet(i, j, -hop);
                }
            }
        }
        let mat = tri.to_csc::<usize>();
        let factor = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .numeric(mat.view())
            .map_err(|e| Error::numeric(format!("LDL factorisation of I - P failed: {e:?}"), f64::NAN))?;
        Ok(KilledDomain { sites, factor: Some(factor) })
    }

    pub fn sites(&self) -> &Sites {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Solve `(I - P_U) f = rhs` over the site index.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(f) => f.solve(rhs),
            None => rhs.to_vec(),
        }
    }

    /// `G_U(site, y)` for every site, i.e. the column of `y` (equivalently,
    /// by reversibility, the row of `y`).
    pub fn column(&self, y: usize) -> Vec<f64> {
        let mut rhs = vec![0.0; self.len()];
        rhs[y] = 1.0;
        self.solve(&rhs)
    }

    /// Expected visits to `y` before leaving `U`, starting from `x`.
    pub fn green(&self, x: &LatticePoint, y: &LatticePoint) -> f64 {
        match (self.sites.index_of(x), self.sites.index_of(y)) {
            (Some(i), Some(j)) => self.column(j)[i],
            _ => 0.0,
        }
    }

    /// The harmonic extension of `boundary_data` (given on `∂U`) into `U`.
    pub fn solve_dirichlet(&self, boundary_data: &HashMap<LatticePoint, f64>) -> Result<HarmonicFunction> {
        let d = self.sites.dim();
        let hop = 1.0 / (2 * d) as f64;
        let mut rhs = vec![0.0; self.len()];
        let mut used = HashMap::new();
        for (i, p) in self.sites.points().iter().enumerate() {
            for code in 0..2 * d {
                if self.sites.neighbor(i, code).is_none() {
                    let (axis, sign) = move_of_code(code);
                    let q = p.step(axis, sign);
                    let v = *boundary_data
                        .get(&q)
                        .ok_or_else(|| Error::input(format!("missing boundary value at {q}")))?;
                    rhs[i] += hop * v;
                    used.insert(q, v);
                }
            }
        }
        let values = self.solve(&rhs);
        Ok(HarmonicFunction { sites: self.sites.clone(), interior: values, boundary: used })
    }
}

/// A function on `U ∪ ∂U`, harmonic in `U`.
#[derive(Clone, Debug)]
pub struct HarmonicFunction {
    sites: Sites,
    interior: Vec<f64>,
    boundary: HashMap<LatticePoint, f64>,
}

impl HarmonicFunction {
    pub fn get(&self, p: &LatticePoint) -> Option<f64> {
        match self.sites.index_of(p) {
            Some(i) => Some(self.interior[i]),
            None => self.boundary.get(p).copied(),
        }
    }

    pub fn interior_values(&self) -> &[f64] {
        &self.interior
    }

    pub fn sites(&self) -> &Sites {
        &self.sites
    }

    /// `max_{x in U} |L f(x)|` with `L f(x) = (1/2d) sum_e f(x+e) - f(x)`.
    pub fn max_residual(&self) -> f64 {
        let d = self.sites.dim();
        let mut worst = 0.0f64;
        for (i, p) in self.sites.points().iter().enumerate() {
            let mut avg = 0.0;
            for code in 0..2 * d {
                avg += match self.sites.neighbor(i, code) {
                    Some(j) => self.interior[j],
                    None => {
                        let (axis, sign) = move_of_code(code);
                        self.boundary[&p.step(axis, sign)]
                    }
                };
            }
            worst = worst.max((avg / (2 * d) as f64 - self.interior[i]).abs());
        }
        worst
    }

    pub fn boundary_range(&self) -> (f64, f64) {
        self.boundary.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn interior_range(&self) -> (f64, f64) {
        self.interior.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

pub fn killed_green(domain: &KilledDomain, x: &LatticePoint, y: &LatticePoint) -> f64 {
    domain.green(x, y)
}

/// `K = max_{x,y in U1} max_{z in ∂_int U2} G_{U3}(x,z) / G_{U3}(y,z)`.
pub fn harnack_constant(u1: &Sites, u2: &Sites, u3: &Sites) -> Result<f64> {
    let domain = KilledDomain::new(u3.clone())?;
    harnack_constant_in(u1, u2, &domain)
}

/// As [`harnack_constant`], reusing an existing factorisation of `U3`.
pub fn harnack_constant_in(u1: &Sites, u2: &Sites, domain: &KilledDomain) -> Result<f64> {
    let u3 = domain.sites();
    if u1.is_empty() {
        return Err(Error::input("U1 must be non-empty"));
    }
    if !u1.is_subset_of(u2) || !u2.is_subset_of(u3) {
        return Err(Error::input("Harnack sets must be nested: U1 ⊆ U2 ⊆ U3"));
    }
    if !u3.is_connected() {
        return Err(Error::input("U3 must be connected"));
    }
    let shell = u2.interior_boundary();
    if shell.is_empty() {
        return Err(Error::input("interior boundary of U2 is empty"));
    }
    let shell_idx: Vec<usize> = shell.iter().map(|z| u3.index_of(z).expect("nested")).collect();
    // G(x, z) for x in U1 via one solve per x (symmetry of the killed kernel)
    let rows: Vec<Vec<f64>> = u1
        .points()
        .iter()
        .map(|x| {
            let col = domain.column(u3.index_of(x).expect("nested"));
            shell_idx.iter().map(|&z| col[z]).collect()
        })
        .collect();
    let mut k = 1.0f64;
    for zi in 0..shell_idx.len() {
        let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r[zi]), hi.max(r[zi])));
        if lo <= 0.0 {
            return Err(Error::numeric("non-positive killed Green function on a connected domain", lo));
        }
        k = k.max(hi / lo);
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub constant: f64,
    pub trials: u64,
    pub violations: u64,
    /// Largest `max_{U1} u / min_{U1} u` seen.
    pub max_ratio: f64,
}

/// Test `max_{U1} u <= K min_{U1} u` on `trials` random nonnegative
/// harmonic functions in `U3`. Even trials put a unit mass at one random
/// point of `∂U3`, odd ones spread `uniform^8` data over it.
pub fn harnack_check(
    u1: &Sites,
    u2: &Sites,
    domain: &KilledDomain,
    trials: u64,
    rng: &RngStream,
    exec: Exec,
) -> Result<HarnackReport> {
    let constant = harnack_constant_in(u1, u2, domain)?;
    let boundary = domain.sites().boundary();
    let ratios: Vec<Result<f64>> = exec::map_indexed(trials, exec, |t| {
        let mut s = rng.split(t);
        let data: HashMap<LatticePoint, f64> = if t % 2 == 0 {
            let hot = s.below(boundary.len() as u64) as usize;
            boundary.iter().enumerate().map(|(i, p)| (p.clone(), if i == hot { 1.0 } else { 0.0 })).collect()
        } else {
            boundary.iter().map(|p| (p.clone(), s.uniform().powi(8))).collect()
        };
        let f = domain.solve_dirichlet(&data)?;
        let (lo, hi) = u1
            .points()
            .iter()
            .map(|p| f.get(p).expect("U1 inside U3"))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Ok(if hi == 0.0 { 1.0 } else { hi / lo })
    });
    let ratios = ratios.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(HarnackReport {
        constant,
        trials,
        violations: ratios.iter().filter(|&&r| r > constant * (1.0 + 1e-9)).count() as u64,
        max_ratio: ratios.iter().copied().fold(1.0, f64::max),
    })
}

/// Coarse `g(x)` from killed Green functions on two boxes, extrapolating the
/// `R^{-(d-2)}` correction away.
pub(crate) fn green_by_extrapolation(x: &LatticePoint) -> Result<f64> {
    let d = x.dim();
    if d > 4 {
        return Err(Error::input("killed extrapolation is limited to d <= 4"));
    }
    let reach = x.norm(crate::lattice::Norm::Linf);
    let (r1, r2) = if d == 3 { (reach + 6, reach + 12) } else { (reach + 3, reach + 6) };
    let origin = LatticePoint::origin(d);
    let at = |r: u64| -> Result<f64> {
        let dom = KilledDomain::from_region(&Region::LinfBall { center: origin.clone(), radius: r })?;
        Ok(dom.green(&origin, x))
    };
    let (g1, g2) = (at(r1)?, at(r2)?);
    let p = (d - 2) as i32;
    let (a, b) = ((r1 as f64).powi(p), (r2 as f64).powi(p));
    Ok((g2 * b - g1 * a) / (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Norm;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec())
    }

    #[test]
    fn singleton_domain() {
        let dom = KilledDomain::new(Sites::from_points(3, vec![p(&[0, 0, 0])]).unwrap()).unwrap();
        assert!((dom.green(&p(&[0, 0, 0]), &p(&[0, 0, 0])) - 1.0).abs() < 1e-14);
        assert_eq!(dom.green(&p(&[1, 0, 0]), &p(&[0, 0, 0])), 0.0);
    }

    #[test]
    fn two_point_domain() {
        let dom = KilledDomain::new(Sites::from_points(3, vec![p(&[0, 0, 0]), p(&[1, 0, 0])]).unwrap()).unwrap();
        assert!((dom.green(&p(&[0, 0, 0]), &p(&[0, 0, 0])) - 36.0 / 35.0).abs() < 1e-14);
        assert!((dom.green(&p(&[1, 0, 0]), &p(&[0, 0, 0])) - 6.0 / 35.0).abs() < 1e-14);
    }

    #[test]
    fn constant_and_linear_data_are_reproduced() {
        let region = Region::cube(p(&[-2, -2, -2]), 5);
        let dom = KilledDomain::from_region(&region).unwrap();
        let bd = region.boundary().unwrap();
        let constant: HashMap<_, _> = bd.iter().map(|q| (q.clone(), 2.5)).collect();
        let f = dom.solve_dirichlet(&constant).unwrap();
        assert!(f.interior_values().iter().all(|v| (v - 2.5).abs() < 1e-12));
        let linear: HashMap<_, _> = bd.iter().map(|q| (q.clone(), q.coords()[0] as f64)).collect();
        let f = dom.solve_dirichlet(&linear).unwrap();
        for (i, q) in dom.sites().points().iter().enumerate() {
            assert!((f.interior_values()[i] - q.coords()[0] as f64).abs() < 1e-12);
        }
        assert!(f.max_residual() < 1e-12);
    }

    #[test]
    fn missing_boundary_value_is_named() {
        let region = Region::cube(p(&[0, 0, 0]), 2);
        let dom = KilledDomain::from_region(&region).unwrap();
        let err = dom.solve_dirichlet(&HashMap::new()).unwrap_err();
        assert!(matches!(err, Error::Input(ref m) if m.contains("missing boundary value")));
    }

    #[test]
    fn singleton_harnack_constant_is_one() {
        let u1 = Sites::from_points(3, vec![p(&[0, 0, 0])]).unwrap();
        let u2 = Sites::from_region(&Region::l2_ball(p(&[0, 0, 0]), 2)).unwrap();
        let u3 = Sites::from_region(&Region::l2_ball(p(&[0, 0, 0]), 4)).unwrap();
        assert_eq!(harnack_constant(&u1, &u2, &u3).unwrap(), 1.0);
    }

    #[test]
    fn nesting_violation_rejected() {
        let u1 = Sites::from_region(&Region::l2_ball(p(&[0, 0, 0]), 3)).unwrap();
        let u2 = Sites::from_region(&Region::l2_ball(p(&[0, 0, 0]), 2)).unwrap();
        let u3 = Sites::from_region(&Region::l2_ball(p(&[0, 0, 0]), 4)).unwrap();
        assert!(matches!(harnack_constant(&u1, &u2, &u3), Err(Error::Input(_))));
    }

    #[test]
    fn killed_green_is_symmetric_and_monotone() {
        let small = KilledDomain::from_region(&Region::l2_ball(p(&[0, 0, 0]), 3)).unwrap();
        let big = KilledDomain::from_region(&Region::l2_ball(p(&[0, 0, 0]), 5)).unwrap();
        let pts = small.sites().points().to_vec();
        for x in pts.iter().step_by(7) {
            for y in pts.iter().step_by(5) {
                let a = small.green(x, y);
                assert!((a - small.green(y, x)).abs() < 1e-12);
                assert!(a <= big.green(x, y) + 1e-12);
                assert!(a > 0.0);
                assert!(x.dist(y, Norm::L1) > 0 || a >= 1.0);
            }
        }
    }

    #[test]
    fn random_harmonic_functions_respect_the_constant() {
        let ball = |r| Sites::from_region(&Region::l2_ball(LatticePoint::origin(3), r)).unwrap();
        let dom = KilledDomain::new(ball(5)).unwrap();
        let rep = harnack_check(&ball(1), &ball(3), &dom, 40, &RngStream::from_seed(2), Exec::Parallel).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.max_ratio <= rep.constant * (1.0 + 1e-9) && rep.max_ratio > 1.0);
    }
}
