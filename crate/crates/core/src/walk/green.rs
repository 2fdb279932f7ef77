//! The free Green function `g(x) = sum_n P_0[X_n = x]` of simple random walk.
//!
//! Two independent evaluation routes:
//!
//! * `BesselProduct`: `g(x) = d * int_0^inf prod_i e^{-t} I_{|x_i|}(t) dt`,
//!   adaptive quadrature on `[0, T]` plus a term-by-term integrated asymptotic
//!   tail on `[T, inf)`.
//! * `Fourier`: `g(x) = (2 pi)^{-d} int cos(x.theta) / (1 - (1/d) sum cos theta_i)`.
//!   One angle is integrated in closed form,
//!   `(1/2pi) int cos(k t)/(A - cos t) dt = rho^k / sqrt(A^2 - 1)`,
//!   and the remaining `(d-1)`-cube is split into pyramids around the
//!   singular corner (Duffy), on which the integrand is analytic, then
//!   integrated by tensor Gauss–Legendre with increasing order.
//!
//! `KilledExtrapolation` is a coarse third route built on killed Green
//! functions of growing boxes; it is a sanity check, not a precision method.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::bessel::{asymptotic_coeffs, scaled_bessel_i};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::lattice::LatticePoint;
use crate::quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenMethod {
    BesselProduct,
    Fourier,
    KilledExtrapolation,
}

/// Largest `|x|_inf` accepted by the Bessel route unless overridden.
pub const DEFAULT_BESSEL_CAP: u64 = 4096;

const TAIL_TERMS: usize = 16;
const ABS_TOL: f64 = 1e-12;

pub fn green(d: usize, x: &LatticePoint, method: GreenMethod) -> Result<f64> {
    x.check_dim(d)?;
    if d < 3 {
        return Err(Error::input(format!("the walk is recurrent in d = {d}; need d >= 3")));
    }
    match method {
        GreenMethod::BesselProduct => green_bessel(x, DEFAULT_BESSEL_CAP),
        GreenMethod::Fourier => green_fourier(x),
        GreenMethod::KilledExtrapolation => super::killed::green_by_extrapolation(x),
    }
}

pub(crate) fn green_bessel(x: &LatticePoint, cap: u64) -> Result<f64> {
    let d = x.dim();
    let ks: Vec<u64> = x.coords().iter().map(|c| c.unsigned_abs()).collect();
    let k_max = *ks.iter().max().unwrap_or(&0);
    if k_max > cap {
        return Err(Error::input(format!("|x|_inf = {k_max} exceeds the Bessel-product cap {cap}")));
    }
    let kf = k_max as f64;
    let horizon = 100.0 + 4.0 * kf * kf;
    let n_max = k_max as usize;

    let mut buf = Vec::with_capacity(n_max + 1);
    let integrand = |t: f64| {
        scaled_bessel_i(t, n_max, &mut buf);
        ks.iter().map(|&k| buf[k as usize]).product::<f64>()
    };
    let mut breaks = Vec::new();
    let mut b = 0.5;
    while b < horizon {
        breaks.push(b);
        b *= 2.0;
    }
    // the integrand peaks near t ~ |x|^2 / d; resolve it
    let peak = (ks.iter().map(|&k| (k * k) as f64).sum::<f64>() / d as f64).max(1.0);
    breaks.extend([0.5 * peak, peak, 2.0 * peak].iter().filter(|&&v| v < horizon));
    breaks.sort_by(f64::total_cmp);
    let body = quad::integrate(integrand, 0.0, horizon, &breaks, ABS_TOL / d as f64, 200_000)?;

    // tail: product of the per-coordinate expansions, integrated term by term
    let mut poly = vec![1.0];
    for &k in &ks {
        let c = asymptotic_coeffs(k, TAIL_TERMS);
        let mut next = vec![0.0; TAIL_TERMS];
        for (i, pi) in poly.iter().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                if i + j < TAIL_TERMS {
                    next[i + j] += pi * cj;
                }
            }
        }
        poly = next;
    }
    let half_d = d as f64 / 2.0;
    let tail: f64 = poly
        .iter()
        .enumerate()
        .map(|(j, cj)| cj * horizon.powf(1.0 - half_d - j as f64) / (half_d + j as f64 - 1.0))
        .sum::<f64>()
        * (2.0 * PI).powf(-half_d);

    Ok(d as f64 * (body.value + tail))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn green_fourier(x: &LatticePoint) -> Result<f64> {
    let d = x.dim();
    if d > 6 {
        return Err(Error::input(format!("Fourier route supports d <= 6, got {d}")));
    }
    let mut ks: Vec<u64> = x.coords().iter().map(|c| c.unsigned_abs()).collect();
    ks.sort_unstable();
    // closed-form angle carries the largest coordinate
    let k_closed = ks.pop().unwrap_or(0);
    let rest = ks; // d - 1 remaining frequencies
    let m = rest.len();

    let mut previous: Option<f64> = None;
    let mut last_diff = f64::INFINITY;
    for &order in &[16usize, 24, 32, 48, 64, 96] {
        let (z, w) = gauss_legendre(order);
        // nodes on [0, 1]
        let s_nodes: Vec<f64> = z.iter().map(|v| 0.5 * (v + 1.0)).collect();
        let s_weights: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
        let mut total = 0.0;
        let mut theta = vec![0.0; m];
        let mut idx = vec![0usize; m.saturating_sub(1)];
        for pivot in 0..m {
            // pyramid where theta_pivot is the largest angle: theta_pivot = t,
            // theta_i = t * s_i otherwise; Jacobian t^{m-1}
            let mut pyramid = 0.0;
            for (ti, &tn) in s_nodes.iter().enumerate() {
                let t = PI * tn;
                let wt = PI * s_weights[ti] * t.powi(m as i32 - 1);
                idx.iter_mut().for_each(|v| *v = 0);
                loop {
                    let mut wprod = wt;
                    let mut r = 0;
                    for (i, th) in theta.iter_mut().enumerate() {
                        if i == pivot {
                            *th = t;
                        } else {
                            *th = t * s_nodes[idx[r]];
                            wprod *= s_weights[idx[r]];
                            r += 1;
                        }
                    }
                    pyramid += wprod * fourier_integrand(&theta, &rest, k_closed);
                    // odometer over the m - 1 free coordinates
                    let mut j = 0;
                    while j < idx.len() {
                        idx[j] += 1;
                        if idx[j] < order {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == idx.len() {
                        break;
                    }
                }
            }
            total += pyramid;
        }
        let value = d as f64 * total / PI.powi(m as i32);
        if let Some(prev) = previous {
            last_diff = (value - prev).abs();
            if last_diff < 1e-11 {
                return Ok(value);
            }
        }
        previous = Some(value);
    }
    Err(Error::numeric("Fourier cubature did not stabilise", last_diff))
}

/// `prod_i cos(k_i theta_i) * rho^{k_closed} / sqrt(A^2 - 1)` with
/// `A = d - sum cos theta_i` over the non-closed angles.
fn fourier_integrand(theta: &[f64], ks: &[u64], k_closed: u64) -> f64 {
    // A - 1 = sum 2 sin^2(theta/2), computed without cancellation
    let y: f64 = theta.iter().map(|&t| 2.0 * (0.5 * t).sin().powi(2)).sum();
    if y == 0.0 {
        return 0.0;
    }
    let root = (y * (y + 2.0)).sqrt();
    let decay = if k_closed == 0 { 1.0 } else { (-(k_closed as f64) * (y + root).ln_1p()).exp() };
    let osc: f64 = theta.iter().zip(ks).map(|(&t, &k)| if k == 0 { 1.0 } else { (k as f64 * t).cos() }).product();
    osc * decay / root
}

/// Green function values cached on canonical representatives.
///
/// Reads are concurrent; a missing entry is computed outside the lock and
/// inserted under the write lock, so concurrent misses at worst duplicate work
/// and always store identical values.
#[derive(Debug)]
pub struct GreenTable {
    dim: usize,
    method: GreenMethod,
    bessel_cap: u64,
    values: RwLock<HashMap<LatticePoint, f64>>,
}

impl GreenTable {
    pub fn new(dim: usize, method: GreenMethod) -> Result<Self> {
        if dim < 3 {
            return Err(Error::input(format!("Green table needs d >= 3, got {dim}")));
        }
        Ok(GreenTable { dim, method, bessel_cap: DEFAULT_BESSEL_CAP, values: RwLock::new(HashMap::new()) })
    }

    pub fn with_bessel_cap(mut self, cap: u64) -> Self {
        self.bessel_cap = cap;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn method(&self) -> GreenMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.values.read().expect("green table lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn compute(&self, key: &LatticePoint) -> Result<f64> {
        match self.method {
            GreenMethod::BesselProduct => green_bessel(key, self.bessel_cap),
            m => green(self.dim, key, m),
        }
    }

    pub fn get(&self, x: &LatticePoint) -> Result<f64> {
        x.check_dim(self.dim)?;
        let key = x.canonical();
        if let Some(&v) = self.values.read().expect("green table lock").get(&key) {
            return Ok(v);
        }
        let v = self.compute(&key)?;
        self.values.write().expect("green table lock").insert(key, v);
        Ok(v)
    }

    /// [`get`](Self::get) on raw coordinates, skipping the point allocation on a hit.
    pub fn get_coords(&self, x: &[i64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        let mut key: Vec<i64> = x.iter().map(|c| c.abs()).collect();
        key.sort_unstable();
        if let Some(&v) = self.values.read().expect("green table lock").get(key.as_slice()) {
            return Ok(v);
        }
        self.get(&LatticePoint::new(key))
    }

    /// `g(x - y)`.
    pub fn between(&self, x: &LatticePoint, y: &LatticePoint) -> Result<f64> {
        self.get(&x.sub(y)?)
    }

    /// Fill the cache for many displacements at once.
    pub fn prefetch(&self, displacements: impl IntoIterator<Item = LatticePoint>, exec: Exec) -> Result<()> {
        let mut missing: Vec<LatticePoint> = {
            let guard = self.values.read().expect("green table lock");
            displacements.into_iter().map(|x| x.canonical()).filter(|k| !guard.contains_key(k)).collect()
        };
        missing.sort();
        missing.dedup();
        if missing.is_empty() {
            return Ok(());
        }
        let computed = exec::map_slice(&missing, exec, |k| self.compute(k));
        let mut guard = self.values.write().expect("green table lock");
        for (k, v) in missing.into_iter().zip(computed) {
            guard.insert(k, v?);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WATSON_3D: f64 = 1.516_386_059_151_978;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec())
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (z, w) = gauss_legendre(10);
        let s: f64 = z.iter().zip(&w).map(|(x, wi)| wi * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn origin_in_three_dimensions() {
        let b = green(3, &p(&[0, 0, 0]), GreenMethod::BesselProduct).unwrap();
        let f = green(3, &p(&[0, 0, 0]), GreenMethod::Fourier).unwrap();
        assert!((b - WATSON_3D).abs() < 1e-9, "bessel {b}");
        assert!((f - WATSON_3D).abs() < 1e-9, "fourier {f}");
    }

    #[test]
    fn unit_vector_mean_value() {
        let g0 = green(3, &p(&[0, 0, 0]), GreenMethod::BesselProduct).unwrap();
        let g1 = green(3, &p(&[1, 0, 0]), GreenMethod::BesselProduct).unwrap();
        assert!((g1 - (g0 - 1.0)).abs() < 1e-9);
        assert!((g1 - 0.516_386_059_1).abs() < 1e-9);
    }

    #[test]
    fn known_origin_values() {
        // P(d) = g(0) for d = 4, 5, 6
        let known = [(4usize, 1.239_467_121_8), (5, 1.156_308_125_2), (6, 1.116_963_373_9)];
        for (d, v) in known {
            let g = green(d, &LatticePoint::origin(d), GreenMethod::BesselProduct).unwrap();
            assert!((g - v).abs() < 1e-7, "d={d}: {g}");
        }
    }

    #[test]
    fn symmetric_under_hyperoctahedral_group() {
        let a = green(3, &p(&[2, -1, 0]), GreenMethod::BesselProduct).unwrap();
        let b = green(3, &p(&[0, 1, -2]), GreenMethod::BesselProduct).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recurrent_dimensions_rejected() {
        assert!(green(2, &LatticePoint::origin(2), GreenMethod::BesselProduct).is_err());
    }

    #[test]
    fn table_caches_canonical_keys() {
        let t = GreenTable::new(3, GreenMethod::BesselProduct).unwrap();
        let a = t.get(&p(&[1, -2, 0])).unwrap();
        let b = t.get(&p(&[0, 2, 1])).unwrap();
        assert_eq!(a, b);
        assert_eq!(t.len(), 1);
    }
}
