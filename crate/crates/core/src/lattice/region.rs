use std::borrow::Borrow;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{counting, LatticePoint, Norm};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// Finite subsets of Z^d described by a few integers.
///
/// Boxes are half-open: `lower_i <= x_i < lower_i + sides_i`. Euclidean balls
/// store the squared radius so membership is an integer comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Box { lower: LatticePoint, sides: Vec<u64> },
    L1Ball { center: LatticePoint, radius: u64 },
    L2Ball { center: LatticePoint, radius_sq: u64 },
    LinfBall { center: LatticePoint, radius: u64 },
}

impl Borrow<[i64]> for LatticePoint {
    fn borrow(&self) -> &[i64] {
        &self.0
    }
}

impl Region {
    /// The cube `lower + [0, side)^d`.
    pub fn cube(lower: LatticePoint, side: u64) -> Self {
        let d = lower.dim();
        Region::Box { lower, sides: vec![side; d] }
    }

    /// Euclidean ball with integer radius.
    pub fn l2_ball(center: LatticePoint, radius: u64) -> Self {
        Region::L2Ball { center, radius_sq: radius * radius }
    }

    /// Euclidean ball of radius `num/den`; membership `|x-c|^2 <= floor(num^2/den^2)`
    /// is exact since `|x-c|^2` is an integer.
    pub fn l2_ball_rational(center: LatticePoint, num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::input("zero denominator in ball radius"));
        }
        let rsq = (num as u128 * num as u128) / (den as u128 * den as u128);
        let radius_sq = u64::try_from(rsq).map_err(|_| Error::input("ball radius too large"))?;
        Ok(Region::L2Ball { center, radius_sq })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lower, .. } => lower.dim(),
            Region::L1Ball { center, .. } | Region::L2Ball { center, .. } | Region::LinfBall { center, .. } => {
                center.dim()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::input("region of dimension 0"));
        }
        if let Region::Box { lower, sides } = self {
            if sides.len() != lower.dim() {
                return Err(Error::Dimension { expected: lower.dim(), got: sides.len() });
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.contains_coords(p.coords())
    }

    pub fn contains_coords(&self, x: &[i64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Region::Box { lower, sides } => x
                .iter()
                .zip(lower.coords())
                .zip(sides)
                .all(|((&xi, &lo), &s)| xi >= lo && ((xi - lo) as u64) < s),
            Region::L1Ball { center, radius } => {
                x.iter().zip(center.coords()).map(|(a, b)| (a - b).unsigned_abs()).sum::<u64>() <= *radius
            }
            Region::L2Ball { center, radius_sq } => {
                x.iter()
                    .zip(center.coords())
                    .map(|(a, b)| {
                        let v = (a - b).unsigned_abs();
                        v * v
                    })
                    .sum::<u64>()
                    <= *radius_sq
            }
            Region::LinfBall { center, radius } => {
                x.iter().zip(center.coords()).all(|(a, b)| (a - b).unsigned_abs() <= *radius)
            }
        }
    }

    /// Inclusive bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        match self {
            Region::Box { lower, sides } => {
                let lo = lower.coords().to_vec();
                // empty sides produce hi < lo
                let hi = lo.iter().zip(sides).map(|(l, s)| l + *s as i64 - 1).collect();
                (lo, hi)
            }
            Region::L1Ball { center, radius } | Region::LinfBall { center, radius } => {
                let r = *radius as i64;
                (center.coords().iter().map(|c| c - r).collect(), center.coords().iter().map(|c| c + r).collect())
            }
            Region::L2Ball { center, radius_sq } => {
                let r = isqrt(*radius_sq) as i64;
                (center.coords().iter().map(|c| c - r).collect(), center.coords().iter().map(|c| c + r).collect())
            }
        }
    }

    /// Exact cardinality where a closed form exists, bounding-box volume for
    /// Euclidean balls.
    pub fn size_bound(&self) -> u128 {
        match self {
            Region::Box { sides, .. } => sides.iter().map(|&s| s as u128).product(),
            Region::LinfBall { radius, .. } => (2 * *radius as u128 + 1).pow(self.dim() as u32),
            Region::L1Ball { radius, .. } => {
                let n = ball_count_small(self.dim(), *radius);
                n.unwrap_or(u128::MAX)
            }
            Region::L2Ball { .. } => {
                let (lo, hi) = self.bounding_box();
                lo.iter().zip(&hi).map(|(l, h)| (h - l + 1).max(0) as u128).product()
            }
        }
    }

    fn check_cap(&self, cap: u64) -> Result<()> {
        let size = self.size_bound();
        if size > cap as u128 {
            return Err(Error::Size { what: "region".into(), size, cap: cap as u128 });
        }
        Ok(())
    }

    /// All points, in lexicographic order.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<LatticePoint>> {
        self.validate()?;
        self.check_cap(cap)?;
        let (lo, hi) = self.bounding_box();
        let mut out = Vec::new();
        if lo.iter().zip(&hi).any(|(l, h)| h < l) {
            return Ok(out);
        }
        let mut cur = lo.clone();
        loop {
            if self.contains_coords(&cur) {
                out.push(LatticePoint::new(cur.clone()));
            }
            // odometer, last coordinate fastest
            let mut i = cur.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    cur[i + 1..].copy_from_slice(&lo[i + 1..]);
                    break;
                }
            }
        }
    }

    pub fn points(&self) -> Result<Vec<LatticePoint>> {
        self.enumerate(DEFAULT_ENUMERATION_CAP)
    }

    /// `{x not in U : some neighbour of x is in U}`, lexicographic.
    pub fn boundary(&self) -> Result<Vec<LatticePoint>> {
        Ok(Sites::from_region(self)?.boundary())
    }

    /// `{x in U : some neighbour of x is outside U}`, lexicographic.
    pub fn interior_boundary(&self) -> Result<Vec<LatticePoint>> {
        Ok(Sites::from_region(self)?.interior_boundary())
    }

    pub fn center(&self) -> Option<&LatticePoint> {
        match self {
            Region::Box { .. } => None,
            Region::L1Ball { center, .. } | Region::L2Ball { center, .. } | Region::LinfBall { center, .. } => {
                Some(center)
            }
        }
    }

    pub fn norm(&self) -> Option<Norm> {
        match self {
            Region::Box { .. } => None,
            Region::L1Ball { .. } => Some(Norm::L1),
            Region::L2Ball { .. } => Some(Norm::L2Sq),
            Region::LinfBall { .. } => Some(Norm::Linf),
        }
    }
}

fn ball_count_small(d: usize, r: u64) -> Option<u128> {
    let n = counting::ball_count_l1(d, r);
    u128::try_from(n).ok()
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// A finite, lexicographically indexed point set with a nearest-neighbour table.
#[derive(Clone, Debug)]
pub struct Sites {
    dim: usize,
    points: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
    neighbors: Vec<u32>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

pub const NO_SITE: u32 = u32::MAX;

impl PartialEq for Sites {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl Sites {
    pub fn from_points(d: usize, mut points: Vec<LatticePoint>) -> Result<Self> {
        for p in &points {
            p.check_dim(d)?;
        }
        points.sort();
        points.dedup();
        if points.len() >= NO_SITE as usize {
            return Err(Error::Size { what: "site set".into(), size: points.len() as u128, cap: NO_SITE as u128 });
        }
        let index: HashMap<LatticePoint, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for p in &points {
            for (k, &c) in p.coords().iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let mut neighbors = Vec::with_capacity(points.len() * 2 * d);
        let mut buf = vec![0i64; d];
        for p in &points {
            for code in 0..2 * d {
                let (axis, sign) = super::move_of_code(code);
                buf.copy_from_slice(p.coords());
                buf[axis] += sign;
                neighbors.push(index.get(buf.as_slice()).map_or(NO_SITE, |&i| i as u32));
            }
        }
        Ok(Sites { dim: d, points, index, neighbors, lo, hi })
    }

    pub fn from_region(r: &Region) -> Result<Self> {
        Self::from_points(r.dim(), r.points()?)
    }

    pub fn from_region_capped(r: &Region, cap: u64) -> Result<Self> {
        Self::from_points(r.dim(), r.enumerate(cap)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LatticePoint {
        &self.points[i]
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.index_of_coords(p.coords())
    }

    #[inline]
    pub fn index_of_coords(&self, x: &[i64]) -> Option<usize> {
        if x.iter().zip(&self.lo).zip(&self.hi).any(|((c, l), h)| c < l || c > h) {
            return None;
        }
        self.index.get(x).copied()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index_of(p).is_some()
    }

    /// Index of the neighbour of site `i` in direction `code`, if it is a site.
    #[inline]
    pub fn neighbor(&self, i: usize, code: usize) -> Option<usize> {
        let v = self.neighbors[i * 2 * self.dim + code];
        (v != NO_SITE).then_some(v as usize)
    }

    pub fn bounding_box(&self) -> (&[i64], &[i64]) {
        (&self.lo, &self.hi)
    }

    pub fn is_subset_of(&self, other: &Sites) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    pub fn interior_boundary(&self) -> Vec<LatticePoint> {
        (0..self.len())
            .filter(|&i| (0..2 * self.dim).any(|c| self.neighbor(i, c).is_none()))
            .map(|i| self.points[i].clone())
            .collect()
    }

    pub fn interior_boundary_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| (0..2 * self.dim).any(|c| self.neighbor(i, c).is_none())).collect()
    }

    pub fn boundary(&self) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            for code in 0..2 * self.dim {
                if self.neighbor(i, code).is_none() {
                    let (axis, sign) = super::move_of_code(code);
                    out.push(p.step(axis, sign));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Whether the nearest-neighbour graph on the sites is connected.
    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for c in 0..2 * self.dim {
                if let Some(j) = self.neighbor(i, c) {
                    if !seen[j] {
                        seen[j] = true;
                        count += 1;
                        stack.push(j);
                    }
                }
            }
        }
        count == self.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_boundary(points: &[LatticePoint]) -> (Vec<LatticePoint>, Vec<LatticePoint>) {
        let inside = |q: &LatticePoint| points.contains(q);
        let mut outer = Vec::new();
        let mut inner = Vec::new();
        for p in points {
            for q in p.neighbors() {
                if !inside(&q) {
                    outer.push(q);
                    inner.push(p.clone());
                }
            }
        }
        outer.sort();
        outer.dedup();
        inner.sort();
        inner.dedup();
        (outer, inner)
    }

    #[test]
    fn l1_ball_radius_one_in_2d() {
        let r = Region::L1Ball { center: LatticePoint::origin(2), radius: 1 };
        assert_eq!(r.points().unwrap().len(), 5);
    }

    #[test]
    fn cube_interior_boundary() {
        let r = Region::cube(LatticePoint::origin(3), 3);
        let ib = r.interior_boundary().unwrap();
        assert_eq!(ib.len(), 26);
        assert!(!ib.contains(&LatticePoint::new(vec![1, 1, 1])));
    }

    #[test]
    fn boundary_of_point() {
        let r = Region::L1Ball { center: LatticePoint::origin(3), radius: 0 };
        let b = r.boundary().unwrap();
        assert_eq!(b.len(), 6);
        assert!(b.iter().all(|p| p.norm(Norm::L1) == 1));
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let r = Region::l2_ball(LatticePoint::new(vec![1, -1, 0]), 2);
        let pts = r.points().unwrap();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(pts.len(), 33); // |x|^2 <= 4 in Z^3
    }

    #[test]
    fn cap_is_enforced() {
        let r = Region::cube(LatticePoint::origin(3), 100);
        match r.enumerate(1000) {
            Err(Error::Size { cap, .. }) => assert_eq!(cap, 1000),
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn rational_l2_radius() {
        // radius 2.5 -> radius^2 = 6.25, floor 6
        let r = Region::l2_ball_rational(LatticePoint::origin(2), 5, 2).unwrap();
        assert_eq!(r, Region::L2Ball { center: LatticePoint::origin(2), radius_sq: 6 });
        assert!(r.contains(&LatticePoint::new(vec![1, 2])));
        assert!(!r.contains(&LatticePoint::new(vec![2, 2])));
    }

    #[test]
    fn boundaries_match_brute_force() {
        let regions = [
            Region::l2_ball(LatticePoint::origin(3), 3),
            Region::L1Ball { center: LatticePoint::new(vec![1, 0, -2]), radius: 2 },
            Region::LinfBall { center: LatticePoint::origin(2), radius: 2 },
            Region::Box { lower: LatticePoint::new(vec![0, 0, 0, 0]), sides: vec![2, 3, 1, 2] },
        ];
        for r in &regions {
            let pts = r.points().unwrap();
            let (outer, inner) = brute_boundary(&pts);
            let b = r.boundary().unwrap();
            let ib = r.interior_boundary().unwrap();
            assert_eq!(b, outer);
            assert_eq!(ib, inner);
            assert!(b.iter().all(|p| !r.contains(p)));
            assert!(ib.iter().all(|p| r.contains(p)));
        }
    }

    #[test]
    fn sites_neighbor_table() {
        let s = Sites::from_region(&Region::cube(LatticePoint::origin(2), 2)).unwrap();
        let i = s.index_of(&LatticePoint::new(vec![0, 0])).unwrap();
        let j = s.neighbor(i, 0).unwrap();
        assert_eq!(s.point(j), &LatticePoint::new(vec![1, 0]));
        assert!(s.neighbor(i, 1).is_none());
        assert!(s.is_connected());
    }
}
