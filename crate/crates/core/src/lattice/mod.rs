//! Geometry and combinatorics of the integer lattice.

mod counting;
mod region;

pub use counting::{ball_count_l1, peierls_bound_l1, sphere_count_l1, CountKind, PeierlsBound};
pub use region::{Region, Sites, DEFAULT_ENUMERATION_CAP};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of Z^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    /// Squared Euclidean norm, kept integral.
    L2Sq,
    Linf,
}

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn origin(d: usize) -> Self {
        LatticePoint(vec![0; d])
    }

    /// `sign * e_axis`.
    pub fn unit(d: usize, axis: usize, sign: i64) -> Self {
        let mut c = vec![0; d];
        c[axis] = sign;
        LatticePoint(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    pub fn norm(&self, which: Norm) -> u64 {
        match which {
            Norm::L1 => self.0.iter().map(|c| c.unsigned_abs()).sum(),
            Norm::L2Sq => self.0.iter().map(|c| c.unsigned_abs() * c.unsigned_abs()).sum(),
            Norm::Linf => self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0),
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() == d {
            Ok(())
        } else {
            Err(Error::Dimension { expected: d, got: self.dim() })
        }
    }

    pub fn sub(&self, other: &LatticePoint) -> Result<LatticePoint> {
        other.check_dim(self.dim())?;
        Ok(LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &LatticePoint) -> Result<LatticePoint> {
        other.check_dim(self.dim())?;
        Ok(LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// `self` shifted by `sign` along `axis`.
    pub fn step(&self, axis: usize, sign: i64) -> LatticePoint {
        let mut c = self.0.clone();
        c[axis] += sign;
        LatticePoint(c)
    }

    /// The 2d nearest neighbours, ordered `+e_1, -e_1, +e_2, ...`.
    pub fn neighbors(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..2 * self.dim()).map(move |code| {
            let (axis, sign) = move_of_code(code);
            self.step(axis, sign)
        })
    }

    /// Sorted absolute coordinates: a canonical representative under the
    /// hyperoctahedral group (coordinate permutations and sign flips).
    pub fn canonical(&self) -> LatticePoint {
        let mut c: Vec<i64> = self.0.iter().map(|v| v.abs()).collect();
        c.sort_unstable();
        LatticePoint(c)
    }

    pub fn dist(&self, other: &LatticePoint, which: Norm) -> u64 {
        debug_assert_eq!(self.dim(), other.dim());
        let diff: Vec<u64> = self.0.iter().zip(&other.0).map(|(a, b)| (a - b).unsigned_abs()).collect();
        match which {
            Norm::L1 => diff.iter().sum(),
            Norm::L2Sq => diff.iter().map(|v| v * v).sum(),
            Norm::Linf => diff.iter().copied().max().unwrap_or(0),
        }
    }
}

impl std::fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

/// Step codes: `2*axis` is `+e_axis`, `2*axis + 1` is `-e_axis`.
#[inline]
pub fn move_of_code(code: usize) -> (usize, i64) {
    (code / 2, if code.is_multiple_of(2) { 1 } else { -1 })
}

#[inline]
pub fn code_of_move(axis: usize, sign: i64) -> usize {
    2 * axis + usize::from(sign < 0)
}
