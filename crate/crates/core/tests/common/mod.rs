//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use interlace_core::{LatticePoint, RngStream, Sites};

/// All of `Z^d` with `|x|_1 = l`, by walking the cube `[-l, l]^d`.
pub fn enumerate_sphere(d: usize, l: i64) -> u64 {
    let mut x = vec![-l; d];
    let mut count = 0;
    loop {
        if x.iter().map(|c| c.abs()).sum::<i64>() == l {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == d {
                return count;
            }
            if x[i] < l {
                x[i] += 1;
                break;
            }
            x[i] = -l;
            i += 1;
        }
    }
}

/// Reachability sets through vacant sites by bitset transitive closure;
/// windows must have at most 64 sites.
pub fn closure(sites: &Sites, vac: &[bool]) -> Vec<u64> {
    let n = sites.len();
    assert!(n <= 64);
    let mut reach = vec![0u64; n];
    for i in 0..n {
        if !vac[i] {
            continue;
        }
        reach[i] |= 1 << i;
        for j in 0..n {
            if vac[j] && sites.point(i).dist(sites.point(j), interlace_core::Norm::L1) == 1 {
                reach[i] |= 1 << j;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i] >> k & 1 == 1 {
                reach[i] |= reach[k];
            }
        }
    }
    reach
}

pub fn random_field(sites: &Sites, p: f64, rng: &mut RngStream) -> Vec<bool> {
    (0..sites.len()).map(|_| rng.uniform() < p).collect()
}

pub fn cube_sites(d: usize, side: u64) -> Sites {
    Sites::from_region(&interlace_core::Region::cube(LatticePoint::origin(d), side)).unwrap()
}

pub fn sites(d: usize, pts: &[&[i64]]) -> Sites {
    Sites::from_points(d, pts.iter().map(|c| LatticePoint::new(c.to_vec())).collect()).unwrap()
}

/// `(2d - #nonzero(z)) / 2d`: the chance one step increases `|z|_1`.
pub fn outward_step_probability(z: &[i64]) -> f64 {
    let d = z.len();
    let outward: usize = z.iter().map(|&c| if c == 0 { 2 } else { 1 }).sum();
    outward as f64 / (2 * d) as f64
}
