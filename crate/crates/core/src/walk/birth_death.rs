//! The nearest-neighbour chain on N stepping up from `m` with probability
//! `p_m = 1/2 + (1/2)(1 - m/d)_+`, which `|X_n|_1` stochastically dominates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::rng::RngStream;
use crate::stats::Estimate;

pub fn up_probability(d: u64, m: u64) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let slack = if m >= d {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(d - m), BigInt::from(d))
    };
    &half + &half * slack
}

fn ratio(d: u64, l: u64) -> BigRational {
    let p = up_probability(d, l);
    let q = BigRational::one() - &p;
    q / p
}

/// `Q_m[H_b < H~_a]` for `a <= m < b`, exactly.
///
/// With `rho_l = q_l / p_l` and `S(a, n) = sum_{j=a}^{n-1} prod_{i=a+1}^{j} rho_i`:
/// for `a < m` the chain has not yet touched `a`, giving `S(a, m) / S(a, b)`;
/// for `a = m` it must first step up, giving `p_m / S(m, b)`.
pub fn birth_death_hit(d: u64, m: u64, a: u64, b: u64) -> Result<BigRational> {
    if d == 0 {
        return Err(Error::input("dimension must be positive"));
    }
    if !(a <= m && m < b) {
        return Err(Error::input(format!("need a <= m < b, got a={a}, m={m}, b={b}")));
    }
    // partial[j - a] = prod_{i=a+1}^{j} rho_i
    let mut partial = Vec::with_capacity((b - a) as usize);
    let mut prod = BigRational::one();
    partial.push(prod.clone());
    for i in a + 1..b {
        prod *= ratio(d, i);
        partial.push(prod.clone());
    }
    let total: BigRational = partial.iter().cloned().sum();
    if a == m {
        Ok(up_probability(d, m) / total)
    } else {
        let head: BigRational = partial[..(m - a) as usize].iter().cloned().sum();
        Ok(head / total)
    }
}

/// Simulated frequency of `H_b < H~_a` from `m`; replica `r` draws from
/// `rng.split(r)`.
pub fn birth_death_hit_mc(d: u64, m: u64, a: u64, b: u64, replicas: u64, rng: &RngStream, exec: Exec) -> Result<Estimate> {
    if d == 0 {
        return Err(Error::input("dimension must be positive"));
    }
    if !(a <= m && m < b) {
        return Err(Error::input(format!("need a <= m < b, got a={a}, m={m}, b={b}")));
    }
    if replicas == 0 {
        return Err(Error::input("birth_death_hit_mc needs at least one replica"));
    }
    let up: Vec<f64> = (0..b).map(|l| 0.5 + 0.5 * (1.0 - l as f64 / d as f64).max(0.0)).collect();
    let hits = exec::map_indexed(replicas, exec, |r| {
        let mut s = rng.split(r);
        let mut x = m;
        loop {
            if s.uniform() < up[x as usize] {
                x += 1;
            } else {
                x -= 1;
            }
            if x == b {
                return true;
            }
            if x == a {
                return false;
            }
        }
    });
    Ok(Estimate::from_indicators(&hits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn single_step_up() {
        assert_eq!(birth_death_hit(4, 1, 1, 2).unwrap(), r(7, 8));
    }

    #[test]
    fn two_interior_states() {
        assert_eq!(birth_death_hit(4, 1, 1, 3).unwrap(), r(21, 32));
    }

    #[test]
    fn up_probability_saturates_at_one_half() {
        assert_eq!(up_probability(4, 0), r(1, 1));
        assert_eq!(up_probability(4, 4), r(1, 2));
        assert_eq!(up_probability(4, 9), r(1, 2));
    }

    /// Harmonic extension on `{a..b}` by dense Gauss-Jordan over the rationals.
    fn dense_solve(d: u64, a: u64, b: u64) -> Vec<BigRational> {
        let n = (b - a + 1) as usize;
        let mut mat = vec![vec![BigRational::zero(); n + 1]; n];
        mat[0][0] = BigRational::one();
        mat[n - 1][n - 1] = BigRational::one();
        mat[n - 1][n] = BigRational::one();
        for i in 1..n - 1 {
            let p = up_probability(d, a + i as u64);
            mat[i][i] = BigRational::one();
            mat[i][i + 1] = -p.clone();
            mat[i][i - 1] = p - BigRational::one();
        }
        for col in 0..n {
            let piv = (col..n).find(|&r| !mat[r][col].is_zero()).unwrap();
            mat.swap(col, piv);
            let inv = BigRational::one() / mat[col][col].clone();
            for v in mat[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..n {
                if r != col && !mat[r][col].is_zero() {
                    let f = mat[r][col].clone();
                    for c in 0..=n {
                        let t = &f * &mat[col][c];
                        mat[r][c] -= t;
                    }
                }
            }
        }
        mat.into_iter().map(|row| row[n].clone()).collect()
    }

    #[test]
    fn matches_dense_linear_solve() {
        for d in 1..=10 {
            for b in 1..=24 {
                for a in 0..b {
                    let h = dense_solve(d, a, b);
                    for m in a..b {
                        let want = if m == a { up_probability(d, a) * &h[1] } else { h[(m - a) as usize].clone() };
                        assert_eq!(birth_death_hit(d, m, a, b).unwrap(), want, "d={d} m={m} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn monte_carlo_agrees() {
        let rng = RngStream::from_seed(17);
        for (d, m, a, b) in [(4, 1, 1, 3), (3, 2, 0, 8), (6, 5, 5, 12)] {
            let exact: f64 = birth_death_hit(d, m, a, b).unwrap().to_f64().unwrap();
            let est = birth_death_hit_mc(d, m, a, b, 20_000, &rng.split(d), Exec::Parallel).unwrap();
            assert!(est.z_score(exact).abs() < 4.0, "{est:?} vs {exact}");
        }
        assert!(birth_death_hit_mc(4, 1, 1, 3, 0, &rng, Exec::Sequential).is_err());
    }

    #[test]
    fn preconditions() {
        assert!(birth_death_hit(4, 3, 1, 3).is_err());
        assert!(birth_death_hit(4, 0, 1, 3).is_err());
    }
}
