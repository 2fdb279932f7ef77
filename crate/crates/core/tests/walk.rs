mod common;

use std::collections::HashMap;

use interlace_core::walk::{
    escape_probability_l1, green, harnack_constant_in, simulate_path, GreenMethod, GreenTable, KilledDomain, StopRule,
};
use interlace_core::{Exec, LatticePoint, Region, RngStream, Sites};
use proptest::prelude::*;

fn all_points(d: usize, r: i64) -> Vec<LatticePoint> {
    Region::LinfBall { center: LatticePoint::origin(d), radius: r as u64 }.points().unwrap()
}

#[test]
fn mean_value_identity() {
    for d in [3, 4] {
        let table = GreenTable::new(d, GreenMethod::BesselProduct).unwrap();
        for x in all_points(d, 3) {
            let avg: f64 = x.neighbors().map(|y| table.get(&y).unwrap()).sum::<f64>() / (2 * d) as f64;
            let delta = if x.norm(interlace_core::Norm::L1) == 0 { 1.0 } else { 0.0 };
            let g = table.get(&x).unwrap();
            assert!((g - delta - avg).abs() <= 1e-7, "d={d} x={x}: {g} vs {}", delta + avg);
        }
    }
}

#[test]
fn bessel_and_fourier_agree() {
    for d in [3, 4] {
        let mut seen = std::collections::HashSet::new();
        for x in all_points(d, 5) {
            let c = x.canonical();
            if !seen.insert(c.clone()) {
                continue;
            }
            let a = green(d, &c, GreenMethod::BesselProduct).unwrap();
            let b = green(d, &c, GreenMethod::Fourier).unwrap();
            assert!((a - b).abs() <= 1e-6, "d={d} x={c}: {a} vs {b}");
        }
    }
}

#[test]
fn killed_extrapolation_is_close() {
    let a = green(3, &LatticePoint::origin(3), GreenMethod::KilledExtrapolation).unwrap();
    assert!((a - 1.516_386_059_1).abs() < 1e-2, "{a}");
}

#[test]
fn exit_distribution_is_permutation_symmetric() {
    let ball = Region::l2_ball(LatticePoint::origin(3), 10);
    let root = RngStream::from_seed(5);
    // exit sites whose largest |coordinate| sits strictly on one axis
    let mut counts = [0.0f64; 3];
    for r in 0..10_000 {
        let t = simulate_path(&LatticePoint::origin(3), &StopRule::exit(ball.clone()), &mut root.split(r));
        let c: Vec<i64> = t.end().coords().iter().map(|v| v.abs()).collect();
        if let Some(axis) = (0..3).find(|&i| (0..3).all(|j| j == i || c[i] > c[j])) {
            counts[axis] += 1.0;
        }
    }
    let total: f64 = counts.iter().sum();
    let (chi2, p) = interlace_core::stats::chi_square(&counts, &[total / 3.0; 3]);
    assert!(p > 1e-4, "chi2 = {chi2}, counts = {counts:?}");
}

#[test]
fn escape_bracket_contains_reciprocal_green() {
    let table = GreenTable::new(3, GreenMethod::BesselProduct).unwrap();
    let est = escape_probability_l1(&LatticePoint::origin(3), 20_000, &RngStream::from_seed(8), &table, Exec::Parallel).unwrap();
    let exact = 1.0 / table.get(&LatticePoint::origin(3)).unwrap();
    assert!(est.estimate.z_score(exact).abs() < 4.0, "{est:?}");
    assert!(est.estimate.mean >= 1.0 - 4.0 / 5.0);
}

fn l2_sites(r: u64) -> Sites {
    Sites::from_region(&Region::l2_ball(LatticePoint::origin(3), r)).unwrap()
}

#[test]
fn harnack_bound_holds_for_random_harmonic_functions() {
    let (u1, u2) = (l2_sites(1), l2_sites(4));
    let domain = KilledDomain::from_region(&Region::l2_ball(LatticePoint::origin(3), 8)).unwrap();
    let k = harnack_constant_in(&u1, &u2, &domain).unwrap();
    assert!(k >= 1.0);
    let boundary = domain.sites().boundary();
    let root = RngStream::from_seed(77);
    for trial in 0..20 {
        let mut s = root.split(trial);
        let data: HashMap<LatticePoint, f64> = boundary.iter().map(|p| (p.clone(), s.uniform().powi(4))).collect();
        let f = domain.solve_dirichlet(&data).unwrap();
        let vals: Vec<f64> = u1.points().iter().map(|p| f.get(p).unwrap()).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi <= k * lo * (1.0 + 1e-9), "trial {trial}: {hi} > {k} * {lo}");
    }
}

#[test]
fn dirichlet_matches_fixed_point_iteration() {
    let region = Region::LinfBall { center: LatticePoint::origin(3), radius: 2 };
    let domain = KilledDomain::from_region(&region).unwrap();
    let mut s = RngStream::from_seed(3);
    let data: HashMap<LatticePoint, f64> = domain.sites().boundary().into_iter().map(|p| (p, s.uniform())).collect();
    let f = domain.solve_dirichlet(&data).unwrap();
    assert!(f.max_residual() <= 1e-10);
    let (blo, bhi) = f.boundary_range();
    let (ilo, ihi) = f.interior_range();
    assert!(blo <= ilo && ihi <= bhi);
    let pts = domain.sites().points().to_vec();
    let mut v: HashMap<LatticePoint, f64> = pts.iter().map(|p| (p.clone(), 0.0)).collect();
    for _ in 0..2000 {
        let next: HashMap<LatticePoint, f64> = pts
            .iter()
            .map(|p| {
                let avg = p.neighbors().map(|q| v.get(&q).or(data.get(&q)).copied().unwrap()).sum::<f64>() / 6.0;
                (p.clone(), avg)
            })
            .collect();
        v = next;
    }
    for p in &pts {
        assert!((v[p] - f.get(p).unwrap()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn killed_green_symmetric_and_dominated(r in 1u64..4, xs in prop::collection::vec(-3i64..=3, 6)) {
        let table = GreenTable::new(3, GreenMethod::BesselProduct).unwrap();
        let small = KilledDomain::from_region(&Region::LinfBall { center: LatticePoint::origin(3), radius: r }).unwrap();
        let big = KilledDomain::from_region(&Region::LinfBall { center: LatticePoint::origin(3), radius: r + 1 }).unwrap();
        let x = LatticePoint::new(xs[..3].to_vec());
        let y = LatticePoint::new(xs[3..].to_vec());
        let gxy = small.green(&x, &y);
        prop_assert!((gxy - small.green(&y, &x)).abs() <= 1e-10);
        prop_assert!(gxy >= 0.0 && gxy <= table.between(&x, &y).unwrap() + 1e-10);
        prop_assert!(gxy <= big.green(&x, &y) + 1e-10);
    }

    #[test]
    fn one_step_drift_dominates_chain(z in prop::collection::vec(-6i64..=6, 3..=10)) {
        let d = z.len() as u64;
        let m: u64 = z.iter().map(|c| c.unsigned_abs()).sum();
        let p = interlace_core::walk::up_probability(d, m);
        let p = num_traits::ToPrimitive::to_f64(&p).unwrap();
        prop_assert!(common::outward_step_probability(&z) >= p - 1e-15);
    }

    #[test]
    fn green_is_symmetric(xs in prop::collection::vec(-6i64..=6, 3..=5), flips in any::<u8>()) {
        let d = xs.len();
        let table = GreenTable::new(d, GreenMethod::BesselProduct).unwrap();
        let mut ys: Vec<i64> = xs.iter().enumerate().map(|(i, &c)| if flips >> i & 1 == 1 { -c } else { c }).collect();
        ys.reverse();
        let a = green(d, &LatticePoint::new(xs), GreenMethod::BesselProduct).unwrap();
        let b = table.get(&LatticePoint::new(ys)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!(a > 0.0 && a <= table.get(&LatticePoint::origin(d)).unwrap());
    }
}
