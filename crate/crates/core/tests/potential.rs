mod common;

use interlace_core::potential::{capacity, entrance_probability, equilibrium_measure};
use interlace_core::walk::{simulate_path, GreenMethod, GreenTable, StopRule};
use interlace_core::{Estimate, Exec, LatticePoint, Region, RngStream, Sites};
use proptest::prelude::*;

fn table3() -> GreenTable {
    GreenTable::new(3, GreenMethod::BesselProduct).unwrap()
}

fn random_set(d: usize, n: usize, span: i64, rng: &mut RngStream) -> Sites {
    let pts = (0..n)
        .map(|_| LatticePoint::new((0..d).map(|_| rng.below(2 * span as u64 + 1) as i64 - span).collect()))
        .collect();
    Sites::from_points(d, pts).unwrap()
}

fn union(a: &Sites, b: &Sites) -> Sites {
    let mut pts = a.points().to_vec();
    pts.extend(b.points().iter().cloned());
    Sites::from_points(a.dim(), pts).unwrap()
}

#[test]
fn singleton_capacity_in_several_dimensions() {
    for d in 3..=5 {
        let t = GreenTable::new(d, GreenMethod::BesselProduct).unwrap();
        let k = Sites::from_points(d, vec![LatticePoint::origin(d)]).unwrap();
        let g0 = t.get(&LatticePoint::origin(d)).unwrap();
        assert!((capacity(&k, &t).unwrap() * g0 - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn subadditive_on_random_pairs() {
    let t = table3();
    let root = RngStream::from_seed(11);
    for i in 0..100 {
        let mut s = root.split(i);
        let a = random_set(3, 1 + s.below(4) as usize, 3, &mut s);
        let b = random_set(3, 1 + s.below(4) as usize, 3, &mut s);
        let (ca, cb, cu) = (capacity(&a, &t).unwrap(), capacity(&b, &t).unwrap(), capacity(&union(&a, &b), &t).unwrap());
        assert!(cu <= ca + cb + 1e-9, "{cu} > {ca} + {cb}");
        assert!(cu + 1e-9 >= ca.max(cb));
    }
}

#[test]
fn ball_capacity_grows_with_radius() {
    let t = table3();
    let caps: Vec<f64> = (0..=5)
        .map(|r| capacity(&Sites::from_region(&Region::l2_ball(LatticePoint::origin(3), r)).unwrap(), &t).unwrap())
        .collect();
    assert!(caps.windows(2).all(|w| w[0] < w[1]), "{caps:?}");
}

#[test]
fn entrance_probability_matches_hitting_frequency() {
    let t = table3();
    let k = common::sites(3, &[&[0, 0, 0]]);
    let x = LatticePoint::unit(3, 0, 1);
    let exact = entrance_probability(&x, &k, &t).unwrap();
    assert!((exact - 0.340_54).abs() < 1e-5);
    let measure = equilibrium_measure(&k, &t).unwrap();
    // hit before leaving B_1(0, 9), otherwise finish with the exact entrance probability
    let ball = Region::L1Ball { center: LatticePoint::origin(3), radius: 9 };
    let root = RngStream::from_seed(21);
    let vals: Vec<f64> = interlace_core::exec::map_indexed(100_000, Exec::Parallel, |r| {
        let stop = StopRule { exit: Some(ball.clone()), hit: Some(k.clone()), max_steps: None };
        let path = simulate_path(&x, &stop, &mut root.split(r));
        let end = path.end();
        if k.contains(&end) {
            1.0
        } else {
            measure.entrance_probability(&end, &t).unwrap()
        }
    });
    let est = Estimate::from_values(&vals);
    assert!(est.z_score(exact).abs() <= 3.0, "{est:?} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn defining_system_residual(seed in any::<u64>(), n in 1usize..12) {
        let t = table3();
        let k = random_set(3, n, 4, &mut RngStream::from_seed(seed));
        let m = equilibrium_measure(&k, &t).unwrap();
        prop_assert!(m.residual_on_set(&t).unwrap() <= 1e-9);
        prop_assert!(m.weights().iter().all(|&w| w >= 0.0));
        for p in k.points() {
            prop_assert!((m.entrance_probability(p, &t).unwrap() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn monotone_under_inclusion(seed in any::<u64>(), n in 1usize..6, extra in 1usize..5) {
        let t = table3();
        let mut s = RngStream::from_seed(seed);
        let a = random_set(3, n, 3, &mut s);
        let b = union(&a, &random_set(3, extra, 3, &mut s));
        prop_assert!(capacity(&a, &t).unwrap() <= capacity(&b, &t).unwrap() + 1e-9);
    }

    #[test]
    fn invariant_under_lattice_symmetries(seed in any::<u64>(), n in 1usize..6, shift in prop::collection::vec(-20i64..20, 3), flips in 0u8..8, rot in 0usize..3) {
        let t = table3();
        let a = random_set(3, n, 3, &mut RngStream::from_seed(seed));
        let moved: Vec<LatticePoint> = a.points().iter().map(|p| {
            let mut c: Vec<i64> = p.coords().iter().enumerate().map(|(i, &v)| if flips >> i & 1 == 1 { -v } else { v }).collect();
            c.rotate_left(rot);
            LatticePoint::new(c.iter().zip(&shift).map(|(v, s)| v + s).collect())
        }).collect();
        let b = Sites::from_points(3, moved).unwrap();
        prop_assert!((capacity(&a, &t).unwrap() - capacity(&b, &t).unwrap()).abs() <= 1e-9);
    }
}
