//! Replica loops run sequentially and on the rayon pool.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use interlace_core::percolation::{crossing_probability_sweep, CrossingSpec};
use interlace_core::potential::capacity_mc;
use interlace_core::walk::{GreenMethod, GreenTable};
use interlace_core::{Exec, LatticePoint, Region, RngStream, Sites};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn escape_walks(c: &mut Criterion) {
    let table = GreenTable::new(3, GreenMethod::BesselProduct).unwrap();
    let k = Sites::from_region(&Region::cube(LatticePoint::origin(3), 2)).unwrap();
    let rng = RngStream::from_seed(11);
    let mut g = c.benchmark_group("capacity_mc");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 2000), |b| b.iter(|| capacity_mc(&k, &table, 2000, &rng, exec).unwrap()));
    }
    g.finish();
}

fn crossing_sweep(c: &mut Criterion) {
    let table = Arc::new(GreenTable::new(3, GreenMethod::BesselProduct).unwrap());
    let w = Sites::from_region(&Region::cube(LatticePoint::origin(3), 5)).unwrap();
    let face = |x: i64| Sites::from_points(3, w.points().iter().filter(|p| p.coords()[0] == x).cloned().collect()).unwrap();
    let spec = CrossingSpec::new(face(0), face(4), w.clone()).unwrap();
    let grid = [0.5, 1.0, 2.0, 4.0];
    let rng = RngStream::from_seed(12);
    let mut g = c.benchmark_group("crossing_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 200), |b| {
            b.iter(|| crossing_probability_sweep(&spec, &grid, 200, &rng, Arc::clone(&table), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, escape_walks, crossing_sweep);
criterion_main!(benches);
