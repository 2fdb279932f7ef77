//! Observables of the vacant set: clusters, crossings, connectivity curves,
//! decay-exponent fits and `u_*` brackets.

mod sweep;

pub use sweep::{
    connectivity_function, crossing_probability_sweep, estimate_alpha, u_star_bracket, AlphaFit, ConnectivityCurve,
    CurvePoint, SweepCurve, UStarBracket, DEFAULT_WINDOW_CAP,
};

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::interlace::VacantField;
use crate::lattice::{LatticePoint, Sites};

/// Union–find over site indices, with path halving.
#[derive(Clone, Debug)]
struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let g = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = g;
            i = g;
        }
        i
    }

    /// The smaller index becomes the root, so every root is its cluster's minimum.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Vacant clusters of a field. A cluster's label is the index (in the
/// window's lexicographic order) of its smallest site.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterLabeling {
    sites: Sites,
    labels: Vec<Option<u32>>,
    sizes: BTreeMap<u32, usize>,
}

impl ClusterLabeling {
    pub fn sites(&self) -> &Sites {
        &self.sites
    }

    /// Per-site label, `None` for occupied sites.
    pub fn labels(&self) -> &[Option<u32>] {
        &self.labels
    }

    pub fn label_of(&self, p: &LatticePoint) -> Option<u32> {
        self.sites.index_of(p).and_then(|i| self.labels[i])
    }

    /// The smallest site of the cluster containing `p`.
    pub fn representative(&self, p: &LatticePoint) -> Option<&LatticePoint> {
        self.label_of(p).map(|l| self.sites.point(l as usize))
    }

    /// Cluster sizes keyed by label.
    pub fn sizes(&self) -> &BTreeMap<u32, usize> {
        &self.sizes
    }

    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn connected(&self, a: &LatticePoint, b: &LatticePoint) -> bool {
        matches!((self.label_of(a), self.label_of(b)), (Some(x), Some(y)) if x == y)
    }
}

pub fn label_clusters(field: &VacantField) -> ClusterLabeling {
    let sites = field.sites();
    let vac = field.vacancy();
    let n = sites.len();
    let two_d = 2 * sites.dim();
    let mut dsu = Dsu::new(n);
    for i in 0..n {
        if !vac[i] {
            continue;
        }
        // positive directions suffice: every edge is seen from its lower end
        for code in (0..two_d).step_by(2) {
            if let Some(j) = sites.neighbor(i, code) {
                if vac[j] {
                    dsu.union(i as u32, j as u32);
                }
            }
        }
    }
    let mut sizes = BTreeMap::new();
    let labels: Vec<Option<u32>> = (0..n)
        .map(|i| {
            vac[i].then(|| {
                let r = dsu.find(i as u32);
                *sizes.entry(r).or_insert(0) += 1;
                r
            })
        })
        .collect();
    ClusterLabeling { sites: sites.clone(), labels, sizes }
}

/// Source and target sets inside an ambient window.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingSpec {
    source: Sites,
    target: Sites,
    window: Sites,
}

impl CrossingSpec {
    pub fn new(source: Sites, target: Sites, window: Sites) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::input("crossing source and target must be non-empty"));
        }
        if !source.is_subset_of(&window) || !target.is_subset_of(&window) {
            return Err(Error::input("crossing source and target must lie in the window"));
        }
        if let Some(p) = source.points().iter().find(|p| target.contains(p)) {
            return Err(Error::input(format!("crossing source and target share {p}")));
        }
        Ok(CrossingSpec { source, target, window })
    }

    pub fn source(&self) -> &Sites {
        &self.source
    }

    pub fn target(&self) -> &Sites {
        &self.target
    }

    pub fn window(&self) -> &Sites {
        &self.window
    }
}

/// Whether a vacant nearest-neighbour path inside the field's window joins
/// the source to the target.
pub fn crossing_event(field: &VacantField, spec: &CrossingSpec) -> Result<bool> {
    let sites = field.sites();
    let vac = field.vacancy();
    let index = |p: &LatticePoint| {
        sites.index_of(p).ok_or_else(|| Error::input(format!("crossing site {p} is outside the field window")))
    };
    let is_target: Vec<bool> = {
        let mut t = vec![false; sites.len()];
        for p in spec.target.points() {
            t[index(p)?] = true;
        }
        t
    };
    let mut seen = vec![false; sites.len()];
    let mut queue = VecDeque::new();
    for p in spec.source.points() {
        let i = index(p)?;
        if vac[i] && !seen[i] {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if is_target[i] {
            return Ok(true);
        }
        for code in 0..2 * sites.dim() {
            if let Some(j) = sites.neighbor(i, code) {
                if vac[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Region;
    use crate::rng::RngStream;

    fn cube(side: u64) -> Sites {
        Sites::from_region(&Region::cube(LatticePoint::origin(3), side)).unwrap()
    }

    #[test]
    fn all_vacant_box_is_one_cluster() {
        let s = cube(3);
        let f = VacantField::from_vacancy(s.clone(), vec![true; 27]).unwrap();
        let c = label_clusters(&f);
        assert_eq!(c.cluster_count(), 1);
        assert_eq!(c.sizes()[&0], 27);
        assert_eq!(c.representative(&LatticePoint::new(vec![2, 2, 2])), Some(&LatticePoint::origin(3)));
    }

    #[test]
    fn checkerboard_isolates_every_site() {
        let s = cube(4);
        let vac: Vec<bool> = s.points().iter().map(|p| p.coords().iter().sum::<i64>() % 2 == 0).collect();
        let f = VacantField::from_vacancy(s, vac.clone()).unwrap();
        let c = label_clusters(&f);
        assert_eq!(c.cluster_count(), vac.iter().filter(|&&v| v).count());
        assert!(c.sizes().values().all(|&n| n == 1));
    }

    fn brute_components(s: &Sites, vac: &[bool]) -> Vec<Vec<bool>> {
        // reachability by repeated relaxation
        let n = s.len();
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            reach[i][i] = vac[i];
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if !reach[i][j] {
                        continue;
                    }
                    for k in 0..n {
                        if vac[k] && !reach[i][k] && s.point(j).dist(s.point(k), crate::lattice::Norm::L1) == 1 {
                            reach[i][k] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return reach;
            }
        }
    }

    #[test]
    fn labels_match_brute_force() {
        let s = cube(3);
        let mut rng = RngStream::from_seed(21);
        for _ in 0..30 {
            let vac: Vec<bool> = (0..s.len()).map(|_| rng.uniform() < 0.6).collect();
            let reach = brute_components(&s, &vac);
            let c = label_clusters(&VacantField::from_vacancy(s.clone(), vac.clone()).unwrap());
            for i in 0..s.len() {
                for j in 0..s.len() {
                    let same = c.labels()[i].is_some() && c.labels()[i] == c.labels()[j];
                    assert_eq!(same, reach[i][j]);
                }
                if let Some(l) = c.labels()[i] {
                    assert_eq!(l as usize, (0..s.len()).find(|&j| reach[i][j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn crossing_on_trivial_fields() {
        let s = cube(4);
        let src = Sites::from_points(3, vec![LatticePoint::origin(3)]).unwrap();
        let tgt = Sites::from_points(3, vec![LatticePoint::new(vec![3, 3, 3])]).unwrap();
        let spec = CrossingSpec::new(src, tgt, s.clone()).unwrap();
        let open = VacantField::from_vacancy(s.clone(), vec![true; 64]).unwrap();
        let closed = VacantField::from_vacancy(s, vec![false; 64]).unwrap();
        assert!(crossing_event(&open, &spec).unwrap());
        assert!(!crossing_event(&closed, &spec).unwrap());
    }

    #[test]
    fn overlapping_spec_rejected() {
        let s = cube(2);
        let a = Sites::from_points(3, vec![LatticePoint::origin(3)]).unwrap();
        assert!(CrossingSpec::new(a.clone(), a, s).is_err());
    }
}
