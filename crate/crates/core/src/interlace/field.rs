use super::TrajectorySoup;
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Sites};

/// Per-site smallest label of a trajectory visiting the site (`+∞` if none).
/// `V^u` is the set of sites whose level exceeds `u`, for every `u <= u_max`.
#[derive(Clone, Debug)]
pub struct FirstOccupation {
    sites: Sites,
    levels: Vec<f64>,
    u_max: f64,
    provenance: String,
}

impl FirstOccupation {
    pub fn new(soup: &TrajectorySoup, window: &Sites) -> Result<Self> {
        if !window.is_subset_of(&soup.window) {
            return Err(Error::input("observation window must lie inside the soup window"));
        }
        let mut levels = vec![f64::INFINITY; window.len()];
        for t in &soup.trajectories {
            t.for_each_point(|x| {
                if let Some(i) = window.index_of_coords(x) {
                    if t.label < levels[i] {
                        levels[i] = t.label;
                    }
                }
            });
        }
        Ok(FirstOccupation { sites: window.clone(), levels, u_max: soup.u_max, provenance: soup.lineage_string() })
    }

    pub fn sites(&self) -> &Sites {
        &self.sites
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn field(&self, u: f64) -> Result<VacantField> {
        if !(0.0..=self.u_max).contains(&u) {
            return Err(Error::input(format!("level {u} outside [0, u_max = {}]", self.u_max)));
        }
        Ok(VacantField {
            sites: self.sites.clone(),
            level: u,
            vacant: self.levels.iter().map(|&l| l > u).collect(),
            provenance: self.provenance.clone(),
        })
    }
}

/// Vacancy of each window site at one level (`true` = vacant).
#[derive(Clone, Debug, PartialEq)]
pub struct VacantField {
    sites: Sites,
    level: f64,
    vacant: Vec<bool>,
    provenance: String,
}

impl VacantField {
    /// A field given directly by its vacancy vector, e.g. for tests.
    pub fn from_vacancy(sites: Sites, vacant: Vec<bool>) -> Result<Self> {
        if vacant.len() != sites.len() {
            return Err(Error::input(format!("{} vacancy flags for {} sites", vacant.len(), sites.len())));
        }
        Ok(VacantField { sites, level: f64::NAN, vacant, provenance: String::new() })
    }

    pub fn sites(&self) -> &Sites {
        &self.sites
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn vacancy(&self) -> &[bool] {
        &self.vacant
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn is_vacant(&self, p: &LatticePoint) -> Option<bool> {
        self.sites.index_of(p).map(|i| self.vacant[i])
    }

    pub fn vacant_count(&self) -> usize {
        self.vacant.iter().filter(|&&v| v).count()
    }

    /// `self ⊆ other` as vacant sets over the same window.
    pub fn vacant_subset_of(&self, other: &VacantField) -> bool {
        self.vacant.len() == other.vacant.len() && self.vacant.iter().zip(&other.vacant).all(|(a, b)| !a || *b)
    }
}

/// `V^u ∩ window` from one soup.
pub fn vacant_field(soup: &TrajectorySoup, u: f64, window: &Sites) -> Result<VacantField> {
    if u > soup.u_max {
        return Err(Error::input(format!("level {u} exceeds the soup's u_max = {}", soup.u_max)));
    }
    FirstOccupation::new(soup, window)?.field(u)
}
