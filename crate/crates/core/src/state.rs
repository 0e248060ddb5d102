//! Fixed-excitation-number sectors and states living in them.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::net::{CouplingGraph, SiteId};

/// Lexicographically ordered k-subsets of a graph's sites. The XX
/// Hamiltonian conserves total Z, so each sector is invariant.
#[derive(Debug, PartialEq)]
pub struct SectorBasis {
    sites: Vec<SiteId>,
    site_index: HashMap<SiteId, usize>,
    k: usize,
    configs: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl SectorBasis {
    pub fn new(graph: &CouplingGraph, k: usize) -> Result<Arc<Self>> {
        let n = graph.len();
        if k > n {
            return Err(invalid(format!("sector k = {k} exceeds {n} sites")));
        }
        let configs = k_subsets(n, k);
        let lookup = configs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        Ok(Arc::new(SectorBasis {
            sites: graph.sites().to_vec(),
            site_index: graph
                .sites()
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, s)| (s, i))
                .collect(),
            k,
            configs,
            lookup,
        }))
    }

    pub fn single(graph: &CouplingGraph) -> Arc<Self> {
        Self::new(graph, 1).expect("a graph always has a single-excitation sector")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn sites(&self) -> &[SiteId] {
        &self.sites
    }

    pub fn configs(&self) -> &[Vec<usize>] {
        &self.configs
    }

    pub fn site_index(&self, site: &SiteId) -> Result<usize> {
        self.site_index
            .get(site)
            .copied()
            .ok_or_else(|| invalid(format!("unknown site {site}")))
    }

    /// Index of a configuration given as sorted site indices.
    pub fn config_index(&self, config: &[usize]) -> Option<usize> {
        self.lookup.get(config).copied()
    }

    /// Index of the configuration with excitations on `sites`.
    pub fn index_of_sites(&self, sites: &[SiteId]) -> Result<usize> {
        if sites.len() != self.k {
            return Err(invalid(format!(
                "{} excitations given for a k = {} sector",
                sites.len(),
                self.k
            )));
        }
        let mut idx = sites
            .iter()
            .map(|s| self.site_index(s))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("repeated site in configuration"));
        }
        Ok(self.lookup[&idx])
    }

    fn same_as(&self, other: &SectorBasis) -> bool {
        std::ptr::eq(self, other) || (self.k == other.k && self.sites == other.sites)
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Complex amplitude vector over a [`SectorBasis`].
#[derive(Clone, Debug)]
pub struct ExcitationState {
    basis: Arc<SectorBasis>,
    amplitudes: DVector<Complex64>,
}

impl ExcitationState {
    pub fn new(basis: Arc<SectorBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(invalid(format!(
                "{} amplitudes for a sector of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(ExcitationState { basis, amplitudes })
    }

    /// Product basis state with excitations on `sites`.
    pub fn excited(basis: Arc<SectorBasis>, sites: &[SiteId]) -> Result<Self> {
        let i = basis.index_of_sites(sites)?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(ExcitationState { basis, amplitudes })
    }

    pub fn site(basis: Arc<SectorBasis>, site: &SiteId) -> Result<Self> {
        Self::excited(basis, std::slice::from_ref(site))
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        self.amplitudes *= c;
        self
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: DVector<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), self.basis.dim());
        ExcitationState {
            basis: self.basis.clone(),
            amplitudes,
        }
    }

    pub fn check_compatible(&self, other: &ExcitationState) -> Result<()> {
        if !self.basis.same_as(&other.basis) {
            return Err(invalid("states live in different sectors"));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &ExcitationState) -> Result<Complex64> {
        self.check_compatible(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// `|⟨a|b⟩|`, the routing success metric; insensitive to global phase.
pub fn fidelity_up_to_phase(a: &ExcitationState, b: &ExcitationState) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}
