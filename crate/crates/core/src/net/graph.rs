use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;

use super::SiteId;
use crate::error::{invalid, Result};

/// Undirected coupling `J` between two sites, stored with `a < b` as indices
/// into the graph's site list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub coupling: f64,
}

/// Weighted undirected graph of spin sites. Sites are kept in canonical
/// [`SiteId`] order and edges sorted by endpoint indices, so two graphs built
/// from the same data compare equal bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingGraph {
    sites: Vec<SiteId>,
    index: HashMap<SiteId, usize>,
    edges: Vec<Edge>,
}

impl CouplingGraph {
    pub fn new(
        mut sites: Vec<SiteId>,
        edges: impl IntoIterator<Item = (SiteId, SiteId, f64)>,
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(invalid("graph has no sites"));
        }
        sites.sort();
        if let Some(w) = sites.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate site {}", w[0])));
        }
        let index: HashMap<SiteId, usize> =
            sites.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();

        let mut list = Vec::new();
        for (u, v, j) in edges {
            let iu = *index
                .get(&u)
                .ok_or_else(|| invalid(format!("edge endpoint {u} is not a site")))?;
            let iv = *index
                .get(&v)
                .ok_or_else(|| invalid(format!("edge endpoint {v} is not a site")))?;
            if iu == iv {
                return Err(invalid(format!("self-loop on {u}")));
            }
            if !j.is_finite() || j == 0.0 {
                return Err(invalid(format!("edge {u}-{v} has coupling {j}")));
            }
            list.push(Edge {
                a: iu.min(iv),
                b: iu.max(iv),
                coupling: j,
            });
        }
        list.sort_by_key(|e| (e.a, e.b));
        if let Some(w) = list.windows(2).find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(invalid(format!(
                "duplicate edge {}-{}",
                sites[w[0].a], sites[w[0].b]
            )));
        }

        let graph = CouplingGraph {
            sites,
            index,
            edges: list,
        };
        if !graph.is_connected() {
            return Err(invalid("graph is not connected"));
        }
        Ok(graph)
    }

    pub fn sites(&self) -> &[SiteId] {
        &self.sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn index_of(&self, site: &SiteId) -> Option<usize> {
        self.index.get(site).copied()
    }

    pub fn contains(&self, site: &SiteId) -> bool {
        self.index.contains_key(site)
    }

    pub fn coupling(&self, u: &SiteId, v: &SiteId) -> Option<f64> {
        let (a, b) = (self.index_of(u)?, self.index_of(v)?);
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&key, |e| (e.a, e.b))
            .ok()
            .map(|i| self.edges[i].coupling)
    }

    /// Edges as `(SiteId, SiteId, J)` triples in canonical order.
    pub fn edge_triples(&self) -> impl Iterator<Item = (&SiteId, &SiteId, f64)> + '_ {
        self.edges
            .iter()
            .map(|e| (&self.sites[e.a], &self.sites[e.b], e.coupling))
    }

    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.coupling));
            adj[e.b].push((e.a, e.coupling));
        }
        adj
    }

    /// Single-excitation hopping matrix, `H[m][n] = J_{n,m}`.
    pub fn hopping_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut h = DMatrix::zeros(n, n);
        for e in &self.edges {
            h[(e.a, e.b)] = e.coupling;
            h[(e.b, e.a)] = e.coupling;
        }
        h
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.edges.iter().map(|e| e.coupling.abs()).fold(0.0, f64::max)
    }

    pub fn min_abs_coupling(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.coupling.abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.len()
    }
}
