use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pst::{check_chain_length, pst_chain_couplings};
use super::{Coord, CouplingGraph, SiteId};
use crate::error::{invalid, Result};
use crate::state::{ExcitationState, SectorBasis};

/// The two ends of the perfect-transfer chain a star block is split from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Chain index 1; ports `1a..1d`.
    Head,
    /// Chain index M; ports `Ma..Md`.
    Tail,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Head => Side::Tail,
            Side::Tail => Side::Head,
        }
    }
}

/// Star topology obtained from a perfect-transfer chain of odd length `M` by
/// splitting it at the centre into `2d` branches of length `(M−1)/2`. The
/// two couplings onto the centre are scaled by `1/√d`.
///
/// Branches `1..=d` form the head side, `d+1..=2d` the tail side; depth 1 is
/// the extremal site. `|nj⟩` for `n ≤ (M−1)/2` is head-side branch `j` at
/// depth `n`, and for `n ≥ (M+3)/2` tail-side branch `j` at depth `M+1−n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTemplate {
    m: usize,
    d: usize,
    couplings: Vec<f64>,
    graph: CouplingGraph,
}

pub fn build_star_block(m: usize, d: usize) -> Result<BlockTemplate> {
    BlockTemplate::new(m, d)
}

impl BlockTemplate {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        check_chain_length(m)?;
        if d < 1 {
            return Err(invalid("a star block needs d ≥ 1"));
        }
        let couplings = pst_chain_couplings(m)?;
        let graph = star_graph(&Coord::default(), m, d, &couplings, |_, _| true)?;
        Ok(BlockTemplate {
            m,
            d,
            couplings,
            graph,
        })
    }

    pub fn chain_length(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sites per branch, `(M−1)/2`.
    pub fn arm_length(&self) -> usize {
        (self.m - 1) / 2
    }

    pub fn chain_couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    pub fn branch(&self, side: Side, j: usize) -> usize {
        match side {
            Side::Head => j,
            Side::Tail => self.d + j,
        }
    }

    /// Side and 1-based index of a branch.
    pub fn branch_side(&self, branch: usize) -> (Side, usize) {
        if branch <= self.d {
            (Side::Head, branch)
        } else {
            (Side::Tail, branch - self.d)
        }
    }

    pub fn port(&self, side: Side, j: usize) -> SiteId {
        SiteId::arm(Coord::default(), self.branch(side, j), 1)
    }

    pub fn ports(&self, side: Side) -> Vec<SiteId> {
        (1..=self.d).map(|j| self.port(side, j)).collect()
    }

    pub fn center(&self) -> SiteId {
        SiteId::center(Coord::default())
    }

    /// Sites at chain index `n` (`1..=M`), ordered by branch index `j`.
    pub fn chain_layer(&self, n: usize) -> Result<Vec<SiteId>> {
        if n < 1 || n > self.m {
            return Err(invalid(format!("chain index {n} out of range 1..={}", self.m)));
        }
        let h = self.arm_length();
        Ok(if n == h + 1 {
            vec![self.center()]
        } else if n <= h {
            (1..=self.d)
                .map(|j| SiteId::arm(Coord::default(), self.branch(Side::Head, j), n))
                .collect()
        } else {
            (1..=self.d)
                .map(|j| SiteId::arm(Coord::default(), self.branch(Side::Tail, j), self.m + 1 - n))
                .collect()
        })
    }

    /// `|W_k^n⟩ = (1/√d) Σ_{j=1..d} e^{2πijk/d} |nj⟩` as a single-excitation
    /// vector in graph site order. Only `k = 0` exists at the centre.
    pub fn w_vector(&self, n: usize, k: usize) -> Result<DVector<Complex64>> {
        if k >= self.d {
            return Err(invalid(format!("W index k = {k} must be below d = {}", self.d)));
        }
        let layer = self.chain_layer(n)?;
        let mut v = DVector::zeros(self.graph.len());
        if layer.len() == 1 && self.d > 1 {
            if k != 0 {
                return Err(invalid("only W_0 exists at the centre site"));
            }
            v[self.graph.index_of(&layer[0]).unwrap()] = Complex64::new(1.0, 0.0);
            return Ok(v);
        }
        let norm = 1.0 / (self.d as f64).sqrt();
        for (j0, site) in layer.iter().enumerate() {
            let j = (j0 + 1) as f64;
            let phase = 2.0 * PI * j * k as f64 / self.d as f64;
            v[self.graph.index_of(site).unwrap()] = Complex64::from_polar(norm, phase);
        }
        Ok(v)
    }
}

pub fn w_state(block: &BlockTemplate, n: usize, k: usize) -> Result<ExcitationState> {
    ExcitationState::new(SectorBasis::single(block.graph()), block.w_vector(n, k)?)
}

/// Sites and edges of one star placed at `block`. `keep_extremal(branch, _)`
/// decides whether the depth-1 site of a branch is emitted (tilings replace
/// linked extremal sites by shared pairs).
pub(crate) fn star_graph(
    block: &Coord,
    m: usize,
    d: usize,
    couplings: &[f64],
    keep_extremal: impl Fn(usize, &Coord) -> bool,
) -> Result<CouplingGraph> {
    let (sites, edges) = star_parts(block, m, d, couplings, keep_extremal);
    CouplingGraph::new(sites, edges)
}

pub(crate) type EdgeList = Vec<(SiteId, SiteId, f64)>;

pub(crate) fn star_parts(
    block: &Coord,
    m: usize,
    d: usize,
    couplings: &[f64],
    keep_extremal: impl Fn(usize, &Coord) -> bool,
) -> (Vec<SiteId>, EdgeList) {
    let h = (m - 1) / 2;
    let center_coupling = couplings[h - 1] / (d as f64).sqrt();
    let mut sites = vec![SiteId::center(block.clone())];
    let mut edges = Vec::new();
    for branch in 1..=2 * d {
        let keep = keep_extremal(branch, block);
        for depth in 1..=h {
            if depth == 1 && !keep {
                continue;
            }
            sites.push(SiteId::arm(block.clone(), branch, depth));
        }
        for depth in 1..h {
            if depth == 1 && !keep {
                continue;
            }
            edges.push((
                SiteId::arm(block.clone(), branch, depth),
                SiteId::arm(block.clone(), branch, depth + 1),
                couplings[depth - 1],
            ));
        }
        edges.push((
            SiteId::arm(block.clone(), branch, h),
            SiteId::center(block.clone()),
            center_coupling,
        ));
    }
    (sites, edges)
}
