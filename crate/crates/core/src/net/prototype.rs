use nalgebra::DVector;
use num_complex::Complex64;

use super::basis::{pair_combination, unit, BasisColumn, BasisMap};
use super::{CouplingGraph, SiteId};
use crate::error::{invalid, Result};

/// Diamond chain of `3N+1` sites. Diamond `k` (0-based) joins sites
/// `3k+1 → {3k+2, 3k+3} → 3k+4`, all couplings `+1` except the
/// `{3k+3, 3k+4}` edge, which is `−1`.
pub fn build_prototype_1d(n: usize) -> Result<CouplingGraph> {
    if n < 1 {
        return Err(invalid("prototype needs at least one diamond"));
    }
    let ix = SiteId::Index;
    let mut edges = Vec::with_capacity(4 * n);
    for k in 0..n {
        let b = 3 * k;
        edges.push((ix(b + 1), ix(b + 2), 1.0));
        edges.push((ix(b + 1), ix(b + 3), 1.0));
        edges.push((ix(b + 2), ix(b + 4), 1.0));
        edges.push((ix(b + 3), ix(b + 4), -1.0));
    }
    CouplingGraph::new((1..=3 * n + 1).map(ix).collect(), edges)
}

/// A diamond-chain graph together with its diamond count.
///
/// In the λ-basis the chain splits into `N + 1` subsystems: two 2-site end
/// chains (subsystems `0` and `N`) and `N − 1` uniform 3-site chains. Pair
/// `p` (sites `3p+2`, `3p+3`) is shared by subsystems `p` and `p+1`; its
/// symmetric combination `λ_{3p+2}` belongs to `p`, the antisymmetric
/// `λ_{3p+3}` to `p+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Prototype {
    diamonds: usize,
    graph: CouplingGraph,
}

impl Prototype {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Prototype {
            diamonds: n,
            graph: build_prototype_1d(n)?,
        })
    }

    /// Recognise a graph produced by [`build_prototype_1d`].
    pub fn from_graph(graph: &CouplingGraph) -> Result<Self> {
        let len = graph.len();
        if len < 4 || (len - 1) % 3 != 0 {
            return Err(invalid(format!(
                "{len} sites is not a diamond-chain size"
            )));
        }
        let expected = Prototype::new((len - 1) / 3)?;
        if &expected.graph != graph {
            return Err(invalid("graph is not a diamond-chain prototype"));
        }
        Ok(expected)
    }

    pub fn diamonds(&self) -> usize {
        self.diamonds
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    pub fn into_graph(self) -> CouplingGraph {
        self.graph
    }

    pub fn num_sites(&self) -> usize {
        3 * self.diamonds + 1
    }

    /// Number of λ-subsystems, `N + 1`.
    pub fn num_subsystems(&self) -> usize {
        self.diamonds + 1
    }

    /// `(a, b) = (3p+2, 3p+3)`; `b` carries the negative edge and is the
    /// member pulsed to hop an excitation across the pair.
    pub fn pair_sites(&self, pair: usize) -> (SiteId, SiteId) {
        (SiteId::Index(3 * pair + 2), SiteId::Index(3 * pair + 3))
    }

    /// Site `3n+1`, the vertex at the centre of subsystem `n` (or the end
    /// site of an end subsystem).
    pub fn vertex_site(&self, n: usize) -> SiteId {
        SiteId::Index(3 * n + 1)
    }

    /// Subsystems that are uniform 3-site chains.
    pub fn is_three_chain(&self, subsystem: usize) -> bool {
        subsystem >= 1 && subsystem < self.diamonds
    }

    /// Single-excitation vector of `λ_i`, `i` in `1..=3N+1`.
    pub fn lambda_vector(&self, i: usize) -> Result<DVector<Complex64>> {
        let n = self.num_sites();
        if i < 1 || i > n {
            return Err(invalid(format!("λ index {i} out of range 1..={n}")));
        }
        Ok(match i % 3 {
            1 => unit(n, i - 1),
            2 => pair_combination(n, i - 1, i, 1.0),
            _ => pair_combination(n, i - 2, i - 1, -1.0),
        })
    }

    /// λ-index of the port state `(pair, owner)`.
    pub fn port_lambda(&self, pair: usize, owner: usize) -> usize {
        if owner == pair {
            3 * pair + 2
        } else {
            3 * pair + 3
        }
    }

    /// The λ-basis; column `λ_i` is tagged with subsystem `⌊i/3⌋` and
    /// position `i mod 3` (0 = left port, 1 = vertex, 2 = right port).
    pub fn lambda_basis(&self) -> BasisMap {
        let columns = (1..=self.num_sites())
            .map(|i| BasisColumn {
                vector: self.lambda_vector(i).expect("index in range"),
                subsystem: i / 3,
                position: i % 3,
            })
            .collect();
        BasisMap::new(columns).expect("λ-basis is orthonormal")
    }
}

pub fn lambda_basis_1d(graph: &CouplingGraph) -> Result<BasisMap> {
    Ok(Prototype::from_graph(graph)?.lambda_basis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ix(n: usize) -> SiteId {
        SiteId::Index(n)
    }

    #[test]
    fn single_diamond_edges() {
        let g = build_prototype_1d(1).unwrap();
        assert_eq!(g.len(), 4);
        let e: Vec<_> = g
            .edge_triples()
            .map(|(a, b, j)| (a.clone(), b.clone(), j))
            .collect();
        assert_eq!(
            e,
            vec![
                (ix(1), ix(2), 1.0),
                (ix(1), ix(3), 1.0),
                (ix(2), ix(4), 1.0),
                (ix(3), ix(4), -1.0)
            ]
        );
    }

    #[test]
    fn two_diamonds() {
        let g = build_prototype_1d(2).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.edges().len(), 8);
        assert!(g.edges().iter().all(|e| e.coupling.abs() == 1.0));
        let neg: Vec<_> = g
            .edge_triples()
            .filter(|(_, _, j)| *j < 0.0)
            .map(|(a, b, _)| (a.clone(), b.clone()))
            .collect();
        assert_eq!(neg, vec![(ix(3), ix(4)), (ix(6), ix(7))]);
        assert!(build_prototype_1d(0).is_err());
    }

    #[test]
    fn lambda_two_is_symmetric_pair() {
        let p = Prototype::new(1).unwrap();
        let l2 = p.lambda_vector(2).unwrap();
        assert_eq!(l2[1].re, FRAC_1_SQRT_2);
        assert_eq!(l2[2].re, FRAC_1_SQRT_2);
        let basis = p.lambda_basis();
        assert_eq!(basis.len(), 4);
        assert!(basis.orthonormality_residual() < 1e-14);
    }

    #[test]
    fn subsystem_partition_n2() {
        let basis = lambda_basis_1d(&build_prototype_1d(2).unwrap()).unwrap();
        let tags: Vec<usize> = basis.columns().iter().map(|c| c.subsystem).collect();
        // {λ1, λ2}, {λ3, λ4, λ5}, {λ6, λ7}
        assert_eq!(tags, vec![0, 0, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn rejects_foreign_graphs() {
        let chain = super::super::pst::pst_chain(7).unwrap();
        assert!(lambda_basis_1d(&chain).is_err());
        let five = super::super::pst::pst_chain(5).unwrap();
        assert!(lambda_basis_1d(&five).is_err());
    }
}
