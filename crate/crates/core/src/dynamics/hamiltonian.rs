use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::net::CouplingGraph;
use crate::state::{ExcitationState, SectorBasis};

pub const HERMITIAN_TOL: f64 = 1e-14;

/// Dense complex matrix over a sector basis.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    basis: Arc<SectorBasis>,
    matrix: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn new(basis: Arc<SectorBasis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(invalid(format!(
                "{}x{} matrix for a sector of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        let op = HermitianOperator { basis, matrix };
        let r = op.hermiticity_residual();
        if r >= HERMITIAN_TOL {
            return Err(invalid(format!("operator is not Hermitian (residual {r:.3e})")));
        }
        Ok(op)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..=i {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Real part, when every entry is real.
    pub fn as_real(&self) -> Option<DMatrix<f64>> {
        self.matrix
            .iter()
            .all(|z| z.im == 0.0)
            .then(|| self.matrix.map(|z| z.re))
    }

    pub fn apply(&self, state: &ExcitationState) -> Result<ExcitationState> {
        if state.amplitudes().len() != self.dim() {
            return Err(invalid("operator and state dimensions differ"));
        }
        Ok(state.with_amplitudes(&self.matrix * state.amplitudes()))
    }

    pub fn expectation(&self, v: &DVector<Complex64>) -> Complex64 {
        v.dotc(&(&self.matrix * v))
    }
}

/// XX Hamiltonian restricted to the `k`-excitation sector. An excitation on
/// `n` hops to an empty neighbour `m` with amplitude `J_{n,m}`; excitations
/// behave as hard-core bosons, so no signs arise.
pub fn sector_hamiltonian(graph: &CouplingGraph, k: usize) -> Result<HermitianOperator> {
    let basis = SectorBasis::new(graph, k)?;
    let dim = basis.dim();
    let adj = graph.neighbors();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let mut occupied = vec![false; graph.len()];
    let mut target = Vec::with_capacity(k);
    for (col, config) in basis.configs().iter().enumerate() {
        for &s in config {
            occupied[s] = true;
        }
        for (slot, &n) in config.iter().enumerate() {
            for &(m, j) in &adj[n] {
                if occupied[m] {
                    continue;
                }
                target.clear();
                target.extend_from_slice(config);
                target[slot] = m;
                target.sort_unstable();
                let row = basis.config_index(&target).expect("hop stays in sector");
                h[(row, col)] += Complex64::new(j, 0.0);
            }
        }
        for &s in config {
            occupied[s] = false;
        }
    }
    HermitianOperator::new(basis, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{build_prototype_1d, SiteId};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn two_site_single_edge() {
        let g = CouplingGraph::new(
            vec![SiteId::Index(1), SiteId::Index(2)],
            [(SiteId::Index(1), SiteId::Index(2), 1.0)],
        )
        .unwrap();
        let h = sector_hamiltonian(&g, 1).unwrap();
        assert_eq!(h.matrix(), &DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]));
        let h0 = sector_hamiltonian(&g, 0).unwrap();
        assert_eq!(h0.dim(), 1);
        assert_eq!(h0.matrix()[(0, 0)], c(0.0));
        assert!(sector_hamiltonian(&g, 3).is_err());
    }

    #[test]
    fn prototype_single_sector_is_the_hopping_matrix() {
        let g = build_prototype_1d(1).unwrap();
        let h = sector_hamiltonian(&g, 1).unwrap();
        assert_eq!(h.as_real().unwrap(), g.hopping_matrix());
        assert_eq!(h.matrix()[(3, 2)], c(-1.0));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let g = build_prototype_1d(1).unwrap();
        let b = SectorBasis::single(&g);
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = c(1.0);
        assert!(HermitianOperator::new(b, m).is_err());
    }
}
