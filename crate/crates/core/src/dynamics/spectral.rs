use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hamiltonian::{sector_hamiltonian, HermitianOperator};
use crate::error::{invalid, Result};
use crate::net::{CouplingGraph, SiteId};
use crate::state::{ExcitationState, SectorBasis};

pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Eigendecomposition `H = V Λ V†` used for exact evolution.
#[derive(Clone, Debug)]
pub struct SpectralCache {
    basis: Arc<SectorBasis>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl SpectralCache {
    pub fn new(h: &HermitianOperator) -> Result<Self> {
        let (eigenvalues, eigenvectors) = match h.as_real() {
            Some(re) => {
                let e = re.symmetric_eigen();
                (e.eigenvalues, e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
            }
            None => {
                let e = h.matrix().clone().symmetric_eigen();
                (e.eigenvalues, e.eigenvectors)
            }
        };
        let cache = SpectralCache {
            basis: h.basis().clone(),
            eigenvalues,
            eigenvectors,
        };
        let r = cache.reconstruction_residual(h);
        if r >= RECONSTRUCTION_TOL {
            return Err(invalid(format!(
                "eigendecomposition residual {r:.3e} exceeds {RECONSTRUCTION_TOL:e}"
            )));
        }
        Ok(cache)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `‖VΛV† − H‖_max`.
    pub fn reconstruction_residual(&self, h: &HermitianOperator) -> f64 {
        let v = &self.eigenvectors;
        let lv = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            v[(r, c)] * self.eigenvalues[c]
        });
        (lv * v.adjoint() - h.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `V e^{−iΛt} V† ψ`.
    pub fn evolve_vector(&self, psi: &DVector<Complex64>, t: f64) -> Result<DVector<Complex64>> {
        if psi.len() != self.dim() {
            return Err(invalid(format!(
                "state of dimension {} for a cache of dimension {}",
                psi.len(),
                self.dim()
            )));
        }
        if !t.is_finite() {
            return Err(invalid(format!("evolution time {t}")));
        }
        let mut c = self.eigenvectors.ad_mul(psi);
        for (ci, &l) in c.iter_mut().zip(self.eigenvalues.iter()) {
            *ci *= Complex64::from_polar(1.0, -l * t);
        }
        Ok(&self.eigenvectors * c)
    }

    /// The full propagator `e^{−iHt}`.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            v[(r, c)] * Complex64::from_polar(1.0, -self.eigenvalues[c] * t)
        });
        scaled * v.adjoint()
    }
}

pub fn evolve(state: &ExcitationState, t: f64, cache: &SpectralCache) -> Result<ExcitationState> {
    Ok(state.with_amplitudes(cache.evolve_vector(state.amplitudes(), t)?))
}

/// A graph's `k`-excitation sector with its Hamiltonian and spectrum.
#[derive(Clone, Debug)]
pub struct Sector {
    hamiltonian: HermitianOperator,
    cache: SpectralCache,
}

impl Sector {
    pub fn new(graph: &CouplingGraph, k: usize) -> Result<Self> {
        let hamiltonian = sector_hamiltonian(graph, k)?;
        let cache = SpectralCache::new(&hamiltonian)?;
        Ok(Sector { hamiltonian, cache })
    }

    pub fn single(graph: &CouplingGraph) -> Result<Self> {
        Self::new(graph, 1)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        self.hamiltonian.basis()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn cache(&self) -> &SpectralCache {
        &self.cache
    }

    pub fn dim(&self) -> usize {
        self.cache.dim()
    }

    /// Product state with excitations on `sites`.
    pub fn excited(&self, sites: &[SiteId]) -> Result<ExcitationState> {
        ExcitationState::excited(self.basis().clone(), sites)
    }

    pub fn state(&self, amplitudes: DVector<Complex64>) -> Result<ExcitationState> {
        ExcitationState::new(self.basis().clone(), amplitudes)
    }

    pub fn evolve(&self, state: &ExcitationState, t: f64) -> Result<ExcitationState> {
        self.check(state)?;
        evolve(state, t, &self.cache)
    }

    pub(crate) fn check(&self, state: &ExcitationState) -> Result<()> {
        if state.basis().k() != self.basis().k() || state.basis().sites() != self.basis().sites() {
            return Err(invalid("state does not belong to this sector"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{chain_graph, pst_chain};
    use crate::state::fidelity_up_to_phase;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_time_is_identity() {
        let s = Sector::single(&pst_chain(5).unwrap()).unwrap();
        let psi = s.excited(&[SiteId::Index(2)]).unwrap();
        let out = s.evolve(&psi, 0.0).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn two_site_quarter_period() {
        let s = Sector::single(&chain_graph(&[1.0]).unwrap()).unwrap();
        let out = s.evolve(&s.excited(&[SiteId::Index(1)]).unwrap(), FRAC_PI_2).unwrap();
        assert!((out.amplitudes()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!(out.amplitudes()[0].norm() < 1e-14);
    }

    #[test]
    fn uniform_three_chain_end_to_end_sign() {
        let r2 = 2f64.sqrt();
        let s = Sector::single(&chain_graph(&[r2, r2]).unwrap()).unwrap();
        let out = s.evolve(&s.excited(&[SiteId::Index(1)]).unwrap(), FRAC_PI_2).unwrap();
        assert!((out.amplitudes()[2] + Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pst_chain_transfers_at_t0() {
        for m in [5, 7, 9] {
            let g = pst_chain(m).unwrap();
            let s = Sector::single(&g).unwrap();
            let out = s.evolve(&s.excited(&[SiteId::Index(1)]).unwrap(), PI / 2f64.sqrt()).unwrap();
            let target = s.excited(&[SiteId::Index(m)]).unwrap();
            assert!(1.0 - fidelity_up_to_phase(&out, &target).unwrap() < 1e-12, "M = {m}");
        }
    }

    #[test]
    fn propagator_matches_vector_evolution() {
        let g = pst_chain(7).unwrap();
        let s = Sector::new(&g, 2).unwrap();
        let psi = s.excited(&[SiteId::Index(1), SiteId::Index(4)]).unwrap();
        let u = s.cache().propagator(1.3);
        let a = &u * psi.amplitudes();
        let b = s.evolve(&psi, 1.3).unwrap();
        assert!((a - b.amplitudes()).norm() < 1e-12);
        assert!(s.evolve(&psi, f64::NAN).is_err());
    }
}
