use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};

/// One basis vector in the single-excitation sector, tagged with the
/// subsystem it belongs to and its position inside that subsystem.
#[derive(Clone, Debug)]
pub struct BasisColumn {
    pub vector: DVector<Complex64>,
    pub subsystem: usize,
    pub position: usize,
}

/// Complete orthonormal basis of a single-excitation sector whose columns
/// are grouped into subsystems.
#[derive(Clone, Debug)]
pub struct BasisMap {
    columns: Vec<BasisColumn>,
}

pub const ORTHONORMAL_TOL: f64 = 1e-12;

impl BasisMap {
    pub fn new(columns: Vec<BasisColumn>) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(invalid("empty basis"));
        }
        if let Some(c) = columns.iter().find(|c| c.vector.len() != n) {
            return Err(invalid(format!(
                "basis is not square: {} columns of length {}",
                n,
                c.vector.len()
            )));
        }
        let map = BasisMap { columns };
        let residual = map.orthonormality_residual();
        if residual > ORTHONORMAL_TOL {
            return Err(invalid(format!(
                "basis columns are not orthonormal (residual {residual:.3e})"
            )));
        }
        Ok(map)
    }

    pub fn columns(&self) -> &[BasisColumn] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn num_subsystems(&self) -> usize {
        self.columns.iter().map(|c| c.subsystem + 1).max().unwrap_or(0)
    }

    /// Change-of-basis matrix with the columns as its columns.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |r, c| self.columns[c].vector[r])
    }

    /// `max |⟨c_i|c_j⟩ − δ_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let u = self.matrix();
        let g = u.adjoint() * &u;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Probability weight of a single-excitation amplitude vector on each
    /// subsystem.
    pub fn subsystem_weights(&self, amplitudes: &DVector<Complex64>) -> Vec<f64> {
        let mut w = vec![0.0; self.num_subsystems()];
        for c in &self.columns {
            w[c.subsystem] += c.vector.dotc(amplitudes).norm_sqr();
        }
        w
    }

    /// Column with the given tag.
    pub fn find(&self, subsystem: usize, position: usize) -> Option<&BasisColumn> {
        self.columns
            .iter()
            .find(|c| c.subsystem == subsystem && c.position == position)
    }
}

pub(crate) fn unit(n: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(n);
    v[i] = Complex64::new(1.0, 0.0);
    v
}

/// `(|i⟩ + sign·|j⟩)/√2`.
pub(crate) fn pair_combination(n: usize, i: usize, j: usize, sign: f64) -> DVector<Complex64> {
    let mut v = DVector::zeros(n);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    v[i] = Complex64::new(h, 0.0);
    v[j] = Complex64::new(sign * h, 0.0);
    v
}
