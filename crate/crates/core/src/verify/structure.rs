use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::compiler::{cycle_pulse, StarCalibration};
use crate::dynamics::{apply_phase_set, Sector};
use crate::error::{invalid, Result};
use crate::net::{BasisMap, BlockTemplate, CouplingGraph, Side};

/// Largest Hamiltonian element between basis columns of different
/// subsystems.
pub fn direct_sum_residual(graph: &CouplingGraph, basis: &BasisMap) -> Result<f64> {
    if basis.len() != graph.len() {
        return Err(invalid(format!(
            "basis has {} columns for {} sites",
            basis.len(),
            graph.len()
        )));
    }
    let u = basis.matrix();
    let h = graph.hopping_matrix().map(|x| Complex64::new(x, 0.0));
    let eff = u.adjoint() * h * &u;
    let cols = basis.columns();
    let mut worst: f64 = 0.0;
    for i in 0..cols.len() {
        for j in 0..cols.len() {
            if cols[i].subsystem != cols[j].subsystem {
                worst = worst.max(eff[(i, j)].norm());
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct StarReflectionReport {
    pub m: usize,
    pub d: usize,
    pub t0: f64,
    /// Fitted global phase `g` of `e^{-iHt0}`.
    pub phase: Complex64,
    /// `max |e^{-iHt0} − gR|` over matrix elements.
    pub operator_residual: f64,
    /// Largest `‖P W_k − W_{k+1}‖` over both port layers.
    pub cycle_residual: f64,
}

/// Compares the block propagator at `t0` with the reflection
/// `W_0^n → W_0^{M+1−n}`, `W_{k≠0} → −W_{k≠0}`, and checks that the cycle
/// pulse steps through the W states.
pub fn check_star_reflection(block: &BlockTemplate, cal: &StarCalibration) -> Result<StarReflectionReport> {
    let (m, d) = (block.chain_length(), block.d());
    let sector = Sector::single(block.graph())?;
    let u = sector.cache().propagator(cal.t0);
    let dim = block.graph().len();
    let centre = (m + 1) / 2;
    let mut r = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 1..=m {
        let from = block.w_vector(n, 0)?;
        r += block.w_vector(m + 1 - n, 0)? * from.adjoint();
        if n != centre {
            for k in 1..d {
                let w = block.w_vector(n, k)?;
                r -= &w * w.adjoint();
            }
        }
    }
    let overlap = (block.w_vector(m, 0)?.adjoint() * &u * block.w_vector(1, 0)?)[(0, 0)];
    let phase = overlap / overlap.norm();
    let operator_residual = (&u - r * phase).iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut cycle_residual: f64 = 0.0;
    for side in [Side::Head, Side::Tail] {
        let layer = if side == Side::Head { 1 } else { m };
        let pulse = cycle_pulse(block, side);
        for k in 0..d {
            let w = sector.state(block.w_vector(layer, k)?)?;
            let out = apply_phase_set(&w, &pulse)?;
            let want = block.w_vector(layer, (k + 1) % d)?;
            cycle_residual = cycle_residual.max((out.amplitudes() - want).norm());
        }
    }
    Ok(StarReflectionReport {
        m,
        d,
        t0: cal.t0,
        phase,
        operator_residual,
        cycle_residual,
    })
}
