use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::HermitianOperator;
use crate::error::{invalid, Result};
use crate::net::{BlockSite, BlockTemplate, Side, SiteId};
use crate::state::SectorBasis;

fn projector(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    v * v.adjoint()
}

fn op(block: &BlockTemplate, m: DMatrix<Complex64>) -> Result<HermitianOperator> {
    HermitianOperator::new(SectorBasis::single(block.graph()), m)
}

fn port_index(block: &BlockTemplate, port: &SiteId) -> Result<(Side, usize)> {
    match port {
        SiteId::Block {
            site: BlockSite::Arm { branch, depth: 1 },
            ..
        } if (1..=2 * block.d()).contains(branch) => Ok(block.branch_side(*branch)),
        _ => Err(invalid(format!("{port} is not a port of the block"))),
    }
}

fn site_vector(block: &BlockTemplate, site: &SiteId) -> DVector<Complex64> {
    let mut v = DVector::zeros(block.graph().len());
    v[block.graph().index_of(site).expect("port of the template")] = Complex64::new(1.0, 0.0);
    v
}

/// `2 Σ_n |s_n⟩⟨s_n| − 1` over the mirror-symmetric W_0 states
/// `|s_n⟩ = (|W_0^n⟩ + |W_0^{M+1−n}⟩)/√2`, with the centre as its own
/// symmetric state.
pub fn build_h1(block: &BlockTemplate) -> Result<HermitianOperator> {
    let dim = block.graph().len();
    let m = block.chain_length();
    let mut h = -DMatrix::<Complex64>::identity(dim, dim);
    for n in 1..=m.div_ceil(2) {
        let mirror = m + 1 - n;
        let s = if n == mirror {
            block.w_vector(n, 0)?
        } else {
            (block.w_vector(n, 0)? + block.w_vector(mirror, 0)?).unscale(2f64.sqrt())
        };
        h += projector(&s) * Complex64::new(2.0, 0.0);
    }
    op(block, h)
}

/// `1 − 2|p⟩⟨p|` for a port `p`.
pub fn build_port_reflection(block: &BlockTemplate, port: &SiteId) -> Result<HermitianOperator> {
    port_index(block, port)?;
    let dim = block.graph().len();
    let v = site_vector(block, port);
    op(block, DMatrix::identity(dim, dim) - projector(&v) * Complex64::new(2.0, 0.0))
}

fn bracket(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// `[H3, [H1, H2]]` with `H2`, `H3` the reflections on ports `j` and `l`.
pub fn commutator_controllability(block: &BlockTemplate, j: &SiteId, l: &SiteId) -> Result<HermitianOperator> {
    let h1 = build_h1(block)?;
    let h2 = build_port_reflection(block, j)?;
    let h3 = build_port_reflection(block, l)?;
    let c = bracket(h3.matrix(), &bracket(h1.matrix(), h2.matrix()));
    op(block, c)
}

/// Shape of the nested commutator for a head port `j` and a tail port `l`.
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub m: usize,
    pub d: usize,
    pub j: usize,
    pub l: usize,
    /// `c` in `c(|1j⟩⟨Ml| + h.c.)`, read off the `⟨1j|·|Ml⟩` entry.
    pub coefficient: f64,
    /// Nominal `4/d²`.
    pub nominal_coefficient: f64,
    /// Largest entry outside the `{|1j⟩, |Ml⟩}` block.
    pub off_support_residual: f64,
    /// Largest deviation from `c(|1j⟩⟨Ml| + h.c.)` inside that block.
    pub form_residual: f64,
}

pub fn commutator_report(block: &BlockTemplate, j: usize, l: usize) -> Result<CommutatorReport> {
    let d = block.d();
    if !(1..=d).contains(&j) || !(1..=d).contains(&l) {
        return Err(invalid(format!("port indices must lie in 1..={d}")));
    }
    let (pj, pl) = (block.port(Side::Head, j), block.port(Side::Tail, l));
    let c = commutator_controllability(block, &pj, &pl)?;
    let g = block.graph();
    let (a, b) = (g.index_of(&pj).unwrap(), g.index_of(&pl).unwrap());
    let m = c.matrix();
    let coefficient = m[(a, b)].re;
    let mut off: f64 = 0.0;
    let mut form: f64 = 0.0;
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let inside = (r == a || r == b) && (col == a || col == b);
            if !inside {
                off = off.max(m[(r, col)].norm());
            } else {
                let target = if r != col { coefficient } else { 0.0 };
                form = form.max((m[(r, col)] - Complex64::new(target, 0.0)).norm());
            }
        }
    }
    Ok(CommutatorReport {
        m: block.chain_length(),
        d,
        j,
        l,
        coefficient,
        nominal_coefficient: 4.0 / (d * d) as f64,
        off_support_residual: off,
        form_residual: form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::build_star_block;

    #[test]
    fn h1_is_a_reflection() {
        let b = build_star_block(5, 2).unwrap();
        let h = build_h1(&b).unwrap();
        let sq = h.matrix() * h.matrix();
        assert!((sq - DMatrix::identity(9, 9)).norm() < 1e-12);
    }

    #[test]
    fn cross_ports_give_a_clean_exchange_term() {
        for (m, d) in [(5, 1), (5, 2), (5, 3), (7, 2)] {
            let b = build_star_block(m, d).unwrap();
            for j in 1..=d {
                for l in 1..=d {
                    let r = commutator_report(&b, j, l).unwrap();
                    assert!(r.off_support_residual < 1e-12);
                    assert!(r.form_residual < 1e-12);
                    assert!((r.coefficient.abs() - 4.0 / d as f64).abs() < 1e-12, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn same_side_is_still_hermitian() {
        let b = build_star_block(5, 3).unwrap();
        let c = commutator_controllability(&b, &b.port(Side::Head, 1), &b.port(Side::Head, 2)).unwrap();
        assert!(c.hermiticity_residual() < 1e-14);
        assert!(commutator_controllability(&b, &b.center(), &b.port(Side::Head, 2)).is_err());
        assert!(commutator_report(&b, 0, 1).is_err());
    }
}
