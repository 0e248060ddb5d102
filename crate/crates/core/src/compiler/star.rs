use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::calibration::{calibrate_star, StarCalibration, FIDELITY_TOL};
use crate::dynamics::{run_schedule, PhaseSet, PulseSchedule, Sector};
use crate::error::{invalid, Error, Result};
use crate::net::{BlockTemplate, Side, SiteId};
use crate::state::fidelity_up_to_phase;

/// Chain index of a side's extremal layer.
pub(crate) fn port_layer(block: &BlockTemplate, side: Side) -> usize {
    match side {
        Side::Head => 1,
        Side::Tail => block.chain_length(),
    }
}

/// `2πj/d` on port `j` of `side`, sending `W_k` to `W_{k+1}`.
pub fn cycle_pulse(block: &BlockTemplate, side: Side) -> PhaseSet {
    let d = block.d() as f64;
    PhaseSet::from_pairs(
        (1..=block.d()).map(|j| (block.port(side, j), 2.0 * PI * j as f64 / d)),
    )
}

/// Echo angles `θ_r` steering port `source` to `Σ_k c_k W_k` on its side.
fn echo_angles(d: usize, source: usize, coeffs: &[Complex64]) -> Vec<f64> {
    let mut theta = vec![0.0; d];
    for (k, c) in coeffs.iter().enumerate() {
        let r = (d - k) % d;
        theta[r] = coeffs[0].arg() - c.arg() - 2.0 * PI * (source * k) as f64 / d as f64;
    }
    theta
}

pub(crate) fn echo_schedule(
    block: &BlockTemplate,
    t0: f64,
    sign: f64,
    side: Side,
    source: usize,
    coeffs: &[Complex64],
) -> Result<PulseSchedule> {
    let d = block.d();
    if coeffs.len() != d {
        return Err(invalid(format!("{} coefficients for d = {d}", coeffs.len())));
    }
    if let Some(c) = coeffs.iter().find(|c| (c.norm() - 1.0).abs() > 1e-12) {
        return Err(invalid(format!("coefficient {c} is not unimodular")));
    }
    if source < 1 || source > d {
        return Err(invalid(format!("port index {source} out of range 1..={d}")));
    }
    let ports = block.ports(side);
    let mut s = PulseSchedule::new();
    for theta in echo_angles(d, source, coeffs) {
        s.evolve(t0)
            .pulse(PhaseSet::uniform(&ports, sign * theta))
            .evolve(t0)
            .pulse(cycle_pulse(block, side));
    }
    Ok(s)
}

/// `d` rounds of free evolution for `t0` followed by cycle pulses on both
/// sides; each round carries one W component across the centre.
pub(crate) fn cross_transport(block: &BlockTemplate, t0: f64, from: Side) -> PulseSchedule {
    let mut s = PulseSchedule::new();
    for _ in 0..block.d() {
        s.evolve(t0);
        let mut p = cycle_pulse(block, from.opposite());
        p.merge(&cycle_pulse(block, from));
        s.pulse(p);
    }
    s
}

/// `(1/√d) Σ_k c_k |W_k⟩` on the extremal layer of `side`.
pub fn w_mixture(block: &BlockTemplate, side: Side, coeffs: &[Complex64]) -> Result<DVector<Complex64>> {
    let mut v = DVector::zeros(block.graph().len());
    let n = port_layer(block, side);
    for (k, c) in coeffs.iter().enumerate() {
        v += block.w_vector(n, k)? * (*c / (block.d() as f64).sqrt());
    }
    Ok(v)
}

/// W coefficients `c_k = √d ⟨W_k|ψ⟩` of a state given by its amplitudes on
/// the ports `1..=d` of one side.
pub fn w_coefficients(d: usize, port_amplitudes: &[Complex64]) -> Vec<Complex64> {
    (0..d)
        .map(|k| {
            port_amplitudes
                .iter()
                .enumerate()
                .map(|(j0, a)| {
                    let j = (j0 + 1) as f64;
                    a * Complex64::from_polar(1.0, -2.0 * PI * j * k as f64 / d as f64)
                })
                .sum()
        })
        .collect()
}

/// Coefficients of port `j` itself, `c_k = e^{−2πijk/d}`.
pub fn port_coefficients(d: usize, j: usize) -> Vec<Complex64> {
    (0..d)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / d as f64))
        .collect()
}

fn side_of(block: &BlockTemplate, port: &SiteId) -> Result<(Side, usize)> {
    for side in [Side::Head, Side::Tail] {
        if let Some(j) = block.ports(side).iter().position(|p| p == port) {
            return Ok((side, j + 1));
        }
    }
    Err(invalid(format!("{port} is not an extremal port of the block")))
}

fn verify(
    sector: &Sector,
    sched: &PulseSchedule,
    from: &SiteId,
    target: DVector<Complex64>,
    what: impl Fn() -> String,
) -> Result<f64> {
    let out = run_schedule(&sector.excited(std::slice::from_ref(from))?, sched, sector)?;
    let f = fidelity_up_to_phase(&out, &sector.state(target)?)?;
    if f < 1.0 - FIDELITY_TOL {
        return Err(Error::VerificationFailed {
            what: what(),
            fidelity: f,
        });
    }
    Ok(f)
}

/// Phase echo taking `source` to `(1/√d) Σ_k c_k |W_k⟩` on the same side in
/// total evolution time `2d·t0`.
pub fn compile_phase_program(
    block: &BlockTemplate,
    source: &SiteId,
    coeffs: &[Complex64],
) -> Result<PulseSchedule> {
    let cal = calibrate_star(block)?;
    let (side, j) = side_of(block, source)?;
    let s = echo_schedule(block, cal.t0, cal.echo_sign, side, j, coeffs)?;
    let sector = Sector::single(block.graph())?;
    verify(&sector, &s, source, w_mixture(block, side, coeffs)?, || {
        format!("phase program from {source}")
    })?;
    Ok(s)
}

/// Bell pair `(|1d⟩ + i|1,d/2⟩)/√2` from port `1_1`, for even `d`.
pub fn compile_entangler(block: &BlockTemplate) -> Result<(PulseSchedule, DVector<Complex64>)> {
    let d = block.d();
    if d % 2 != 0 {
        return Err(invalid(format!("the entangler needs even d, got {d}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut ports = vec![Complex64::new(0.0, 0.0); d];
    ports[d - 1] += h;
    ports[d / 2 - 1] += Complex64::new(0.0, h);
    let coeffs = w_coefficients(d, &ports);
    let s = compile_phase_program(block, &block.port(Side::Head, 1), &coeffs)?;
    Ok((s, w_mixture(block, Side::Head, &coeffs)?))
}

/// Schedule on the template taking port `from` to port `to`, or `None` when
/// they coincide.
pub(crate) fn block_program(
    block: &BlockTemplate,
    cal: &StarCalibration,
    sector: &Sector,
    from: (Side, usize),
    to: (Side, usize),
) -> Result<PulseSchedule> {
    let d = block.d();
    let mut s = PulseSchedule::new();
    if from == to {
        return Ok(s);
    }
    let (side, j) = from;
    let target = if to.0 == side {
        port_coefficients(d, to.1)
    } else {
        let map = cal.transport(side);
        let want = port_coefficients(d, to.1);
        map.target
            .iter()
            .map(|&(k2, factor)| want[k2] / factor)
            .collect()
    };
    let own = port_coefficients(d, j);
    let ratio = target[0] / own[0];
    let aligned = target
        .iter()
        .zip(&own)
        .all(|(t, o)| (t - o * ratio).norm() < 1e-12);
    if !aligned {
        s.append(&echo_schedule(block, cal.t0, cal.echo_sign, side, j, &target)?);
    }
    if to.0 != side {
        s.append(&cross_transport(block, cal.t0, side));
    }
    let tgt = block.port(to.0, to.1);
    let n = block.graph().index_of(&tgt).unwrap();
    let mut v = DVector::zeros(block.graph().len());
    v[n] = Complex64::new(1.0, 0.0);
    verify(sector, &s, &block.port(side, j), v, || {
        format!("block route {side:?}{j} -> {:?}{}", to.0, to.1)
    })?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::build_star_block;

    #[test]
    fn routes_between_head_ports_in_2d_t0() {
        let b = build_star_block(5, 3).unwrap();
        let t0 = PI / 2f64.sqrt();
        for j in 1..=3 {
            for l in 1..=3 {
                let s = compile_phase_program(&b, &b.port(Side::Head, j), &port_coefficients(3, l))
                    .unwrap();
                assert!((s.duration() - 6.0 * t0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn own_coefficients_are_identity() {
        let b = build_star_block(5, 2).unwrap();
        let src = b.port(Side::Head, 2);
        let s = compile_phase_program(&b, &src, &port_coefficients(2, 2)).unwrap();
        let sector = Sector::single(b.graph()).unwrap();
        let out = run_schedule(&sector.excited(std::slice::from_ref(&src)).unwrap(), &s, &sector).unwrap();
        let f = fidelity_up_to_phase(&out, &sector.excited(&[src]).unwrap()).unwrap();
        assert!(1.0 - f < 1e-9);
    }

    #[test]
    fn rejects_non_unimodular() {
        let b = build_star_block(5, 2).unwrap();
        let c = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
        assert!(compile_phase_program(&b, &b.port(Side::Head, 1), &c).is_err());
        assert!(compile_phase_program(&b, &b.center(), &port_coefficients(2, 1)).is_err());
    }

    #[test]
    fn entangler_for_even_d() {
        for d in [2, 4] {
            let b = build_star_block(5, d).unwrap();
            let (s, target) = compile_entangler(&b).unwrap();
            let sector = Sector::single(b.graph()).unwrap();
            let out = run_schedule(&sector.excited(&[b.port(Side::Head, 1)]).unwrap(), &s, &sector)
                .unwrap();
            let f = fidelity_up_to_phase(&out, &sector.state(target).unwrap()).unwrap();
            assert!(1.0 - f < 1e-9, "d = {d}: {f}");
        }
        assert!(compile_entangler(&build_star_block(5, 3).unwrap()).is_err());
    }

    #[test]
    fn every_port_pair_routes() {
        for (m, d) in [(5, 1), (5, 2), (5, 3), (7, 2)] {
            let b = build_star_block(m, d).unwrap();
            let cal = calibrate_star(&b).unwrap();
            let sector = Sector::single(b.graph()).unwrap();
            for s1 in [Side::Head, Side::Tail] {
                for s2 in [Side::Head, Side::Tail] {
                    for j in 1..=d {
                        for l in 1..=d {
                            block_program(&b, &cal, &sector, (s1, j), (s2, l)).unwrap();
                        }
                    }
                }
            }
        }
    }
}
