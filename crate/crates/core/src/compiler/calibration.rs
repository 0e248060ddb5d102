use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::star::{cross_transport, echo_schedule, port_layer};
use crate::dynamics::{run_schedule, PhaseSet, PulseSchedule, Sector};
use crate::error::{Error, Result};
use crate::net::{BlockTemplate, Prototype, Side, SiteId};
use crate::state::fidelity_up_to_phase;

/// Fidelity every calibrated primitive and compiled schedule must reach.
pub const FIDELITY_TOL: f64 = 1e-9;

const MULTIPLIERS: [f64; 3] = [0.5, 1.0, 2.0];
const SIGNS: [f64; 2] = [1.0, -1.0];

/// Accepted timings and pulse signs of the diamond-chain primitives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrototypeCalibration {
    /// Transfer time across a 3-site subsystem; the transport clock.
    pub hop: f64,
    /// Transfer time across a 2-site end subsystem.
    pub end: f64,
    /// Durations around the π pulse of vertex injection.
    pub vertex: (f64, f64),
    /// Sign of the π/2 pulse on the previous pair, per pair member `[a, b]`.
    pub pair_first_sign: [f64; 2],
    /// Sign of the final π/2 pulse on member `b`, per pair member `[a, b]`.
    pub pair_final_sign: [f64; 2],
}

/// Diamond count of the probe chain the prototype primitives are tuned on.
const PROBE_DIAMONDS: usize = 4;

pub fn calibrate_prototype() -> Result<PrototypeCalibration> {
    static CACHE: OnceLock<std::result::Result<PrototypeCalibration, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| search_prototype().map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::CalibrationFailure)
}

fn first_passing<T: Copy>(
    what: &str,
    candidates: impl IntoIterator<Item = T>,
    mut fid: impl FnMut(T) -> Result<f64>,
) -> Result<T> {
    let mut best = 0.0f64;
    for c in candidates {
        let f = fid(c)?;
        if f >= 1.0 - FIDELITY_TOL {
            return Ok(c);
        }
        best = best.max(f);
    }
    Err(Error::CalibrationFailure(format!(
        "{what}: best fidelity {best:.12}"
    )))
}

fn search_prototype() -> Result<PrototypeCalibration> {
    let p = Prototype::new(PROBE_DIAMONDS)?;
    let sector = Sector::single(p.graph())?;
    let lam = |i: usize| sector.state(p.lambda_vector(i).expect("λ index"));
    let site = |n: usize| sector.excited(&[SiteId::Index(n)]);
    let fid = |sched: &PulseSchedule, from: &crate::ExcitationState, to: &crate::ExcitationState| {
        fidelity_up_to_phase(&run_schedule(from, sched, &sector)?, to)
    };
    let evolve = |t: f64| {
        let mut s = PulseSchedule::new();
        s.evolve(t);
        s
    };

    // Left to right end of subsystem 1: λ_3 → λ_5.
    let hop = first_passing("3-site transfer", MULTIPLIERS.map(|m| m * FRAC_PI_2), |t| {
        fid(&evolve(t), &lam(3)?, &lam(5)?)
    })?;
    let end = first_passing("2-site transfer", MULTIPLIERS.map(|m| m * PI / 2f64.sqrt()), |t| {
        fid(&evolve(t), &site(1)?, &lam(2)?)
    })?;

    let pair1 = p.pair_sites(1);
    let both = |pair: usize, theta: f64| {
        let (a, b) = p.pair_sites(pair);
        PhaseSet::from_pairs([(a, theta), (b, theta)])
    };
    let combos: Vec<(f64, f64)> = MULTIPLIERS
        .iter()
        .flat_map(|&m1| MULTIPLIERS.map(|m2| (m1 * 3.0 * PI / 8.0, m2 * PI / 4.0)))
        .collect();
    let vertex = first_passing("vertex injection", combos, |(t1, t2)| {
        let mut s = PulseSchedule::new();
        s.evolve(t1).pulse(both(1, PI)).evolve(t2);
        fid(&s, &site(4)?, &lam(5)?)
    })?;

    let sign_pairs: Vec<(f64, f64)> = SIGNS
        .iter()
        .flat_map(|&s1| SIGNS.map(|s2| (s1, s2)))
        .collect();
    let mut pair_first_sign = [0.0; 2];
    let mut pair_final_sign = [0.0; 2];
    for (m, member) in [pair1.0.clone(), pair1.1.clone()].into_iter().enumerate() {
        let (s1, s2) = first_passing("pair-vertex injection", sign_pairs.clone(), |(s1, s2)| {
            let mut s = PulseSchedule::new();
            s.evolve(hop)
                .pulse(both(0, s1 * FRAC_PI_2))
                .evolve(hop)
                .pulse(PhaseSet::from_pairs([(pair1.1.clone(), s2 * FRAC_PI_2)]));
            fid(&s, &sector.excited(std::slice::from_ref(&member))?, &lam(5)?)
        })?;
        pair_first_sign[m] = s1;
        pair_final_sign[m] = s2;
    }

    Ok(PrototypeCalibration {
        hop,
        end,
        vertex,
        pair_first_sign,
        pair_final_sign,
    })
}

/// Monomial map of a cross-side transport on W coefficients: component `k`
/// of the departure side lands on component `target[k].0` of the arrival
/// side, multiplied by `target[k].1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportMap {
    pub target: Vec<(usize, Complex64)>,
}

/// Accepted constants of one star template.
#[derive(Clone, Debug, Serialize)]
pub struct StarCalibration {
    pub m: usize,
    pub d: usize,
    /// Block transfer time.
    pub t0: f64,
    /// `⟨W_0^M| e^{−iHt0} |W_0^1⟩`.
    pub reflection_phase: Complex64,
    /// Sign applied to the echo angles.
    pub echo_sign: f64,
    /// Cross-side transport maps, departing from the head and the tail side.
    pub head_to_tail: TransportMap,
    pub tail_to_head: TransportMap,
}

impl StarCalibration {
    pub fn transport(&self, from: Side) -> &TransportMap {
        match from {
            Side::Head => &self.head_to_tail,
            Side::Tail => &self.tail_to_head,
        }
    }
}

pub fn calibrate_star(block: &BlockTemplate) -> Result<Arc<StarCalibration>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<StarCalibration>>>> = OnceLock::new();
    let key = (block.chain_length(), block.d());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let cal = Arc::new(search_star(block)?);
    cache.lock().unwrap().insert(key, cal.clone());
    Ok(cal)
}

fn search_star(block: &BlockTemplate) -> Result<StarCalibration> {
    let m = block.chain_length();
    let d = block.d();
    let sector = Sector::single(block.graph())?;
    let w = |n: usize, k: usize| -> Result<DVector<Complex64>> { block.w_vector(n, k) };

    let t0 = first_passing("star transfer", MULTIPLIERS.map(|x| x * PI / 2f64.sqrt()), |t| {
        let out = sector.evolve(&sector.state(w(1, 0)?)?, t)?;
        let mut f = fidelity_up_to_phase(&out, &sector.state(w(m, 0)?)?)?;
        for k in 1..d {
            let stay = sector.evolve(&sector.state(w(1, k)?)?, t)?;
            f = f.min(fidelity_up_to_phase(&stay, &sector.state(w(1, k)?)?)?);
        }
        Ok(f)
    })?;
    let out = sector.evolve(&sector.state(w(1, 0)?)?, t0)?;
    let reflection_phase = w(m, 0)?.dotc(out.amplitudes());

    let echo_sign = if d == 1 {
        1.0
    } else {
        let src = block.port(Side::Head, 1);
        let dst = block.port(Side::Head, 2);
        let coeffs: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * 2.0 * k as f64 / d as f64))
            .collect();
        first_passing("phase echo", SIGNS, |sign| {
            let s = echo_schedule(block, t0, sign, Side::Head, 1, &coeffs)?;
            let out = run_schedule(&sector.excited(std::slice::from_ref(&src))?, &s, &sector)?;
            fidelity_up_to_phase(&out, &sector.excited(std::slice::from_ref(&dst))?)
        })?
    };

    let map = |from: Side| -> Result<TransportMap> {
        let sched = cross_transport(block, t0, from);
        let to = from.opposite();
        let mut target = Vec::with_capacity(d);
        for k in 0..d {
            let psi = sector.state(w(port_layer(block, from), k)?)?;
            let out = run_schedule(&psi, &sched, &sector)?;
            let overlaps: Vec<Complex64> = (0..d)
                .map(|k2| Ok(w(port_layer(block, to), k2)?.dotc(out.amplitudes())))
                .collect::<Result<_>>()?;
            let (best, amp) = overlaps
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .map(|(i, z)| (i, *z))
                .expect("d ≥ 1");
            if amp.norm() < 1.0 - FIDELITY_TOL {
                return Err(Error::CalibrationFailure(format!(
                    "cross transport of W_{k}: overlap {:.12}",
                    amp.norm()
                )));
            }
            target.push((best, amp / amp.norm()));
        }
        Ok(TransportMap { target })
    };

    Ok(StarCalibration {
        m,
        d,
        t0,
        reflection_phase,
        echo_sign,
        head_to_tail: map(Side::Head)?,
        tail_to_head: map(Side::Tail)?,
    })
}
