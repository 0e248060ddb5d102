use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::itinerary::{merge, Itinerary};
use super::network::NetworkRouter;
use super::prototype::PrototypeRouter;
use crate::dynamics::{run_schedule, PulseSchedule, Sector};
use crate::error::{invalid, Error, Result};
use crate::net::{Coord, CouplingGraph, SiteId};
use crate::state::fidelity_up_to_phase;
use crate::verify::FaultMap;

/// Largest k-excitation sector in which a joint schedule is re-simulated.
pub const JOINT_CHECK_MAX_DIM: usize = 1024;

const TIME_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub id: usize,
    pub src: SiteId,
    pub dst: SiteId,
}

impl Packet {
    pub fn new(id: usize, src: impl Into<SiteId>, dst: impl Into<SiteId>) -> Self {
        Packet {
            id,
            src: src.into(),
            dst: dst.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduledPacket {
    pub packet: Packet,
    /// Idle periods before the packet starts moving.
    pub offset: usize,
    /// Idle periods inserted before the packet settles, to reach the makespan.
    pub padding: usize,
    /// The packet's own schedule; every packet's spans the full makespan.
    pub schedule: PulseSchedule,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiSchedule {
    pub packets: Vec<ScheduledPacket>,
    /// All packets' pulses on one time axis.
    pub joint: PulseSchedule,
    pub makespan: f64,
    /// Idle period; offsets and padding are multiples of it.
    pub quantum: f64,
    /// Simulated joint fidelity, when the sector is small enough to check.
    pub joint_fidelity: Option<f64>,
}

impl MultiSchedule {
    pub fn sources(&self) -> Vec<SiteId> {
        self.packets.iter().map(|p| p.packet.src.clone()).collect()
    }

    pub fn destinations(&self) -> Vec<SiteId> {
        self.packets.iter().map(|p| p.packet.dst.clone()).collect()
    }
}

fn sorted(packets: &[Packet]) -> Result<Vec<Packet>> {
    if packets.is_empty() {
        return Err(invalid("no packets to schedule"));
    }
    let mut out = packets.to_vec();
    out.sort_by_key(|p| p.id);
    let distinct = |f: &dyn Fn(&Packet) -> String, what: &str| {
        let mut seen = BTreeSet::new();
        for p in &out {
            if !seen.insert(f(p)) {
                return Err(invalid(format!("packets share the {what} {}", f(p))));
            }
        }
        Ok(())
    };
    distinct(&|p| p.id.to_string(), "id")?;
    distinct(&|p| p.src.to_string(), "source")?;
    distinct(&|p| p.dst.to_string(), "destination")?;
    Ok(out)
}

/// Greedy offsets in packet order, then padding so every packet ends at the
/// common makespan.
fn assign(
    packets: &[Packet],
    its: Vec<(Itinerary, usize)>,
    dist: impl Fn(&Coord, &Coord) -> usize,
) -> Result<(Vec<(usize, usize, Itinerary)>, f64)> {
    let mut placed: Vec<(usize, Itinerary)> = Vec::new();
    for (pk, (it, horizon)) in packets.iter().zip(its) {
        let found = (0..=horizon).find_map(|o| {
            let c = it.with_idle(true, o)?;
            placed.iter().all(|(_, p)| c.separated(p, &dist)).then_some((o, c))
        });
        match found {
            Some(x) => placed.push(x),
            None => {
                return Err(Error::SeparationUnsatisfiable(format!(
                    "packet {} cannot start within {horizon} idle periods",
                    pk.id
                )))
            }
        }
    }
    let makespan = placed.iter().map(|(_, it)| it.duration()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(placed.len());
    for (pk, (offset, it)) in packets.iter().zip(placed) {
        let gap = makespan - it.duration();
        let k = (gap / it.quantum).round();
        if (gap - k * it.quantum).abs() > TIME_TOL {
            return Err(Error::SeparationUnsatisfiable(format!(
                "packet {} finishes {gap:.6} before the makespan, not a whole number of idle periods",
                pk.id
            )));
        }
        let padded = it.with_idle(false, k as usize).ok_or_else(|| {
            Error::SeparationUnsatisfiable(format!("packet {} has no point to wait at", pk.id))
        })?;
        out.push((offset, k as usize, padded));
    }
    for i in 0..out.len() {
        for j in 0..i {
            if !out[i].2.separated(&out[j].2, &dist) {
                return Err(Error::SeparationUnsatisfiable(format!(
                    "packets {} and {} collide once padded to the makespan",
                    packets[j].id, packets[i].id
                )));
            }
        }
    }
    Ok((out, makespan))
}

/// Fidelity of the joint schedule taking the product of sources to the
/// product of destinations in the k-excitation sector.
pub fn joint_fidelity(graph: &CouplingGraph, ms: &MultiSchedule) -> Result<f64> {
    let sector = Sector::new(graph, ms.packets.len())?;
    let psi = sector.excited(&ms.sources())?;
    let out = run_schedule(&psi, &ms.joint, &sector)?;
    fidelity_up_to_phase(&out, &sector.excited(&ms.destinations())?)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn finish(
    graph: &CouplingGraph,
    packets: Vec<Packet>,
    placed: Vec<(usize, usize, Itinerary)>,
    makespan: f64,
    verify: impl Fn(&Packet, &PulseSchedule) -> Result<f64>,
) -> Result<MultiSchedule> {
    let its: Vec<Itinerary> = placed.iter().map(|(_, _, it)| it.clone()).collect();
    let quantum = its[0].quantum;
    let mut out = Vec::with_capacity(packets.len());
    for (packet, (offset, padding, it)) in packets.into_iter().zip(placed) {
        let schedule = it.schedule();
        let fidelity = verify(&packet, &schedule)?;
        out.push(ScheduledPacket {
            packet,
            offset,
            padding,
            schedule,
            fidelity,
        });
    }
    let mut ms = MultiSchedule {
        packets: out,
        joint: merge(&its, makespan),
        makespan,
        quantum,
        joint_fidelity: None,
    };
    if binomial(graph.len(), ms.packets.len()) <= JOINT_CHECK_MAX_DIM {
        let f = joint_fidelity(graph, &ms)?;
        if f < 1.0 - super::calibration::FIDELITY_TOL {
            return Err(Error::VerificationFailed {
                what: format!("joint schedule of {} packets", ms.packets.len()),
                fidelity: f,
            });
        }
        ms.joint_fidelity = Some(f);
    }
    Ok(ms)
}

/// Concurrent packets on a diamond chain, hopping with local pulses.
pub fn schedule_multi_1d(router: &PrototypeRouter, packets: &[Packet]) -> Result<MultiSchedule> {
    let packets = sorted(packets)?;
    let its = packets
        .iter()
        .map(|p| {
            let it = router.itinerary(&p.src, &p.dst)?;
            let len = router.port_of(&p.src)?.pair.abs_diff(router.port_of(&p.dst)?.pair) + 1;
            Ok((it, 4 * len))
        })
        .collect::<Result<Vec<_>>>()?;
    let (placed, makespan) = assign(&packets, its, |a, b| a.0[0].abs_diff(b.0[0]) as usize)?;
    finish(router.prototype().graph(), packets, placed, makespan, |p, s| {
        router.verify_sites(s, &p.src, &p.dst)
    })
}

/// Concurrent packets on a tiled network.
pub fn schedule_multi(router: &NetworkRouter, packets: &[Packet], faults: &FaultMap) -> Result<MultiSchedule> {
    let packets = sorted(packets)?;
    let its = packets
        .iter()
        .map(|p| {
            let plan = router.plan(&p.src, &p.dst, faults)?;
            Ok((router.itinerary(&plan)?, 4 * plan.path.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = router.network().spec().clone();
    let (placed, makespan) = assign(&packets, its, |a, b| spec.distance(a, b))?;
    finish(router.network().graph(), packets, placed, makespan, |p, s| {
        router.verified(&p.src, &p.dst, s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{build_prototype_1d, build_star_block, tile_network, LatticeKind, LatticeSpec};

    fn router(n: usize) -> PrototypeRouter {
        PrototypeRouter::new(&build_prototype_1d(n).unwrap()).unwrap()
    }

    #[test]
    fn same_direction_pair_on_six_diamonds() {
        let r = router(6);
        let ms = schedule_multi_1d(&r, &[Packet::new(0, 4, 10), Packet::new(1, 10, 16)]).unwrap();
        let f = ms.joint_fidelity.unwrap();
        assert!(1.0 - f < 1e-9, "joint fidelity {f}");
        for p in &ms.packets {
            assert!((p.schedule.duration() - ms.makespan).abs() < 1e-9);
        }
    }

    #[test]
    fn head_on_is_unsatisfiable() {
        let r = router(6);
        let e = schedule_multi_1d(&r, &[Packet::new(0, 4, 16), Packet::new(1, 16, 4)]).unwrap_err();
        assert!(matches!(e, Error::SeparationUnsatisfiable(_)), "{e}");
    }

    #[test]
    fn duplicates_rejected() {
        let r = router(4);
        assert!(schedule_multi_1d(&r, &[Packet::new(0, 4, 10), Packet::new(1, 4, 13)]).is_err());
        assert!(schedule_multi_1d(&r, &[Packet::new(0, 4, 10), Packet::new(1, 7, 10)]).is_err());
        assert!(schedule_multi_1d(&r, &[]).is_err());
    }

    #[test]
    fn far_apart_rows_need_no_offset() {
        let net = tile_network(
            &LatticeSpec::new(LatticeKind::Square, vec![3, 3]).unwrap(),
            &build_star_block(5, 2).unwrap(),
        )
        .unwrap();
        let r = NetworkRouter::new(net.clone()).unwrap();
        let ports = net.boundary_ports();
        let at = |b: [i32; 2]| -> Vec<_> { ports.iter().filter(|p| p.0 == Coord::new(b)).cloned().collect() };
        let common = |u: [i32; 2], v: [i32; 2]| {
            let pv = at(v);
            at(u)
                .into_iter()
                .find_map(|p| pv.iter().find(|q| (q.1, q.2) == (p.1, p.2)).map(|q| (p.3.clone(), q.3.clone())))
                .unwrap()
        };
        let (s0, s2) = common([0, 0], [2, 0]);
        let (d0, d2) = common([0, 2], [2, 2]);
        let packets = [Packet::new(0, s0, d0), Packet::new(1, s2, d2)];
        let ms = schedule_multi(&r, &packets, &FaultMap::empty()).unwrap();
        assert!(ms.packets.iter().all(|p| p.offset == 0 && p.padding == 0));
    }
}
