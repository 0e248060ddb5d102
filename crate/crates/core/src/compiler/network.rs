use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::calibration::{calibrate_star, StarCalibration, FIDELITY_TOL};
use super::itinerary::{Itinerary, Move};
use super::star::block_program;
use crate::dynamics::{run_schedule, PhaseSet, PulseSchedule, Sector, Step};
use crate::error::{invalid, Error, Result};
use crate::net::{BlockSite, Coord, Side, SiteId, TiledNetwork};
use crate::state::fidelity_up_to_phase;
use crate::verify::{block_distances, FaultMap};

/// Entry and exit port of one block on a route.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockDirective {
    pub block: Coord,
    pub enter: (Side, usize),
    pub exit: (Side, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoutePlan {
    pub src: SiteId,
    pub dst: SiteId,
    pub path: Vec<Coord>,
    pub directives: Vec<BlockDirective>,
    /// Idle quanta spent at the source before moving.
    pub offset: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompiledRoute {
    pub plan: RoutePlan,
    pub schedule: PulseSchedule,
    pub duration: f64,
    pub fidelity: f64,
    pub pulses: usize,
}

/// Shortest block path avoiding faults; among equal lengths the
/// lexicographically smallest sequence is taken, and the path between two
/// blocks is the same in both directions.
pub fn plan_path(net: &TiledNetwork, src: &Coord, dst: &Coord, faults: &FaultMap) -> Result<Vec<Coord>> {
    let spec = net.spec();
    for c in [src, dst] {
        if !spec.contains(c) {
            return Err(invalid(format!("block {c} is not in the lattice")));
        }
        if faults.is_faulty(c) {
            return Err(invalid(format!("block {c} is faulty")));
        }
    }
    let (a, b) = if src <= dst { (src, dst) } else { (dst, src) };
    let dist = block_distances(spec, faults, b);
    let Some(&len) = dist.get(a) else {
        return Err(Error::NoRoute {
            from: src.to_string(),
            to: dst.to_string(),
        });
    };
    let mut path = vec![a.clone()];
    let mut cur = a.clone();
    for left in (0..len).rev() {
        cur = spec
            .neighbors(&cur)
            .into_iter()
            .find(|n| dist.get(n) == Some(&left))
            .expect("a neighbour one step closer exists");
        path.push(cur.clone());
    }
    if a != src {
        path.reverse();
    }
    Ok(path)
}

/// Pulse moving an excitation across a link: π on the pair member carrying
/// the negative coupling.
pub fn compile_hop(net: &TiledNetwork, link: usize) -> Result<PulseSchedule> {
    let l = net
        .links()
        .get(link)
        .ok_or_else(|| invalid(format!("no link {link}")))?;
    let mut s = PulseSchedule::new();
    s.pulse(PhaseSet::from_pairs([(l.q(), PI)]));
    Ok(s)
}

/// Compiles and verifies routes on one tiled network.
pub struct NetworkRouter {
    net: TiledNetwork,
    sector: Sector,
    template_sector: Sector,
    cal: Arc<StarCalibration>,
    programs: Mutex<HashMap<((Side, usize), (Side, usize)), PulseSchedule>>,
}

impl NetworkRouter {
    pub fn new(net: TiledNetwork) -> Result<Self> {
        let cal = calibrate_star(net.template())?;
        Ok(NetworkRouter {
            sector: Sector::single(net.graph())?,
            template_sector: Sector::single(net.template().graph())?,
            net,
            cal,
            programs: Mutex::new(HashMap::new()),
        })
    }

    pub fn network(&self) -> &TiledNetwork {
        &self.net
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn calibration(&self) -> &StarCalibration {
        &self.cal
    }

    /// Idle quantum: a port state returns to itself after `2t0`.
    pub fn quantum(&self) -> f64 {
        2.0 * self.cal.t0
    }

    fn program(&self, from: (Side, usize), to: (Side, usize)) -> Result<PulseSchedule> {
        if let Some(p) = self.programs.lock().unwrap().get(&(from, to)) {
            return Ok(p.clone());
        }
        let p = block_program(self.net.template(), &self.cal, &self.template_sector, from, to)?;
        self.programs.lock().unwrap().insert((from, to), p.clone());
        Ok(p)
    }

    fn endpoint(&self, site: &SiteId) -> Result<(Coord, Side, usize)> {
        if !self.net.graph().contains(site) {
            return Err(invalid(format!("{site} is not a site of the network")));
        }
        self.net.locate_boundary_port(site).ok_or_else(|| {
            Error::UnsupportedInput(format!("{site} is not a boundary port; routes start and end on boundary ports"))
        })
    }

    pub fn plan(&self, src: &SiteId, dst: &SiteId, faults: &FaultMap) -> Result<RoutePlan> {
        let (b0, s0, j0) = self.endpoint(src)?;
        let (b1, s1, j1) = self.endpoint(dst)?;
        let path = plan_path(&self.net, &b0, &b1, faults)?;
        let spec = self.net.spec();
        let mut directives = Vec::with_capacity(path.len());
        for (i, b) in path.iter().enumerate() {
            let enter = if i == 0 {
                (s0, j0)
            } else {
                spec.facing(b, &path[i - 1]).expect("path blocks are adjacent")
            };
            let exit = if i + 1 == path.len() {
                (s1, j1)
            } else {
                spec.facing(b, &path[i + 1]).expect("path blocks are adjacent")
            };
            directives.push(BlockDirective {
                block: b.clone(),
                enter,
                exit,
            });
        }
        Ok(RoutePlan {
            src: src.clone(),
            dst: dst.clone(),
            path,
            directives,
            offset: 0,
        })
    }

    /// Blocks whose sites a pulse touches.
    fn touched(&self, p: &PhaseSet) -> Vec<Coord> {
        let mut out: Vec<Coord> = p
            .sites()
            .flat_map(|s| match s {
                SiteId::Block { block, .. } => vec![block.clone()],
                SiteId::Pair { link, .. } => {
                    let l = &self.net.links()[*link];
                    vec![l.from.clone(), l.to.clone()]
                }
                SiteId::Index(_) => vec![],
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Template schedule lifted onto `block`; port pulses on shared pairs
    /// act equally on both members.
    fn lift(&self, block: &Coord, s: &PulseSchedule) -> Result<Vec<Move>> {
        let t = self.net.template();
        let mut out = Vec::new();
        for step in s.steps() {
            match step {
                Step::Evolve(dt) => out.push(Move::Evolve {
                    t: *dt,
                    blocks: vec![block.clone()],
                }),
                Step::Phases(p) => {
                    let mut lifted = PhaseSet::new();
                    for (site, theta) in p.iter() {
                        let branch = match site {
                            SiteId::Block {
                                site: BlockSite::Arm { branch, depth: 1 },
                                ..
                            } => *branch,
                            _ => return Err(invalid(format!("template pulse on non-port {site}"))),
                        };
                        let (side, j) = t.branch_side(branch);
                        for s in self.net.port_pulse_sites(block, side, j)? {
                            lifted.add(s, theta);
                        }
                    }
                    out.push(Move::Pulse {
                        touched: self.touched(&lifted),
                        phases: lifted,
                    });
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn itinerary(&self, plan: &RoutePlan) -> Result<Itinerary> {
        let mut moves = Vec::new();
        let mut last_idle = None;
        for (i, dir) in plan.directives.iter().enumerate() {
            if i + 1 == plan.directives.len() {
                last_idle = Some((moves.len(), vec![dir.block.clone()]));
            }
            moves.extend(self.lift(&dir.block, &self.program(dir.enter, dir.exit)?)?);
            if let Some(next) = plan.path.get(i + 1) {
                let link = self.net.link_between(&dir.block, next).expect("adjacent blocks share a link");
                let hop = PhaseSet::from_pairs([(link.q(), PI)]);
                moves.push(Move::Pulse {
                    touched: self.touched(&hop),
                    phases: hop,
                });
            }
        }
        let start = vec![plan.path[0].clone()];
        let end = vec![plan.path.last().unwrap().clone()];
        Ok(Itinerary {
            first_idle: Some((0, start.clone())),
            start,
            moves,
            end,
            last_idle,
            quantum: self.quantum(),
        })
    }

    /// Simulated fidelity of `schedule` taking `|src⟩` to `|dst⟩`.
    pub fn fidelity(&self, src: &SiteId, dst: &SiteId, schedule: &PulseSchedule) -> Result<f64> {
        let psi = self.sector.excited(std::slice::from_ref(src))?;
        let out = run_schedule(&psi, schedule, &self.sector)?;
        fidelity_up_to_phase(&out, &self.sector.excited(std::slice::from_ref(dst))?)
    }

    pub(crate) fn verified(&self, src: &SiteId, dst: &SiteId, schedule: &PulseSchedule) -> Result<f64> {
        let f = self.fidelity(src, dst, schedule)?;
        if f < 1.0 - FIDELITY_TOL {
            return Err(Error::VerificationFailed {
                what: format!("route {src} -> {dst}"),
                fidelity: f,
            });
        }
        Ok(f)
    }

    pub fn compile_route(&self, src: &SiteId, dst: &SiteId, faults: &FaultMap) -> Result<CompiledRoute> {
        let plan = self.plan(src, dst, faults)?;
        if src == dst {
            return Ok(CompiledRoute {
                plan,
                schedule: PulseSchedule::new(),
                duration: 0.0,
                fidelity: 1.0,
                pulses: 0,
            });
        }
        let schedule = self.itinerary(&plan)?.schedule();
        let fidelity = self.verified(src, dst, &schedule)?;
        Ok(CompiledRoute {
            duration: schedule.duration(),
            pulses: schedule.pulse_count(),
            plan,
            schedule,
            fidelity,
        })
    }
}

pub fn compile_route(net: &TiledNetwork, src: &SiteId, dst: &SiteId, faults: &FaultMap) -> Result<CompiledRoute> {
    NetworkRouter::new(net.clone())?.compile_route(src, dst, faults)
}
