use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::calibration::{calibrate_prototype, PrototypeCalibration, FIDELITY_TOL};
use super::itinerary::{Itinerary, Move};
use crate::dynamics::{run_schedule, PhaseSet, PulseSchedule, Sector, Step};
use crate::error::{invalid, Error, Result};
use crate::net::{Coord, CouplingGraph, Prototype, SiteId};
use crate::state::fidelity_up_to_phase;

/// Effective port of the diamond chain: the symmetric (`owner == pair`) or
/// antisymmetric (`owner == pair + 1`) combination of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Port {
    pub pair: usize,
    pub owner: usize,
}

impl Port {
    /// Position on the line `R_0, L_1, R_1, L_2, …, L_N` of all ports.
    fn position(self) -> usize {
        if self.owner == self.pair {
            2 * self.pair
        } else {
            2 * self.pair + 1
        }
    }

    fn at(position: usize) -> Port {
        let pair = position / 2;
        Port {
            pair,
            owner: pair + position % 2,
        }
    }
}

/// How a packet enters or leaves the chain at a given site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    /// Site 1 or `3N+1`.
    End(usize),
    /// Centre `3n+1` of a 3-site subsystem.
    Vertex(usize),
    /// Member 0 (`3n+2`) or 1 (`3n+3`) of pair `n`.
    PairVertex(usize, usize),
}

/// Pulse used to hop between pair combinations during transport.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TransportPulse {
    /// π on member `b` of every pair at once.
    #[default]
    Global,
    /// π on member `b` of the crossed pair only.
    Local,
}

/// A compiled diamond-chain route with its accounting.
#[derive(Clone, Debug, Serialize)]
pub struct Route1d {
    pub schedule: PulseSchedule,
    pub injection: PulseSchedule,
    pub transport: PulseSchedule,
    pub extraction: PulseSchedule,
    /// 3-site subsystems traversed; each takes one hop period.
    pub hops: usize,
    pub transport_duration: f64,
    pub fidelity: f64,
    pub src_port: Option<Port>,
    pub dst_port: Option<Port>,
}

/// One elementary move of the transport walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Walk {
    /// Free evolution across the 3-site subsystem `owner`.
    Cross(usize),
    /// Pulse on the pair, flipping ownership between `from` and `to`.
    Flip { pair: usize, from: usize, to: usize },
}

/// Router for one diamond chain; holds its sector and calibration.
#[derive(Clone, Debug)]
pub struct PrototypeRouter {
    proto: Prototype,
    sector: Sector,
    cal: PrototypeCalibration,
}

impl PrototypeRouter {
    pub fn new(graph: &CouplingGraph) -> Result<Self> {
        let proto = Prototype::from_graph(graph)?;
        Ok(PrototypeRouter {
            sector: Sector::single(proto.graph())?,
            proto,
            cal: calibrate_prototype()?,
        })
    }

    pub fn prototype(&self) -> &Prototype {
        &self.proto
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn calibration(&self) -> &PrototypeCalibration {
        &self.cal
    }

    pub fn endpoint(&self, site: &SiteId) -> Result<Endpoint> {
        let n_sites = self.proto.num_sites();
        let big_n = self.proto.diamonds();
        let s = match site {
            SiteId::Index(s) if (1..=n_sites).contains(s) => *s,
            _ => return Err(invalid(format!("{site} is not a site of the chain"))),
        };
        Ok(if s == 1 || s == n_sites {
            Endpoint::End(s)
        } else if s % 3 == 1 {
            Endpoint::Vertex((s - 1) / 3)
        } else {
            let n = (s - 2) / 3;
            if n == 0 || n + 1 >= big_n {
                return Err(Error::UnsupportedInput(format!(
                    "site {s} belongs to a pair next to an end subsystem"
                )));
            }
            Endpoint::PairVertex(n, (s - 2) % 3)
        })
    }

    /// Port a site is injected into.
    pub fn port_of(&self, site: &SiteId) -> Result<Port> {
        Ok(match self.endpoint(site)? {
            Endpoint::End(1) => Port { pair: 0, owner: 0 },
            Endpoint::End(_) => {
                let n = self.proto.diamonds();
                Port {
                    pair: n - 1,
                    owner: n,
                }
            }
            Endpoint::Vertex(n) | Endpoint::PairVertex(n, _) => Port { pair: n, owner: n },
        })
    }

    /// Blocks a site occupies before injection.
    pub(crate) fn site_blocks(&self, site: &SiteId) -> Result<Vec<usize>> {
        Ok(match self.endpoint(site)? {
            Endpoint::End(1) => vec![0],
            Endpoint::End(_) => vec![self.proto.diamonds()],
            Endpoint::Vertex(n) => vec![n],
            Endpoint::PairVertex(n, _) => vec![n, n + 1],
        })
    }

    fn both(&self, pair: usize, theta: f64) -> PhaseSet {
        let (a, b) = self.proto.pair_sites(pair);
        PhaseSet::from_pairs([(a, theta), (b, theta)])
    }

    /// Schedule taking `|site⟩` to its port state up to a phase.
    pub fn compile_injection(&self, site: &SiteId) -> Result<PulseSchedule> {
        let c = &self.cal;
        let mut s = PulseSchedule::new();
        match self.endpoint(site)? {
            Endpoint::End(_) => {
                s.evolve(c.end);
            }
            Endpoint::Vertex(n) => {
                s.evolve(c.vertex.0).pulse(self.both(n, PI)).evolve(c.vertex.1);
            }
            Endpoint::PairVertex(n, member) => {
                let (_, b) = self.proto.pair_sites(n);
                s.evolve(c.hop)
                    .pulse(self.both(n - 1, c.pair_first_sign[member] * FRAC_PI_2))
                    .evolve(c.hop)
                    .pulse(PhaseSet::from_pairs([(b, c.pair_final_sign[member] * FRAC_PI_2)]));
            }
        }
        self.check(&s, &self.site_vector(site)?, &self.port_vector(self.port_of(site)?), || {
            format!("injection from {site}")
        })?;
        Ok(s)
    }

    /// Time-reversed injection with negated angles.
    pub fn compile_extraction(&self, site: &SiteId) -> Result<PulseSchedule> {
        let s = self.compile_injection(site)?.reversed_negated();
        self.check(&s, &self.port_vector(self.port_of(site)?), &self.site_vector(site)?, || {
            format!("extraction to {site}")
        })?;
        Ok(s)
    }

    fn site_vector(&self, site: &SiteId) -> Result<DVector<Complex64>> {
        Ok(self.sector.excited(std::slice::from_ref(site))?.into_amplitudes())
    }

    pub fn port_vector(&self, port: Port) -> DVector<Complex64> {
        self.proto
            .lambda_vector(self.proto.port_lambda(port.pair, port.owner))
            .expect("port within the chain")
    }

    pub(crate) fn walk(&self, from: Port, to: Port) -> Vec<Walk> {
        let (a, b) = (from.position(), to.position());
        let mut out = Vec::new();
        let step = |x: usize, y: usize| {
            let (p, q) = (Port::at(x), Port::at(y));
            if p.pair == q.pair {
                Walk::Flip {
                    pair: p.pair,
                    from: p.owner,
                    to: q.owner,
                }
            } else {
                Walk::Cross(p.owner)
            }
        };
        if a < b {
            for x in a..b {
                out.push(step(x, x + 1));
            }
        } else {
            for x in (b + 1..=a).rev() {
                out.push(step(x, x - 1));
            }
        }
        out
    }

    pub(crate) fn transport_pulse(&self, pair: usize, mode: TransportPulse) -> PhaseSet {
        match mode {
            TransportPulse::Global => PhaseSet::uniform(
                &(0..self.proto.diamonds())
                    .map(|p| self.proto.pair_sites(p).1)
                    .collect::<Vec<_>>(),
                PI,
            ),
            TransportPulse::Local => PhaseSet::from_pairs([(self.proto.pair_sites(pair).1, PI)]),
        }
    }

    pub fn compile_transport(&self, from: Port, to: Port, mode: TransportPulse) -> (PulseSchedule, usize) {
        let mut s = PulseSchedule::new();
        let mut hops = 0;
        for w in self.walk(from, to) {
            match w {
                Walk::Cross(_) => {
                    s.evolve(self.cal.hop);
                    hops += 1;
                }
                Walk::Flip { pair, .. } => {
                    s.pulse(self.transport_pulse(pair, mode));
                }
            }
        }
        (s, hops)
    }

    pub fn compile_route(&self, src: &SiteId, dst: &SiteId, mode: TransportPulse) -> Result<Route1d> {
        self.endpoint(src)?;
        self.endpoint(dst)?;
        if src == dst {
            return Ok(Route1d {
                schedule: PulseSchedule::new(),
                injection: PulseSchedule::new(),
                transport: PulseSchedule::new(),
                extraction: PulseSchedule::new(),
                hops: 0,
                transport_duration: 0.0,
                fidelity: 1.0,
                src_port: None,
                dst_port: None,
            });
        }
        let (ps, pd) = (self.port_of(src)?, self.port_of(dst)?);
        let injection = self.compile_injection(src)?;
        let extraction = self.compile_extraction(dst)?;
        let (transport, hops) = self.compile_transport(ps, pd, mode);
        let schedule = injection.clone().then(&transport).then(&extraction);
        let fidelity = self.check(&schedule, &self.site_vector(src)?, &self.site_vector(dst)?, || {
            format!("route {src} -> {dst}")
        })?;
        Ok(Route1d {
            schedule,
            injection,
            transport_duration: hops as f64 * self.cal.hop,
            transport,
            extraction,
            hops,
            fidelity,
            src_port: Some(ps),
            dst_port: Some(pd),
        })
    }

    pub(crate) fn verify_sites(&self, sched: &PulseSchedule, src: &SiteId, dst: &SiteId) -> Result<f64> {
        self.check(sched, &self.site_vector(src)?, &self.site_vector(dst)?, || {
            format!("route {src} -> {dst}")
        })
    }

    /// Route annotated with subsystem occupancy, using local transport pulses.
    pub(crate) fn itinerary(&self, src: &SiteId, dst: &SiteId) -> Result<Itinerary> {
        let blk = |n: usize| Coord::new([n as i32]);
        let blocks = |v: Vec<usize>| v.into_iter().map(blk).collect::<Vec<_>>();
        let touched = |p: &PhaseSet| {
            let mut out: Vec<Coord> = p
                .sites()
                .flat_map(|s| match s {
                    SiteId::Index(s) if s % 3 == 1 => vec![blk((s - 1) / 3)],
                    SiteId::Index(s) => vec![blk((s - 2) / 3), blk((s - 2) / 3 + 1)],
                    _ => vec![],
                })
                .collect();
            out.sort();
            out.dedup();
            out
        };
        let annotate = |s: &PulseSchedule, occ: &[Coord]| -> Vec<Move> {
            s.steps()
                .iter()
                .map(|step| match step {
                    Step::Evolve(t) => Move::Evolve {
                        t: *t,
                        blocks: occ.to_vec(),
                    },
                    Step::Phases(p) => Move::Pulse {
                        touched: touched(p),
                        phases: p.clone(),
                    },
                })
                .collect()
        };
        let (ps, pd) = (self.port_of(src)?, self.port_of(dst)?);
        let start = blocks(self.site_blocks(src)?);
        let end = blocks(self.site_blocks(dst)?);
        let mut moves = annotate(&self.compile_injection(src)?, &start);
        let mut first_idle = None;
        let mut last_idle = None;
        let mut note = |at: usize, port: Port| {
            if self.proto.is_three_chain(port.owner) {
                let idle = Some((at, vec![blk(port.owner)]));
                if first_idle.is_none() {
                    first_idle = idle.clone();
                }
                last_idle = idle;
            }
        };
        note(moves.len(), ps);
        let (a, b) = (ps.position(), pd.position());
        for (i, w) in self.walk(ps, pd).into_iter().enumerate() {
            match w {
                Walk::Cross(owner) => moves.push(Move::Evolve {
                    t: self.cal.hop,
                    blocks: vec![blk(owner)],
                }),
                Walk::Flip { pair, .. } => {
                    let p = self.transport_pulse(pair, TransportPulse::Local);
                    moves.push(Move::Pulse {
                        touched: touched(&p),
                        phases: p,
                    });
                }
            }
            let pos = if a < b { a + i + 1 } else { a - i - 1 };
            note(moves.len(), Port::at(pos));
        }
        moves.extend(annotate(&self.compile_extraction(dst)?, &end));
        Ok(Itinerary {
            start,
            moves,
            end,
            first_idle,
            last_idle,
            quantum: 2.0 * self.cal.hop,
        })
    }

    fn check(
        &self,
        sched: &PulseSchedule,
        from: &DVector<Complex64>,
        to: &DVector<Complex64>,
        what: impl Fn() -> String,
    ) -> Result<f64> {
        let out = run_schedule(&self.sector.state(from.clone())?, sched, &self.sector)?;
        let f = fidelity_up_to_phase(&out, &self.sector.state(to.clone())?)?;
        if f < 1.0 - FIDELITY_TOL {
            return Err(Error::VerificationFailed {
                what: what(),
                fidelity: f,
            });
        }
        Ok(f)
    }
}

pub fn compile_injection_1d(graph: &CouplingGraph, site: &SiteId) -> Result<PulseSchedule> {
    PrototypeRouter::new(graph)?.compile_injection(site)
}

pub fn compile_1d_route(graph: &CouplingGraph, src: &SiteId, dst: &SiteId) -> Result<Route1d> {
    PrototypeRouter::new(graph)?.compile_route(src, dst, TransportPulse::Global)
}
