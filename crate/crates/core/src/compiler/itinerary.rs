use std::collections::BTreeSet;

use crate::dynamics::{PhaseSet, PulseSchedule};
use crate::net::Coord;

const TIME_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Move {
    Evolve { t: f64, blocks: Vec<Coord> },
    Pulse { phases: PhaseSet, touched: Vec<Coord> },
}

/// A packet's schedule annotated with the blocks it occupies, plus the
/// points where it may wait for a whole number of idle quanta.
#[derive(Clone, Debug)]
pub(crate) struct Itinerary {
    pub start: Vec<Coord>,
    pub moves: Vec<Move>,
    pub end: Vec<Coord>,
    /// Move index before which the packet may first idle, and its block.
    pub first_idle: Option<(usize, Vec<Coord>)>,
    /// Last such point before the packet settles at its destination.
    pub last_idle: Option<(usize, Vec<Coord>)>,
    /// Duration after which an idling packet returns to its state.
    pub quantum: f64,
}

impl Itinerary {
    pub fn schedule(&self) -> PulseSchedule {
        let mut s = PulseSchedule::new();
        for m in &self.moves {
            match m {
                Move::Evolve { t, .. } => s.evolve(*t),
                Move::Pulse { phases, .. } => s.pulse(phases.clone()),
            };
        }
        s
    }

    pub fn duration(&self) -> f64 {
        self.moves
            .iter()
            .map(|m| match m {
                Move::Evolve { t, .. } => *t,
                Move::Pulse { .. } => 0.0,
            })
            .sum()
    }

    /// Copy with `quanta` idle quanta inserted at an idle point.
    pub fn with_idle(&self, first: bool, quanta: usize) -> Option<Itinerary> {
        if quanta == 0 {
            return Some(self.clone());
        }
        let (at, blocks) = if first {
            self.first_idle.clone()?
        } else {
            self.last_idle.clone()?
        };
        let mut out = self.clone();
        out.moves.insert(
            at,
            Move::Evolve {
                t: quanta as f64 * self.quantum,
                blocks,
            },
        );
        let shift = |p: &mut Option<(usize, Vec<Coord>)>| {
            if let Some((i, _)) = p {
                if *i > at || (first && *i == at) {
                    *i += 1;
                }
            }
        };
        shift(&mut out.last_idle);
        if !first {
            shift(&mut out.first_idle);
        }
        Some(out)
    }

    fn timeline(&self) -> (Vec<(f64, f64, &[Coord])>, Vec<(f64, &[Coord])>) {
        let mut spans = vec![(-1.0, 0.0, self.start.as_slice())];
        let mut pulses = Vec::new();
        let mut t = 0.0;
        for m in &self.moves {
            match m {
                Move::Evolve { t: dt, blocks } => {
                    spans.push((t, t + dt, blocks.as_slice()));
                    t += dt;
                }
                Move::Pulse { touched, .. } => pulses.push((t, touched.as_slice())),
            }
        }
        spans.push((t, f64::INFINITY, self.end.as_slice()));
        (spans, pulses)
    }

    /// Whether two packets can run concurrently: their occupied blocks stay
    /// at distance ≥ 2 whenever both evolve, and no pulse of one touches a
    /// block the other occupies.
    pub fn separated(&self, other: &Itinerary, dist: &impl Fn(&Coord, &Coord) -> usize) -> bool {
        let (sa, pa) = self.timeline();
        let (sb, pb) = other.timeline();
        for (s1, e1, b1) in &sa {
            for (s2, e2, b2) in &sb {
                if e1.min(*e2) - s1.max(*s2) > TIME_TOL
                    && b1.iter().any(|x| b2.iter().any(|y| dist(x, y) < 2))
                {
                    return false;
                }
            }
        }
        let clash = |pulses: &[(f64, &[Coord])], spans: &[(f64, f64, &[Coord])]| {
            pulses.iter().any(|(t, touched)| {
                let touched: BTreeSet<&Coord> = touched.iter().collect();
                spans.iter().any(|(s, e, b)| {
                    *t >= s - TIME_TOL && *t <= e + TIME_TOL && b.iter().any(|x| touched.contains(x))
                })
            })
        };
        !clash(&pa, &sb) && !clash(&pb, &sa)
    }

    /// Pulse events on the absolute time axis.
    pub fn pulse_events(&self) -> Vec<(f64, PhaseSet)> {
        let mut t = 0.0;
        let mut out = Vec::new();
        for m in &self.moves {
            match m {
                Move::Evolve { t: dt, .. } => t += dt,
                Move::Pulse { phases, .. } => out.push((t, phases.clone())),
            }
        }
        out
    }
}

/// Joint schedule running every itinerary from time zero until `makespan`.
pub(crate) fn merge(its: &[Itinerary], makespan: f64) -> PulseSchedule {
    let mut events: Vec<(f64, PhaseSet)> = its.iter().flat_map(|i| i.pulse_events()).collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut s = PulseSchedule::new();
    let mut now = 0.0;
    for (t, p) in events {
        if t - now > TIME_TOL {
            s.evolve(t - now);
            now = t;
        }
        s.pulse(p);
    }
    if makespan - now > TIME_TOL {
        s.evolve(makespan - now);
    }
    s
}
