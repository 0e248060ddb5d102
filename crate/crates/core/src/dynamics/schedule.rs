use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::Sector;
use crate::error::{invalid, Error, Result};
use crate::net::SiteId;
use crate::state::ExcitationState;

/// Angles below this are dropped from phase sets.
const ZERO_ANGLE: f64 = 1e-14;

/// Representative of `θ` in `(−π, π]`.
pub fn reduce_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Simultaneous single-site `Z^{(θ)}` gates, `|1⟩ → e^{iθ}|1⟩`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<SiteId, f64>", into = "BTreeMap<SiteId, f64>")]
pub struct PhaseSet(BTreeMap<SiteId, f64>);

impl PhaseSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (SiteId, f64)>) -> Self {
        let mut p = PhaseSet::new();
        for (s, t) in pairs {
            p.add(s, t);
        }
        p
    }

    pub fn uniform<'a>(sites: impl IntoIterator<Item = &'a SiteId>, theta: f64) -> Self {
        Self::from_pairs(sites.into_iter().map(|s| (s.clone(), theta)))
    }

    /// Compose a further rotation on `site`.
    pub fn add(&mut self, site: SiteId, theta: f64) {
        let total = reduce_angle(self.0.get(&site).copied().unwrap_or(0.0) + theta);
        if total.abs() <= ZERO_ANGLE {
            self.0.remove(&site);
        } else {
            self.0.insert(site, total);
        }
    }

    pub fn merge(&mut self, other: &PhaseSet) {
        for (s, t) in &other.0 {
            self.add(s.clone(), *t);
        }
    }

    pub fn negated(&self) -> PhaseSet {
        PhaseSet::from_pairs(self.0.iter().map(|(s, t)| (s.clone(), -t)))
    }

    pub fn get(&self, site: &SiteId) -> f64 {
        self.0.get(site).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SiteId, f64)> {
        self.0.iter().map(|(s, t)| (s, *t))
    }

    pub fn sites(&self) -> impl Iterator<Item = &SiteId> {
        self.0.keys()
    }
}

impl TryFrom<BTreeMap<SiteId, f64>> for PhaseSet {
    type Error = Error;

    fn try_from(map: BTreeMap<SiteId, f64>) -> Result<Self> {
        if let Some((s, t)) = map.iter().find(|(_, t)| !t.is_finite()) {
            return Err(invalid(format!("phase {t} on {s}")));
        }
        Ok(PhaseSet::from_pairs(map))
    }
}

impl From<PhaseSet> for BTreeMap<SiteId, f64> {
    fn from(p: PhaseSet) -> Self {
        p.0
    }
}

pub fn apply_phase_set(state: &ExcitationState, phases: &PhaseSet) -> Result<ExcitationState> {
    let basis = state.basis();
    let pulsed = phases
        .iter()
        .map(|(s, t)| Ok((basis.site_index(s)?, t)))
        .collect::<Result<Vec<_>>>()?;
    if pulsed.is_empty() {
        return Ok(state.clone());
    }
    let mut angle = vec![0.0; basis.sites().len()];
    for (i, t) in pulsed {
        angle[i] = t;
    }
    let mut amps = state.amplitudes().clone();
    for (a, config) in amps.iter_mut().zip(basis.configs()) {
        let theta: f64 = config.iter().map(|&i| angle[i]).sum();
        if theta != 0.0 {
            *a *= Complex64::from_polar(1.0, theta);
        }
    }
    Ok(state.with_amplitudes(amps))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Evolve(f64),
    Phases(PhaseSet),
}

/// Free evolutions interleaved with instantaneous phase pulses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct PulseSchedule {
    steps: Vec<Step>,
}

#[derive(Deserialize)]
struct RawSchedule {
    steps: Vec<Step>,
}

impl TryFrom<RawSchedule> for PulseSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        PulseSchedule::from_steps(raw.steps)
    }
}

impl PulseSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates durations; consecutive steps of the same kind are merged.
    pub fn from_steps(steps: impl IntoIterator<Item = Step>) -> Result<Self> {
        let mut s = PulseSchedule::new();
        for step in steps {
            match step {
                Step::Evolve(t) => s.try_evolve(t)?,
                Step::Phases(p) => {
                    s.pulse(p);
                }
            }
        }
        Ok(s)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn try_evolve(&mut self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("evolution duration {t}")));
        }
        if t == 0.0 {
            return Ok(());
        }
        match self.steps.last_mut() {
            Some(Step::Evolve(prev)) => *prev += t,
            _ => self.steps.push(Step::Evolve(t)),
        }
        Ok(())
    }

    /// Append free evolution; panics on a negative or non-finite duration.
    pub fn evolve(&mut self, t: f64) -> &mut Self {
        self.try_evolve(t).expect("valid evolution duration");
        self
    }

    pub fn pulse(&mut self, p: PhaseSet) -> &mut Self {
        if p.is_empty() {
            return self;
        }
        match self.steps.last_mut() {
            Some(Step::Phases(prev)) => {
                prev.merge(&p);
                if prev.is_empty() {
                    self.steps.pop();
                }
            }
            _ => self.steps.push(Step::Phases(p)),
        }
        self
    }

    pub fn append(&mut self, other: &PulseSchedule) -> &mut Self {
        for step in &other.steps {
            match step {
                Step::Evolve(t) => self.evolve(*t),
                Step::Phases(p) => self.pulse(p.clone()),
            };
        }
        self
    }

    pub fn then(mut self, other: &PulseSchedule) -> Self {
        self.append(other);
        self
    }

    /// Total evolution time; pulses take no time.
    pub fn duration(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Evolve(t) => *t,
                Step::Phases(_) => 0.0,
            })
            .fold(0.0, |a, t| a + t)
    }

    pub fn pulse_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Phases(_)))
            .count()
    }

    /// Steps in reverse order with every angle negated.
    pub fn reversed_negated(&self) -> PulseSchedule {
        let mut out = PulseSchedule::new();
        for step in self.steps.iter().rev() {
            match step {
                Step::Evolve(t) => out.evolve(*t),
                Step::Phases(p) => out.pulse(p.negated()),
            };
        }
        out
    }

    /// Every site touched by some pulse.
    pub fn pulsed_sites(&self) -> std::collections::BTreeSet<SiteId> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Phases(p) => Some(p.sites().cloned().collect::<Vec<_>>()),
                Step::Evolve(_) => None,
            })
            .flatten()
            .collect()
    }
}

pub fn run_schedule(
    state: &ExcitationState,
    schedule: &PulseSchedule,
    sector: &Sector,
) -> Result<ExcitationState> {
    sector.check(state)?;
    let mut psi = state.clone();
    for step in schedule.steps() {
        psi = match step {
            Step::Evolve(t) => sector.evolve(&psi, *t)?,
            Step::Phases(p) => apply_phase_set(&psi, p)?,
        };
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::build_prototype_1d;
    use crate::state::SectorBasis;
    use std::f64::consts::FRAC_PI_2;

    fn ix(n: usize) -> SiteId {
        SiteId::Index(n)
    }

    #[test]
    fn angles_reduce_into_half_open_interval() {
        assert_eq!(reduce_angle(PI), PI);
        assert_eq!(reduce_angle(-PI), PI);
        assert!((reduce_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        let mut p = PhaseSet::new();
        p.add(ix(1), PI);
        p.add(ix(1), PI);
        assert!(p.is_empty());
        p.add(ix(2), 0.0);
        assert!(p.is_empty());
    }

    #[test]
    fn pi_on_q_flips_pair_combination() {
        let g = build_prototype_1d(1).unwrap();
        let b = SectorBasis::single(&g);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = nalgebra::DVector::zeros(4);
        v[1] = Complex64::new(h, 0.0);
        v[2] = Complex64::new(h, 0.0);
        let psi = ExcitationState::new(b, v).unwrap();
        let out = apply_phase_set(&psi, &PhaseSet::from_pairs([(ix(3), PI)])).unwrap();
        assert!((out.amplitudes()[2] + Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!(apply_phase_set(&psi, &PhaseSet::from_pairs([(ix(9), PI)])).is_err());
    }

    #[test]
    fn two_excitation_phases_multiply() {
        let g = build_prototype_1d(1).unwrap();
        let b = SectorBasis::new(&g, 2).unwrap();
        let psi = ExcitationState::excited(b, &[ix(1), ix(2)]).unwrap();
        let p = PhaseSet::from_pairs([(ix(1), 0.3), (ix(2), 0.5), (ix(4), 1.0)]);
        let out = apply_phase_set(&psi, &p).unwrap();
        let i = psi.basis().index_of_sites(&[ix(1), ix(2)]).unwrap();
        assert!((out.amplitudes()[i] - Complex64::from_polar(1.0, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn schedule_building_merges_and_validates() {
        let mut s = PulseSchedule::new();
        s.evolve(1.0).evolve(0.5).evolve(0.0);
        s.pulse(PhaseSet::from_pairs([(ix(1), 1.0)]));
        s.pulse(PhaseSet::from_pairs([(ix(1), -1.0)]));
        assert_eq!(s.steps(), &[Step::Evolve(1.5)]);
        assert!(PulseSchedule::from_steps([Step::Evolve(-1.0)]).is_err());
        assert!(PulseSchedule::from_steps([Step::Evolve(f64::INFINITY)]).is_err());
    }

    #[test]
    fn json_shape() {
        let s = PulseSchedule::from_steps([
            Step::Evolve(FRAC_PI_2),
            Step::Phases(PhaseSet::from_pairs([(ix(3), PI), (ix(6), PI)])),
        ])
        .unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"steps":[{"evolve":1.5707963267948966},{"phases":{"3":3.141592653589793,"6":3.141592653589793}}]}"#
        );
        let back: PulseSchedule = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<PulseSchedule>(r#"{"steps":[{"evolve":-1}]}"#).is_err());
    }

    #[test]
    fn global_pulse_moves_one_block() {
        let g = build_prototype_1d(2).unwrap();
        let sector = Sector::single(&g).unwrap();
        let mut sched = PulseSchedule::new();
        sched
            .evolve(FRAC_PI_2)
            .pulse(PhaseSet::uniform(&[ix(3), ix(6)], PI))
            .evolve(FRAC_PI_2);
        // λ_3 = (|2⟩ − |3⟩)/√2 is the left end of the middle 3-chain.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = nalgebra::DVector::zeros(7);
        v[1] = Complex64::new(h, 0.0);
        v[2] = Complex64::new(-h, 0.0);
        let psi = sector.state(v).unwrap();
        let out = run_schedule(&psi, &sched, &sector).unwrap();
        // λ_5 = (|5⟩ + |6⟩)/√2 flips to λ_6 in the last subsystem.
        let w = out.amplitudes();
        let last = w[4].norm_sqr() + w[5].norm_sqr() + w[6].norm_sqr();
        assert!(1.0 - last < 1e-12, "{w}");
    }

    #[test]
    fn mirrored_schedule_undoes_itself() {
        let g = build_prototype_1d(2).unwrap();
        let sector = Sector::single(&g).unwrap();
        let s = PulseSchedule::from_steps([
            Step::Evolve(0.7),
            Step::Phases(PhaseSet::from_pairs([(ix(3), 1.1), (ix(5), -0.4)])),
            Step::Evolve(1.9),
        ])
        .unwrap();
        let psi = sector.excited(&[ix(4)]).unwrap();
        let mut out = run_schedule(&psi, &s, &sector).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
        for step in s.reversed_negated().steps() {
            out = match step {
                Step::Evolve(t) => sector.evolve(&out, -t).unwrap(),
                Step::Phases(p) => apply_phase_set(&out, p).unwrap(),
            };
        }
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-10);
        assert_eq!(s.reversed_negated().reversed_negated(), s);
        assert!((s.duration() - 2.6).abs() < 1e-15);
        assert_eq!(s.pulse_count(), 1);
        let same = run_schedule(&psi, &PulseSchedule::new(), &sector).unwrap();
        assert_eq!(same.amplitudes(), psi.amplitudes());
    }
}
