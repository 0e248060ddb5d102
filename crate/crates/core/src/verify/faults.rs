use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::net::{Coord, LatticeSpec, TiledNetwork};

/// Blocks known to be broken.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultMap {
    faulty: BTreeSet<Coord>,
}

impl FaultMap {
    pub fn new(spec: &LatticeSpec, faulty: impl IntoIterator<Item = Coord>) -> Result<Self> {
        let faulty: BTreeSet<Coord> = faulty.into_iter().collect();
        if let Some(c) = faulty.iter().find(|c| !spec.contains(c)) {
            return Err(invalid(format!("fault {c} lies outside the lattice")));
        }
        Ok(FaultMap { faulty })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_faulty(&self, c: &Coord) -> bool {
        self.faulty.contains(c)
    }

    pub fn blocks(&self) -> &BTreeSet<Coord> {
        &self.faulty
    }

    pub fn len(&self) -> usize {
        self.faulty.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faulty.is_empty()
    }
}

/// Breadth-first distances from `from` over non-faulty blocks.
pub fn block_distances(spec: &LatticeSpec, faults: &FaultMap, from: &Coord) -> HashMap<Coord, usize> {
    let mut dist = HashMap::new();
    if faults.is_faulty(from) || !spec.contains(from) {
        return dist;
    }
    dist.insert(from.clone(), 0);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(c) = queue.pop_front() {
        let dc = dist[&c];
        for n in spec.neighbors(&c) {
            if !faults.is_faulty(&n) && !dist.contains_key(&n) {
                dist.insert(n.clone(), dc + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Whether `dst` can be reached from `src` through non-faulty blocks.
pub fn reachability(net: &TiledNetwork, faults: &FaultMap, src: &Coord, dst: &Coord) -> bool {
    block_distances(net.spec(), faults, src).contains_key(dst)
}
