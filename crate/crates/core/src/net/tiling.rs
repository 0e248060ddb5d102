use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{pair_combination, unit, BasisColumn, BasisMap};
use super::star::{star_parts, BlockTemplate, Side};
use super::{BlockSite, Coord, CouplingGraph, PairMember, SiteId};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Chain,
    Square,
    Triangular,
    Cubic,
}

impl LatticeKind {
    pub fn dims(self) -> usize {
        match self {
            LatticeKind::Chain => 1,
            LatticeKind::Square | LatticeKind::Triangular => 2,
            LatticeKind::Cubic => 3,
        }
    }

    /// Branches per side a block needs, half the lattice coordination number.
    pub fn required_d(self) -> usize {
        match self {
            LatticeKind::Chain => 1,
            LatticeKind::Square => 2,
            LatticeKind::Triangular | LatticeKind::Cubic => 3,
        }
    }

    /// Lattice vectors served by tail-side branches `1..=d`; the head-side
    /// branch with the same index serves the opposite vector. Triangular
    /// lattices use axial coordinates.
    pub fn directions(self) -> Vec<Vec<i32>> {
        match self {
            LatticeKind::Chain => vec![vec![1]],
            LatticeKind::Square => vec![vec![1, 0], vec![0, 1]],
            LatticeKind::Triangular => vec![vec![1, 0], vec![0, 1], vec![-1, 1]],
            LatticeKind::Cubic => vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Chain => "chain",
            LatticeKind::Square => "square",
            LatticeKind::Triangular => "triangular",
            LatticeKind::Cubic => "cubic",
        }
    }

    /// Graph distance between two lattice points.
    pub fn distance(self, a: &Coord, b: &Coord) -> usize {
        let d: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| (*y - *x) as i64).collect();
        match self {
            LatticeKind::Triangular => {
                ((d[0].abs() + d[1].abs() + (d[0] + d[1]).abs()) / 2) as usize
            }
            _ => d.iter().map(|x| x.unsigned_abs() as usize).sum(),
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(LatticeKind::Chain),
            "square" => Ok(LatticeKind::Square),
            "triangular" => Ok(LatticeKind::Triangular),
            "cubic" => Ok(LatticeKind::Cubic),
            _ => Err(invalid(format!("unknown lattice kind `{s}`"))),
        }
    }
}

/// Box-shaped patch of a lattice: coordinates `0 ≤ x_i < extent_i` (a
/// rhombus for the triangular lattice), optionally wrapped into a torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    kind: LatticeKind,
    extent: Vec<usize>,
    periodic: bool,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, extent: Vec<usize>) -> Result<Self> {
        if extent.len() != kind.dims() {
            return Err(invalid(format!(
                "{kind} lattice needs {} extents, got {}",
                kind.dims(),
                extent.len()
            )));
        }
        if extent.iter().any(|&e| e < 1) {
            return Err(invalid("every extent must be at least 1"));
        }
        if extent.iter().any(|&e| e > i32::MAX as usize) {
            return Err(invalid("extent too large"));
        }
        Ok(LatticeSpec {
            kind,
            extent,
            periodic: false,
        })
    }

    /// Torus without boundary; every branch of every block is linked.
    pub fn periodic(kind: LatticeKind, extent: Vec<usize>) -> Result<Self> {
        let mut spec = Self::new(kind, extent)?;
        if spec.extent.iter().any(|&e| e < 3) {
            return Err(invalid("periodic lattices need every extent ≥ 3"));
        }
        spec.periodic = true;
        Ok(spec)
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Lattice point reached from `c` by `delta`, if it lies in the patch.
    pub fn step(&self, c: &Coord, delta: &[i32]) -> Option<Coord> {
        let mut n = c.offset(delta);
        if self.periodic {
            for (x, &e) in n.0.iter_mut().zip(&self.extent) {
                *x = x.rem_euclid(e as i32);
            }
        }
        self.contains(&n).then_some(n)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn contains(&self, c: &Coord) -> bool {
        c.dims() == self.extent.len()
            && c.0
                .iter()
                .zip(&self.extent)
                .all(|(&x, &e)| x >= 0 && (x as usize) < e)
    }

    /// All blocks in lexicographic order.
    pub fn blocks(&self) -> Vec<Coord> {
        let mut out = vec![Coord::default()];
        for &e in &self.extent {
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..e as i32).map(move |x| {
                        let mut v = c.0.clone();
                        v.push(x);
                        Coord(v)
                    })
                })
                .collect();
        }
        out
    }

    /// Lattice neighbours inside the patch, in lexicographic order.
    pub fn neighbors(&self, c: &Coord) -> Vec<Coord> {
        let mut out: Vec<Coord> = self
            .kind
            .directions()
            .iter()
            .flat_map(|dir| {
                let neg: Vec<i32> = dir.iter().map(|x| -x).collect();
                [self.step(c, dir), self.step(c, &neg)]
            })
            .flatten()
            .collect();
        out.sort();
        out
    }

    pub fn distance(&self, a: &Coord, b: &Coord) -> usize {
        if !self.periodic {
            return self.kind.distance(a, b);
        }
        let mut images = vec![b.clone()];
        for (i, &e) in self.extent.iter().enumerate() {
            images = images
                .into_iter()
                .flat_map(|c| {
                    [-1, 0, 1].map(|w| {
                        let mut v = c.0.clone();
                        v[i] += w * e as i32;
                        Coord(v)
                    })
                })
                .collect();
        }
        images
            .iter()
            .map(|img| self.kind.distance(a, img))
            .min()
            .unwrap()
    }

    /// Which branch of block `a` faces neighbour `b`.
    pub fn facing(&self, a: &Coord, b: &Coord) -> Option<(Side, usize)> {
        for (j0, dir) in self.kind.directions().iter().enumerate() {
            if self.step(a, dir).as_ref() == Some(b) {
                return Some((Side::Tail, j0 + 1));
            }
            let neg: Vec<i32> = dir.iter().map(|x| -x).collect();
            if self.step(a, &neg).as_ref() == Some(b) {
                return Some((Side::Head, j0 + 1));
            }
        }
        None
    }
}

/// Inter-block link: the tail-side branch `direction` of `from` meets the
/// head-side branch `direction` of `to = from + e_direction`.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub id: usize,
    pub from: Coord,
    pub to: Coord,
    pub direction: usize,
}

impl Link {
    pub fn p(&self) -> SiteId {
        SiteId::Pair {
            link: self.id,
            member: PairMember::P,
        }
    }

    /// The member carrying the negative coupling; a π pulse on it hops an
    /// excitation across the link.
    pub fn q(&self) -> SiteId {
        SiteId::Pair {
            link: self.id,
            member: PairMember::Q,
        }
    }

    /// Lexicographically smaller endpoint; owns `(|p⟩+|q⟩)/√2`.
    pub fn symmetric_owner(&self) -> &Coord {
        std::cmp::min(&self.from, &self.to)
    }

    /// Lexicographically larger endpoint; owns `(|p⟩−|q⟩)/√2` and sits on
    /// the side of the negative edge.
    pub fn antisymmetric_owner(&self) -> &Coord {
        std::cmp::max(&self.from, &self.to)
    }

    pub fn other(&self, c: &Coord) -> &Coord {
        if c == &self.from {
            &self.to
        } else {
            &self.from
        }
    }
}

/// How a block's branch terminates.
#[derive(Clone, Debug, PartialEq)]
pub enum PortDescriptor {
    /// Plain extremal site on the lattice boundary.
    Physical(SiteId),
    /// `(|p⟩+|q⟩)/√2` of the link.
    Symmetric { link: usize },
    /// `(|p⟩−|q⟩)/√2` of the link.
    Antisymmetric { link: usize },
}

impl PortDescriptor {
    pub fn link(&self) -> Option<usize> {
        match self {
            PortDescriptor::Physical(_) => None,
            PortDescriptor::Symmetric { link } | PortDescriptor::Antisymmetric { link } => {
                Some(*link)
            }
        }
    }
}

/// A lattice of star blocks. Each pair of adjacent blocks shares a V-pair
/// `{p, q}` in place of their two facing extremal sites; under the V-pair
/// basis every block is an exact copy of the template star.
#[derive(Clone, Debug)]
pub struct TiledNetwork {
    spec: LatticeSpec,
    template: BlockTemplate,
    graph: CouplingGraph,
    links: Vec<Link>,
    port_map: BTreeMap<(Coord, usize), PortDescriptor>,
    blocks: Vec<Coord>,
    block_index: HashMap<Coord, usize>,
}

pub fn tile_network(spec: &LatticeSpec, template: &BlockTemplate) -> Result<TiledNetwork> {
    TiledNetwork::new(spec.clone(), template.clone())
}

impl TiledNetwork {
    pub fn new(spec: LatticeSpec, template: BlockTemplate) -> Result<Self> {
        let need = spec.kind().required_d();
        if template.d() != need {
            return Err(invalid(format!(
                "{} lattice needs d = {need} branches per side, block has d = {}",
                spec.kind(),
                template.d()
            )));
        }
        let d = template.d();
        let dirs = spec.kind().directions();
        let blocks = spec.blocks();

        let mut links = Vec::new();
        for b in &blocks {
            for (j0, dir) in dirs.iter().enumerate() {
                if let Some(to) = spec.step(b, dir) {
                    links.push(Link {
                        id: links.len(),
                        from: b.clone(),
                        to,
                        direction: j0 + 1,
                    });
                }
            }
        }

        let mut port_map = BTreeMap::new();
        let mut linked: BTreeSet<(Coord, usize)> = BTreeSet::new();
        for l in &links {
            let tail = template.branch(Side::Tail, l.direction);
            let head = template.branch(Side::Head, l.direction);
            linked.insert((l.from.clone(), tail));
            linked.insert((l.to.clone(), head));
            for (c, br) in [(&l.from, tail), (&l.to, head)] {
                let desc = if c == l.symmetric_owner() {
                    PortDescriptor::Symmetric { link: l.id }
                } else {
                    PortDescriptor::Antisymmetric { link: l.id }
                };
                port_map.insert((c.clone(), br), desc);
            }
        }

        let couplings = template.chain_couplings();
        let mut sites = Vec::new();
        let mut edges = Vec::new();
        for b in &blocks {
            let (s, e) = star_parts(b, template.chain_length(), d, couplings, |br, c| {
                !linked.contains(&(c.clone(), br))
            });
            sites.extend(s);
            edges.extend(e);
            for br in 1..=2 * d {
                port_map
                    .entry((b.clone(), br))
                    .or_insert_with(|| PortDescriptor::Physical(SiteId::arm(b.clone(), br, 1)));
            }
        }
        let w = couplings[0] / 2f64.sqrt();
        for l in &links {
            let tail = template.branch(Side::Tail, l.direction);
            let head = template.branch(Side::Head, l.direction);
            let pen = |c: &Coord| {
                if c == &l.from {
                    SiteId::arm(c.clone(), tail, 2)
                } else {
                    SiteId::arm(c.clone(), head, 2)
                }
            };
            let lo = pen(l.symmetric_owner());
            let hi = pen(l.antisymmetric_owner());
            sites.push(l.p());
            sites.push(l.q());
            edges.push((lo.clone(), l.p(), w));
            edges.push((lo, l.q(), w));
            edges.push((hi.clone(), l.p(), w));
            edges.push((hi, l.q(), -w));
        }

        let graph = CouplingGraph::new(sites, edges)?;
        let block_index = blocks
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        Ok(TiledNetwork {
            spec,
            template,
            graph,
            links,
            port_map,
            blocks,
            block_index,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn template(&self) -> &BlockTemplate {
        &self.template
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn blocks(&self) -> &[Coord] {
        &self.blocks
    }

    pub fn block_index(&self, c: &Coord) -> Option<usize> {
        self.block_index.get(c).copied()
    }

    pub fn port_map(&self) -> &BTreeMap<(Coord, usize), PortDescriptor> {
        &self.port_map
    }

    pub fn port(&self, block: &Coord, side: Side, j: usize) -> Result<&PortDescriptor> {
        let br = self.template.branch(side, j);
        self.port_map
            .get(&(block.clone(), br))
            .ok_or_else(|| invalid(format!("no port {side:?}{j} on block {block}")))
    }

    pub fn link_between(&self, a: &Coord, b: &Coord) -> Option<&Link> {
        self.links
            .iter()
            .find(|l| (&l.from == a && &l.to == b) || (&l.from == b && &l.to == a))
    }

    /// Single-excitation vector of a block's effective port state.
    pub fn port_vector(&self, block: &Coord, side: Side, j: usize) -> Result<DVector<Complex64>> {
        let n = self.graph.len();
        Ok(match self.port(block, side, j)? {
            PortDescriptor::Physical(s) => unit(n, self.graph.index_of(s).unwrap()),
            PortDescriptor::Symmetric { link } | PortDescriptor::Antisymmetric { link } => {
                let l = &self.links[*link];
                let sign = if matches!(self.port(block, side, j)?, PortDescriptor::Symmetric { .. })
                {
                    1.0
                } else {
                    -1.0
                };
                pair_combination(
                    n,
                    self.graph.index_of(&l.p()).unwrap(),
                    self.graph.index_of(&l.q()).unwrap(),
                    sign,
                )
            }
        })
    }

    /// Physical sites that realise a phase gate on a block's effective port:
    /// the extremal site itself, or both members of a shared pair.
    pub fn port_pulse_sites(&self, block: &Coord, side: Side, j: usize) -> Result<Vec<SiteId>> {
        Ok(match self.port(block, side, j)? {
            PortDescriptor::Physical(s) => vec![s.clone()],
            PortDescriptor::Symmetric { link } | PortDescriptor::Antisymmetric { link } => {
                let l = &self.links[*link];
                vec![l.p(), l.q()]
            }
        })
    }

    /// Every physical extremal site on the lattice boundary, with the block
    /// and port it belongs to.
    pub fn boundary_ports(&self) -> Vec<(Coord, Side, usize, SiteId)> {
        self.port_map
            .iter()
            .filter_map(|((c, br), desc)| match desc {
                PortDescriptor::Physical(s) => {
                    let (side, j) = self.template.branch_side(*br);
                    Some((c.clone(), side, j, s.clone()))
                }
                _ => None,
            })
            .collect()
    }

    /// Block and port of a physical boundary port site.
    pub fn locate_boundary_port(&self, site: &SiteId) -> Option<(Coord, Side, usize)> {
        match site {
            SiteId::Block {
                block,
                site: BlockSite::Arm { branch, depth: 1 },
            } => match self.port_map.get(&(block.clone(), *branch)) {
                Some(PortDescriptor::Physical(s)) if s == site => {
                    let (side, j) = self.template.branch_side(*branch);
                    Some((block.clone(), side, j))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Index of the template site that `site` plays inside `block`.
    fn template_position(&self, site: &BlockSite) -> usize {
        self.template
            .graph()
            .index_of(&SiteId::Block {
                block: Coord::default(),
                site: *site,
            })
            .expect("block site exists in the template")
    }

    /// Basis in which every shared pair is replaced by its symmetric and
    /// antisymmetric combinations. Columns are tagged by block index and by
    /// the template site index they stand in for.
    pub fn v_pair_basis(&self) -> BasisMap {
        let n = self.graph.len();
        let mut cols = Vec::with_capacity(n);
        for (i, s) in self.graph.sites().iter().enumerate() {
            match s {
                SiteId::Block { block, site } => cols.push(BasisColumn {
                    vector: unit(n, i),
                    subsystem: self.block_index[block],
                    position: self.template_position(site),
                }),
                SiteId::Pair {
                    link,
                    member: PairMember::P,
                } => {
                    let l = &self.links[*link];
                    let iq = self.graph.index_of(&l.q()).unwrap();
                    for (owner, sign) in [(l.symmetric_owner(), 1.0), (l.antisymmetric_owner(), -1.0)] {
                        let br = if owner == &l.from {
                            self.template.branch(Side::Tail, l.direction)
                        } else {
                            self.template.branch(Side::Head, l.direction)
                        };
                        cols.push(BasisColumn {
                            vector: pair_combination(n, i, iq, sign),
                            subsystem: self.block_index[owner],
                            position: self.template_position(&BlockSite::Arm {
                                branch: br,
                                depth: 1,
                            }),
                        });
                    }
                }
                SiteId::Pair { .. } => {}
                SiteId::Index(_) => unreachable!("tilings only contain structured sites"),
            }
        }
        BasisMap::new(cols).expect("V-pair basis is orthonormal")
    }
}

pub fn v_pair_basis(net: &TiledNetwork) -> BasisMap {
    net.v_pair_basis()
}
