//! JSON files exchanged by the command-line tool.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::net::{build_star_block, tile_network, CouplingGraph, LatticeKind, LatticeSpec, Prototype, SiteId, TiledNetwork};
use crate::state::{ExcitationState, SectorBasis};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub id: SiteId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: SiteId,
    pub v: SiteId,
    #[serde(rename = "J")]
    pub j: f64,
}

/// How a network file was built, so routers can be reconstructed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NetworkMeta {
    Prototype {
        #[serde(rename = "N")]
        n: usize,
    },
    #[serde(untagged)]
    Lattice {
        kind: LatticeKind,
        #[serde(rename = "M")]
        m: usize,
        d: usize,
        extent: Vec<usize>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        periodic: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub sites: Vec<SiteRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<NetworkMeta>,
}

/// A network read back from disk.
#[derive(Clone, Debug)]
pub enum Network {
    Prototype(Prototype),
    Tiled(TiledNetwork),
    Graph(CouplingGraph),
}

impl Network {
    pub fn graph(&self) -> &CouplingGraph {
        match self {
            Network::Prototype(p) => p.graph(),
            Network::Tiled(t) => t.graph(),
            Network::Graph(g) => g,
        }
    }

    pub fn meta(&self) -> Option<NetworkMeta> {
        match self {
            Network::Prototype(p) => Some(NetworkMeta::Prototype { n: p.diamonds() }),
            Network::Tiled(t) => Some(NetworkMeta::Lattice {
                kind: t.spec().kind(),
                m: t.template().chain_length(),
                d: t.template().d(),
                extent: t.spec().extent().to_vec(),
                periodic: t.spec().is_periodic(),
            }),
            Network::Graph(_) => None,
        }
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile::new(self.graph(), self.meta())
    }
}

impl NetworkFile {
    pub fn new(graph: &CouplingGraph, meta: Option<NetworkMeta>) -> Self {
        NetworkFile {
            sites: graph.sites().iter().map(|s| SiteRecord { id: s.clone() }).collect(),
            edges: graph
                .edge_triples()
                .map(|(u, v, j)| EdgeRecord {
                    u: u.clone(),
                    v: v.clone(),
                    j,
                })
                .collect(),
            meta,
        }
    }

    pub fn graph(&self) -> Result<CouplingGraph> {
        CouplingGraph::new(
            self.sites.iter().map(|s| s.id.clone()).collect(),
            self.edges.iter().map(|e| (e.u.clone(), e.v.clone(), e.j)),
        )
    }

    /// Rebuild the structured network named by `meta`; the stored graph must
    /// match the rebuilt one exactly.
    pub fn load(&self) -> Result<Network> {
        let graph = self.graph()?;
        let net = match &self.meta {
            None => return Ok(Network::Graph(graph)),
            Some(NetworkMeta::Prototype { n }) => Network::Prototype(Prototype::new(*n)?),
            Some(NetworkMeta::Lattice {
                kind,
                m,
                d,
                extent,
                periodic,
            }) => {
                let spec = if *periodic {
                    LatticeSpec::periodic(*kind, extent.clone())?
                } else {
                    LatticeSpec::new(*kind, extent.clone())?
                };
                Network::Tiled(tile_network(&spec, &build_star_block(*m, *d)?)?)
            }
        };
        if net.graph() != &graph {
            return Err(invalid("network file does not match the network its meta describes"));
        }
        Ok(net)
    }
}

/// Amplitudes of a state as `[re, im]` pairs in sector basis order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub k: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateDump {
    pub fn from_state(state: &ExcitationState) -> Self {
        StateDump {
            k: state.basis().k(),
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn into_state(self, graph: &CouplingGraph) -> Result<ExcitationState> {
        let basis = SectorBasis::new(graph, self.k)?;
        let v = DVector::from_iterator(
            self.amplitudes.len(),
            self.amplitudes.into_iter().map(|[re, im]| Complex64::new(re, im)),
        );
        ExcitationState::new(basis, v)
    }
}

/// Summary written next to a compiled route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    /// Blocks (or chain subsystems) visited, as coordinates.
    pub path: Vec<Vec<i32>>,
    pub duration: f64,
    pub fidelity: f64,
    pub pulses: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<serde_json::Value>,
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}
