//! Network construction: coupling graphs, structured site labels, and the
//! bases in which the networks decompose.

mod basis;
mod graph;
mod prototype;
mod pst;
mod site;
mod star;
mod tiling;

pub use basis::{BasisColumn, BasisMap, ORTHONORMAL_TOL};
pub use graph::{CouplingGraph, Edge};
pub use prototype::{build_prototype_1d, lambda_basis_1d, Prototype};
pub use pst::{chain_graph, pst_chain, pst_chain_couplings};
pub use site::{BlockSite, Coord, PairMember, SiteId};
pub use star::{build_star_block, w_state, BlockTemplate, Side};
pub use tiling::{
    tile_network, v_pair_basis, LatticeKind, LatticeSpec, Link, PortDescriptor, TiledNetwork,
};


