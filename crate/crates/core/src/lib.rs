//! Perfect quantum routing on regular XX spin networks.
//!
//! The crate is organised around four layers:
//!
//! * [`net`] builds coupling graphs: the quasi-1D diamond prototype, perfect
//!   state transfer chains, star blocks, and d-dimensional tilings of star
//!   blocks joined by shared V-pairs, together with the structural bases
//!   (λ-basis, W-basis, V-pair basis) in which they decompose.
//! * [`dynamics`] simulates the XX Hamiltonian exactly in any fixed
//!   excitation sector and executes pulse schedules.
//! * [`compiler`] turns routing requests into verified pulse schedules.
//! * [`verify`] holds structural identity checks and percolation statistics.
//!
//! All times are dimensionless (ħ = 1). The single-excitation convention is
//! `⟨m|H|n⟩ = J_{n,m}`, which follows from `½(XX + YY)|01⟩ = |10⟩`.

pub mod compiler;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod net;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use net::{CouplingGraph, SiteId};
pub use num_complex::Complex64;
pub use state::{ExcitationState, SectorBasis};
