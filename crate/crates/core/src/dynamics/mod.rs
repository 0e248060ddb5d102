//! Exact XX dynamics in fixed-excitation sectors and pulse-schedule
//! execution.

mod hamiltonian;
mod schedule;
mod spectral;
mod transfer;

pub use hamiltonian::{sector_hamiltonian, HermitianOperator, HERMITIAN_TOL};
pub use schedule::{apply_phase_set, reduce_angle, run_schedule, PhaseSet, PulseSchedule, Step};
pub use spectral::{evolve, Sector, SpectralCache, RECONSTRUCTION_TOL};
pub use transfer::{transfer_time, DEFAULT_GRID, DEFAULT_T_MAX};
